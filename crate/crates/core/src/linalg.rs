//! Dense nonnegative/Metzler matrix utilities: irreducibility, dominant
//! eigenpairs, spectral radii, weighted sup-norm matrix measures and Hurwitz
//! tests for Metzler matrices.
//!
//! Everything here targets small dense matrices (n up to a few hundred).
//! Spectral radii are computed by power iteration on `M + I`; the shift
//! removes periodicity (`rho(M + I) = rho(M) + 1` for nonnegative `M`), so
//! the iteration converges for every nonnegative matrix with a start vector
//! of all ones.

use std::ops::{Index, IndexMut};

use crate::error::{Result, SisError};
use crate::scalar::{cst, cstu, default_tol, Scalar};

/// Iteration cap for power iteration unless the caller overrides it.
pub const DEFAULT_POWER_ITER_CAP: usize = 100_000;

/// Which dominant eigenvector of a matrix to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Square dense matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Zero matrix of dimension `n`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Build from nested rows. Panics on ragged or empty input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(n > 0, "matrix dimension must be positive");
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    /// Build from a function of the index pair.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Diagonal matrix from a slice.
    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `out = M x`.
    pub fn mul_vec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = T::zero();
            for j in 0..self.n {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// `self + s * I`.
    pub fn add_scaled_identity(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += s;
        }
        m
    }

    /// Entrywise `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: T) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut m = self.clone();
        for (a, &b) in m.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        m
    }

    pub fn scale(&self, c: T) -> Self {
        let mut m = self.clone();
        for a in m.data.iter_mut() {
            *a *= c;
        }
        m
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let n = self.n;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / n, k % n, v))
    }

    /// True iff every entry is `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|v| *v >= T::zero())
    }

    pub(crate) fn check_nonnegative(&self, field: &str) -> Result<()> {
        for (i, j, v) in self.iter_entries() {
            if v < T::zero() {
                return Err(SisError::NegativeEntry {
                    field: field.to_string(),
                    row: i,
                    col: j,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self, field: &str) -> Result<()> {
        for (i, j, v) in self.iter_entries() {
            if !v.is_finite() {
                return Err(SisError::NonFiniteEntry {
                    field: field.to_string(),
                    row: i,
                    col: j,
                });
            }
        }
        Ok(())
    }

    /// True iff every off-diagonal entry is `>= 0`.
    pub fn is_metzler(&self) -> bool {
        self.iter_entries()
            .all(|(i, j, v)| i == j || v >= T::zero())
    }

    fn check_metzler(&self) -> Result<()> {
        for (i, j, v) in self.iter_entries() {
            if i != j && v < T::zero() {
                return Err(SisError::NotMetzler {
                    row: i,
                    col: j,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// True iff the digraph with an edge `i -> j` whenever `M[i,j] > 0` is
    /// strongly connected. Decided by two reachability sweeps (forward and
    /// backward from node 0), not by matrix powers.
    pub fn is_irreducible(&self) -> Result<bool> {
        self.check_nonnegative("matrix")?;
        Ok(self.reaches_all(false) && self.reaches_all(true))
    }

    fn reaches_all(&self, reversed: bool) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if reversed { self[(v, u)] } else { self[(u, v)] };
                if w > T::zero() && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Spectral radius of a nonnegative matrix within `tol`, with the default
    /// iteration cap.
    pub fn spectral_radius(&self, tol: T) -> Result<T> {
        self.spectral_radius_with_cap(tol, DEFAULT_POWER_ITER_CAP)
    }

    /// Spectral radius with an explicit iteration cap.
    pub fn spectral_radius_with_cap(&self, tol: T, cap: usize) -> Result<T> {
        debug_assert!(self.is_nonnegative(), "spectral_radius requires M >= 0");
        let (rho, _) = power_iteration(self, tol, cap)?;
        Ok(rho)
    }

    /// Dominant eigenpair of an irreducible nonnegative matrix.
    ///
    /// The vector is strictly positive and normalized to unit sum; the left
    /// eigenvector is obtained by iterating on the transpose. The returned
    /// residual is `max_i |(M v - rho v)_i|`.
    pub fn perron_eigenpair(&self, side: Side, tol: T) -> Result<EigenPair<T>> {
        if !self.is_irreducible()? {
            return Err(SisError::NotIrreducible {
                field: "matrix".to_string(),
            });
        }
        let work = match side {
            Side::Right => self.clone(),
            Side::Left => self.transpose(),
        };
        let (rho, vector) = power_iteration(&work, tol, DEFAULT_POWER_ITER_CAP)?;
        let mv = work.mul_vec(&vector);
        let residual = mv
            .iter()
            .zip(&vector)
            .fold(T::zero(), |m, (&a, &v)| m.max((a - rho * v).abs()));
        Ok(EigenPair {
            value: rho,
            vector,
            residual,
        })
    }

    /// Weighted sup-norm matrix measure
    /// `mu(M) = max_i ( m_ii + w_i * sum_{j != i} |m_ij| / w_j )`
    /// for the norm `|x| = max_i |w_i x_i|`.
    pub fn matrix_measure_inf(&self, weights: &WeightVector<T>) -> T {
        assert_eq!(self.n, weights.len(), "dimension mismatch");
        let w = weights.as_slice();
        let mut worst = T::neg_infinity();
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = row[i];
            for j in 0..self.n {
                if j != i {
                    acc += w[i] * row[j].abs() / w[j];
                }
            }
            worst = worst.max(acc);
        }
        worst
    }

    /// Stability margin of a Metzler matrix: with `s = max_i |m_ii|` the
    /// shift `M + sI` is nonnegative and the spectral abscissa of `M` equals
    /// `rho(M + sI) - s`. Returns `s - rho(M + sI)`, positive iff Hurwitz.
    pub fn hurwitz_margin(&self) -> Result<T> {
        self.check_metzler()?;
        let s = (0..self.n).fold(T::zero(), |m, i| m.max(self[(i, i)].abs()));
        let shifted = self.add_scaled_identity(s);
        let rho = shifted.spectral_radius(default_tol::<T>())?;
        Ok(s - rho)
    }

    /// Hurwitz test for a Metzler matrix. Equivalent to the existence of a
    /// strictly positive `w` with `M w` strictly negative. Strict: the margin
    /// must exceed the default tolerance.
    pub fn is_hurwitz_metzler(&self) -> Result<bool> {
        Ok(self.hurwitz_margin()? > default_tol::<T>())
    }
}

impl<T: Scalar> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Dominant eigenvalue with its eigenvector (strictly positive, unit sum)
/// and the achieved sup-norm residual.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
    pub residual: T,
}

/// Strictly positive weight vector for weighted sup-norms.
#[derive(Debug, Clone)]
pub struct WeightVector<T> {
    w: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() || v <= T::zero() {
                return Err(SisError::NonpositiveWeight {
                    index: i,
                    value: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    /// Entrywise reciprocal.
    pub fn reciprocal(&self) -> Self {
        Self {
            w: self.w.iter().map(|&v| T::one() / v).collect(),
        }
    }
}

/// Power iteration on `M + I` from the all-ones direction. Converged when two
/// successive Rayleigh-quotient estimates differ by at most `tol` and the
/// eigen-residual of the iterate is within `10 tol` (or at the floating-point
/// floor of the eigenvalue scale, whichever is larger); the residual guard
/// keeps the result accurate even when a small spectral gap lets the Rayleigh
/// estimates settle before the iterate does. Returns `rho(M)` and the
/// verified unit-sum iterate.
fn power_iteration<T: Scalar>(m: &DenseMatrix<T>, tol: T, cap: usize) -> Result<(T, Vec<T>)> {
    let n = m.n();
    let mut x = vec![T::one() / cstu::<T>(n); n];
    let mut y = vec![T::zero(); n];
    let mut prev: Option<T> = None;
    let ten = cst::<T>(10.0);
    let floor_scale = cstu::<T>(16 * n) * T::epsilon();
    for _ in 0..cap {
        m.mul_vec_into(&x, &mut y);
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi += xi;
        }
        let num = x.iter().zip(&y).map(|(&a, &b)| a * b).sum::<T>();
        let den = x.iter().map(|&a| a * a).sum::<T>();
        let lambda = num / den;
        // (M + I) x = y, so the eigen-residual of x is |y - lambda x|.
        let residual = x
            .iter()
            .zip(&y)
            .fold(T::zero(), |r, (&xi, &yi)| r.max((yi - lambda * xi).abs()));
        let residual_ok = residual <= ten * tol || residual <= floor_scale * lambda.abs();
        if let Some(p) = prev {
            if (lambda - p).abs() <= tol && residual_ok {
                return Ok((lambda - T::one(), x));
            }
        }
        let total = y.iter().copied().sum::<T>();
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / total;
        }
        prev = Some(lambda);
    }
    Err(SisError::NoConvergence { max_iter: cap })
}
