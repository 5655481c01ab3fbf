//! Model containers, validation, vector fields and Jacobians for the scalar,
//! simplicial and general higher-order SIS models.
//!
//! A simplicial model couples `n` groups through a pairwise contact matrix
//! `A` and per-group higher-order weight matrices `B_i`; group `i` recovers
//! at rate `gamma_i` and is infected at rate `beta1` through edges and
//! `beta2` through three-way interactions:
//!
//! ```text
//! dx_i/dt = -gamma_i x_i + beta1 (1 - x_i) sum_j a_ij x_j
//!                        + beta2 (1 - x_i) sum_{j,k} b_ijk x_j x_k
//! ```
//!
//! Models are immutable after construction; every evaluation here is a pure
//! function, safe to call from any number of threads.

use crate::error::{Result, SisError};
use crate::linalg::DenseMatrix;
use crate::scalar::{cst, Scalar};

/// States within this distance outside `[0,1]` are clamped; anything farther
/// out is rejected as `OutOfDomain`. Integrators produce harmless rounding
/// excursions at the boundary.
pub const DOMAIN_CLAMP_TOL: f64 = 1e-9;

/// Per-group infection fractions, entrywise in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    x: Vec<T>,
}

impl<T: Scalar> StateVector<T> {
    /// Validate and build a state. Entries within [`DOMAIN_CLAMP_TOL`] of the
    /// unit interval are clamped onto it.
    pub fn new(x: Vec<T>) -> Result<Self> {
        Self::with_excursion(x).map(|(s, _)| s)
    }

    /// Like [`StateVector::new`], additionally reporting the largest boundary
    /// excursion that was clamped away.
    pub fn with_excursion(mut x: Vec<T>) -> Result<(Self, T)> {
        let tol = cst::<T>(DOMAIN_CLAMP_TOL);
        let mut excursion = T::zero();
        for (i, xi) in x.iter_mut().enumerate() {
            if !xi.is_finite() {
                return Err(SisError::OutOfDomain {
                    index: i,
                    value: xi.to_f64().unwrap_or(f64::NAN),
                });
            }
            if *xi < T::zero() {
                let d = -*xi;
                if d > tol {
                    return Err(SisError::OutOfDomain {
                        index: i,
                        value: xi.to_f64().unwrap_or(f64::NAN),
                    });
                }
                excursion = excursion.max(d);
                *xi = T::zero();
            } else if *xi > T::one() {
                let d = *xi - T::one();
                if d > tol {
                    return Err(SisError::OutOfDomain {
                        index: i,
                        value: xi.to_f64().unwrap_or(f64::NAN),
                    });
                }
                excursion = excursion.max(d);
                *xi = T::one();
            }
        }
        Ok((Self { x }, excursion))
    }

    /// Constant state `value * 1_n`.
    pub fn uniform(n: usize, value: T) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![T::zero(); n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            x: vec![T::one(); n],
        }
    }

    /// Internal constructor for values already known to lie in `[0,1]`.
    pub(crate) fn from_unit_unchecked(x: Vec<T>) -> Self {
        debug_assert!(x.iter().all(|v| *v >= T::zero() && *v <= T::one()));
        Self { x }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.x
    }

    pub fn sup_norm(&self) -> T {
        crate::scalar::sup_norm(&self.x)
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        crate::scalar::sup_norm_diff(&self.x, &other.x)
    }
}

fn check_rate<T: Scalar>(field: &str, value: T, strictly_positive: bool) -> Result<()> {
    let bad = !value.is_finite()
        || (strictly_positive && value <= T::zero())
        || (!strictly_positive && value < T::zero());
    if bad {
        return Err(SisError::NonpositiveRate {
            field: field.to_string(),
            value: value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// The rate-free part of a simplicial model: recovery rates and contact
/// structure, without `beta1`/`beta2`. Validated once; parameter sweeps
/// instantiate concrete models from it per grid cell.
#[derive(Debug, Clone)]
pub struct SisTemplate<T> {
    n: usize,
    gamma: Vec<T>,
    a: DenseMatrix<T>,
    b: Vec<DenseMatrix<T>>,
    /// `true` at `i` iff `B_i` has a nonzero entry.
    higher_active: Vec<bool>,
    /// Nonzero `(j, k, b_ijk)` triples per target `i`, in row-major order.
    b_triples: Vec<Vec<(usize, usize, T)>>,
    /// Row `i` holds the column sums of `B_i`; this is the matrix
    /// `(1^T B_1, ..., 1^T B_n)^T` of the disease-free condition.
    b_column_sums: DenseMatrix<T>,
}

impl<T: Scalar> SisTemplate<T> {
    pub fn new(gamma: Vec<T>, a: DenseMatrix<T>, b: Vec<DenseMatrix<T>>) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(SisError::InvalidStructure("empty model".into()));
        }
        if a.n() != n {
            return Err(SisError::InvalidStructure(format!(
                "A is {}x{} but gamma has {} entries",
                a.n(),
                a.n(),
                n
            )));
        }
        if b.len() != n {
            return Err(SisError::InvalidStructure(format!(
                "expected {} higher-order matrices, got {}",
                n,
                b.len()
            )));
        }
        for (i, &g) in gamma.iter().enumerate() {
            check_rate(&format!("gamma[{i}]"), g, true)?;
        }
        a.check_finite("A")?;
        a.check_nonnegative("A")?;
        if !a.is_irreducible()? {
            return Err(SisError::NotIrreducible { field: "A".into() });
        }
        let mut higher_active = Vec::with_capacity(n);
        let mut b_triples = Vec::with_capacity(n);
        let mut b_column_sums = DenseMatrix::zeros(n);
        for (i, bi) in b.iter().enumerate() {
            if bi.n() != n {
                return Err(SisError::InvalidStructure(format!(
                    "B[{i}] has dimension {}, expected {n}",
                    bi.n()
                )));
            }
            let field = format!("B[{i}]");
            bi.check_finite(&field)?;
            bi.check_nonnegative(&field)?;
            let mut triples = Vec::new();
            for (j, k, w) in bi.iter_entries() {
                if w != T::zero() {
                    triples.push((j, k, w));
                    b_column_sums[(i, k)] += w;
                }
            }
            higher_active.push(!triples.is_empty());
            b_triples.push(triples);
        }
        Ok(Self {
            n,
            gamma,
            a,
            b,
            higher_active,
            b_triples,
            b_column_sums,
        })
    }

    /// Classical multi-group template: all `B_i` zero.
    pub fn classical(gamma: Vec<T>, a: DenseMatrix<T>) -> Result<Self> {
        let n = gamma.len();
        Self::new(gamma, a, vec![DenseMatrix::zeros(n.max(1)); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn a(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &[DenseMatrix<T>] {
        &self.b
    }

    /// Per-group flag: does group `i` take part in any higher-order
    /// interaction (`B_i != 0`)?
    pub fn higher_active(&self) -> &[bool] {
        &self.higher_active
    }

    pub fn b_column_sums(&self) -> &DenseMatrix<T> {
        &self.b_column_sums
    }

    pub(crate) fn b_triples(&self) -> &[Vec<(usize, usize, T)>] {
        &self.b_triples
    }

    /// `Gamma^{-1} A`.
    pub fn gamma_inv_a(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, |i, j| self.a[(i, j)] / self.gamma[i])
    }

    /// Quadratic form `x^T B_i x`, accumulated over the stored triples in
    /// row-major order (flat, unfactored products so that an order-2
    /// hyperedge mirror reproduces the sum bit for bit).
    pub(crate) fn quad_form(&self, i: usize, x: &[T]) -> T {
        let mut acc = T::zero();
        for &(j, k, w) in &self.b_triples[i] {
            acc += (w * x[j]) * x[k];
        }
        acc
    }

    /// Attach infection rates, producing a concrete model.
    pub fn instantiate(&self, beta1: T, beta2: T) -> Result<SimplicialSis<T>> {
        check_rate("beta1", beta1, false)?;
        check_rate("beta2", beta2, false)?;
        Ok(SimplicialSis {
            tpl: self.clone(),
            beta1,
            beta2,
        })
    }
}

/// Validated simplicial SIS model: a [`SisTemplate`] plus infection rates.
///
/// Invariants established at construction: all recovery rates strictly
/// positive, `A` nonnegative and irreducible, every `B_i` nonnegative, rates
/// nonnegative and finite.
#[derive(Debug, Clone)]
pub struct SimplicialSis<T> {
    tpl: SisTemplate<T>,
    beta1: T,
    beta2: T,
}

impl<T: Scalar> SimplicialSis<T> {
    /// Validating constructor.
    pub fn new(
        gamma: Vec<T>,
        a: DenseMatrix<T>,
        b: Vec<DenseMatrix<T>>,
        beta1: T,
        beta2: T,
    ) -> Result<Self> {
        SisTemplate::new(gamma, a, b)?.instantiate(beta1, beta2)
    }

    /// Classical multi-group SIS model (no higher-order terms).
    pub fn classical(gamma: Vec<T>, a: DenseMatrix<T>, beta1: T) -> Result<Self> {
        SisTemplate::classical(gamma, a)?.instantiate(beta1, T::zero())
    }

    pub fn template(&self) -> &SisTemplate<T> {
        &self.tpl
    }

    pub fn n(&self) -> usize {
        self.tpl.n
    }

    pub fn gamma(&self) -> &[T] {
        &self.tpl.gamma
    }

    pub fn a(&self) -> &DenseMatrix<T> {
        &self.tpl.a
    }

    pub fn b(&self) -> &[DenseMatrix<T>] {
        &self.tpl.b
    }

    pub fn beta1(&self) -> T {
        self.beta1
    }

    pub fn beta2(&self) -> T {
        self.beta2
    }

    pub fn higher_active(&self) -> &[bool] {
        &self.tpl.higher_active
    }

    /// Same structure, different rates.
    pub fn with_rates(&self, beta1: T, beta2: T) -> Result<Self> {
        self.tpl.instantiate(beta1, beta2)
    }

    /// Raw field evaluation on a bare slice, defined for any real input (the
    /// right-hand side is polynomial). Used by integrators on intermediate
    /// Runge-Kutta stages.
    pub(crate) fn field_raw(&self, x: &[T], out: &mut [T]) {
        let n = self.tpl.n;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let row = self.tpl.a.row(i);
            let mut pair = T::zero();
            for j in 0..n {
                pair += row[j] * x[j];
            }
            let mut inner = self.beta1 * pair;
            inner += self.beta2 * self.tpl.quad_form(i, x);
            out[i] = -self.tpl.gamma[i] * x[i] + (T::one() - x[i]) * inner;
        }
    }

    /// Model right-hand side `f(x)`.
    pub fn vector_field(&self, x: &StateVector<T>) -> Vec<T> {
        assert_eq!(x.len(), self.n(), "state dimension mismatch");
        let mut out = vec![T::zero(); self.n()];
        self.field_raw(x.as_slice(), &mut out);
        out
    }

    /// Analytic Jacobian `Df(x)`; Metzler for every `x` in the unit box.
    pub fn jacobian(&self, x: &StateVector<T>) -> DenseMatrix<T> {
        assert_eq!(x.len(), self.n(), "state dimension mismatch");
        let n = self.n();
        let xs = x.as_slice();
        let ax = self.tpl.a.mul_vec(xs);
        let mut jac = DenseMatrix::zeros(n);
        for i in 0..n {
            let one_minus = T::one() - xs[i];
            // ((B_i + B_i^T) x)_m assembled from the stored triples.
            let mut bsym_x = vec![T::zero(); n];
            for &(j, k, w) in &self.tpl.b_triples[i] {
                bsym_x[j] += w * xs[k];
                bsym_x[k] += w * xs[j];
            }
            let quad = self.tpl.quad_form(i, xs);
            for m in 0..n {
                let mut v = self.beta1 * one_minus * self.tpl.a[(i, m)]
                    + self.beta2 * one_minus * bsym_x[m];
                if m == i {
                    v += -self.tpl.gamma[i] - self.beta1 * ax[i] - self.beta2 * quad;
                }
                jac[(i, m)] = v;
            }
        }
        jac
    }

    /// Matrix `D(x, x*)` with `f(x) - f(x*) = D(x, x*) (x - x*)`. The
    /// identity holds for every pair of states, not only when `x*` is an
    /// equilibrium; at `x = x*` it coincides with the Jacobian.
    pub fn decomposition(&self, x: &StateVector<T>, xstar: &StateVector<T>) -> DenseMatrix<T> {
        assert_eq!(x.len(), self.n(), "state dimension mismatch");
        assert_eq!(xstar.len(), self.n(), "state dimension mismatch");
        let n = self.n();
        let xs = x.as_slice();
        let xst = xstar.as_slice();
        let ax = self.tpl.a.mul_vec(xs);
        let mut dec = DenseMatrix::zeros(n);
        for i in 0..n {
            let one_minus_star = T::one() - xst[i];
            // (B_i^T x*)_m and (B_i x)_m from the triples.
            let mut bt_xstar = vec![T::zero(); n];
            let mut b_x = vec![T::zero(); n];
            for &(j, k, w) in &self.tpl.b_triples[i] {
                bt_xstar[k] += w * xst[j];
                b_x[j] += w * xs[k];
            }
            let quad = self.tpl.quad_form(i, xs);
            for m in 0..n {
                let mut v = self.beta1 * one_minus_star * self.tpl.a[(i, m)]
                    + self.beta2 * one_minus_star * (bt_xstar[m] + b_x[m]);
                if m == i {
                    v += -self.tpl.gamma[i] - self.beta1 * ax[i] - self.beta2 * quad;
                }
                dec[(i, m)] = v;
            }
        }
        dec
    }

    /// Mirror this model as an order-2 general higher-order model; the two
    /// vector fields agree exactly.
    pub fn to_higher_order(&self) -> Result<HigherOrderSis<T>> {
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for &(j, k, w) in &self.tpl.b_triples[i] {
                edges.push(Hyperedge {
                    target: i,
                    sources: vec![j, k],
                    weight: w,
                });
            }
        }
        HigherOrderSis::new(
            self.tpl.gamma.clone(),
            self.tpl.a.clone(),
            self.beta1,
            vec![InteractionOrder {
                k: 2,
                beta: self.beta2,
                edges,
            }],
        )
    }
}

/// Hyperedges of one interaction order grouped by target group: entry `i`
/// lists the `(sources, weight)` pairs aimed at group `i`.
type TargetedEdges<T> = Vec<Vec<(Vec<usize>, T)>>;

/// One hyperedge of the general model: `target` is infected jointly by the
/// `k` source groups with the given weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge<T> {
    pub target: usize,
    pub sources: Vec<usize>,
    pub weight: T,
}

/// All interactions of one order `k` with their shared rate `beta_k`.
#[derive(Debug, Clone)]
pub struct InteractionOrder<T> {
    pub k: usize,
    pub beta: T,
    pub edges: Vec<Hyperedge<T>>,
}

/// General higher-order SIS model: pairwise contacts plus arbitrary sparse
/// interaction terms of orders `k` in `{2, ..., n-1}`.
#[derive(Debug, Clone)]
pub struct HigherOrderSis<T> {
    n: usize,
    gamma: Vec<T>,
    a: DenseMatrix<T>,
    beta1: T,
    orders: Vec<InteractionOrder<T>>,
    /// Edges of each order regrouped by target, preserving insertion order.
    by_target: Vec<TargetedEdges<T>>,
    /// `true` at `i` iff the total higher-order weight into `i` is positive.
    higher_active: Vec<bool>,
}

impl<T: Scalar> HigherOrderSis<T> {
    pub fn new(
        gamma: Vec<T>,
        a: DenseMatrix<T>,
        beta1: T,
        orders: Vec<InteractionOrder<T>>,
    ) -> Result<Self> {
        let n = gamma.len();
        if n == 0 {
            return Err(SisError::InvalidStructure("empty model".into()));
        }
        if a.n() != n {
            return Err(SisError::InvalidStructure(format!(
                "A is {}x{} but gamma has {} entries",
                a.n(),
                a.n(),
                n
            )));
        }
        for (i, &g) in gamma.iter().enumerate() {
            check_rate(&format!("gamma[{i}]"), g, true)?;
        }
        a.check_finite("A")?;
        a.check_nonnegative("A")?;
        if !a.is_irreducible()? {
            return Err(SisError::NotIrreducible { field: "A".into() });
        }
        check_rate("beta1", beta1, false)?;

        let mut seen_orders = std::collections::HashSet::new();
        let mut by_target: Vec<TargetedEdges<T>> = vec![Vec::new(); orders.len()];
        let mut weight_into = vec![T::zero(); n];
        // Orders run over {2, ..., n-1}; order 2 is admitted for every n so
        // that any simplicial model embeds as an order-2 mirror.
        let max_order = n.saturating_sub(1).max(2);
        for (oi, order) in orders.iter().enumerate() {
            if order.k < 2 || order.k > max_order {
                return Err(SisError::InvalidStructure(format!(
                    "interaction order k = {} outside {{2, ..., {max_order}}}",
                    order.k
                )));
            }
            if !seen_orders.insert(order.k) {
                return Err(SisError::InvalidStructure(format!(
                    "duplicate interaction order k = {}",
                    order.k
                )));
            }
            check_rate(&format!("beta[{}]", order.k), order.beta, false)?;
            let mut per_target = vec![Vec::new(); n];
            for (ei, e) in order.edges.iter().enumerate() {
                if e.target >= n {
                    return Err(SisError::InvalidStructure(format!(
                        "hyperedge {ei} of order {}: target {} out of range",
                        order.k, e.target
                    )));
                }
                if e.sources.len() != order.k {
                    return Err(SisError::InvalidStructure(format!(
                        "hyperedge {ei} of order {}: expected {} sources, got {}",
                        order.k,
                        order.k,
                        e.sources.len()
                    )));
                }
                if let Some(&bad) = e.sources.iter().find(|&&s| s >= n) {
                    return Err(SisError::InvalidStructure(format!(
                        "hyperedge {ei} of order {}: source {bad} out of range",
                        order.k
                    )));
                }
                if !e.weight.is_finite() || e.weight < T::zero() {
                    return Err(SisError::NegativeEntry {
                        field: format!("hyperedges[k={}]", order.k),
                        row: ei,
                        col: 0,
                        value: e.weight.to_f64().unwrap_or(f64::NAN),
                    });
                }
                weight_into[e.target] += order.beta * e.weight;
                per_target[e.target].push((e.sources.clone(), e.weight));
            }
            by_target[oi] = per_target;
        }
        let higher_active = weight_into.iter().map(|&w| w > T::zero()).collect();
        Ok(Self {
            n,
            gamma,
            a,
            beta1,
            orders,
            by_target,
            higher_active,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn a(&self) -> &DenseMatrix<T> {
        &self.a
    }

    pub fn beta1(&self) -> T {
        self.beta1
    }

    pub fn orders(&self) -> &[InteractionOrder<T>] {
        &self.orders
    }

    /// Per-group flag: is the total rated higher-order weight into `i`
    /// positive?
    pub fn higher_active(&self) -> &[bool] {
        &self.higher_active
    }

    /// `Gamma^{-1} A`.
    pub fn gamma_inv_a(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.n, |i, j| self.a[(i, j)] / self.gamma[i])
    }

    /// Order-`k` coupling matrix with entry `(i, j)` equal to the total
    /// weight of order-`k` hyperedges into `i` whose first source is `j`.
    pub fn order_coupling_matrix(&self, order_index: usize) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.n);
        for e in &self.orders[order_index].edges {
            m[(e.target, e.sources[0])] += e.weight;
        }
        m
    }

    pub(crate) fn field_raw(&self, x: &[T], out: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let row = self.a.row(i);
            let mut pair = T::zero();
            for j in 0..n {
                pair += row[j] * x[j];
            }
            let mut inner = self.beta1 * pair;
            for (oi, order) in self.orders.iter().enumerate() {
                let mut s = T::zero();
                for (sources, w) in &self.by_target[oi][i] {
                    let mut term = *w;
                    for &src in sources {
                        term *= x[src];
                    }
                    s += term;
                }
                inner += order.beta * s;
            }
            out[i] = -self.gamma[i] * x[i] + (T::one() - x[i]) * inner;
        }
    }

    /// Model right-hand side.
    pub fn vector_field(&self, x: &StateVector<T>) -> Vec<T> {
        assert_eq!(x.len(), self.n, "state dimension mismatch");
        let mut out = vec![T::zero(); self.n];
        self.field_raw(x.as_slice(), &mut out);
        out
    }
}

/// Single-population model `dy/dt = -gamma y + beta1 (1-y) y + beta2 (1-y) y^2`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarSis<T> {
    gamma: T,
    beta1: T,
    beta2: T,
}

impl<T: Scalar> ScalarSis<T> {
    pub fn new(gamma: T, beta1: T, beta2: T) -> Result<Self> {
        check_rate("gamma", gamma, true)?;
        check_rate("beta1", beta1, false)?;
        check_rate("beta2", beta2, false)?;
        Ok(Self {
            gamma,
            beta1,
            beta2,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn beta1(&self) -> T {
        self.beta1
    }

    pub fn beta2(&self) -> T {
        self.beta2
    }

    /// Right-hand side at `y in [0,1]` (small excursions clamped).
    pub fn vector_field(&self, y: T) -> Result<T> {
        let tol = cst::<T>(DOMAIN_CLAMP_TOL);
        if !y.is_finite() || y < -tol || y > T::one() + tol {
            return Err(SisError::OutOfDomain {
                index: 0,
                value: y.to_f64().unwrap_or(f64::NAN),
            });
        }
        let y = y.max(T::zero()).min(T::one());
        Ok(self.field_raw(y))
    }

    pub(crate) fn field_raw(&self, y: T) -> T {
        // Factored like the one-group simplicial evaluation so the embedding
        // in `to_simplicial` reproduces this value bit for bit.
        -self.gamma * y + (T::one() - y) * (self.beta1 * y + self.beta2 * (y * y))
    }

    /// Equivalent one-group simplicial model (`a_11 = b_111 = 1`).
    pub fn to_simplicial(&self) -> SimplicialSis<T> {
        SimplicialSis::new(
            vec![self.gamma],
            DenseMatrix::from_rows(&[vec![T::one()]]),
            vec![DenseMatrix::from_rows(&[vec![T::one()]])],
            self.beta1,
            self.beta2,
        )
        .expect("scalar model parameters already validated")
    }
}
