//! Endemic-equilibrium computation by monotone fixed-point iteration,
//! equilibrium verification, local stability and sampled contraction
//! certificates.
//!
//! The equilibria of the simplicial model are exactly the fixed points of
//!
//! ```text
//! H(y) = H_+( beta1 Gamma^{-1} A y + beta2 Gamma^{-1} (y^T B_1 y, ..., y^T B_n y)^T )
//! ```
//!
//! with `H_+` the entrywise map `z -> z / (1 + z)`. Starting from `eta / 2`
//! in the bistable regime, or from `(1 - 1/rho) u` in the endemic regime
//! (`(rho, u)` the dominant right eigenpair of `beta1 Gamma^{-1} A`,
//! renormalized to unit sup norm), the iterates increase entrywise and
//! converge to an endemic state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{classify_theory, Domain};
use crate::error::{Result, SisError};
use crate::linalg::{Side, WeightVector};
use crate::model::{SimplicialSis, StateVector};
use crate::scalar::{cst, default_tol, sup_norm, Scalar};

/// Default sup-norm step tolerance for the fixed-point iteration.
pub const DEFAULT_STEP_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Which certified regime the iteration is started for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainHint {
    Bistable,
    Endemic,
}

/// Record of one fixed-point run: the iterates (entrywise nondecreasing) and
/// the sup-norm step sizes between consecutive iterates.
#[derive(Debug, Clone)]
pub struct IterationTrace<T> {
    pub iterates: Vec<Vec<T>>,
    pub steps: Vec<T>,
}

/// Stability verdict for an equilibrium, decided through the Metzler
/// structure of the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    ExponentiallyStable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::ExponentiallyStable => "exponentially-stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }
}

/// Outcome of [`endemic_iterate`].
#[derive(Debug, Clone)]
pub struct EquilibriumResult<T> {
    pub xstar: StateVector<T>,
    pub converged: bool,
    pub iterations: usize,
    /// `max_i |f_i(xstar)|`.
    pub residual: T,
    pub stability: Stability,
}

/// One application of the fixed-point map `H`. Output entries lie in `[0, 1)`.
/// Monotone: `y <= z` entrywise implies `H(y) <= H(z)`.
pub fn fixed_point_map<T: Scalar>(m: &SimplicialSis<T>, y: &StateVector<T>) -> StateVector<T> {
    StateVector::from_unit_unchecked(apply_map(m, y.as_slice()))
}

fn apply_map<T: Scalar>(m: &SimplicialSis<T>, y: &[T]) -> Vec<T> {
    let tpl = m.template();
    let n = m.n();
    let mut out = vec![T::zero(); n];
    for i in 0..n {
        let row = tpl.a().row(i);
        let mut pair = T::zero();
        for j in 0..n {
            pair += row[j] * y[j];
        }
        let z = (m.beta1() * pair + m.beta2() * tpl.quad_form(i, y)) / tpl.gamma()[i];
        out[i] = z / (T::one() + z);
    }
    out
}

/// Sup-norm residual test of the equilibrium equation: `(true, r)` iff
/// `r = max_i |f_i(x)| <= tol`.
pub fn check_equilibrium<T: Scalar>(m: &SimplicialSis<T>, x: &StateVector<T>, tol: T) -> (bool, T) {
    let r = sup_norm(&m.vector_field(x));
    (r <= tol, r)
}

/// Compute an endemic equilibrium by the monotone fixed-point iteration.
///
/// `domain_hint` must agree with [`classify_theory`]; the iteration starts
/// from the regime-specific point and stops once the sup-norm step is at most
/// `tol` and the field residual at the iterate is within `10 * tol * max_i
/// gamma_i`. Any entrywise decrease beyond `1e-14` aborts with
/// `MonotonicityViolation`.
pub fn endemic_iterate<T: Scalar>(
    m: &SimplicialSis<T>,
    domain_hint: DomainHint,
    tol: T,
    max_iter: usize,
) -> Result<(EquilibriumResult<T>, IterationTrace<T>)> {
    let classification = classify_theory(m)?;
    let consistent = matches!(
        (domain_hint, classification.domain),
        (DomainHint::Bistable, Domain::Bistable) | (DomainHint::Endemic, Domain::Endemic)
    );
    if !consistent {
        return Err(SisError::PreconditionViolated(format!(
            "domain hint {domain_hint:?} does not match theory classification {}",
            classification.domain
        )));
    }

    let n = m.n();
    let half = cst::<T>(0.5);
    let mut y: Vec<T> = match domain_hint {
        DomainHint::Bistable => m
            .higher_active()
            .iter()
            .map(|&f| if f { half } else { T::zero() })
            .collect(),
        DomainHint::Endemic => {
            // Dominant right eigenpair of beta1 Gamma^-1 A, renormalized to
            // unit sup norm (the eigenpair itself uses the unit-sum
            // convention). The start point (1 - 1/rho) u lies on the boundary
            // of the monotone region; shrinking it by 1e-8 buys slack that
            // dominates the eigenvector residual, so the first step cannot
            // dip below the start.
            let pair = m
                .template()
                .gamma_inv_a()
                .scale(m.beta1())
                .perron_eigenpair(Side::Right, default_tol::<T>())?;
            let rho = pair.value;
            let umax = sup_norm(&pair.vector);
            let factor = (T::one() - T::one() / rho) / umax * (T::one() - cst::<T>(1e-8));
            pair.vector.iter().map(|&u| u * factor).collect()
        }
    };

    let monotone_slack = cst::<T>(1e-14);
    let residual_bound =
        cst::<T>(10.0) * tol * m.gamma().iter().fold(T::zero(), |acc, &g| acc.max(g));

    let mut trace = IterationTrace {
        iterates: vec![y.clone()],
        steps: Vec::new(),
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut residual = sup_norm(&{
        let mut f = vec![T::zero(); n];
        m.field_raw(&y, &mut f);
        f
    });
    while iterations < max_iter {
        let next = apply_map(m, &y);
        iterations += 1;
        let mut step = T::zero();
        for i in 0..n {
            let delta = next[i] - y[i];
            if delta < -monotone_slack {
                return Err(SisError::MonotonicityViolation {
                    iteration: iterations,
                    index: i,
                    decrease: (-delta).to_f64().unwrap_or(f64::NAN),
                });
            }
            step = step.max(delta.abs());
        }
        y = next;
        trace.iterates.push(y.clone());
        trace.steps.push(step);
        let mut f = vec![T::zero(); n];
        m.field_raw(&y, &mut f);
        residual = sup_norm(&f);
        if step <= tol && residual <= residual_bound {
            converged = true;
            break;
        }
    }

    let xstar = StateVector::new(y)?;
    let stability = if converged {
        match local_stability(m, &xstar) {
            Ok(s) => s,
            Err(SisError::NotEquilibrium { .. }) => Stability::Marginal,
            Err(e) => return Err(e),
        }
    } else {
        Stability::Marginal
    };
    Ok((
        EquilibriumResult {
            xstar,
            converged,
            iterations,
            residual,
            stability,
        },
        trace,
    ))
}

/// Linearized stability of an equilibrium via the Hurwitz margin of the
/// (Metzler) Jacobian: stable if the margin exceeds `1e-9`, unstable if the
/// dominant eigenvalue exceeds zero by more than `1e-9`, marginal otherwise.
/// The state must satisfy the equilibrium equation to `1e-6`.
pub fn local_stability<T: Scalar>(
    m: &SimplicialSis<T>,
    xstar: &StateVector<T>,
) -> Result<Stability> {
    let check_tol = cst::<T>(1e-6);
    let (ok, residual) = check_equilibrium(m, xstar, check_tol);
    if !ok {
        return Err(SisError::NotEquilibrium {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: 1e-6,
        });
    }
    let margin = m.jacobian(xstar).hurwitz_margin()?;
    let band = cst::<T>(1e-9);
    Ok(if margin > band {
        Stability::ExponentiallyStable
    } else if margin < -band {
        Stability::Unstable
    } else {
        Stability::Marginal
    })
}

/// Outcome of a sampled contraction certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certificate<T> {
    /// Every tested point had measure at most `-rate` (rate > 0).
    Certified { rate: T },
    /// Some tested point had nonnegative measure; `worst_measure` is the
    /// largest one seen.
    NotCertified { worst_measure: T },
}

/// Weighted sup-norm measure `mu_{diag(x*)^{-1}}(D(x, x*))`, which for the
/// Metzler matrix `D` equals `max_i (D(x,x*) x*)_i / x*_i`.
pub fn coppel_measure_at<T: Scalar>(
    m: &SimplicialSis<T>,
    x: &StateVector<T>,
    xstar: &StateVector<T>,
) -> Result<T> {
    let weights = WeightVector::new(xstar.as_slice().iter().map(|&v| T::one() / v).collect())
        .map_err(|_| {
            SisError::PreconditionViolated("contraction measure needs x* strictly positive".into())
        })?;
    Ok(m.decomposition(x, xstar).matrix_measure_inf(&weights))
}

/// Sampled contraction certificate around an interior equilibrium.
///
/// Evaluates the measure of `D(x, x*)` in the `diag(x*)^{-1}`-weighted sup
/// norm at `x*` itself, at all `2^n` corners of the box
/// `Y = { alpha v <= y <= 1 }` when `n <= 12`, and at `samples`
/// low-discrepancy points of `Y` (Halton sequence with a seeded rotation).
/// Negative measure at a point certifies local contraction there; the
/// certificate is a sampled statement over the tested points, not a proof
/// over all of `Y`.
pub fn contraction_certificate<T: Scalar>(
    m: &SimplicialSis<T>,
    xstar: &StateVector<T>,
    alpha: Option<T>,
    samples: usize,
    seed: u64,
) -> Result<Certificate<T>> {
    let n = m.n();
    let xs = xstar.as_slice();
    if xs.iter().any(|&v| v <= T::zero()) {
        return Err(SisError::PreconditionViolated(
            "contraction certificate needs x* strictly positive".into(),
        ));
    }
    let pair = m
        .template()
        .gamma_inv_a()
        .perron_eigenpair(Side::Right, default_tol::<T>())?;
    let v = &pair.vector;
    let vmax = sup_norm(v);
    let min_star = xs.iter().fold(T::infinity(), |acc, &x| acc.min(x));
    let alpha = match alpha {
        Some(a) => a,
        None => (cst::<T>(0.01) / pair.value).min(cst::<T>(0.5) * min_star / vmax),
    };
    let lo: Vec<T> = v.iter().map(|&vi| alpha * vi).collect();
    if lo.iter().zip(xs).any(|(&l, &x)| l >= x) {
        return Err(SisError::PreconditionViolated(
            "alpha too large: alpha * v must stay strictly below x*".into(),
        ));
    }

    let mut worst = coppel_measure_at(m, xstar, xstar)?;
    let mut eval = |point: Vec<T>| -> Result<()> {
        let x = StateVector::from_unit_unchecked(point);
        let mu = coppel_measure_at(m, &x, xstar)?;
        if mu > worst {
            worst = mu;
        }
        Ok(())
    };

    if n <= 12 {
        for mask in 0u32..(1u32 << n) {
            let corner: Vec<T> = (0..n)
                .map(|d| {
                    if mask & (1 << d) != 0 {
                        T::one()
                    } else {
                        lo[d]
                    }
                })
                .collect();
            eval(corner)?;
        }
    }

    // Halton points with a Cranley-Patterson rotation drawn from the seed.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let bases = prime_bases(n);
    for j in 1..=samples {
        let point: Vec<T> = (0..n)
            .map(|d| {
                let u = (halton(j, bases[d]) + shift[d]).fract();
                lo[d] + cst::<T>(u) * (T::one() - lo[d])
            })
            .collect();
        eval(point)?;
    }

    Ok(if worst < T::zero() {
        Certificate::Certified { rate: -worst }
    } else {
        Certificate::NotCertified {
            worst_measure: worst,
        }
    })
}

/// Radical-inverse (van der Corput) value of `index` in the given base.
fn halton(mut index: usize, base: usize) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

fn prime_bases(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2usize;
    while primes.len() < count {
        if primes.iter().all(|&p| !candidate.is_multiple_of(p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}
