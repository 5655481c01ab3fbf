//! Theory-side classification of parameter space for the scalar, simplicial
//! and general higher-order models, plus threshold and boundary curves.
//!
//! The sufficient conditions certified here:
//!
//! * endemic: `beta1 * rho(Gamma^{-1} A) > 1`;
//! * disease-free: `rho(beta1 Gamma^{-1} A + beta2 Gamma^{-1} S) < 1`, where
//!   row `i` of `S` holds the column sums of `B_i`;
//! * bistable: reproduction number below one and, over the groups with
//!   higher-order interactions,
//!   `min_i ( beta1/gamma_i (A e)_i + beta2/(2 gamma_i) e^T B_i e ) >= 2`
//!   with `e` the indicator of those groups.
//!
//! The conditions do not cover the whole parameter plane; points certified by
//! none of them classify as indeterminate. Equality cases of the strict
//! inequalities also report indeterminate: a certificate is never over-claimed.

use serde::Serialize;

use crate::error::{Result, SisError};
use crate::linalg::DenseMatrix;
use crate::model::{HigherOrderSis, ScalarSis, SimplicialSis, SisTemplate};
use crate::scalar::{cst, cstu, default_tol, Scalar};

/// Dynamical regime of the model at the given parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    DiseaseFree,
    Bistable,
    Endemic,
    Indeterminate,
}

impl Domain {
    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::DiseaseFree => "disease-free",
            Domain::Bistable => "bistable",
            Domain::Endemic => "endemic",
            Domain::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Certified domain together with the certifying quantities. All scalars are
/// populated regardless of the verdict so downstream consumers can plot
/// margins even in the indeterminate region.
#[derive(Debug, Clone, Serialize)]
pub struct DomainClassification<T> {
    pub domain: Domain,
    /// `beta1 * rho(Gamma^{-1} A)`.
    pub reproduction_number: T,
    /// Spectral radius in the disease-free condition.
    pub disease_free_lhs: T,
    /// Minimum of the bistable condition minus its threshold (2, or `n - 1`
    /// for the general higher-order model); `None` when no group has
    /// higher-order interactions.
    pub bistable_margin: Option<T>,
}

/// Domain classification of a simplicial model from the sufficient
/// conditions, checked in the order endemic, disease-free, bistable.
pub fn classify_theory<T: Scalar>(m: &SimplicialSis<T>) -> Result<DomainClassification<T>> {
    let tol = default_tol::<T>();
    let tpl = m.template();
    let reproduction = m.beta1() * tpl.gamma_inv_a().spectral_radius(tol)?;
    let df_lhs = disease_free_matrix(tpl, m.beta1(), m.beta2()).spectral_radius(tol)?;
    let margin = bistable_margin(tpl, m.beta1(), m.beta2());

    let one = T::one();
    let domain = if reproduction > one {
        Domain::Endemic
    } else if df_lhs < one {
        Domain::DiseaseFree
    } else if reproduction < one && margin.is_some_and(|v| v >= T::zero()) {
        Domain::Bistable
    } else {
        Domain::Indeterminate
    };
    Ok(DomainClassification {
        domain,
        reproduction_number: reproduction,
        disease_free_lhs: df_lhs,
        bistable_margin: margin,
    })
}

/// `beta1 Gamma^{-1} A + beta2 Gamma^{-1} S` with `S` the column-sum matrix
/// of the higher-order weights.
pub fn disease_free_matrix<T: Scalar>(tpl: &SisTemplate<T>, beta1: T, beta2: T) -> DenseMatrix<T> {
    let s = tpl.b_column_sums();
    DenseMatrix::from_fn(tpl.n(), |i, j| {
        (beta1 * tpl.a()[(i, j)] + beta2 * s[(i, j)]) / tpl.gamma()[i]
    })
}

fn bistable_margin<T: Scalar>(tpl: &SisTemplate<T>, beta1: T, beta2: T) -> Option<T> {
    let active = tpl.higher_active();
    if !active.iter().any(|&f| f) {
        return None;
    }
    let half = cst::<T>(0.5);
    let mut min_value: Option<T> = None;
    for i in 0..tpl.n() {
        if !active[i] {
            continue;
        }
        let a_ind: T = (0..tpl.n())
            .filter(|&j| active[j])
            .map(|j| tpl.a()[(i, j)])
            .sum();
        let quad = indicator_quad_form(tpl, i);
        let value = beta1 / tpl.gamma()[i] * a_ind + beta2 * half / tpl.gamma()[i] * quad;
        min_value = Some(match min_value {
            Some(v) => v.min(value),
            None => value,
        });
    }
    min_value.map(|v| v - cst::<T>(2.0))
}

/// `e^T B_i e` where `e` is the higher-order activity indicator.
fn indicator_quad_form<T: Scalar>(tpl: &SisTemplate<T>, i: usize) -> T {
    let active = tpl.higher_active();
    tpl.b_triples()[i]
        .iter()
        .filter(|&&(j, k, _)| active[j] && active[k])
        .map(|&(_, _, w)| w)
        .sum()
}

/// Domain classification for the general higher-order model. For an order-2
/// model mirroring a simplicial one with `n = 3` this reduces to
/// [`classify_theory`] exactly.
pub fn classify_theory_higher<T: Scalar>(m: &HigherOrderSis<T>) -> Result<DomainClassification<T>> {
    let tol = default_tol::<T>();
    let n = m.n();
    let reproduction = m.beta1() * m.gamma_inv_a().spectral_radius(tol)?;

    // Disease-free condition: spectral radius of
    // Gamma^{-1} (beta1 A + sum_k beta_k Bhat_k), where Bhat_k couples each
    // target to the first source of its order-k hyperedges.
    let mut combined = DenseMatrix::from_fn(n, |i, j| m.beta1() * m.a()[(i, j)]);
    for (oi, order) in m.orders().iter().enumerate() {
        combined = combined.add_scaled(&m.order_coupling_matrix(oi), order.beta);
    }
    let df_matrix = DenseMatrix::from_fn(n, |i, j| combined[(i, j)] / m.gamma()[i]);
    let df_lhs = df_matrix.spectral_radius(tol)?;

    let margin = bistable_margin_higher(m);

    let one = T::one();
    let domain = if reproduction > one {
        Domain::Endemic
    } else if df_lhs < one {
        Domain::DiseaseFree
    } else if reproduction < one && margin.is_some_and(|v| v >= T::zero()) {
        Domain::Bistable
    } else {
        Domain::Indeterminate
    };
    Ok(DomainClassification {
        domain,
        reproduction_number: reproduction,
        disease_free_lhs: df_lhs,
        bistable_margin: margin,
    })
}

fn bistable_margin_higher<T: Scalar>(m: &HigherOrderSis<T>) -> Option<T> {
    let n = m.n();
    let active = m.higher_active();
    if !active.iter().any(|&f| f) {
        return None;
    }
    // ((n-2)/(n-1))^{k-1} discount per order, threshold n-1.
    let ratio = cstu::<T>(n - 2) / cstu::<T>(n - 1);
    let mut min_value: Option<T> = None;
    for i in 0..n {
        if !active[i] {
            continue;
        }
        let a_ind: T = (0..n).filter(|&j| active[j]).map(|j| m.a()[(i, j)]).sum();
        let mut value = m.beta1() / m.gamma()[i] * a_ind;
        for order in m.orders() {
            let mut restricted = T::zero();
            for e in &order.edges {
                if e.target == i && e.sources.iter().all(|&s| active[s]) {
                    restricted += e.weight;
                }
            }
            value += order.beta / m.gamma()[i] * ratio.powi(order.k as i32 - 1) * restricted;
        }
        min_value = Some(match min_value {
            Some(v) => v.min(value),
            None => value,
        });
    }
    min_value.map(|v| v - cstu::<T>(n - 1))
}

/// Closed-form diagnostics of the scalar model.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarDiagnostics<T> {
    pub domain: Domain,
    /// Critical pairwise ratio `v_c(beta2/gamma) = 2 sqrt(beta2/gamma) - beta2/gamma`.
    pub v_c: T,
    /// Lower interior equilibrium, present only when it lies in `(0, 1]`.
    pub nu_minus: Option<T>,
    /// Upper interior equilibrium, present only when it lies in `(0, 1]`.
    pub nu_plus: Option<T>,
}

/// Classify the scalar model and return its closed-form equilibria
/// `nu_{+/-} = (1 - beta1/beta2)/2 +- sqrt((beta1-beta2)^2 - 4 beta2 (gamma-beta1)) / (2 beta2)`
/// whenever the discriminant is nonnegative. Boundary equalities in the
/// strict conditions report indeterminate.
pub fn scalar_classify<T: Scalar>(m: &ScalarSis<T>) -> ScalarDiagnostics<T> {
    let one = T::one();
    let two = cst::<T>(2.0);
    let r1 = m.beta1() / m.gamma();
    let r2 = m.beta2() / m.gamma();
    let v_c = two * r2.sqrt() - r2;

    let (mut nu_minus, mut nu_plus) = (None, None);
    if m.beta2() > T::zero() {
        let disc =
            (m.beta1() - m.beta2()).powi(2) - cst::<T>(4.0) * m.beta2() * (m.gamma() - m.beta1());
        if disc >= T::zero() {
            let center = (one - m.beta1() / m.beta2()) / two;
            let spread = disc.sqrt() / (two * m.beta2());
            let lo = center - spread;
            let hi = center + spread;
            if lo > T::zero() && lo <= one {
                nu_minus = Some(lo);
            }
            if hi > T::zero() && hi <= one {
                nu_plus = Some(hi);
            }
        }
    }

    let domain = if r1 > one {
        Domain::Endemic
    } else if (r2 <= one && r1 <= one) || (r2 > one && r1 < v_c) {
        Domain::DiseaseFree
    } else if r2 > one && v_c < r1 && r1 < one {
        Domain::Bistable
    } else {
        Domain::Indeterminate
    };

    ScalarDiagnostics {
        domain,
        v_c,
        nu_minus,
        nu_plus,
    }
}

/// Smallest `beta2` putting the template into the certified bistable region
/// at the given `beta1`:
/// `max_i [2 gamma_i (2 - beta1/gamma_i (A e)_i)]_+ / (e^T B_i e)` over the
/// active groups. Returns `None` when no group is active, or when some
/// active group has `e^T B_i e = 0` (raising `beta2` can then never make the
/// condition hold).
pub fn beta2_bistable_threshold<T: Scalar>(tpl: &SisTemplate<T>, beta1: T) -> Result<Option<T>> {
    let tol = default_tol::<T>();
    let reproduction = beta1 * tpl.gamma_inv_a().spectral_radius(tol)?;
    if reproduction >= T::one() {
        return Err(SisError::PreconditionViolated(format!(
            "beta2 threshold needs beta1 * rho(Gamma^-1 A) < 1, got {reproduction}"
        )));
    }
    let active = tpl.higher_active();
    if !active.iter().any(|&f| f) {
        return Ok(None);
    }
    let two = cst::<T>(2.0);
    let mut best = T::zero();
    for i in 0..tpl.n() {
        if !active[i] {
            continue;
        }
        let quad = indicator_quad_form(tpl, i);
        if quad <= T::zero() {
            return Ok(None);
        }
        let a_ind: T = (0..tpl.n())
            .filter(|&j| active[j])
            .map(|j| tpl.a()[(i, j)])
            .sum();
        let bracket =
            (two * tpl.gamma()[i] * (two - beta1 / tpl.gamma()[i] * a_ind)).max(T::zero());
        best = best.max(bracket / quad);
    }
    Ok(Some(best))
}

/// The `beta2 >= 0` at which the disease-free spectral radius crosses one for
/// the given `beta1`; located by bisection (the radius is nondecreasing in
/// `beta2`). Requires `rho(beta1 Gamma^{-1} A) <= 1` and at least one nonzero
/// `B_i`.
pub fn disease_free_boundary_beta2<T: Scalar>(tpl: &SisTemplate<T>, beta1: T) -> Result<T> {
    let tol = default_tol::<T>();
    let rho_at =
        |beta2: T| -> Result<T> { disease_free_matrix(tpl, beta1, beta2).spectral_radius(tol) };
    let rho0 = rho_at(T::zero())?;
    if rho0 > T::one() + tol {
        return Err(SisError::PreconditionViolated(format!(
            "disease-free boundary needs rho(beta1 Gamma^-1 A) <= 1, got {rho0}"
        )));
    }
    if rho0 >= T::one() {
        return Ok(T::zero());
    }
    if !tpl.higher_active().iter().any(|&f| f) {
        return Err(SisError::PreconditionViolated(
            "disease-free boundary undefined: every B_i is zero".into(),
        ));
    }
    let mut hi = T::one();
    let mut guard = 0;
    while rho_at(hi)? < T::one() {
        hi *= cst::<T>(2.0);
        guard += 1;
        if guard > 200 {
            return Err(SisError::PreconditionViolated(
                "disease-free boundary not bracketed: radius stays below one".into(),
            ));
        }
    }
    let mut lo = T::zero();
    let width_tol = cst::<T>(1e-10).max(T::epsilon() * cst::<T>(4.0) * hi);
    while hi - lo > width_tol {
        let mid = (lo + hi) / cst::<T>(2.0);
        if rho_at(mid)? < T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / cst::<T>(2.0))
}
