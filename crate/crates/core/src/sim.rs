//! Fixed-step deterministic integration of the SIS models, invariance and
//! Lyapunov monitors, basin probing and empirical domain classification.

use std::io::Write;

use crate::analysis::disease_free_matrix;
use crate::error::{Result, SisError};
use crate::linalg::Side;
use crate::model::{HigherOrderSis, ScalarSis, SimplicialSis, StateVector, DOMAIN_CLAMP_TOL};
use crate::scalar::{cst, default_tol, sup_norm, Scalar};

/// Sup-norm level below which a final state counts as extinct.
pub const EXTINCTION_THRESHOLD: f64 = 1e-6;
/// Two probes ending within this sup-norm distance share an attractor.
pub const ATTRACTOR_MATCH_TOL: f64 = 1e-4;
/// Low-probe amplitude used by the default probe set.
pub const LOW_PROBE_EPSILON: f64 = 1e-3;

/// Anything with an autonomous polynomial right-hand side on the unit box.
/// Implemented by all three model flavors.
pub trait Dynamics<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    /// Evaluate the right-hand side at `x` into `out`. Must accept inputs
    /// slightly outside the unit box (Runge-Kutta stages).
    fn field_into(&self, x: &[T], out: &mut [T]);

    fn field(&self, x: &StateVector<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.field_into(x.as_slice(), &mut out);
        out
    }
}

impl<T: Scalar> Dynamics<T> for SimplicialSis<T> {
    fn dim(&self) -> usize {
        self.n()
    }
    fn field_into(&self, x: &[T], out: &mut [T]) {
        self.field_raw(x, out);
    }
}

impl<T: Scalar> Dynamics<T> for HigherOrderSis<T> {
    fn dim(&self) -> usize {
        self.n()
    }
    fn field_into(&self, x: &[T], out: &mut [T]) {
        self.field_raw(x, out);
    }
}

impl<T: Scalar> Dynamics<T> for ScalarSis<T> {
    fn dim(&self) -> usize {
        1
    }
    fn field_into(&self, x: &[T], out: &mut [T]) {
        out[0] = self.field_raw(x[0]);
    }
}

/// Integration method. Classical fixed-step fourth-order Runge-Kutta is the
/// only one; the field is polynomial on a compact set and not stiff at the
/// parameter scales of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
}

/// Fixed-step integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub method: Method,
    /// Committed states may stray outside `[0,1]` by at most this much
    /// before the run aborts with `DomainEscape`.
    pub domain_tolerance: T,
    /// Record every `record_stride`-th step (plus the initial and final
    /// states).
    pub record_stride: usize,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            dt: cst(0.01),
            t_end: cst(500.0),
            method: Method::Rk4,
            domain_tolerance: cst(1e-9),
            record_stride: 1,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.dt) || !positive(self.t_end) || self.dt > self.t_end {
            return Err(SisError::InvalidStructure(format!(
                "integrator needs 0 < dt <= t_end, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(SisError::InvalidStructure(
                "record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Recorded trajectory. States are clamped onto `[0,1]` at recording time;
/// `max_excursion` reports the largest boundary violation seen before
/// clamping, `clamped_steps` how many steps needed it.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    /// Lyapunov monitor values, when attached.
    pub monitor: Option<Vec<T>>,
    pub max_excursion: T,
    pub clamped_steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_state(&self) -> &StateVector<T> {
        self.states.last().expect("trajectory records at least x0")
    }

    /// Compute and attach the disease-free Lyapunov monitor.
    pub fn attach_lyapunov(&mut self, m: &SimplicialSis<T>) -> Result<()> {
        self.monitor = Some(lyapunov_trace(m, self)?);
        Ok(())
    }

    /// CSV export: header `t,x1,...,xn[,V]`, 17 significant digits.
    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        write!(w, "t")?;
        for i in 1..=n {
            write!(w, ",x{i}")?;
        }
        if self.monitor.is_some() {
            write!(w, ",V")?;
        }
        writeln!(w)?;
        for (k, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            write!(w, "{}", fmt17(*t))?;
            for v in s.as_slice() {
                write!(w, ",{}", fmt17(*v))?;
            }
            if let Some(mon) = &self.monitor {
                write!(w, ",{}", fmt17(mon[k]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn export_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        Ok(())
    }
}

fn fmt17<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64().unwrap_or(f64::NAN))
}

struct Rk4Scratch<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Scalar> Rk4Scratch<T> {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![T::zero(); n],
            k2: vec![T::zero(); n],
            k3: vec![T::zero(); n],
            k4: vec![T::zero(); n],
            stage: vec![T::zero(); n],
        }
    }

    fn step<D: Dynamics<T>>(&mut self, model: &D, x: &mut [T], dt: T) {
        let n = x.len();
        let half = cst::<T>(0.5);
        model.field_into(x, &mut self.k1);
        for i in 0..n {
            self.stage[i] = x[i] + half * dt * self.k1[i];
        }
        model.field_into(&self.stage, &mut self.k2);
        for i in 0..n {
            self.stage[i] = x[i] + half * dt * self.k2[i];
        }
        model.field_into(&self.stage, &mut self.k3);
        for i in 0..n {
            self.stage[i] = x[i] + dt * self.k3[i];
        }
        model.field_into(&self.stage, &mut self.k4);
        let sixth = dt / cst::<T>(6.0);
        let two = cst::<T>(2.0);
        for i in 0..n {
            x[i] += sixth * (self.k1[i] + two * self.k2[i] + two * self.k3[i] + self.k4[i]);
        }
    }
}

/// Clamp a committed step onto the unit box, reporting the excursion; errors
/// if it exceeds the configured tolerance.
fn commit_state<T: Scalar>(x: &mut [T], tol: T, t: T) -> Result<T> {
    let mut excursion = T::zero();
    for (i, xi) in x.iter_mut().enumerate() {
        if !xi.is_finite() {
            return Err(SisError::DomainEscape {
                time: t.to_f64().unwrap_or(f64::NAN),
                index: i,
                value: xi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let e = if *xi < T::zero() {
            -*xi
        } else if *xi > T::one() {
            *xi - T::one()
        } else {
            T::zero()
        };
        if e > tol {
            return Err(SisError::DomainEscape {
                time: t.to_f64().unwrap_or(f64::NAN),
                index: i,
                value: xi.to_f64().unwrap_or(f64::NAN),
            });
        }
        excursion = excursion.max(e);
        *xi = xi.max(T::zero()).min(T::one());
    }
    Ok(excursion)
}

/// Integrate from `x0` over `[0, t_end]` with fixed-step RK4, recording every
/// `record_stride`-th state (clamped onto the unit box).
pub fn integrate<T: Scalar, D: Dynamics<T>>(
    model: &D,
    x0: &StateVector<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    assert_eq!(x0.len(), model.dim(), "state dimension mismatch");
    let n = model.dim();
    let mut scratch = Rk4Scratch::new(n);
    let mut x = x0.as_slice().to_vec();

    let steps_f = (cfg.t_end / cfg.dt).to_f64().unwrap_or(0.0);
    let full_steps = (steps_f + 1e-9).floor() as usize;
    let remainder = cfg.t_end - cfg.dt * T::from_usize(full_steps).unwrap();
    let tail = remainder > cfg.dt * cst::<T>(1e-9);
    let total_steps = full_steps + usize::from(tail);

    let mut traj = Trajectory {
        times: vec![T::zero()],
        states: vec![x0.clone()],
        monitor: None,
        max_excursion: T::zero(),
        clamped_steps: 0,
    };

    for step in 1..=total_steps {
        let dt = if step <= full_steps {
            cfg.dt
        } else {
            remainder
        };
        let t = if step <= full_steps {
            cfg.dt * T::from_usize(step).unwrap()
        } else {
            cfg.t_end
        };
        scratch.step(model, &mut x, dt);
        let excursion = commit_state(&mut x, cfg.domain_tolerance, t)?;
        if excursion > T::zero() {
            traj.clamped_steps += 1;
            traj.max_excursion = traj.max_excursion.max(excursion);
        }
        if step % cfg.record_stride == 0 || step == total_steps {
            traj.times.push(t);
            traj.states
                .push(StateVector::from_unit_unchecked(x.clone()));
        }
    }
    Ok(traj)
}

/// Disease-free Lyapunov monitor `V(x) = v^T Gamma^{-1} x`, with `v` the
/// dominant left eigenvector of the disease-free condition matrix. Warns (but
/// still evaluates) when the disease-free condition does not hold, since the
/// monitor is only guaranteed to decrease inside that regime.
pub fn lyapunov_trace<T: Scalar>(m: &SimplicialSis<T>, traj: &Trajectory<T>) -> Result<Vec<T>> {
    let k = disease_free_matrix(m.template(), m.beta1(), m.beta2());
    let pair = k.perron_eigenpair(Side::Left, default_tol::<T>())?;
    if pair.value >= T::one() {
        log::warn!(
            "lyapunov monitor unsound: disease-free radius {} >= 1",
            pair.value
        );
    }
    let weights: Vec<T> = pair
        .vector
        .iter()
        .zip(m.gamma())
        .map(|(&v, &g)| v / g)
        .collect();
    Ok(traj
        .states
        .iter()
        .map(|s| {
            s.as_slice()
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x)
                .sum()
        })
        .collect())
}

/// Decay exponent of the disease-free Lyapunov envelope
/// `V(t) <= V(0) exp(q t)`: `q = (lambda - 1) min_i gamma_i`.
pub fn lyapunov_envelope_rate<T: Scalar>(m: &SimplicialSis<T>) -> Result<T> {
    let k = disease_free_matrix(m.template(), m.beta1(), m.beta2());
    let lambda = k.spectral_radius(default_tol::<T>())?;
    let gamma_min = m.gamma().iter().fold(T::infinity(), |acc, &g| acc.min(g));
    Ok((lambda - T::one()) * gamma_min)
}

/// Where a single trajectory ended up.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeVerdict<T> {
    /// Final sup norm below the extinction threshold.
    Extinct,
    /// Settled at a nonzero state (field residual negligible).
    Endemic(StateVector<T>),
    /// Still moving at `t_end`.
    Undecided,
}

/// One basin probe: where the trajectory from `initial` settled.
#[derive(Debug, Clone)]
pub struct BasinProbe<T> {
    pub initial: StateVector<T>,
    pub verdict: ProbeVerdict<T>,
}

/// Run a basin probe with early exit: the walk stops as soon as the state is
/// decisively extinct (an order of magnitude under the threshold) or settled
/// (field residual at machine scale). Exit conditions depend only on the
/// state, so the verdict is deterministic.
pub fn probe_basin<T: Scalar, D: Dynamics<T>>(
    model: &D,
    x0: &StateVector<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<BasinProbe<T>> {
    cfg.validate()?;
    assert_eq!(x0.len(), model.dim(), "state dimension mismatch");
    let n = model.dim();
    let mut scratch = Rk4Scratch::new(n);
    let mut x = x0.as_slice().to_vec();
    let mut f = vec![T::zero(); n];

    let extinct = cst::<T>(EXTINCTION_THRESHOLD);
    let deep_extinct = extinct * cst::<T>(0.1);
    let settled_strict = cst::<T>(1e-11).max(T::epsilon() * cst::<T>(100.0));
    let settled_final = cst::<T>(1e-7).max(T::epsilon() * cst::<T>(1000.0));

    let steps_f = (cfg.t_end / cfg.dt).to_f64().unwrap_or(0.0);
    let full_steps = (steps_f + 1e-9).floor() as usize;

    let mut verdict = None;
    for step in 1..=full_steps {
        scratch.step(model, &mut x, cfg.dt);
        let t = cfg.dt * T::from_usize(step).unwrap();
        commit_state(&mut x, cfg.domain_tolerance, t)?;
        if step % 16 == 0 {
            let level = sup_norm(&x);
            if level < deep_extinct {
                verdict = Some(ProbeVerdict::Extinct);
                break;
            }
            model.field_into(&x, &mut f);
            if sup_norm(&f) <= settled_strict {
                verdict = Some(if level < extinct {
                    ProbeVerdict::Extinct
                } else {
                    ProbeVerdict::Endemic(StateVector::from_unit_unchecked(x.clone()))
                });
                break;
            }
        }
    }
    let verdict = verdict.unwrap_or_else(|| {
        let level = sup_norm(&x);
        if level < extinct {
            ProbeVerdict::Extinct
        } else {
            model.field_into(&x, &mut f);
            if sup_norm(&f) <= settled_final {
                ProbeVerdict::Endemic(StateVector::from_unit_unchecked(x.clone()))
            } else {
                ProbeVerdict::Undecided
            }
        }
    });
    Ok(BasinProbe {
        initial: x0.clone(),
        verdict,
    })
}

/// Empirical counterpart of the theory domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmpiricalDomain {
    DiseaseFree,
    Bistable,
    Endemic,
    Undecided,
}

impl EmpiricalDomain {
    pub fn as_str(&self) -> &'static str {
        match self {
            EmpiricalDomain::DiseaseFree => "disease-free",
            EmpiricalDomain::Bistable => "bistable",
            EmpiricalDomain::Endemic => "endemic",
            EmpiricalDomain::Undecided => "undecided",
        }
    }
}

impl std::fmt::Display for EmpiricalDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Empirical classification with its supporting probes.
#[derive(Debug, Clone)]
pub struct EmpiricalClassification<T> {
    pub domain: EmpiricalDomain,
    pub probes: Vec<BasinProbe<T>>,
}

/// Default probe ladder: `eps * 1`, `(1/2) * 1` and `1`.
pub fn default_probes<T: Scalar>(n: usize) -> Vec<StateVector<T>> {
    vec![
        StateVector::from_unit_unchecked(vec![cst(LOW_PROBE_EPSILON); n]),
        StateVector::from_unit_unchecked(vec![cst(0.5); n]),
        StateVector::ones(n),
    ]
}

/// Classify the dynamics by probing basins of attraction. Probes must be
/// ordered from smallest to largest: the first acts as the near-origin probe
/// and the last as the saturated probe.
///
/// * all probes extinct: disease-free;
/// * the near-origin probe settles at a nonzero attractor matching every
///   other probe's attractor within [`ATTRACTOR_MATCH_TOL`]: endemic;
/// * near-origin probe extinct but the saturated probe endemic: bistable;
/// * anything else: undecided.
pub fn classify_empirical<T: Scalar, D: Dynamics<T>>(
    model: &D,
    cfg: &IntegratorConfig<T>,
    probes: &[StateVector<T>],
) -> Result<EmpiricalClassification<T>> {
    assert!(probes.len() >= 2, "need at least a low and a high probe");
    let results: Vec<BasinProbe<T>> = probes
        .iter()
        .map(|p| probe_basin(model, p, cfg))
        .collect::<Result<_>>()?;

    let all_extinct = results
        .iter()
        .all(|p| matches!(p.verdict, ProbeVerdict::Extinct));
    let match_tol = cst::<T>(ATTRACTOR_MATCH_TOL);

    let domain = if all_extinct {
        EmpiricalDomain::DiseaseFree
    } else if let ProbeVerdict::Endemic(low_attractor) = &results[0].verdict {
        let coherent = results[1..].iter().all(|p| match &p.verdict {
            ProbeVerdict::Endemic(att) => att.sup_distance(low_attractor) <= match_tol,
            _ => false,
        });
        if coherent {
            EmpiricalDomain::Endemic
        } else {
            EmpiricalDomain::Undecided
        }
    } else if matches!(results[0].verdict, ProbeVerdict::Extinct)
        && matches!(results.last().unwrap().verdict, ProbeVerdict::Endemic(_))
    {
        EmpiricalDomain::Bistable
    } else {
        EmpiricalDomain::Undecided
    };

    Ok(EmpiricalClassification {
        domain,
        probes: results,
    })
}

/// [`classify_empirical`] with the default probe ladder.
pub fn classify_empirical_default<T: Scalar, D: Dynamics<T>>(
    model: &D,
    cfg: &IntegratorConfig<T>,
) -> Result<EmpiricalClassification<T>> {
    classify_empirical(model, cfg, &default_probes(model.dim()))
}

/// Largest clamp applied when states are pushed back onto the unit box; kept
/// in sync with the model module's policy.
pub fn domain_clamp_tol<T: Scalar>() -> T {
    cst(DOMAIN_CLAMP_TOL)
}
