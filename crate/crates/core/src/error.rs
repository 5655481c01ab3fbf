//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = SisError> = std::result::Result<T, E>;

/// Everything that can go wrong across model validation, linear algebra,
/// equilibrium computation, simulation and file I/O.
///
/// Diagnostic payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Error)]
pub enum SisError {
    /// A matrix that must be nonnegative has a negative entry.
    #[error("negative entry {field}[{row},{col}] = {value}")]
    NegativeEntry {
        field: String,
        row: usize,
        col: usize,
        value: f64,
    },

    /// A matrix or vector entry is NaN or infinite.
    #[error("non-finite entry in {field} at position [{row},{col}]")]
    NonFiniteEntry {
        field: String,
        row: usize,
        col: usize,
    },

    /// The digraph induced by a nonnegative matrix is not strongly connected.
    #[error("{field} is not irreducible: induced digraph is not strongly connected")]
    NotIrreducible { field: String },

    /// Power iteration hit its iteration cap.
    #[error("power iteration did not converge within {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    /// A weight vector entry is not strictly positive.
    #[error("weight[{index}] = {value} must be strictly positive")]
    NonpositiveWeight { index: usize, value: f64 },

    /// A matrix required to be Metzler has a negative off-diagonal entry.
    #[error("not a Metzler matrix: off-diagonal entry [{row},{col}] = {value}")]
    NotMetzler { row: usize, col: usize, value: f64 },

    /// A rate parameter violates its sign requirement. `field` names the
    /// offending entry, e.g. `gamma[2]` or `beta1`.
    #[error("rate {field} = {value} violates its sign requirement")]
    NonpositiveRate { field: String, value: f64 },

    /// A state entry lies outside `[0,1]` by more than the clamp tolerance.
    #[error("state[{index}] = {value} lies outside [0,1]")]
    OutOfDomain { index: usize, value: f64 },

    /// An operation was invoked outside its stated precondition.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// The fixed-point iteration produced a decreasing entry; this signals an
    /// implementation bug, not a model property.
    #[error("iterate decreased at iteration {iteration}, entry {index}, by {decrease:e}")]
    MonotonicityViolation {
        iteration: usize,
        index: usize,
        decrease: f64,
    },

    /// A state submitted as an equilibrium has too large a residual.
    #[error("not an equilibrium: residual {residual:e} exceeds tolerance {tol:e}")]
    NotEquilibrium { residual: f64, tol: f64 },

    /// The integrator left the unit box by more than the configured
    /// tolerance; usually means the step size is too large.
    #[error("trajectory escaped [0,1]^n at t = {time}: state[{index}] = {value}")]
    DomainEscape { time: f64, index: usize, value: f64 },

    /// Structural problem in a model definition (dimension mismatch, bad
    /// hyperedge arity or index, unsupported interaction order).
    #[error("invalid model structure: {0}")]
    InvalidStructure(String),

    /// A model file failed schema validation. Indices in the message are
    /// 1-based, matching the file format.
    #[error("model file: {0}")]
    BadModelFile(String),

    /// File I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
