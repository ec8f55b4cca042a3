use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph is disconnected")]
    Disconnected,

    #[error("edge {edge} references vertex {vertex} but the graph has {vertex_count} vertices")]
    IndexOutOfRange {
        edge: usize,
        vertex: usize,
        vertex_count: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("chain is not conserved (boundary residual {residual:.3e})")]
    NotConserved { residual: f64 },

    #[error("vector is not zero-sum (sum {sum:.3e})")]
    NotZeroSum { sum: f64 },

    #[error("enumeration exceeded the cap of {limit} items")]
    CountLimitExceeded { limit: usize },

    #[error("barrier values cannot be grouped consistently near {value}")]
    AmbiguousGrouping { value: f64 },

    #[error("rate exponent {exponent:.1} exceeds the floating-point budget")]
    Overflow { exponent: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepFailure { t: f64, h: f64 },

    #[error("I - U(1,0) is nearly singular on zero-sum vectors (inverse norm {inverse_norm:.3e}); increase tau_d")]
    NearSingularMonodromy { inverse_norm: f64 },

    #[error("arc junction near t = {t} could not be resolved; perturb the loop slightly")]
    RefinementLimit { t: f64 },

    #[error("loop is not robust: essential degeneracy near t = {t}")]
    NonRobust { t: f64 },

    #[error("ground state is degenerate (gap {gap:.3e})")]
    Degenerate { gap: f64 },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("{what}: expected {expected} entries, got {got}")]
    ArityMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
