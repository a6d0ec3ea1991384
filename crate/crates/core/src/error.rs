use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("steady state is not unique: the constrained generator is singular")]
    DegenerateSteadyState,

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("time step rejected: {0}")]
    StepSize(String),

    #[error("propagation failed at z = {z} cm: {source}")]
    Propagation {
        z: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("propagation did not converge after {doublings} step doublings (relative change {change:e})")]
    Accuracy { doublings: u32, change: f64 },

    #[error("transmission undefined: entry amplitude of the {0} field is zero")]
    UndefinedTransmission(&'static str),

    #[error("inconsistent cavity parameters: {0}")]
    InconsistentCavity(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parameter(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
