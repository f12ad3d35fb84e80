use alloc::string::String;

/// Errors raised by model construction, planning and the oracles.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Dimensions, probabilities or ranges do not describe a valid model.
    #[error("configuration error: {0}")]
    Config(String),
    /// The initial state is potentially unsafe, so no feasible policy exists.
    #[error("infeasible: initial state {state} is potentially unsafe at step 1")]
    Feasibility { state: usize },
    /// Exhaustive enumeration found no policy that avoids the unsafe set.
    #[error("no feasible deterministic policy exists")]
    NoFeasiblePolicy,
    /// The policy space is too large to enumerate.
    #[error("oracle enumeration too large: {size} policies exceed the limit of {limit}")]
    OracleTooLarge { size: f64, limit: f64 },
    /// A random generator could not produce a feasible instance.
    #[error("generation failed after {tries} attempts")]
    Generation { tries: usize },
    /// A numeric input was outside the accepted domain (NaN, infinity).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
