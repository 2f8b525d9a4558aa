use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("invalid domain parameters: {0}")]
    InvalidParams(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("observation {observation} has zero likelihood after action {action}")]
    ImpossibleObservation { action: usize, observation: usize },

    #[error("other agent's policy exhausted at step {step} (depth {depth})")]
    PolicyExhausted { step: usize, depth: usize },

    #[error("policy depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),

    #[error("instance too large: {per_agent} ({estimate:.3e}) policy trees per agent exceed the limit of {limit}")]
    TooLarge {
        per_agent: String,
        estimate: f64,
        limit: u64,
    },

    #[error("model is not solved")]
    Unsolved,

    #[error("empty model space")]
    EmptyModelSpace,

    #[error("horizon must be at least 1")]
    ZeroHorizon,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("policy format: {0}")]
    Format(String),

    #[error("learner did not terminate within {0} iterations")]
    NoTermination(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
