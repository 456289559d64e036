use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate pole at state {index}: zero-order hold needs a nonzero diagonal entry")]
    DegeneratePole { index: usize },

    #[error("singular resolvent at step {step}, state {index}")]
    SingularResolvent { step: usize, index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("timestamp {0} is not on the trajectory grid")]
    OffGrid(f64),

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("system is not Hurwitz: state {index} has non-negative real part")]
    Unstable { index: usize },

    #[error("expected a {expected} system")]
    WrongFlavor { expected: &'static str },

    #[error("simulation diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("degenerate reference: all reference values are zero")]
    DegenerateReference,

    #[error("degenerate similarity: self-similarity equals background (|denominator| = {0:e})")]
    DegenerateSimilarity(f64),

    #[error("need at least {needed} distinct points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("singular linear system in ridge solve")]
    SingularSolve,

    #[error("trainer diverged: {0}")]
    TrainerDivergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
