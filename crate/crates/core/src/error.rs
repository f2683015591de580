use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("replay diverged at record {index} (block {block}): recorded {recorded}, replayed {replayed}")]
    ReplayDivergence {
        index: usize,
        block: u64,
        recorded: String,
        replayed: String,
    },

    #[error("exploration visited more than {budget} states")]
    BudgetExceeded { budget: usize },

    #[error("scenario {scenario} failed at {stage}: {detail}")]
    ScenarioAssertionFailed {
        scenario: String,
        stage: String,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
