use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Dimensions of a profile, strategy or tensor do not match the game.
    #[error("shape error: {0}")]
    Shape(String),

    /// A game document could not be parsed or validated.
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    /// The requested solver path is not available for this metric/game size.
    #[error("unsupported: {0}")]
    Capability(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Ratio-based welfare quantities need strictly positive payoffs.
    #[error("positivity error: {0}")]
    Positivity(String),

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("player {player}: {source}")]
    Player {
        player: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn for_player(self, player: usize) -> Self {
        match self {
            Error::Player { .. } => self,
            other => Error::Player {
                player,
                source: Box::new(other),
            },
        }
    }
}
