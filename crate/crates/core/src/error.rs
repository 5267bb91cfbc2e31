use thiserror::Error;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input or a parameter outside the documented range.
    Usage,
    /// The instance is valid but beyond a configured engine cap, or a
    /// construction turned out to be infeasible for these parameters.
    Capability,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("player {player} out of range for a game with {players} players")]
    PlayerOutOfRange { player: usize, players: usize },
    #[error("player {0} is already a member of the coalition")]
    PlayerInCoalition(usize),
    #[error("invalid band: lower bound {lower} exceeds upper bound {upper}")]
    InvalidBand { lower: String, upper: String },
    #[error("{method} cannot handle {players} players (cap is {cap})")]
    StrategyCap {
        method: &'static str,
        players: usize,
        cap: usize,
    },
    #[error("sparse DP exceeded {cap} live partial sums")]
    StateCap { cap: usize },
    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("formula has {vars} variables, brute force is capped at {cap}")]
    TooManyVariables { vars: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("coalition is not a gadget coalition: {0}")]
    NotGadgetCoalition(String),
    #[error("construction infeasible: {0}")]
    Infeasible(String),
    #[error("unknown theorem tag `{0}`")]
    UnknownTheorem(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::StrategyCap { .. }
            | Error::StateCap { .. }
            | Error::TooManyVariables { .. }
            | Error::Infeasible(_) => ErrorKind::Capability,
            _ => ErrorKind::Usage,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
