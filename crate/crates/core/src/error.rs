use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("agent {agent}: '{letter}' is not a house letter (expected a..{last})")]
    MalformedLetter { agent: usize, letter: char, last: char },

    #[error("agent {agent}: duplicate house '{house}'")]
    DuplicateHouse { agent: usize, house: char },

    #[error("agent {agent}: ranking has {found} houses, expected {expected}")]
    InconsistentLength {
        agent: usize,
        expected: usize,
        found: usize,
    },

    #[error("a profile needs at least one agent")]
    EmptyProfile,

    #[error("{0} houses requested; at most 6 are supported")]
    TooManyHouses(usize),

    #[error("a ranking needs at least one house")]
    NoHouses,

    #[error("house index {house} out of range for {m} houses")]
    HouseOutOfRange { house: usize, m: usize },

    #[error("agent index {agent} out of range for {n} agents")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("swap position {position} out of range for {m} houses (valid: 0..{})", m.saturating_sub(1))]
    SwapOutOfRange { position: usize, m: usize },

    #[error("comparison of house '{0}' with itself")]
    SameHouse(char),

    #[error("enumeration of {count} items exceeds the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("{n} agents and {m} houses: this operation requires n <= m")]
    MoreAgentsThanHouses { n: usize, m: usize },

    #[error("size guard: {what} supports at most {limit}, got {got}")]
    SizeGuard {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("assignment is not injective: house '{0}' given twice")]
    NotInjective(char),

    #[error("invalid relaxation ({x},{y}): not an adjacent pair of the ranking")]
    InvalidRelaxation { x: char, y: char },

    #[error("supportedness is defined for 4 agents, profile has {0}")]
    SupportNeedsFourAgents(usize),

    #[error("invalid assignment matrix: {0}")]
    InvalidMatrix(String),

    #[error("profile {0} is not determined by the engine")]
    NotDetermined(String),

    #[error("invalid rational literal '{0}'")]
    BadRational(String),
}
