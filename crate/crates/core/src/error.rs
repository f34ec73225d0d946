use thiserror::Error;

/// Errors raised while building or querying auction games.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("an auction needs at least two bidders, got {0}")]
    TooFewBidders(usize),
    #[error("value distribution has {got} entries but the value grid has {expected} points")]
    PmfLength { expected: usize, got: usize },
    #[error("probability mass at value index {index} is {mass}, every value must have strictly positive mass")]
    NonPositiveMass { index: usize, mass: String },
    #[error("probability masses sum to {0}, not 1")]
    MassNotOne(String),
    #[error("grid step must be strictly positive, got {0}")]
    NonPositiveStep(String),
    #[error("{what} points must be strictly increasing")]
    NotIncreasing { what: &'static str },
    #[error("{what} grid is empty")]
    EmptyGrid { what: &'static str },
    #[error("bidding function has {got} entries but the game has {expected} values")]
    FunctionLength { expected: usize, got: usize },
    #[error("bid index {bid} at value index {value} is outside the bid grid of {bids} points")]
    BidOutOfRange {
        value: usize,
        bid: usize,
        bids: usize,
    },
    #[error("profile has {got} bidding functions but the game has {expected} bidders")]
    ProfileLength { expected: usize, got: usize },
    #[error("operation requires a game whose bid grid equals its value grid")]
    NonCanonical,
    #[error("operation not supported for this game: {0}")]
    Unsupported(String),
    #[error("game is too large for exact 128-bit payoff arithmetic ({0})")]
    TooLarge(String),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
