use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate agent label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid agent label `{0}` (labels are non-empty and contain no whitespace, `:` or `#`)")]
    InvalidLabel(String),

    #[error("`{agent}` lists `{partner}` more than once")]
    DuplicatePreference { agent: String, partner: String },

    #[error("`{agent}` lists `{partner}`, which is not an agent of the opposite side")]
    UnknownPartner { agent: String, partner: String },

    #[error("`{0}` is declared but has no `pref` line")]
    MissingPreferences(String),

    #[error("`{0}` has an empty preference list")]
    EmptyPreferences(String),

    #[error("`{agent}` lists `{partner}` but `{partner}` does not list `{agent}`")]
    NotMutual { agent: String, partner: String },

    #[error("market has no agents")]
    EmptyMarket,

    #[error("{0} is not an agent of this market")]
    ForeignAgent(String),

    #[error("{0} appears in more than one pair")]
    MatchingConflict(String),

    #[error("instance has {pairs} acceptable pairs, above the enumeration cap of {cap}")]
    CapExceeded { pairs: usize, cap: usize },

    #[error("order is not a permutation of the acceptable pairs: {0}")]
    NotAPermutation(String),

    #[error("invalid extension plan: {0}")]
    InvalidPlan(String),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("base market has agents outside every stable matching: {0}")]
    NotNormalForm(String),

    #[error("size must be at least 2, got {0}")]
    SizeTooSmall(usize),

    #[error("highlight set `{set}` contains ({worker},{firm}), which is not an acceptable pair")]
    UnknownVertex { set: String, worker: usize, firm: usize },

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),

    #[error("no usable trials: {0}")]
    NoTrials(String),

    #[error(
        "half-size bound violated in trial {trial} (seed {seed}): stable {stable} < ceil({maximum}/2){}",
        .saved.as_ref().map(|p| format!(", counterexample saved to {}", p.display())).unwrap_or_default()
    )]
    BoundViolation {
        trial: usize,
        seed: u64,
        stable: usize,
        maximum: usize,
        saved: Option<PathBuf>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
