use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("P_EQUALS_TWO: |4 - 2*sqrt(2)^p| cannot be separated from 0")]
    PEqualsTwo,
    #[error("ZERO_IN_C: the c.e. set must not contain 0")]
    ZeroInC,
    #[error("ENUMERATION_STALLED: needed {needed} elements, enumerated {found} by stage {stage}")]
    EnumerationStalled { needed: usize, found: usize, stage: u64 },
    #[error("NO_BACKDOOR: presentation has no transparent evaluation")]
    NoBackdoor,
    #[error("HYPOTHESIS_VIOLATED: {0}")]
    HypothesisViolated(String),
    #[error("NOT_A_PARTIAL_DISINTEGRATION: {0}")]
    NotAPartialDisintegration(String),
    #[error("BUDGET_EXHAUSTED: {0}")]
    BudgetExhausted(String),
    #[error("NONTERMINAL_REQUIRED: node {0} has no children")]
    NonterminalRequired(String),
    #[error("PROVISIONAL: {0}")]
    Provisional(String),
    #[error("INDEX_OUT_OF_RANGE: index {index} but only {len} vectors synthesized")]
    IndexOutOfRange { index: u64, len: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::PEqualsTwo => "P_EQUALS_TWO",
            Error::ZeroInC => "ZERO_IN_C",
            Error::EnumerationStalled { .. } => "ENUMERATION_STALLED",
            Error::NoBackdoor => "NO_BACKDOOR",
            Error::HypothesisViolated(_) => "HYPOTHESIS_VIOLATED",
            Error::NotAPartialDisintegration(_) => "NOT_A_PARTIAL_DISINTEGRATION",
            Error::BudgetExhausted(_) => "BUDGET_EXHAUSTED",
            Error::NonterminalRequired(_) => "NONTERMINAL_REQUIRED",
            Error::Provisional(_) => "PROVISIONAL",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::Parse(_) => "PARSE",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
