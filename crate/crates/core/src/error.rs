use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty {field} on token {index}")]
    EmptyField { field: &'static str, index: usize },

    #[error("dependency index out of range: {index} (sentence has {len} tokens)")]
    DependencyOutOfRange { index: usize, len: usize },

    #[error("self-loop dependency on token {0}")]
    SelfLoop(usize),

    #[error("token index {index} out of range (sentence has {len} tokens)")]
    TokenOutOfRange { index: usize, len: usize },

    #[error("invalid span [{start},{end}) for a sentence of {len} tokens")]
    InvalidSpan { start: usize, end: usize, len: usize },

    #[error("overlapping selections [{0},{1}) and [{2},{3})")]
    OverlappingSelections(usize, usize, usize, usize),

    #[error("specification has no entries")]
    EmptySpecification,

    #[error("no dependency path between tokens {from} and {to}")]
    NoDependencyPath { from: usize, to: usize },

    #[error("path endpoints must differ (got {0} twice)")]
    SamePathEndpoints(usize),

    #[error("empty path")]
    EmptyPath,

    #[error("pattern has holes")]
    IncompletePattern,

    #[error("no hole to expand")]
    NoHole,

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown field name `{name}` at offset {offset}")]
    UnknownField { name: String, offset: usize },

    #[error("rule not derivable under spec vocabulary")]
    NotDerivable,

    #[error("scorer failed on state `{state}`: {message}")]
    Scorer { state: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("invalid episode: {0}")]
    Episode(String),
}
