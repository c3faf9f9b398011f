use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coincident point: query point equals frame origin")]
    CoincidentPoint,
    #[error("degenerate distance {0}")]
    DegenerateDistance(f64),
    #[error("infeasible link: {0}")]
    InfeasibleLink(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero matrix has no dominant direction")]
    ZeroMatrix,
    #[error("span under minimum beamwidth: {span} < {min}")]
    SpanUnderMinimum { span: f64, min: f64 },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("nonpositive span {0}")]
    NonpositiveSpan(f64),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("infeasible planning problem: {0}")]
    Infeasible(String),
    #[error("LP solve failed: {0}")]
    Lp(String),
    #[error("test point {0} is not served by any deployed surface")]
    UncoveredTestPoint(usize),
    #[error("mesh line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
