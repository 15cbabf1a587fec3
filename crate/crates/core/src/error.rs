use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("axis is not unit length (norm = {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rotation axes are parallel")]
    DegenerateAxes,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("subproblem has no real solution")]
    NoSolution,

    #[error("target is unreachable: {0}")]
    Unreachable(String),

    #[error("measured signal range is degenerate (range = {range})")]
    DegenerateRange { range: f64 },

    #[error("traces are misaligned: {0}")]
    Misaligned(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rank deficient fit: {0}")]
    RankDeficient(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that describe an infeasible analysis result rather
    /// than bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Unreachable(_) | Error::NoSolution)
    }
}
