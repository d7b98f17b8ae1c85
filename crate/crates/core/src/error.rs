use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid gas state: {0}")]
    Domain(String),
    #[error("state is not hyperbolic in x (u = {u}, c = {c})")]
    NotHyperbolic { u: f64, c: f64 },
    #[error("wave curve left its validity region: {0}")]
    CurveRange(String),
    #[error("nonlinear solve did not converge: {0}")]
    Solver(String),
    #[error("states are not connected by a single wave: {0}")]
    Consistency(String),
    #[error("Riemann data out of local range: {0}")]
    RiemannRange(String),
    #[error("tracker invariant violated: {0}")]
    Invariant(String),
    #[error("event ceiling of {0} exceeded")]
    EventCeiling(usize),
    #[error("degenerate cell geometry: {0}")]
    Geometry(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
