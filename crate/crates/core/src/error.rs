use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("site {site} is outside the lattice labels {min}..={max}")]
    SiteOutOfRange { site: i64, min: i64, max: i64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{function}: argument {arg} is outside the domain ({reason})")]
    Domain {
        function: &'static str,
        arg: f64,
        reason: &'static str,
    },

    #[error("{function}: pole at {arg}")]
    Pole { function: &'static str, arg: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("singular linear system at s = {re} + {im}i")]
    Singular { re: f64, im: f64 },

    #[error("series diverges: spectral radius estimate {0} >= 1")]
    Divergent(f64),

    #[error("Liouville space too large for dense algebra: N = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
