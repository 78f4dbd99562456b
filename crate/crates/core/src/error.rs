use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least {min} cells, got {got}")]
    TooFewCells { got: usize, min: usize },

    #[error("invalid domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },

    #[error("meshes cover different domains: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    DomainMismatch {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error("fine mesh ({fine} cells) is coarser than target ({coarse} cells)")]
    NotFiner { fine: usize, coarse: usize },

    #[error("{fine}-point mesh is not nested in the {coarse}-point mesh")]
    NotNested { fine: usize, coarse: usize },

    #[error("state kind {got:?} cannot be used here, expected {expected}")]
    WrongStateKind {
        got: crate::mesh::StateKind,
        expected: &'static str,
    },

    #[error("method {method} needs {needed} history entries, found {found}")]
    InsufficientHistory {
        method: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("method {0} is not an explicit stepper")]
    NotExplicit(&'static str),

    #[error("method {0} is not an implicit scalar stepper")]
    NotImplicit(&'static str),

    #[error("singular implicit update (denominator {0})")]
    SingularUpdate(f64),

    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("horizon {horizon} is not an integral multiple of dt = {dt} (ratio {ratio})")]
    NonIntegralHorizon { horizon: f64, dt: f64, ratio: f64 },

    #[error("CFL number {0} is not below 1")]
    CflViolation(f64),

    #[error("problem `{0}` has no exact solution")]
    NoExactSolution(String),

    #[error("forcing has no closed-form derivatives")]
    UnsupportedForcing,

    #[error("derivative order {0} is outside 1..=4")]
    UnsupportedDerivative(usize),

    #[error("need at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("value {0} is not strictly positive")]
    NonPositive(f64),

    #[error("two-term design matrix is rank deficient")]
    RankDeficient,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty series")]
    EmptySeries,

    #[error("{0}")]
    Config(String),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
