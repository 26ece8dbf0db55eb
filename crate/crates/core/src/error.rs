use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown root system type {0:?}")]
    UnknownType(String),
    #[error("rank {rank} is out of range for type {family} (minimum {min})")]
    RankOutOfRange {
        family: char,
        rank: usize,
        min: usize,
    },
    #[error("level must be an integer greater than 1, got {0}")]
    InvalidLevel(i64),
    #[error("parameter {name} = {value} must lie in (-1, 1) and be nonzero")]
    InvalidParameter { name: &'static str, value: String },
    #[error("weight {0:?} is not dominant")]
    NotDominant(Vec<i64>),
    #[error("weight {weight:?} is not in the alcove P_{level}")]
    NotInAlcove { weight: Vec<i64>, level: i64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("weight {0:?} is neither minuscule nor quasi-minuscule")]
    NotQuasiMinuscule(Vec<i64>),
    #[error("weight {nu:?} is not in the Weyl orbit of {omega:?}")]
    NotInOrbit { nu: Vec<i64>, omega: Vec<i64> },
    #[error("spectral point is singular: <xi, alpha> is in 2 pi Z for a root")]
    Singular,
    #[error("Weyl group has more than {0} elements; enumeration refused")]
    GroupTooLarge(usize),
    #[error("half-integral exponent cannot be evaluated at {0}")]
    HalfIntegralExponent(String),
    #[error("Laurent polynomial has an uncancelled negative power; t -> 0 limit does not exist")]
    NoLimit,
    #[error("exact division failed: divisor does not divide dividend")]
    InexactDivision,
    #[error("alcove projection of {0:?} did not terminate")]
    ProjectionDiverged(Vec<i64>),
    #[error("Newton iteration for node {mu:?} did not converge (|grad| = {residual:e})")]
    NoConvergence { mu: Vec<i64>, residual: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("coefficient {value} is not within {tol:e} of an integer")]
    NotInteger { value: f64, tol: f64 },
    #[error("{0}")]
    Config(String),
}
