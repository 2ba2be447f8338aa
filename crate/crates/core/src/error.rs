use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("determinant vanishes to precision but the entries are not an exact nilpotent")]
    AmbiguousNilpotent,
    #[error("outside the domain of the Cayley map: {0}")]
    OutsideDomain(String),
    #[error("representative does not match its label: {0}")]
    SpecMismatch(String),
    #[error("element is not regular semisimple")]
    NotRegular,
    #[error("geometric tail failed to certify after stratum {last_stratum}")]
    TailUnstable { last_stratum: i64 },
    #[error("fixed-point set reaches the boundary of the ball of radius {radius}")]
    BallTooSmall { radius: i64 },
    #[error("brute-force grid too large ({cells} cells)")]
    GridTooLarge { cells: u128 },
    #[error("basis does not separate the nilpotent orbits (rank {rank})")]
    RankDeficient { rank: usize },
    #[error("germ system is inconsistent: {0}")]
    InconsistentSystem(String),
    #[error("pool cannot isolate orbit {0}")]
    PoolDeficient(String),
    #[error("value is not an exact rational")]
    NotExact,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}
