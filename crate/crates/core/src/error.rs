use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid tree shape: {0}")]
    Shape(String),
    #[error("arity {arity} at level {level} exceeds the arity limit {limit}")]
    ArityLimit { level: usize, arity: String, limit: u64 },
    #[error("level {0} of this tree is not representable (its level index overflows)")]
    LevelOverflow(usize),
    #[error("invalid vertex: {0}")]
    Vertex(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("undeclared state `{name}` (line {line})")]
    UndeclaredState { name: String, line: usize },
    #[error("state `{name}`: permutation degree {degree} does not match arity {arity}")]
    DegreeMismatch { name: String, degree: usize, arity: usize },
    #[error("state `{name}`: permutation is not a bijection of 1..{arity}")]
    NotBijective { name: String, arity: usize },
    #[error("level size {degree} exceeds the degree limit {limit} (set BRANCHLAB_DEGREE_LIMIT to raise it)")]
    DegreeLimit { degree: String, limit: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("group does not lie in the iterated wreath product of cyclic groups: {0}")]
    NotWreathCyclic(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("enumeration budget of {budget} nodes exceeded; {found} subgroups found before stopping")]
    Budget { budget: usize, found: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
