use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("no value supplied for variable `{0}`")]
    MissingVariable(String),

    #[error("variable lists do not match: {0}")]
    VariableMismatch(String),

    #[error("zero polynomial")]
    ZeroPolynomial,

    #[error("polynomial is not univariate")]
    NotUnivariate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("input rows are linearly dependent")]
    DependentRows,

    #[error("matrix is not a symplectic form: {0}")]
    NotSymplectic(String),

    #[error("parametrization vanishes at the requested parameters (base point)")]
    BasePoint,

    #[error("point does not lie on {0}")]
    NotOnVariety(String),

    #[error("point is singular on the source variety")]
    SingularPoint,

    #[error("sampling budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("hyperplane center is a cone vertex of the variety")]
    VertexHyperplane,

    #[error("point lies outside the chart x0 = y^n = 1")]
    OutsideChart,

    #[error("chart basis does not complement the center line: {0}")]
    ChartMismatch(String),

    #[error("fewer than two section points available")]
    TooFewPoints,

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("catalog self-check failed for `{name}`: {reason}")]
    SelfCheckFailed { name: String, reason: String },

    #[error("degenerate source variety: {0}")]
    DegenerateSource(String),
}
