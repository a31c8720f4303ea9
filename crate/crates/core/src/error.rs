use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // formula parsing and algebra
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown transformation `{0}`")]
    UnknownTransform(String),
    #[error("categorical variable `{0}` cannot appear under a numeric transformation")]
    CategoricalInTransform(String),
    #[error("invalid power {0}: exponents must be positive integers")]
    InvalidPower(String),
    #[error("Poly() needs a quantitative variable, got categorical `{0}`")]
    PolyOfCategorical(String),
    #[error("division by a variable is not supported (`{0}`)")]
    DivisionByVariable(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),

    // tabular input
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed delimited input: {0}")]
    Delimited(String),

    // encoding and design matrices
    #[error("baseline level `{level}` of `{variable}` was not observed")]
    UnknownBaseline { variable: String, level: String },
    #[error("conflicting baselines requested for `{0}`")]
    ConflictingBaseline(String),
    #[error("unseen level `{level}` of categorical `{variable}` at row {row}")]
    UnseenLevel {
        variable: String,
        level: String,
        row: usize,
    },
    #[error("{transform} domain error in `{variable}` at row {row}: value {value}")]
    Domain {
        transform: String,
        variable: String,
        row: usize,
        value: f64,
    },
    #[error("`{0}` has zero spread; cannot standardize")]
    ConstantColumn(String),
    #[error("column `{variable}` is {found}, expected {expected}")]
    ColumnType {
        variable: String,
        expected: String,
        found: String,
    },
    #[error("missing value in `{variable}` at row {row}")]
    MissingValue { variable: String, row: usize },
    #[error("transformation {0} has no inverse")]
    NotInvertible(String),
    #[error("no encoding statistics for `{0}`; encoding state does not match the model")]
    MissingEncoding(String),

    // estimation and inference
    #[error("design matrix is rank deficient: columns {} are linearly dependent", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("not enough observations: {n} rows for {p} columns")]
    TooFewObservations { n: usize, p: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("response has zero total variance")]
    ZeroVariance,
    #[error("residual sum of squares is zero; log-likelihood is unbounded")]
    PerfectFit,
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    // model comparison and selection
    #[error("models are not nested: {0}")]
    NotNested(String),
    #[error("models identical")]
    IdenticalModels,
    #[error("model has no intercept")]
    NoIntercept,
    #[error("stepwise search: {0}")]
    Stepwise(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
