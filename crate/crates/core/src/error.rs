use thiserror::Error;

/// Errors raised across the level-set toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point is on the skeleton of the body; metric projection is not unique")]
    SkeletonPoint,
    #[error("body has zero volume")]
    DegenerateBody,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("inner parallel set requested with eps = {eps} >= inradius {inradius}")]
    EpsTooLarge { eps: f64, inradius: f64 },
    #[error("unsupported body for this operation: {0}")]
    UnsupportedBody(String),
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("lambda = {lambda} outside (0, {max}) for model {model}")]
    LambdaOutOfRange {
        model: String,
        lambda: f64,
        max: f64,
    },
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("invalid estimator parameter: {0}")]
    InvalidParameter(String),
    #[error("no class member within the search region satisfies the constraint: {0}")]
    InfeasibleConstraint(String),
    #[error("search budget exceeded after {iterations} iterations")]
    SearchBudgetExceeded { iterations: usize },
    #[error("sample of size {n} exceeds the brute-force limit {limit}")]
    SampleTooLarge { n: usize, limit: usize },
    #[error("symmetric difference is not inside the parallel band (c = {c})")]
    NotParallel { c: f64 },
    #[error(
        "cylinder set is not representable in the class (residual {residual:e} > {tolerance:e})"
    )]
    NonRepresentable { residual: f64, tolerance: f64 },
    #[error("incompatible cylinder representations: {0}")]
    IncompatibleRepresentations(String),
    #[error("argmax hit the truncation boundary (draw {index})")]
    TruncationHit { index: usize },
    #[error("grid too coarse: refinement moved the optimum by {cells:.2} lattice cells")]
    GridTooCoarse { cells: f64 },
    #[error("insufficient draws: {got} < {needed}")]
    InsufficientDraws { got: usize, needed: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("output {0} already exists; pass force to overwrite")]
    OutputExists(String),
    #[error("n = {n}, replication {rep}: {source}")]
    Replication {
        n: usize,
        rep: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::LambdaOutOfRange { .. }
                | Error::UnknownModel(_)
                | Error::InvalidParameter(_)
                | Error::InvalidConfig(_)
                | Error::InvalidBody(_)
                | Error::DimensionMismatch { .. }
                | Error::OutputExists(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
