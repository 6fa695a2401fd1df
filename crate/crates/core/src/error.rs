//! Error types, one enum per subsystem.

use thiserror::Error;

/// Errors raised while loading, validating, or partitioning series data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in '{path}': {message}")]
    Csv { path: String, message: String },

    #[error("non-numeric value '{value}' at row {row} in column '{column}'")]
    NonNumeric {
        value: String,
        row: u64,
        column: String,
    },

    #[error("column '{0}' not found in csv header")]
    MissingColumn(String),

    #[error("column index {index} out of range for a file with {width} columns")]
    ColumnOutOfRange { index: usize, width: usize },

    #[error("too few points: got {got}, need at least {min}")]
    TooFewPoints { got: usize, min: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("timestamp count {got} does not match value count {expected}")]
    TimestampLength { got: usize, expected: usize },

    #[error("timestamps must be strictly increasing (violated at index {0})")]
    NonIncreasingTimestamps(usize),

    #[error("constant series: every value equals {0}, cannot fit a normalizer")]
    ConstantSeries(f64),

    #[error("lag count {d} out of range 1..={max}")]
    LagOutOfRange { d: usize, max: usize },

    #[error("split fractions for '{name}' must each be positive and sum to 1 (sum = {sum})")]
    BadFractions { name: String, sum: f64 },

    #[error("split '{name}' leaves the {part} set empty for {n_targets} targets")]
    EmptySplit {
        name: String,
        part: &'static str,
        n_targets: usize,
    },

    #[error("negative noise standard deviation {0}")]
    NegativeNoise(f64),
}

/// Errors raised by network construction and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("weight vector has length {got}, expected {expected} for d={d}, h={h}")]
    WeightLength {
        got: usize,
        expected: usize,
        d: usize,
        h: usize,
    },

    #[error("input has length {got}, expected {expected} lagged values")]
    InputLength { got: usize, expected: usize },

    #[error("target index {index} out of range for {n_targets} targets")]
    IndexOutOfRange { index: usize, n_targets: usize },

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("network snapshot declares layout '{got}', this build reads '{expected}'")]
    LayoutMismatch { got: String, expected: String },
}

/// Errors raised by the training loops.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the evaluation metrics.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {targets} targets vs {predictions} predictions")]
    LengthMismatch { targets: usize, predictions: usize },

    #[error("empty input")]
    Empty,

    #[error("target at index {0} is zero, percentage error undefined")]
    ZeroTarget(usize),

    #[error("targets are constant, correlation undefined")]
    ConstantTargets,

    #[error("predictions are constant, correlation undefined")]
    ConstantPredictions,

    #[error("zero training count")]
    ZeroTrainCount,

    #[error("train count {n_train} exceeds total {n_total}")]
    TrainExceedsTotal { n_train: usize, n_total: usize },
}

/// Errors raised by the diagnostic artifacts.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("no error values supplied")]
    Empty,

    #[error("bin count must be at least 1")]
    ZeroBins,

    #[error("max lag {max_lag} requires at least {required} values, got {got}")]
    LagTooLarge {
        max_lag: usize,
        required: usize,
        got: usize,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("io error writing '{path}': {message}")]
    Io { path: String, message: String },
}

/// Errors raised by the benchmark harness.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("[{context}] {source}")]
    Data {
        context: String,
        #[source]
        source: DataError,
    },

    #[error("[{context}] {source}")]
    Train {
        context: String,
        #[source]
        source: TrainError,
    },

    #[error("[{context}] {source}")]
    Model {
        context: String,
        #[source]
        source: ModelError,
    },

    #[error("[{context}] {source}")]
    Metrics {
        context: String,
        #[source]
        source: MetricsError,
    },

    #[error("[{context}] {source}")]
    Diagnostics {
        context: String,
        #[source]
        source: DiagnosticsError,
    },

    #[error("io error on '{path}': {message}")]
    Io { path: String, message: String },

    #[error("report row for {algorithm} {scenario} is internally inconsistent: {detail}")]
    InconsistentRow {
        algorithm: String,
        scenario: String,
        detail: String,
    },

    #[error("nothing to select from: empty result table")]
    EmptyTable,

    #[error("{0}")]
    InvalidRequest(String),
}

impl BenchError {
    /// Attach a scenario/algorithm context label to a subsystem error.
    pub fn in_context<E>(context: impl Into<String>, source: E) -> Self
    where
        E: Into<BenchErrorKind>,
    {
        let context = context.into();
        match source.into() {
            BenchErrorKind::Data(source) => BenchError::Data { context, source },
            BenchErrorKind::Train(source) => BenchError::Train { context, source },
            BenchErrorKind::Model(source) => BenchError::Model { context, source },
            BenchErrorKind::Metrics(source) => BenchError::Metrics { context, source },
            BenchErrorKind::Diagnostics(source) => BenchError::Diagnostics { context, source },
        }
    }
}

/// Internal adapter so `BenchError::in_context` accepts any subsystem error.
#[derive(Debug)]
pub enum BenchErrorKind {
    Data(DataError),
    Train(TrainError),
    Model(ModelError),
    Metrics(MetricsError),
    Diagnostics(DiagnosticsError),
}

impl From<DataError> for BenchErrorKind {
    fn from(e: DataError) -> Self {
        BenchErrorKind::Data(e)
    }
}

impl From<TrainError> for BenchErrorKind {
    fn from(e: TrainError) -> Self {
        BenchErrorKind::Train(e)
    }
}

impl From<ModelError> for BenchErrorKind {
    fn from(e: ModelError) -> Self {
        BenchErrorKind::Model(e)
    }
}

impl From<MetricsError> for BenchErrorKind {
    fn from(e: MetricsError) -> Self {
        BenchErrorKind::Metrics(e)
    }
}

impl From<DiagnosticsError> for BenchErrorKind {
    fn from(e: DiagnosticsError) -> Self {
        BenchErrorKind::Diagnostics(e)
    }
}
