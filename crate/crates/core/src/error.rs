use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty input")]
    EmptyInput,

    #[error("feature `{0}` has no observed values")]
    AllMissing(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("feature mask selects no features")]
    EmptyMask,

    #[error("mask length {got} does not match {expected} features")]
    MaskLength { expected: usize, got: usize },

    #[error("class `{class}` has {count} instances, fewer than {folds} folds")]
    TooFewPerClass {
        class: &'static str,
        count: usize,
        folds: usize,
    },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("dataset contains missing cells")]
    MissingValues,

    #[error("instance does not match model schema: {0}")]
    SchemaMismatch(String),

    #[error("non-finite value during training: {0}")]
    NonFinite(String),

    #[error("SMO did not converge after {iterations} pair optimizations")]
    NonConvergence { iterations: usize },

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("length mismatch: {predictions} predictions vs {truth} labels")]
    LengthMismatch { predictions: usize, truth: usize },

    #[error("confusion matrix is empty")]
    EmptyConfusion,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping `Context` layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the error stems from the input data rather than the
    /// configuration or a failing algorithm.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse { .. }
                | Error::EmptyInput
                | Error::AllMissing(_)
                | Error::Schema(_)
                | Error::TooFewPerClass { .. }
                | Error::SingleClass
                | Error::MissingValues
        )
    }
}
