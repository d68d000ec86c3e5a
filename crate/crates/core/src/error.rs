use std::path::PathBuf;

use thiserror::Error;

use crate::alignment::SentenceRef;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rubric: min {min} must be below max {max}")]
    InvalidRubric { min: f64, max: f64 },

    #[error("paragraph index {index} out of range for {count} paragraph(s)")]
    PositionOutOfRange { index: usize, count: usize },

    #[error("load error in essay `{essay_id}`, field `{field}`: {message}")]
    Load {
        essay_id: String,
        field: String,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Format { what: String, message: String },

    #[error("alignment threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("essay `{essay_id}`: no purpose annotation for revision (original {}, revised {})", fmt_ref(.original), fmt_ref(.revised))]
    MissingAnnotation {
        essay_id: String,
        original: Option<SentenceRef>,
        revised: Option<SentenceRef>,
    },

    #[error("essay `{essay_id}`: conflicting purposes {first} and {second} for one revision")]
    ConflictingAnnotation {
        essay_id: String,
        first: String,
        second: String,
    },

    #[error("taxonomy violation: surface purpose {purpose} cannot be used with operation {operation}")]
    TaxonomyViolation { operation: String, purpose: String },

    #[error("`{0}` is not a revision vocabulary word")]
    UnknownWord(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("topic {topic} out of range for a {k}-topic model")]
    TopicOutOfRange { topic: usize, k: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("singular design matrix: predictors are collinear with each other or the intercept")]
    SingularDesign,

    #[error("degenerate regression target: y has zero variance")]
    DegenerateTarget,

    #[error("degenerate variance: input vector is constant")]
    DegenerateVariance,

    #[error("perfect confound: control variable is perfectly correlated with an input")]
    PerfectConfound,

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    /// Stable machine-readable tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRubric { .. } => "invalid-rubric",
            Error::PositionOutOfRange { .. } => "bounds",
            Error::Load { .. } => "load",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::InvalidThreshold(_) => "invalid-threshold",
            Error::MissingAnnotation { .. } => "missing-annotation",
            Error::ConflictingAnnotation { .. } => "conflicting-annotation",
            Error::TaxonomyViolation { .. } => "taxonomy-violation",
            Error::UnknownWord(_) => "unknown-word",
            Error::Config(_) => "config",
            Error::Training(_) => "training",
            Error::VocabularyMismatch(_) => "vocabulary-mismatch",
            Error::TopicOutOfRange { .. } => "bounds",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::SingularDesign => "singular-design",
            Error::DegenerateTarget => "degenerate-target",
            Error::DegenerateVariance => "degenerate-variance",
            Error::PerfectConfound => "perfect-confound",
            Error::InsufficientData { .. } => "insufficient-data",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn load(
        essay_id: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Load {
            essay_id: essay_id.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn format(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Format {
            what: what.into(),
            message: message.to_string(),
        }
    }
}

fn fmt_ref(r: &Option<SentenceRef>) -> String {
    match r {
        Some(r) => format!("paragraph {} sentence {}", r.paragraph, r.sentence),
        None => "none".to_string(),
    }
}
