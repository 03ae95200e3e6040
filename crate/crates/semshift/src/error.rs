//! Error types shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped loosely
//! by the layer that raises them; the CLI renders each as a single line on
//! stderr, so `Display` implementations must not embed newlines.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Why a lexicon token was dropped during intersection with the loaded
/// resources. Carried by [`Error::EmptyIntersection`] and returned alongside
/// successful intersections so callers can write an exclusion report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExclusionReason {
    /// No vector for the token in the embedding space of this decade.
    MissingVector(i32),
    /// No frequency entry for the token at this decade.
    MissingFrequency(i32),
    /// The token is absent from the part-of-speech table.
    MissingPosTag,
    /// The token carries a tag other than the required one.
    PosMismatch { required: String, actual: String },
}

impl std::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExclusionReason::MissingVector(d) => write!(f, "no vector in {d}s space"),
            ExclusionReason::MissingFrequency(d) => write!(f, "no frequency at {d}"),
            ExclusionReason::MissingPosTag => write!(f, "no part-of-speech tag"),
            ExclusionReason::PosMismatch { required, actual } => {
                write!(f, "tagged {actual}, required {required}")
            }
        }
    }
}

/// A lexicon token excluded by [`crate::corpus::AnalysisBundle::intersect_lexicon`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub token: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path} line {line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate token {token:?} in {path} line {line}")]
    DuplicateToken {
        path: PathBuf,
        line: usize,
        token: String,
    },

    #[error("decade {0} is not a multiple of ten between 1800 and 1990")]
    InvalidDecade(i32),

    #[error("no embedding space loaded for decade {0}")]
    MissingDecade(i32),

    #[error("lexicon intersection is empty ({} tokens excluded)", exclusions.len())]
    EmptyIntersection { exclusions: Vec<Exclusion> },

    #[error("word {token:?} has no vector in the {decade}s space")]
    MissingWord { token: String, decade: i32 },

    #[error("word {token:?} has a zero-norm vector in the {decade}s space")]
    ZeroNorm { token: String, decade: i32 },

    #[error("neighbourhood pool for {token:?} in the {decade}s space is empty")]
    EmptyPool { token: String, decade: i32 },

    #[error("k must be a positive integer, got {0}")]
    InvalidK(usize),

    #[error("decades must satisfy t1 <= t2, got t1={t1} t2={t2}")]
    DecadeOrder { t1: i32, t2: i32 },

    #[error("word {token:?} is not in the loaded lexicon")]
    NotInLexicon { token: String },

    #[error("word {token:?} has no part-of-speech tag, cannot build a tag-matched pool")]
    UntaggedWord { token: String },

    #[error("jaccard distance is undefined when both sets are empty")]
    EmptySets,

    #[error("category {category:?} has no members with vectors in the {decade}s space")]
    EmptyCategory { category: String, decade: i32 },

    #[error("no empirical rating for scored token {token:?}")]
    MissingRating { token: String },

    #[error("need at least {required} observations, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("design matrix is rank deficient; dependent columns: {columns}")]
    Collinear { columns: String },

    #[error("cannot apply {transform} to column {column:?}: value {value} out of domain")]
    Transform {
        transform: &'static str,
        column: String,
        value: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{requested} principal components requested but only {available} directions available")]
    Underdetermined { requested: usize, available: usize },

    #[error("hypernym graph has a cycle through sense {sense:?}")]
    CyclicGraph { sense: String },

    #[error("token {token:?} has no designated sense in the hypernym graph")]
    NoDesignatedSense { token: String },

    #[error("sense {sense:?} of token {token:?} is unreachable from the hypernym root")]
    UnreachableSense { token: String, sense: String },

    #[error("token {token:?} has no dated sense for part of speech {pos:?}")]
    NoMatchingSense { token: String, pos: String },

    #[error("token {token:?} has no sense alive at {at}")]
    ZeroLiveSenses { token: String, at: i32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("column {column:?} is not available for this command ({hint})")]
    MissingColumn { column: String, hint: String },

    #[error("manifest verification failed: {0}")]
    Manifest(String),

    #[error("numeric check failed: {0}")]
    Numeric(String),
}

impl Error {
    /// Render the message with any embedded newlines collapsed, so the CLI
    /// always emits exactly one line per failure.
    pub fn single_line(&self) -> String {
        let raw = self.to_string();
        if raw.contains('\n') {
            raw.split('\n')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect::<Vec<_>>()
                .join("; ")
        } else {
            raw
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
