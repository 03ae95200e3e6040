//! Analysis of historical semantic change over decade-sliced embedding
//! spaces: nearest-neighbour overlap change rates, category prototype
//! models, and the regression machinery tying them to word frequency,
//! valence, and lexical covariates.
//!
//! Module map:
//! - [`corpus`]: input formats (embedding text/binary containers, POS,
//!   frequency, rated lexicons) and resource alignment.
//! - [`neighborhood`]: exact cosine k-nearest-neighbour queries.
//! - [`change`]: Jaccard distance between neighbourhoods and per-word
//!   change rates between decades.
//! - [`prototype`]: isotropic Gaussian category prototypes and scoring.
//! - [`stats`]: correlation, least squares with influence diagnostics,
//!   PCA, and kernel density estimation.
//! - [`covariates`]: hypernym depth, word age, polysemy, age of acquisition.
//! - [`svg`]: deterministic chart rendering.
//! - [`cli`]: the `semshift` command-line pipeline.

pub mod change;
pub mod cli;
pub mod corpus;
pub mod covariates;
pub mod error;
pub mod files;
pub mod neighborhood;
pub mod prototype;
pub mod stats;
pub mod svg;

pub use error::{Error, Exclusion, ExclusionReason, Result};
