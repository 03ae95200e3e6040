//! Category prototype models: an isotropic Gaussian centred on the mean of
//! the member embeddings.
//!
//! With identity covariance, the posterior for category membership is
//! monotone in the squared Euclidean distance to the centroid, so scores
//! are reported as the log-density up to its constant term:
//! `-0.5 * ||x - mu||^2`. Larger is more prototypical. Absolute score
//! values are only comparable within one fitted model.

use std::collections::HashMap;

use crate::corpus::{Decade, EmbeddingSpace, LexiconEntry};
use crate::error::{Error, Result};
use crate::stats::{pearson, CorrelationResult};

/// A fitted prototype for one category in one decade.
#[derive(Debug, Clone)]
pub struct PrototypeModel {
    category: String,
    decade: Decade,
    centroid: Vec<f64>,
    members: Vec<String>,
}

impl PrototypeModel {
    /// Fit the prototype of `category` from the vectors of `members` in
    /// `space`. The centroid is the per-dimension arithmetic mean, summed
    /// with Kahan compensation.
    pub fn fit(space: &EmbeddingSpace, category: &str, members: &[String]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyCategory {
                category: category.to_string(),
                decade: space.decade(),
            });
        }
        let dim = space.dim();
        let mut sum = vec![0.0f64; dim];
        let mut compensation = vec![0.0f64; dim];
        for member in members {
            let vector = space.vector(member).ok_or_else(|| Error::MissingWord {
                token: member.clone(),
                decade: space.decade(),
            })?;
            for d in 0..dim {
                let term = vector[d] as f64 - compensation[d];
                let next = sum[d] + term;
                compensation[d] = (next - sum[d]) - term;
                sum[d] = next;
            }
        }
        let n = members.len() as f64;
        let centroid = sum.into_iter().map(|s| s / n).collect();
        Ok(PrototypeModel {
            category: category.to_string(),
            decade: space.decade(),
            centroid,
            members: members.to_vec(),
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn decade(&self) -> Decade {
        self.decade
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    /// Log-density of `vector` under the prototype, up to the constant term:
    /// `-0.5 * ||x - mu||^2`. Strictly decreasing in the distance to the
    /// centroid.
    pub fn log_score(&self, vector: &[f32]) -> Result<f64> {
        if vector.len() != self.centroid.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector has {} components, prototype has {}",
                vector.len(),
                self.centroid.len()
            )));
        }
        let mut dist2 = 0.0f64;
        for (&x, &mu) in vector.iter().zip(&self.centroid) {
            let d = x as f64 - mu;
            dist2 += d * d;
        }
        Ok(-0.5 * dist2)
    }

    /// Score a token stored in `space`.
    pub fn score_token(&self, space: &EmbeddingSpace, token: &str) -> Result<f64> {
        let vector = space.vector(token).ok_or_else(|| Error::MissingWord {
            token: token.to_string(),
            decade: space.decade(),
        })?;
        self.log_score(vector)
    }
}

/// A member's prototype score in one decade.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtoScore {
    pub token: String,
    pub decade: Decade,
    pub score: f64,
}

/// Score every member of a category against its own prototype.
///
/// With `leave_one_out` the prototype for each member is refit on the other
/// members, removing the target's pull on the centroid; the default keeps
/// one shared fit, matching the published analyses.
pub fn score_category(
    space: &EmbeddingSpace,
    category: &str,
    members: &[String],
    leave_one_out: bool,
) -> Result<Vec<ProtoScore>> {
    if members.is_empty() {
        return Err(Error::EmptyCategory {
            category: category.to_string(),
            decade: space.decade(),
        });
    }
    let mut scores = Vec::with_capacity(members.len());
    if leave_one_out {
        if members.len() < 2 {
            return Err(Error::EmptyCategory {
                category: category.to_string(),
                decade: space.decade(),
            });
        }
        for (i, member) in members.iter().enumerate() {
            let rest: Vec<String> = members
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, m)| m.clone())
                .collect();
            let model = PrototypeModel::fit(space, category, &rest)?;
            scores.push(ProtoScore {
                token: member.clone(),
                decade: space.decade(),
                score: model.score_token(space, member)?,
            });
        }
    } else {
        let model = PrototypeModel::fit(space, category, members)?;
        for member in members {
            scores.push(ProtoScore {
                token: member.clone(),
                decade: space.decade(),
                score: model.score_token(space, member)?,
            });
        }
    }
    Ok(scores)
}

/// Correlate model scores with empirical prototypicality ratings.
///
/// Every scored token must carry a rating in `lexicon`; the rating used is
/// the normalized one (larger = more prototypical, whatever the published
/// scale direction was).
pub fn reconstruction_eval(
    scores: &[ProtoScore],
    lexicon: &[LexiconEntry],
) -> Result<CorrelationResult> {
    let ratings: HashMap<&str, f64> = lexicon
        .iter()
        .map(|e| (e.token.as_str(), e.prototypicality))
        .collect();
    let mut xs = Vec::with_capacity(scores.len());
    let mut ys = Vec::with_capacity(scores.len());
    for s in scores {
        let rating = ratings
            .get(s.token.as_str())
            .ok_or_else(|| Error::MissingRating {
                token: s.token.clone(),
            })?;
        xs.push(s.score);
        ys.push(*rating);
    }
    pearson(&xs, &ys)
}
