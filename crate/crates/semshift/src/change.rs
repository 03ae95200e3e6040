//! Semantic change rates: Jaccard distance between a word's nearest
//! neighbourhoods in two decades.
//!
//! Two pool regimes exist. `WholeLexicon` draws neighbours from the entire
//! vocabulary of each decade, restricted to the query's part of speech.
//! `CategoryBounded` draws them only from the query's rated category, which
//! quantifies movement relative to the category rather than the language at
//! large. The two regimes answer different questions and are never mixed
//! inside one score.

use std::collections::{HashMap, HashSet};
use std::hash::Hash;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{AnalysisBundle, Decade, LexiconEntry};
use crate::error::{Error, Result};
use crate::neighborhood::{knn, NeighborSet, PosFilter};
use crate::stats::{pearson, CorrelationResult};

/// Neighbourhood pool regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeMode {
    WholeLexicon,
    CategoryBounded,
}

impl ChangeMode {
    /// Neighbourhood size used when the caller does not pick one. The
    /// bounded pool is far smaller than the open vocabulary, hence the
    /// smaller default.
    pub fn default_k(self) -> usize {
        match self {
            ChangeMode::WholeLexicon => 100,
            ChangeMode::CategoryBounded => 25,
        }
    }

    /// Short label used in CSV output and CLI flags.
    pub fn label(self) -> &'static str {
        match self {
            ChangeMode::WholeLexicon => "lexicon",
            ChangeMode::CategoryBounded => "category",
        }
    }
}

impl FromStr for ChangeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "lexicon" | "whole-lexicon" => Ok(ChangeMode::WholeLexicon),
            "category" | "category-bounded" => Ok(ChangeMode::CategoryBounded),
            other => Err(format!(
                "invalid mode {other:?}, expected lexicon or category"
            )),
        }
    }
}

/// Jaccard distance `1 - |a ∩ b| / |a ∪ b|` between two token sets.
/// Undefined when both sets are empty.
pub fn jaccard_distance<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::EmptySets);
    }
    let intersection = if a.len() <= b.len() {
        a.iter().filter(|x| b.contains(x)).count()
    } else {
        b.iter().filter(|x| a.contains(x)).count()
    };
    let union = a.len() + b.len() - intersection;
    Ok(1.0 - intersection as f64 / union as f64)
}

/// A word's change rate between two decades, with the neighbourhoods that
/// produced it.
#[derive(Debug, Clone)]
pub struct ChangeScore {
    pub token: String,
    pub t1: Decade,
    pub t2: Decade,
    pub k: usize,
    pub mode: ChangeMode,
    pub rate: f64,
    pub neighbors_t1: NeighborSet,
    pub neighbors_t2: NeighborSet,
}

fn category_pool(lexicon: &[LexiconEntry], category: &str) -> HashSet<String> {
    lexicon
        .iter()
        .filter(|e| e.category == category)
        .map(|e| e.token.clone())
        .collect()
}

fn rate_with_pool(
    bundle: &AnalysisBundle,
    token: &str,
    t1: Decade,
    t2: Decade,
    k: usize,
    mode: ChangeMode,
    pool: Option<&HashSet<String>>,
) -> Result<ChangeScore> {
    let s1 = bundle.space(t1)?;
    let s2 = bundle.space(t2)?;
    let (pos_filter, pool) = match mode {
        ChangeMode::WholeLexicon => {
            let tag = bundle.pos.tag(token).ok_or_else(|| Error::UntaggedWord {
                token: token.to_string(),
            })?;
            (
                Some(PosFilter {
                    table: &bundle.pos,
                    tag,
                }),
                None,
            )
        }
        ChangeMode::CategoryBounded => (None, pool),
    };
    let neighbors_t1 = knn(s1, token, k, pos_filter, pool)?;
    let neighbors_t2 = knn(s2, token, k, pos_filter, pool)?;
    let rate = jaccard_distance(&neighbors_t1.token_set(), &neighbors_t2.token_set())?;
    Ok(ChangeScore {
        token: token.to_string(),
        t1,
        t2,
        k,
        mode,
        rate,
        neighbors_t1,
        neighbors_t2,
    })
}

/// Change rate of one word between `t1` and `t2` (inclusive bounds must
/// satisfy `t1 <= t2`; equal decades yield a rate of exactly zero).
pub fn semantic_change_rate(
    bundle: &AnalysisBundle,
    token: &str,
    t1: Decade,
    t2: Decade,
    k: usize,
    mode: ChangeMode,
) -> Result<ChangeScore> {
    if t1 > t2 {
        return Err(Error::DecadeOrder { t1, t2 });
    }
    let pool = match mode {
        ChangeMode::WholeLexicon => None,
        ChangeMode::CategoryBounded => {
            let entry = bundle
                .lexicon
                .iter()
                .find(|e| e.token == token)
                .ok_or_else(|| Error::NotInLexicon {
                    token: token.to_string(),
                })?;
            Some(category_pool(&bundle.lexicon, &entry.category))
        }
    };
    rate_with_pool(bundle, token, t1, t2, k, mode, pool.as_ref())
}

/// Change rates for every lexicon entry, in lexicon order. Queries fan out
/// across threads; the output order is the input order regardless.
pub fn rates_for_lexicon(
    bundle: &AnalysisBundle,
    t1: Decade,
    t2: Decade,
    k: usize,
    mode: ChangeMode,
) -> Result<Vec<ChangeScore>> {
    if t1 > t2 {
        return Err(Error::DecadeOrder { t1, t2 });
    }
    let pools: HashMap<&str, HashSet<String>> = match mode {
        ChangeMode::WholeLexicon => HashMap::new(),
        ChangeMode::CategoryBounded => {
            let mut by_category: HashMap<&str, HashSet<String>> = HashMap::new();
            for entry in &bundle.lexicon {
                by_category
                    .entry(entry.category.as_str())
                    .or_default()
                    .insert(entry.token.clone());
            }
            by_category
        }
    };
    bundle
        .lexicon
        .par_iter()
        .map(|entry| {
            let pool = match mode {
                ChangeMode::WholeLexicon => None,
                ChangeMode::CategoryBounded => pools.get(entry.category.as_str()),
            };
            rate_with_pool(bundle, &entry.token, t1, t2, k, mode, pool)
        })
        .collect()
}

/// Rates for every lexicon entry across several neighbourhood sizes, plus
/// the pairwise correlations between the per-`k` rate columns.
#[derive(Debug)]
pub struct SweepResult {
    pub ks: Vec<usize>,
    pub tokens: Vec<String>,
    /// `rates[w][i]` is the rate of token `w` at `ks[i]`.
    pub rates: Vec<Vec<f64>>,
    /// Square matrix over `ks`; symmetric, unit diagonal.
    pub correlations: Vec<Vec<CorrelationResult>>,
}

/// Recompute lexicon rates at each `k` and correlate the resulting columns.
///
/// Because the neighbour ranking is total, the top-`k` set at a smaller `k`
/// is a prefix of the ranking at the largest `k`, so neighbourhoods are
/// ranked once per word and decade.
pub fn sweep_k(
    bundle: &AnalysisBundle,
    t1: Decade,
    t2: Decade,
    ks: &[usize],
    mode: ChangeMode,
) -> Result<SweepResult> {
    if ks.is_empty() {
        return Err(Error::Config("sweep requires at least one k".into()));
    }
    if let Some(&bad) = ks.iter().find(|&&k| k == 0) {
        return Err(Error::InvalidK(bad));
    }
    let k_max = *ks.iter().max().expect("non-empty");
    let full = rates_for_lexicon(bundle, t1, t2, k_max, mode)?;

    let rates: Vec<Vec<f64>> = full
        .iter()
        .map(|score| {
            ks.iter()
                .map(|&k| {
                    let a: HashSet<&str> = score.neighbors_t1.tokens().take(k).collect();
                    let b: HashSet<&str> = score.neighbors_t2.tokens().take(k).collect();
                    jaccard_distance(&a, &b)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let n_k = ks.len();
    let column = |i: usize| -> Vec<f64> { rates.iter().map(|row| row[i]).collect() };
    let mut correlations = Vec::with_capacity(n_k);
    for i in 0..n_k {
        let mut row = Vec::with_capacity(n_k);
        let ci = column(i);
        for j in 0..n_k {
            if i == j {
                // A column against itself correlates perfectly by identity.
                row.push(CorrelationResult {
                    rho: 1.0,
                    p: 0.0,
                    n: ci.len(),
                });
            } else {
                row.push(pearson(&ci, &column(j))?);
            }
        }
        correlations.push(row);
    }
    Ok(SweepResult {
        ks: ks.to_vec(),
        tokens: full.iter().map(|s| s.token.clone()).collect(),
        rates,
        correlations,
    })
}
