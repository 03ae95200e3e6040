//! Exact k-nearest-neighbour queries under cosine similarity.
//!
//! No approximate index: every query scans the eligible pool. Similarities
//! accumulate in `f64` over the stored `f32` components, always in ascending
//! component order, so repeated runs (and independent reimplementations that
//! follow the same order) produce bit-identical results. Ranking is total:
//! similarity descending, then token ascending, which pins down every tie.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::corpus::{Decade, EmbeddingSpace, PosTable};
use crate::error::{Error, Result};

/// One ranked neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub similarity: f64,
}

/// The ranked neighbourhood of a query word in one decade.
#[derive(Debug, Clone)]
pub struct NeighborSet {
    query: String,
    decade: Decade,
    requested_k: usize,
    neighbors: Vec<Neighbor>,
}

impl NeighborSet {
    pub fn query(&self) -> &str {
        &self.query
    }

    pub fn decade(&self) -> Decade {
        self.decade
    }

    /// The `k` that was asked for; `len()` may be smaller when the pool is.
    pub fn requested_k(&self) -> usize {
        self.requested_k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self) -> &[Neighbor] {
        &self.neighbors
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.token.as_str())
    }

    pub fn token_set(&self) -> HashSet<&str> {
        self.tokens().collect()
    }
}

/// Restrict the candidate pool to tokens carrying `tag` in `table`.
/// Untagged tokens never qualify.
#[derive(Clone, Copy)]
pub struct PosFilter<'a> {
    pub table: &'a PosTable,
    pub tag: &'a str,
}

fn rank_candidates(
    space: &EmbeddingSpace,
    query_index: usize,
    k: usize,
    pos: Option<PosFilter<'_>>,
    pool: Option<&HashSet<String>>,
) -> Vec<(f64, u32)> {
    let dim = space.dim();
    let query: Vec<f64> = space
        .vector_at(query_index)
        .iter()
        .map(|&c| c as f64)
        .collect();
    let norms = space.norms();
    let query_norm = norms[query_index];

    let mut candidates: Vec<(f64, u32)> = Vec::new();
    for (i, token) in space.tokens().iter().enumerate() {
        if i == query_index {
            continue;
        }
        if let Some(filter) = pos {
            if filter.table.tag(token) != Some(filter.tag) {
                continue;
            }
        }
        if let Some(pool) = pool {
            if !pool.contains(token) {
                continue;
            }
        }
        let row = space.vector_at(i);
        let mut dot = 0f64;
        for t in 0..dim {
            dot += query[t] * row[t] as f64;
        }
        candidates.push((dot / (query_norm * norms[i]), i as u32));
    }

    let by_rank = |a: &(f64, u32), b: &(f64, u32)| {
        b.0.total_cmp(&a.0)
            .then_with(|| space.token_at(a.1 as usize).cmp(space.token_at(b.1 as usize)))
    };
    let take = k.min(candidates.len());
    if take > 0 && take < candidates.len() {
        candidates.select_nth_unstable_by(take - 1, by_rank);
        candidates.truncate(take);
    }
    candidates.sort_unstable_by(by_rank);
    candidates
}

/// Exact top-`k` neighbours of `query` in `space`.
///
/// The query itself is never a candidate. When the eligible pool holds fewer
/// than `k` tokens the result saturates at the pool size; an empty pool is an
/// error rather than an empty set.
pub fn knn(
    space: &EmbeddingSpace,
    query: &str,
    k: usize,
    pos: Option<PosFilter<'_>>,
    pool: Option<&HashSet<String>>,
) -> Result<NeighborSet> {
    if k == 0 {
        return Err(Error::InvalidK(0));
    }
    let query_index = space.index_of(query).ok_or_else(|| Error::MissingWord {
        token: query.to_string(),
        decade: space.decade(),
    })?;
    let ranked = rank_candidates(space, query_index, k, pos, pool);
    if ranked.is_empty() {
        return Err(Error::EmptyPool {
            token: query.to_string(),
            decade: space.decade(),
        });
    }
    Ok(NeighborSet {
        query: query.to_string(),
        decade: space.decade(),
        requested_k: k,
        neighbors: ranked
            .into_iter()
            .map(|(similarity, i)| Neighbor {
                token: space.token_at(i as usize).to_string(),
                similarity,
            })
            .collect(),
    })
}

/// Batch form of [`knn`]: queries fan out across threads, results come back
/// in input order. Any failing query fails the whole batch.
pub fn knn_batch(
    space: &EmbeddingSpace,
    queries: &[&str],
    k: usize,
    pos: Option<PosFilter<'_>>,
    pool: Option<&HashSet<String>>,
) -> Result<Vec<NeighborSet>> {
    queries
        .par_iter()
        .map(|q| knn(space, q, k, pos, pool))
        .collect()
}
