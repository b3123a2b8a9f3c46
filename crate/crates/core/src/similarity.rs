//! Similarity over sparse count vectors, plus the all-pairs top-k machinery
//! that feeds network construction.
//!
//! Both top-k entry points accept an inverted index internally: only pairs
//! sharing at least one dimension can score above zero, so postings over the
//! attribute dimensions enumerate every candidate. The output is defined by a
//! strict total order (score desc, then ascending ids) and is identical no
//! matter how the work is partitioned.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Sparse non-negative counts over a shared dimension universe.
///
/// Indices are strictly increasing and zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseCountVector {
    indices: Vec<u32>,
    values: Vec<u64>,
}

impl SparseCountVector {
    pub fn empty() -> Self {
        SparseCountVector::default()
    }

    /// Build from parallel slices. Rejects unsorted or duplicate indices,
    /// zero values, and mismatched lengths.
    pub fn new(indices: Vec<u32>, values: Vec<u64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::invalid("indices and values differ in length"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("indices must be strictly increasing"));
        }
        if values.iter().any(|&v| v == 0) {
            return Err(Error::invalid("zero counts must not be stored"));
        }
        Ok(SparseCountVector { indices, values })
    }

    /// Build from unordered (dimension, count) pairs, summing duplicates and
    /// dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u64)>) -> Self {
        let mut pairs: Vec<(u32, u64)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        pairs.sort_unstable_by_key(|&(d, _)| d);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<u64> = Vec::with_capacity(pairs.len());
        for (d, c) in pairs {
            if indices.last() == Some(&d) {
                *values.last_mut().unwrap() += c;
            } else {
                indices.push(d);
                values.push(c);
            }
        }
        SparseCountVector { indices, values }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, dim: u32) -> u64 {
        match self.indices.binary_search(&dim) {
            Ok(pos) => self.values[pos],
            Err(_) => 0,
        }
    }

    /// Total mass Σ_k a_k.
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// Intersection similarity: Σ_k min(a_k, b_k), exact in integers.
pub fn s_int(a: &SparseCountVector, b: &SparseCountVector) -> u64 {
    let mut sum = 0u64;
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < a.indices.len() && ib < b.indices.len() {
        match a.indices[ia].cmp(&b.indices[ib]) {
            Ordering::Less => ia += 1,
            Ordering::Greater => ib += 1,
            Ordering::Equal => {
                sum += a.values[ia].min(b.values[ib]);
                ia += 1;
                ib += 1;
            }
        }
    }
    sum
}

/// Cosine similarity; 0 when either vector is empty. The dot product walks
/// dimensions in ascending order so the summation order is fixed.
pub fn s_cos(a: &SparseCountVector, b: &SparseCountVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut dot = 0.0f64;
    let (mut ia, mut ib) = (0usize, 0usize);
    while ia < a.indices.len() && ib < b.indices.len() {
        match a.indices[ia].cmp(&b.indices[ib]) {
            Ordering::Less => ia += 1,
            Ordering::Greater => ib += 1,
            Ordering::Equal => {
                dot += a.values[ia] as f64 * b.values[ib] as f64;
                ia += 1;
                ib += 1;
            }
        }
    }
    dot / (a.norm() * b.norm())
}

/// Similarity measure selected by name in configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    Intersection,
    Cosine,
}

impl Similarity {
    /// Integer intersection scores convert exactly: play-count sums stay far
    /// below 2^53.
    pub fn score(&self, a: &SparseCountVector, b: &SparseCountVector) -> f64 {
        match self {
            Similarity::Intersection => s_int(a, b) as f64,
            Similarity::Cosine => s_cos(a, b),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Similarity::Intersection => "intersection",
            Similarity::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Similarity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(Similarity::Intersection),
            "cosine" => Ok(Similarity::Cosine),
            other => Err(Error::invalid(format!("unknown similarity `{other}`"))),
        }
    }
}

/// A scored ordered pair; `i` is the query node for per-node output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub i: NodeId,
    pub j: NodeId,
    pub score: f64,
}

/// Strict total order: score descending, then i, then j ascending. Scores are
/// finite and non-negative, so `total_cmp` never sees a NaN.
pub fn pair_order(a: &ScoredPair, b: &ScoredPair) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.i.cmp(&b.i))
        .then(a.j.cmp(&b.j))
}

/// Inverted index: for each dimension, the ascending list of nodes whose
/// vector touches it.
fn postings(attrs: &[SparseCountVector]) -> HashMap<u32, Vec<NodeId>> {
    let mut map: HashMap<u32, Vec<NodeId>> = HashMap::new();
    for (node, row) in attrs.iter().enumerate() {
        for &dim in row.indices() {
            map.entry(dim).or_default().push(node as NodeId);
        }
    }
    map
}

/// Scores of every nonzero-similarity peer of node `i`, unsorted.
///
/// Accumulates per candidate while walking `i`'s dimensions in ascending
/// order, so float sums for cosine are order-fixed.
fn candidate_scores(
    attrs: &[SparseCountVector],
    index: &HashMap<u32, Vec<NodeId>>,
    sim: Similarity,
    i: NodeId,
) -> Vec<(NodeId, f64)> {
    let row = &attrs[i as usize];
    match sim {
        Similarity::Intersection => {
            let mut acc: HashMap<NodeId, u64> = HashMap::new();
            for (dim, count) in row.iter() {
                for &j in &index[&dim] {
                    if j != i {
                        *acc.entry(j).or_insert(0) += count.min(attrs[j as usize].get(dim));
                    }
                }
            }
            acc.into_iter().map(|(j, s)| (j, s as f64)).collect()
        }
        Similarity::Cosine => {
            let mut acc: HashMap<NodeId, f64> = HashMap::new();
            for (dim, count) in row.iter() {
                for &j in &index[&dim] {
                    if j != i {
                        *acc.entry(j).or_insert(0.0) +=
                            count as f64 * attrs[j as usize].get(dim) as f64;
                    }
                }
            }
            let norm_i = row.norm();
            acc.into_iter()
                .map(|(j, dot)| (j, dot / (norm_i * attrs[j as usize].norm())))
                .collect()
        }
    }
}

/// For each node, its `k` highest-scoring nonzero-similarity peers. Ties
/// break toward the lower peer id; nodes with fewer than `k` nonzero peers
/// contribute fewer pairs. Output is grouped by node in ascending order.
pub fn topk_per_node(
    attrs: &[SparseCountVector],
    sim: Similarity,
    k: usize,
) -> Result<Vec<ScoredPair>> {
    if k == 0 {
        return Err(Error::invalid("top-k per node requires k >= 1"));
    }
    let index = postings(attrs);
    let per_node: Vec<Vec<ScoredPair>> = (0..attrs.len() as NodeId)
        .into_par_iter()
        .map(|i| {
            let mut scored: Vec<ScoredPair> = candidate_scores(attrs, &index, sim, i)
                .into_iter()
                .filter(|&(_, s)| s > 0.0)
                .map(|(j, score)| ScoredPair { i, j, score })
                .collect();
            scored.sort_unstable_by(pair_order);
            scored.truncate(k);
            scored
        })
        .collect();
    Ok(per_node.into_iter().flatten().collect())
}

/// The `λ` highest-scoring unordered pairs with nonzero similarity, each
/// reported once with `i < j`, in the strict total order.
pub fn topk_global(
    attrs: &[SparseCountVector],
    sim: Similarity,
    lambda: usize,
) -> Result<Vec<ScoredPair>> {
    if lambda == 0 {
        return Err(Error::invalid("global top-k requires a positive pair budget"));
    }
    let index = postings(attrs);
    // Truncating each node's list to λ under the strict total order cannot
    // drop a global top-λ pair, so per-partition truncation is lossless.
    let merged = (0..attrs.len() as NodeId)
        .into_par_iter()
        .fold(Vec::new, |mut acc: Vec<ScoredPair>, i| {
            for (j, score) in candidate_scores(attrs, &index, sim, i) {
                if j > i && score > 0.0 {
                    acc.push(ScoredPair { i, j, score });
                }
            }
            if acc.len() > 4 * lambda {
                acc.sort_unstable_by(pair_order);
                acc.truncate(lambda);
            }
            acc
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            if a.len() > 4 * lambda {
                a.sort_unstable_by(pair_order);
                a.truncate(lambda);
            }
            a
        });
    let mut merged = merged;
    merged.sort_unstable_by(pair_order);
    merged.truncate(lambda);
    Ok(merged)
}
