//! Network models: infer an edge-set from attribute similarity at a target
//! density.
//!
//! Two constructions are provided. The nearest-neighbor model gives every
//! node out-edges to its top `k = ⌊λ/|V|⌋` peers; the threshold model keeps
//! the `λ` highest-scoring unordered pairs globally. Zero-similarity pairs
//! are never emitted: an inferred edge must witness shared behavior, so
//! out-degrees fall short of `k` for nodes with too few nonzero peers.

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, NodeId, Provenance};
use crate::similarity::{topk_global, topk_per_node, Similarity, SparseCountVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Knn,
    Threshold,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::Threshold => "threshold",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(ModelKind::Knn),
            "threshold" => Ok(ModelKind::Threshold),
            other => Err(Error::invalid(format!("unknown network model `{other}`"))),
        }
    }
}

/// A fully specified inference target. `lambda` counts directed arcs for the
/// nearest-neighbor model and unordered pairs for the threshold model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub model: ModelKind,
    pub similarity: Similarity,
    pub lambda: usize,
    /// Density relative to an observed edge-set, when derived via
    /// [`match_density`]; carried through to reports.
    pub density_factor: Option<f64>,
}

/// Translate a density factor against an observed edge-set into a budget λ.
///
/// The observed set counts friendships (unordered pairs) while the
/// nearest-neighbor model counts directed arcs, so the knn budget at factor 1
/// is two arcs per observed pair; both conventions then match in total arc
/// count. The threshold budget stays in pairs.
pub fn match_density(e_obs: &EdgeSet, model: ModelKind, factor: f64) -> Result<usize> {
    if !(factor > 0.0) {
        return Err(Error::invalid("density factor must be positive"));
    }
    let lambda = match model {
        ModelKind::Knn => (factor * e_obs.num_arcs() as f64).round() as usize,
        ModelKind::Threshold => (factor * e_obs.unordered_pair_count() as f64).round() as usize,
    };
    if lambda < 1 {
        return Err(Error::DensityTooLow(format!(
            "factor {factor} yields an empty budget"
        )));
    }
    if model == ModelKind::Knn {
        let k = lambda / e_obs.num_nodes();
        if k < 1 {
            return Err(Error::DensityTooLow(format!(
                "budget {lambda} over {} nodes gives k = 0",
                e_obs.num_nodes()
            )));
        }
    }
    Ok(lambda)
}

/// Directed nearest-neighbor edge-set: each node points at its top
/// `⌊λ/|V|⌋` nonzero-similarity peers.
pub fn build_knn(attrs: &[SparseCountVector], spec: &ModelSpec) -> Result<EdgeSet> {
    let n = attrs.len();
    if n == 0 {
        return Err(Error::invalid("no nodes"));
    }
    let k = spec.lambda / n;
    if k < 1 {
        return Err(Error::DensityTooLow(format!(
            "budget {} over {n} nodes gives k = 0",
            spec.lambda
        )));
    }
    let arcs: Vec<(NodeId, NodeId)> = topk_per_node(attrs, spec.similarity, k)?
        .into_iter()
        .map(|p| (p.i, p.j))
        .collect();
    EdgeSet::from_arcs(n, arcs, Provenance::Knn)
}

/// Symmetric threshold edge-set: the top `λ` unordered pairs globally.
pub fn build_threshold(attrs: &[SparseCountVector], spec: &ModelSpec) -> Result<EdgeSet> {
    let n = attrs.len();
    if n == 0 {
        return Err(Error::invalid("no nodes"));
    }
    let pairs: Vec<(NodeId, NodeId)> = topk_global(attrs, spec.similarity, spec.lambda)?
        .into_iter()
        .map(|p| (p.i, p.j))
        .collect();
    EdgeSet::from_undirected_pairs(n, &pairs, Provenance::Threshold)
}

/// Dispatch on the spec's model kind.
pub fn build(attrs: &[SparseCountVector], spec: &ModelSpec) -> Result<EdgeSet> {
    match spec.model {
        ModelKind::Knn => build_knn(attrs, spec),
        ModelKind::Threshold => build_threshold(attrs, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::similarity::s_int;

    fn spec(model: ModelKind, lambda: usize) -> ModelSpec {
        ModelSpec {
            model,
            similarity: Similarity::Intersection,
            lambda,
            density_factor: None,
        }
    }

    fn random_attrs(seed: u64, n: usize, dims: u64, max_nnz: u64) -> Vec<SparseCountVector> {
        let mut stream = Stream::new(seed, "model-tests");
        (0..n)
            .map(|_| {
                let nnz = stream.next_below(max_nnz + 1);
                SparseCountVector::from_pairs(
                    (0..nnz).map(|_| (stream.next_below(dims) as u32, 1 + stream.next_below(9))),
                )
            })
            .collect()
    }

    #[test]
    fn knn_on_identical_vectors_is_k_regular() {
        let attrs = vec![SparseCountVector::from_pairs([(0, 1)]); 4];
        let e = build_knn(&attrs, &spec(ModelKind::Knn, 8)).unwrap();
        assert_eq!(e.provenance(), Provenance::Knn);
        for i in 0..4 {
            assert_eq!(e.out_degree(i), 2);
        }
    }

    #[test]
    fn knn_rejects_budget_below_one_per_node() {
        let attrs = vec![SparseCountVector::from_pairs([(0, 1)]); 4];
        assert!(matches!(
            build_knn(&attrs, &spec(ModelKind::Knn, 3)),
            Err(Error::DensityTooLow(_))
        ));
    }

    #[test]
    fn empty_attributes_get_no_edges() {
        let mut attrs = vec![SparseCountVector::from_pairs([(0, 1)]); 3];
        attrs.push(SparseCountVector::empty());
        let e = build_knn(&attrs, &spec(ModelKind::Knn, 8)).unwrap();
        assert_eq!(e.out_degree(3), 0);
        assert!((0..3u32).all(|i| !e.neighbors(i).contains(&3)));
    }

    #[test]
    fn knn_out_degree_is_min_of_k_and_nonzero_peers() {
        let attrs = random_attrs(3, 50, 15, 5);
        for lambda in [50, 150, 500] {
            let k = lambda / attrs.len();
            let e = build_knn(&attrs, &spec(ModelKind::Knn, lambda)).unwrap();
            for i in 0..attrs.len() {
                let nonzero = (0..attrs.len())
                    .filter(|&j| j != i && s_int(&attrs[i], &attrs[j]) > 0)
                    .count();
                assert_eq!(e.out_degree(i as u32), k.min(nonzero), "node {i} at k={k}");
            }
        }
    }

    #[test]
    fn threshold_with_ample_budget_is_complete() {
        let attrs = vec![SparseCountVector::from_pairs([(0, 1)]); 5];
        let e = build_threshold(&attrs, &spec(ModelKind::Threshold, 100)).unwrap();
        assert_eq!(e.unordered_pair_count(), 10);
        assert!(e.is_symmetric());
        assert_eq!(e.provenance(), Provenance::Threshold);
    }

    #[test]
    fn threshold_matches_exhaustive_pair_oracle() {
        let attrs = random_attrs(9, 50, 15, 5);
        let lambda = 80;
        let e = build_threshold(&attrs, &spec(ModelKind::Threshold, lambda)).unwrap();

        let mut scored: Vec<(u64, u32, u32)> = Vec::new();
        for i in 0..attrs.len() as u32 {
            for j in i + 1..attrs.len() as u32 {
                let s = s_int(&attrs[i as usize], &attrs[j as usize]);
                if s > 0 {
                    scored.push((s, i, j));
                }
            }
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        scored.truncate(lambda);
        let expected: Vec<(u32, u32)> = {
            let mut pairs: Vec<(u32, u32)> = scored.iter().map(|&(_, i, j)| (i, j)).collect();
            pairs.sort_unstable();
            pairs
        };
        let mut got: Vec<(u32, u32)> = e
            .arcs()
            .filter(|&(u, v)| u < v)
            .collect();
        got.sort_unstable();
        assert_eq!(got, expected);
        // Every kept pair scores at least as high as every dropped pair.
        let cutoff = scored.last().unwrap().0;
        for i in 0..attrs.len() as u32 {
            for j in i + 1..attrs.len() as u32 {
                if !expected.contains(&(i, j)) {
                    assert!(s_int(&attrs[i as usize], &attrs[j as usize]) <= cutoff);
                }
            }
        }
    }

    #[test]
    fn edge_sets_grow_monotonically_in_lambda() {
        let attrs = random_attrs(21, 40, 12, 5);
        let small = build_threshold(&attrs, &spec(ModelKind::Threshold, 30)).unwrap();
        let large = build_threshold(&attrs, &spec(ModelKind::Threshold, 90)).unwrap();
        for (u, v) in small.arcs() {
            assert!(large.neighbors(u).contains(&v));
        }
        let k1 = build_knn(&attrs, &spec(ModelKind::Knn, 40)).unwrap();
        let k3 = build_knn(&attrs, &spec(ModelKind::Knn, 120)).unwrap();
        for (u, v) in k1.arcs() {
            assert!(k3.neighbors(u).contains(&v));
        }
    }

    #[test]
    fn match_density_translates_factors() {
        let e = EdgeSet::from_undirected_pairs(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2), (1, 3), (2, 4), (3, 5)],
            Provenance::Observed,
        )
        .unwrap();
        assert_eq!(e.unordered_pair_count(), 10);
        assert_eq!(match_density(&e, ModelKind::Threshold, 1.0).unwrap(), 10);
        assert_eq!(match_density(&e, ModelKind::Threshold, 2.0).unwrap(), 20);
        // Directed-arc budget: two arcs per observed pair at factor 1.
        assert_eq!(match_density(&e, ModelKind::Knn, 1.0).unwrap(), 20);
        assert!(match_density(&e, ModelKind::Knn, 0.05).is_err());
        assert!(match_density(&e, ModelKind::Threshold, 0.0).is_err());
    }

    #[test]
    fn builds_are_independent_of_worker_count() {
        let attrs = random_attrs(33, 80, 18, 6);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        for s in [spec(ModelKind::Knn, 240), spec(ModelKind::Threshold, 120)] {
            let a = single.install(|| build(&attrs, &s).unwrap());
            let b = quad.install(|| build(&attrs, &s).unwrap());
            assert_eq!(a, b);
        }
    }
}
