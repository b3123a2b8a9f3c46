//! Core graph data model: edge-sets, labelsets, and the attributed graph.
//!
//! Everything here is immutable after construction and safe to share across
//! worker threads; all operations are pure reads.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::similarity::SparseCountVector;

/// Dense node identifier in `0..num_nodes`.
pub type NodeId = u32;

/// Where an edge-set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Declared social edges, stored as two directed arcs per friendship.
    Observed,
    /// Nearest-neighbor model output (directed).
    Knn,
    /// Global-threshold model output (symmetric arcs).
    Threshold,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Observed => "observed",
            Provenance::Knn => "knn",
            Provenance::Threshold => "threshold",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "observed" => Ok(Provenance::Observed),
            "knn" => Ok(Provenance::Knn),
            "threshold" => Ok(Provenance::Threshold),
            other => Err(Error::invalid(format!("unknown provenance `{other}`"))),
        }
    }
}

/// Directed adjacency in compressed sparse row form.
///
/// Neighbor lists are sorted ascending and duplicate-free; observed
/// friendships are stored as two arcs so the neighborhood function is uniform
/// across observed and inferred edge-sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    num_nodes: usize,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    provenance: Provenance,
}

impl EdgeSet {
    /// Build from a list of directed arcs. Rejects self-loops, out-of-range
    /// endpoints, and duplicate arcs.
    pub fn from_arcs(
        num_nodes: usize,
        mut arcs: Vec<(NodeId, NodeId)>,
        provenance: Provenance,
    ) -> Result<Self> {
        for &(u, v) in &arcs {
            if u as usize >= num_nodes {
                return Err(Error::NodeOutOfRange { node: u, num_nodes });
            }
            if v as usize >= num_nodes {
                return Err(Error::NodeOutOfRange { node: v, num_nodes });
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
        }
        arcs.sort_unstable();
        if let Some(w) = arcs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "duplicate arc {} -> {}",
                w[0].0, w[0].1
            )));
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut targets = Vec::with_capacity(arcs.len());
        let mut pos = 0usize;
        offsets.push(0);
        for node in 0..num_nodes as u32 {
            while pos < arcs.len() && arcs[pos].0 == node {
                targets.push(arcs[pos].1);
                pos += 1;
            }
            offsets.push(targets.len());
        }
        Ok(EdgeSet {
            num_nodes,
            offsets,
            targets,
            provenance,
        })
    }

    /// Build from undirected pairs, storing each friendship as two arcs.
    pub fn from_undirected_pairs(
        num_nodes: usize,
        pairs: &[(NodeId, NodeId)],
        provenance: Provenance,
    ) -> Result<Self> {
        let mut normalized: Vec<(NodeId, NodeId)> = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!(
                "duplicate pair {} -- {}",
                w[0].0, w[0].1
            )));
        }
        let mut arcs = Vec::with_capacity(normalized.len() * 2);
        for (u, v) in normalized {
            arcs.push((u, v));
            arcs.push((v, u));
        }
        EdgeSet::from_arcs(num_nodes, arcs, provenance)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of stored directed arcs.
    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Out-neighbors of `node`, sorted ascending. Panics if out of range.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        let i = node as usize;
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Checked neighborhood lookup; empty slice for nodes without out-edges.
    pub fn neighborhood(&self, node: NodeId) -> Result<&[NodeId]> {
        if node as usize >= self.num_nodes {
            return Err(Error::NodeOutOfRange {
                node,
                num_nodes: self.num_nodes,
            });
        }
        Ok(self.neighbors(node))
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.neighbors(node).len()
    }

    /// Iterate all arcs in `(source, target)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.num_nodes as u32)
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// Number of unordered node pairs connected by at least one arc.
    pub fn unordered_pair_count(&self) -> usize {
        let mut pairs: Vec<(NodeId, NodeId)> =
            self.arcs().map(|(u, v)| (u.min(v), u.max(v))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs.len()
    }

    /// True if for every arc the reverse arc is present.
    pub fn is_symmetric(&self) -> bool {
        self.arcs()
            .all(|(u, v)| self.neighbors(v).binary_search(&u).is_ok())
    }

    /// First `k` nodes reached by breadth-first search from `start`,
    /// excluding `start` itself, in non-decreasing geodesic distance.
    /// Ties within a depth level are broken by ascending node id. Returns
    /// fewer than `k` nodes when the reachable component is smaller.
    pub fn bfs_order(&self, start: NodeId, k: usize) -> Result<Vec<NodeId>> {
        if start as usize >= self.num_nodes {
            return Err(Error::NodeOutOfRange {
                node: start,
                num_nodes: self.num_nodes,
            });
        }
        let mut seen = vec![false; self.num_nodes];
        seen[start as usize] = true;
        let mut order = Vec::with_capacity(k.min(self.num_nodes));
        let mut frontier = vec![start];
        let mut next_level: Vec<NodeId> = Vec::new();
        while !frontier.is_empty() && order.len() < k {
            next_level.clear();
            for &u in &frontier {
                for &v in self.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        next_level.push(v);
                    }
                }
            }
            next_level.sort_unstable();
            for &v in next_level.iter() {
                if order.len() == k {
                    break;
                }
                order.push(v);
            }
            std::mem::swap(&mut frontier, &mut next_level);
        }
        Ok(order)
    }

    /// Median out-degree and a maximum-likelihood power-law exponent fit over
    /// degrees >= 1 (continuous Hill estimator with `xmin = 1`). The exponent
    /// is `None` when every non-isolated node has degree 1.
    pub fn degree_stats(&self) -> Result<DegreeStats> {
        if self.targets.is_empty() {
            return Err(Error::EmptyEdgeSet);
        }
        let mut degrees: Vec<usize> = (0..self.num_nodes as u32)
            .map(|u| self.out_degree(u))
            .collect();
        degrees.sort_unstable();
        let median_degree = degrees[(degrees.len() - 1) / 2];
        let mut n = 0usize;
        let mut log_sum = 0.0f64;
        for &d in degrees.iter().filter(|&&d| d >= 1) {
            n += 1;
            log_sum += (d as f64).ln();
        }
        let alpha = if log_sum > 0.0 {
            Some(1.0 + n as f64 / log_sum)
        } else {
            None
        };
        Ok(DegreeStats {
            median_degree,
            alpha,
        })
    }
}

/// Summary of an out-degree distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub median_degree: usize,
    pub alpha: Option<f64>,
}

/// A named binary label over all nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    name: String,
    labels: Vec<bool>,
    num_positive: usize,
}

impl LabelSet {
    /// Prevalence is recomputed from the labels, never trusted from input.
    pub fn new(name: impl Into<String>, labels: Vec<bool>) -> Self {
        let num_positive = labels.iter().filter(|&&l| l).count();
        LabelSet {
            name: name.into(),
            labels,
            num_positive,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, node: NodeId) -> bool {
        self.labels[node as usize]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn num_positive(&self) -> usize {
        self.num_positive
    }

    /// Fraction of nodes carrying the label.
    pub fn prevalence(&self) -> f64 {
        if self.labels.is_empty() {
            0.0
        } else {
            self.num_positive as f64 / self.labels.len() as f64
        }
    }

    /// Node ids with the label, ascending.
    pub fn positives(&self) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(i, _)| i as NodeId)
            .collect()
    }
}

/// An attributed, labeled graph: nodes, directed edges, per-node sparse
/// attribute counts over a shared dimension universe, and a collection of
/// binary labelsets.
#[derive(Debug, Clone)]
pub struct AttributedGraph {
    num_nodes: usize,
    num_dims: usize,
    edges: EdgeSet,
    attributes: Vec<SparseCountVector>,
    labelsets: BTreeMap<String, LabelSet>,
}

impl AttributedGraph {
    pub fn new(
        num_dims: usize,
        edges: EdgeSet,
        attributes: Vec<SparseCountVector>,
        labelsets: Vec<LabelSet>,
    ) -> Result<Self> {
        let num_nodes = edges.num_nodes();
        if attributes.len() != num_nodes {
            return Err(Error::invalid(format!(
                "attribute rows ({}) != num_nodes ({num_nodes})",
                attributes.len()
            )));
        }
        for (node, row) in attributes.iter().enumerate() {
            if let Some(&dim) = row.indices().iter().find(|&&d| d as usize >= num_dims) {
                return Err(Error::invalid(format!(
                    "node {node} references dimension {dim} >= {num_dims}"
                )));
            }
        }
        let mut map = BTreeMap::new();
        for ls in labelsets {
            if ls.len() != num_nodes {
                return Err(Error::invalid(format!(
                    "labelset `{}` has {} entries, expected {num_nodes}",
                    ls.name(),
                    ls.len()
                )));
            }
            if map.insert(ls.name().to_string(), ls).is_some() {
                return Err(Error::invalid("duplicate labelset name"));
            }
        }
        Ok(AttributedGraph {
            num_nodes,
            num_dims,
            edges,
            attributes,
            labelsets: map,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_dims(&self) -> usize {
        self.num_dims
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn attributes(&self) -> &[SparseCountVector] {
        &self.attributes
    }

    pub fn attribute(&self, node: NodeId) -> &SparseCountVector {
        &self.attributes[node as usize]
    }

    pub fn labelsets(&self) -> &BTreeMap<String, LabelSet> {
        &self.labelsets
    }

    pub fn labelset(&self, name: &str) -> Result<&LabelSet> {
        self.labelsets
            .get(name)
            .ok_or_else(|| Error::invalid(format!("unknown labelset `{name}`")))
    }
}
