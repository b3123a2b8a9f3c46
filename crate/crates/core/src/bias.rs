//! Network-label bias: how much more prevalent a label is among neighbors of
//! labeled nodes than in the population.
//!
//! For a labelset L and edge-set E, take every positive node with a non-empty
//! out-neighborhood, compute the fraction of its neighbors that are positive,
//! and report the median fraction minus the global prevalence. Isolated
//! positives are excluded rather than scored as zero: isolation is not
//! anti-homophily. The exclusion is visible through `n_evaluated`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, LabelSet};

/// Lower-middle median: for even counts the lower of the two middle values,
/// so integer-ratio inputs survive exactly.
pub fn lower_median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    Some(values[(values.len() - 1) / 2])
}

/// Bias of one labelset on one edge-set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BiasReport {
    pub labelset: String,
    pub prevalence: f64,
    /// Median neighbor-positive fraction minus prevalence; in
    /// [-prevalence, 1 - prevalence].
    pub bias: f64,
    /// Positive nodes with a non-empty neighborhood.
    pub n_evaluated: usize,
}

pub fn network_label_bias(e: &EdgeSet, l: &LabelSet) -> Result<BiasReport> {
    if l.len() != e.num_nodes() {
        return Err(Error::invalid(format!(
            "labelset `{}` covers {} nodes, edge-set has {}",
            l.name(),
            l.len(),
            e.num_nodes()
        )));
    }
    if l.num_positive() == 0 {
        return Err(Error::UndefinedBias {
            labelset: l.name().to_string(),
            reason: "no positive nodes".to_string(),
        });
    }
    let mut fractions: Vec<f64> = l
        .positives()
        .into_iter()
        .filter_map(|i| {
            let nbrs = e.neighbors(i);
            if nbrs.is_empty() {
                None
            } else {
                let pos = nbrs.iter().filter(|&&j| l.label(j)).count();
                Some(pos as f64 / nbrs.len() as f64)
            }
        })
        .collect();
    let n_evaluated = fractions.len();
    let median = lower_median(&mut fractions).ok_or_else(|| Error::UndefinedBias {
        labelset: l.name().to_string(),
        reason: "every positive node is isolated".to_string(),
    })?;
    Ok(BiasReport {
        labelset: l.name().to_string(),
        prevalence: l.prevalence(),
        bias: median - l.prevalence(),
        n_evaluated,
    })
}

/// One scatter row; bias is null (with the reason) where undefined.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BiasRow {
    pub labelset: String,
    pub prevalence: f64,
    pub bias: Option<f64>,
    pub n_evaluated: usize,
    pub note: Option<String>,
}

/// One row per labelset, sorted by name.
pub fn bias_scatter_table<'a>(
    e: &EdgeSet,
    labelsets: impl IntoIterator<Item = &'a LabelSet>,
) -> Result<Vec<BiasRow>> {
    let mut sets: Vec<&LabelSet> = labelsets.into_iter().collect();
    if sets.is_empty() {
        return Err(Error::invalid("no labelsets to tabulate"));
    }
    sets.sort_by(|a, b| a.name().cmp(b.name()));
    Ok(sets
        .par_iter()
        .map(|l| match network_label_bias(e, l) {
            Ok(r) => BiasRow {
                labelset: r.labelset,
                prevalence: r.prevalence,
                bias: Some(r.bias),
                n_evaluated: r.n_evaluated,
                note: None,
            },
            Err(Error::UndefinedBias { reason, .. }) => BiasRow {
                labelset: l.name().to_string(),
                prevalence: l.prevalence(),
                bias: None,
                n_evaluated: 0,
                note: Some(reason),
            },
            Err(_) => BiasRow {
                labelset: l.name().to_string(),
                prevalence: l.prevalence(),
                bias: None,
                n_evaluated: 0,
                note: Some("bias unavailable".to_string()),
            },
        })
        .collect())
}

/// Bias shift between two edge-sets over their shared labelsets.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DeltaBiasSummary {
    pub base: String,
    pub other: String,
    /// (labelset, other.bias - base.bias), sorted by labelset name.
    pub deltas: Vec<(String, f64)>,
    pub mu: f64,
    /// Population standard deviation over the shared labelsets.
    pub sigma: f64,
}

pub fn delta_bias(
    base_name: &str,
    base: &[BiasReport],
    other_name: &str,
    other: &[BiasReport],
) -> Result<DeltaBiasSummary> {
    let base_map: BTreeMap<&str, f64> =
        base.iter().map(|r| (r.labelset.as_str(), r.bias)).collect();
    let deltas: Vec<(String, f64)> = other
        .iter()
        .filter_map(|r| {
            base_map
                .get(r.labelset.as_str())
                .map(|&b| (r.labelset.clone(), r.bias - b))
        })
        .collect();
    if deltas.is_empty() {
        return Err(Error::invalid(
            "bias report collections share no labelsets",
        ));
    }
    let mut deltas = deltas;
    deltas.sort_by(|a, b| a.0.cmp(&b.0));
    let n = deltas.len() as f64;
    let mu = deltas.iter().map(|(_, d)| d).sum::<f64>() / n;
    let var = deltas.iter().map(|(_, d)| (d - mu) * (d - mu)).sum::<f64>() / n;
    Ok(DeltaBiasSummary {
        base: base_name.to_string(),
        other: other_name.to_string(),
        deltas,
        mu,
        sigma: var.sqrt(),
    })
}
