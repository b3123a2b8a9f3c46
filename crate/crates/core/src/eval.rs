//! The oracle evaluation protocol: every positive-labeled node is a test
//! instance, each method trains on that node's neighborhood in the edge-set
//! under evaluation, and precision is compared against global baselines as
//! lift.
//!
//! Precision counts only covered (non-abstaining) nodes; coverage is tracked
//! separately. Lift divides correct-count differences by the full positive
//! count, so a model that covers few nodes pays for it implicitly. Cells
//! with zero coverage are null: excluded from every mean and emitted as
//! explicit nulls, never silently zeroed.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::classify::{
    classify_local, ga_fit, ga_predict, ga_surrogate_precision, gl_predict, BaseLearner, GaSplit,
    Method, MethodParams, MethodSpec,
};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeSet, LabelSet, NodeId};
use crate::models::{build, match_density, ModelKind, ModelSpec};
use crate::similarity::Similarity;

/// Outcome of one (labelset, model, method) oracle run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub labelset: String,
    pub model: String,
    pub method: Method,
    pub n_tested: usize,
    pub n_covered: usize,
    pub n_correct: usize,
}

impl OracleResult {
    /// Fraction of covered nodes predicted positive; undefined at zero
    /// coverage.
    pub fn precision(&self) -> Option<f64> {
        if self.n_covered == 0 {
            None
        } else {
            Some(self.n_correct as f64 / self.n_covered as f64)
        }
    }

    /// Fraction of tested positives that obtained a trainable neighborhood.
    pub fn recall_coverage(&self) -> f64 {
        self.n_correct_guard();
        self.n_covered as f64 / self.n_tested as f64
    }

    fn n_correct_guard(&self) {
        debug_assert!(self.n_correct <= self.n_covered && self.n_covered <= self.n_tested);
    }
}

/// Correct-count difference over the tested-positive count.
pub fn lift(result: &OracleResult, baseline: &OracleResult) -> Result<f64> {
    if result.labelset != baseline.labelset || result.n_tested != baseline.n_tested {
        return Err(Error::invalid("lift requires results on the same labelset"));
    }
    Ok((result.n_correct as f64 - baseline.n_correct as f64) / result.n_tested as f64)
}

/// Global baselines for one labelset: the three global-attribute results,
/// their surrogate mean, and the label-distribution sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSet {
    pub labelset: String,
    pub ga: [OracleResult; 3],
    pub gl: OracleResult,
}

impl BaselineSet {
    pub fn ga_for(&self, base: BaseLearner) -> &OracleResult {
        &self.ga[BaseLearner::ALL.iter().position(|b| *b == base).unwrap()]
    }

    /// Mean correct count of the global-attribute bases, the Eq.-3 numerator
    /// term for methods without a matching base learner.
    pub fn ga_surrogate_correct(&self) -> f64 {
        self.ga.iter().map(|r| r.n_correct as f64).sum::<f64>() / self.ga.len() as f64
    }

    pub fn ga_surrogate_precision(&self) -> f64 {
        let precisions: Vec<f64> = self.ga.iter().filter_map(|r| r.precision()).collect();
        ga_surrogate_precision(&precisions).expect("global baselines cover every node")
    }

    /// Baseline correct count for a method: matching base for the learners,
    /// surrogate mean for CS and NL.
    fn correct_for(&self, method: Method) -> f64 {
        match method.ga_base() {
            Some(base) => self.ga_for(base).n_correct as f64,
            None => self.ga_surrogate_correct(),
        }
    }
}

/// One heatmap cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftCell {
    pub model: String,
    pub method: Method,
    pub n_tested: usize,
    pub n_covered: usize,
    pub n_correct: usize,
    pub precision: Option<f64>,
    pub coverage: f64,
    pub lift_ga: Option<f64>,
    pub lift_gl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftRow {
    pub labelset: String,
    pub prevalence: f64,
    pub cells: Vec<LiftCell>,
    /// Mean lift vs the global-attribute baseline over non-null cells.
    pub mean_lift_ga: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub model: String,
    pub method: Method,
    pub mean_lift_ga: Option<f64>,
    pub mean_lift_gl: Option<f64>,
    pub mean_precision: Option<f64>,
    pub mean_coverage: f64,
    /// Cells excluded from the means because the model covered no positives.
    pub null_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftTable {
    /// Rows sorted by mean lift, best first; all-null rows at the end.
    pub rows: Vec<LiftRow>,
    pub columns: Vec<ColumnSummary>,
    pub baselines: Vec<BaselineSet>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Density,
    BfsSize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    /// Realized pair/arc budget (density sweep only).
    pub lambda: Option<usize>,
    pub mean_lift_ga: Option<f64>,
    pub mean_coverage: Option<f64>,
    /// Labelsets excluded at this point for zero coverage.
    pub null_labelsets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub kind: SweepKind,
    pub model: String,
    pub method: Method,
    pub points: Vec<SweepPoint>,
}

/// Least-squares fit of y on x with the Pearson correlation. `r` is null
/// when y has zero variance; zero variance in x is an error because the
/// slope is undefined.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r: Option<f64>,
    pub n: usize,
}

pub fn least_squares(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "regression needs at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    let syy = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum::<f64>();
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    if sxx == 0.0 {
        return Err(Error::invalid("regression x values are constant"));
    }
    let slope = sxy / sxx;
    let r = if syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    };
    Ok(Fit {
        slope,
        intercept: my - slope * mx,
        r,
        n: points.len(),
    })
}

/// Joint bias/lift view per labelset, the scatter behind the regression.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasLiftRow {
    pub labelset: String,
    pub prevalence: f64,
    pub bias: Option<f64>,
    pub lift_ga: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasLiftTable {
    pub rows: Vec<BiasLiftRow>,
    /// Fit with lift as x and bias as y, over rows where both are defined.
    pub fit: Fit,
}

/// Shared state for one evaluation run: the graph, the run seed, the
/// hyperparameters, the node split for the global-attribute baseline, and
/// lazily computed baseline results per labelset.
pub struct Harness<'a> {
    g: &'a AttributedGraph,
    seed: u64,
    params: MethodParams,
    split: GaSplit,
    ga_cache: BTreeMap<String, [OnceLock<OracleResult>; 3]>,
    gl_cache: BTreeMap<String, OnceLock<OracleResult>>,
}

impl<'a> Harness<'a> {
    pub fn new(g: &'a AttributedGraph, seed: u64, params: MethodParams) -> Result<Self> {
        let split = GaSplit::new(g.num_nodes(), seed)?;
        let mut ga_cache = BTreeMap::new();
        let mut gl_cache = BTreeMap::new();
        for name in g.labelsets().keys() {
            ga_cache.insert(name.clone(), std::array::from_fn(|_| OnceLock::new()));
            gl_cache.insert(name.clone(), OnceLock::new());
        }
        Ok(Harness {
            g,
            seed,
            params,
            split,
            ga_cache,
            gl_cache,
        })
    }

    pub fn graph(&self) -> &AttributedGraph {
        self.g
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Labelsets entering evaluation: those with at least one positive, in
    /// name order.
    pub fn testable_labelsets(&self) -> Vec<&'a LabelSet> {
        self.g
            .labelsets()
            .values()
            .filter(|l| l.num_positive() > 0)
            .collect()
    }

    fn tally<F>(&self, l: &LabelSet, model: &str, method: Method, neighbors_of: F) -> Result<OracleResult>
    where
        F: Fn(NodeId) -> Result<Vec<NodeId>> + Sync,
    {
        if l.num_positive() == 0 {
            return Err(Error::invalid(format!(
                "labelset `{}` has no positive nodes to test",
                l.name()
            )));
        }
        let spec = MethodSpec {
            method,
            seed: self.seed,
            params: self.params.clone(),
        };
        let positives = l.positives();
        let outcomes: Result<Vec<(bool, bool)>> = positives
            .par_iter()
            .map(|&i| {
                let neighbors = neighbors_of(i)?;
                let p = classify_local(&spec, &neighbors, self.g.attributes(), l, i)?;
                Ok((p.label.is_some(), p.label == Some(true)))
            })
            .collect();
        let outcomes = outcomes?;
        Ok(OracleResult {
            labelset: l.name().to_string(),
            model: model.to_string(),
            method,
            n_tested: positives.len(),
            n_covered: outcomes.iter().filter(|o| o.0).count(),
            n_correct: outcomes.iter().filter(|o| o.1).count(),
        })
    }

    /// Oracle run with training neighborhoods read from an edge-set.
    pub fn run_oracle(
        &self,
        e: &EdgeSet,
        model: &str,
        method: Method,
        l: &LabelSet,
    ) -> Result<OracleResult> {
        if e.num_nodes() != self.g.num_nodes() {
            return Err(Error::invalid("edge-set and graph disagree on node count"));
        }
        self.tally(l, model, method, |i| Ok(e.neighborhood(i)?.to_vec()))
    }

    /// Oracle run with training neighborhoods taken as the first `size`
    /// nodes in breadth-first order.
    pub fn run_oracle_bfs(
        &self,
        e: &EdgeSet,
        model: &str,
        method: Method,
        l: &LabelSet,
        size: usize,
    ) -> Result<OracleResult> {
        if e.num_nodes() != self.g.num_nodes() {
            return Err(Error::invalid("edge-set and graph disagree on node count"));
        }
        self.tally(l, model, method, |i| e.bfs_order(i, size))
    }

    fn ga_result(&self, l: &LabelSet, base: BaseLearner) -> Result<&OracleResult> {
        let cell = &self.ga_cache[l.name()][BaseLearner::ALL.iter().position(|b| *b == base).unwrap()];
        if let Some(r) = cell.get() {
            return Ok(r);
        }
        let pair = ga_fit(self.g.attributes(), l, &self.split, base, &self.params, self.seed)?;
        let positives = l.positives();
        let n_correct = positives
            .par_iter()
            .filter(|&&i| {
                ga_predict(&pair, &self.split, i, self.g.attribute(i)).label == Some(true)
            })
            .count();
        let result = OracleResult {
            labelset: l.name().to_string(),
            model: "global".to_string(),
            method: Method::Ga,
            n_tested: positives.len(),
            n_covered: positives.len(),
            n_correct,
        };
        Ok(cell.get_or_init(|| result))
    }

    fn gl_result(&self, l: &LabelSet) -> &OracleResult {
        self.gl_cache[l.name()].get_or_init(|| {
            let positives = l.positives();
            let n_correct = positives
                .par_iter()
                .filter(|&&i| gl_predict(l, i, self.seed).label == Some(true))
                .count();
            OracleResult {
                labelset: l.name().to_string(),
                model: "global".to_string(),
                method: Method::Gl,
                n_tested: positives.len(),
                n_covered: positives.len(),
                n_correct,
            }
        })
    }

    /// All global baselines for one labelset.
    pub fn baselines(&self, l: &LabelSet) -> Result<BaselineSet> {
        let ga = [
            self.ga_result(l, BaseLearner::Rf)?.clone(),
            self.ga_result(l, BaseLearner::Lr)?.clone(),
            self.ga_result(l, BaseLearner::Nb)?.clone(),
        ];
        Ok(BaselineSet {
            labelset: l.name().to_string(),
            ga,
            gl: self.gl_result(l).clone(),
        })
    }

    fn cell(&self, result: OracleResult, baselines: &BaselineSet) -> LiftCell {
        let null = result.n_covered == 0;
        let lift_ga = (!null).then(|| {
            (result.n_correct as f64 - baselines.correct_for(result.method))
                / result.n_tested as f64
        });
        let lift_gl = (!null).then(|| {
            (result.n_correct as f64 - baselines.gl.n_correct as f64) / result.n_tested as f64
        });
        LiftCell {
            model: result.model.clone(),
            method: result.method,
            n_tested: result.n_tested,
            n_covered: result.n_covered,
            n_correct: result.n_correct,
            precision: result.precision(),
            coverage: result.recall_coverage(),
            lift_ga,
            lift_gl,
        }
    }

    /// Full labelset × (model × method) table with row and column means.
    pub fn lift_heatmap(
        &self,
        models: &[(String, EdgeSet)],
        methods: &[Method],
    ) -> Result<LiftTable> {
        if models.is_empty() || methods.is_empty() {
            return Err(Error::invalid("heatmap needs at least one model and method"));
        }
        if let Some(m) = methods.iter().find(|m| !m.is_local()) {
            return Err(Error::invalid(format!(
                "`{}` is a baseline, not a heatmap method",
                m.as_str()
            )));
        }
        let labelsets = self.testable_labelsets();
        if labelsets.is_empty() {
            return Err(Error::invalid("no labelset has positive nodes"));
        }
        let mut rows = Vec::with_capacity(labelsets.len());
        let mut baselines = Vec::with_capacity(labelsets.len());
        for l in &labelsets {
            let base = self.baselines(l)?;
            let mut cells = Vec::with_capacity(models.len() * methods.len());
            for (model_name, e) in models {
                for &method in methods {
                    let result = self.run_oracle(e, model_name, method, l)?;
                    cells.push(self.cell(result, &base));
                }
            }
            let mean_lift_ga = mean(cells.iter().filter_map(|c| c.lift_ga));
            rows.push(LiftRow {
                labelset: l.name().to_string(),
                prevalence: l.prevalence(),
                cells,
                mean_lift_ga,
            });
            baselines.push(base);
        }
        let mut columns = Vec::with_capacity(models.len() * methods.len());
        for (ci, (model_name, _)) in models.iter().enumerate() {
            for (mi, &method) in methods.iter().enumerate() {
                let idx = ci * methods.len() + mi;
                let cells: Vec<&LiftCell> = rows.iter().map(|r| &r.cells[idx]).collect();
                columns.push(ColumnSummary {
                    model: model_name.clone(),
                    method,
                    mean_lift_ga: mean(cells.iter().filter_map(|c| c.lift_ga)),
                    mean_lift_gl: mean(cells.iter().filter_map(|c| c.lift_gl)),
                    mean_precision: mean(cells.iter().filter_map(|c| c.precision)),
                    mean_coverage: cells.iter().map(|c| c.coverage).sum::<f64>()
                        / cells.len() as f64,
                    null_cells: cells.iter().filter(|c| c.lift_ga.is_none()).count(),
                });
            }
        }
        rows.sort_by(|a, b| match (a.mean_lift_ga, b.mean_lift_ga) {
            (Some(x), Some(y)) => y.total_cmp(&x).then(a.labelset.cmp(&b.labelset)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.labelset.cmp(&b.labelset),
        });
        Ok(LiftTable {
            rows,
            columns,
            baselines,
        })
    }

    /// Rebuild the inferred edge-set at each density factor and record mean
    /// lift and coverage. Factors too low for the model become null points.
    pub fn density_sweep(
        &self,
        e_obs: &EdgeSet,
        kind: ModelKind,
        similarity: Similarity,
        method: Method,
        factors: &[f64],
    ) -> Result<SweepSeries> {
        if factors.is_empty() {
            return Err(Error::invalid("density sweep needs at least one factor"));
        }
        let mut points = Vec::with_capacity(factors.len());
        for &factor in factors {
            let lambda = match match_density(e_obs, kind, factor) {
                Ok(l) => l,
                Err(Error::DensityTooLow(_)) => {
                    points.push(SweepPoint {
                        x: factor,
                        lambda: None,
                        mean_lift_ga: None,
                        mean_coverage: None,
                        null_labelsets: 0,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let spec = ModelSpec {
                model: kind,
                similarity,
                lambda,
                density_factor: Some(factor),
            };
            let e = build(self.g.attributes(), &spec)?;
            let mut lifts = Vec::new();
            let mut coverages = Vec::new();
            let mut nulls = 0usize;
            for l in self.testable_labelsets() {
                let base = self.baselines(l)?;
                let cell = self.cell(self.run_oracle(&e, kind.as_str(), method, l)?, &base);
                coverages.push(cell.coverage);
                match cell.lift_ga {
                    Some(v) => lifts.push(v),
                    None => nulls += 1,
                }
            }
            points.push(SweepPoint {
                x: factor,
                lambda: Some(lambda),
                mean_lift_ga: mean(lifts.into_iter()),
                mean_coverage: mean(coverages.into_iter()),
                null_labelsets: nulls,
            });
        }
        Ok(SweepSeries {
            kind: SweepKind::Density,
            model: kind.as_str().to_string(),
            method,
            points,
        })
    }

    /// Grow training neighborhoods breadth-first and record mean lift at
    /// each size.
    pub fn bfs_sweep(
        &self,
        e: &EdgeSet,
        model: &str,
        method: Method,
        sizes: &[usize],
    ) -> Result<SweepSeries> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::invalid("neighborhood sizes must be positive"));
        }
        let mut points = Vec::with_capacity(sizes.len());
        for &size in sizes {
            let mut lifts = Vec::new();
            let mut nulls = 0usize;
            for l in self.testable_labelsets() {
                let base = self.baselines(l)?;
                let cell = self.cell(self.run_oracle_bfs(e, model, method, l, size)?, &base);
                match cell.lift_ga {
                    Some(v) => lifts.push(v),
                    None => nulls += 1,
                }
            }
            points.push(SweepPoint {
                x: size as f64,
                lambda: None,
                mean_lift_ga: mean(lifts.into_iter()),
                mean_coverage: None,
                null_labelsets: nulls,
            });
        }
        Ok(SweepSeries {
            kind: SweepKind::BfsSize,
            model: model.to_string(),
            method,
            points,
        })
    }

    /// Per-labelset bias on `e_bias` joined with lift of (e_model, method),
    /// plus the least-squares fit (lift as x, bias as y) over rows where
    /// both are defined.
    pub fn bias_lift_table(
        &self,
        e_bias: &EdgeSet,
        e_model: &EdgeSet,
        model: &str,
        method: Method,
    ) -> Result<BiasLiftTable> {
        let mut rows = Vec::new();
        for l in self.testable_labelsets() {
            let bias = crate::bias::network_label_bias(e_bias, l).ok().map(|r| r.bias);
            let base = self.baselines(l)?;
            let cell = self.cell(self.run_oracle(e_model, model, method, l)?, &base);
            rows.push(BiasLiftRow {
                labelset: l.name().to_string(),
                prevalence: l.prevalence(),
                bias,
                lift_ga: cell.lift_ga,
            });
        }
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| Some((r.lift_ga?, r.bias?)))
            .collect();
        let fit = least_squares(&points)?;
        Ok(BiasLiftTable { rows, fit })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Provenance;
    use crate::rng::Stream;
    use crate::similarity::SparseCountVector;

    fn plays(pairs: &[(u32, u64)]) -> SparseCountVector {
        SparseCountVector::from_pairs(pairs.iter().copied())
    }

    fn result(labelset: &str, n_tested: usize, n_covered: usize, n_correct: usize) -> OracleResult {
        OracleResult {
            labelset: labelset.to_string(),
            model: "m".to_string(),
            method: Method::Nl,
            n_tested,
            n_covered,
            n_correct,
        }
    }

    /// Two homophilous blocks: labels follow blocks, block members share an
    /// attribute dimension.
    fn block_graph(n: usize) -> AttributedGraph {
        let half = n / 2;
        let mut pairs = Vec::new();
        for b in 0..2 {
            let lo = b * half;
            let hi = lo + half;
            for u in lo..hi {
                for v in (u + 1)..hi {
                    if (u + v) % 3 == 0 {
                        pairs.push((u as u32, v as u32));
                    }
                }
            }
        }
        let edges = EdgeSet::from_undirected_pairs(n, &pairs, Provenance::Observed).unwrap();
        let attrs: Vec<SparseCountVector> = (0..n)
            .map(|i| {
                let dim = (i / half) as u32;
                plays(&[(dim, 3 + (i % 4) as u64), (2 + (i % 3) as u32, 1)])
            })
            .collect();
        let labels = LabelSet::new("block", (0..n).map(|i| i < half).collect());
        AttributedGraph::new(8, edges, attrs, vec![labels]).unwrap()
    }

    #[test]
    fn lift_is_the_correct_count_difference_over_tested() {
        let a = result("g", 10, 10, 8);
        let b = result("g", 10, 10, 5);
        assert_eq!(lift(&a, &b).unwrap(), 0.3);
        assert_eq!(lift(&a, &a).unwrap(), 0.0);
        assert_eq!(lift(&a, &b).unwrap(), -lift(&b, &a).unwrap());
        assert!(lift(&a, &result("other", 10, 10, 5)).is_err());
    }

    #[test]
    fn precision_is_null_without_coverage() {
        let r = result("g", 5, 0, 0);
        assert_eq!(r.precision(), None);
        assert_eq!(r.recall_coverage(), 0.0);
        assert_eq!(result("g", 8, 4, 3).precision(), Some(0.75));
        assert_eq!(result("g", 8, 4, 3).recall_coverage(), 0.5);
    }

    #[test]
    fn nl_on_pure_positive_neighborhoods_has_full_precision() {
        let g = block_graph(24);
        let h = Harness::new(&g, 7, MethodParams::default()).unwrap();
        let l = g.labelset("block").unwrap();
        let r = h.run_oracle(g.edges(), "social", Method::Nl, l).unwrap();
        // Blocks are label-pure, so every covered neighborhood agrees.
        assert_eq!(r.precision(), Some(1.0));
    }

    #[test]
    fn isolated_positives_produce_a_null_cell_excluded_from_means() {
        let n = 12;
        // Only negative nodes (6..12) carry edges; every positive is isolated.
        let pairs: Vec<(u32, u32)> = (6..n as u32 - 1).map(|u| (u, u + 1)).collect();
        let edges = EdgeSet::from_undirected_pairs(n, &pairs, Provenance::Observed).unwrap();
        let attrs = vec![plays(&[(0, 2)]); n];
        let labels = LabelSet::new("iso", (0..n).map(|i| i < 6).collect());
        let g = AttributedGraph::new(4, edges, attrs, vec![labels]).unwrap();
        let h = Harness::new(&g, 3, MethodParams::default()).unwrap();
        let models = vec![(
            "social".to_string(),
            g.edges().clone(),
        )];
        let table = h.lift_heatmap(&models, &[Method::Nl]).unwrap();
        let cell = &table.rows[0].cells[0];
        assert_eq!(cell.n_covered, 0);
        assert_eq!(cell.precision, None);
        assert_eq!(cell.lift_ga, None);
        assert_eq!(table.rows[0].mean_lift_ga, None);
        assert_eq!(table.columns[0].null_cells, 1);
        assert_eq!(table.columns[0].mean_lift_ga, None);
    }

    #[test]
    fn heatmap_single_cell_agrees_with_direct_lift() {
        let g = block_graph(24);
        let h = Harness::new(&g, 11, MethodParams::default()).unwrap();
        let l = g.labelset("block").unwrap();
        let models = vec![("social".to_string(), g.edges().clone())];
        let table = h.lift_heatmap(&models, &[Method::Rf]).unwrap();
        let cell = &table.rows[0].cells[0];

        let direct = h.run_oracle(g.edges(), "social", Method::Rf, l).unwrap();
        let ga = h.baselines(l).unwrap();
        let expected = lift(&direct, ga.ga_for(BaseLearner::Rf)).unwrap();
        assert_eq!(cell.lift_ga, Some(expected));
        assert_eq!(cell.n_correct, direct.n_correct);
    }

    #[test]
    fn identical_models_give_identical_columns() {
        let g = block_graph(24);
        let h = Harness::new(&g, 5, MethodParams::default()).unwrap();
        let models = vec![
            ("a".to_string(), g.edges().clone()),
            ("b".to_string(), g.edges().clone()),
        ];
        let table = h.lift_heatmap(&models, &[Method::Nl, Method::Cs]).unwrap();
        for row in &table.rows {
            assert_eq!(row.cells[0].lift_ga, row.cells[2].lift_ga);
            assert_eq!(row.cells[1].lift_ga, row.cells[3].lift_ga);
        }
        assert_eq!(table.columns[0].mean_lift_ga, table.columns[2].mean_lift_ga);
    }

    #[test]
    fn baselines_are_rejected_as_heatmap_methods() {
        let g = block_graph(24);
        let h = Harness::new(&g, 5, MethodParams::default()).unwrap();
        let models = vec![("social".to_string(), g.edges().clone())];
        assert!(h.lift_heatmap(&models, &[Method::Ga]).is_err());
        assert!(h.lift_heatmap(&models, &[]).is_err());
    }

    #[test]
    fn gl_baseline_is_shared_across_models() {
        let g = block_graph(24);
        let h = Harness::new(&g, 13, MethodParams::default()).unwrap();
        let l = g.labelset("block").unwrap();
        let b1 = h.baselines(l).unwrap();
        let b2 = h.baselines(l).unwrap();
        assert_eq!(b1.gl, b2.gl);
    }

    #[test]
    fn density_sweep_coverage_is_monotone() {
        let mut stream = Stream::new(19, "sweep-cov");
        let n = 60;
        let attrs: Vec<SparseCountVector> = (0..n)
            .map(|_| {
                SparseCountVector::from_pairs(
                    (0..3 + stream.next_below(4)).map(|_| (stream.next_below(12) as u32, 1 + stream.next_below(5))),
                )
            })
            .collect();
        let pairs: Vec<(u32, u32)> = (0..n as u32 - 1).map(|u| (u, u + 1)).collect();
        let edges = EdgeSet::from_undirected_pairs(n, &pairs, Provenance::Observed).unwrap();
        let labels = LabelSet::new("l", (0..n).map(|i| i % 3 == 0).collect());
        let g = AttributedGraph::new(12, edges, attrs, vec![labels]).unwrap();
        let h = Harness::new(&g, 2, MethodParams::default()).unwrap();
        let series = h
            .density_sweep(
                g.edges(),
                ModelKind::Threshold,
                Similarity::Intersection,
                Method::Nl,
                &[0.25, 0.5, 1.0, 2.0],
            )
            .unwrap();
        let coverages: Vec<f64> = series.points.iter().map(|p| p.mean_coverage.unwrap()).collect();
        for w in coverages.windows(2) {
            assert!(w[0] <= w[1] + 1e-12, "coverage fell: {coverages:?}");
        }
    }

    #[test]
    fn density_sweep_reports_low_factors_as_null_points() {
        let g = block_graph(24);
        let h = Harness::new(&g, 2, MethodParams::default()).unwrap();
        let series = h
            .density_sweep(
                g.edges(),
                ModelKind::Knn,
                Similarity::Intersection,
                Method::Nl,
                &[0.001, 1.0],
            )
            .unwrap();
        assert_eq!(series.points[0].lambda, None);
        assert_eq!(series.points[0].mean_lift_ga, None);
        assert!(series.points[1].lambda.is_some());
    }

    #[test]
    fn bfs_size_one_on_label_pure_blocks_is_exact() {
        let g = block_graph(24);
        let h = Harness::new(&g, 3, MethodParams::default()).unwrap();
        let l = g.labelset("block").unwrap();
        let r = h.run_oracle_bfs(g.edges(), "social", Method::Nl, l, 1).unwrap();
        assert_eq!(r.precision(), Some(1.0));
    }

    #[test]
    fn evaluation_is_independent_of_worker_count() {
        let g = block_graph(36);
        let models = vec![("social".to_string(), g.edges().clone())];
        let methods = [Method::Rf, Method::Nb, Method::Nl];
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let h = Harness::new(&g, 21, MethodParams::default()).unwrap();
                h.lift_heatmap(&models, &methods).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn least_squares_matches_hand_fits() {
        let fit = least_squares(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.intercept).abs() < 1e-12);
        assert_eq!(fit.r, Some(1.0));

        let flat = least_squares(&[(0.0, 2.0), (1.0, 2.0), (2.0, 2.0)]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(flat.r, None);

        assert!(least_squares(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(least_squares(&[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)]).is_err());
    }
}
