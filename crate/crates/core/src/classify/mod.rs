//! The task methods: three learners trained per test node on neighborhood
//! data (RF, LR, NB), two ad-hoc local rules (CS, NL), and the two global
//! baselines (GA, GL).
//!
//! Every local call trains on the neighborhood only; the test node's own
//! attributes and label never enter training data, and a call whose
//! neighbor list contains the test node is rejected outright.

mod bayes;
mod forest;
mod linear;

pub use bayes::Multinomial;
pub use forest::{Forest, ForestParams};
pub use linear::Ridge;

use std::collections::BTreeSet;

use crate::bias::lower_median;
use crate::error::{Error, Result};
use crate::graph::{LabelSet, NodeId};
use crate::rng::Stream;
use crate::similarity::{Similarity, SparseCountVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rf,
    Lr,
    Nb,
    Cs,
    Nl,
    Ga,
    Gl,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Rf => "rf",
            Method::Lr => "lr",
            Method::Nb => "nb",
            Method::Cs => "cs",
            Method::Nl => "nl",
            Method::Ga => "ga",
            Method::Gl => "gl",
        }
    }

    /// Methods trained per test node on neighborhood data.
    pub fn is_local(&self) -> bool {
        matches!(self, Method::Rf | Method::Lr | Method::Nb | Method::Cs | Method::Nl)
    }

    /// The global baseline a local method is measured against: the matching
    /// base learner where one exists, the surrogate mean otherwise.
    pub fn ga_base(&self) -> Option<BaseLearner> {
        match self {
            Method::Rf => Some(BaseLearner::Rf),
            Method::Lr => Some(BaseLearner::Lr),
            Method::Nb => Some(BaseLearner::Nb),
            _ => None,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(Method::Rf),
            "lr" => Ok(Method::Lr),
            "nb" => Ok(Method::Nb),
            "cs" => Ok(Method::Cs),
            "nl" => Ok(Method::Nl),
            "ga" => Ok(Method::Ga),
            "gl" => Ok(Method::Gl),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BaseLearner {
    Rf,
    Lr,
    Nb,
}

impl BaseLearner {
    pub const ALL: [BaseLearner; 3] = [BaseLearner::Rf, BaseLearner::Lr, BaseLearner::Nb];

    pub fn as_str(&self) -> &'static str {
        match self {
            BaseLearner::Rf => "rf",
            BaseLearner::Lr => "lr",
            BaseLearner::Nb => "nb",
        }
    }

    pub fn method(&self) -> Method {
        match self {
            BaseLearner::Rf => Method::Rf,
            BaseLearner::Lr => Method::Lr,
            BaseLearner::Nb => Method::Nb,
        }
    }
}

/// Hyperparameters shared by every method in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub forest: ForestParams,
    pub ridge: f64,
    pub nb_alpha: f64,
    pub cs_similarity: Similarity,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            forest: ForestParams::default(),
            ridge: 1e-3,
            nb_alpha: 1.0,
            cs_similarity: Similarity::Cosine,
        }
    }
}

/// A method plus everything needed to run it reproducibly.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub seed: u64,
    pub params: MethodParams,
}

impl MethodSpec {
    pub fn new(method: Method, seed: u64) -> Self {
        MethodSpec {
            method,
            seed,
            params: MethodParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Note {
    EmptyNeighborhood,
    SingleClassNeighborhood,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub node: NodeId,
    pub method: Method,
    /// `None` means abstain; only an empty neighborhood abstains.
    pub label: Option<bool>,
    pub note: Option<Note>,
}

/// Dense view of the neighborhood rows over the union of dimensions active
/// in the training rows and the test row; absent dimensions are implicit
/// zeros.
struct DenseView {
    dims: Vec<u32>,
    rows: Vec<Vec<f64>>,
    test_row: Vec<f64>,
}

fn densify(
    attrs: &[SparseCountVector],
    neighbors: &[NodeId],
    test: NodeId,
) -> DenseView {
    let mut dims: BTreeSet<u32> = BTreeSet::new();
    for &j in neighbors {
        dims.extend(attrs[j as usize].indices().iter().copied());
    }
    dims.extend(attrs[test as usize].indices().iter().copied());
    let dims: Vec<u32> = dims.into_iter().collect();
    let project = |v: &SparseCountVector| -> Vec<f64> {
        let mut row = vec![0.0; dims.len()];
        for (dim, count) in v.iter() {
            if let Ok(pos) = dims.binary_search(&dim) {
                row[pos] = count as f64;
            }
        }
        row
    };
    DenseView {
        rows: neighbors.iter().map(|&j| project(&attrs[j as usize])).collect(),
        test_row: project(&attrs[test as usize]),
        dims,
    }
}

/// Neighborhood majority; ties toward label 0.
fn predict_nl(labels: &[bool]) -> bool {
    let pos = labels.iter().filter(|&&l| l).count();
    pos * 2 > labels.len()
}

/// Max-median similarity: the label whose neighbors' similarity to the test
/// vector has the larger lower-middle median; ties toward label 0.
fn predict_cs(
    attrs: &[SparseCountVector],
    neighbors: &[NodeId],
    labels: &[bool],
    test: NodeId,
    sim: Similarity,
) -> bool {
    let mut per_label: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (&j, &l) in neighbors.iter().zip(labels) {
        per_label[l as usize].push(sim.score(&attrs[test as usize], &attrs[j as usize]));
    }
    match (
        lower_median(&mut per_label[0]),
        lower_median(&mut per_label[1]),
    ) {
        (Some(m0), Some(m1)) => m1 > m0,
        (None, Some(_)) => true,
        _ => false,
    }
}

/// Train the given neighborhood and predict the test row.
pub fn classify_local(
    spec: &MethodSpec,
    neighbors: &[NodeId],
    attrs: &[SparseCountVector],
    l: &LabelSet,
    i: NodeId,
) -> Result<Prediction> {
    let n = attrs.len();
    if i as usize >= n {
        return Err(Error::NodeOutOfRange { node: i, num_nodes: n });
    }
    if let Some(&bad) = neighbors.iter().find(|&&j| j as usize >= n) {
        return Err(Error::NodeOutOfRange { node: bad, num_nodes: n });
    }
    if neighbors.contains(&i) {
        return Err(Error::invalid(format!(
            "node {i} appears in its own training neighborhood"
        )));
    }
    if !spec.method.is_local() {
        return Err(Error::invalid(format!(
            "method `{}` is a global baseline, not a local method",
            spec.method.as_str()
        )));
    }
    if neighbors.is_empty() {
        return Ok(Prediction {
            node: i,
            method: spec.method,
            label: None,
            note: Some(Note::EmptyNeighborhood),
        });
    }
    let labels: Vec<bool> = neighbors.iter().map(|&j| l.label(j)).collect();
    let pos = labels.iter().filter(|&&x| x).count();
    if pos == 0 || pos == labels.len() {
        return Ok(Prediction {
            node: i,
            method: spec.method,
            label: Some(pos > 0),
            note: Some(Note::SingleClassNeighborhood),
        });
    }
    let label = match spec.method {
        Method::Nl => predict_nl(&labels),
        Method::Cs => predict_cs(attrs, neighbors, &labels, i, spec.params.cs_similarity),
        Method::Rf => {
            let view = densify(attrs, neighbors, i);
            let mut stream = Stream::new(spec.seed, "rf").derive_str(l.name()).derive(i as u64);
            Forest::train(&view.rows, &labels, &spec.params.forest, &mut stream)
                .predict(&view.test_row)
        }
        Method::Lr => {
            let view = densify(attrs, neighbors, i);
            Ridge::train(&view.rows, &labels, spec.params.ridge).predict(&view.test_row)
        }
        Method::Nb => {
            let view = densify(attrs, neighbors, i);
            Multinomial::train(&view.rows, &labels, spec.params.nb_alpha).predict(&view.test_row)
        }
        Method::Ga | Method::Gl => unreachable!(),
    };
    Ok(Prediction {
        node: i,
        method: spec.method,
        label: Some(label),
        note: None,
    })
}

/// Global label-distribution baseline: an independent Bernoulli draw at the
/// labelset's prevalence, keyed by (seed, labelset, node) so the draw for a
/// node is one fixed value across models, evaluation order, and worker
/// count.
pub fn gl_predict(l: &LabelSet, i: NodeId, seed: u64) -> Prediction {
    let mut stream = Stream::new(seed, "gl").derive_str(l.name()).derive(i as u64);
    Prediction {
        node: i,
        method: Method::Gl,
        label: Some(stream.next_bool(l.prevalence())),
        note: None,
    }
}

/// Node-level even split for the global-attribute baseline: one seeded draw
/// per run, shared by every labelset and base learner of that run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaSplit {
    in_second: Vec<bool>,
}

impl GaSplit {
    pub fn new(num_nodes: usize, seed: u64) -> Result<GaSplit> {
        if num_nodes < 4 {
            return Err(Error::invalid(
                "global-attribute split needs at least 2 nodes per half",
            ));
        }
        let mut ids: Vec<NodeId> = (0..num_nodes as NodeId).collect();
        Stream::new(seed, "ga-split").shuffle(&mut ids);
        let mut in_second = vec![false; num_nodes];
        for &i in &ids[num_nodes / 2..] {
            in_second[i as usize] = true;
        }
        Ok(GaSplit { in_second })
    }

    pub fn len(&self) -> usize {
        self.in_second.len()
    }

    pub fn is_empty(&self) -> bool {
        self.in_second.is_empty()
    }

    pub fn in_second_half(&self, i: NodeId) -> bool {
        self.in_second[i as usize]
    }

    fn half_members(&self, second: bool) -> Vec<NodeId> {
        (0..self.in_second.len() as NodeId)
            .filter(|&i| self.in_second[i as usize] == second)
            .collect()
    }
}

/// A trained global model plus the dimension mapping it was fit over.
#[derive(Debug, Clone)]
struct GlobalModel {
    dims: Vec<u32>,
    kind: GlobalKind,
}

#[derive(Debug, Clone)]
enum GlobalKind {
    Constant(bool),
    Forest(Forest),
    Ridge(Ridge),
    Bayes(Multinomial),
}

impl GlobalModel {
    fn predict(&self, v: &SparseCountVector) -> bool {
        let mut row = vec![0.0; self.dims.len()];
        for (dim, count) in v.iter() {
            if let Ok(pos) = self.dims.binary_search(&dim) {
                row[pos] = count as f64;
            }
        }
        match &self.kind {
            GlobalKind::Constant(l) => *l,
            GlobalKind::Forest(f) => f.predict(&row),
            GlobalKind::Ridge(r) => r.predict(&row),
            GlobalKind::Bayes(b) => b.predict(&row),
        }
    }
}

/// The two half-models of the global-attribute baseline for one labelset and
/// one base learner.
#[derive(Debug, Clone)]
pub struct GaPair {
    pub base: BaseLearner,
    first: GlobalModel,
    second: GlobalModel,
}

fn fit_global(
    attrs: &[SparseCountVector],
    l: &LabelSet,
    members: &[NodeId],
    base: BaseLearner,
    params: &MethodParams,
    stream: &mut Stream,
) -> GlobalModel {
    let labels: Vec<bool> = members.iter().map(|&j| l.label(j)).collect();
    let pos = labels.iter().filter(|&&x| x).count();
    if pos == 0 || pos == labels.len() {
        return GlobalModel {
            dims: Vec::new(),
            kind: GlobalKind::Constant(pos > 0),
        };
    }
    let mut dims: BTreeSet<u32> = BTreeSet::new();
    for &j in members {
        dims.extend(attrs[j as usize].indices().iter().copied());
    }
    let dims: Vec<u32> = dims.into_iter().collect();
    let rows: Vec<Vec<f64>> = members
        .iter()
        .map(|&j| {
            let mut row = vec![0.0; dims.len()];
            for (dim, count) in attrs[j as usize].iter() {
                if let Ok(pos) = dims.binary_search(&dim) {
                    row[pos] = count as f64;
                }
            }
            row
        })
        .collect();
    let kind = match base {
        BaseLearner::Rf => GlobalKind::Forest(Forest::train(&rows, &labels, &params.forest, stream)),
        BaseLearner::Lr => GlobalKind::Ridge(Ridge::train(&rows, &labels, params.ridge)),
        BaseLearner::Nb => GlobalKind::Bayes(Multinomial::train(&rows, &labels, params.nb_alpha)),
    };
    GlobalModel { dims, kind }
}

/// Fit both half-models for one labelset. Degenerate halves (single-class)
/// become constant predictors rather than errors.
pub fn ga_fit(
    attrs: &[SparseCountVector],
    l: &LabelSet,
    split: &GaSplit,
    base: BaseLearner,
    params: &MethodParams,
    seed: u64,
) -> Result<GaPair> {
    if attrs.len() != split.len() {
        return Err(Error::invalid("split and attribute matrix disagree on node count"));
    }
    let fit_half = |second: bool| {
        let mut stream = Stream::new(seed, "ga")
            .derive_str(base.as_str())
            .derive_str(l.name())
            .derive(second as u64);
        fit_global(attrs, l, &split.half_members(second), base, params, &mut stream)
    };
    Ok(GaPair {
        base,
        first: fit_half(false),
        second: fit_half(true),
    })
}

/// Predict node `i` with the half-model that never saw it.
pub fn ga_predict(pair: &GaPair, split: &GaSplit, i: NodeId, a_i: &SparseCountVector) -> Prediction {
    let model = if split.in_second_half(i) {
        &pair.first
    } else {
        &pair.second
    };
    Prediction {
        node: i,
        method: Method::Ga,
        label: Some(model.predict(a_i)),
        note: None,
    }
}

/// Baseline precision for methods with no matching global base learner: the
/// mean over whichever base precisions are available.
pub fn ga_surrogate_precision(precisions: &[f64]) -> Result<f64> {
    if precisions.is_empty() {
        return Err(Error::invalid("no global-attribute precisions to average"));
    }
    Ok(precisions.iter().sum::<f64>() / precisions.len() as f64)
}
