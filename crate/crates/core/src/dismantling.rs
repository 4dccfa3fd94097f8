//! Node-removal strategies and their cost traces.
//!
//! Three strategies share one bookkeeping loop: generalized network
//! dismantling (spectral bisection plus weighted vertex cover), adaptive
//! hub removal and uniform random removal. Each removal is charged the
//! node's degree, by default in the residual graph at the moment it goes.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LabeledGraph, NodeSet};
use crate::metrics::{self, MetricsReport};
use crate::spectral::{self, CostVector, SpectralError};

/// Slack for comparing LCC sizes against fractional thresholds.
const THRESHOLD_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DismantleError {
    #[error("invalid strategy: {0}")]
    InvalidSpec(String),
    #[error("cannot dismantle an empty graph")]
    EmptyGraph,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("crossing subgraph is not a subgraph of the host graph: {0}")]
    NotSubgraph(String),
    #[error("node {0:?} covers crossing edges but has degree 0 in the host graph")]
    ZeroHostDegree(String),
    #[error("round removed no node although {0} crossing edges remain")]
    NoProgress(usize),
    #[error("trace never dismantles {percent}% of the network (LCC <= {threshold})")]
    ThresholdNotReached { percent: f64, threshold: f64 },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Random,
    Hub,
    Gnd,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Hub => "hub",
            StrategyKind::Gnd => "gnd",
        }
    }
}

/// How a removal is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// Degree in the residual graph at removal time.
    #[default]
    Residual,
    /// Degree in the original graph.
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub target_lcc_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default)]
    pub cost_model: CostModel,
}

impl StrategySpec {
    pub fn gnd(target_lcc_fraction: f64) -> Result<Self, DismantleError> {
        Self::build(StrategyKind::Gnd, target_lcc_fraction, None)
    }

    pub fn hub(target_lcc_fraction: f64) -> Result<Self, DismantleError> {
        Self::build(StrategyKind::Hub, target_lcc_fraction, None)
    }

    pub fn random(target_lcc_fraction: f64, seed: u64) -> Result<Self, DismantleError> {
        Self::build(StrategyKind::Random, target_lcc_fraction, Some(seed))
    }

    fn build(
        kind: StrategyKind,
        target_lcc_fraction: f64,
        rng_seed: Option<u64>,
    ) -> Result<Self, DismantleError> {
        let spec = StrategySpec {
            kind,
            target_lcc_fraction,
            rng_seed,
            cost_model: CostModel::Residual,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cost_model(mut self, cost_model: CostModel) -> Self {
        self.cost_model = cost_model;
        self
    }

    pub fn validate(&self) -> Result<(), DismantleError> {
        let t = self.target_lcc_fraction;
        if !(t > 0.0 && t <= 1.0) {
            return Err(DismantleError::InvalidSpec(format!(
                "target LCC fraction {t} is outside (0, 1]"
            )));
        }
        match (self.kind, self.rng_seed) {
            (StrategyKind::Random, None) => Err(DismantleError::InvalidSpec(
                "random removal needs a seed".into(),
            )),
            (StrategyKind::Hub | StrategyKind::Gnd, Some(_)) => Err(DismantleError::InvalidSpec(
                format!("{} removal takes no seed", self.kind.as_str()),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalStep {
    pub node: String,
    pub cost: usize,
    pub cumulative_cost: usize,
    pub lcc_size_after: usize,
    pub density_after: f64,
    pub fragmentation_after: f64,
    pub mean_betweenness_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DismantlingTrace {
    pub strategy: StrategySpec,
    pub initial_node_count: usize,
    pub initial_lcc_size: usize,
    /// `None` when the input is too small for a full report.
    pub initial_metrics: Option<MetricsReport>,
    pub steps: Vec<RemovalStep>,
}

/// Residual-graph statistics logged after each removal. Graphs too small
/// for a metric get its degenerate value: density 0, fragmentation 1,
/// betweenness 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub lcc_size: usize,
    pub density: f64,
    pub fragmentation: f64,
    pub mean_betweenness: f64,
}

impl ResidualStats {
    pub fn of(g: &LabeledGraph) -> Self {
        ResidualStats {
            lcc_size: g.lcc_size(),
            density: metrics::density(g).unwrap_or(0.0),
            fragmentation: metrics::fragmentation(g).unwrap_or(1.0),
            mean_betweenness: metrics::mean_betweenness(g).unwrap_or(0.0),
        }
    }
}

impl DismantlingTrace {
    pub fn total_cost(&self) -> usize {
        self.steps.last().map_or(0, |s| s.cumulative_cost)
    }

    pub fn removal_order(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(|s| s.node.as_str())
    }

    pub fn final_lcc_size(&self) -> usize {
        self.steps
            .last()
            .map_or(self.initial_lcc_size, |s| s.lcc_size_after)
    }

    pub fn lcc_fraction(&self, lcc_size: usize) -> f64 {
        lcc_size as f64 / self.initial_node_count as f64
    }

    /// Writes one CSV row per removal.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), DismantleError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "step",
            "removed_node",
            "node_cost",
            "cumulative_cost",
            "lcc_size",
            "lcc_fraction",
            "density",
            "fragmentation",
            "mean_betweenness",
        ])?;
        for (i, s) in self.steps.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                s.node.clone(),
                s.cost.to_string(),
                s.cumulative_cost.to_string(),
                s.lcc_size_after.to_string(),
                self.lcc_fraction(s.lcc_size_after).to_string(),
                s.density_after.to_string(),
                s.fragmentation_after.to_string(),
                s.mean_betweenness_after.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, DismantleError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Cumulative cost at the first step where the LCC has at most `(1 - p) n0`
/// nodes; 0 if the untouched graph already qualifies.
pub fn threshold_cost(trace: &DismantlingTrace, p: f64) -> Result<usize, DismantleError> {
    let threshold = (1.0 - p) * trace.initial_node_count as f64;
    let within = |lcc: usize| lcc as f64 <= threshold + THRESHOLD_EPS;
    if within(trace.initial_lcc_size) {
        return Ok(0);
    }
    trace
        .steps
        .iter()
        .find(|s| within(s.lcc_size_after))
        .map(|s| s.cumulative_cost)
        .ok_or(DismantleError::ThresholdNotReached {
            percent: 100.0 * p,
            threshold,
        })
}

/// Greedy weighted vertex cover of the edges of `g_star`.
///
/// Repeatedly takes the node maximizing `k / h`, where `k` is its degree in
/// `g_star` and `h` its degree in `g`, and deletes it from both graphs.
/// Ties go to the smallest label. Returns the picks in order.
pub fn wvc(g_star: &LabeledGraph, g: &LabeledGraph) -> Result<Vec<String>, DismantleError> {
    for label in g_star.labels() {
        if !g.contains(label) {
            return Err(DismantleError::NotSubgraph(format!("node {label}")));
        }
    }
    if let Some((a, b)) = g_star.edges().find(|(a, b)| !g.has_edge(a, b)) {
        return Err(DismantleError::NotSubgraph(format!("edge {a} -- {b}")));
    }

    // Everything below is indexed like `g`, whose labels are sorted, so the
    // smallest index is the lexicographic tie-break.
    let n = g.node_count();
    let host = g.adjacency();
    let mut star_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in g_star.edges() {
        let (i, j) = (g.index_of(a).unwrap(), g.index_of(b).unwrap());
        star_adj[i].push(j);
        star_adj[j].push(i);
    }
    let mut k: Vec<usize> = star_adj.iter().map(Vec::len).collect();
    let mut h: Vec<usize> = host.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut remaining = g_star.edge_count();
    let mut picks = Vec::new();

    while remaining > 0 {
        let mut best: Option<usize> = None;
        for x in 0..n {
            if removed[x] || k[x] == 0 {
                continue;
            }
            if h[x] == 0 {
                return Err(DismantleError::ZeroHostDegree(g.labels()[x].clone()));
            }
            // k_x / h_x > k_b / h_b, cross-multiplied.
            if best.is_none_or(|b| k[x] * h[b] > k[b] * h[x]) {
                best = Some(x);
            }
        }
        let x = best.expect("an endpoint of a remaining edge has k > 0");
        removed[x] = true;
        remaining -= k[x];
        k[x] = 0;
        for &y in &star_adj[x] {
            if !removed[y] {
                k[y] -= 1;
            }
        }
        for &y in &host[x] {
            if !removed[y] {
                h[y] -= 1;
            }
        }
        picks.push(g.labels()[x].clone());
    }
    Ok(picks)
}

struct Run<'a> {
    original: &'a LabeledGraph,
    spec: StrategySpec,
    current: LabeledGraph,
    threshold: f64,
    cumulative: usize,
    steps: Vec<RemovalStep>,
}

impl<'a> Run<'a> {
    fn new(original: &'a LabeledGraph, spec: &StrategySpec) -> Result<Self, DismantleError> {
        spec.validate()?;
        if original.node_count() == 0 {
            return Err(DismantleError::EmptyGraph);
        }
        Ok(Run {
            original,
            spec: spec.clone(),
            current: original.clone(),
            threshold: spec.target_lcc_fraction * original.node_count() as f64,
            cumulative: 0,
            steps: Vec::new(),
        })
    }

    fn done(&self) -> bool {
        self.current.lcc_size() as f64 <= self.threshold + THRESHOLD_EPS
    }

    fn remove(&mut self, label: &str) -> Result<(), DismantleError> {
        let cost = match self.spec.cost_model {
            CostModel::Residual => self.current.degree(label)?,
            CostModel::Original => self.original.degree(label)?,
        };
        let removed: NodeSet = [label].into_iter().collect();
        self.current = self.current.remove_nodes(&removed)?;
        self.cumulative += cost;
        let stats = ResidualStats::of(&self.current);
        self.steps.push(RemovalStep {
            node: label.to_string(),
            cost,
            cumulative_cost: self.cumulative,
            lcc_size_after: stats.lcc_size,
            density_after: stats.density,
            fragmentation_after: stats.fragmentation,
            mean_betweenness_after: stats.mean_betweenness,
        });
        Ok(())
    }

    fn finish(self) -> DismantlingTrace {
        DismantlingTrace {
            strategy: self.spec,
            initial_node_count: self.original.node_count(),
            initial_lcc_size: self.original.lcc_size(),
            initial_metrics: metrics::report(self.original).ok(),
            steps: self.steps,
        }
    }
}

fn require_kind(spec: &StrategySpec, kind: StrategyKind) -> Result<(), DismantleError> {
    if spec.kind != kind {
        return Err(DismantleError::InvalidSpec(format!(
            "expected a {} spec, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    Ok(())
}

/// Generalized network dismantling.
///
/// Each round works on the current largest component: degrees become the
/// cost vector, the cost-weighted Laplacian is bisected along its Fiedler
/// vector, and the weighted vertex cover of the crossing edges is removed in
/// pick order. Rounds continue while the LCC exceeds the target. Once the
/// LCC has no edges left, its nodes are removed in label order.
pub fn gnd(g: &LabeledGraph, spec: &StrategySpec) -> Result<DismantlingTrace, DismantleError> {
    require_kind(spec, StrategyKind::Gnd)?;
    let mut run = Run::new(g, spec)?;
    while !run.done() {
        let lcc = run.current.largest_connected_component();
        let sub = run.current.induced_subgraph(&lcc)?;
        if sub.edge_count() == 0 {
            let label = sub.labels()[0].clone();
            run.remove(&label)?;
            continue;
        }
        let costs = CostVector::degrees(&sub)?;
        let bis = spectral::spectral_bisection(&sub, &costs)?;
        let crossing = spectral::crossing_subgraph(&sub, &bis);
        let picks = wvc(&crossing, &sub)?;
        if picks.is_empty() {
            return Err(DismantleError::NoProgress(crossing.edge_count()));
        }
        for label in &picks {
            run.remove(label)?;
        }
    }
    Ok(run.finish())
}

/// Adaptive hub removal: always the current highest-degree node, ties to the
/// smallest label.
pub fn hub_strategy(
    g: &LabeledGraph,
    spec: &StrategySpec,
) -> Result<DismantlingTrace, DismantleError> {
    require_kind(spec, StrategyKind::Hub)?;
    let mut run = Run::new(g, spec)?;
    while !run.done() {
        let adj = run.current.adjacency();
        let mut best = 0;
        for (i, nbrs) in adj.iter().enumerate() {
            if nbrs.len() > adj[best].len() {
                best = i;
            }
        }
        let label = run.current.labels()[best].clone();
        run.remove(&label)?;
    }
    Ok(run.finish())
}

/// Uniform random removal. The generator is ChaCha8 seeded with
/// `seed_from_u64(rng_seed)`; each step draws `gen_range(0..remaining)` over
/// the remaining labels in sorted order.
pub fn random_strategy(
    g: &LabeledGraph,
    spec: &StrategySpec,
) -> Result<DismantlingTrace, DismantleError> {
    require_kind(spec, StrategyKind::Random)?;
    let seed = spec.rng_seed.expect("validated spec carries a seed");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = Run::new(g, spec)?;
    while !run.done() {
        let pick = rng.gen_range(0..run.current.node_count());
        let label = run.current.labels()[pick].clone();
        run.remove(&label)?;
    }
    Ok(run.finish())
}

/// Dispatches on `spec.kind`.
pub fn run_strategy(
    g: &LabeledGraph,
    spec: &StrategySpec,
) -> Result<DismantlingTrace, DismantleError> {
    match spec.kind {
        StrategyKind::Gnd => gnd(g, spec),
        StrategyKind::Hub => hub_strategy(g, spec),
        StrategyKind::Random => random_strategy(g, spec),
    }
}
