//! Topology and centrality statistics.
//!
//! Every public function takes a [`LabeledGraph`]; the index-level helpers
//! are shared with the annealer and the dismantling strategies, which work
//! on raw adjacency lists.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{largest_component, LabeledGraph};

pub const EIGENVECTOR_TOL: f64 = 1e-9;
pub const EIGENVECTOR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("metric needs at least {required} nodes, graph has {found}")]
    TooFewNodes { required: usize, found: usize },
    #[error("metric needs at least one edge")]
    NoEdges,
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
}

fn require_nodes(g: &LabeledGraph, required: usize) -> Result<usize, MetricsError> {
    let found = g.node_count();
    if found < required {
        return Err(MetricsError::TooFewNodes { required, found });
    }
    Ok(found)
}

/// `2m / (n(n-1))`.
pub fn density(g: &LabeledGraph) -> Result<f64, MetricsError> {
    let n = require_nodes(g, 2)?;
    Ok(density_of(n, g.edge_count()))
}

pub(crate) fn density_of(n: usize, m: usize) -> f64 {
    2.0 * m as f64 / (n as f64 * (n as f64 - 1.0))
}

/// Fragmentation `F = 1 - 2 * sum_i sum_{j<i} A_ij / (n(n-1))`.
pub fn fragmentation(g: &LabeledGraph) -> Result<f64, MetricsError> {
    let n = require_nodes(g, 2)?;
    let lower: usize = g
        .adjacency()
        .iter()
        .enumerate()
        .map(|(i, nbrs)| nbrs.iter().filter(|&&j| j < i).count())
        .sum();
    Ok(1.0 - 2.0 * lower as f64 / (n as f64 * (n as f64 - 1.0)))
}

pub fn average_degree(g: &LabeledGraph) -> Result<f64, MetricsError> {
    let n = require_nodes(g, 1)?;
    Ok(2.0 * g.edge_count() as f64 / n as f64)
}

/// BFS hop distances from `source`; `usize::MAX` marks unreachable nodes.
pub(crate) fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Neighbor bitmasks, available when every index fits in one word.
fn neighbor_masks(adj: &[Vec<usize>]) -> Option<Vec<u64>> {
    (adj.len() <= 64).then(|| {
        adj.iter()
            .map(|nbrs| nbrs.iter().fold(0u64, |m, &w| m | 1 << w))
            .collect()
    })
}

/// Maximum eccentricity inside the largest connected component.
pub(crate) fn diameter_lcc_idx(adj: &[Vec<usize>]) -> usize {
    let lcc = largest_component(adj);
    if let Some(masks) = neighbor_masks(adj) {
        return lcc
            .into_iter()
            .map(|s| {
                let mut seen = 1u64 << s;
                let mut frontier = seen;
                let mut depth = 0;
                loop {
                    let mut next = 0u64;
                    let mut f = frontier;
                    while f != 0 {
                        next |= masks[f.trailing_zeros() as usize];
                        f &= f - 1;
                    }
                    next &= !seen;
                    if next == 0 {
                        break depth;
                    }
                    seen |= next;
                    frontier = next;
                    depth += 1;
                }
            })
            .max()
            .unwrap_or(0);
    }
    lcc.into_iter()
        .map(|s| {
            bfs_distances(adj, s)
                .into_iter()
                .filter(|&d| d != usize::MAX)
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Diameter of the largest connected component.
pub fn diameter_lcc(g: &LabeledGraph) -> Result<usize, MetricsError> {
    if g.edge_count() == 0 {
        return Err(MetricsError::NoEdges);
    }
    Ok(diameter_lcc_idx(g.adjacency()))
}

pub(crate) fn local_clustering_idx(adj: &[Vec<usize>], v: usize) -> f64 {
    let nbrs = &adj[v];
    let k = nbrs.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (a, &u) in nbrs.iter().enumerate() {
        for &w in &nbrs[a + 1..] {
            if adj[u].binary_search(&w).is_ok() {
                links += 1;
            }
        }
    }
    clustering_ratio(links, k)
}

fn clustering_ratio(links: usize, k: usize) -> f64 {
    links as f64 / (k * (k - 1) / 2) as f64
}

/// Fraction of neighbor pairs of `label` that are adjacent; 0 below degree 2.
pub fn local_clustering(g: &LabeledGraph, label: &str) -> Result<f64, MetricsError> {
    let v = g
        .index_of(label)
        .ok_or_else(|| MetricsError::UnknownNode(label.to_string()))?;
    Ok(local_clustering_idx(g.adjacency(), v))
}

pub(crate) fn average_clustering_idx(adj: &[Vec<usize>]) -> f64 {
    let total: f64 = match neighbor_masks(adj) {
        Some(masks) => (0..adj.len())
            .map(|v| {
                let k = adj[v].len();
                if k < 2 {
                    return 0.0;
                }
                // Each link among the neighbors is seen from both ends.
                let twice: u32 = adj[v]
                    .iter()
                    .map(|&u| (masks[u] & masks[v]).count_ones())
                    .sum();
                clustering_ratio(twice as usize / 2, k)
            })
            .sum(),
        None => (0..adj.len()).map(|v| local_clustering_idx(adj, v)).sum(),
    };
    total / adj.len() as f64
}

/// Mean local clustering over all nodes, degree-<2 nodes counted as 0.
pub fn average_clustering(g: &LabeledGraph) -> Result<f64, MetricsError> {
    require_nodes(g, 1)?;
    Ok(average_clustering_idx(g.adjacency()))
}

/// Brandes betweenness, normalized by `2 / ((n-1)(n-2))`. Requires `n >= 3`.
pub(crate) fn betweenness_idx(adj: &[Vec<usize>]) -> Vec<f64> {
    let n = adj.len();
    let mut centrality = vec![0.0_f64; n];
    let mut stack = Vec::with_capacity(n);
    let mut sigma = vec![0.0_f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0_f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        while let Some(w) = stack.pop() {
            // Predecessors are the neighbors one hop closer to `s`.
            for &v in &adj[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }

    // Each unordered pair was counted from both ends.
    let scale = 1.0 / ((n as f64 - 1.0) * (n as f64 - 2.0));
    centrality.iter_mut().for_each(|c| *c *= scale);
    centrality
}

pub(crate) fn mean_betweenness_idx(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len();
    if n < 3 {
        return 0.0;
    }
    betweenness_idx(adj).iter().sum::<f64>() / n as f64
}

/// Normalized betweenness of every node, each score in `[0, 1]`.
pub fn betweenness(g: &LabeledGraph) -> Result<BTreeMap<String, f64>, MetricsError> {
    require_nodes(g, 3)?;
    Ok(g.labels()
        .iter()
        .cloned()
        .zip(betweenness_idx(g.adjacency()))
        .collect())
}

/// Mean of [`betweenness`] over all nodes.
pub fn mean_betweenness(g: &LabeledGraph) -> Result<f64, MetricsError> {
    require_nodes(g, 3)?;
    Ok(mean_betweenness_idx(g.adjacency()))
}

/// Max-normalized eigenvector centrality over the largest component, zero
/// elsewhere.
///
/// Iterates `x <- (x + A x) / max`, which averages every iterate with its
/// image so bipartite components do not oscillate. Stops once successive
/// iterates differ by less than `tol` in max-norm and the eigen-residual
/// `|A x - lambda x|_inf` (Rayleigh quotient `lambda`) is also below `tol`.
pub(crate) fn eigenvector_idx(
    adj: &[Vec<usize>],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, MetricsError> {
    let n = adj.len();
    let mut scores = vec![0.0; n];
    let lcc = largest_component(adj);
    if lcc.is_empty() {
        return Ok(scores);
    }
    let mut local = vec![usize::MAX; n];
    for (k, &v) in lcc.iter().enumerate() {
        local[v] = k;
    }
    let sub: Vec<Vec<usize>> = lcc
        .iter()
        .map(|&v| adj[v].iter().map(|&w| local[w]).collect())
        .collect();

    let k = sub.len();
    let mut x = vec![1.0_f64; k];
    let mut ax = vec![0.0_f64; k];
    for _ in 0..max_iter {
        for (i, nbrs) in sub.iter().enumerate() {
            ax[i] = nbrs.iter().map(|&j| x[j]).sum();
        }
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let lambda = x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>() / xx;
        let residual = x
            .iter()
            .zip(&ax)
            .map(|(xi, ai)| (ai - lambda * xi).abs())
            .fold(0.0, f64::max);
        let scale = x
            .iter()
            .zip(&ax)
            .map(|(xi, ai)| xi + ai)
            .fold(0.0, f64::max);
        let mut diff = 0.0_f64;
        for i in 0..k {
            let next = (x[i] + ax[i]) / scale;
            diff = diff.max((next - x[i]).abs());
            x[i] = next;
        }
        if diff < tol && residual < tol {
            for (i, &v) in lcc.iter().enumerate() {
                scores[v] = x[i];
            }
            return Ok(scores);
        }
    }
    Err(MetricsError::NoConvergence(max_iter))
}

pub fn eigenvector_centrality(
    g: &LabeledGraph,
    tol: f64,
    max_iter: usize,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let scores = eigenvector_idx(g.adjacency(), tol, max_iter)?;
    Ok(g.labels().iter().cloned().zip(scores).collect())
}

/// Freeman degree centralization `sum_i (d_max - d_i) / ((n-1)(n-2))`.
pub fn degree_centralization(g: &LabeledGraph) -> Result<f64, MetricsError> {
    require_nodes(g, 3)?;
    Ok(degree_centralization_idx(g.adjacency()))
}

pub(crate) fn degree_centralization_idx(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len();
    let dmax = adj.iter().map(Vec::len).max().unwrap_or(0);
    let spread: usize = adj.iter().map(|nbrs| dmax - nbrs.len()).sum();
    spread as f64 / ((n as f64 - 1.0) * (n as f64 - 2.0))
}

/// Every statistic of the network-metrics table for one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub fragmentation: f64,
    pub diameter_lcc: usize,
    pub average_degree: f64,
    pub average_clustering: f64,
    pub mean_betweenness: f64,
    pub degree_centralization: f64,
    pub eigenvector_centrality: BTreeMap<String, f64>,
}

pub fn report(g: &LabeledGraph) -> Result<MetricsReport, MetricsError> {
    require_nodes(g, 3)?;
    Ok(MetricsReport {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        density: density(g)?,
        fragmentation: fragmentation(g)?,
        diameter_lcc: diameter_lcc(g)?,
        average_degree: average_degree(g)?,
        average_clustering: average_clustering(g)?,
        mean_betweenness: mean_betweenness(g)?,
        degree_centralization: degree_centralization(g)?,
        eigenvector_centrality: eigenvector_centrality(g, EIGENVECTOR_TOL, EIGENVECTOR_MAX_ITER)?,
    })
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24} {:>12}", "metric", "value")?;
        writeln!(f, "{:<24} {:>12}", "nodes", self.node_count)?;
        writeln!(f, "{:<24} {:>12}", "edges", self.edge_count)?;
        writeln!(f, "{:<24} {:>12.5}", "density", self.density)?;
        writeln!(f, "{:<24} {:>12.5}", "fragmentation", self.fragmentation)?;
        writeln!(f, "{:<24} {:>12}", "diameter (LCC)", self.diameter_lcc)?;
        writeln!(f, "{:<24} {:>12.3}", "average degree", self.average_degree)?;
        writeln!(
            f,
            "{:<24} {:>12.3}",
            "average clustering", self.average_clustering
        )?;
        writeln!(
            f,
            "{:<24} {:>11.2}%",
            "mean betweenness",
            100.0 * self.mean_betweenness
        )?;
        writeln!(
            f,
            "{:<24} {:>11.2}%",
            "degree centralization",
            100.0 * self.degree_centralization
        )?;
        let mut ranked: Vec<(&String, &f64)> = self.eigenvector_centrality.iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(a.1).then_with(|| a.0.cmp(b.0)));
        writeln!(f, "eigenvector centrality (top 5)")?;
        for (label, score) in ranked.into_iter().take(5) {
            writeln!(f, "  {label:<22} {score:>12.4}")?;
        }
        Ok(())
    }
}
