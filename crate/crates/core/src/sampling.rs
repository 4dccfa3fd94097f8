//! Snowball sampling of a known ground-truth network.
//!
//! Interviews proceed in waves. Seeds are interviewed in wave 0; every
//! interviewee names up to `k` of its true contacts, drawn without
//! replacement, and each named person not yet known is interviewed in the
//! next wave. Nodes reached in the last wave are interviewed too, but the
//! people they name are not followed up.
//!
//! With mutual confirmation an edge needs the assent of both endpoints.
//! An endpoint assents by naming the other, or by being asked about them:
//! interviewees are asked whether they know the people who mentioned them
//! in earlier waves. Edges whose confirmation would need a later wave are
//! dropped.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("need at least one seed")]
    NoSeeds,
    #[error("{seeds} seeds requested from a population of {population}")]
    TooManySeeds { seeds: usize, population: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub seed_count: usize,
    /// Contacts named per interview.
    pub names_per_interview: usize,
    pub waves: usize,
    pub rng_seed: u64,
    pub mutual_confirmation: bool,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            seed_count: 1,
            names_per_interview: 3,
            waves: 2,
            rng_seed: 0,
            mutual_confirmation: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveStats {
    pub wave: usize,
    pub new_nodes: usize,
    pub total_nodes: usize,
    /// Sampled edges whose endpoints were both interviewed by this wave.
    pub total_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnowballSample {
    pub graph: LabeledGraph,
    pub waves: Vec<WaveStats>,
}

/// Observed subgraph of `ground_truth`.
pub fn snowball(
    ground_truth: &LabeledGraph,
    cfg: &SamplingConfig,
) -> Result<LabeledGraph, SamplingError> {
    snowball_with_stats(ground_truth, cfg).map(|s| s.graph)
}

pub fn snowball_with_stats(
    ground_truth: &LabeledGraph,
    cfg: &SamplingConfig,
) -> Result<SnowballSample, SamplingError> {
    let n = ground_truth.node_count();
    if cfg.seed_count == 0 {
        return Err(SamplingError::NoSeeds);
    }
    if cfg.seed_count > n {
        return Err(SamplingError::TooManySeeds {
            seeds: cfg.seed_count,
            population: n,
        });
    }
    let adj = ground_truth.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut wave_of: Vec<Option<usize>> = vec![None; n];
    let mut named: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut current: Vec<usize> = sample(&mut rng, n, cfg.seed_count).into_vec();
    current.sort_unstable();
    for &s in &current {
        wave_of[s] = Some(0);
    }

    for wave in 0..=cfg.waves {
        for &v in &current {
            let k = cfg.names_per_interview.min(adj[v].len());
            let mut picks: Vec<usize> = sample(&mut rng, adj[v].len(), k)
                .into_iter()
                .map(|i| adj[v][i])
                .collect();
            picks.sort_unstable();
            named[v] = picks;
        }
        if wave == cfg.waves {
            break;
        }
        let mut next: Vec<usize> = current
            .iter()
            .flat_map(|&v| named[v].iter().copied())
            .filter(|&w| wave_of[w].is_none())
            .collect();
        next.sort_unstable();
        next.dedup();
        for &w in &next {
            wave_of[w] = Some(wave + 1);
        }
        current = next;
    }

    // `a` named `b`; does `b` assent?
    let assents = |a: usize, b: usize| -> bool {
        named[b].binary_search(&a).is_ok() || wave_of[a] < wave_of[b]
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for a in 0..n {
        for &b in &named[a] {
            if wave_of[b].is_none() {
                continue;
            }
            if cfg.mutual_confirmation && !assents(a, b) {
                continue;
            }
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let keep: Vec<bool> = wave_of.iter().map(Option::is_some).collect();
    let mut remap = vec![usize::MAX; n];
    let mut labels = Vec::new();
    for (i, label) in ground_truth.labels().iter().enumerate() {
        if keep[i] {
            remap[i] = labels.len();
            labels.push(label.clone());
        }
    }
    let mut sub_adj = vec![Vec::new(); labels.len()];
    for &(a, b) in &edges {
        sub_adj[remap[a]].push(remap[b]);
        sub_adj[remap[b]].push(remap[a]);
    }
    let roles = ground_truth
        .roles()
        .iter()
        .filter(|(l, _)| ground_truth.index_of(l).is_some_and(|i| keep[i]))
        .map(|(l, r)| (l.clone(), *r))
        .collect();
    let graph = LabeledGraph::from_index_parts(labels, sub_adj, roles);

    let last_wave = wave_of.iter().flatten().copied().max().unwrap_or(0);
    let mut waves = Vec::new();
    let mut total_nodes = 0;
    for w in 0..=last_wave {
        let new_nodes = wave_of.iter().filter(|x| **x == Some(w)).count();
        total_nodes += new_nodes;
        let total_edges = edges
            .iter()
            .filter(|&&(a, b)| wave_of[a].max(wave_of[b]) <= Some(w))
            .count();
        waves.push(WaveStats {
            wave: w,
            new_nodes,
            total_nodes,
            total_edges,
        });
    }
    Ok(SnowballSample { graph, waves })
}
