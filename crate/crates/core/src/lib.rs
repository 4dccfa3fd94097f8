//! Covert-network analysis: structural metrics, cost-aware spectral
//! dismantling, snowball sampling and reference-network synthesis.

pub mod cli;
pub mod dismantling;
pub mod graph;
pub mod metrics;
pub mod sampling;
pub mod spectral;
pub mod synthesis;

pub use dismantling::{
    gnd, hub_strategy, random_strategy, run_strategy, threshold_cost, wvc, CostModel,
    DismantleError, DismantlingTrace, RemovalStep, StrategyKind, StrategySpec,
};
pub use graph::{GraphError, LabeledGraph, NodeSet, Role};
pub use metrics::{MetricsError, MetricsReport};
pub use sampling::{snowball, snowball_with_stats, SamplingConfig, SamplingError};
pub use spectral::{spectral_bisection, CostVector, SpectralBisection, SpectralError};
pub use synthesis::{objective, synthesize_reference, SynthesisError, SynthesisTarget};

/// The bundled reference network (34 actors, 225 ties).
pub const REFERENCE_NETWORK: &str = include_str!("../data/reference_network.txt");
/// Roles of the bundled reference network.
pub const REFERENCE_ROLES: &str = include_str!("../data/reference_roles.csv");
/// Synthesis target that produced the reference network.
pub const REFERENCE_TARGET: &str = include_str!("../data/chiapas_target.json");

/// Parses the bundled reference network with its roles attached.
pub fn reference_network() -> LabeledGraph {
    LabeledGraph::parse_edge_list(REFERENCE_NETWORK)
        .and_then(|g| g.load_roles(REFERENCE_ROLES))
        .expect("bundled reference network is valid")
}
