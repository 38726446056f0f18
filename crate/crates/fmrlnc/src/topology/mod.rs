//! Dynamic-graph generation, adaptive adversaries, and exact graph metrics.

mod graph;
mod metrics;
mod policy;

pub use graph::{parse_schedule, DirectedGraph};
pub use metrics::{
    isoperimetric_number, min_average_cut, rational_string, relaxed_isoperimetric_number,
    vertex_connectivity, EdgeDistribution, Rational, MAX_EXACT_ISOPERIMETRY_NODES,
    MAX_EXACT_WINDOW_NODES,
};
pub use policy::{IsolatingAdversary, NetworkView, TopologyPolicy};
