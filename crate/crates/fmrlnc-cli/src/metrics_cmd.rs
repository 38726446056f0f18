//! The metrics command: exact graph metrics for a generated graph or a
//! schedule file, emitted as exact fraction strings.

use fmrlnc::error::{Error, Result};
use fmrlnc::topology::{
    isoperimetric_number, min_average_cut, parse_schedule, rational_string,
    relaxed_isoperimetric_number, vertex_connectivity, DirectedGraph, EdgeDistribution,
};

use crate::config::parse_graph;
use crate::table::ResultTable;

/// Metrics for a static graph expression or a `schedule:PATH` target.
pub fn compute_metrics(target: &str, delta: usize) -> Result<ResultTable> {
    let mut t = ResultTable::new(&["target", "delta", "statistic", "value", "stderr"]);
    let label = target.replace(',', ";");
    let mut push = |stat: &str, value: String| {
        t.push(vec![label.clone(), delta.to_string(), stat.to_string(), value, String::new()]);
    };

    if let Some(path) = target.strip_prefix("schedule:") {
        let text = std::fs::read_to_string(path.trim())
            .map_err(|e| Error::validation(format!("cannot read schedule {path:?}: {e}")))?;
        let schedule = parse_schedule(&text)?;
        if schedule.len() < delta {
            return Err(Error::validation(format!(
                "schedule has {} rounds, shorter than delta {delta}",
                schedule.len()
            )));
        }
        let horizon = schedule.len() - delta;
        push("rounds", schedule.len().to_string());
        let relaxed = relaxed_isoperimetric_number(&schedule, delta, horizon)?;
        push("relaxed_isoperimetric_number", rational_string(relaxed));
        // rounds with no edges have no distribution to average over
        if schedule.iter().all(|g| g.edge_count() > 0) {
            let dists: Vec<EdgeDistribution> =
                schedule.iter().map(EdgeDistribution::uniform_over).collect::<Result<_>>()?;
            let cut = min_average_cut(&dists, delta)?;
            push("min_average_cut_uniform", rational_string(cut));
        }
        return Ok(t);
    }

    let graph: DirectedGraph = parse_graph(target, 0)?;
    push("nodes", graph.n().to_string());
    push("edges", graph.edge_count().to_string());
    push("vertex_connectivity", vertex_connectivity(&graph)?.to_string());
    let h = isoperimetric_number(&graph)?;
    push("isoperimetric_number", rational_string(h));
    let schedule: Vec<DirectedGraph> = vec![graph.clone(); delta + 1];
    let relaxed = relaxed_isoperimetric_number(&schedule, delta, 1)?;
    push("relaxed_isoperimetric_number", rational_string(relaxed));
    if graph.edge_count() > 0 {
        let dist = EdgeDistribution::uniform_over(&graph)?;
        let dists = vec![dist; delta];
        push("min_average_cut_uniform", rational_string(min_average_cut(&dists, delta)?));
    }
    Ok(t)
}
