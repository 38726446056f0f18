//! Stopping-time campaigns: run a scenario across seeds, summarize medians
//! and completion rates, and attach the analytic scale the observed times are
//! judged against.

use num_rational::Ratio;
use num_traits::ToPrimitive;

use fmrlnc::coding::MemoryPolicy;
use fmrlnc::error::{Error, Result};
use fmrlnc::field::FieldSpec;
use fmrlnc::sim::{run, Model, SimulationConfig, TraceLevel};
use fmrlnc::topology::{
    min_average_cut, relaxed_isoperimetric_number, DirectedGraph, EdgeDistribution,
    TopologyPolicy,
};

use crate::stats::{median, percentile};
use crate::table::ResultTable;

pub type Rational = Ratio<i64>;

/// The closed-form scale a scenario's stopping time is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticScale {
    /// n / connectivity + k.
    Connectivity { connectivity: usize },
    /// ln(n * H) / H + k, for the relaxed isoperimetric number H.
    RelaxedIsoperimetry { h: Rational, delta: usize },
    /// n / C, for the min-average-cut C.
    AverageCut { cut: Rational },
    None,
}

impl AnalyticScale {
    pub fn value(&self, n: usize, k: usize) -> Option<f64> {
        match self {
            AnalyticScale::Connectivity { connectivity } => {
                Some(n as f64 / *connectivity as f64 + k as f64)
            }
            AnalyticScale::RelaxedIsoperimetry { h, .. } => {
                let h = h.to_f64()?;
                Some((n as f64 * h).ln() / h + k as f64)
            }
            AnalyticScale::AverageCut { cut } => Some(n as f64 / cut.to_f64()?),
            AnalyticScale::None => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticScale::Connectivity { .. } => "n_over_connectivity_plus_k",
            AnalyticScale::RelaxedIsoperimetry { .. } => "log_nH_over_H_plus_k",
            AnalyticScale::AverageCut { .. } => "n_over_min_average_cut",
            AnalyticScale::None => "none",
        }
    }

    pub fn exact_label(&self) -> String {
        match self {
            AnalyticScale::Connectivity { connectivity } => format!("connectivity={connectivity}"),
            AnalyticScale::RelaxedIsoperimetry { h, delta } => {
                format!("H={}/{} delta={delta}", h.numer(), h.denom())
            }
            AnalyticScale::AverageCut { cut } => format!("C={}/{}", cut.numer(), cut.denom()),
            AnalyticScale::None => "-".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StoppingScenario {
    pub name: String,
    pub config: SimulationConfig,
    pub seeds: u64,
    pub base_seed: u64,
    pub scale: AnalyticScale,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub name: String,
    pub policy: MemoryPolicy,
    pub model: Model,
    pub n: usize,
    pub k: usize,
    pub q: u64,
    pub seeds: u64,
    pub times: Vec<Option<u64>>,
    pub scale: AnalyticScale,
    pub conservation_violations: u64,
    pub decode_failures: u64,
}

impl ScenarioOutcome {
    pub fn completions(&self) -> u64 {
        self.times.iter().filter(|t| t.is_some()).count() as u64
    }

    pub fn completion_rate(&self) -> f64 {
        self.completions() as f64 / self.seeds as f64
    }

    /// Median over completed runs; budget-limited runs count as the budget,
    /// which only biases the median upward.
    pub fn median_time(&self, budget: u64) -> f64 {
        let values: Vec<f64> =
            self.times.iter().map(|t| t.unwrap_or(budget) as f64).collect();
        median(&values)
    }

    pub fn p90_time(&self, budget: u64) -> f64 {
        let values: Vec<f64> =
            self.times.iter().map(|t| t.unwrap_or(budget) as f64).collect();
        percentile(&values, 0.9)
    }

    pub fn scale_value(&self) -> Option<f64> {
        self.scale.value(self.n, self.k)
    }
}

/// Run one scenario across `seeds` consecutive seeds, fanned out over
/// workers keyed by seed offset and reduced in offset order. Verification
/// (conservation + decode-vs-original) is always on.
pub fn run_scenario(scenario: &StoppingScenario) -> Result<ScenarioOutcome> {
    use rayon::prelude::*;

    if scenario.seeds == 0 {
        return Err(Error::validation("a stopping campaign needs at least one seed".to_string()));
    }
    let summaries: Vec<(Option<u64>, u64, bool)> = (0..scenario.seeds)
        .into_par_iter()
        .map(|i| {
            let mut config = scenario.config.clone();
            config.seed = scenario.base_seed.wrapping_add(i);
            config.verify = true;
            config.trace_level = TraceLevel::Summary;
            let trace = run(&config)?;
            let decode_failed =
                trace.summary.completed && trace.summary.decode_verified != Some(true);
            Ok((
                trace.summary.stopping_time,
                trace.summary.conservation_violations,
                decode_failed,
            ))
        })
        .collect::<Result<_>>()?;
    let mut times = Vec::new();
    let mut conservation_violations = 0;
    let mut decode_failures = 0;
    for (time, violations, decode_failed) in summaries {
        times.push(time);
        conservation_violations += violations;
        if decode_failed {
            decode_failures += 1;
        }
    }
    Ok(ScenarioOutcome {
        name: scenario.name.clone(),
        policy: scenario.config.policy,
        model: scenario.config.model,
        n: scenario.config.n,
        k: scenario.config.k,
        q: scenario.config.field.order(),
        seeds: scenario.seeds,
        times,
        scale: scenario.scale.clone(),
        conservation_violations,
        decode_failures,
    })
}

/// Run the same scenario under the finite-memory policy and the unlimited
/// baseline with pairwise-identical seeds.
pub fn run_paired_with_baseline(
    scenario: &StoppingScenario,
) -> Result<(ScenarioOutcome, ScenarioOutcome)> {
    let fm = run_scenario(scenario)?;
    let mut baseline = scenario.clone();
    baseline.name = format!("{}[unlimited-baseline]", scenario.name);
    baseline.config.policy = MemoryPolicy::Unlimited { innovative_only: true };
    let base = run_scenario(&baseline)?;
    Ok((fm, base))
}

pub fn outcomes_table(outcomes: &[ScenarioOutcome], budget_of: &dyn Fn(&ScenarioOutcome) -> u64) -> ResultTable {
    let mut t = ResultTable::new(&[
        "scenario", "policy", "model", "n", "k", "q", "seeds", "statistic", "value", "stderr",
    ]);
    for o in outcomes {
        let budget = budget_of(o);
        let base = |stat: String, value: String| {
            vec![
                o.name.clone(),
                o.policy.to_string(),
                o.model.to_string(),
                o.n.to_string(),
                o.k.to_string(),
                o.q.to_string(),
                o.seeds.to_string(),
                stat,
                value,
                String::new(),
            ]
        };
        t.push(base("completions".into(), o.completions().to_string()));
        t.push(base("completion_rate".into(), format!("{}", o.completion_rate())));
        t.push(base("median_stopping_time".into(), format!("{}", o.median_time(budget))));
        t.push(base("p90_stopping_time".into(), format!("{}", o.p90_time(budget))));
        t.push(base("analytic_scale_kind".into(), o.scale.kind().to_string()));
        t.push(base("analytic_scale_parameters".into(), o.scale.exact_label().replace(',', ";")));
        if let Some(v) = o.scale_value() {
            t.push(base("analytic_scale_value".into(), format!("{v}")));
            t.push(base(
                "median_over_scale".into(),
                format!("{}", o.median_time(budget) / v),
            ));
        }
        t.push(base("conservation_violations".into(), o.conservation_violations.to_string()));
        t.push(base("decode_failures".into(), o.decode_failures.to_string()));
        for (i, time) in o.times.iter().enumerate() {
            t.push(base(
                format!("stopping_time[seed_offset={i}]"),
                time.map_or("-".to_string(), |v| v.to_string()),
            ));
        }
    }
    t
}

/// The connectivity-pipelining scenario: a path with every message at one
/// endpoint, s = 1, and a large field.
pub fn preset_path(n: usize, k: usize, seeds: u64, base_seed: u64) -> Result<StoppingScenario> {
    let config = SimulationConfig::new(
        n,
        k,
        FieldSpec::binary(16)?,
        MemoryPolicy::Accumulator { slots: 1 },
        TopologyPolicy::Static(DirectedGraph::path(n)?),
        Model::SyncBroadcast,
    )
    .place_all_at(0);
    Ok(StoppingScenario {
        name: format!("path{n}-k{k}"),
        config,
        seeds,
        base_seed,
        scale: AnalyticScale::Connectivity { connectivity: 1 },
    })
}

/// The complete-graph scenario: one message per node, s = 1, large field.
pub fn preset_complete(n: usize, seeds: u64, base_seed: u64) -> Result<StoppingScenario> {
    let config = SimulationConfig::new(
        n,
        n,
        FieldSpec::binary(16)?,
        MemoryPolicy::Accumulator { slots: 1 },
        TopologyPolicy::Static(DirectedGraph::complete(n)),
        Model::SyncBroadcast,
    )
    .place_one_per_node();
    Ok(StoppingScenario {
        name: format!("complete{n}"),
        config,
        seeds,
        base_seed,
        scale: AnalyticScale::Connectivity { connectivity: n - 1 },
    })
}

/// The dynamic-schedule scenario: the complete graph alternating with the
/// empty graph. H is computed by the exact windowed metric, not assumed.
pub fn preset_alternating(n: usize, seeds: u64, base_seed: u64) -> Result<StoppingScenario> {
    let k_n = DirectedGraph::complete(n);
    let empty = DirectedGraph::empty(n);
    let schedule = vec![k_n.clone(), empty.clone(), k_n.clone(), empty.clone()];
    let delta = 2;
    let h = relaxed_isoperimetric_number(&schedule, delta, 2)?;
    let config = SimulationConfig::new(
        n,
        n,
        FieldSpec::binary(16)?,
        MemoryPolicy::Accumulator { slots: 1 },
        TopologyPolicy::periodic(vec![k_n, empty])?,
        Model::SyncBroadcast,
    )
    .place_all_at(0);
    Ok(StoppingScenario {
        name: format!("alternating-complete{n}-empty"),
        config,
        seeds,
        base_seed,
        scale: AnalyticScale::RelaxedIsoperimetry { h, delta },
    })
}

/// The asynchronous single-transfer scenario: uniform complete-graph edge
/// distribution, binary coefficients, logarithmic slot count. C comes from
/// the exact min-average-cut.
pub fn preset_uniform_single_transfer(
    n: usize,
    seeds: u64,
    base_seed: u64,
) -> Result<StoppingScenario> {
    let slots = 2 * (n as f64).log2().ceil() as usize;
    let graph = DirectedGraph::complete(n);
    let cut = min_average_cut(&[EdgeDistribution::uniform_over(&graph)?], 1)?;
    let config = SimulationConfig::new(
        n,
        n,
        FieldSpec::prime(2)?,
        MemoryPolicy::Accumulator { slots },
        TopologyPolicy::Static(graph),
        Model::AsyncSingleTransfer,
    )
    .place_one_per_node();
    Ok(StoppingScenario {
        name: format!("uniform-single-transfer{n}-s{slots}"),
        config,
        seeds,
        base_seed,
        scale: AnalyticScale::AverageCut { cut },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_values() {
        let c = AnalyticScale::Connectivity { connectivity: 1 };
        assert_eq!(c.value(32, 16), Some(48.0));
        let h = AnalyticScale::RelaxedIsoperimetry { h: Rational::new(1, 2), delta: 2 };
        let v = h.value(16, 16).unwrap();
        assert!((v - ((8.0f64).ln() / 0.5 + 16.0)).abs() < 1e-12);
        let cut = AnalyticScale::AverageCut { cut: Rational::new(1, 12) };
        assert_eq!(cut.value(12, 12), Some(144.0));
    }

    #[test]
    fn preset_metrics_are_exact() {
        let alt = preset_alternating(8, 1, 0).unwrap();
        match &alt.scale {
            AnalyticScale::RelaxedIsoperimetry { h, delta } => {
                assert_eq!(*h, Rational::new(1, 2));
                assert_eq!(*delta, 2);
            }
            other => panic!("unexpected scale {other:?}"),
        }
        let cut = preset_uniform_single_transfer(12, 1, 0).unwrap();
        match &cut.scale {
            AnalyticScale::AverageCut { cut } => assert_eq!(*cut, Rational::new(1, 12)),
            other => panic!("unexpected scale {other:?}"),
        }
        assert_eq!(cut.config.policy, MemoryPolicy::Accumulator { slots: 8 });
    }

    #[test]
    fn tiny_path_campaign_completes_within_scale() {
        let mut scenario = preset_path(8, 4, 5, 100).unwrap();
        scenario.config.payload_len = 2;
        let outcome = run_scenario(&scenario).unwrap();
        assert_eq!(outcome.completion_rate(), 1.0);
        assert_eq!(outcome.conservation_violations, 0);
        assert_eq!(outcome.decode_failures, 0);
        let budget = scenario.config.round_budget;
        // pipelined spreading: about n + k rounds, certainly within 3x
        let scale = outcome.scale_value().unwrap();
        assert!(outcome.median_time(budget) <= 3.0 * scale);
    }

    #[test]
    fn paired_baseline_runs_same_seeds() {
        let scenario = preset_uniform_single_transfer(6, 4, 7).unwrap();
        let (fm, base) = run_paired_with_baseline(&scenario).unwrap();
        assert_eq!(fm.seeds, base.seeds);
        assert_eq!(base.policy, MemoryPolicy::Unlimited { innovative_only: true });
        assert_eq!(fm.completion_rate(), 1.0);
        assert_eq!(base.completion_rate(), 1.0);
    }
}
