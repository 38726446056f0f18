//! Command-line front end. Exit codes: 0 success, 1 validation or usage
//! error, 2 when a run completes but violates its analytic threshold.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fmrlnc::error::Error;
use fmrlnc::sim::run;
use fmrlnc_cli::config::{parse_config, ExperimentKind};
use fmrlnc_cli::constants::{
    AVERAGE_CUT_FACTOR, ORACLE_TV_TOLERANCE, PAIRED_BASELINE_FACTOR, STOPPING_FACTOR,
};
use fmrlnc_cli::estimators::{estimate_lemma1, estimate_lemma2, run_adversary_campaign};
use fmrlnc_cli::metrics_cmd::compute_metrics;
use fmrlnc_cli::oracle::run_oracle;
use fmrlnc_cli::stopping::{
    outcomes_table, preset_alternating, preset_complete, preset_path,
    preset_uniform_single_transfer, run_paired_with_baseline, run_scenario, AnalyticScale,
    StoppingScenario,
};
use fmrlnc_cli::table::ResultTable;

#[derive(Parser)]
#[command(
    name = "fmrlnc",
    about = "Finite-memory random linear network coding: estimators, oracles, and dynamic-network simulations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Base RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the one-transmission success probability against its bound.
    EstimateLemma1 {
        #[arg(long, default_value_t = 16)]
        q: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Slot counts for the finite-memory variants, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
        s: Vec<u32>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimate the per-reception forgetting probability against q^{-s}.
    EstimateLemma2 {
        #[arg(long, default_value_t = 4)]
        q: u64,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exhaustive enumeration oracles vs sampled implementations (q <= 3,
    /// k <= 2, s = 1).
    Oracle {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Stopping-time campaign over seeded runs.
    Stopping {
        /// Built-in scenario: path32, complete32, alternating16, or cut12.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Experiment config file with a [simulation] section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Adaptive-adversary campaign: completion rate and give-up frequency.
    Lemma3 {
        #[arg(long, default_value_t = 24)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact graph metrics for a generated graph or schedule file.
    Metrics {
        /// Graph expression like cycle(6) or schedule:PATH.
        #[arg(long)]
        target: String,
        /// Window length for the dynamic metrics.
        #[arg(long, default_value_t = 1)]
        delta: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run one simulation from a config file and write its trace.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Trace output path (JSON lines); stdout when omitted.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
}

fn emit(table: &ResultTable, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => table.write_csv(path),
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

/// Ok(true): success. Ok(false): ran fine but an analytic threshold failed.
fn dispatch(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::EstimateLemma1 { q, k, s, trials, common } => {
            let report = estimate_lemma1(q, k, &s, trials, common.seed)?;
            emit(&report.table(), common.out.as_ref())?;
            Ok(report.all_passed())
        }
        Command::EstimateLemma2 { q, s, k, trials, common } => {
            let report = estimate_lemma2(q, s, k, trials, common.seed)?;
            emit(&report.table(), common.out.as_ref())?;
            Ok(report.rows.iter().all(|r| r.within_bound))
        }
        Command::Oracle { samples, common } => {
            let report = run_oracle(samples, common.seed)?;
            emit(&report.table(), common.out.as_ref())?;
            Ok(report.max_tv() <= ORACLE_TV_TOLERANCE)
        }
        Command::Stopping { preset, config, seeds, common } => {
            let scenario: StoppingScenario = match (&preset, &config) {
                (Some(name), None) => match name.as_str() {
                    "path32" => preset_path(32, 16, seeds, common.seed)?,
                    "complete32" => preset_complete(32, seeds, common.seed)?,
                    "alternating16" => preset_alternating(16, seeds, common.seed)?,
                    "cut12" => preset_uniform_single_transfer(12, seeds, common.seed)?,
                    other => {
                        return Err(Error::validation(format!("unknown preset {other:?}")))
                    }
                },
                (None, Some(path)) => {
                    let spec = parse_config(path)?;
                    if spec.kind != ExperimentKind::Stopping {
                        return Err(Error::validation(
                            "config file is not a stopping experiment".to_string(),
                        ));
                    }
                    StoppingScenario {
                        name: path.display().to_string(),
                        config: spec.sim.expect("stopping config has a simulation section"),
                        seeds: spec.seeds,
                        base_seed: spec.seed,
                        scale: AnalyticScale::None,
                    }
                }
                _ => {
                    return Err(Error::validation(
                        "stopping needs exactly one of --preset or --config".to_string(),
                    ))
                }
            };

            let is_cut_scenario = matches!(scenario.scale, AnalyticScale::AverageCut { .. });
            let budget = scenario.config.round_budget;
            let mut ok = true;
            let outcomes = if is_cut_scenario {
                let (fm, base) = run_paired_with_baseline(&scenario)?;
                ok &= fm.completion_rate() == 1.0;
                let ratio = fm.median_time(budget) / base.median_time(budget);
                ok &= ratio <= PAIRED_BASELINE_FACTOR;
                if let Some(scale) = fm.scale_value() {
                    ok &= fm.median_time(budget) <= AVERAGE_CUT_FACTOR * scale;
                }
                vec![fm, base]
            } else {
                let outcome = run_scenario(&scenario)?;
                ok &= outcome.completion_rate() == 1.0;
                if let Some(scale) = outcome.scale_value() {
                    let mut limit = STOPPING_FACTOR * scale;
                    if let AnalyticScale::RelaxedIsoperimetry { delta, .. } = &outcome.scale {
                        limit += *delta as f64;
                    }
                    ok &= outcome.median_time(budget) <= limit;
                }
                vec![outcome]
            };
            let table = outcomes_table(&outcomes, &|_| budget);
            emit(&table, common.out.as_ref())?;
            Ok(ok)
        }
        Command::Lemma3 { n, q, s, budget, runs, common } => {
            let report = run_adversary_campaign(n, q, s, budget, runs, common.seed)?;
            emit(&report.table(), common.out.as_ref())?;
            // gate: the give-up frequency must stay within its analytic bound
            let sigma = fmrlnc_cli::stats::binomial_stderr(
                report.give_up_bound(),
                report.total_rounds(),
            );
            Ok(report.give_up_frequency() <= report.give_up_bound() + 3.0 * sigma)
        }
        Command::Metrics { target, delta, common } => {
            let table = compute_metrics(&target, delta)?;
            emit(&table, common.out.as_ref())?;
            Ok(true)
        }
        Command::Simulate { config, trace_out } => {
            let spec = parse_config(&config)?;
            if spec.kind != ExperimentKind::Simulate {
                return Err(Error::validation("config file is not a simulate experiment".to_string()));
            }
            let mut sim = spec.sim.expect("simulate config has a simulation section");
            sim.seed = spec.seed;
            let trace = run(&sim)?;
            let jsonl = trace.to_jsonl();
            match trace_out.or(spec.out) {
                Some(path) => std::fs::write(&path, jsonl).map_err(|e| {
                    Error::validation(format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{jsonl}"),
            }
            Ok(trace.summary.completed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("threshold violation: see the report for details");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
