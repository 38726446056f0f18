//! Experiment harness for the fmrlnc library: Monte Carlo estimators,
//! exhaustive micro-oracles, stopping-time campaigns, graph metrics, and the
//! CSV report format shared by all of them.

pub mod config;
pub mod constants;
pub mod estimators;
pub mod metrics_cmd;
pub mod oracle;
pub mod stats;
pub mod stopping;
pub mod table;
