//! Simulation engine: communication models, stopping detection, traces.

mod config;
mod engine;
mod projection;
mod trace;

pub use config::{
    default_round_budget, Model, Recipients, SimulationConfig, TraceLevel, DEFAULT_EXTRA_TRACKED,
};
pub use engine::{
    run, step_async_broadcast, step_async_single_transfer, step_sync_broadcast, stopping_check,
};
pub use projection::record_projection_events;
pub use trace::{
    NodeSnapshot, PacketRaw, RoundClass, RoundRecord, SimulationTrace, StateRecord, Summary,
    Transmission,
};
