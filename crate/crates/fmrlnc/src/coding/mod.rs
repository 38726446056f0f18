//! Packet representation, memory policies, and per-node protocol state.

mod directions;
mod node;
mod packet;

pub use directions::sample_directions;
pub use node::{DecodeBuffer, DecodeResult, MemoryPolicy, NodeState, ReceiveOutcome};
pub use packet::{make_source_packet, Packet};
