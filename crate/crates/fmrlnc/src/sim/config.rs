//! Simulation configuration and validation.

use crate::coding::MemoryPolicy;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::topology::TopologyPolicy;

/// Which communication model drives a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Every node emits once; each packet reaches all current out-neighbors.
    SyncBroadcast,
    /// One uniformly random node emits to all its out-neighbors.
    AsyncBroadcast,
    /// One edge sampled from a per-round distribution carries one packet.
    AsyncSingleTransfer,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Model::SyncBroadcast => "sync-broadcast",
            Model::AsyncBroadcast => "async-broadcast",
            Model::AsyncSingleTransfer => "async-single-transfer",
        };
        write!(f, "{name}")
    }
}

/// How much of a run is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TraceLevel {
    /// Only the summary record.
    Summary,
    /// Per-round graphs, transmissions, and projection events.
    Rounds,
    /// Rounds plus per-round node packet stores (for replay checks).
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipients {
    All,
    Set(Vec<usize>),
}

impl Recipients {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Recipients::All => Ok((0..n).collect()),
            Recipients::Set(set) => {
                let mut out = set.clone();
                out.sort_unstable();
                out.dedup();
                if out.iter().any(|&v| v >= n) {
                    return Err(Error::validation("recipient id out of range".to_string()));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n: usize,
    pub k: usize,
    pub payload_len: usize,
    pub field: FieldSpec,
    pub policy: MemoryPolicy,
    pub topology: TopologyPolicy,
    pub model: Model,
    /// `placement[i]` lists the nodes initially holding message i.
    pub placement: Vec<Vec<usize>>,
    pub recipients: Recipients,
    pub seed: u64,
    pub round_budget: u64,
    /// Number of directions to instrument (unit vectors plus uniform extras);
    /// `None` disables projection instrumentation.
    pub tracked_directions: Option<usize>,
    pub trace_level: TraceLevel,
    /// Check conservation of every transmitted packet and verify decoded
    /// messages against the originals on completion.
    pub verify: bool,
}

/// Default budget: an order of magnitude above the pipelined stopping-time
/// scale at desk size, so running out is a strong signal.
pub fn default_round_budget(n: usize, k: usize) -> u64 {
    50 * (n as u64 + k as u64)
}

/// Default instrumentation width: the k unit vectors plus 64 sampled
/// directions.
pub const DEFAULT_EXTRA_TRACKED: usize = 64;

impl SimulationConfig {
    /// A minimal valid configuration; callers override fields as needed.
    pub fn new(
        n: usize,
        k: usize,
        field: FieldSpec,
        policy: MemoryPolicy,
        topology: TopologyPolicy,
        model: Model,
    ) -> SimulationConfig {
        SimulationConfig {
            n,
            k,
            payload_len: 4,
            field,
            policy,
            topology,
            model,
            placement: Vec::new(),
            recipients: Recipients::All,
            seed: 0,
            round_budget: default_round_budget(n, k),
            tracked_directions: None,
            trace_level: TraceLevel::Summary,
            verify: false,
        }
    }

    /// All k messages start at one node.
    pub fn place_all_at(mut self, node: usize) -> SimulationConfig {
        self.placement = (0..self.k).map(|_| vec![node]).collect();
        self
    }

    /// Message i starts at node i (requires k <= n).
    pub fn place_one_per_node(mut self) -> SimulationConfig {
        self.placement = (0..self.k).map(|i| vec![i]).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n must be >= 1".to_string()));
        }
        if self.payload_len == 0 {
            return Err(Error::validation("payload length must be >= 1".to_string()));
        }
        if self.round_budget == 0 {
            return Err(Error::validation("round budget must be >= 1".to_string()));
        }
        self.policy.validate()?;
        if self.topology.node_count() != self.n {
            return Err(Error::validation(format!(
                "topology is over {} nodes but n = {}",
                self.topology.node_count(),
                self.n
            )));
        }
        if self.placement.len() != self.k {
            return Err(Error::validation(format!(
                "placement covers {} messages but k = {}",
                self.placement.len(),
                self.k
            )));
        }
        for (i, holders) in self.placement.iter().enumerate() {
            if holders.is_empty() {
                return Err(Error::validation(format!("message {i} is placed at no node")));
            }
            if holders.iter().any(|&v| v >= self.n) {
                return Err(Error::validation(format!("message {i} placed at an unknown node")));
            }
        }
        self.recipients.resolve(self.n)?;
        Ok(())
    }
}
