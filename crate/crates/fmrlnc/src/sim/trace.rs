//! Trace records: line-delimited structured output with exact integers only.

use serde::Serialize;

use crate::coding::NodeState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transmission {
    pub sender: usize,
    pub receivers: Vec<usize>,
    pub mu: Vec<u64>,
    pub payload: Vec<u64>,
}

/// Per-direction classification of a round under the projection analysis:
/// a success spreads the direction across the whole frontier with no
/// forgetting, and r nodes forgetting costs r failure units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundClass {
    Success,
    Failure { units: usize },
}

impl RoundClass {
    pub fn label(&self) -> String {
        match self {
            RoundClass::Success => "success".to_string(),
            RoundClass::Failure { units } => format!("failure:{units}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub record: &'static str,
    pub round: u64,
    pub edges: Vec<(usize, usize)>,
    pub transmissions: Vec<Transmission>,
    /// Post-round knowledge bitmaps, direction-major, 0/1 per node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knowledge: Option<Vec<Vec<u8>>>,
    /// (direction index, node) pairs that forgot this round.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forgets: Option<Vec<(usize, usize)>>,
    /// Per-direction round classification labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PacketRaw {
    pub mu: Vec<u64>,
    pub payload: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeSnapshot {
    pub active: Vec<PacketRaw>,
    pub pinned: Vec<PacketRaw>,
}

impl NodeSnapshot {
    pub fn of(node: &NodeState) -> NodeSnapshot {
        let raw = |pkts: &[crate::coding::Packet]| {
            pkts.iter()
                .map(|p| PacketRaw { mu: p.mu.to_raw(), payload: p.payload.to_raw() })
                .collect()
        };
        NodeSnapshot { active: raw(node.active()), pinned: raw(node.pinned()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateRecord {
    pub record: &'static str,
    pub round: u64,
    pub nodes: Vec<NodeSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub record: &'static str,
    pub seed: u64,
    /// Rounds until every recipient could decode; absent when the budget ran
    /// out first.
    pub stopping_time: Option<u64>,
    pub completed: bool,
    pub rounds_run: u64,
    pub op_counters: Vec<u64>,
    /// The message matrix the run distributed, row per message.
    pub messages: Vec<Vec<u64>>,
    /// The instrumented directions, if any.
    pub tracked: Vec<Vec<u64>>,
    pub conservation_violations: u64,
    /// Present when verification ran at completion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode_verified: Option<bool>,
    /// Rounds in which an adaptive adversary gave up, when one was in play.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary_give_up_rounds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    pub rounds: Vec<RoundRecord>,
    pub states: Vec<StateRecord>,
    pub summary: Summary,
}

impl SimulationTrace {
    /// One JSON object per line: round records in order, interleaved state
    /// records, then the summary.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut states = self.states.iter().peekable();
        for round in &self.rounds {
            out.push_str(&serde_json::to_string(round).expect("trace records serialize"));
            out.push('\n');
            if let Some(state) = states.peek() {
                if state.round == round.round {
                    out.push_str(&serde_json::to_string(state).expect("trace records serialize"));
                    out.push('\n');
                    states.next();
                }
            }
        }
        for state in states {
            out.push_str(&serde_json::to_string(state).expect("trace records serialize"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&self.summary).expect("trace records serialize"));
        out.push('\n');
        out
    }
}
