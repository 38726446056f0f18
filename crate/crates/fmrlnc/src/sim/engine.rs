//! The round-ordered state machine that executes a communication model over
//! a topology policy and a population of nodes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coding::{sample_directions, DecodeResult, NodeState, Packet};
use crate::error::{Error, Result};
use crate::field::{FieldMatrix, FieldVector};
use crate::sim::config::{Model, SimulationConfig, TraceLevel};
use crate::sim::projection::record_projection_events;
use crate::sim::trace::{
    NodeSnapshot, RoundRecord, SimulationTrace, StateRecord, Summary, Transmission,
};
use crate::topology::{DirectedGraph, EdgeDistribution, NetworkView, TopologyPolicy};

/// Stopping predicate: every recipient's decode buffer spans F_q^k.
pub fn stopping_check(nodes: &[NodeState], recipients: &[usize], k: usize) -> bool {
    recipients.iter().all(|&v| nodes[v].buffer_rank() == k)
}

/// One synchronous broadcast round: every node emits once from its pre-round
/// state; each packet is delivered to all out-neighbors; deliveries at each
/// node are applied sequentially in a seeded-random order.
pub fn step_sync_broadcast<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    graph: &DirectedGraph,
    rng: &mut R,
    tracked: &[FieldVector],
) -> Result<Vec<Transmission>> {
    let n = nodes.len();
    let emissions: Vec<Packet> = nodes.iter_mut().map(|node| node.emit(rng)).collect();
    let mut inbox: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, v) in graph.edges() {
        inbox[v].push(u);
    }
    for (v, senders) in inbox.iter_mut().enumerate() {
        senders.shuffle(rng);
        for &u in senders.iter() {
            nodes[v].receive(emissions[u].clone(), rng, tracked)?;
        }
    }
    Ok(emissions
        .into_iter()
        .enumerate()
        .map(|(u, pkt)| Transmission {
            sender: u,
            receivers: graph.out_neighbors(u).to_vec(),
            mu: pkt.mu.to_raw(),
            payload: pkt.payload.to_raw(),
        })
        .collect())
}

/// One asynchronous broadcast round: a uniformly random node emits to all its
/// out-neighbors.
pub fn step_async_broadcast<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    graph: &DirectedGraph,
    rng: &mut R,
    tracked: &[FieldVector],
) -> Result<Vec<Transmission>> {
    let u = rng.gen_range(0..nodes.len());
    let pkt = nodes[u].emit(rng);
    let receivers = graph.out_neighbors(u).to_vec();
    for &v in &receivers {
        nodes[v].receive(pkt.clone(), rng, tracked)?;
    }
    Ok(vec![Transmission {
        sender: u,
        receivers,
        mu: pkt.mu.to_raw(),
        payload: pkt.payload.to_raw(),
    }])
}

/// One asynchronous single-transfer round: sample one edge from the round's
/// distribution and move one packet across it.
pub fn step_async_single_transfer<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    dist: &EdgeDistribution,
    rng: &mut R,
    tracked: &[FieldVector],
) -> Result<Vec<Transmission>> {
    let (u, v) = dist.sample(rng);
    let pkt = nodes[u].emit(rng);
    nodes[v].receive(pkt.clone(), rng, tracked)?;
    Ok(vec![Transmission {
        sender: u,
        receivers: vec![v],
        mu: pkt.mu.to_raw(),
        payload: pkt.payload.to_raw(),
    }])
}

/// Execute a full simulation: distribute messages, run rounds until every
/// recipient can decode or the budget runs out, and record the trace.
/// Bit-identical for identical (config, seed).
pub fn run(config: &SimulationConfig) -> Result<SimulationTrace> {
    config.validate()?;
    let spec = &config.field;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut topology = config.topology.clone();

    let messages = FieldMatrix::random(config.k, config.payload_len, spec, &mut rng);
    let recipients = config.recipients.resolve(config.n)?;

    let mut initial: Vec<Vec<(usize, FieldVector)>> = vec![Vec::new(); config.n];
    for (msg, holders) in config.placement.iter().enumerate() {
        for &node in holders {
            initial[node].push((msg, messages.row(msg).clone()));
        }
    }
    let mut nodes: Vec<NodeState> = (0..config.n)
        .map(|id| {
            NodeState::init(
                id,
                config.policy,
                &initial[id],
                config.k,
                config.payload_len,
                recipients.binary_search(&id).is_ok(),
                spec,
            )
        })
        .collect::<Result<_>>()?;

    let tracked: Vec<FieldVector> = match config.tracked_directions {
        Some(count) if config.k > 0 => {
            let max = max_directions(spec.order(), config.k);
            sample_directions(config.k, spec, count.max(config.k).min(max), &mut rng)?
        }
        _ => Vec::new(),
    };

    let mut trace = SimulationTrace {
        rounds: Vec::new(),
        states: Vec::new(),
        summary: Summary {
            record: "summary",
            seed: config.seed,
            stopping_time: None,
            completed: false,
            rounds_run: 0,
            op_counters: Vec::new(),
            messages: (0..config.k).map(|i| messages.row(i).to_raw()).collect(),
            tracked: tracked.iter().map(FieldVector::to_raw).collect(),
            conservation_violations: 0,
            decode_verified: None,
            adversary_give_up_rounds: None,
        },
    };

    if stopping_check(&nodes, &recipients, config.k) {
        trace.summary.stopping_time = Some(0);
        trace.summary.completed = true;
        finish(&mut trace, &nodes, &topology, &messages, config)?;
        return Ok(trace);
    }

    for t in 0..config.round_budget {
        let graph = {
            let view = NetworkView::new(t, &nodes);
            topology.topology_at(t, &view, &mut rng)?
        };
        let before: Vec<Vec<bool>> = knowledge_bitmaps(&nodes, &tracked);

        let transmissions = match config.model {
            Model::SyncBroadcast => step_sync_broadcast(&mut nodes, &graph, &mut rng, &tracked)?,
            Model::AsyncBroadcast => step_async_broadcast(&mut nodes, &graph, &mut rng, &tracked)?,
            Model::AsyncSingleTransfer => {
                if graph.edge_count() == 0 {
                    Vec::new()
                } else {
                    let dist = EdgeDistribution::uniform_over(&graph)?;
                    step_async_single_transfer(&mut nodes, &dist, &mut rng, &tracked)?
                }
            }
        };

        if config.verify {
            for tx in &transmissions {
                let pkt = Packet::new(
                    FieldVector::from_raw(&tx.mu),
                    FieldVector::from_raw(&tx.payload),
                );
                if !pkt.satisfies_conservation(&messages, spec)? {
                    trace.summary.conservation_violations += 1;
                }
            }
        }

        trace.summary.rounds_run = t + 1;
        if config.trace_level >= TraceLevel::Rounds {
            let after = knowledge_bitmaps(&nodes, &tracked);
            let (classes, forgets) = record_projection_events(&before, &after, &graph);
            let instrumented = !tracked.is_empty();
            trace.rounds.push(RoundRecord {
                record: "round",
                round: t,
                edges: graph.edges().collect(),
                transmissions,
                knowledge: instrumented.then(|| {
                    after
                        .iter()
                        .map(|bits| bits.iter().map(|&b| b as u8).collect())
                        .collect()
                }),
                forgets: instrumented.then_some(forgets),
                classes: instrumented
                    .then(|| classes.iter().map(|c| c.label()).collect()),
            });
            if config.trace_level >= TraceLevel::Full {
                trace.states.push(StateRecord {
                    record: "state",
                    round: t,
                    nodes: nodes.iter().map(NodeSnapshot::of).collect(),
                });
            }
        }

        if stopping_check(&nodes, &recipients, config.k) {
            trace.summary.stopping_time = Some(t + 1);
            trace.summary.completed = true;
            break;
        }
    }

    finish(&mut trace, &nodes, &topology, &messages, config)?;
    Ok(trace)
}

fn finish(
    trace: &mut SimulationTrace,
    nodes: &[NodeState],
    topology: &TopologyPolicy,
    messages: &FieldMatrix,
    config: &SimulationConfig,
) -> Result<()> {
    trace.summary.op_counters = nodes.iter().map(NodeState::op_counter).collect();
    if let TopologyPolicy::Adaptive(adv) = topology {
        trace.summary.adversary_give_up_rounds = Some(adv.give_up_rounds().to_vec());
    }
    if config.verify && trace.summary.completed {
        let mut ok = true;
        for node in nodes.iter().filter(|n| n.is_recipient()) {
            match node.decode()? {
                DecodeResult::Ready(decoded) => {
                    for (i, msg) in decoded.iter().enumerate() {
                        if msg != messages.row(i) {
                            ok = false;
                        }
                    }
                }
                DecodeResult::NotReady { rank } => {
                    return Err(Error::validation(format!(
                        "stopping reported but node {} has rank {rank}",
                        node.id()
                    )));
                }
            }
        }
        trace.summary.decode_verified = Some(ok);
    }
    Ok(())
}

fn knowledge_bitmaps(nodes: &[NodeState], tracked: &[FieldVector]) -> Vec<Vec<bool>> {
    if tracked.is_empty() {
        return Vec::new();
    }
    let per_node: Vec<Vec<bool>> = nodes.iter().map(|n| n.knowledge_bitmap(tracked)).collect();
    (0..tracked.len())
        .map(|d| per_node.iter().map(|bits| bits[d]).collect())
        .collect()
}

/// Number of nonzero directions, saturating; used to cap instrumentation.
fn max_directions(q: u64, k: usize) -> usize {
    let mut total: u128 = 1;
    for _ in 0..k {
        total = total.saturating_mul(q as u128);
        if total > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    (total - 1) as usize
}
