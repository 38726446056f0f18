//! Per-node protocol state: the active-packet store under a memory policy,
//! pinned source packets, and the decode buffer of recipients.

use rand::Rng;

use crate::coding::packet::{make_source_packet, Packet};
use crate::error::{Error, Result};
use crate::field::{Echelon, FieldMatrix, FieldSpec, FieldVector};

/// What a node keeps in active memory.
///
/// `Unlimited` is the classic protocol: every received packet stays active
/// (optionally deduplicated to a spanning basis). The finite variants keep `s`
/// slots and fold receptions into them: the accumulator adds a random multiple
/// of the incoming packet to each slot, the recombinator regenerates all slots
/// as fresh uniform combinations of the stored packets and the incoming one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryPolicy {
    Unlimited { innovative_only: bool },
    Accumulator { slots: usize },
    Recombinator { slots: usize },
}

impl MemoryPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            MemoryPolicy::Unlimited { .. } => Ok(()),
            MemoryPolicy::Accumulator { slots } | MemoryPolicy::Recombinator { slots } => {
                if *slots >= 1 {
                    Ok(())
                } else {
                    Err(Error::validation("finite memory policies require s >= 1".to_string()))
                }
            }
        }
    }

    pub fn slots(&self) -> Option<usize> {
        match self {
            MemoryPolicy::Unlimited { .. } => None,
            MemoryPolicy::Accumulator { slots } | MemoryPolicy::Recombinator { slots } => {
                Some(*slots)
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slots().is_some()
    }
}

impl std::fmt::Display for MemoryPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MemoryPolicy::Unlimited { innovative_only: false } => write!(f, "unlimited"),
            MemoryPolicy::Unlimited { innovative_only: true } => write!(f, "unlimited-basis"),
            MemoryPolicy::Accumulator { slots } => write!(f, "accumulator({slots})"),
            MemoryPolicy::Recombinator { slots } => write!(f, "recombinator({slots})"),
        }
    }
}

/// Knowledge deltas over a tracked direction set caused by one reception,
/// plus the number of active slots the reception touched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReceiveOutcome {
    /// Indices (into the tracked set) of directions newly known.
    pub learned: Vec<usize>,
    /// Indices of directions that were known before and are not anymore.
    pub forgotten: Vec<usize>,
    pub slots_touched: usize,
}

/// Recipient-side store of innovative packets with an incrementally
/// maintained echelon basis over their coefficient vectors.
#[derive(Debug, Clone)]
pub struct DecodeBuffer {
    packets: Vec<Packet>,
    echelon: Echelon,
}

impl DecodeBuffer {
    fn new(k: usize) -> DecodeBuffer {
        DecodeBuffer { packets: Vec::new(), echelon: Echelon::new(k) }
    }

    /// Keep the packet iff it increases the rank of the stored span.
    fn insert(&mut self, pkt: Packet, spec: &FieldSpec) -> bool {
        if self.echelon.insert(&pkt.mu, spec) {
            self.packets.push(pkt);
            true
        } else {
            false
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon.rank()
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }
}

/// Result of asking a recipient to decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeResult {
    /// The k original messages, in message order.
    Ready(Vec<FieldVector>),
    NotReady { rank: usize },
}

/// A protocol participant: id, active store, pinned source packets, and (for
/// recipients) the decode buffer. Pinned packets live outside the s slots,
/// are never modified, and participate in both emission and knowledge, so a
/// direction served by a source can never be lost network-wide.
#[derive(Debug, Clone)]
pub struct NodeState {
    id: usize,
    k: usize,
    payload_len: usize,
    policy: MemoryPolicy,
    spec: FieldSpec,
    active: Vec<Packet>,
    pinned: Vec<Packet>,
    /// Basis filter for `Unlimited { innovative_only: true }`.
    active_basis: Option<Echelon>,
    decode_buffer: Option<DecodeBuffer>,
    op_counter: u64,
}

impl NodeState {
    /// Set up a node holding the given initial messages, each pinned as a
    /// source packet. Active memory starts with copies of the pinned packets
    /// (up to s for finite policies); recipients also seed their decode
    /// buffer with them.
    pub fn init(
        id: usize,
        policy: MemoryPolicy,
        initial_messages: &[(usize, FieldVector)],
        k: usize,
        payload_len: usize,
        is_recipient: bool,
        spec: &FieldSpec,
    ) -> Result<NodeState> {
        policy.validate()?;
        let mut seen = std::collections::HashSet::new();
        for (index, message) in initial_messages {
            if !seen.insert(*index) {
                return Err(Error::validation(format!(
                    "node {id}: duplicate initial message index {index}"
                )));
            }
            if message.len() != payload_len {
                return Err(Error::validation(format!(
                    "node {id}: message {index} has length {} instead of {payload_len}",
                    message.len()
                )));
            }
        }
        let pinned: Vec<Packet> = initial_messages
            .iter()
            .map(|(index, message)| make_source_packet(*index, message, k))
            .collect::<Result<_>>()?;

        let mut node = NodeState {
            id,
            k,
            payload_len,
            policy,
            spec: spec.clone(),
            active: Vec::new(),
            pinned,
            active_basis: match policy {
                MemoryPolicy::Unlimited { innovative_only: true } => Some(Echelon::new(k)),
                _ => None,
            },
            decode_buffer: is_recipient.then(|| DecodeBuffer::new(k)),
            op_counter: 0,
        };

        let copy_limit = node.policy.slots().unwrap_or(node.pinned.len());
        for pkt in node.pinned.clone().iter().take(copy_limit) {
            match &mut node.active_basis {
                Some(basis) => {
                    if basis.insert(&pkt.mu, spec) {
                        node.active.push(pkt.clone());
                    }
                }
                None => node.active.push(pkt.clone()),
            }
        }
        if let Some(buffer) = &mut node.decode_buffer {
            for pkt in node.pinned.clone() {
                buffer.insert(pkt, spec);
            }
        }
        Ok(node)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn coeff_len(&self) -> usize {
        self.k
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn policy(&self) -> MemoryPolicy {
        self.policy
    }

    pub fn active(&self) -> &[Packet] {
        &self.active
    }

    pub fn pinned(&self) -> &[Packet] {
        &self.pinned
    }

    pub fn is_recipient(&self) -> bool {
        self.decode_buffer.is_some()
    }

    pub fn decode_buffer(&self) -> Option<&DecodeBuffer> {
        self.decode_buffer.as_ref()
    }

    /// Rank of the decode buffer; 0 for non-recipients.
    pub fn buffer_rank(&self) -> usize {
        self.decode_buffer.as_ref().map_or(0, DecodeBuffer::rank)
    }

    /// Tally of packet-slot touches by emissions and receptions.
    pub fn op_counter(&self) -> u64 {
        self.op_counter
    }

    /// Test hook: overwrite the active store directly.
    pub fn set_active_for_test(&mut self, packets: Vec<Packet>) {
        self.active = packets;
    }

    /// Emit one packet: a combination of all active and pinned packets with
    /// fresh independent uniform coefficients (zero included, so the zero
    /// packet is a legal emission). A node with nothing stored emits the zero
    /// packet.
    pub fn emit<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Packet {
        let mut out = Packet::zero(self.k, self.payload_len);
        let combined = self.pinned.len() + self.active.len();
        for pkt in self.pinned.iter().chain(self.active.iter()) {
            let alpha = self.spec.sample_element(rng);
            out.mu.axpy(alpha, &pkt.mu, &self.spec).expect("dimensions fixed at init");
            out.payload.axpy(alpha, &pkt.payload, &self.spec).expect("dimensions fixed at init");
        }
        self.op_counter += combined as u64;
        out
    }

    /// Fold one received packet into this node.
    ///
    /// Recipients append to the decode buffer first; then the memory policy
    /// runs. Finite policies fill an empty slot verbatim on first receptions
    /// and only start mixing once the slots are full. `tracked` directions
    /// are diffed before/after to report learn and forget events.
    pub fn receive<R: Rng + ?Sized>(
        &mut self,
        pkt: Packet,
        rng: &mut R,
        tracked: &[FieldVector],
    ) -> Result<ReceiveOutcome> {
        if pkt.coeff_len() != self.k || pkt.payload_len() != self.payload_len {
            return Err(Error::validation(format!(
                "packet dimensions ({}, {}) do not match node dimensions ({}, {})",
                pkt.coeff_len(),
                pkt.payload_len(),
                self.k,
                self.payload_len
            )));
        }
        let before: Vec<bool> =
            tracked.iter().map(|mu| self.knows_unchecked(mu)).collect();

        if let Some(buffer) = &mut self.decode_buffer {
            buffer.insert(pkt.clone(), &self.spec);
        }

        let slots_touched = match self.policy {
            MemoryPolicy::Unlimited { innovative_only } => {
                match &mut self.active_basis {
                    Some(basis) if innovative_only => {
                        if basis.insert(&pkt.mu, &self.spec) {
                            self.active.push(pkt);
                        }
                    }
                    _ => self.active.push(pkt),
                }
                self.active.len()
            }
            MemoryPolicy::Accumulator { slots } => {
                if self.active.len() < slots && !pkt.is_zero() {
                    self.active.push(pkt);
                    1
                } else {
                    for slot in self.active.iter_mut() {
                        let alpha = self.spec.sample_element(rng);
                        slot.axpy(alpha, &pkt, &self.spec)?;
                    }
                    self.active.len()
                }
            }
            MemoryPolicy::Recombinator { slots } => {
                if self.active.len() < slots && !pkt.is_zero() {
                    self.active.push(pkt);
                    1
                } else {
                    let generators: Vec<&Packet> =
                        self.active.iter().chain(std::iter::once(&pkt)).collect();
                    let mut fresh = Vec::with_capacity(self.active.len());
                    for _ in 0..self.active.len() {
                        let mut slot = Packet::zero(self.k, self.payload_len);
                        for g in &generators {
                            let alpha = self.spec.sample_element(rng);
                            slot.axpy(alpha, g, &self.spec)?;
                        }
                        fresh.push(slot);
                    }
                    let touched = self.active.len();
                    self.active = fresh;
                    touched
                }
            }
        };
        self.op_counter += slots_touched as u64;

        let mut outcome = ReceiveOutcome { slots_touched, ..Default::default() };
        for (i, mu) in tracked.iter().enumerate() {
            let after = self.knows_unchecked(mu);
            match (before[i], after) {
                (false, true) => outcome.learned.push(i),
                (true, false) => outcome.forgotten.push(i),
                _ => {}
            }
        }
        Ok(outcome)
    }

    /// Projection predicate: the node knows direction `mu` iff some active or
    /// pinned packet has a coefficient vector not orthogonal to `mu`.
    pub fn knows(&self, mu: &FieldVector) -> Result<bool> {
        if mu.len() != self.k {
            return Err(Error::validation(format!(
                "direction length {} does not match k={}",
                mu.len(),
                self.k
            )));
        }
        if mu.is_zero() {
            return Err(Error::validation(
                "knowledge is undefined for the zero direction".to_string(),
            ));
        }
        Ok(self.knows_unchecked(mu))
    }

    fn knows_unchecked(&self, mu: &FieldVector) -> bool {
        self.pinned
            .iter()
            .chain(self.active.iter())
            .any(|p| !p.mu.dot(mu, &self.spec).expect("dimensions fixed at init").is_zero())
    }

    /// Knowledge bitmap over a tracked direction set.
    pub fn knowledge_bitmap(&self, tracked: &[FieldVector]) -> Vec<bool> {
        tracked.iter().map(|mu| self.knows_unchecked(mu)).collect()
    }

    /// Recover the original messages once the decode buffer spans F_q^k.
    pub fn decode(&self) -> Result<DecodeResult> {
        let Some(buffer) = &self.decode_buffer else {
            return Err(Error::usage(format!("node {} is not a recipient", self.id)));
        };
        let rank = buffer.rank();
        if rank < self.k {
            return Ok(DecodeResult::NotReady { rank });
        }
        let coeffs =
            FieldMatrix::from_rows(buffer.packets.iter().map(|p| p.mu.clone()).collect())?;
        let payloads =
            FieldMatrix::from_rows(buffer.packets.iter().map(|p| p.payload.clone()).collect())?;
        let solved = coeffs.solve(&payloads, &self.spec)?;
        Ok(DecodeResult::Ready(solved.rows().to_vec()))
    }
}
