//! Exhaustive micro-oracles: exact post-event distributions computed by
//! enumerating every coefficient draw directly from the protocol's defining
//! formulas, compared against sampled distributions produced by the real
//! implementation. The enumeration here never calls into the node code, so
//! the two routes stay independent.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fmrlnc::coding::{MemoryPolicy, NodeState, Packet};
use fmrlnc::error::Result;
use fmrlnc::field::{FieldElement, FieldSpec, FieldVector};

use crate::constants::{ORACLE_SAMPLES, ORACLE_TV_TOLERANCE};
use crate::stats::total_variation;
use crate::table::ResultTable;

pub type Rational = Ratio<i64>;
/// Exact distribution over coefficient-vector outcomes.
pub type ExactDist = BTreeMap<Vec<u64>, Rational>;
/// Sampled distribution over the same outcomes.
pub type EmpiricalDist = BTreeMap<Vec<u64>, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveVariant {
    Accumulator,
    Recombinator,
}

impl ReceiveVariant {
    pub fn label(&self) -> &'static str {
        match self {
            ReceiveVariant::Accumulator => "accumulator",
            ReceiveVariant::Recombinator => "recombinator",
        }
    }

    pub fn policy(&self, slots: usize) -> MemoryPolicy {
        match self {
            ReceiveVariant::Accumulator => MemoryPolicy::Accumulator { slots },
            ReceiveVariant::Recombinator => MemoryPolicy::Recombinator { slots },
        }
    }
}

/// Exact emission distribution from the given generators: every coefficient
/// tuple alpha in F_q^m contributes the combination sum alpha_i * g_i with
/// probability q^{-m}.
pub fn enumerate_emission(generators: &[FieldVector], spec: &FieldSpec) -> ExactDist {
    let q = spec.order();
    let m = generators.len();
    let total = (q as i64).pow(m as u32);
    let mut dist = ExactDist::new();
    let mut coeffs = vec![0u64; m];
    loop {
        let mut acc = FieldVector::zeros(generators.first().map_or(0, FieldVector::len));
        for (c, g) in coeffs.iter().zip(generators) {
            acc.axpy(FieldElement(*c), g, spec).expect("equal lengths");
        }
        *dist.entry(acc.to_raw()).or_insert_with(Rational::zero) += Rational::new(1, total);
        if !odometer(&mut coeffs, q) {
            return dist;
        }
    }
}

/// Exact post-reception distribution of the single active slot at s = 1.
/// Accumulator: slot + alpha * pkt over uniform alpha. Recombinator: the slot
/// is replaced by beta_1 * slot + beta_2 * pkt over uniform (beta_1, beta_2).
pub fn enumerate_receive_s1(
    variant: ReceiveVariant,
    stored: &FieldVector,
    incoming: &FieldVector,
    spec: &FieldSpec,
) -> ExactDist {
    let q = spec.order();
    let mut dist = ExactDist::new();
    match variant {
        ReceiveVariant::Accumulator => {
            for alpha in 0..q {
                let mut slot = stored.clone();
                slot.axpy(FieldElement(alpha), incoming, spec).expect("equal lengths");
                *dist.entry(slot.to_raw()).or_insert_with(Rational::zero) +=
                    Rational::new(1, q as i64);
            }
        }
        ReceiveVariant::Recombinator => {
            for beta1 in 0..q {
                for beta2 in 0..q {
                    let mut slot = FieldVector::zeros(stored.len());
                    slot.axpy(FieldElement(beta1), stored, spec).expect("equal lengths");
                    slot.axpy(FieldElement(beta2), incoming, spec).expect("equal lengths");
                    *dist.entry(slot.to_raw()).or_insert_with(Rational::zero) +=
                        Rational::new(1, (q * q) as i64);
                }
            }
        }
    }
    dist
}

/// Sample the emission distribution through the real node implementation.
pub fn sample_emission(
    generators: &[FieldVector],
    spec: &FieldSpec,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<EmpiricalDist> {
    let k = generators.first().map_or(0, FieldVector::len);
    let mut node = NodeState::init(
        0,
        MemoryPolicy::Unlimited { innovative_only: false },
        &[],
        k,
        1,
        false,
        spec,
    )?;
    node.set_active_for_test(
        generators.iter().map(|g| Packet::new(g.clone(), FieldVector::zeros(1))).collect(),
    );
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for _ in 0..samples {
        let pkt = node.emit(rng);
        *counts.entry(pkt.mu.to_raw()).or_insert(0) += 1;
    }
    Ok(to_frequencies(counts, samples))
}

/// Sample the s = 1 post-reception slot distribution through the real node
/// implementation.
pub fn sample_receive_s1(
    variant: ReceiveVariant,
    stored: &FieldVector,
    incoming: &FieldVector,
    spec: &FieldSpec,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<EmpiricalDist> {
    let k = stored.len();
    let mut node = NodeState::init(0, variant.policy(1), &[], k, 1, false, spec)?;
    let incoming_pkt = Packet::new(incoming.clone(), FieldVector::zeros(1));
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for _ in 0..samples {
        node.set_active_for_test(vec![Packet::new(stored.clone(), FieldVector::zeros(1))]);
        node.receive(incoming_pkt.clone(), rng, &[])?;
        *counts.entry(node.active()[0].mu.to_raw()).or_insert(0) += 1;
    }
    Ok(to_frequencies(counts, samples))
}

fn to_frequencies(counts: BTreeMap<Vec<u64>, u64>, samples: u64) -> EmpiricalDist {
    counts.into_iter().map(|(k, c)| (k, c as f64 / samples as f64)).collect()
}

fn odometer(coeffs: &mut [u64], q: u64) -> bool {
    for c in coeffs.iter_mut() {
        *c += 1;
        if *c < q {
            return true;
        }
        *c = 0;
    }
    false
}

pub fn exact_to_f64(dist: &ExactDist) -> EmpiricalDist {
    dist.iter().map(|(k, p)| (k.clone(), p.to_f64().expect("small rationals"))).collect()
}

/// Total variation between two exact distributions, as an exact rational.
pub fn exact_tv(a: &ExactDist, b: &ExactDist) -> Rational {
    let mut keys: Vec<&Vec<u64>> = a.keys().collect();
    for k in b.keys() {
        if !a.contains_key(k) {
            keys.push(k);
        }
    }
    let mass = |d: &ExactDist, k: &Vec<u64>| d.get(k).copied().unwrap_or_else(Rational::zero);
    let mut sum = Rational::zero();
    for k in keys {
        let diff = mass(a, k) - mass(b, k);
        sum += if diff < Rational::zero() { -diff } else { diff };
    }
    sum / Rational::new(2, 1)
}

fn dist_label(dist: &ExactDist) -> String {
    let parts: Vec<String> = dist
        .iter()
        .map(|(k, p)| {
            let coords: Vec<String> = k.iter().map(u64::to_string).collect();
            format!("[{}]={}/{}", coords.join(";"), p.numer(), p.denom())
        })
        .collect();
    parts.join(" ")
}

#[derive(Debug, Clone)]
pub struct OracleCase {
    pub name: String,
    pub q: u64,
    pub k: usize,
    pub policy: String,
    pub exact: ExactDist,
    pub empirical: EmpiricalDist,
    pub tv: f64,
}

#[derive(Debug, Clone)]
pub struct EquivalenceCase {
    pub name: String,
    pub q: u64,
    pub k: usize,
    /// Exact total variation between the accumulator and recombinator
    /// post-reception distributions.
    pub tv_exact: Rational,
}

#[derive(Debug, Clone)]
pub struct MicroSuccessCase {
    pub receiver: &'static str,
    pub q: u64,
    /// Exact per-transmission success probability from enumeration.
    pub exact: Rational,
    pub empirical: f64,
}

#[derive(Debug)]
pub struct OracleReport {
    pub cases: Vec<OracleCase>,
    pub equivalence: Vec<EquivalenceCase>,
    pub micro: Vec<MicroSuccessCase>,
    pub samples: u64,
}

impl OracleReport {
    pub fn max_tv(&self) -> f64 {
        self.cases.iter().map(|c| c.tv).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_tv() <= ORACLE_TV_TOLERANCE
    }

    pub fn table(&self) -> ResultTable {
        let mut t =
            ResultTable::new(&["scenario", "policy", "q", "k", "statistic", "value", "stderr"]);
        for c in &self.cases {
            let base = |stat: &str, value: String| {
                vec![c.name.clone(), c.policy.clone(), c.q.to_string(), c.k.to_string(), stat.to_string(), value, String::new()]
            };
            t.push(base("samples", self.samples.to_string()));
            t.push(base("support", c.exact.len().to_string()));
            t.push(base("exact_distribution", dist_label(&c.exact)));
            t.push(base("tv_empirical_vs_exact", format!("{:.6}", c.tv)));
        }
        for e in &self.equivalence {
            t.push(vec![
                e.name.clone(),
                "accumulator-vs-recombinator".to_string(),
                e.q.to_string(),
                e.k.to_string(),
                "tv_exact_vs_exact".to_string(),
                format!("{}/{}", e.tv_exact.numer(), e.tv_exact.denom()),
                String::new(),
            ]);
        }
        for m in &self.micro {
            t.push(vec![
                format!("one-transmission[{}]", m.receiver),
                "accumulator".to_string(),
                m.q.to_string(),
                "1".to_string(),
                "success_probability".to_string(),
                format!("{}/{} (empirical {:.6})", m.exact.numer(), m.exact.denom(), m.empirical),
                String::new(),
            ]);
        }
        t
    }
}

/// Exact one-transmission success probability for the q=2, k=1, s=1 micro
/// scenario, enumerated over the sender's emit coefficient and the receiver's
/// mix coefficient. `stored` is the receiver's slot, or None for an empty
/// receiver (fill path, no mix coefficient).
pub fn enumerate_micro_success(stored: Option<u64>, spec: &FieldSpec) -> Rational {
    let q = spec.order();
    let sender = FieldVector::from_raw(&[1]);
    let mut hits = 0i64;
    let mut total = 0i64;
    for alpha in 0..q {
        let mut pkt = FieldVector::zeros(1);
        pkt.axpy(FieldElement(alpha), &sender, spec).unwrap();
        match stored {
            None => {
                // fill path: the packet becomes the slot verbatim
                total += 1;
                if !pkt.is_zero() {
                    hits += 1;
                }
            }
            Some(c) => {
                for beta in 0..q {
                    let mut slot = FieldVector::from_raw(&[c]);
                    slot.axpy(FieldElement(beta), &pkt, spec).unwrap();
                    total += 1;
                    if !slot.is_zero() {
                        hits += 1;
                    }
                }
            }
        }
    }
    Rational::new(hits, total)
}

fn sample_micro_success(
    stored: Option<u64>,
    spec: &FieldSpec,
    samples: u64,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut sender = NodeState::init(
        0,
        MemoryPolicy::Unlimited { innovative_only: false },
        &[],
        1,
        1,
        false,
        spec,
    )?;
    sender.set_active_for_test(vec![Packet::new(
        FieldVector::from_raw(&[1]),
        FieldVector::zeros(1),
    )]);
    let mut receiver = NodeState::init(1, MemoryPolicy::Accumulator { slots: 1 }, &[], 1, 1, false, spec)?;
    let mu = FieldVector::from_raw(&[1]);
    let mut hits = 0u64;
    for _ in 0..samples {
        match stored {
            None => receiver.set_active_for_test(Vec::new()),
            Some(c) => receiver.set_active_for_test(vec![Packet::new(
                FieldVector::from_raw(&[c]),
                FieldVector::zeros(1),
            )]),
        }
        let pkt = sender.emit(rng);
        receiver.receive(pkt, rng, &[])?;
        if receiver.knows(&mu)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

/// Run the whole oracle catalog: emissions and s = 1 receptions for q in
/// {2, 3} and k in {1, 2}, each policy, exact vs sampled, plus the exact
/// accumulator/recombinator comparison and the one-transmission micro cases.
pub fn run_oracle(samples: u64, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    let mut equivalence = Vec::new();

    for q in [2u64, 3] {
        let spec = FieldSpec::for_order(q)?;
        for k in [1usize, 2] {
            let e1 = FieldVector::unit(k, 0);
            let mut emit_scenarios: Vec<(String, Vec<FieldVector>)> = vec![
                (format!("emit-single[q={q};k={k}]"), vec![e1.clone()]),
                (format!("emit-source-copy[q={q};k={k}]"), vec![e1.clone(), e1.clone()]),
            ];
            if k == 2 {
                emit_scenarios.push((
                    format!("emit-pair[q={q};k={k}]"),
                    vec![FieldVector::unit(2, 0), FieldVector::unit(2, 1)],
                ));
            }
            for (name, gens) in emit_scenarios {
                let exact = enumerate_emission(&gens, &spec);
                let empirical = sample_emission(&gens, &spec, samples, &mut rng)?;
                let tv = total_variation(&exact_to_f64(&exact), &empirical);
                cases.push(OracleCase {
                    name,
                    q,
                    k,
                    policy: "span-combination".to_string(),
                    exact,
                    empirical,
                    tv,
                });
            }

            let mut receive_scenarios: Vec<(String, FieldVector, FieldVector)> = vec![
                (format!("receive-parallel[q={q};k={k}]"), e1.clone(), e1.clone()),
                (format!("receive-zero-slot[q={q};k={k}]"), FieldVector::zeros(k), e1.clone()),
            ];
            if k == 2 {
                receive_scenarios.push((
                    format!("receive-independent[q={q};k={k}]"),
                    FieldVector::unit(2, 0),
                    FieldVector::unit(2, 1),
                ));
            }
            for (name, stored, incoming) in receive_scenarios {
                let mut exact_by_variant = Vec::new();
                for variant in [ReceiveVariant::Accumulator, ReceiveVariant::Recombinator] {
                    let exact = enumerate_receive_s1(variant, &stored, &incoming, &spec);
                    let empirical =
                        sample_receive_s1(variant, &stored, &incoming, &spec, samples, &mut rng)?;
                    let tv = total_variation(&exact_to_f64(&exact), &empirical);
                    exact_by_variant.push(exact.clone());
                    cases.push(OracleCase {
                        name: name.clone(),
                        q,
                        k,
                        policy: variant.label().to_string(),
                        exact,
                        empirical,
                        tv,
                    });
                }
                equivalence.push(EquivalenceCase {
                    name: name.clone(),
                    q,
                    k,
                    tv_exact: exact_tv(&exact_by_variant[0], &exact_by_variant[1]),
                });
            }
        }
    }

    // one-transmission micro scenarios at q = 2, k = 1, s = 1
    let spec2 = FieldSpec::for_order(2)?;
    let micro_samples = samples.min(200_000);
    let mut micro = Vec::new();
    for (receiver, stored) in
        [("knowing-slot", Some(1u64)), ("zero-slot", Some(0)), ("empty", None)]
    {
        let exact = enumerate_micro_success(stored, &spec2);
        let empirical = sample_micro_success(stored, &spec2, micro_samples, &mut rng)?;
        micro.push(MicroSuccessCase { receiver, q: 2, exact, empirical });
    }

    Ok(OracleReport { cases, equivalence, micro, samples })
}

/// Default sample count from the acceptance contract.
pub fn default_samples() -> u64 {
    ORACLE_SAMPLES
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> FieldSpec {
        FieldSpec::for_order(q).unwrap()
    }

    #[test]
    fn emission_from_single_slot_is_fair_over_multiples() {
        let spec = gf(2);
        let dist = enumerate_emission(&[FieldVector::from_raw(&[1, 0])], &spec);
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[&vec![0, 0]], Rational::new(1, 2));
        assert_eq!(dist[&vec![1, 0]], Rational::new(1, 2));
    }

    #[test]
    fn accumulator_s1_exact_distribution_matches_hand_computation() {
        let spec = gf(2);
        let dist = enumerate_receive_s1(
            ReceiveVariant::Accumulator,
            &FieldVector::from_raw(&[1, 0]),
            &FieldVector::from_raw(&[0, 1]),
            &spec,
        );
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[&vec![1, 0]], Rational::new(1, 2));
        assert_eq!(dist[&vec![1, 1]], Rational::new(1, 2));
    }

    #[test]
    fn recombinator_s1_exact_distribution_is_uniform_over_the_plane() {
        let spec = gf(2);
        let dist = enumerate_receive_s1(
            ReceiveVariant::Recombinator,
            &FieldVector::from_raw(&[1, 0]),
            &FieldVector::from_raw(&[0, 1]),
            &spec,
        );
        assert_eq!(dist.len(), 4);
        for p in dist.values() {
            assert_eq!(*p, Rational::new(1, 4));
        }
    }

    #[test]
    fn variants_coincide_exactly_when_the_span_is_one_dimensional() {
        for q in [2u64, 3] {
            let spec = gf(q);
            // parallel vectors
            let a = enumerate_receive_s1(
                ReceiveVariant::Accumulator,
                &FieldVector::from_raw(&[1]),
                &FieldVector::from_raw(&[1]),
                &spec,
            );
            let r = enumerate_receive_s1(
                ReceiveVariant::Recombinator,
                &FieldVector::from_raw(&[1]),
                &FieldVector::from_raw(&[1]),
                &spec,
            );
            assert_eq!(exact_tv(&a, &r), Rational::zero(), "parallel case at q={q}");
            // zero stored slot
            let a = enumerate_receive_s1(
                ReceiveVariant::Accumulator,
                &FieldVector::from_raw(&[0, 0]),
                &FieldVector::from_raw(&[1, 1]),
                &spec,
            );
            let r = enumerate_receive_s1(
                ReceiveVariant::Recombinator,
                &FieldVector::from_raw(&[0, 0]),
                &FieldVector::from_raw(&[1, 1]),
                &spec,
            );
            assert_eq!(exact_tv(&a, &r), Rational::zero(), "zero-slot case at q={q}");
        }
    }

    #[test]
    fn variants_differ_on_independent_vectors() {
        let spec = gf(2);
        let a = enumerate_receive_s1(
            ReceiveVariant::Accumulator,
            &FieldVector::from_raw(&[1, 0]),
            &FieldVector::from_raw(&[0, 1]),
            &spec,
        );
        let r = enumerate_receive_s1(
            ReceiveVariant::Recombinator,
            &FieldVector::from_raw(&[1, 0]),
            &FieldVector::from_raw(&[0, 1]),
            &spec,
        );
        assert_eq!(exact_tv(&a, &r), Rational::new(1, 2));
    }

    #[test]
    fn micro_success_probabilities() {
        let spec = gf(2);
        // receiver already knowing: fails only when both coefficients are 1
        assert_eq!(enumerate_micro_success(Some(1), &spec), Rational::new(3, 4));
        // zero slot: needs both coefficients nonzero
        assert_eq!(enumerate_micro_success(Some(0), &spec), Rational::new(1, 4));
        // empty receiver: fill path, needs a nonzero packet
        assert_eq!(enumerate_micro_success(None, &spec), Rational::new(1, 2));
    }

    #[test]
    fn sampled_distributions_match_exact_at_small_scale() {
        let report = run_oracle(40_000, 7).unwrap();
        for case in &report.cases {
            assert!(case.tv < 0.02, "{}/{}: tv {}", case.name, case.policy, case.tv);
        }
        for m in &report.micro {
            let exact = m.exact.to_f64().unwrap();
            assert!(
                (m.empirical - exact).abs() < 0.02,
                "{}: empirical {} vs exact {exact}",
                m.receiver,
                m.empirical
            );
        }
    }
}
