//! Monte Carlo estimators for the per-transmission success probability and
//! the per-reception forgetting probability, plus the adaptive-adversary
//! campaign.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fmrlnc::coding::{MemoryPolicy, NodeState, Packet};
use fmrlnc::error::{Error, Result};
use fmrlnc::field::{FieldSpec, FieldVector};
use fmrlnc::sim::{run, Model, SimulationConfig, TraceLevel};
use fmrlnc::topology::{IsolatingAdversary, TopologyPolicy};

use crate::constants::TOLERANCE_SIGMAS;
use crate::stats::{binomial_stderr, median};
use crate::table::ResultTable;

pub type Rational = Ratio<i64>;

fn rational_pow(base: Rational, exp: u32) -> Rational {
    let mut out = Rational::new(1, 1);
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// 1 - 1/q as an exact rational.
fn success_bound_unlimited(q: u64) -> Rational {
    Rational::new(q as i64 - 1, q as i64)
}

/// (1 - 1/q)(1 - 1/q^s) as an exact rational.
fn success_bound_finite(q: u64, s: u32) -> Rational {
    let qs = rational_pow(Rational::new(1, q as i64), s);
    success_bound_unlimited(q) * (Rational::new(1, 1) - qs)
}

/// q^{-s} as an exact rational.
fn forget_bound(q: u64, s: u32) -> Rational {
    rational_pow(Rational::new(1, q as i64), s)
}

fn random_nonzero_direction(k: usize, spec: &FieldSpec, rng: &mut ChaCha8Rng) -> FieldVector {
    loop {
        let v = FieldVector::random(k, spec, rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Basis of the hyperplane orthogonal to `mu`: pick the pivot coordinate p
/// with mu_p != 0; the k-1 vectors e_j - (mu_j / mu_p) e_p span it.
fn orthogonal_basis(mu: &FieldVector, spec: &FieldSpec) -> Vec<FieldVector> {
    let k = mu.len();
    let pivot = (0..k).find(|&i| !mu.get(i).is_zero()).expect("mu is nonzero");
    let inv = spec.inv(mu.get(pivot)).expect("pivot nonzero");
    (0..k)
        .filter(|&j| j != pivot)
        .map(|j| {
            let mut v = FieldVector::unit(k, j);
            let factor = spec.neg(spec.mul(mu.get(j), inv));
            v.set(pivot, factor);
            v
        })
        .collect()
}

/// Uniform vector from the hyperplane orthogonal to `mu`.
fn random_orthogonal(mu: &FieldVector, spec: &FieldSpec, rng: &mut ChaCha8Rng) -> FieldVector {
    let basis = orthogonal_basis(mu, spec);
    let mut v = FieldVector::zeros(mu.len());
    for b in &basis {
        v.axpy(spec.sample_element(rng), b, spec).expect("equal lengths");
    }
    v
}

fn random_non_orthogonal(mu: &FieldVector, spec: &FieldSpec, rng: &mut ChaCha8Rng) -> FieldVector {
    loop {
        let v = FieldVector::random(mu.len(), spec, rng);
        if !v.dot(mu, spec).expect("equal lengths").is_zero() {
            return v;
        }
    }
}

fn packets(vs: Vec<FieldVector>) -> Vec<Packet> {
    vs.into_iter().map(|v| Packet::new(v, FieldVector::zeros(1))).collect()
}

#[derive(Debug, Clone)]
pub struct Lemma1Row {
    pub policy: MemoryPolicy,
    pub s: u32,
    pub trials: u64,
    pub successes: u64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: Rational,
    /// empirical >= bound - TOLERANCE_SIGMAS * stderr(bound)
    pub passed: bool,
}

#[derive(Debug)]
pub struct Lemma1Report {
    pub q: u64,
    pub k: usize,
    pub seed: u64,
    pub rows: Vec<Lemma1Row>,
}

impl Lemma1Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["policy", "s", "q", "k", "trials", "statistic", "value", "stderr"]);
        for r in &self.rows {
            let base = |stat: &str, value: String, sd: String| {
                vec![
                    r.policy.to_string(),
                    r.s.to_string(),
                    self.q.to_string(),
                    self.k.to_string(),
                    r.trials.to_string(),
                    stat.to_string(),
                    value,
                    sd,
                ]
            };
            t.push(base("successes", r.successes.to_string(), String::new()));
            t.push(base(
                "empirical_success",
                format!("{}", r.empirical),
                format!("{}", r.stderr),
            ));
            t.push(base(
                "bound_exact",
                format!("{}/{}", r.bound.numer(), r.bound.denom()),
                String::new(),
            ));
            t.push(base("bound", format!("{}", r.bound.to_f64().unwrap()), String::new()));
            t.push(base(
                "passed_at_3sigma_harness_tolerance",
                r.passed.to_string(),
                String::new(),
            ));
        }
        t
    }
}

/// One-transmission success estimator. A sender that knows a random
/// direction emits once to a receiver whose active memory is orthogonal to
/// the direction (or empty, for the unlimited policy), and the report
/// compares the empirical success frequency against the analytic bound.
pub fn estimate_lemma1(
    q: u64,
    k: usize,
    s_values: &[u32],
    trials: u64,
    seed: u64,
) -> Result<Lemma1Report> {
    if trials < 10_000 {
        return Err(Error::validation(
            "lemma-1 estimation needs at least 10^4 trials for 3-sigma resolution".to_string(),
        ));
    }
    let spec = FieldSpec::for_order(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let mut policies: Vec<(MemoryPolicy, u32)> =
        vec![(MemoryPolicy::Unlimited { innovative_only: false }, 0)];
    for &s in s_values {
        policies.push((MemoryPolicy::Accumulator { slots: s as usize }, s));
        policies.push((MemoryPolicy::Recombinator { slots: s as usize }, s));
    }

    for (policy, s) in policies {
        let mut successes = 0u64;
        let mut sender = NodeState::init(
            0,
            MemoryPolicy::Unlimited { innovative_only: false },
            &[],
            k,
            1,
            false,
            &spec,
        )?;
        let mut receiver = NodeState::init(1, policy, &[], k, 1, false, &spec)?;
        for _ in 0..trials {
            let mu = random_nonzero_direction(k, &spec, &mut rng);
            // sender: two random packets, redrawn until it knows mu
            loop {
                let candidate = vec![
                    FieldVector::random(k, &spec, &mut rng),
                    FieldVector::random(k, &spec, &mut rng),
                ];
                if candidate.iter().any(|v| !v.dot(&mu, &spec).expect("equal lengths").is_zero()) {
                    sender.set_active_for_test(packets(candidate));
                    break;
                }
            }
            // receiver: orthogonal slots for finite policies, empty otherwise
            match policy {
                MemoryPolicy::Unlimited { .. } => receiver.set_active_for_test(Vec::new()),
                _ => {
                    let slots: Vec<FieldVector> =
                        (0..s).map(|_| random_orthogonal(&mu, &spec, &mut rng)).collect();
                    receiver.set_active_for_test(packets(slots));
                }
            }
            let pkt = sender.emit(&mut rng);
            receiver.receive(pkt, &mut rng, &[])?;
            if receiver.knows(&mu)? {
                successes += 1;
            }
        }
        let bound = match policy {
            MemoryPolicy::Unlimited { .. } => success_bound_unlimited(q),
            _ => success_bound_finite(q, s),
        };
        let empirical = successes as f64 / trials as f64;
        let stderr = binomial_stderr(bound.to_f64().unwrap(), trials);
        rows.push(Lemma1Row {
            policy,
            s,
            trials,
            successes,
            empirical,
            stderr,
            bound,
            passed: empirical >= bound.to_f64().unwrap() - TOLERANCE_SIGMAS * stderr,
        });
    }
    Ok(Lemma1Report { q, k, seed, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectionClass {
    Orthogonal,
    NonOrthogonal,
    All,
}

impl InjectionClass {
    fn label(&self) -> &'static str {
        match self {
            InjectionClass::Orthogonal => "orthogonal",
            InjectionClass::NonOrthogonal => "non-orthogonal",
            InjectionClass::All => "all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lemma2Row {
    pub variant: MemoryPolicy,
    pub class: InjectionClass,
    pub trials: u64,
    pub forgets: u64,
    pub rate: f64,
    pub stderr: f64,
    pub bound: Rational,
    /// rate <= bound + TOLERANCE_SIGMAS * stderr(bound)
    pub within_bound: bool,
    /// |rate - bound| <= TOLERANCE_SIGMAS * stderr(bound); the recombinator
    /// meets the bound with equality when the node already knows mu.
    pub matches_bound: bool,
}

#[derive(Debug)]
pub struct Lemma2Report {
    pub q: u64,
    pub s: u32,
    pub k: usize,
    pub seed: u64,
    pub rows: Vec<Lemma2Row>,
}

impl Lemma2Report {
    pub fn row(&self, variant: MemoryPolicy, class: InjectionClass) -> &Lemma2Row {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.class == class)
            .expect("estimator emits every (variant, class) pair")
    }

    pub fn table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["variant", "s", "q", "class", "trials", "statistic", "value", "stderr"]);
        for r in &self.rows {
            let base = |stat: &str, value: String, sd: String| {
                vec![
                    r.variant.to_string(),
                    self.s.to_string(),
                    self.q.to_string(),
                    r.class.label().to_string(),
                    r.trials.to_string(),
                    stat.to_string(),
                    value,
                    sd,
                ]
            };
            t.push(base("forgets", r.forgets.to_string(), String::new()));
            t.push(base("forget_rate", format!("{}", r.rate), format!("{}", r.stderr)));
            t.push(base(
                "bound_exact",
                format!("{}/{}", r.bound.numer(), r.bound.denom()),
                String::new(),
            ));
            t.push(base(
                "within_bound_at_3sigma_harness_tolerance",
                r.within_bound.to_string(),
                String::new(),
            ));
        }
        t
    }
}

/// Forgetting estimator: receivers that know a random direction are fed
/// equal numbers of orthogonal and non-orthogonal packets; the forgetting
/// frequency is reported per injection class and compared against q^{-s}.
pub fn estimate_lemma2(q: u64, s: u32, k: usize, trials: u64, seed: u64) -> Result<Lemma2Report> {
    if trials < 10_000 {
        return Err(Error::validation(
            "lemma-2 estimation needs at least 10^4 trials for 3-sigma resolution".to_string(),
        ));
    }
    let spec = FieldSpec::for_order(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = forget_bound(q, s);
    let mut rows = Vec::new();

    for variant in [
        MemoryPolicy::Accumulator { slots: s as usize },
        MemoryPolicy::Recombinator { slots: s as usize },
    ] {
        let mut node = NodeState::init(0, variant, &[], k, 1, false, &spec)?;
        let mut forgets = [0u64; 2]; // orthogonal, non-orthogonal
        let per_class = trials / 2;
        for (class, tally) in forgets.iter_mut().enumerate() {
            for _ in 0..per_class {
                let mu = random_nonzero_direction(k, &spec, &mut rng);
                // receiver knowing mu: redraw its s slots until non-orthogonal
                loop {
                    let slots: Vec<FieldVector> =
                        (0..s).map(|_| FieldVector::random(k, &spec, &mut rng)).collect();
                    if slots.iter().any(|v| !v.dot(&mu, &spec).expect("equal lengths").is_zero()) {
                        node.set_active_for_test(packets(slots));
                        break;
                    }
                }
                let incoming = if class == 0 {
                    // orthogonal, nonzero
                    loop {
                        let v = random_orthogonal(&mu, &spec, &mut rng);
                        if !v.is_zero() {
                            break v;
                        }
                    }
                } else {
                    random_non_orthogonal(&mu, &spec, &mut rng)
                };
                node.receive(Packet::new(incoming, FieldVector::zeros(1)), &mut rng, &[])?;
                if !node.knows(&mu)? {
                    *tally += 1;
                }
            }
        }
        let bound_f = bound.to_f64().unwrap();
        for (class, n_trials, n_forgets) in [
            (InjectionClass::Orthogonal, per_class, forgets[0]),
            (InjectionClass::NonOrthogonal, per_class, forgets[1]),
            (InjectionClass::All, 2 * per_class, forgets[0] + forgets[1]),
        ] {
            let rate = n_forgets as f64 / n_trials as f64;
            let stderr = binomial_stderr(bound_f, n_trials);
            rows.push(Lemma2Row {
                variant,
                class,
                trials: n_trials,
                forgets: n_forgets,
                rate,
                stderr,
                bound,
                within_bound: rate <= bound_f + TOLERANCE_SIGMAS * stderr,
                matches_bound: (rate - bound_f).abs() <= TOLERANCE_SIGMAS * stderr,
            });
        }
    }
    Ok(Lemma2Report { q, s, k, seed, rows })
}

#[derive(Debug, Clone)]
pub struct AdversaryRun {
    pub run: u64,
    pub seed: u64,
    pub completed: bool,
    pub stopping_time: Option<u64>,
    pub rounds_run: u64,
    pub give_ups: u64,
    /// Decode verification outcome for completed runs.
    pub decode_ok: Option<bool>,
}

#[derive(Debug)]
pub struct AdversaryReport {
    pub n: usize,
    pub q: u64,
    pub s: u32,
    pub budget: u64,
    pub runs: Vec<AdversaryRun>,
}

impl AdversaryReport {
    pub fn completions(&self) -> u64 {
        self.runs.iter().filter(|r| r.completed).count() as u64
    }

    pub fn completion_rate(&self) -> f64 {
        self.completions() as f64 / self.runs.len() as f64
    }

    pub fn total_rounds(&self) -> u64 {
        self.runs.iter().map(|r| r.rounds_run).sum()
    }

    pub fn total_give_ups(&self) -> u64 {
        self.runs.iter().map(|r| r.give_ups).sum()
    }

    pub fn give_up_frequency(&self) -> f64 {
        self.total_give_ups() as f64 / self.total_rounds() as f64
    }

    /// e^{-(n-1)/q^s}, the per-round give-up probability bound.
    pub fn give_up_bound(&self) -> f64 {
        (-((self.n as f64 - 1.0) / (self.q as f64).powi(self.s as i32))).exp()
    }

    pub fn median_completed_time(&self) -> Option<f64> {
        let times: Vec<f64> = self
            .runs
            .iter()
            .filter_map(|r| r.stopping_time.map(|t| t as f64))
            .collect();
        if times.is_empty() {
            None
        } else {
            Some(median(&times))
        }
    }

    pub fn table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["n", "q", "s", "budget", "runs", "statistic", "value", "stderr"]);
        let base = |stat: String, value: String, sd: String| {
            vec![
                self.n.to_string(),
                self.q.to_string(),
                self.s.to_string(),
                self.budget.to_string(),
                self.runs.len().to_string(),
                stat,
                value,
                sd,
            ]
        };
        t.push(base("completions".into(), self.completions().to_string(), String::new()));
        t.push(base(
            "completion_rate".into(),
            format!("{}", self.completion_rate()),
            String::new(),
        ));
        t.push(base("give_up_rounds".into(), self.total_give_ups().to_string(), String::new()));
        t.push(base(
            "give_up_frequency".into(),
            format!("{}", self.give_up_frequency()),
            format!("{}", binomial_stderr(self.give_up_bound(), self.total_rounds())),
        ));
        t.push(base(
            "give_up_probability_bound".into(),
            format!("{}", self.give_up_bound()),
            String::new(),
        ));
        if let Some(m) = self.median_completed_time() {
            t.push(base("median_stopping_time_completed".into(), format!("{m}"), String::new()));
        }
        for r in &self.runs {
            t.push(base(format!("completed[run={}]", r.run), r.completed.to_string(), String::new()));
            t.push(base(
                format!("stopping_time[run={}]", r.run),
                r.stopping_time.map_or("-".to_string(), |t| t.to_string()),
                String::new(),
            ));
        }
        t
    }
}

/// Run the isolating adversary campaign: one message per node (so every
/// active slot is occupied from round zero), synchronous broadcast, and the
/// adversary choosing the topology each round. Runs fan out across workers
/// keyed by run index and are collected back in index order.
pub fn run_adversary_campaign(
    n: usize,
    q: u64,
    s: u32,
    budget: u64,
    runs: u64,
    seed: u64,
) -> Result<AdversaryReport> {
    use rayon::prelude::*;

    let spec = FieldSpec::for_order(q)?;
    let results: Vec<AdversaryRun> = (0..runs)
        .into_par_iter()
        .map(|run_idx| -> Result<AdversaryRun> {
            let mut config = SimulationConfig::new(
                n,
                n,
                spec.clone(),
                MemoryPolicy::Accumulator { slots: s as usize },
                TopologyPolicy::Adaptive(IsolatingAdversary::new(n)?),
                Model::SyncBroadcast,
            )
            .place_one_per_node();
            config.seed = seed.wrapping_add(run_idx);
            config.round_budget = budget;
            config.payload_len = 1;
            config.trace_level = TraceLevel::Summary;
            config.verify = true;
            let trace = run(&config)?;
            if trace.summary.conservation_violations > 0 {
                return Err(Error::validation(
                    "conservation violation in adversary run".to_string(),
                ));
            }
            Ok(AdversaryRun {
                run: run_idx,
                seed: config.seed,
                completed: trace.summary.completed,
                stopping_time: trace.summary.stopping_time,
                rounds_run: trace.summary.rounds_run,
                give_ups: trace
                    .summary
                    .adversary_give_up_rounds
                    .as_ref()
                    .map_or(0, |g| g.len() as u64),
                decode_ok: trace.summary.decode_verified,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AdversaryReport { n, q, s, budget, runs: results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_are_exact_rationals() {
        assert_eq!(success_bound_unlimited(16), Rational::new(15, 16));
        assert_eq!(success_bound_finite(16, 1), Rational::new(225, 256));
        assert_eq!(success_bound_finite(2, 1), Rational::new(1, 4));
        assert_eq!(forget_bound(4, 2), Rational::new(1, 16));
    }

    #[test]
    fn orthogonal_sampling_is_orthogonal() {
        let spec = FieldSpec::for_order(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mu = random_nonzero_direction(4, &spec, &mut rng);
            let v = random_orthogonal(&mu, &spec, &mut rng);
            assert!(v.dot(&mu, &spec).unwrap().is_zero());
            let w = random_non_orthogonal(&mu, &spec, &mut rng);
            assert!(!w.dot(&mu, &spec).unwrap().is_zero());
        }
    }

    #[test]
    fn lemma1_small_run_meets_bounds() {
        let report = estimate_lemma1(16, 4, &[1], 20_000, 11).unwrap();
        assert_eq!(report.rows.len(), 3); // unlimited + two variants at s=1
        assert!(report.all_passed(), "{:?}", report.rows);
        // the constructed receivers achieve the bound with near equality
        for row in &report.rows {
            let bound = row.bound.to_f64().unwrap();
            assert!((row.empirical - bound).abs() < 6.0 * row.stderr);
        }
    }

    #[test]
    fn lemma2_small_run_and_class_structure() {
        let report = estimate_lemma2(2, 1, 3, 20_000, 13).unwrap();
        let acc = MemoryPolicy::Accumulator { slots: 1 };
        let rec = MemoryPolicy::Recombinator { slots: 1 };
        // orthogonal receptions never make the accumulator forget
        assert_eq!(report.row(acc, InjectionClass::Orthogonal).forgets, 0);
        // non-orthogonal receptions at q=2, s=1 forget half the time
        let nonorth = report.row(acc, InjectionClass::NonOrthogonal);
        assert!((nonorth.rate - 0.5).abs() < 0.02, "rate {}", nonorth.rate);
        // the recombinator forgets at exactly the bound regardless of class
        assert!(report.row(rec, InjectionClass::All).matches_bound);
        // and everything stays within the bound
        for row in &report.rows {
            assert!(row.within_bound, "{:?}", row);
        }
    }

    #[test]
    fn lemma1_rejects_tiny_trial_counts() {
        assert!(estimate_lemma1(16, 4, &[1], 100, 0).is_err());
        assert!(estimate_lemma2(4, 2, 3, 100, 0).is_err());
    }
}
