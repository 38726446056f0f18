//! Experiment config files: flat key/value lines under section headers,
//! unknown keys rejected, errors reported with line numbers.

use std::path::PathBuf;

use fmrlnc::coding::MemoryPolicy;
use fmrlnc::error::{Error, Result};
use fmrlnc::field::FieldSpec;
use fmrlnc::sim::{default_round_budget, Model, Recipients, SimulationConfig, TraceLevel};
use fmrlnc::topology::{parse_schedule, DirectedGraph, IsolatingAdversary, TopologyPolicy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Stopping,
    Lemma1 { q: u64, k: usize, s_values: Vec<u32> },
    Lemma2 { q: u64, s: u32, k: usize },
    Oracle { samples: u64 },
    Lemma3 { n: usize, q: u64, s: u32, budget: u64, runs: u64 },
    Metrics { target: String, delta: usize },
}

#[derive(Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub sim: Option<SimulationConfig>,
    pub trials: u64,
    pub seeds: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
    consumed: bool,
}

struct KeyTable {
    entries: Vec<Entry>,
}

impl KeyTable {
    fn parse(text: &str) -> Result<KeyTable> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::validation(format!("line {line}: unterminated section header")))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::validation(format!("line {line}: expected key = value, got {content:?}"))
            })?;
            if section.is_empty() {
                return Err(Error::validation(format!(
                    "line {line}: key outside of any [section]"
                )));
            }
            let key = key.trim().to_string();
            if entries.iter().any(|e: &Entry| e.section == section && e.key == key) {
                return Err(Error::validation(format!("line {line}: duplicate key {key:?}")));
            }
            entries.push(Entry {
                section: section.clone(),
                key,
                value: value.trim().to_string(),
                line,
                consumed: false,
            });
        }
        Ok(KeyTable { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        for e in self.entries.iter_mut() {
            if e.section == section && e.key == key {
                e.consumed = true;
                return Some((e.value.clone(), e.line));
            }
        }
        None
    }

    fn require(&mut self, section: &str, key: &str) -> Result<(String, usize)> {
        self.take(section, key).ok_or_else(|| {
            Error::validation(format!("missing required key {key:?} in [{section}]"))
        })
    }

    fn finish(self) -> Result<()> {
        if let Some(e) = self.entries.iter().find(|e| !e.consumed) {
            return Err(Error::validation(format!(
                "line {}: unknown key {:?} in [{}]",
                e.line, e.key, e.section
            )));
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::validation(format!("line {line}: bad {what} {value:?}: {e}")))
}

/// Field orders: plain integers; powers of two become binary extensions.
pub fn parse_field(value: &str, line: usize) -> Result<FieldSpec> {
    let q: u64 = parse_num(value, line, "field order")?;
    FieldSpec::for_order(q).map_err(|e| Error::validation(format!("line {line}: {e}")))
}

pub fn parse_policy(value: &str, line: usize) -> Result<MemoryPolicy> {
    let v = value.trim();
    if v == "unlimited" {
        return Ok(MemoryPolicy::Unlimited { innovative_only: false });
    }
    if v == "unlimited-basis" {
        return Ok(MemoryPolicy::Unlimited { innovative_only: true });
    }
    for (prefix, make) in [
        ("accumulator", true),
        ("recombinator", false),
    ] {
        if let Some(rest) = v.strip_prefix(prefix) {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| {
                    Error::validation(format!("line {line}: expected {prefix}(s), got {v:?}"))
                })?;
            let slots: usize = parse_num(inner, line, "slot count")?;
            if slots == 0 {
                return Err(Error::validation(format!("line {line}: slot count must be >= 1")));
            }
            return Ok(if make {
                MemoryPolicy::Accumulator { slots }
            } else {
                MemoryPolicy::Recombinator { slots }
            });
        }
    }
    Err(Error::validation(format!("line {line}: unknown policy {v:?}")))
}

pub fn parse_model(value: &str, line: usize) -> Result<Model> {
    match value {
        "sync-broadcast" => Ok(Model::SyncBroadcast),
        "async-broadcast" => Ok(Model::AsyncBroadcast),
        "async-single-transfer" => Ok(Model::AsyncSingleTransfer),
        other => Err(Error::validation(format!("line {line}: unknown model {other:?}"))),
    }
}

/// Graph expressions: `complete(8)`, `empty(4)`, `path(32)`, `cycle(6)`,
/// `hypercube(3)`, `circulant(12;1,2)`.
pub fn parse_graph(value: &str, line: usize) -> Result<DirectedGraph> {
    let v = value.trim();
    let (name, inner) = v
        .split_once('(')
        .and_then(|(n, rest)| rest.strip_suffix(')').map(|i| (n, i)))
        .ok_or_else(|| Error::validation(format!("line {line}: expected family(args), got {v:?}")))?;
    let map_err = |e: Error| Error::validation(format!("line {line}: {e}"));
    match name {
        "complete" => Ok(DirectedGraph::complete(parse_num(inner, line, "node count")?)),
        "empty" => Ok(DirectedGraph::empty(parse_num(inner, line, "node count")?)),
        "path" => DirectedGraph::path(parse_num(inner, line, "node count")?).map_err(map_err),
        "cycle" => DirectedGraph::cycle(parse_num(inner, line, "node count")?).map_err(map_err),
        "hypercube" => {
            DirectedGraph::hypercube(parse_num(inner, line, "dimension")?).map_err(map_err)
        }
        "circulant" => {
            let (n, jumps) = inner.split_once(';').ok_or_else(|| {
                Error::validation(format!("line {line}: circulant needs circulant(n;j1,j2,...)"))
            })?;
            let n: usize = parse_num(n, line, "node count")?;
            let jumps: Vec<usize> = jumps
                .split(',')
                .map(|j| parse_num(j.trim(), line, "jump"))
                .collect::<Result<_>>()?;
            DirectedGraph::circulant(n, &jumps).map_err(map_err)
        }
        other => Err(Error::validation(format!("line {line}: unknown graph family {other:?}"))),
    }
}

/// Topology expressions: a graph expression (static), `alternating(g1,g2)`
/// (periodic), `adversary(n)` (the adaptive isolating adversary), or
/// `schedule:PATH` (scripted rounds from a file).
pub fn parse_topology(value: &str, line: usize) -> Result<TopologyPolicy> {
    let v = value.trim();
    if let Some(path) = v.strip_prefix("schedule:") {
        let text = std::fs::read_to_string(path.trim()).map_err(|e| {
            Error::validation(format!("line {line}: cannot read schedule {path:?}: {e}"))
        })?;
        let rounds = parse_schedule(&text)
            .map_err(|e| Error::validation(format!("line {line}: in {path:?}: {e}")))?;
        return TopologyPolicy::scripted(rounds)
            .map_err(|e| Error::validation(format!("line {line}: {e}")));
    }
    if let Some(inner) = v.strip_prefix("adversary(").and_then(|r| r.strip_suffix(')')) {
        let n: usize = parse_num(inner, line, "node count")?;
        return Ok(TopologyPolicy::Adaptive(
            IsolatingAdversary::new(n)
                .map_err(|e| Error::validation(format!("line {line}: {e}")))?,
        ));
    }
    if let Some(inner) = v.strip_prefix("alternating(").and_then(|r| r.strip_suffix(')')) {
        // split at the top-level comma between two graph expressions
        let split = top_level_comma(inner).ok_or_else(|| {
            Error::validation(format!("line {line}: alternating needs two graph expressions"))
        })?;
        let first = parse_graph(&inner[..split], line)?;
        let second = parse_graph(&inner[split + 1..], line)?;
        return TopologyPolicy::periodic(vec![first, second])
            .map_err(|e| Error::validation(format!("line {line}: {e}")));
    }
    Ok(TopologyPolicy::Static(parse_graph(v, line)?))
}

fn top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

/// Placement expressions: `all@NODE`, `one-per-node`, or a comma list of
/// `msg@node` / `msg@node+node` entries covering every message exactly once.
pub fn parse_placement(value: &str, line: usize, k: usize, n: usize) -> Result<Vec<Vec<usize>>> {
    let v = value.trim();
    if v == "one-per-node" {
        if k > n {
            return Err(Error::validation(format!(
                "line {line}: one-per-node needs k <= n, got k={k}, n={n}"
            )));
        }
        return Ok((0..k).map(|i| vec![i]).collect());
    }
    if let Some(node) = v.strip_prefix("all@") {
        let node: usize = parse_num(node, line, "node id")?;
        return Ok((0..k).map(|_| vec![node]).collect());
    }
    let mut placement: Vec<Option<Vec<usize>>> = vec![None; k];
    for item in v.split(',') {
        let (msg, nodes) = item.trim().split_once('@').ok_or_else(|| {
            Error::validation(format!("line {line}: expected msg@node, got {item:?}"))
        })?;
        let msg: usize = parse_num(msg, line, "message id")?;
        if msg >= k {
            return Err(Error::validation(format!("line {line}: message id {msg} >= k={k}")));
        }
        if placement[msg].is_some() {
            return Err(Error::validation(format!(
                "line {line}: duplicate placement for message {msg}"
            )));
        }
        let holders: Vec<usize> = nodes
            .split('+')
            .map(|t| parse_num(t.trim(), line, "node id"))
            .collect::<Result<_>>()?;
        placement[msg] = Some(holders);
    }
    placement
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| Error::validation(format!("line {line}: message {i} is not placed")))
        })
        .collect()
}

pub fn parse_recipients(value: &str, line: usize) -> Result<Recipients> {
    if value.trim() == "all" {
        return Ok(Recipients::All);
    }
    let set: Vec<usize> = value
        .split(',')
        .map(|t| parse_num(t.trim(), line, "recipient id"))
        .collect::<Result<_>>()?;
    Ok(Recipients::Set(set))
}

fn parse_simulation_section(table: &mut KeyTable) -> Result<SimulationConfig> {
    const S: &str = "simulation";
    let (n_str, n_line) = table.require(S, "n")?;
    let n: usize = parse_num(&n_str, n_line, "node count")?;
    let (k_str, k_line) = table.require(S, "k")?;
    let k: usize = parse_num(&k_str, k_line, "message count")?;
    let (field_str, field_line) = table.require(S, "field")?;
    let field = parse_field(&field_str, field_line)?;
    let (policy_str, policy_line) = table.require(S, "policy")?;
    let policy = parse_policy(&policy_str, policy_line)?;
    let (model_str, model_line) = table.require(S, "model")?;
    let model = parse_model(&model_str, model_line)?;
    let (topo_str, topo_line) = table.require(S, "topology")?;
    let topology = parse_topology(&topo_str, topo_line)?;

    let mut config = SimulationConfig::new(n, k, field, policy, topology, model);
    if let Some((v, l)) = table.take(S, "l") {
        config.payload_len = parse_num(&v, l, "payload length")?;
    }
    if let Some((v, l)) = table.take(S, "placement") {
        config.placement = parse_placement(&v, l, k, n)?;
    } else {
        return Err(Error::validation("missing required key \"placement\" in [simulation]".to_string()));
    }
    if let Some((v, l)) = table.take(S, "recipients") {
        config.recipients = parse_recipients(&v, l)?;
    }
    if let Some((v, l)) = table.take(S, "budget") {
        config.round_budget = parse_num(&v, l, "round budget")?;
    } else {
        config.round_budget = default_round_budget(n, k);
    }
    if let Some((v, l)) = table.take(S, "tracked") {
        config.tracked_directions =
            if v == "none" { None } else { Some(parse_num(&v, l, "tracked count")?) };
    }
    if let Some((v, l)) = table.take(S, "trace") {
        config.trace_level = match v.as_str() {
            "summary" => TraceLevel::Summary,
            "rounds" => TraceLevel::Rounds,
            "full" => TraceLevel::Full,
            other => {
                return Err(Error::validation(format!("line {l}: unknown trace level {other:?}")))
            }
        };
    }
    if let Some((v, l)) = table.take(S, "verify") {
        config.verify = match v.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::validation(format!("line {l}: verify must be true or false, got {other:?}"))),
        };
    }
    config.validate()?;
    Ok(config)
}

/// Parse an experiment config from text. Defaults: seed 0, trials 100000,
/// seeds 50, oracle samples 1000000, metrics delta 1.
pub fn parse_config_text(text: &str) -> Result<ExperimentSpec> {
    const E: &str = "experiment";
    let mut table = KeyTable::parse(text)?;
    let (kind_str, kind_line) = table.require(E, "kind")?;

    let mut trials: u64 = 100_000;
    if let Some((v, l)) = table.take(E, "trials") {
        trials = parse_num(&v, l, "trial count")?;
        if trials == 0 {
            return Err(Error::validation(format!("line {l}: trials must be >= 1")));
        }
    }
    let mut seeds: u64 = 50;
    if let Some((v, l)) = table.take(E, "seeds") {
        seeds = parse_num(&v, l, "seed count")?;
        if seeds == 0 {
            return Err(Error::validation(format!("line {l}: seeds must be >= 1")));
        }
    }
    let mut seed: u64 = 0;
    if let Some((v, l)) = table.take(E, "seed") {
        seed = parse_num(&v, l, "seed")?;
    }
    let out = table.take(E, "out").map(|(v, _)| PathBuf::from(v));

    let kind = match kind_str.as_str() {
        "simulate" => ExperimentKind::Simulate,
        "stopping" => ExperimentKind::Stopping,
        "lemma1" => {
            let (q, ql) = table.require(E, "q")?;
            let (k, kl) = table.require(E, "k")?;
            let (s, sl) = table.require(E, "s")?;
            ExperimentKind::Lemma1 {
                q: parse_num(&q, ql, "field order")?,
                k: parse_num(&k, kl, "message count")?,
                s_values: s
                    .split(',')
                    .map(|t| parse_num(t.trim(), sl, "slot count"))
                    .collect::<Result<_>>()?,
            }
        }
        "lemma2" => {
            let (q, ql) = table.require(E, "q")?;
            let (s, sl) = table.require(E, "s")?;
            let (k, kl) = table.require(E, "k")?;
            ExperimentKind::Lemma2 {
                q: parse_num(&q, ql, "field order")?,
                s: parse_num(&s, sl, "slot count")?,
                k: parse_num(&k, kl, "message count")?,
            }
        }
        "oracle" => {
            let samples = match table.take(E, "samples") {
                Some((v, l)) => parse_num(&v, l, "sample count")?,
                None => 1_000_000,
            };
            ExperimentKind::Oracle { samples }
        }
        "lemma3" => {
            let (n, nl) = table.require(E, "n")?;
            let (q, ql) = table.require(E, "q")?;
            let (s, sl) = table.require(E, "s")?;
            let (budget, bl) = table.require(E, "budget")?;
            let (runs, rl) = table.require(E, "runs")?;
            ExperimentKind::Lemma3 {
                n: parse_num(&n, nl, "node count")?,
                q: parse_num(&q, ql, "field order")?,
                s: parse_num(&s, sl, "slot count")?,
                budget: parse_num(&budget, bl, "round budget")?,
                runs: parse_num(&runs, rl, "run count")?,
            }
        }
        "metrics" => {
            let (target, _) = table.require(E, "target")?;
            let delta = match table.take(E, "delta") {
                Some((v, l)) => parse_num(&v, l, "window length")?,
                None => 1,
            };
            ExperimentKind::Metrics { target, delta }
        }
        other => {
            return Err(Error::validation(format!(
                "line {kind_line}: unknown experiment kind {other:?}"
            )))
        }
    };

    let needs_sim = matches!(kind, ExperimentKind::Simulate | ExperimentKind::Stopping);
    let sim = if needs_sim { Some(parse_simulation_section(&mut table)?) } else { None };
    table.finish()?;
    Ok(ExperimentSpec { kind, sim, trials, seeds, seed, out })
}

pub fn parse_config(path: &std::path::Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}
