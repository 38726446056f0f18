//! Directed graphs on `[0, n)` plus the deterministic generator families used
//! as experiment fixtures. Undirected families are emitted with both
//! orientations of every edge.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    /// Sorted, deduplicated out-adjacency per node.
    out: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<DirectedGraph> {
        let mut out = vec![Vec::new(); n];
        for (u, v) in edges {
            if u == v {
                return Err(Error::validation(format!("self-loop at node {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::validation(format!(
                    "edge ({u}, {v}) out of range for n={n}"
                )));
            }
            out[u].push(v);
        }
        for adj in out.iter_mut() {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(DirectedGraph { n, out })
    }

    pub fn empty(n: usize) -> DirectedGraph {
        DirectedGraph { n, out: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> DirectedGraph {
        let out = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        DirectedGraph { n, out }
    }

    /// Undirected path 0 - 1 - ... - n-1.
    pub fn path(n: usize) -> Result<DirectedGraph> {
        if n < 1 {
            return Err(Error::validation("path requires n >= 1".to_string()));
        }
        DirectedGraph::new(n, (1..n).flat_map(|v| [(v - 1, v), (v, v - 1)]))
    }

    /// Undirected cycle on n >= 3 nodes.
    pub fn cycle(n: usize) -> Result<DirectedGraph> {
        if n < 3 {
            return Err(Error::validation("cycle requires n >= 3".to_string()));
        }
        DirectedGraph::new(n, (0..n).flat_map(|v| {
            let w = (v + 1) % n;
            [(v, w), (w, v)]
        }))
    }

    /// Boolean hypercube of the given dimension: 2^dim nodes, edges between
    /// words at Hamming distance one.
    pub fn hypercube(dim: u32) -> Result<DirectedGraph> {
        if dim == 0 || dim > 16 {
            return Err(Error::validation("hypercube dimension must be in 1..=16".to_string()));
        }
        let n = 1usize << dim;
        DirectedGraph::new(
            n,
            (0..n).flat_map(move |v| (0..dim).map(move |b| (v, v ^ (1usize << b)))),
        )
    }

    /// Undirected circulant graph: node v adjacent to v +- j for each jump j.
    pub fn circulant(n: usize, jumps: &[usize]) -> Result<DirectedGraph> {
        if n < 2 {
            return Err(Error::validation("circulant requires n >= 2".to_string()));
        }
        if jumps.iter().any(|&j| j == 0 || j >= n) {
            return Err(Error::validation("circulant jumps must be in 1..n".to_string()));
        }
        let mut edges = Vec::new();
        for v in 0..n {
            for &j in jumps {
                edges.push((v, (v + j) % n));
                edges.push((v, (v + n - j % n) % n));
            }
        }
        DirectedGraph::new(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// All edges in (source, target) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&v| (u, v)))
    }

    /// Out-neighborhood bitmasks for subset-based metrics (requires n <= 64).
    pub(crate) fn neighborhood_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64);
        self.out
            .iter()
            .map(|adj| adj.iter().fold(0u64, |m, &v| m | 1 << v))
            .collect()
    }

    fn reachable_from(&self, start: usize, blocked: u64) -> u64 {
        let mut seen = 1u64 << start;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in &self.out[u] {
                if blocked >> v & 1 == 0 && seen >> v & 1 == 0 {
                    seen |= 1 << v;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Strong connectivity (single node counts as connected). Only for
    /// n <= 64; the simulator fixtures all are.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        assert!(self.n <= 64);
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        if self.reachable_from(0, 0) != full {
            return false;
        }
        let rev = self.reversed();
        rev.reachable_from(0, 0) == full
    }

    pub fn reversed(&self) -> DirectedGraph {
        let mut out = vec![Vec::new(); self.n];
        for (u, v) in self.edges() {
            out[v].push(u);
        }
        for adj in out.iter_mut() {
            adj.sort_unstable();
        }
        DirectedGraph { n: self.n, out }
    }

    /// Length of the longest shortest directed path, or None when some pair
    /// is unreachable.
    pub fn diameter(&self) -> Option<usize> {
        let mut worst = 0usize;
        for s in 0..self.n {
            let mut dist = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.out[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            let far = *dist.iter().max().unwrap();
            if far == usize::MAX {
                return None;
            }
            worst = worst.max(far);
        }
        Some(worst)
    }
}

/// Parse a graph-schedule file: an `n = <count>` header followed by one
/// `round:` line per round listing `u->v` edge tokens. `#` starts a comment.
pub fn parse_schedule(text: &str) -> Result<Vec<DirectedGraph>> {
    let mut n: Option<usize> = None;
    let mut rounds = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::validation(format!("line {}: {msg}", lineno + 1));
        if let Some(rest) = line.strip_prefix("n") {
            let rest = rest.trim_start();
            if let Some(value) = rest.strip_prefix('=') {
                if n.is_some() {
                    return Err(err("duplicate n header".to_string()));
                }
                n = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| err(format!("bad node count: {e}")))?,
                );
                continue;
            }
        }
        if let Some(rest) = line.strip_prefix("round:") {
            let n = n.ok_or_else(|| err("round before n header".to_string()))?;
            let mut edges = Vec::new();
            for tok in rest.split_whitespace() {
                let (u, v) = tok
                    .split_once("->")
                    .ok_or_else(|| err(format!("bad edge token {tok:?}")))?;
                let u = u.parse::<usize>().map_err(|e| err(format!("bad edge {tok:?}: {e}")))?;
                let v = v.parse::<usize>().map_err(|e| err(format!("bad edge {tok:?}: {e}")))?;
                edges.push((u, v));
            }
            rounds.push(DirectedGraph::new(n, edges).map_err(|e| err(e.to_string()))?);
            continue;
        }
        return Err(err(format!("unrecognized line {line:?}")));
    }
    if rounds.is_empty() {
        return Err(Error::validation("schedule has no rounds".to_string()));
    }
    Ok(rounds)
}
