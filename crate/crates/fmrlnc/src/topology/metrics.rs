//! Graph metrics the stopping-time bounds are stated in: vertex connectivity,
//! isoperimetric number, its windowed relaxation for dynamic schedules, and
//! the min-average-cut of edge-distribution schedules. All values are exact
//! rationals; brute-force size caps are hard errors rather than silent
//! approximations.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::topology::graph::DirectedGraph;

/// Subset size cap for the exact isoperimetric computations.
pub const MAX_EXACT_ISOPERIMETRY_NODES: usize = 20;
/// Subset size cap for windowed metrics (relaxed isoperimetry, average cuts).
pub const MAX_EXACT_WINDOW_NODES: usize = 16;

pub type Rational = Ratio<i64>;

/// Strong vertex connectivity by unit-capacity max-flow with node splitting;
/// the complete graph returns n - 1 by convention.
pub fn vertex_connectivity(g: &DirectedGraph) -> Result<usize> {
    let n = g.n();
    if n < 2 {
        return Err(Error::validation("vertex connectivity requires n >= 2".to_string()));
    }
    let mut best = n - 1;
    for s in 0..n {
        for t in 0..n {
            if s != t && !g.has_edge(s, t) {
                best = best.min(vertex_disjoint_paths(g, s, t));
                if best == 0 {
                    return Ok(0);
                }
            }
        }
    }
    Ok(best)
}

/// Max number of internally vertex-disjoint s -> t paths (s, t non-adjacent),
/// via augmenting paths on the split graph: node v becomes v_in -> v_out with
/// capacity one; an edge (u, v) becomes u_out -> v_in.
fn vertex_disjoint_paths(g: &DirectedGraph, s: usize, t: usize) -> usize {
    let n = g.n();
    let size = 2 * n;
    let node_in = |v: usize| 2 * v;
    let node_out = |v: usize| 2 * v + 1;
    let inf = n as i32;
    let mut cap = vec![vec![0i32; size]; size];
    for v in 0..n {
        cap[node_in(v)][node_out(v)] = 1;
    }
    cap[node_in(s)][node_out(s)] = inf;
    cap[node_in(t)][node_out(t)] = inf;
    for (u, v) in g.edges() {
        cap[node_out(u)][node_in(v)] = inf;
    }
    let (source, sink) = (node_out(s), node_in(t));
    let mut flow = 0usize;
    loop {
        // BFS for an augmenting path of positive residual capacity
        let mut prev = vec![usize::MAX; size];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if cap[u][v] > 0 && prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            return flow;
        }
        let mut v = sink;
        while v != source {
            let u = prev[v];
            cap[u][v] -= 1;
            cap[v][u] += 1;
            v = u;
        }
        flow += 1;
    }
}

fn subset_size(mask: u64) -> i64 {
    mask.count_ones() as i64
}

/// `h_G(S)`: S together with everything reachable from S along one edge.
fn one_step_closure(masks: &[u64], s: u64) -> u64 {
    let mut out = s;
    let mut rest = s;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= masks[v];
    }
    out
}

/// Exact isoperimetric number: minimum over proper nonempty subsets S of
/// (|h_G(S)| - |S|) / min(|complement|, |S|).
pub fn isoperimetric_number(g: &DirectedGraph) -> Result<Rational> {
    let n = g.n();
    if !(2..=MAX_EXACT_ISOPERIMETRY_NODES).contains(&n) {
        return Err(Error::capacity(format!(
            "exact isoperimetric number needs 2 <= n <= {MAX_EXACT_ISOPERIMETRY_NODES}, got {n}; \
             use sampled lower bounds beyond that"
        )));
    }
    let masks = g.neighborhood_masks();
    let full = (1u64 << n) - 1;
    let mut best: Option<Rational> = None;
    for s in 1..full {
        let grown = one_step_closure(&masks, s);
        let numer = subset_size(grown) - subset_size(s);
        let denom = subset_size(s).min(subset_size(full & !s));
        let value = Rational::new(numer, denom);
        if best.as_ref().is_none_or(|b| value < *b) {
            best = Some(value);
            if value.is_zero() {
                break;
            }
        }
    }
    Ok(best.expect("n >= 2 guarantees a proper nonempty subset"))
}

/// Relaxed isoperimetric number of a dynamic schedule: for every proper
/// nonempty S and every window start t <= horizon, compose the per-round
/// neighborhood maps over a window of `delta` rounds and normalize the growth
/// by min(|complement|, |S|) * delta. Returns the exact minimum.
pub fn relaxed_isoperimetric_number(
    schedule: &[DirectedGraph],
    delta: usize,
    horizon: usize,
) -> Result<Rational> {
    if schedule.is_empty() || delta == 0 {
        return Err(Error::validation("relaxed isoperimetry needs a schedule and delta >= 1".to_string()));
    }
    let n = schedule[0].n();
    if schedule.iter().any(|g| g.n() != n) {
        return Err(Error::validation("schedule graphs have differing node counts".to_string()));
    }
    if !(2..=MAX_EXACT_WINDOW_NODES).contains(&n) {
        return Err(Error::capacity(format!(
            "exact relaxed isoperimetry needs 2 <= n <= {MAX_EXACT_WINDOW_NODES}, got {n}"
        )));
    }
    if schedule.len() < horizon + delta {
        return Err(Error::validation(format!(
            "schedule length {} is shorter than horizon {horizon} + delta {delta}",
            schedule.len()
        )));
    }
    let masks: Vec<Vec<u64>> = schedule.iter().map(DirectedGraph::neighborhood_masks).collect();
    let full = (1u64 << n) - 1;
    let mut best: Option<Rational> = None;
    for s in 1..full {
        let denom_base = subset_size(s).min(subset_size(full & !s));
        for t in 0..=horizon {
            // h is inflationary, so the union of partial compositions is the
            // final composition
            let mut grown = s;
            for step in masks.iter().skip(t).take(delta) {
                grown = one_step_closure(step, grown);
            }
            let numer = subset_size(grown) - subset_size(s);
            let value = Rational::new(numer, denom_base * delta as i64);
            if best.as_ref().is_none_or(|b| value < *b) {
                best = Some(value);
            }
        }
    }
    Ok(best.expect("n >= 2 guarantees a proper nonempty subset"))
}

/// A probability distribution over directed edges, with exact rational
/// weights summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDistribution {
    n: usize,
    weights: Vec<((usize, usize), Rational)>,
    /// Integer sampling weights: weight_i = rational_i * lcm(denominators).
    sample_weights: Vec<u64>,
    total_weight: u64,
}

impl EdgeDistribution {
    pub fn new(n: usize, weights: Vec<((usize, usize), Rational)>) -> Result<EdgeDistribution> {
        if weights.is_empty() {
            return Err(Error::validation("edge distribution has no support".to_string()));
        }
        let mut sum = Rational::zero();
        let mut lcm: i64 = 1;
        for ((u, v), w) in &weights {
            if u == v || *u >= n || *v >= n {
                return Err(Error::validation(format!("bad edge ({u}, {v}) for n={n}")));
            }
            if *w < Rational::zero() {
                return Err(Error::validation("negative edge weight".to_string()));
            }
            sum += w;
            lcm = lcm
                .checked_mul(*w.denom() / lcm.gcd(w.denom()))
                .ok_or_else(|| Error::capacity("edge weight denominators overflow".to_string()))?;
        }
        if sum != Rational::new(1, 1) {
            return Err(Error::validation(format!("edge weights sum to {sum}, not 1")));
        }
        let sample_weights: Vec<u64> =
            weights.iter().map(|(_, w)| (w.numer() * (lcm / w.denom())) as u64).collect();
        let total_weight = sample_weights.iter().sum();
        Ok(EdgeDistribution { n, weights, sample_weights, total_weight })
    }

    /// Uniform over the edges of a graph.
    pub fn uniform_over(g: &DirectedGraph) -> Result<EdgeDistribution> {
        let m = g.edge_count() as i64;
        if m == 0 {
            return Err(Error::validation("graph has no edges to distribute over".to_string()));
        }
        EdgeDistribution::new(g.n(), g.edges().map(|e| (e, Rational::new(1, m))).collect())
    }

    /// All mass on a single edge.
    pub fn point_mass(n: usize, edge: (usize, usize)) -> Result<EdgeDistribution> {
        EdgeDistribution::new(n, vec![(edge, Rational::new(1, 1))])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[((usize, usize), Rational)] {
        &self.weights
    }

    /// Exact probability mass on edges leaving `inside` (given as a bitmask).
    pub fn crossing_mass_out(&self, inside: u64) -> Rational {
        let mut mass = Rational::zero();
        for ((u, v), w) in &self.weights {
            if inside >> u & 1 == 1 && inside >> v & 1 == 0 {
                mass += w;
            }
        }
        mass
    }

    /// Sample one edge, deterministically for a fixed rng stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let mut pick = rng.gen_range(0..self.total_weight);
        for (edge, w) in self.weights.iter().map(|(e, _)| e).zip(self.sample_weights.iter()) {
            if pick < *w {
                return *edge;
            }
            pick -= w;
        }
        unreachable!("weights sum to the sampling total")
    }
}

/// Min-average-cut of a distribution schedule: the minimum, over proper
/// nonempty subsets S and window starts, of the average per-round mass
/// crossing out of S during a window of `delta` rounds. Enumerating every S
/// covers both orientations of each cut.
pub fn min_average_cut(dists: &[EdgeDistribution], delta: usize) -> Result<Rational> {
    if dists.is_empty() || delta == 0 || dists.len() < delta {
        return Err(Error::validation(
            "min-average-cut needs delta >= 1 and at least delta rounds".to_string(),
        ));
    }
    let n = dists[0].n;
    if dists.iter().any(|d| d.n != n) {
        return Err(Error::validation("distributions have differing node counts".to_string()));
    }
    if !(2..=MAX_EXACT_WINDOW_NODES).contains(&n) {
        return Err(Error::capacity(format!(
            "exact min-average-cut needs 2 <= n <= {MAX_EXACT_WINDOW_NODES}, got {n}"
        )));
    }
    let full = (1u64 << n) - 1;
    let mut best: Option<Rational> = None;
    for s in 1..full {
        for t in 0..=(dists.len() - delta) {
            let mut mass = Rational::zero();
            for d in &dists[t..t + delta] {
                mass += d.crossing_mass_out(s);
            }
            let value = mass / Rational::new(delta as i64, 1);
            if best.as_ref().is_none_or(|b| value < *b) {
                best = Some(value);
            }
        }
    }
    Ok(best.expect("n >= 2 guarantees a proper nonempty subset"))
}

/// Format a rational as the exact fraction string the CLI emits.
pub fn rational_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent connectivity oracle: smallest vertex set whose removal
    /// leaves at least two nodes that are not strongly connected; n - 1 when
    /// no such set exists.
    fn connectivity_by_removal(g: &DirectedGraph) -> usize {
        let n = g.n();
        for size in 0..n.saturating_sub(1) {
            for mask in 0u64..(1 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let keep: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 0).collect();
                if keep.len() < 2 {
                    continue;
                }
                let index_of = |v: usize| keep.iter().position(|&w| w == v).unwrap();
                let sub = DirectedGraph::new(
                    keep.len(),
                    g.edges()
                        .filter(|&(u, v)| mask >> u & 1 == 0 && mask >> v & 1 == 0)
                        .map(|(u, v)| (index_of(u), index_of(v))),
                )
                .unwrap();
                if !sub.is_strongly_connected() {
                    return size;
                }
            }
        }
        n - 1
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(vertex_connectivity(&DirectedGraph::complete(5)).unwrap(), 4);
        assert_eq!(vertex_connectivity(&DirectedGraph::cycle(6).unwrap()).unwrap(), 2);
        assert_eq!(vertex_connectivity(&DirectedGraph::path(4).unwrap()).unwrap(), 1);
        assert_eq!(vertex_connectivity(&DirectedGraph::empty(4)).unwrap(), 0);
        // one-way edge: no returning path
        let oneway = DirectedGraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(vertex_connectivity(&oneway).unwrap(), 0);
    }

    #[test]
    fn connectivity_matches_removal_oracle() {
        let fixtures = vec![
            DirectedGraph::cycle(6).unwrap(),
            DirectedGraph::path(5).unwrap(),
            DirectedGraph::hypercube(3).unwrap(),
            DirectedGraph::circulant(7, &[1, 2]).unwrap(),
            DirectedGraph::circulant(8, &[1, 3]).unwrap(),
            DirectedGraph::complete(5),
        ];
        for g in fixtures {
            assert_eq!(
                vertex_connectivity(&g).unwrap(),
                connectivity_by_removal(&g),
                "disagreement on {g:?}"
            );
        }
        // seeded random digraphs
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..30 {
            let n = rng.gen_range(2..7);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|(u, v)| u != v)
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let g = DirectedGraph::new(n, edges).unwrap();
            assert_eq!(
                vertex_connectivity(&g).unwrap(),
                connectivity_by_removal(&g),
                "disagreement on {g:?}"
            );
        }
    }

    #[test]
    fn circulant_connectivity_is_twice_the_jump_count() {
        for j in 1..=3usize {
            for n in (2 * j + 1)..=12 {
                let jumps: Vec<usize> = (1..=j).collect();
                let g = DirectedGraph::circulant(n, &jumps).unwrap();
                assert_eq!(
                    vertex_connectivity(&g).unwrap(),
                    2 * j,
                    "circulant({n}, 1..={j})"
                );
            }
        }
    }

    #[test]
    fn isoperimetric_examples() {
        // K_4: every proper S expands to V, minimized at |S| = 2
        assert_eq!(
            isoperimetric_number(&DirectedGraph::complete(4)).unwrap(),
            Rational::new(1, 1)
        );
        // C_6: a 3-arc gains two endpoints
        assert_eq!(
            isoperimetric_number(&DirectedGraph::cycle(6).unwrap()).unwrap(),
            Rational::new(2, 3)
        );
        // disconnected: take one component
        let disco = DirectedGraph::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        assert_eq!(isoperimetric_number(&disco).unwrap(), Rational::zero());
        assert!(matches!(
            isoperimetric_number(&DirectedGraph::complete(21)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn relaxed_isoperimetry_equals_plain_for_delta_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(2..=10usize);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|(u, v)| u != v)
                .filter(|_| rng.gen_bool(0.4))
                .collect();
            let g = DirectedGraph::new(n, edges).unwrap();
            let schedule = vec![g.clone(), g.clone(), g.clone()];
            assert_eq!(
                relaxed_isoperimetric_number(&schedule, 1, 2).unwrap(),
                isoperimetric_number(&g).unwrap(),
                "delta = 1 must reduce to the static metric on {g:?}"
            );
        }
    }

    #[test]
    fn relaxed_isoperimetry_alternating_empty_halves_the_value() {
        for n in [4usize, 8, 16] {
            let k = DirectedGraph::complete(n);
            let e = DirectedGraph::empty(n);
            let schedule = vec![k.clone(), e.clone(), k.clone(), e.clone()];
            let relaxed = relaxed_isoperimetric_number(&schedule, 2, 2).unwrap();
            let plain = isoperimetric_number(&k).unwrap();
            assert_eq!(relaxed, plain / Rational::new(2, 1), "n={n}");
        }
    }

    #[test]
    fn relaxed_isoperimetry_of_all_empty_schedule_is_zero() {
        let e = DirectedGraph::empty(5);
        let schedule = vec![e.clone(), e.clone(), e.clone()];
        assert_eq!(relaxed_isoperimetric_number(&schedule, 2, 1).unwrap(), Rational::zero());
    }

    #[test]
    fn relaxed_isoperimetry_validates() {
        let e = DirectedGraph::empty(5);
        assert!(relaxed_isoperimetric_number(&[], 1, 0).is_err());
        assert!(relaxed_isoperimetric_number(std::slice::from_ref(&e), 2, 0).is_err());
        let big = DirectedGraph::complete(17);
        assert!(matches!(
            relaxed_isoperimetric_number(&[big.clone(), big], 1, 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn edge_distribution_validates_and_samples() {
        let g = DirectedGraph::complete(4);
        let d = EdgeDistribution::uniform_over(&g).unwrap();
        assert_eq!(d.weights().len(), 12);

        // exact normalization is enforced
        assert!(EdgeDistribution::new(
            2,
            vec![((0, 1), Rational::new(1, 2)), ((1, 0), Rational::new(1, 3))]
        )
        .is_err());
        assert!(EdgeDistribution::new(2, vec![((0, 0), Rational::new(1, 1))]).is_err());

        // sampling is uniform within tolerance and deterministic per seed
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = std::collections::HashMap::new();
        let trials = 120_000;
        for _ in 0..trials {
            *counts.entry(d.sample(&mut rng)).or_insert(0u64) += 1;
        }
        for (_, c) in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 12.0).abs() < 0.01, "edge frequency {freq}");
        }
        let mut r1 = ChaCha8Rng::seed_from_u64(4);
        let mut r2 = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            assert_eq!(d.sample(&mut r1), d.sample(&mut r2));
        }
    }

    #[test]
    fn min_average_cut_uniform_complete_is_inverse_n() {
        // singleton cuts minimize: n - 1 outgoing edges of n(n-1) total
        for n in [4usize, 8, 12] {
            let d = EdgeDistribution::uniform_over(&DirectedGraph::complete(n)).unwrap();
            assert_eq!(min_average_cut(&[d], 1).unwrap(), Rational::new(1, n as i64));
        }
    }

    #[test]
    fn crossing_mass_of_point_distribution() {
        let d = EdgeDistribution::point_mass(4, (0, 1)).unwrap();
        // a cut separating the endpoints carries the full mass outward
        assert_eq!(d.crossing_mass_out(0b0001), Rational::new(1, 1));
        assert_eq!(d.crossing_mass_out(0b1101), Rational::new(1, 1));
        // and nothing leaves a set containing both endpoints
        assert_eq!(d.crossing_mass_out(0b0011), Rational::zero());
        // some subset is never crossed, so the min over cuts is zero
        assert_eq!(min_average_cut(&[d], 1).unwrap(), Rational::zero());
    }

    #[test]
    fn min_average_cut_window_averages() {
        // alternating point masses on (0,1) and (1,0): each singleton cut is
        // crossed every other round, so the delta=2 average is 1/2
        let a = EdgeDistribution::point_mass(2, (0, 1)).unwrap();
        let b = EdgeDistribution::point_mass(2, (1, 0)).unwrap();
        let schedule = vec![a.clone(), b.clone(), a.clone(), b.clone()];
        assert_eq!(min_average_cut(&schedule, 2).unwrap(), Rational::new(1, 2));
        // delta = 1 degenerates to the per-round minimum
        assert_eq!(min_average_cut(&schedule, 1).unwrap(), Rational::zero());
    }

    /// An l-connected graph grows any knowing set by min(l, outside) in one
    /// step, which is what the pipelined stopping-time argument needs.
    #[test]
    fn connectivity_implies_neighborhood_growth() {
        let fixtures = vec![
            DirectedGraph::path(6).unwrap(),
            DirectedGraph::cycle(8).unwrap(),
            DirectedGraph::hypercube(3).unwrap(),
            DirectedGraph::circulant(10, &[1, 2]).unwrap(),
            DirectedGraph::complete(6),
        ];
        for g in fixtures {
            let n = g.n();
            let c = vertex_connectivity(&g).unwrap();
            let masks = g.neighborhood_masks();
            let full = (1u64 << n) - 1;
            for s in 1..full {
                let grown = one_step_closure(&masks, s) & !s;
                let outside = (full & !s).count_ones() as usize;
                assert!(
                    grown.count_ones() as usize >= c.min(outside),
                    "set {s:#b} of {g:?} grew by only {}",
                    grown.count_ones()
                );
            }
        }
    }
}
