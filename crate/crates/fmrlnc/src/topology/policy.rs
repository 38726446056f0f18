//! Per-round topology control, including the fully adaptive adversary that
//! reads node knowledge before each round.

use rand::Rng;

use crate::coding::NodeState;
use crate::error::{Error, Result};
use crate::field::FieldVector;
use crate::topology::graph::DirectedGraph;

/// Read-only snapshot of network state handed to the topology controller
/// before the round's randomness is drawn.
pub struct NetworkView<'a> {
    round: u64,
    nodes: &'a [NodeState],
}

impl<'a> NetworkView<'a> {
    pub fn new(round: u64, nodes: &'a [NodeState]) -> NetworkView<'a> {
        NetworkView { round, nodes }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Projection predicate on the snapshot (unchecked direction).
    pub fn knows(&self, node: usize, mu: &FieldVector) -> bool {
        self.nodes[node].knowledge_bitmap(std::slice::from_ref(mu))[0]
    }
}

/// How the graph for each round is produced.
#[derive(Debug, Clone)]
pub enum TopologyPolicy {
    /// The same graph every round.
    Static(DirectedGraph),
    /// A fixed list of graphs repeated cyclically.
    Periodic(Vec<DirectedGraph>),
    /// A fixed list of graphs played once; the last graph holds afterwards.
    Scripted(Vec<DirectedGraph>),
    /// The knowledge-adaptive isolating adversary.
    Adaptive(IsolatingAdversary),
}

impl TopologyPolicy {
    pub fn periodic(graphs: Vec<DirectedGraph>) -> Result<TopologyPolicy> {
        if graphs.is_empty() {
            return Err(Error::validation("periodic schedule needs at least one graph".to_string()));
        }
        Ok(TopologyPolicy::Periodic(graphs))
    }

    pub fn scripted(graphs: Vec<DirectedGraph>) -> Result<TopologyPolicy> {
        if graphs.is_empty() {
            return Err(Error::validation("scripted schedule needs at least one graph".to_string()));
        }
        Ok(TopologyPolicy::Scripted(graphs))
    }

    pub fn node_count(&self) -> usize {
        match self {
            TopologyPolicy::Static(g) => g.n(),
            TopologyPolicy::Periodic(gs) | TopologyPolicy::Scripted(gs) => gs[0].n(),
            TopologyPolicy::Adaptive(a) => a.n,
        }
    }

    /// The graph for round `t`. Deterministic given the policy, the round,
    /// the snapshot, and the rng stream.
    pub fn topology_at<R: Rng + ?Sized>(
        &mut self,
        t: u64,
        view: &NetworkView<'_>,
        _rng: &mut R,
    ) -> Result<DirectedGraph> {
        match self {
            TopologyPolicy::Static(g) => Ok(g.clone()),
            TopologyPolicy::Periodic(gs) => Ok(gs[(t % gs.len() as u64) as usize].clone()),
            TopologyPolicy::Scripted(gs) => {
                let idx = (t as usize).min(gs.len() - 1);
                Ok(gs[idx].clone())
            }
            TopologyPolicy::Adaptive(adv) => adv.round_graph(view),
        }
    }
}

/// Adaptive adversary that fixes one direction, isolates a victim node behind
/// a single link to an ignorant peer, and keeps everyone else in a clique.
/// When every other node knows the direction it gives up and connects the
/// victim to all of them. The produced graph is always connected with
/// diameter at most two.
#[derive(Debug, Clone)]
pub struct IsolatingAdversary {
    n: usize,
    direction: Option<FieldVector>,
    victim: usize,
    give_up_rounds: Vec<u64>,
}

impl IsolatingAdversary {
    pub fn new(n: usize) -> Result<IsolatingAdversary> {
        if n < 3 {
            return Err(Error::validation("the isolating adversary needs n >= 3".to_string()));
        }
        Ok(IsolatingAdversary { n, direction: None, victim: 0, give_up_rounds: Vec::new() })
    }

    /// The tracked direction, once chosen at round zero.
    pub fn direction(&self) -> Option<&FieldVector> {
        self.direction.as_ref()
    }

    pub fn victim(&self) -> usize {
        self.victim
    }

    /// Rounds in which the adversary had to give up and connect the victim
    /// to everyone.
    pub fn give_up_rounds(&self) -> &[u64] {
        &self.give_up_rounds
    }

    fn choose_direction(&mut self, view: &NetworkView<'_>) -> Result<()> {
        let n = view.node_count();
        // scan unit directions in index order; take the first one unknown to
        // at least two nodes and pick the lowest ignorant node as the victim
        let dim = view.nodes[0].coeff_len();
        for j in 0..dim {
            let candidate = FieldVector::unit(dim, j);
            let ignorant: Vec<usize> =
                (0..n).filter(|&v| !view.knows(v, &candidate)).collect();
            if ignorant.len() >= 2 {
                self.victim = ignorant[0];
                self.direction = Some(candidate);
                return Ok(());
            }
        }
        Err(Error::configuration(
            "no unit direction is unknown to at least two nodes at round zero".to_string(),
        ))
    }

    fn round_graph(&mut self, view: &NetworkView<'_>) -> Result<DirectedGraph> {
        if view.node_count() != self.n {
            return Err(Error::validation(format!(
                "adversary built for n={} asked about n={}",
                self.n,
                view.node_count()
            )));
        }
        if self.direction.is_none() {
            self.choose_direction(view)?;
        }
        let mu = self.direction.clone().expect("direction chosen above");
        let victim = self.victim;
        let ignorant = (0..self.n).find(|&w| w != victim && !view.knows(w, &mu));

        let mut edges: Vec<(usize, usize)> = Vec::new();
        for u in 0..self.n {
            for v in 0..self.n {
                if u != v && u != victim && v != victim {
                    edges.push((u, v));
                }
            }
        }
        match ignorant {
            Some(w) => {
                edges.push((victim, w));
                edges.push((w, victim));
            }
            None => {
                // give up: connect the victim to everyone
                self.give_up_rounds.push(view.round());
                for u in 0..self.n {
                    if u != victim {
                        edges.push((victim, u));
                        edges.push((u, victim));
                    }
                }
            }
        }
        DirectedGraph::new(self.n, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{MemoryPolicy, NodeState, Packet};
    use crate::field::FieldSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn nodes_with_knowledge(knowing: &[bool], spec: &FieldSpec) -> Vec<NodeState> {
        knowing
            .iter()
            .enumerate()
            .map(|(id, &knows)| {
                let mut n = NodeState::init(
                    id,
                    MemoryPolicy::Accumulator { slots: 1 },
                    &[],
                    1,
                    1,
                    false,
                    spec,
                )
                .unwrap();
                if knows {
                    n.set_active_for_test(vec![Packet::new(
                        FieldVector::from_raw(&[1]),
                        FieldVector::from_raw(&[1]),
                    )]);
                }
                n
            })
            .collect()
    }

    #[test]
    fn static_and_periodic_policies() {
        let spec = FieldSpec::for_order(2).unwrap();
        let nodes = nodes_with_knowledge(&[false; 4], &spec);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let k4 = DirectedGraph::complete(4);
        let empty = DirectedGraph::empty(4);

        let mut s = TopologyPolicy::Static(k4.clone());
        for t in 0..5 {
            let view = NetworkView::new(t, &nodes);
            assert_eq!(s.topology_at(t, &view, &mut rng).unwrap(), k4);
        }

        let mut p = TopologyPolicy::periodic(vec![k4.clone(), empty.clone()]).unwrap();
        let view = NetworkView::new(1, &nodes);
        assert_eq!(p.topology_at(1, &view, &mut rng).unwrap(), empty);
        let view = NetworkView::new(2, &nodes);
        assert_eq!(p.topology_at(2, &view, &mut rng).unwrap(), k4);

        let mut sc = TopologyPolicy::scripted(vec![k4.clone(), empty.clone()]).unwrap();
        let view = NetworkView::new(7, &nodes);
        assert_eq!(sc.topology_at(7, &view, &mut rng).unwrap(), empty, "last graph holds");
    }

    #[test]
    fn adversary_builds_clique_plus_pendant() {
        let spec = FieldSpec::for_order(2).unwrap();
        // victim 0 (lowest ignorant); node 3 also ignorant
        let nodes = nodes_with_knowledge(&[false, true, true, false], &spec);
        let mut adv = IsolatingAdversary::new(4).unwrap();
        let view = NetworkView::new(0, &nodes);
        let g = adv.round_graph(&view).unwrap();
        assert_eq!(adv.victim(), 0);
        // clique on {1,2,3} plus the pendant pair (0,3),(3,0)
        let mut expect: Vec<(usize, usize)> = vec![(0, 3), (3, 0)];
        for u in 1..4 {
            for v in 1..4 {
                if u != v {
                    expect.push((u, v));
                }
            }
        }
        let g2 = DirectedGraph::new(4, expect).unwrap();
        assert_eq!(g, g2);
        assert!(adv.give_up_rounds().is_empty());
    }

    #[test]
    fn adversary_gives_up_when_everyone_knows() {
        let spec = FieldSpec::for_order(2).unwrap();
        let mut adv = IsolatingAdversary::new(4).unwrap();
        // round 0: two ignorant nodes exist, victim gets chosen
        let start = nodes_with_knowledge(&[false, true, true, false], &spec);
        let view = NetworkView::new(0, &start);
        adv.round_graph(&view).unwrap();
        // later: everyone except the victim knows
        let all_know = nodes_with_knowledge(&[false, true, true, true], &spec);
        let view = NetworkView::new(5, &all_know);
        let g = adv.round_graph(&view).unwrap();
        assert_eq!(g, DirectedGraph::complete(4));
        assert_eq!(adv.give_up_rounds(), &[5]);
    }

    #[test]
    fn adversary_graph_always_connected_with_diameter_two() {
        let spec = FieldSpec::for_order(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut adv = IsolatingAdversary::new(6).unwrap();
        for round in 0..200 {
            let knowing: Vec<bool> = (0..6).map(|_| rng.gen_bool(0.5)).collect();
            let mut pattern = knowing;
            if round == 0 {
                // ensure a valid start: at least two ignorant nodes
                pattern[0] = false;
                pattern[5] = false;
            }
            let nodes = nodes_with_knowledge(&pattern, &spec);
            let view = NetworkView::new(round, &nodes);
            let g = adv.round_graph(&view).unwrap();
            assert!(g.is_strongly_connected());
            assert!(g.diameter().unwrap() <= 2, "diameter at round {round}");
        }
    }

    #[test]
    fn adversary_requires_an_unknown_direction() {
        let spec = FieldSpec::for_order(2).unwrap();
        let nodes = nodes_with_knowledge(&[true, true, true], &spec);
        let mut adv = IsolatingAdversary::new(3).unwrap();
        let view = NetworkView::new(0, &nodes);
        assert!(matches!(adv.round_graph(&view), Err(Error::Configuration(_))));
    }
}
