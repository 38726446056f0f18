//! Round classification for the projection analysis: per tracked direction,
//! a round succeeds when every node adjacent to a knowing node ends up
//! knowing and nobody forgets; r forgetting nodes cost r failure units.

use crate::sim::trace::RoundClass;
use crate::topology::DirectedGraph;

/// Classify one round per tracked direction. `before` and `after` are
/// direction-major knowledge bitmaps around the round; `graph` is the round's
/// topology. Also returns the (direction, node) forget events.
pub fn record_projection_events(
    before: &[Vec<bool>],
    after: &[Vec<bool>],
    graph: &DirectedGraph,
) -> (Vec<RoundClass>, Vec<(usize, usize)>) {
    let mut classes = Vec::with_capacity(before.len());
    let mut forgets = Vec::new();
    for (d, (pre, post)) in before.iter().zip(after.iter()).enumerate() {
        let mut units = 0usize;
        for v in 0..pre.len() {
            if pre[v] && !post[v] {
                units += 1;
                forgets.push((d, v));
            }
        }
        if units > 0 {
            classes.push(RoundClass::Failure { units });
            continue;
        }
        // no forgetting: fail iff some frontier node missed the direction
        let mut missed = false;
        'frontier: for (u, v) in graph.edges() {
            if pre[u] && !post[v] {
                missed = true;
                break 'frontier;
            }
        }
        if missed {
            classes.push(RoundClass::Failure { units: 1 });
        } else {
            classes.push(RoundClass::Success);
        }
    }
    (classes, forgets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quiet_round_is_success() {
        let g = DirectedGraph::complete(3);
        let before = vec![vec![true, true, true]];
        let after = vec![vec![true, true, true]];
        let (classes, forgets) = record_projection_events(&before, &after, &g);
        assert_eq!(classes, vec![RoundClass::Success]);
        assert!(forgets.is_empty());
    }

    #[test]
    fn forgetting_nodes_cost_one_unit_each() {
        let g = DirectedGraph::complete(3);
        let before = vec![vec![true, true, true]];
        let after = vec![vec![true, false, false]];
        let (classes, forgets) = record_projection_events(&before, &after, &g);
        assert_eq!(classes, vec![RoundClass::Failure { units: 2 }]);
        assert_eq!(forgets, vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn missed_frontier_is_one_failure() {
        // node 0 knows and points at node 1, which fails to learn
        let g = DirectedGraph::new(3, [(0, 1)]).unwrap();
        let before = vec![vec![true, false, false]];
        let after = vec![vec![true, false, false]];
        let (classes, _) = record_projection_events(&before, &after, &g);
        assert_eq!(classes, vec![RoundClass::Failure { units: 1 }]);

        // node 2 is not a neighbor, so its ignorance does not matter
        let after = vec![vec![true, true, false]];
        let (classes, _) = record_projection_events(&before, &after, &g);
        assert_eq!(classes, vec![RoundClass::Success]);
    }

    #[test]
    fn directions_are_classified_independently() {
        let g = DirectedGraph::new(2, [(0, 1), (1, 0)]).unwrap();
        let before = vec![vec![true, false], vec![false, true]];
        let after = vec![vec![true, true], vec![false, false]];
        let (classes, forgets) = record_projection_events(&before, &after, &g);
        assert_eq!(
            classes,
            vec![RoundClass::Success, RoundClass::Failure { units: 1 }]
        );
        assert_eq!(forgets, vec![(1, 1)]);
    }
}
