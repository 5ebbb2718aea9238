//! Breadth-first exploration of the flip graph.
//!
//! Nodes are marked triangulations: the combinatorial canonical form together
//! with the exact shear coordinates of a fixed generic point. Two walks reach
//! the same node only when they end at the same triangulation up to isotopy,
//! so every closed walk in the graph is a genuine relation between moves.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;

use super::{CanonicalForm, FlipTag, IdealTriangulation, Move, Permutation};
use crate::classical::classical_move;
use crate::coordchange::reference_point;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipGraphConfig {
    pub depth: usize,
    pub node_budget: usize,
    /// Also follow every transposition of two edge indices.
    pub include_reindex: bool,
}

impl Default for FlipGraphConfig {
    fn default() -> Self {
        FlipGraphConfig { depth: 2, node_budget: 100_000, include_reindex: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub triangulation: IdealTriangulation,
    pub marking: Vec<BigRational>,
    pub depth: usize,
    /// Index of the tree arc that discovered this node.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphArc {
    pub from: usize,
    pub to: usize,
    pub mv: Move,
    pub tag: Option<FlipTag>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlipGraph {
    nodes: Vec<GraphNode>,
    arcs: Vec<GraphArc>,
    truncated: bool,
}

type NodeKey = (CanonicalForm, Vec<BigRational>);

impl FlipGraph {
    pub fn explore(root: &IdealTriangulation, cfg: &FlipGraphConfig) -> FlipGraph {
        let n = root.edge_count();
        let mut g = FlipGraph { nodes: Vec::new(), arcs: Vec::new(), truncated: false };
        let mut index: HashMap<NodeKey, usize> = HashMap::new();
        let marking = reference_point(n);
        index.insert((root.canonical(), marking.clone()), 0);
        g.nodes.push(GraphNode { triangulation: root.clone(), marking, depth: 0, parent: None });

        let mut moves: Vec<Move> = (1..=n).map(Move::Flip).collect();
        if cfg.include_reindex {
            for a in 1..=n {
                for b in a + 1..=n {
                    moves.push(Move::Reindex(Permutation::transposition(n, a, b)));
                }
            }
        }

        let mut cursor = 0;
        while cursor < g.nodes.len() {
            let here = g.nodes[cursor].clone();
            for mv in &moves {
                let tag = match mv {
                    Move::Flip(i) => {
                        let t = here.triangulation.classify_flip(*i).tag;
                        if t == FlipTag::Degenerate {
                            continue;
                        }
                        Some(t)
                    }
                    Move::Reindex(_) => None,
                };
                let next = here.triangulation.apply_move(mv);
                let marking = classical_move(&here.marking, &here.triangulation, mv);
                let key = (next.canonical(), marking);
                let to = match index.get(&key) {
                    Some(&to) => to,
                    None if here.depth >= cfg.depth => continue,
                    None if g.nodes.len() >= cfg.node_budget => {
                        g.truncated = true;
                        continue;
                    }
                    None => {
                        let to = g.nodes.len();
                        g.nodes.push(GraphNode {
                            triangulation: next,
                            marking: key.1.clone(),
                            depth: here.depth + 1,
                            parent: Some(g.arcs.len()),
                        });
                        index.insert(key, to);
                        to
                    }
                };
                g.arcs.push(GraphArc { from: cursor, to, mv: mv.clone(), tag });
            }
            cursor += 1;
        }
        g
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[GraphArc] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Moves along the tree from the root to `node`.
    pub fn path_to(&self, node: usize) -> Vec<Move> {
        let mut out = Vec::new();
        let mut at = node;
        while let Some(a) = self.nodes[at].parent {
            out.push(self.arcs[a].mv.clone());
            at = self.arcs[a].from;
        }
        out.reverse();
        out
    }

    /// Node reached from the root by a walk, if it was explored.
    pub fn find(&self, tri: &IdealTriangulation, marking: &[BigRational]) -> Option<usize> {
        let c = tri.canonical();
        self.nodes.iter().position(|v| v.triangulation.canonical() == c && v.marking == marking)
    }

    /// One closed walk at the root per non-tree arc: down the tree to the
    /// arc, across it and back up. Reverse copies of arcs are skipped.
    pub fn cycles(&self) -> Vec<Vec<Move>> {
        let key = |a: &GraphArc| {
            if a.from <= a.to {
                (a.from, a.to, a.mv.to_string())
            } else {
                (a.to, a.from, a.mv.inverse().to_string())
            }
        };
        let mut seen: BTreeSet<(usize, usize, String)> =
            self.nodes.iter().filter_map(|v| v.parent).map(|a| key(&self.arcs[a])).collect();
        let mut out = Vec::new();
        for arc in &self.arcs {
            if !seen.insert(key(arc)) {
                continue;
            }
            let mut walk = self.path_to(arc.from);
            walk.push(arc.mv.clone());
            walk.extend(self.path_to(arc.to).iter().rev().map(Move::inverse));
            out.push(walk);
        }
        out
    }

    /// Flip cases met on the arcs.
    pub fn cases_seen(&self) -> BTreeSet<FlipTag> {
        self.arcs.iter().filter_map(|a| a.tag).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::examples::*;

    #[test]
    fn depth_zero_and_one() {
        let t = once_punctured_torus();
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 0, ..Default::default() });
        assert_eq!(g.node_count(), 1);
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 1, ..Default::default() });
        assert_eq!(g.node_count(), 4);
        assert!(!g.truncated());
    }

    #[test]
    fn budget_sets_truncation() {
        let t = five_punctured_sphere();
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 3, node_budget: 10, include_reindex: false });
        assert_eq!(g.node_count(), 10);
        assert!(g.truncated());
    }

    #[test]
    fn cycles_close_up() {
        let t = once_punctured_torus();
        let g = FlipGraph::explore(&t, &FlipGraphConfig { depth: 3, node_budget: 1000, include_reindex: true });
        let cycles = g.cycles();
        assert!(!cycles.is_empty());
        for c in &cycles {
            let mut here = t.clone();
            let mut x = reference_point(3);
            for mv in c {
                x = classical_move(&x, &here, mv);
                here = here.apply_move(mv);
            }
            assert!(here.same_as(&t));
            assert_eq!(x, reference_point(3));
        }
    }

    #[test]
    fn pentagon_walk_reaches_reindexed_start() {
        let t = five_punctured_sphere();
        let (i, j) = PENTAGON_DIAGONALS;
        let walk = [i, j, i, j, i].map(Move::Flip);
        let mut here = t.clone();
        let mut x = reference_point(9);
        for mv in &walk {
            x = classical_move(&x, &here, mv);
            here = here.apply_move(mv);
        }
        let swap = Permutation::transposition(9, i, j);
        assert!(here.same_as(&t.reindex(&swap)));
        assert_eq!(x, classical_move(&reference_point(9), &t, &Move::Reindex(swap)));
    }
}
