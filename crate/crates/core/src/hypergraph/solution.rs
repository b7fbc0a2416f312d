//! Optimal hyperpath extraction.
//!
//! Splitting edges only ever refine agent sets, so agent sets form a DAG.
//! Sets are processed from the most refined to the coarsest. Inside one set
//! the cost-to-goal is a shortest-path problem with terminal values: zero at
//! goal nodes, and `cost + sum of the targets' costs-to-goal` through a
//! splitting edge. A backward Dijkstra over the standard edges solves it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, NodeId, PlanHypergraph};
use crate::agents::BlockConfig;

/// A solution tree. Leaves are goal nodes; a splitting step branches into one
/// subtree per target.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTree {
    pub node: NodeId,
    pub step: Option<PathStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub edge: EdgeId,
    pub children: Vec<PathTree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperPath {
    /// One tree per initial node.
    pub roots: Vec<PathTree>,
    pub total_cost: f64,
}

impl HyperPath {
    /// Edges used by the solution, in depth-first order.
    pub fn edges(&self) -> Vec<EdgeId> {
        fn walk(t: &PathTree, out: &mut Vec<EdgeId>) {
            if let Some(s) = &t.step {
                out.push(s.edge);
                for c in &s.children {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        for r in &self.roots {
            walk(r, &mut out);
        }
        out
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        fn walk(t: &PathTree, out: &mut Vec<NodeId>) {
            match &t.step {
                None => out.push(t.node),
                Some(s) => s.children.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        for r in &self.roots {
            walk(r, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    Unreached,
    Goal,
    Edge(EdgeId),
}

#[derive(PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then on id
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PlanHypergraph {
    /// Minimum-cost hyperpath from the root nodes to goal-satisfying leaves.
    pub fn best_solution(&self, goal: impl Fn(&BlockConfig) -> bool) -> Option<HyperPath> {
        if self.roots.is_empty() {
            return None;
        }
        let n = self.nodes.len();
        let mut value = vec![f64::INFINITY; n];
        let mut choice = vec![Choice::Unreached; n];

        let mut order: Vec<_> = self.sets.keys().copied().collect();
        order.sort_by_key(|s| (s.len(), *s));

        for set in order {
            let members = &self.sets[&set].ids;
            let mut heap = BinaryHeap::new();
            for &id in members {
                if goal(&self.nodes[id.0].config) {
                    value[id.0] = 0.0;
                    choice[id.0] = Choice::Goal;
                }
                for &e in &self.out_edges[id.0] {
                    let edge = &self.edges[e.0];
                    if !edge.is_splitting() {
                        continue;
                    }
                    let v = edge.cost + edge.targets.iter().map(|t| value[t.0]).sum::<f64>();
                    if v < value[id.0] {
                        value[id.0] = v;
                        choice[id.0] = Choice::Edge(e);
                    }
                }
                if value[id.0].is_finite() {
                    heap.push(Entry(value[id.0], id));
                }
            }
            while let Some(Entry(v, id)) = heap.pop() {
                if v > value[id.0] {
                    continue;
                }
                for &e in &self.in_standard[id.0] {
                    let edge = &self.edges[e.0];
                    let cand = edge.cost + v;
                    let src = edge.source;
                    if cand < value[src.0] {
                        value[src.0] = cand;
                        choice[src.0] = Choice::Edge(e);
                        heap.push(Entry(cand, src));
                    }
                }
            }
        }

        let mut total = 0.0;
        for r in &self.roots {
            if !value[r.0].is_finite() {
                return None;
            }
            total += value[r.0];
        }
        let roots = self
            .roots
            .iter()
            .map(|&r| self.extract(r, &choice))
            .collect();
        Some(HyperPath {
            roots,
            total_cost: total,
        })
    }

    fn extract(&self, id: NodeId, choice: &[Choice]) -> PathTree {
        match choice[id.0] {
            Choice::Goal | Choice::Unreached => PathTree {
                node: id,
                step: None,
            },
            Choice::Edge(e) => PathTree {
                node: id,
                step: Some(PathStep {
                    edge: e,
                    children: self.edges[e.0]
                        .targets
                        .iter()
                        .map(|&t| self.extract(t, choice))
                        .collect(),
                }),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentId, AgentSet};
    use crate::verify::oracles;

    fn cfg(agents: &[usize], goal: bool) -> BlockConfig {
        let set: AgentSet = agents.iter().map(|&i| AgentId(i)).collect();
        let v = if goal { 1.0 } else { 0.0 };
        BlockConfig::new(set, 1, vec![v; agents.len()]).unwrap()
    }

    fn is_goal(c: &BlockConfig) -> bool {
        c.coords()[0] == 1.0
    }

    #[test]
    fn chain() {
        let mut g = PlanHypergraph::new();
        let a = g.add_node(cfg(&[0], false), None);
        let b = g.add_node(cfg(&[0], false), None);
        let c = g.add_node(cfg(&[0], true), None);
        g.add_root(a);
        g.add_hyperedge(a, vec![b], 1.0).unwrap();
        g.add_hyperedge(b, vec![c], 2.0).unwrap();
        let p = g.best_solution(is_goal).unwrap();
        assert_eq!(p.total_cost, 3.0);
        assert_eq!(p.leaves(), vec![c]);
    }

    #[test]
    fn splitting_edge_sums_branches() {
        let mut g = PlanHypergraph::new();
        let root = g.add_node(cfg(&[0, 1], false), None);
        let l = g.add_node(cfg(&[0], false), None);
        let r = g.add_node(cfg(&[1], false), None);
        let lg = g.add_node(cfg(&[0], true), None);
        let rg = g.add_node(cfg(&[1], true), None);
        g.add_root(root);
        g.add_hyperedge(root, vec![l, r], 1.0).unwrap();
        g.add_hyperedge(l, vec![lg], 2.0).unwrap();
        g.add_hyperedge(r, vec![rg], 3.0).unwrap();
        let p = g.best_solution(is_goal).unwrap();
        assert_eq!(p.total_cost, 6.0);
        let sum: f64 = p.edges().iter().map(|&e| g.edge(e).cost).sum();
        assert_eq!(sum, p.total_cost);
    }

    #[test]
    fn no_goal_means_no_solution() {
        let mut g = PlanHypergraph::new();
        let a = g.add_node(cfg(&[0], false), None);
        g.add_root(a);
        assert!(g.best_solution(is_goal).is_none());
        assert!(PlanHypergraph::new().best_solution(is_goal).is_none());
    }

    #[test]
    fn directed_arcs_are_respected() {
        let mut g = PlanHypergraph::new();
        let a = g.add_node(cfg(&[0], false), None);
        let b = g.add_node(cfg(&[0], true), None);
        g.add_root(a);
        g.add_arc(b, a, 1.0).unwrap();
        assert!(g.best_solution(is_goal).is_none());
        g.add_arc(a, b, 4.0).unwrap();
        assert_eq!(g.best_solution(is_goal).unwrap().total_cost, 4.0);
    }

    #[test]
    fn matches_brute_force_on_random_hypergraphs() {
        for seed in 0..100 {
            let g = oracles::random_hypergraph(seed, 12, 2);
            let dp = g.best_solution(oracles::unit_goal).map(|p| p.total_cost);
            let brute = oracles::brute_force_best_cost(&g, oracles::unit_goal);
            assert_eq!(dp, brute, "seed {seed}");
        }
    }
}
