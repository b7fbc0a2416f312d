//! The planner's motion hypergraph.
//!
//! Nodes are keyed by their agent set; every agent set has its own k-d tree
//! for radius queries. Edges are directed hyperedges from one source node to
//! one or more target nodes whose agent sets partition the source's. A
//! single-target edge is a standard edge and is normally stored in both
//! directions; a multi-target edge is a splitting edge and is directed.

mod kdtree;
mod solution;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use crate::agents::{AgentSet, BlockConfig};
use crate::error::{Error, Result};
use crate::factorization::FutureResources;

pub use kdtree::KdTree;
pub use solution::{HyperPath, PathStep, PathTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub config: BlockConfig,
    pub resources: Option<FutureResources>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperEdge {
    pub source: NodeId,
    pub targets: Vec<NodeId>,
    pub cost: f64,
    /// Set on the mirrored copy of an undirected standard edge.
    pub reverse_of: Option<EdgeId>,
}

impl HyperEdge {
    pub fn is_splitting(&self) -> bool {
        self.targets.len() > 1
    }
}

/// Connection-radius mode for factorized planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusMode {
    /// Dimension of the queried block's joint space.
    #[default]
    PerBlock,
    /// Dimension of the full joint space of all agents.
    Largest,
}

/// `min(gamma * (ln n / n)^(1/d), eta)`, or `eta` when `n <= 1`.
pub fn connection_radius(n: usize, d: usize, gamma: f64, eta: f64) -> f64 {
    if n <= 1 {
        return eta;
    }
    let n = n as f64;
    (gamma * (n.ln() / n).powf(1.0 / d as f64)).min(eta)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    /// Directed count: an undirected standard edge counts twice, a splitting edge once.
    pub edges: usize,
    pub splitting_edges: usize,
    /// `(agent set, node count)` in canonical agent-set order.
    pub per_agent_set: Vec<(String, usize)>,
}

#[derive(Debug, Clone)]
struct SetIndex {
    /// Ascending, since ids are handed out in increasing order.
    ids: Vec<NodeId>,
    tree: KdTree,
}

#[derive(Debug, Clone, Default)]
pub struct PlanHypergraph {
    nodes: Vec<Node>,
    edges: Vec<HyperEdge>,
    out_edges: Vec<Vec<EdgeId>>,
    /// Incoming standard edges only; splitting edges are followed forward.
    in_standard: Vec<Vec<EdgeId>>,
    sets: BTreeMap<AgentSet, SetIndex>,
    roots: Vec<NodeId>,
    splitting: usize,
}

impl PlanHypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, config: BlockConfig, resources: Option<FutureResources>) -> NodeId {
        let id = NodeId(self.nodes.len());
        let dim = config.joint_dim();
        let index = self
            .sets
            .entry(config.agents())
            .or_insert_with(|| SetIndex {
                ids: Vec::new(),
                tree: KdTree::new(dim),
            });
        index.ids.push(id);
        index.tree.insert(id, config.coords());
        self.nodes.push(Node { config, resources });
        self.out_edges.push(Vec::new());
        self.in_standard.push(Vec::new());
        id
    }

    /// Mark `id` as one of the initial nodes solutions start from.
    pub fn add_root(&mut self, id: NodeId) {
        self.roots.push(id);
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edge(&self, id: EdgeId) -> &HyperEdge {
        &self.edges[id.0]
    }

    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    pub fn out_edges(&self, id: NodeId) -> &[EdgeId] {
        &self.out_edges[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn agent_sets(&self) -> impl Iterator<Item = AgentSet> + '_ {
        self.sets.keys().copied()
    }

    pub fn set_members(&self, agents: AgentSet) -> &[NodeId] {
        self.sets.get(&agents).map_or(&[], |s| &s.ids)
    }

    /// Nodes over `agents` with id below `before`.
    pub fn set_size_before(&self, agents: AgentSet, before: NodeId) -> usize {
        self.set_members(agents).partition_point(|&id| id < before)
    }

    /// Nodes over exactly `query`'s agent set within joint distance `radius`,
    /// ascending by id.
    pub fn near(&self, query: &BlockConfig, radius: f64) -> Vec<NodeId> {
        let mut out = Vec::new();
        if let Some(index) = self.sets.get(&query.agents()) {
            index.tree.within(query.coords(), radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn check_edge(&self, source: NodeId, targets: &[NodeId], cost: f64) -> Result<()> {
        if source.0 >= self.nodes.len() || targets.iter().any(|t| t.0 >= self.nodes.len()) {
            return Err(Error::InvalidEdge("unknown node".into()));
        }
        if targets.is_empty() {
            return Err(Error::InvalidEdge("no targets".into()));
        }
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(Error::InvalidEdge(format!("cost {cost}")));
        }
        let mut union = AgentSet::EMPTY;
        for t in targets {
            let a = self.nodes[t.0].config.agents();
            if !union.is_disjoint(a) {
                return Err(Error::Overlap(union, a));
            }
            union = union.union(a);
        }
        let src = self.nodes[source.0].config.agents();
        if union != src {
            return Err(Error::AgentSetMismatch(src, union));
        }
        Ok(())
    }

    fn push_edge(&mut self, edge: HyperEdge) -> EdgeId {
        let id = EdgeId(self.edges.len());
        self.out_edges[edge.source.0].push(id);
        if edge.is_splitting() {
            self.splitting += 1;
        } else {
            self.in_standard[edge.targets[0].0].push(id);
        }
        self.edges.push(edge);
        id
    }

    /// Insert a hyperedge. A standard edge is mirrored so it can be
    /// traversed in both directions; a splitting edge is directed.
    pub fn add_hyperedge(
        &mut self,
        source: NodeId,
        targets: Vec<NodeId>,
        cost: f64,
    ) -> Result<EdgeId> {
        self.check_edge(source, &targets, cost)?;
        let standard = targets.len() == 1;
        let back_to = targets[0];
        let id = self.push_edge(HyperEdge {
            source,
            targets,
            cost,
            reverse_of: None,
        });
        if standard {
            self.push_edge(HyperEdge {
                source: back_to,
                targets: vec![source],
                cost,
                reverse_of: Some(id),
            });
        }
        Ok(id)
    }

    /// Insert a one-way standard edge.
    pub fn add_arc(&mut self, source: NodeId, target: NodeId, cost: f64) -> Result<EdgeId> {
        self.check_edge(source, &[target], cost)?;
        Ok(self.push_edge(HyperEdge {
            source,
            targets: vec![target],
            cost,
            reverse_of: None,
        }))
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            nodes: self.nodes.len(),
            edges: self.edges.len(),
            splitting_edges: self.splitting,
            per_agent_set: self
                .sets
                .iter()
                .map(|(a, s)| (a.to_string(), s.ids.len()))
                .collect(),
        }
    }

    /// Line-oriented text dump: `root`, `node` and `edge` records.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# factplan hypergraph v1")?;
        writeln!(
            w,
            "# root <id> | node <id> <agents> <coords...> | edge <source> <targets> <cost>"
        )?;
        for r in &self.roots {
            writeln!(w, "root {r}")?;
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let agents: Vec<String> = n.config.agents().iter().map(|a| a.to_string()).collect();
            write!(w, "node {i} {}", agents.join(","))?;
            for c in n.config.coords() {
                write!(w, " {c}")?;
            }
            writeln!(w)?;
        }
        for e in &self.edges {
            let targets: Vec<String> = e.targets.iter().map(|t| t.to_string()).collect();
            writeln!(w, "edge {} {} {}", e.source, targets.join(","), e.cost)?;
        }
        Ok(())
    }
}
