//! Agent identities, agent sets, block configurations and partitions.
//!
//! A joint state of several agents is a [`BlockConfig`]: a flat coordinate
//! vector holding `dim` coordinates per agent, laid out in ascending agent
//! order. Factorizing a joint state yields a [`Partition`] whose blocks are
//! again `BlockConfig`s over pairwise-disjoint agent sets.

use std::fmt;

use crate::error::{Error, Result};

/// Largest number of agents [`enumerate_partitions`] accepts.
pub const MAX_ENUMERATED_AGENTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of agents stored as a bitmask, so ordering and equality are canonical.
///
/// Iteration always yields members in ascending order. The integer order of
/// the mask is the canonical key used to order agent sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AgentSet(u64);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn singleton(agent: AgentId) -> Self {
        assert!(agent.0 < 64, "agent index {} out of range", agent.0);
        AgentSet(1 << agent.0)
    }

    /// The set `{0, 1, ..., n-1}`.
    pub fn first_n(n: usize) -> Self {
        assert!(n <= 64);
        if n == 64 {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        AgentSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, agent: AgentId) -> bool {
        agent.0 < 64 && self.0 & (1 << agent.0) != 0
    }

    pub fn is_subset(self, other: AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: AgentSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 | other.0)
    }

    pub fn difference(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = AgentId> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(AgentId(i))
        })
    }

    /// Position of `agent` within the ascending member order.
    pub fn rank(self, agent: AgentId) -> Option<usize> {
        if !self.contains(agent) {
            return None;
        }
        Some((self.0 & ((1u64 << agent.0) - 1)).count_ones() as usize)
    }
}

impl FromIterator<AgentId> for AgentSet {
    fn from_iter<I: IntoIterator<Item = AgentId>>(iter: I) -> Self {
        iter.into_iter()
            .fold(AgentSet::EMPTY, |acc, a| acc.union(AgentSet::singleton(a)))
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A configuration of the agents in `agents`, `dim` coordinates each.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockConfig {
    agents: AgentSet,
    dim: usize,
    coords: Vec<f64>,
}

impl BlockConfig {
    pub fn new(agents: AgentSet, dim: usize, coords: Vec<f64>) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Malformed("empty agent set".into()));
        }
        if dim == 0 || coords.len() != dim * agents.len() {
            return Err(Error::Malformed(format!(
                "{} coordinates for {} agents of dimension {}",
                coords.len(),
                agents.len(),
                dim
            )));
        }
        Ok(BlockConfig {
            agents,
            dim,
            coords,
        })
    }

    pub fn single(agent: AgentId, coords: Vec<f64>) -> Self {
        let dim = coords.len();
        BlockConfig::new(AgentSet::singleton(agent), dim, coords).expect("non-empty coordinates")
    }

    pub fn agents(&self) -> AgentSet {
        self.agents
    }

    /// Coordinates per agent.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the joint space this configuration lives in.
    pub fn joint_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn agent_coords(&self, agent: AgentId) -> Option<&[f64]> {
        let k = self.agents.rank(agent)?;
        Some(&self.coords[k * self.dim..(k + 1) * self.dim])
    }

    /// `(agent, coordinates)` pairs in ascending agent order.
    pub fn per_agent(&self) -> impl Iterator<Item = (AgentId, &[f64])> {
        self.agents.iter().zip(self.coords.chunks_exact(self.dim))
    }

    pub fn distance(&self, other: &BlockConfig) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Assemble a joint configuration from blocks over disjoint agent sets.
pub fn join(blocks: &[&BlockConfig]) -> Result<BlockConfig> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Malformed("join of zero blocks".into()))?;
    let dim = first.dim;
    let mut agents = AgentSet::EMPTY;
    for b in blocks {
        if b.dim != dim {
            return Err(Error::Malformed(
                "blocks of different agent dimension".into(),
            ));
        }
        if !agents.is_disjoint(b.agents) {
            return Err(Error::Overlap(agents, b.agents));
        }
        agents = agents.union(b.agents);
    }
    let mut coords = vec![0.0; dim * agents.len()];
    for b in blocks {
        for (agent, c) in b.per_agent() {
            let k = agents.rank(agent).expect("agent in union");
            coords[k * dim..(k + 1) * dim].copy_from_slice(c);
        }
    }
    Ok(BlockConfig {
        agents,
        dim,
        coords,
    })
}

/// Restrict `joint` to the agents of `subset`.
pub fn project(joint: &BlockConfig, subset: AgentSet) -> Result<BlockConfig> {
    if subset.is_empty() || !subset.is_subset(joint.agents) {
        return Err(Error::NotSubset {
            subset,
            superset: joint.agents,
        });
    }
    let mut coords = Vec::with_capacity(subset.len() * joint.dim);
    for agent in subset.iter() {
        coords.extend_from_slice(joint.agent_coords(agent).expect("subset member"));
    }
    Ok(BlockConfig {
        agents: subset,
        dim: joint.dim,
        coords,
    })
}

/// A grouping of a joint configuration into blocks over disjoint agent sets.
/// Blocks are kept sorted by their agent-set key.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<BlockConfig>,
}

impl Partition {
    pub fn new(mut blocks: Vec<BlockConfig>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Malformed("partition without blocks".into()));
        }
        let mut seen = AgentSet::EMPTY;
        for b in &blocks {
            if !seen.is_disjoint(b.agents) {
                return Err(Error::Overlap(seen, b.agents));
            }
            seen = seen.union(b.agents);
        }
        blocks.sort_by_key(|b| b.agents);
        Ok(Partition { blocks })
    }

    /// Split `joint` according to `shape`, a list of disjoint agent sets
    /// covering exactly `joint.agents()`.
    pub fn from_shape(joint: &BlockConfig, shape: &[AgentSet]) -> Result<Self> {
        let union = shape.iter().fold(AgentSet::EMPTY, |acc, s| acc.union(*s));
        if union != joint.agents {
            return Err(Error::AgentSetMismatch(union, joint.agents));
        }
        let blocks = shape
            .iter()
            .map(|s| project(joint, *s))
            .collect::<Result<Vec<_>>>()?;
        Partition::new(blocks)
    }

    pub fn blocks(&self) -> &[BlockConfig] {
        &self.blocks
    }

    pub fn agents(&self) -> AgentSet {
        self.blocks
            .iter()
            .fold(AgentSet::EMPTY, |acc, b| acc.union(b.agents))
    }

    pub fn shape(&self) -> Vec<AgentSet> {
        self.blocks.iter().map(|b| b.agents).collect()
    }

    pub fn into_blocks(self) -> Vec<BlockConfig> {
        self.blocks
    }
}

/// A non-empty subset of a partition's blocks, treated as one joint state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockGroup {
    /// Indices into the parent partition's blocks, ascending.
    pub members: Vec<usize>,
    pub agents: AgentSet,
}

impl BlockGroup {
    pub fn joint(&self, partition: &Partition) -> BlockConfig {
        let blocks: Vec<&BlockConfig> =
            self.members.iter().map(|&i| &partition.blocks[i]).collect();
        join(&blocks).expect("partition blocks are disjoint")
    }

    pub fn is_split(&self) -> bool {
        self.members.len() > 1
    }
}

/// All `2^k - 1` non-empty groups of a `k`-block partition, ascending by the
/// canonical key of their union agent set.
pub fn powerset_groups(partition: &Partition) -> Vec<BlockGroup> {
    let k = partition.blocks.len();
    assert!(k < 32, "partition with {k} blocks");
    let mut groups: Vec<BlockGroup> = (1u32..(1 << k))
        .map(|sel| {
            let members: Vec<usize> = (0..k).filter(|i| sel & (1 << i) != 0).collect();
            let agents = members.iter().fold(AgentSet::EMPTY, |acc, &i| {
                acc.union(partition.blocks[i].agents)
            });
            BlockGroup { members, agents }
        })
        .collect();
    groups.sort_by_key(|g| g.agents);
    groups
}

/// Every set partition of `set`, as lists of blocks. The count is the Bell number of `|set|`.
pub fn enumerate_partitions(set: AgentSet) -> Result<Vec<Vec<AgentSet>>> {
    if set.len() > MAX_ENUMERATED_AGENTS {
        return Err(Error::TooManyAgents {
            what: "partition enumeration",
            max: MAX_ENUMERATED_AGENTS,
            got: set.len(),
        });
    }
    let members: Vec<AgentId> = set.iter().collect();
    let mut out = Vec::new();
    let mut blocks: Vec<AgentSet> = Vec::new();
    extend_partitions(&members, &mut blocks, &mut out);
    Ok(out)
}

fn extend_partitions(rest: &[AgentId], blocks: &mut Vec<AgentSet>, out: &mut Vec<Vec<AgentSet>>) {
    let Some((&agent, rest)) = rest.split_first() else {
        if !blocks.is_empty() {
            out.push(blocks.clone());
        }
        return;
    };
    let single = AgentSet::singleton(agent);
    for i in 0..blocks.len() {
        let saved = blocks[i];
        blocks[i] = saved.union(single);
        extend_partitions(rest, blocks, out);
        blocks[i] = saved;
    }
    blocks.push(single);
    extend_partitions(rest, blocks, out);
    blocks.pop();
}
