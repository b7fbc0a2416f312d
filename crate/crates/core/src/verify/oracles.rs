//! Independent reference implementations used to check the planner's
//! geometric and graph routines. They favour obviousness over speed and
//! share no code with the paths they check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{AgentId, AgentSet, BlockConfig};
use crate::environment::Environment;
use crate::factorization::{Region, RegionShape};
use crate::hypergraph::{NodeId, PlanHypergraph};

fn lerp(a: &[f64], b: &[f64], tau: f64) -> [f64; 2] {
    [a[0] + tau * (b[0] - a[0]), a[1] + tau * (b[1] - a[1])]
}

fn agent_paths<'a>(a: &'a BlockConfig, b: &'a BlockConfig) -> Vec<(&'a [f64], &'a [f64])> {
    a.coords().chunks(2).zip(b.coords().chunks(2)).collect()
}

/// Smallest signed clearance to walls and obstacles over `steps + 1` evenly
/// spaced instants (negative means penetration).
pub fn dense_obstacle_margin(
    env: &Environment,
    a: &BlockConfig,
    b: &BlockConfig,
    steps: usize,
) -> f64 {
    let r = env.radius();
    let mut margin = f64::INFINITY;
    for (p0, p1) in agent_paths(a, b) {
        for k in 0..=steps {
            let p = lerp(p0, p1, k as f64 / steps as f64);
            let wall = p[0].min(p[1]).min(1.0 - p[0]).min(1.0 - p[1]) - r;
            margin = margin.min(wall);
            for o in &env.workspace.obstacles {
                let cx = p[0].clamp(o.min[0], o.max[0]);
                let cy = p[1].clamp(o.min[1], o.max[1]);
                let d = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt();
                margin = margin.min(d - r);
            }
        }
    }
    margin
}

/// Smallest pairwise separation minus `2r` over evenly spaced instants.
pub fn dense_pair_margin(env: &Environment, a: &BlockConfig, b: &BlockConfig, steps: usize) -> f64 {
    let paths = agent_paths(a, b);
    let mut margin = f64::INFINITY;
    for k in 0..=steps {
        let tau = k as f64 / steps as f64;
        let pos: Vec<[f64; 2]> = paths.iter().map(|(p0, p1)| lerp(p0, p1, tau)).collect();
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                let d = ((pos[i][0] - pos[j][0]).powi(2) + (pos[i][1] - pos[j][1]).powi(2)).sqrt();
                margin = margin.min(d - 2.0 * env.radius());
            }
        }
    }
    margin
}

pub fn dense_obstacle_free(
    env: &Environment,
    a: &BlockConfig,
    b: &BlockConfig,
    steps: usize,
) -> bool {
    dense_obstacle_margin(env, a, b, steps) >= 0.0
}

pub fn dense_agents_free(
    env: &Environment,
    a: &BlockConfig,
    b: &BlockConfig,
    steps: usize,
) -> bool {
    dense_pair_margin(env, a, b, steps) >= 0.0
}

/// Cone membership by angle and axial distance.
pub fn cone_contains_by_angle(
    apex: [f64; 2],
    axis: [f64; 2],
    half_angle: f64,
    length: f64,
    p: [f64; 2],
) -> bool {
    if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
        return false;
    }
    let q = [p[0] - apex[0], p[1] - apex[1]];
    let norm = q[0].hypot(q[1]);
    if norm == 0.0 {
        return true;
    }
    let along = q[0] * axis[0] + q[1] * axis[1];
    let angle = (q[1].atan2(q[0]) - axis[1].atan2(axis[0])).abs();
    let angle = angle.min(2.0 * std::f64::consts::PI - angle);
    angle <= half_angle && along <= length
}

fn region_contains(r: &Region, p: [f64; 2]) -> bool {
    match r.shape {
        RegionShape::Cone(c) => cone_contains_by_angle(c.apex, c.axis, c.half_angle, c.length, p),
        RegionShape::Disc { center, radius } => {
            (0.0..=1.0).contains(&p[0])
                && (0.0..=1.0).contains(&p[1])
                && (p[0] - center[0]).hypot(p[1] - center[1]) <= radius
        }
    }
}

fn boundary_samples(r: &Region, n: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    let seg = |a: [f64; 2], b: [f64; 2], pts: &mut Vec<[f64; 2]>| {
        for k in 0..=n {
            let t = k as f64 / n as f64;
            pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    };
    match r.shape {
        RegionShape::Cone(c) => {
            let slant = c.length / c.half_angle.cos();
            let ray = |s: f64| {
                let th = c.axis[1].atan2(c.axis[0]) + s * c.half_angle;
                [c.apex[0] + slant * th.cos(), c.apex[1] + slant * th.sin()]
            };
            let (l, rr) = (ray(1.0), ray(-1.0));
            seg(c.apex, l, &mut pts);
            seg(c.apex, rr, &mut pts);
            seg(l, rr, &mut pts);
        }
        RegionShape::Disc { center, radius } => {
            for k in 0..4 * n {
                let t = 2.0 * std::f64::consts::PI * k as f64 / (4 * n) as f64;
                pts.push([center[0] + radius * t.cos(), center[1] + radius * t.sin()]);
            }
        }
    }
    for (a, b) in [
        ([0.0, 0.0], [1.0, 0.0]),
        ([1.0, 0.0], [1.0, 1.0]),
        ([1.0, 1.0], [0.0, 1.0]),
        ([0.0, 1.0], [0.0, 0.0]),
    ] {
        seg(a, b, &mut pts);
    }
    pts.retain(|&p| region_contains(r, p));
    pts
}

/// Distance between two regions estimated from boundary samples; exactly 0
/// when a sample of one lies in the other. Never underestimates.
pub fn sampled_region_distance(a: &Region, b: &Region, n: usize) -> f64 {
    let (sa, sb) = (boundary_samples(a, n), boundary_samples(b, n));
    if sa.iter().any(|&p| region_contains(b, p)) || sb.iter().any(|&p| region_contains(a, p)) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in &sa {
        for q in &sb {
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    best
}

/// Goal predicate for [`random_hypergraph`]: the first coordinate is exactly 1.
pub fn unit_goal(c: &BlockConfig) -> bool {
    c.coords()[0] == 1.0
}

/// A random two-agent hypergraph with at most `max_nodes` nodes and at most
/// `max_splits` splitting edges. Node 0 is the `{0,1}` root.
pub fn random_hypergraph(seed: u64, max_nodes: usize, max_splits: usize) -> PlanHypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint = AgentSet::first_n(2);
    let sets = [
        joint,
        AgentSet::singleton(AgentId(0)),
        AgentSet::singleton(AgentId(1)),
    ];
    let mut g = PlanHypergraph::new();
    let n = rng.gen_range(3..=max_nodes);
    for k in 0..n {
        let set = if k == 0 {
            joint
        } else {
            sets[rng.gen_range(0..3)]
        };
        let v = if k > 0 && rng.gen_bool(0.3) { 1.0 } else { 0.0 };
        g.add_node(BlockConfig::new(set, 1, vec![v; set.len()]).unwrap(), None);
    }
    g.add_root(NodeId(0));
    let members = |g: &PlanHypergraph, s: AgentSet| g.set_members(s).to_vec();
    for _ in 0..rng.gen_range(0..3 * n) {
        let s = sets[rng.gen_range(0..3)];
        let m = members(&g, s);
        if m.len() < 2 {
            continue;
        }
        let (a, b) = (m[rng.gen_range(0..m.len())], m[rng.gen_range(0..m.len())]);
        let cost = rng.gen_range(0.0..4.0);
        if rng.gen_bool(0.7) {
            g.add_hyperedge(a, vec![b], cost).unwrap();
        } else {
            g.add_arc(a, b, cost).unwrap();
        }
    }
    let (j, l, r) = (
        members(&g, joint),
        members(&g, sets[1]),
        members(&g, sets[2]),
    );
    if !l.is_empty() && !r.is_empty() {
        for _ in 0..rng.gen_range(0..=max_splits) {
            let src = j[rng.gen_range(0..j.len())];
            let targets = vec![l[rng.gen_range(0..l.len())], r[rng.gen_range(0..r.len())]];
            g.add_hyperedge(src, targets, rng.gen_range(0.0..4.0))
                .unwrap();
        }
    }
    g
}

/// Exhaustive search over hyperpaths whose branches are simple paths.
pub fn brute_force_best_cost(
    g: &PlanHypergraph,
    goal: impl Fn(&BlockConfig) -> bool,
) -> Option<f64> {
    fn best(
        g: &PlanHypergraph,
        n: NodeId,
        visited: &mut Vec<bool>,
        goal: &dyn Fn(&BlockConfig) -> bool,
    ) -> f64 {
        let mut b = if goal(&g.node(n).config) {
            0.0
        } else {
            f64::INFINITY
        };
        visited[n.0] = true;
        for &e in g.out_edges(n) {
            let edge = g.edge(e);
            if edge.targets.len() == 1 {
                let m = edge.targets[0];
                if !visited[m.0] {
                    b = b.min(edge.cost + best(g, m, visited, goal));
                }
            } else {
                let branch: f64 = edge
                    .targets
                    .iter()
                    .map(|&t| best(g, t, visited, goal))
                    .sum();
                b = b.min(edge.cost + branch);
            }
        }
        visited[n.0] = false;
        b
    }
    let mut visited = vec![false; g.node_count()];
    let mut total = 0.0;
    for &r in g.roots() {
        let v = best(g, r, &mut visited, &goal);
        if !v.is_finite() {
            return None;
        }
        total += v;
    }
    if g.roots().is_empty() {
        None
    } else {
        Some(total)
    }
}

/// Canonical, id-free description of a graph: sorted node keys and sorted
/// edge keys `(source key, target keys, cost bits)`.
pub type NodeKey = (u64, Vec<u64>);
pub type EdgeKey = (NodeKey, Vec<NodeKey>, u64);

pub fn graph_signature(g: &PlanHypergraph) -> (Vec<NodeKey>, Vec<EdgeKey>) {
    let key = |id: NodeId| -> NodeKey {
        let c = &g.node(id).config;
        (
            c.agents().mask(),
            c.coords().iter().map(|x| x.to_bits()).collect(),
        )
    };
    let mut nodes: Vec<NodeKey> = (0..g.node_count()).map(|i| key(NodeId(i))).collect();
    let mut edges: Vec<EdgeKey> = g
        .edges()
        .iter()
        .map(|e| {
            let mut t: Vec<NodeKey> = e.targets.iter().map(|&t| key(t)).collect();
            t.sort();
            (key(e.source), t, e.cost.to_bits())
        })
        .collect();
    nodes.sort();
    edges.sort();
    (nodes, edges)
}

/// Sum of per-agent Euclidean segment lengths, written out longhand.
pub fn per_agent_length_sum(a: &BlockConfig, b: &BlockConfig) -> f64 {
    let mut total = 0.0;
    for agent in a.agents().iter() {
        let p = a.agent_coords(agent).unwrap();
        let q = b.agent_coords(agent).unwrap();
        total += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    }
    total
}
