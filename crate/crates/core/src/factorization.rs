//! Factorization heuristics and the `factorize` routine.
//!
//! A heuristic answers, for two agent blocks, whether their remaining
//! problems can be solved independently. [`factorize`] lifts that pairwise
//! predicate to a partition by taking connected components of the
//! dependence graph (agents are linked when the heuristic cannot separate
//! them).
//!
//! The goal-cone heuristic assumes each agent's remaining optimal path stays
//! inside a cone spanned around the beeline from its position to the center
//! of its goal region. Two agents are independent when their cones are more
//! than `2 * agent_radius` apart. Cones double as the per-node "future
//! resources" used by the coherency check on new edges.

use std::f64::consts::FRAC_PI_8;

use crate::agents::{project, AgentId, AgentSet, BlockConfig, Partition};
use crate::environment::{min_pair_distance_sq, Environment, Rect};
use crate::error::{Error, Result};

pub const DEFAULT_HALF_ANGLE: f64 = FRAC_PI_8;

/// Positions closer than this to the goal center get the degenerate disc region.
const DEGENERATE_AXIS: f64 = 1e-12;

/// Sides of the polygon circumscribing a disc region.
const DISC_SIDES: usize = 16;

type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn rotate(v: P2, angle: f64) -> P2 {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// A goal-directed cone: the points within `half_angle` of `axis` as seen
/// from `apex`, no further than `length` along the axis, inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub apex: P2,
    pub axis: P2,
    pub half_angle: f64,
    pub length: f64,
}

impl Cone {
    fn boundary_rays(&self) -> (P2, P2) {
        (
            rotate(self.axis, self.half_angle),
            rotate(self.axis, -self.half_angle),
        )
    }

    pub fn contains(&self, p: P2) -> bool {
        if !in_unit_square(p) {
            return false;
        }
        let q = sub(p, self.apex);
        let along = dot(q, self.axis);
        let (left, right) = self.boundary_rays();
        along >= 0.0 && along <= self.length && cross(left, q) <= 0.0 && cross(right, q) >= 0.0
    }

    /// The cone as a convex polygon: the unit square cut by the four bounding half-planes.
    pub fn polygon(&self) -> Vec<P2> {
        let (left, right) = self.boundary_rays();
        let a = self.apex;
        let axis = self.axis;
        let len = self.length;
        let mut poly = unit_square();
        poly = clip(&poly, |p| dot(sub(p, a), axis));
        poly = clip(&poly, |p| len - dot(sub(p, a), axis));
        poly = clip(&poly, |p| -cross(left, sub(p, a)));
        clip(&poly, |p| cross(right, sub(p, a)))
    }
}

/// Per-agent future-resources region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionShape {
    Cone(Cone),
    /// Used when the agent already sits at its goal center.
    Disc {
        center: P2,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub shape: RegionShape,
    /// The goal-region center the region was built toward.
    pub target: P2,
}

impl Region {
    pub fn contains(&self, p: P2) -> bool {
        match self.shape {
            RegionShape::Cone(c) => c.contains(p),
            RegionShape::Disc { center, radius } => {
                in_unit_square(p) && sub(p, center)[0].hypot(sub(p, center)[1]) <= radius
            }
        }
    }

    /// A convex polygon containing the region (exact for cones).
    pub fn polygon(&self) -> Vec<P2> {
        match self.shape {
            RegionShape::Cone(c) => c.polygon(),
            RegionShape::Disc { center, radius } => {
                let circ = radius / (std::f64::consts::PI / DISC_SIDES as f64).cos();
                let ring: Vec<P2> = (0..DISC_SIDES)
                    .map(|k| {
                        let t = 2.0 * std::f64::consts::PI * k as f64 / DISC_SIDES as f64;
                        [center[0] + circ * t.cos(), center[1] + circ * t.sin()]
                    })
                    .collect();
                clip_to_square(&ring)
            }
        }
    }

    /// Lower bound on the distance between two regions (exact for cones).
    pub fn distance(&self, other: &Region) -> f64 {
        polygon_distance(&self.polygon(), &other.polygon())
    }
}

/// Cone from `position` toward the center of `goal`, extended past the goal
/// region by its circumradius and clipped to the unit square.
pub fn cone_region(position: P2, goal: &Rect, half_angle: f64) -> Region {
    let target = goal.center();
    let to_goal = sub(target, position);
    let dist = to_goal[0].hypot(to_goal[1]);
    let shape = if dist < DEGENERATE_AXIS {
        RegionShape::Disc {
            center: target,
            radius: goal.circumradius(),
        }
    } else {
        RegionShape::Cone(Cone {
            apex: position,
            axis: [to_goal[0] / dist, to_goal[1] / dist],
            half_angle,
            length: dist + goal.circumradius(),
        })
    };
    Region { shape, target }
}

/// Future-resources regions of one node, aligned with its agents in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct FutureResources {
    pub agents: AgentSet,
    pub regions: Vec<Region>,
}

impl FutureResources {
    pub fn region(&self, agent: AgentId) -> Option<&Region> {
        self.agents.rank(agent).map(|k| &self.regions[k])
    }
}

/// Factorization heuristic contract.
///
/// `pairwise(a, b) == true` must imply that the two blocks' remaining
/// problems are independent; it must be symmetric. `resources` returns the
/// per-agent region used for the coherency constraint, or `None` when the
/// heuristic imposes none.
pub trait FactorizationHeuristic: Send + Sync {
    fn name(&self) -> &str;
    fn pairwise(&self, a: &BlockConfig, b: &BlockConfig) -> bool;
    fn resources(&self, x: &BlockConfig) -> Option<FutureResources>;
}

/// Split `x` into the connected components of its dependence graph.
pub fn factorize(x: &BlockConfig, h: &dyn FactorizationHeuristic) -> Partition {
    let agents: Vec<AgentId> = x.agents().iter().collect();
    let singles: Vec<BlockConfig> = agents
        .iter()
        .map(|&a| project(x, AgentSet::singleton(a)).expect("member"))
        .collect();
    let n = agents.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if !h.pairwise(&singles[i], &singles[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut shape: Vec<AgentSet> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for (i, &agent) in agents.iter().enumerate() {
        let r = find(&mut parent, i);
        let slot = *root_of[r].get_or_insert_with(|| {
            shape.push(AgentSet::EMPTY);
            shape.len() - 1
        });
        shape[slot] = shape[slot].union(AgentSet::singleton(agent));
    }
    Partition::from_shape(x, &shape).expect("components cover the agents")
}

/// Coherency of a new edge: every destination agent lies inside the origin's
/// region for that agent, and the intersection of the destination's fresh
/// region with the origin's still contains the agent's goal center.
pub fn coherent(
    h: &dyn FactorizationHeuristic,
    origin: Option<&FutureResources>,
    destinations: &[&BlockConfig],
) -> Result<bool> {
    let origin =
        origin.ok_or_else(|| Error::Contract("origin node carries no future resources".into()))?;
    for dest in destinations {
        let fresh = h
            .resources(dest)
            .ok_or_else(|| Error::Contract(format!("heuristic {} gives no resources", h.name())))?;
        for (agent, c) in dest.per_agent() {
            let Some(parent) = origin.region(agent) else {
                return Err(Error::NotSubset {
                    subset: dest.agents(),
                    superset: origin.agents,
                });
            };
            let own = fresh
                .region(agent)
                .expect("fresh resources cover the block");
            if !parent.contains([c[0], c[1]])
                || !(own.contains(own.target) && parent.contains(own.target))
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Never splits anything; factorized planning then reduces to joint-space planning.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeverFactorize;

impl FactorizationHeuristic for NeverFactorize {
    fn name(&self) -> &str {
        "never"
    }

    fn pairwise(&self, _: &BlockConfig, _: &BlockConfig) -> bool {
        false
    }

    fn resources(&self, _: &BlockConfig) -> Option<FutureResources> {
        None
    }
}

/// The goal-cone heuristic with coherency regions.
#[derive(Debug, Clone)]
pub struct ConeHeuristic {
    goals: Vec<Rect>,
    half_angle: f64,
    clearance: f64,
}

impl ConeHeuristic {
    pub fn new(env: &Environment, half_angle: f64) -> Result<Self> {
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Contract(format!(
                "cone half-angle {half_angle} outside (0, pi/2]"
            )));
        }
        Ok(ConeHeuristic {
            goals: env.goals.clone(),
            half_angle,
            clearance: 2.0 * env.radius(),
        })
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn region(&self, agent: AgentId, position: P2) -> Region {
        cone_region(position, &self.goals[agent.0], self.half_angle)
    }
}

impl FactorizationHeuristic for ConeHeuristic {
    fn name(&self) -> &str {
        "cone"
    }

    fn pairwise(&self, a: &BlockConfig, b: &BlockConfig) -> bool {
        if !a.agents().is_disjoint(b.agents()) {
            return false;
        }
        a.per_agent().all(|(ia, ca)| {
            let ra = self.region(ia, [ca[0], ca[1]]);
            b.per_agent().all(|(ib, cb)| {
                let rb = self.region(ib, [cb[0], cb[1]]);
                ra.distance(&rb) > self.clearance
            })
        })
    }

    fn resources(&self, x: &BlockConfig) -> Option<FutureResources> {
        Some(FutureResources {
            agents: x.agents(),
            regions: x
                .per_agent()
                .map(|(a, c)| self.region(a, [c[0], c[1]]))
                .collect(),
        })
    }
}

/// Reference heuristic for obstacle-free scenarios: two agents are declared
/// independent when their straight-line motions to the nearest point of their
/// goal regions never bring the discs closer than `2r` under simultaneous timing.
#[derive(Debug, Clone)]
pub struct StraightLineOracle {
    goals: Vec<Rect>,
    clearance: f64,
}

impl StraightLineOracle {
    pub fn new(env: &Environment) -> Result<Self> {
        if !env.workspace.obstacles.is_empty() {
            return Err(Error::Contract(
                "straight-line oracle is only valid without obstacles".into(),
            ));
        }
        Ok(StraightLineOracle {
            goals: env.goals.clone(),
            clearance: 2.0 * env.radius(),
        })
    }

    fn target(&self, agent: AgentId, p: &[f64]) -> P2 {
        let g = &self.goals[agent.0];
        [
            p[0].clamp(g.min[0], g.max[0]),
            p[1].clamp(g.min[1], g.max[1]),
        ]
    }
}

impl FactorizationHeuristic for StraightLineOracle {
    fn name(&self) -> &str {
        "straight-line-oracle"
    }

    fn pairwise(&self, a: &BlockConfig, b: &BlockConfig) -> bool {
        if !a.agents().is_disjoint(b.agents()) {
            return false;
        }
        a.per_agent().all(|(ia, ca)| {
            b.per_agent().all(|(ib, cb)| {
                let d2 = min_pair_distance_sq(
                    [ca[0], ca[1]],
                    self.target(ia, ca),
                    [cb[0], cb[1]],
                    self.target(ib, cb),
                );
                d2 >= self.clearance * self.clearance
            })
        })
    }

    fn resources(&self, _: &BlockConfig) -> Option<FutureResources> {
        None
    }
}

fn in_unit_square(p: P2) -> bool {
    (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])
}

fn unit_square() -> Vec<P2> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
}

fn clip_to_square(poly: &[P2]) -> Vec<P2> {
    let mut out = poly.to_vec();
    out = clip(&out, |p| p[0]);
    out = clip(&out, |p| 1.0 - p[0]);
    out = clip(&out, |p| p[1]);
    clip(&out, |p| 1.0 - p[1])
}

/// Sutherland-Hodgman step keeping the part where `side(p) >= 0`.
fn clip(poly: &[P2], side: impl Fn(P2) -> f64) -> Vec<P2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn point_in_convex(p: P2, poly: &[P2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let c = cross(sub(b, a), sub(p, a));
        if c != 0.0 {
            if sign != 0.0 && c.signum() != sign {
                return false;
            }
            sign = c.signum();
        }
    }
    true
}

fn segments_intersect(a: P2, b: P2, c: P2, d: P2) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn point_segment(p: P2, a: P2, b: P2) -> f64 {
    crate::environment::point_segment_distance(p, a, b)
}

/// Distance between two convex polygons (0 when they overlap).
pub fn polygon_distance(a: &[P2], b: &[P2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    if a.iter().any(|&p| point_in_convex(p, b)) || b.iter().any(|&p| point_in_convex(p, a)) {
        return 0.0;
    }
    let edges = |poly: &[P2]| -> Vec<(P2, P2)> {
        (0..poly.len())
            .map(|i| (poly[i], poly[(i + 1) % poly.len()]))
            .collect()
    };
    let (ea, eb) = (edges(a), edges(b));
    let mut best = f64::INFINITY;
    for &(p, q) in &ea {
        for &(r, s) in &eb {
            if segments_intersect(p, q, r, s) {
                return 0.0;
            }
            best = best
                .min(point_segment(p, r, s))
                .min(point_segment(q, r, s))
                .min(point_segment(r, p, q))
                .min(point_segment(s, p, q));
        }
    }
    best
}
