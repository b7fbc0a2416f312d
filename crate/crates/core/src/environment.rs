//! Workspace geometry for disc robots on the unit square.
//!
//! Every agent is a disc of the shared `agent_radius` moving in `[0,1]^2`.
//! The square's boundary acts as a wall. Contact (distance exactly equal to
//! the clearance) counts as free; only strict penetration is a collision.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{AgentId, AgentSet, BlockConfig};
use crate::error::{Error, Result};

/// Workspace dimension per agent.
pub const DIM: usize = 2;

/// Draws per agent before [`Environment::sample_free`] gives up.
pub const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Rect { min, max }
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    /// Radius of the smallest disc around the center containing the rectangle.
    pub fn circumradius(&self) -> f64 {
        0.5 * (self.max[0] - self.min[0]).hypot(self.max[1] - self.min[1])
    }

    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]).max(0.0) * (self.max[1] - self.min[1]).max(0.0)
    }

    /// Closed-set membership.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn distance_to_point(&self, p: [f64; 2]) -> f64 {
        let dx = (self.min[0] - p[0]).max(0.0).max(p[0] - self.max[0]);
        let dy = (self.min[1] - p[1]).max(0.0).max(p[1] - self.max[1]);
        dx.hypot(dy)
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        [
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }

    /// Does the closed segment `a -> b` touch the closed rectangle? (Liang-Barsky clip.)
    pub fn intersects_segment(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for axis in 0..2 {
            let d = b[axis] - a[axis];
            if d == 0.0 {
                if a[axis] < self.min[axis] || a[axis] > self.max[axis] {
                    return false;
                }
                continue;
            }
            let mut ta = (self.min[axis] - a[axis]) / d;
            let mut tb = (self.max[axis] - a[axis]) / d;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
        true
    }

    /// Euclidean distance between the segment `a -> b` and the rectangle.
    pub fn distance_to_segment(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        if self.intersects_segment(a, b) {
            return 0.0;
        }
        let mut best = self.distance_to_point(a).min(self.distance_to_point(b));
        for c in self.corners() {
            best = best.min(point_segment_distance(c, a, b));
        }
        best
    }
}

pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    };
    (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
}

/// Axis-aligned obstacles inside the unit square plus the shared disc radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub obstacles: Vec<Rect>,
    pub agent_radius: f64,
}

/// A simultaneous straight-line motion of every agent in `from` to its
/// position in `to`, parameterized by a shared `tau` in `[0,1]`.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub from: &'a BlockConfig,
    pub to: &'a BlockConfig,
}

impl<'a> Transition<'a> {
    pub fn new(from: &'a BlockConfig, to: &'a BlockConfig) -> Result<Self> {
        if from.agents() != to.agents() || from.dim() != to.dim() {
            return Err(Error::AgentSetMismatch(from.agents(), to.agents()));
        }
        Ok(Transition { from, to })
    }

    /// `(agent, start, end)` for every moving agent.
    pub fn segments(&self) -> impl Iterator<Item = (AgentId, [f64; 2], [f64; 2])> + 'a {
        self.from
            .per_agent()
            .zip(self.to.per_agent())
            .map(|((agent, a), (_, b))| (agent, [a[0], a[1]], [b[0], b[1]]))
    }
}

/// Workspace together with every agent's goal region.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub workspace: Workspace,
    pub goals: Vec<Rect>,
}

impl Environment {
    pub fn new(workspace: Workspace, goals: Vec<Rect>) -> Self {
        Environment { workspace, goals }
    }

    pub fn n_agents(&self) -> usize {
        self.goals.len()
    }

    pub fn radius(&self) -> f64 {
        self.workspace.agent_radius
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::first_n(self.n_agents())
    }

    /// Can a disc centered at `p` sit here without penetrating the walls or an obstacle?
    pub fn point_free(&self, p: [f64; 2]) -> bool {
        let r = self.radius();
        if p[0] < r || p[0] > 1.0 - r || p[1] < r || p[1] > 1.0 - r {
            return false;
        }
        self.workspace
            .obstacles
            .iter()
            .all(|o| o.distance_to_point(p) >= r)
    }

    /// Every agent's disc sweeps its straight segment without penetrating an obstacle.
    pub fn segment_obstacle_free(&self, t: &Transition<'_>) -> bool {
        let r = self.radius();
        t.segments().all(|(_, a, b)| {
            // the wall-inset square is convex, so endpoints suffice
            self.point_free_of_walls(a)
                && self.point_free_of_walls(b)
                && self
                    .workspace
                    .obstacles
                    .iter()
                    .all(|o| o.distance_to_segment(a, b) >= r)
        })
    }

    fn point_free_of_walls(&self, p: [f64; 2]) -> bool {
        let r = self.radius();
        p[0] >= r && p[0] <= 1.0 - r && p[1] >= r && p[1] <= 1.0 - r
    }

    /// Every pair of agents stays at least `2r` apart during the transition.
    pub fn agents_collision_free(&self, t: &Transition<'_>) -> bool {
        let clearance = 2.0 * self.radius();
        let segs: Vec<_> = t.segments().collect();
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                let (_, a0, a1) = segs[i];
                let (_, b0, b1) = segs[j];
                if min_pair_distance_sq(a0, a1, b0, b1) < clearance * clearance {
                    return false;
                }
            }
        }
        true
    }

    pub fn collision_free(&self, from: &BlockConfig, to: &BlockConfig) -> Result<bool> {
        let t = Transition::new(from, to)?;
        Ok(self.segment_obstacle_free(&t) && self.agents_collision_free(&t))
    }

    /// Every agent of `x` lies in the closure of its own goal region.
    pub fn in_goal(&self, x: &BlockConfig) -> bool {
        x.per_agent().all(|(agent, c)| {
            self.goals
                .get(agent.0)
                .is_some_and(|g| g.contains([c[0], c[1]]))
        })
    }

    /// Draw a joint configuration over all agents.
    ///
    /// With probability `goal_bias` every agent is drawn inside its own goal
    /// region, otherwise uniformly over the square. Each agent's point is
    /// redrawn until it is obstacle-free. One uniform draw decides the mode,
    /// then two per attempted agent point.
    pub fn sample_free<R: Rng + ?Sized>(&self, rng: &mut R, goal_bias: f64) -> Result<BlockConfig> {
        let toward_goal = rng.gen::<f64>() < goal_bias;
        let mut coords = Vec::with_capacity(DIM * self.n_agents());
        let unit = Rect::new([0.0, 0.0], [1.0, 1.0]);
        for goal in &self.goals {
            let region = if toward_goal { goal } else { &unit };
            let p = self.sample_in(rng, region)?;
            coords.extend_from_slice(&p);
        }
        BlockConfig::new(self.all_agents(), DIM, coords)
    }

    fn sample_in<R: Rng + ?Sized>(&self, rng: &mut R, region: &Rect) -> Result<[f64; 2]> {
        for _ in 0..MAX_REJECTIONS {
            let p = [
                region.min[0] + rng.gen::<f64>() * (region.max[0] - region.min[0]),
                region.min[1] + rng.gen::<f64>() * (region.max[1] - region.min[1]),
            ];
            if self.point_free(p) {
                return Ok(p);
            }
        }
        Err(Error::SamplingExhausted(MAX_REJECTIONS))
    }

    /// Social cost of a transition: the sum of per-agent segment lengths.
    pub fn transition_cost(from: &BlockConfig, to: &BlockConfig) -> f64 {
        from.per_agent()
            .zip(to.per_agent())
            .map(|((_, a), (_, b))| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}

/// Minimum over `tau in [0,1]` of the squared distance between two points
/// moving linearly `a0 -> a1` and `b0 -> b1`.
pub fn min_pair_distance_sq(a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]) -> f64 {
    // relative position p(tau) = p0 + tau * v
    let p0 = [a0[0] - b0[0], a0[1] - b0[1]];
    let v = [
        (a1[0] - a0[0]) - (b1[0] - b0[0]),
        (a1[1] - a0[1]) - (b1[1] - b0[1]),
    ];
    let vv = v[0] * v[0] + v[1] * v[1];
    let at = |tau: f64| {
        let x = p0[0] + tau * v[0];
        let y = p0[1] + tau * v[1];
        x * x + y * y
    };
    let mut best = at(0.0).min(at(1.0));
    if vv > 0.0 {
        let tau = (-(p0[0] * v[0] + p0[1] * v[1]) / vv).clamp(0.0, 1.0);
        best = best.min(at(tau));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::oracles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(obstacles: Vec<Rect>, n: usize) -> Environment {
        let goals = (0..n)
            .map(|i| {
                let y = 0.2 + 0.6 * i as f64 / n.max(2) as f64;
                Rect::new([0.8, y], [0.9, y + 0.1])
            })
            .collect();
        Environment::new(
            Workspace {
                obstacles,
                agent_radius: 0.05,
            },
            goals,
        )
    }

    fn cfg(points: &[[f64; 2]]) -> BlockConfig {
        BlockConfig::new(
            AgentSet::first_n(points.len()),
            2,
            points.iter().flatten().copied().collect(),
        )
        .unwrap()
    }

    #[test]
    fn segment_inside_obstacle_collides() {
        let e = env(vec![Rect::new([0.3, 0.3], [0.7, 0.7])], 1);
        let (a, b) = (cfg(&[[0.4, 0.5]]), cfg(&[[0.6, 0.5]]));
        assert!(!e.segment_obstacle_free(&Transition::new(&a, &b).unwrap()));
    }

    #[test]
    fn zero_length_segment_at_free_point() {
        let e = env(vec![Rect::new([0.3, 0.3], [0.7, 0.7])], 1);
        let a = cfg(&[[0.1, 0.1]]);
        assert!(e.segment_obstacle_free(&Transition::new(&a, &a).unwrap()));
    }

    #[test]
    fn grazing_segment_is_free() {
        // obstacle top edge at y = 0.5, segment at y = 0.5 + r (a dyadic pair, exact)
        let e = Environment::new(
            Workspace {
                obstacles: vec![Rect::new([0.25, 0.25], [0.75, 0.5])],
                agent_radius: 0.0625,
            },
            vec![Rect::new([0.0, 0.0], [1.0, 1.0])],
        );
        let (a, b) = (cfg(&[[0.125, 0.5625]]), cfg(&[[0.875, 0.5625]]));
        let t = Transition::new(&a, &b).unwrap();
        assert!(e.segment_obstacle_free(&t));
        assert!(oracles::dense_obstacle_free(&e, &a, &b, 10_000));
        let (c, d) = (cfg(&[[0.125, 0.5]]), cfg(&[[0.875, 0.5625]]));
        assert!(!e.segment_obstacle_free(&Transition::new(&c, &d).unwrap()));
    }

    #[test]
    fn head_on_swap_collides_and_parallel_lanes_do_not() {
        let e = env(vec![], 2);
        let a = cfg(&[[0.2, 0.5], [0.8, 0.5]]);
        let b = cfg(&[[0.8, 0.5], [0.2, 0.5]]);
        assert!(!e.agents_collision_free(&Transition::new(&a, &b).unwrap()));
        let c = cfg(&[[0.2, 0.3], [0.2, 0.6]]);
        let d = cfg(&[[0.8, 0.3], [0.8, 0.6]]);
        assert!(e.agents_collision_free(&Transition::new(&c, &d).unwrap()));
    }

    #[test]
    fn crossing_at_the_center_collides() {
        let e = env(vec![], 2);
        let a = cfg(&[[0.2, 0.5], [0.5, 0.2]]);
        let b = cfg(&[[0.8, 0.5], [0.5, 0.8]]);
        assert!(!e.collision_free(&a, &b).unwrap());
        assert!(!oracles::dense_agents_free(&e, &a, &b, 10_000));
        let single = cfg(&[[0.2, 0.5]]);
        let single_to = cfg(&[[0.8, 0.5]]);
        assert!(e.collision_free(&single, &single_to).unwrap());
    }

    #[test]
    fn mismatched_agent_sets_are_rejected() {
        let e = env(vec![], 2);
        let a = cfg(&[[0.2, 0.5]]);
        let b = cfg(&[[0.2, 0.5], [0.5, 0.5]]);
        assert!(e.collision_free(&a, &b).is_err());
    }

    #[test]
    fn goal_membership_uses_closure() {
        let e = env(vec![], 2);
        let g0 = e.goals[0];
        let g1 = e.goals[1];
        assert!(e.in_goal(&cfg(&[g0.center(), g1.center()])));
        assert!(e.in_goal(&cfg(&[g0.min, g1.max])));
        assert!(!e.in_goal(&cfg(&[[0.1, 0.1], g1.center()])));
    }

    #[test]
    fn full_goal_bias_samples_inside_goals() {
        let e = env(vec![], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = e.sample_free(&mut rng, 1.0).unwrap();
            assert!(e.in_goal(&x));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let e = env(vec![Rect::new([0.3, 0.3], [0.7, 0.7])], 2);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| e.sample_free(&mut rng, 0.1).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn unbiased_samples_are_uniform_on_a_grid() {
        // radius small enough that rejection at the walls is negligible at this grid scale
        let mut e = env(vec![], 2);
        e.workspace.agent_radius = 1e-9;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut counts = vec![[0usize; 16]; 2];
        for _ in 0..n {
            let x = e.sample_free(&mut rng, 0.0).unwrap();
            for (k, c) in x.coords().chunks(2).enumerate() {
                let cell = ((c[0] * 4.0) as usize).min(3) * 4 + ((c[1] * 4.0) as usize).min(3);
                counts[k][cell] += 1;
            }
        }
        let expected = n as f64 / 16.0;
        for per_agent in counts {
            let chi2: f64 = per_agent
                .iter()
                .map(|&o| (o as f64 - expected).powi(2) / expected)
                .sum();
            // 15 degrees of freedom, 0.999 quantile
            assert!(chi2 < 37.70, "chi-square {chi2}");
        }
    }

    #[test]
    fn reversal_and_relabeling_symmetry() {
        let e = env(vec![Rect::new([0.4, 0.4], [0.6, 0.6])], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = e.sample_free(&mut rng, 0.0).unwrap();
            let b = e.sample_free(&mut rng, 0.0).unwrap();
            let fwd = e.collision_free(&a, &b).unwrap();
            assert_eq!(fwd, e.collision_free(&b, &a).unwrap());
            // relabel agents by rotating the coordinate blocks
            let rot = |x: &BlockConfig| {
                let c = x.coords();
                cfg(&[[c[2], c[3]], [c[4], c[5]], [c[0], c[1]]])
            };
            let (ra, rb) = (rot(&a), rot(&b));
            assert_eq!(
                e.agents_collision_free(&Transition::new(&a, &b).unwrap()),
                e.agents_collision_free(&Transition::new(&ra, &rb).unwrap())
            );
        }
    }

    #[test]
    fn closed_form_matches_dense_sampling_on_random_transitions() {
        let e = env(
            vec![
                Rect::new([0.2, 0.6], [0.4, 0.9]),
                Rect::new([0.55, 0.1], [0.8, 0.35]),
            ],
            3,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let a = e.sample_free(&mut rng, 0.0).unwrap();
            let b = e.sample_free(&mut rng, 0.0).unwrap();
            let verdict = e.collision_free(&a, &b).unwrap();
            if verdict {
                assert!(oracles::dense_obstacle_free(&e, &a, &b, 2_000));
                assert!(oracles::dense_agents_free(&e, &a, &b, 2_000));
            }
        }
    }
}
