//! Joint-space RRG and PRM*, and the factorized RRG.
//!
//! All planners draw from one seeded stream that only sampling consumes, so
//! two planners started with the same seed see the same sample sequence.
//! Best-so-far costs are recomputed every `cost_cadence` iterations and once
//! more when the run ends.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{powerset_groups, BlockConfig};
use crate::bench::Algorithm;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::factorization::{coherent, factorize, FactorizationHeuristic};
use crate::hypergraph::{
    connection_radius, GraphStats, HyperPath, NodeId, PlanHypergraph, RadiusMode,
};
use crate::scenario::Scenario;

/// How many samples a run keeps for paired-seed verification.
pub const LOGGED_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub gamma: f64,
    pub eta: f64,
    pub goal_bias: f64,
    /// Stop once a solution exists and the graph has more nodes than this.
    pub stop_nodes: Option<usize>,
    /// Hard cap on iterations (samples drawn).
    pub max_iterations: usize,
    pub cost_cadence: usize,
    pub radius_mode: RadiusMode,
    /// Sample budget for PRM*.
    pub prm_samples: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            gamma: 100.0,
            eta: 100.0,
            goal_bias: 0.1,
            stop_nodes: Some(1000),
            max_iterations: 30_000,
            cost_cadence: 50,
            radius_mode: RadiusMode::PerBlock,
            prm_samples: 1000,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.eta > 0.0) {
            return Err(Error::Setup("gamma and eta must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::Setup(format!(
                "goal bias {} outside [0,1]",
                self.goal_bias
            )));
        }
        if self.cost_cadence == 0 {
            return Err(Error::Setup("cost cadence must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub graph: PlanHypergraph,
    /// `(iteration, best cost so far)` at every checkpoint.
    pub cost_trace: Vec<(usize, Option<f64>)>,
    pub solution: Option<HyperPath>,
    pub stats: GraphStats,
    pub iterations: usize,
    pub iter_ms_mean: f64,
    pub iter_ms_std: f64,
    /// The first [`LOGGED_SAMPLES`] joint samples drawn.
    pub samples: Vec<BlockConfig>,
}

impl PlanResult {
    pub fn final_cost(&self) -> Option<f64> {
        self.cost_trace.last().and_then(|&(_, c)| c)
    }
}

/// Run `algorithm` on `scenario`. The heuristic is only used by the factorized planner.
pub fn run(
    algorithm: Algorithm,
    scenario: &Scenario,
    params: &PlannerParams,
    heuristic: &dyn FactorizationHeuristic,
    seed: u64,
) -> Result<PlanResult> {
    match algorithm {
        Algorithm::Rrg => run_sba(scenario, params, seed),
        Algorithm::FactRrg => run_fact_sba(scenario, params, heuristic, seed),
        Algorithm::PrmStar => run_prm_star(scenario, params, seed),
    }
}

fn check_start(env: &Environment, start: &BlockConfig) -> Result<()> {
    if !env.collision_free(start, start)? {
        return Err(Error::Setup("initial configuration is in collision".into()));
    }
    Ok(())
}

/// Checkpointing, stopping and timing shared by every planner.
struct Anytime<'a> {
    params: &'a PlannerParams,
    env: &'a Environment,
    trace: Vec<(usize, Option<f64>)>,
    best: Option<f64>,
    durations: Vec<f64>,
    samples: Vec<BlockConfig>,
}

impl<'a> Anytime<'a> {
    fn new(params: &'a PlannerParams, env: &'a Environment) -> Self {
        Anytime {
            params,
            env,
            trace: Vec::new(),
            best: None,
            durations: Vec::new(),
            samples: Vec::new(),
        }
    }

    fn log_sample(&mut self, x: &BlockConfig) {
        if self.samples.len() < LOGGED_SAMPLES {
            self.samples.push(x.clone());
        }
    }

    fn recompute(&mut self, iteration: usize, g: &PlanHypergraph) {
        let cost = g
            .best_solution(|c| self.env.in_goal(c))
            .map(|p| p.total_cost);
        if let Some(c) = cost {
            self.best = Some(self.best.map_or(c, |b| b.min(c)));
        }
        self.trace.push((iteration, self.best));
    }

    /// Record the end of iteration `it` (1-based); true when the run should stop.
    fn after_iteration(&mut self, it: usize, g: &PlanHypergraph) -> bool {
        let over = self.params.stop_nodes.is_some_and(|n| g.node_count() > n);
        // a found solution persists as the graph grows
        if over && self.best.is_some() {
            return true;
        }
        if it.is_multiple_of(self.params.cost_cadence) {
            self.recompute(it, g);
            return over && self.best.is_some();
        }
        false
    }

    fn finish(mut self, iterations: usize, graph: PlanHypergraph) -> PlanResult {
        if self.trace.last().map(|&(i, _)| i) != Some(iterations) {
            self.recompute(iterations, &graph);
        }
        let solution = graph.best_solution(|c| self.env.in_goal(c));
        let n = self.durations.len() as f64;
        let (mean, std) = if self.durations.is_empty() {
            (0.0, 0.0)
        } else {
            let mean = self.durations.iter().sum::<f64>() / n;
            let var = self
                .durations
                .iter()
                .map(|d| (d - mean).powi(2))
                .sum::<f64>()
                / n;
            (mean, var.sqrt())
        };
        PlanResult {
            stats: graph.stats(),
            graph,
            cost_trace: self.trace,
            solution,
            iterations,
            iter_ms_mean: mean,
            iter_ms_std: std,
            samples: self.samples,
        }
    }
}

/// Joint-space RRG: every sample is connected to all collision-free
/// neighbors within the connection radius.
pub fn run_sba(scenario: &Scenario, params: &PlannerParams, seed: u64) -> Result<PlanResult> {
    params.validate()?;
    let env = scenario.env();
    let start = scenario.start();
    check_start(env, &start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PlanHypergraph::new();
    let root = g.add_node(start.clone(), None);
    g.add_root(root);
    let dim = start.joint_dim();
    let mut track = Anytime::new(params, env);
    let mut it = 0;
    while it < params.max_iterations {
        let t0 = Instant::now();
        let x_rand = env.sample_free(&mut rng, params.goal_bias)?;
        track.log_sample(&x_rand);
        let r = connection_radius(g.node_count(), dim, params.gamma, params.eta);
        let mut new: Option<NodeId> = None;
        for near in g.near(&x_rand, r) {
            let x_near = &g.node(near).config;
            if !env.collision_free(x_near, &x_rand)? {
                continue;
            }
            let cost = Environment::transition_cost(x_near, &x_rand);
            let target = *new.get_or_insert_with(|| g.add_node(x_rand.clone(), None));
            g.add_hyperedge(near, vec![target], cost)?;
        }
        track.durations.push(t0.elapsed().as_secs_f64() * 1e3);
        it += 1;
        if track.after_iteration(it, &g) {
            break;
        }
    }
    Ok(track.finish(it, g))
}

/// Factorized RRG.
///
/// Each sample is factorized into blocks. For every non-empty group of
/// blocks, neighbors over exactly the group's agents are connected to the
/// group's blocks: a standard edge for a single block, a splitting edge for
/// several. Block nodes are created on their first edge and shared by all
/// groups of the same iteration; nodes created in the current iteration are
/// never neighbors. When the heuristic provides future-resource regions an
/// edge must also be coherent, and the reverse copy of a standard edge is
/// only kept when it is coherent too.
pub fn run_fact_sba(
    scenario: &Scenario,
    params: &PlannerParams,
    heuristic: &dyn FactorizationHeuristic,
    seed: u64,
) -> Result<PlanResult> {
    params.validate()?;
    let env = scenario.env();
    let start = scenario.start();
    check_start(env, &start)?;
    let full_dim = start.joint_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PlanHypergraph::new();
    for block in factorize(&start, heuristic).into_blocks() {
        let resources = heuristic.resources(&block);
        let id = g.add_node(block, resources);
        g.add_root(id);
    }
    let mut track = Anytime::new(params, env);
    let mut it = 0;
    while it < params.max_iterations {
        let t0 = Instant::now();
        let x_rand = env.sample_free(&mut rng, params.goal_bias)?;
        track.log_sample(&x_rand);
        let partition = factorize(&x_rand, heuristic);
        let blocks = partition.blocks();
        let first_new = NodeId(g.node_count());
        let mut created: Vec<Option<NodeId>> = vec![None; blocks.len()];
        for group in powerset_groups(&partition) {
            let n = g.set_size_before(group.agents, first_new);
            if n == 0 {
                continue;
            }
            let joint = group.joint(&partition);
            let dim = match params.radius_mode {
                RadiusMode::PerBlock => joint.joint_dim(),
                RadiusMode::Largest => full_dim,
            };
            let r = connection_radius(n, dim, params.gamma, params.eta);
            let dests: Vec<&BlockConfig> = group.members.iter().map(|&k| &blocks[k]).collect();
            for near in g.near(&joint, r) {
                if near >= first_new {
                    continue;
                }
                let node = g.node(near);
                if !env.collision_free(&node.config, &joint)? {
                    continue;
                }
                if let Some(res) = &node.resources {
                    if !coherent(heuristic, Some(res), &dests)? {
                        continue;
                    }
                }
                let x_near = node.config.clone();
                let cost = Environment::transition_cost(&x_near, &joint);
                let targets: Vec<NodeId> = group
                    .members
                    .iter()
                    .map(|&k| {
                        *created[k].get_or_insert_with(|| {
                            g.add_node(blocks[k].clone(), heuristic.resources(&blocks[k]))
                        })
                    })
                    .collect();
                if let [target] = targets[..] {
                    let back_ok = match &g.node(target).resources {
                        Some(res) => coherent(heuristic, Some(res), &[&x_near])?,
                        None => true,
                    };
                    if back_ok {
                        g.add_hyperedge(near, targets, cost)?;
                    } else {
                        g.add_arc(near, target, cost)?;
                    }
                } else {
                    g.add_hyperedge(near, targets, cost)?;
                }
            }
        }
        track.durations.push(t0.elapsed().as_secs_f64() * 1e3);
        it += 1;
        if track.after_iteration(it, &g) {
            break;
        }
    }
    Ok(track.finish(it, g))
}

/// PRM* radius `gamma * (ln n / n)^(1/d)`, or `gamma` for `n <= 1`.
pub fn prm_star_radius(n: usize, d: usize, gamma: f64) -> f64 {
    if n <= 1 {
        return gamma;
    }
    let n = n as f64;
    gamma * (n.ln() / n).powf(1.0 / d as f64)
}

/// Joint-space PRM* over a pre-drawn set of `params.prm_samples` samples.
///
/// All samples become nodes and are connected, in draw order, to every
/// earlier node within the PRM* radius for the full sample count. The
/// same seed with a larger budget yields a superset of samples.
pub fn run_prm_star(scenario: &Scenario, params: &PlannerParams, seed: u64) -> Result<PlanResult> {
    params.validate()?;
    let env = scenario.env();
    let start = scenario.start();
    check_start(env, &start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = params.prm_samples;
    let points = (0..budget)
        .map(|_| env.sample_free(&mut rng, params.goal_bias))
        .collect::<Result<Vec<_>>>()?;
    let mut g = PlanHypergraph::new();
    let root = g.add_node(start.clone(), None);
    g.add_root(root);
    let r = prm_star_radius(budget + 1, start.joint_dim(), params.gamma);
    let mut track = Anytime::new(params, env);
    let mut it = 0;
    for x in points {
        let t0 = Instant::now();
        track.log_sample(&x);
        let near = g.near(&x, r);
        let id = g.add_node(x, None);
        for n in near {
            let (a, b) = (&g.node(n).config, &g.node(id).config);
            if env.collision_free(a, b)? {
                let cost = Environment::transition_cost(a, b);
                g.add_hyperedge(n, vec![id], cost)?;
            }
        }
        track.durations.push(t0.elapsed().as_secs_f64() * 1e3);
        it += 1;
        if it % params.cost_cadence == 0 {
            track.recompute(it, &g);
        }
    }
    Ok(track.finish(it, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{ConeHeuristic, NeverFactorize};
    use crate::verify::oracles;

    fn box1() -> Scenario {
        Scenario::from_json(
            r#"{"name": "box", "bounds": {"min": [0, 0], "max": [1, 1]}, "agent_radius": 0.02,
                "agents": [{"start": [0.1, 0.1], "goal": {"min": [0.85, 0.85], "max": [0.9, 0.9]}}]}"#,
        )
        .unwrap()
    }

    fn quick(max_iterations: usize) -> PlannerParams {
        PlannerParams {
            max_iterations,
            stop_nodes: None,
            ..Default::default()
        }
    }

    #[test]
    fn one_agent_box_converges_near_straight_line() {
        let s = box1();
        let r = run_sba(&s, &quick(200), 1).unwrap();
        let cost = r.final_cost().expect("solution");
        // lower bound: distance from the start to the nearest goal point
        let straight = (0.75f64).hypot(0.75);
        assert!(cost >= straight - 1e-12);
        assert!(cost <= 1.05 * straight, "cost {cost} vs {straight}");
    }

    #[test]
    fn zero_iterations_leave_only_the_start() {
        let s = Scenario::builtin_cross4().with_agents(2).unwrap();
        let r = run_sba(&s, &quick(0), 1).unwrap();
        assert_eq!(r.stats.nodes, 1);
        assert!(r.solution.is_none());
        assert_eq!(r.final_cost(), None);
    }

    #[test]
    fn same_seed_same_graph() {
        let s = Scenario::builtin_cross4().with_agents(2).unwrap();
        let h = ConeHeuristic::new(s.env(), std::f64::consts::FRAC_PI_8).unwrap();
        let a = run_fact_sba(&s, &quick(150), &h, 9).unwrap();
        let b = run_fact_sba(&s, &quick(150), &h, 9).unwrap();
        assert_eq!(
            oracles::graph_signature(&a.graph),
            oracles::graph_signature(&b.graph)
        );
        assert_eq!(a.cost_trace, b.cost_trace);
        let c = run_sba(&s, &quick(150), 9).unwrap();
        let d = run_sba(&s, &quick(150), 9).unwrap();
        assert_eq!(
            oracles::graph_signature(&c.graph),
            oracles::graph_signature(&d.graph)
        );
    }

    #[test]
    fn never_factorize_reproduces_rrg() {
        let s = Scenario::builtin_cross4().with_agents(2).unwrap();
        let p = quick(300);
        let a = run_sba(&s, &p, 5).unwrap();
        let b = run_fact_sba(&s, &p, &NeverFactorize, 5).unwrap();
        assert_eq!(
            oracles::graph_signature(&a.graph),
            oracles::graph_signature(&b.graph)
        );
        assert_eq!(a.cost_trace, b.cost_trace);
    }

    #[test]
    fn anytime_trace_never_increases() {
        let s = Scenario::builtin_cross4().with_agents(2).unwrap();
        let h = s.heuristic().unwrap();
        let r = run_fact_sba(&s, &quick(600), h.as_ref(), 3).unwrap();
        let costs: Vec<f64> = r.cost_trace.iter().filter_map(|&(_, c)| c).collect();
        assert!(costs.windows(2).all(|w| w[1] <= w[0]));
        assert!(r
            .cost_trace
            .windows(2)
            .all(|w| w[0].1.is_none() || w[1].1.is_some()));
    }

    #[test]
    fn stops_past_the_node_threshold_once_solved() {
        let s = box1();
        let p = PlannerParams {
            stop_nodes: Some(60),
            max_iterations: 5000,
            ..Default::default()
        };
        let r = run_sba(&s, &p, 2).unwrap();
        assert!(r.solution.is_some());
        assert!(r.stats.nodes > 60 && r.iterations < 5000);
    }

    #[test]
    fn start_in_collision_is_a_setup_error() {
        let mut bad = Scenario::builtin_cross4();
        bad.starts[0] = [0.2, 0.2];
        assert!(matches!(run_sba(&bad, &quick(1), 0), Err(Error::Setup(_))));
        assert!(run_fact_sba(&bad, &quick(1), &NeverFactorize, 0).is_err());
    }

    #[test]
    fn prm_star_limits() {
        let s = box1();
        let mut p = quick(0);
        p.prm_samples = 0;
        let r = run_prm_star(&s, &p, 4).unwrap();
        assert!(r.solution.is_none());
        assert_eq!(r.stats.nodes, 1);

        // infinite radius gives the complete collision-free graph
        p.prm_samples = 40;
        p.gamma = f64::INFINITY;
        let r = run_prm_star(&s, &p, 4).unwrap();
        let n = r.stats.nodes;
        let mut free_pairs = 0;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&r.graph.nodes()[i].config, &r.graph.nodes()[j].config);
                if s.env().collision_free(a, b).unwrap() {
                    free_pairs += 1;
                }
            }
        }
        assert_eq!(r.stats.edges, 2 * free_pairs);
    }

    #[test]
    fn prm_star_cost_does_not_increase_with_nested_budgets() {
        let s = box1();
        let mut last = f64::INFINITY;
        for budget in [25, 50, 100, 200] {
            let p = PlannerParams {
                prm_samples: budget,
                ..quick(0)
            };
            let r = run_prm_star(&s, &p, 11).unwrap();
            let c = r.final_cost().unwrap_or(f64::INFINITY);
            assert!(c <= last, "budget {budget}: {c} > {last}");
            last = c;
        }
        assert!(last.is_finite());
    }
}
