//! Self-checks against the reference implementations in [`oracles`].
//!
//! [`run_all`] is a fast subset of the test suites, runnable from an
//! installed binary.

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::BlockConfig;
use crate::analysis;
use crate::environment::{Environment, DIM};
use crate::hypergraph::PlanHypergraph;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, failures: usize, total: usize) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: failures == 0,
        detail: format!("{failures} of {total} cases disagree"),
    }
}

/// Endpoints are free-space samples half of the time and unconstrained
/// points of the square otherwise.
pub fn random_transition(rng: &mut ChaCha8Rng, env: &Environment) -> (BlockConfig, BlockConfig) {
    let set = env.all_agents();
    if rng.gen_bool(0.5) {
        let a = env.sample_free(rng, 0.0).expect("free space");
        let b = env.sample_free(rng, 0.0).expect("free space");
        return (a, b);
    }
    let mut draw = || {
        (0..DIM * set.len())
            .map(|_| rng.gen::<f64>())
            .collect::<Vec<_>>()
    };
    let a = BlockConfig::new(set, DIM, draw()).expect("dims");
    let b = BlockConfig::new(set, DIM, draw()).expect("dims");
    (a, b)
}

/// Collision checks on the bundled scenario against dense sampling.
pub fn check_collisions(cases: usize, steps: usize, band: f64, seed: u64) -> CheckOutcome {
    let scenario = Scenario::builtin_cross4();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for k in 0..cases {
        let agents = 2 + k % 3;
        let variant = scenario.with_agents(agents).expect("four agents");
        let env = variant.env();
        let (a, b) = random_transition(&mut rng, env);
        let fast = env.collision_free(&a, &b).expect("same agents");
        let obstacle = oracles::dense_obstacle_margin(env, &a, &b, steps);
        let pair = oracles::dense_pair_margin(env, &a, &b, steps);
        let dense = obstacle >= 0.0 && pair >= 0.0;
        let in_band = obstacle.abs() < band || pair.abs() < band;
        if fast != dense && !in_band {
            failures += 1;
        }
    }
    outcome("collision checks match dense sampling", failures, cases)
}

/// Hyperpath extraction against exhaustive enumeration.
pub fn check_hyperpaths(graphs: usize, seed: u64) -> CheckOutcome {
    let mut failures = 0;
    for k in 0..graphs {
        let g: PlanHypergraph = oracles::random_hypergraph(seed.wrapping_add(k as u64), 12, 2);
        let dp = g.best_solution(oracles::unit_goal).map(|p| p.total_cost);
        if dp != oracles::brute_force_best_cost(&g, oracles::unit_goal) {
            failures += 1;
        }
    }
    outcome("best hyperpath matches enumeration", failures, graphs)
}

/// Lemma checks on random cost vectors.
pub fn check_epsilon(cases: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.gen_range(2..=6);
        let opt: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..10.0)).collect();
        let cost: Vec<f64> = opt
            .iter()
            .map(|o| o * (1.0 + rng.gen_range(0.0..2.0)))
            .collect();
        let ok = analysis::epsilon_composition_check(&cost, &opt).is_ok_and(|r| r.holds());
        if !ok {
            failures += 1;
        }
    }
    outcome(
        "composed epsilon never exceeds the worst part",
        failures,
        cases,
    )
}

/// A quick pass over every check.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_collisions(200, 10_000, 1e-9, 1),
        check_hyperpaths(100, 2),
        check_epsilon(2000, 3),
    ]
}
