//! Fixtures shared by the criterion benches.

use factplan::agents::BlockConfig;
use factplan::Scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The bundled crossing with its first `agents` agents.
pub fn crossing(agents: usize) -> Scenario {
    Scenario::builtin_cross4()
        .with_agents(agents)
        .expect("1..=4 agents")
}

/// `n` collision-free joint configurations drawn without goal bias.
pub fn free_configs(scenario: &Scenario, n: usize, seed: u64) -> Vec<BlockConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            scenario
                .env()
                .sample_free(&mut rng, 0.0)
                .expect("free space is not empty")
        })
        .collect()
}
