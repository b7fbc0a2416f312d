//! Randomized invariants of the building blocks.

use factplan::agents::{
    enumerate_partitions, join, powerset_groups, project, AgentId, AgentSet, BlockConfig, Partition,
};
use factplan::analysis::{self, GainInputs};
use factplan::factorization::factorize;
use factplan::Scenario;
use proptest::prelude::*;

fn joint_config(n: usize) -> impl Strategy<Value = BlockConfig> {
    prop::collection::vec(0.0..1.0f64, 2 * n)
        .prop_map(move |c| BlockConfig::new(AgentSet::first_n(n), 2, c).unwrap())
}

/// A random set partition of the first `n` agents, as block labels per agent.
fn shape(n: usize) -> impl Strategy<Value = Vec<AgentSet>> {
    prop::collection::vec(0..n, n).prop_map(move |labels| {
        let mut blocks = vec![AgentSet::EMPTY; n];
        for (agent, &l) in labels.iter().enumerate() {
            blocks[l] = blocks[l].union(AgentSet::singleton(AgentId(agent)));
        }
        blocks.into_iter().filter(|b| !b.is_empty()).collect()
    })
}

fn config_and_shape() -> impl Strategy<Value = (BlockConfig, Vec<AgentSet>)> {
    (1usize..=6).prop_flat_map(|n| (joint_config(n), shape(n)))
}

const BELL: [usize; 7] = [1, 1, 2, 5, 15, 52, 203];

proptest! {
    #[test]
    fn split_then_join_restores_the_joint((x, s) in config_and_shape()) {
        let p = Partition::from_shape(&x, &s).unwrap();
        prop_assert_eq!(p.agents(), x.agents());
        let blocks: Vec<&BlockConfig> = p.blocks().iter().collect();
        prop_assert_eq!(join(&blocks).unwrap(), x.clone());
        for b in p.blocks() {
            prop_assert_eq!(&project(&x, b.agents()).unwrap(), b);
        }
    }

    #[test]
    fn powerset_groups_are_sorted_and_complete((x, s) in config_and_shape()) {
        let p = Partition::from_shape(&x, &s).unwrap();
        let groups = powerset_groups(&p);
        prop_assert_eq!(groups.len(), (1usize << p.blocks().len()) - 1);
        prop_assert!(groups.windows(2).all(|w| w[0].agents < w[1].agents));
        for g in &groups {
            prop_assert_eq!(g.joint(&p).agents(), g.agents);
        }
    }

    #[test]
    fn factorized_blocks_are_pairwise_independent(x in (1usize..=4).prop_flat_map(joint_config)) {
        let s = Scenario::builtin_cross4().with_agents(x.agents().len()).unwrap();
        let h = s.heuristic().unwrap();
        let p = factorize(&x, h.as_ref());
        prop_assert_eq!(p.agents(), x.agents());
        let single = |a: AgentId| project(&x, AgentSet::singleton(a)).unwrap();
        for (i, a) in p.blocks().iter().enumerate() {
            for b in &p.blocks()[i + 1..] {
                for u in a.agents().iter() {
                    for v in b.agents().iter() {
                        prop_assert!(h.pairwise(&single(u), &single(v)));
                        prop_assert!(h.pairwise(&single(v), &single(u)));
                    }
                }
            }
        }
    }

    #[test]
    fn collision_checks_ignore_direction(a in joint_config(3), b in joint_config(3)) {
        let s = Scenario::builtin_cross4().with_agents(3).unwrap();
        prop_assert_eq!(s.env().collision_free(&a, &b).unwrap(), s.env().collision_free(&b, &a).unwrap());
    }

    #[test]
    fn composed_epsilon_never_exceeds_the_worst_part(
        parts in prop::collection::vec((1e-3..10.0f64, 0.0..5.0f64), 1..8)
    ) {
        let opt: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let cost: Vec<f64> = parts.iter().map(|p| p.0 * (1.0 + p.1)).collect();
        prop_assert!(analysis::epsilon_composition_check(&cost, &opt).unwrap().holds());
    }

    #[test]
    fn gain_is_zero_without_factorization(
        disp in 0.05..0.95f64, p in 0.05..0.95f64, agents in 1usize..=6, d in 1usize..=3
    ) {
        let g = GainInputs { mu: 1.0, disp_bar: disp, p_bar: p, d_i: d, n_agents: agents, f: 0.0 };
        let r = analysis::factorization_gain(&g).unwrap();
        prop_assert_eq!(r.gain_exact, 0.0);
        prop_assert_eq!(r.n_fact, r.n_joint);
    }

    #[test]
    fn sufficient_samples_shrink_with_coarser_dispersion(
        d in 1.0..6.0f64, p in 0.05..0.95f64, lo in 0.05..0.5f64, step in 0.01..0.5f64
    ) {
        let fine = analysis::sufficient_samples(1.0, d, lo, p).unwrap();
        let coarse = analysis::sufficient_samples(1.0, d, lo + step, p).unwrap();
        prop_assert!(coarse <= fine);
    }
}

#[test]
fn partition_counts_follow_the_bell_numbers() {
    for (n, &bell) in BELL.iter().enumerate().skip(1) {
        let all = enumerate_partitions(AgentSet::first_n(n)).unwrap();
        assert_eq!(all.len(), bell);
        for blocks in &all {
            let union = blocks.iter().fold(AgentSet::EMPTY, |acc, b| {
                assert!(acc.is_disjoint(*b));
                acc.union(*b)
            });
            assert_eq!(union, AgentSet::first_n(n));
        }
    }
    assert!(enumerate_partitions(AgentSet::first_n(7)).is_err());
}
