//! Majority dynamics invariants.

use girg_lab::dynamics::{
    init_opinions, recompute_unstable, run_until_stable, simulate, step, InitialShape, OpinionConfig, RunOptions,
    BLUE, RED,
};
use girg_lab::girg::{build_graph, GirgParams, Graph};
use girg_lab::seed::{rng, Stream};
use proptest::prelude::*;
use rand::Rng;

fn graph(seed: u64, tau: f64) -> Graph {
    build_graph(&GirgParams::new(400, 2, tau, 1.5, seed).unwrap()).unwrap()
}

fn field(g: &Graph, spins: &[i8], v: usize) -> i32 {
    g.neighbors(v).iter().map(|&u| spins[u as usize] as i32).sum()
}

fn random_spins(n: usize, seed: u64, p: f64) -> Vec<i8> {
    let mut r = rng(seed, Stream::Oracle);
    (0..n).map(|_| if r.random::<f64>() < p { BLUE } else { RED }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stable_means_no_vertex_wants_to_flip(seed in any::<u64>(), tau in 2.1f64..3.5, p in 0.2f64..0.8) {
        let g = graph(seed, tau);
        let mut cfg = OpinionConfig::from_spins(&g, random_spins(g.n(), seed, p)).unwrap();
        let stats = run_until_stable(&g, &mut cfg, &mut rng(seed, Stream::Dynamics), &RunOptions::for_graph(&g)).unwrap();
        prop_assert!(stats.stable);
        prop_assert!(stats.flips <= stats.steps_taken);
        prop_assert_eq!(stats.final_blue_count, cfg.blue_count());
        for v in 0..g.n() {
            let f = field(&g, cfg.spins(), v);
            prop_assert!(f == 0 || (f > 0) == (cfg.spin(v) == BLUE), "vertex {} spin {} field {}", v, cfg.spin(v), f);
        }
        prop_assert!(recompute_unstable(&g, cfg.spins()).is_empty());
    }

    #[test]
    fn consensus_is_absorbing(seed in any::<u64>(), blue in any::<bool>()) {
        let g = graph(seed, 2.7);
        let s = if blue { BLUE } else { RED };
        let mut cfg = OpinionConfig::from_spins(&g, vec![s; g.n()]).unwrap();
        prop_assert_eq!(cfg.unstable_count(), 0);
        let stats = run_until_stable(&g, &mut cfg, &mut rng(seed, Stream::Dynamics), &RunOptions::for_graph(&g)).unwrap();
        prop_assert_eq!(stats.flips, 0);
        prop_assert_eq!(stats.steps_taken, 0);
        prop_assert!(cfg.spins().iter().all(|&x| x == s));
    }

    #[test]
    fn incremental_unstable_set_matches_recompute(seed in any::<u64>(), moves in 1usize..300) {
        let g = graph(seed, 2.4);
        let mut cfg = OpinionConfig::from_spins(&g, random_spins(g.n(), seed ^ 1, 0.5)).unwrap();
        let mut r = rng(seed, Stream::Oracle);
        for _ in 0..moves {
            let v = r.random_range(0..g.n());
            let before = cfg.spin(v);
            let flipped = step(&g, &mut cfg, v);
            prop_assert_eq!(flipped, before != cfg.spin(v));
            prop_assert_eq!(cfg.unstable_set(), recompute_unstable(&g, cfg.spins()));
        }
    }

    #[test]
    fn ties_keep_their_opinion(seed in any::<u64>()) {
        let g = graph(seed, 2.9);
        let mut cfg = OpinionConfig::from_spins(&g, random_spins(g.n(), seed, 0.5)).unwrap();
        for v in 0..g.n() {
            if field(&g, cfg.spins(), v) == 0 {
                prop_assert!(!cfg.is_unstable(v));
                let s = cfg.spin(v);
                prop_assert!(!step(&g, &mut cfg, v));
                prop_assert_eq!(cfg.spin(v), s);
            }
        }
    }
}

#[test]
fn same_seed_same_trajectory() {
    let g = graph(11, 2.5);
    let opts = RunOptions::for_graph(&g);
    let shape = InitialShape::Square { side: 10.0 };
    let (a, sa) = simulate(&g, &shape, 5, &opts).unwrap();
    let (b, sb) = simulate(&g, &shape, 5, &opts).unwrap();
    assert_eq!(a.spins(), b.spins());
    assert_eq!((sa.steps_taken, sa.flips), (sb.steps_taken, sb.flips));
}

#[test]
fn step_budget_is_respected() {
    let g = graph(2, 2.5);
    let mut cfg = init_opinions(&g, &InitialShape::UniformRandom { p_blue: 0.5, seed: 3 }).unwrap();
    let opts = RunOptions { max_steps: 5, ..RunOptions::for_graph(&g) };
    let stats = run_until_stable(&g, &mut cfg, &mut rng(1, Stream::Dynamics), &opts).unwrap();
    assert!(stats.steps_taken <= 5 && stats.flips <= 5);
    assert_eq!(stats.stable, cfg.unstable_count() == 0);
    let bad = RunOptions { max_steps: 0, ..opts };
    assert!(run_until_stable(&g, &mut cfg, &mut rng(1, Stream::Dynamics), &bad).is_err());
}
