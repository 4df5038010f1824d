//! Graph construction against an all-pairs oracle.

use girg_lab::girg::{build_graph, calibrate_k, side_length, GirgParams, Graph};
use girg_lab::seed::{mix, rng, Stream};
use proptest::prelude::*;
use rand::Rng;

/// Torus distance raised to `d`, written out independently.
fn dist_pow(x: &[f64], y: &[f64], l: f64) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let mut t = (a - b).abs() % l;
        if t > l / 2.0 {
            t = l - t;
        }
        s += t * t;
    }
    s.sqrt().powi(x.len() as i32)
}

fn brute_force(g: &Graph) -> Vec<Vec<u32>> {
    let (n, l, k) = (g.n(), g.side_length(), g.params.k);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if dist_pow(g.position(u), g.position(v), l) <= k * (g.weight(u) * g.weight(v)) {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
        }
    }
    adj
}

#[test]
fn matches_all_pairs_on_twenty_seeds() {
    for i in 0..20u64 {
        let seed = mix(17, &[i]);
        let d = 1 + (i % 3) as usize;
        let tau = [2.1, 2.5, 3.0, 3.7][(i % 4) as usize];
        let n = 100 + 20 * i as usize;
        let p = GirgParams::new(n, d, tau, 0.3 + 0.1 * i as f64, seed).unwrap();
        let g = build_graph(&p).unwrap();
        let oracle = brute_force(&g);
        for (v, want) in oracle.iter().enumerate() {
            let mut got = g.neighbors(v).to_vec();
            got.sort_unstable();
            assert_eq!(&got, want, "seed {seed} d={d} tau={tau} vertex {v}");
        }
        let m: usize = oracle.iter().map(Vec::len).sum::<usize>() / 2;
        assert_eq!(g.edge_count(), m);
    }
}

#[test]
fn sampled_pairs_follow_the_edge_rule() {
    let p = GirgParams::new(20_000, 2, 2.5, 1.0, 3).unwrap();
    let g = build_graph(&p).unwrap();
    let l = side_length(20_000, 2);
    let mut r = rng(3, Stream::Oracle);
    let mut edges = 0;
    for _ in 0..200_000 {
        let u = r.random_range(0..g.n());
        let v = r.random_range(0..g.n());
        if u == v {
            continue;
        }
        let want = dist_pow(g.position(u), g.position(v), l) <= g.params.k * g.weight(u) * g.weight(v);
        assert_eq!(g.has_edge(u, v), want, "{u} {v}");
        assert_eq!(g.edge_predicate(u, v), want);
        edges += want as usize;
    }
    assert!(edges > 0);
    // every listed neighbour satisfies the rule
    for v in (0..g.n()).step_by(97) {
        for &u in g.neighbors(v) {
            assert!(dist_pow(g.position(u as usize), g.position(v), l) <= g.params.k * g.weight(u as usize) * g.weight(v));
        }
    }
}

#[test]
fn seeds_are_reproducible() {
    let p = GirgParams::new(3000, 2, 2.8, 1.0, 99).unwrap();
    assert_eq!(build_graph(&p).unwrap(), build_graph(&p).unwrap());
    let q = GirgParams { seed: 100, ..p };
    assert_ne!(build_graph(&p).unwrap().weights(), build_graph(&q).unwrap().weights());
}

#[test]
fn calibrated_degree_is_close() {
    // finite n loses a little mass to the weight cutoff, so allow 10%
    let k = calibrate_k(10.0, 2, 3.0).unwrap();
    let g = build_graph(&GirgParams::new(40_000, 2, 3.0, k, 5).unwrap()).unwrap();
    let mean = 2.0 * g.edge_count() as f64 / g.n() as f64;
    assert!((mean - 10.0).abs() < 1.0, "mean degree {mean}");
}

#[test]
fn rejects_bad_parameters() {
    assert!(GirgParams::new(100, 2, 2.0, 1.0, 0).is_err());
    assert!(GirgParams::new(100, 0, 3.0, 1.0, 0).is_err());
    assert!(GirgParams::new(100, 2, 3.0, 0.0, 0).is_err());
    assert!(GirgParams::new(0, 2, 3.0, 1.0, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjacency_is_symmetric_and_simple(seed in any::<u64>(), d in 1usize..4, tau in 2.05f64..4.0, k in 0.1f64..3.0) {
        let g = build_graph(&GirgParams::new(300, d, tau, k, seed).unwrap()).unwrap();
        for v in 0..g.n() {
            let nb = g.neighbors(v);
            prop_assert!(!nb.contains(&(v as u32)));
            for w in nb.windows(2) {
                prop_assert!(w[0] != w[1]);
            }
            for &u in nb {
                prop_assert!(g.neighbors(u as usize).contains(&(v as u32)));
            }
        }
        let l = g.side_length();
        for x in g.positions() {
            prop_assert!(*x >= -l / 2.0 && *x < l / 2.0);
        }
        prop_assert!(g.weights().iter().all(|&w| w >= 1.0));
    }
}
