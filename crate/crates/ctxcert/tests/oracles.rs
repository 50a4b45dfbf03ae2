//! Brute-force oracles cross-checking the combinatorial machinery:
//! exhaustive independent-set search, naive maximal-clique enumeration, and
//! randomized property tests against both.

use ctxcert::combinat::weighted_independence_number;
use ctxcert::graphs::{
    build_gd, build_odd_cycle, enumerate_maximal_cliques, epsilon_expand, parse_epsilon_graph,
    serialize_epsilon_graph, WeightedGraph,
};
use ctxcert::optim::psd_factor;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Exhaustive maximum-weight independent set over all 2^n subsets.
fn exhaustive_mwis(g: &WeightedGraph) -> Ratio<i64> {
    let n = g.n_vertices();
    assert!(n <= 22, "exhaustive search capped");
    let masks: Vec<u32> = (0..n)
        .map(|v| {
            let mut m = 0u32;
            for u in g.neighbors(v) {
                m |= 1 << u;
            }
            m
        })
        .collect();
    let mut best = Ratio::from_integer(0);
    for set in 0u32..(1 << n) {
        let mut ok = true;
        for v in 0..n {
            if set & (1 << v) != 0 && set & masks[v] != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            let w: Ratio<i64> =
                (0..n).filter(|v| set & (1 << v) != 0).map(|v| g.weight(v)).sum();
            if w > best {
                best = w;
            }
        }
    }
    best
}

/// Naive maximal-clique enumeration: every subset, keep cliques with no
/// extension.
fn exhaustive_maximal_cliques(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let n = g.n_vertices();
    assert!(n <= 16);
    let is_clique = |set: u32| -> bool {
        for v in 0..n {
            if set & (1 << v) == 0 {
                continue;
            }
            for u in (v + 1)..n {
                if set & (1 << u) != 0 && !g.has_edge(v, u) {
                    return false;
                }
            }
        }
        true
    };
    let mut out = Vec::new();
    for set in 1u32..(1 << n) {
        if !is_clique(set) {
            continue;
        }
        let extendable = (0..n).any(|v| {
            set & (1 << v) == 0
                && (0..n).all(|u| set & (1 << u) == 0 || g.has_edge(v, u))
        });
        if !extendable {
            out.push((0..n).filter(|v| set & (1 << v) != 0).collect());
        }
    }
    out.sort();
    out
}

fn random_graph(seed: u64, n: usize, p: f64) -> WeightedGraph {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let weights = (0..n)
        .map(|_| Ratio::new(rng.gen_range(1..6) as i64, rng.gen_range(1..4) as i64))
        .collect();
    WeightedGraph::new(n, &edges, weights).unwrap()
}

#[test]
fn independence_matches_exhaustive_on_named_graphs() {
    let g3 = build_gd(3).unwrap();
    assert_eq!(weighted_independence_number(&g3).value, exhaustive_mwis(&g3));
    for n in [5usize, 7, 9] {
        let c = build_odd_cycle(n).unwrap();
        assert_eq!(weighted_independence_number(&c).value, exhaustive_mwis(&c));
    }
    // the seven-cycle has independence number three
    assert_eq!(exhaustive_mwis(&build_odd_cycle(7).unwrap()), Ratio::from_integer(3));
}

#[test]
fn gd_max_clique_size_is_d() {
    // brute force over all subsets: the largest clique of the d = 3
    // instance has size 3, and the fast enumeration agrees exactly
    let g3 = build_gd(3).unwrap();
    let oracle = exhaustive_maximal_cliques(&g3);
    assert_eq!(oracle.iter().map(|c| c.len()).max(), Some(3));
    let fast: Vec<Vec<usize>> =
        enumerate_maximal_cliques(&g3).into_iter().map(|c| c.members).collect();
    assert_eq!(fast, oracle);
}

#[test]
fn cliques_match_exhaustive_on_small_graphs() {
    for seed in 0..30u64 {
        let n = 4 + (seed as usize % 9); // 4..=12
        let g = random_graph(seed, n, if seed % 2 == 0 { 0.3 } else { 0.55 });
        let fast: Vec<Vec<usize>> =
            enumerate_maximal_cliques(&g).into_iter().map(|c| c.members).collect();
        assert_eq!(fast, exhaustive_maximal_cliques(&g), "seed {seed}");
    }
}

#[test]
fn branch_and_bound_matches_exhaustive_on_random_graphs() {
    for seed in 100..160u64 {
        let n = 6 + (seed as usize % 9); // 6..=14
        let g = random_graph(seed, n, 0.4);
        assert_eq!(weighted_independence_number(&g).value, exhaustive_mwis(&g), "seed {seed}");
    }
}

#[test]
fn expansion_preserves_independence_number() {
    // the full view of an expansion has the same independence number as the
    // base graph, checked against the exhaustive oracle on the base
    for seed in 300..320u64 {
        let n = 4 + (seed as usize % 7);
        let g = random_graph(seed, n, 0.35);
        let ge = epsilon_expand(&g, 0.3).unwrap();
        let (_, full) = ge.strict_and_full_views();
        assert_eq!(
            weighted_independence_number(&full).value,
            exhaustive_mwis(&g),
            "seed {seed}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_cliques_and_alpha_match_oracles(seed in 0u64..10_000, n in 4usize..11, dense in proptest::bool::ANY) {
        let g = random_graph(seed, n, if dense { 0.55 } else { 0.3 });
        let fast: Vec<Vec<usize>> =
            enumerate_maximal_cliques(&g).into_iter().map(|c| c.members).collect();
        prop_assert_eq!(fast, exhaustive_maximal_cliques(&g));
        prop_assert_eq!(weighted_independence_number(&g).value, exhaustive_mwis(&g));
    }

    #[test]
    fn prop_expansion_weight_and_serialization(seed in 0u64..10_000, n in 3usize..9) {
        let g = random_graph(seed, n, 0.4);
        let ge = epsilon_expand(&g, 0.25).unwrap();
        // copy weights resum to the original total
        let total: Ratio<i64> = ge.weights().iter().copied().sum();
        prop_assert_eq!(total, g.total_weight());
        // text round trip is exact
        let text = serialize_epsilon_graph(&ge);
        let back = parse_epsilon_graph(&text).unwrap();
        prop_assert_eq!(serialize_epsilon_graph(&back), text);
    }

    #[test]
    fn prop_psd_factor_gram_error(seed in 0u64..10_000, n in 1usize..8) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let a = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let x = &a * a.transpose();
        let tol = 1e-9;
        let vs = psd_factor(&x, tol).unwrap();
        for i in 0..n {
            for j in 0..n {
                let err = (vs[i].dot(&vs[j]) - x[(i, j)]).abs();
                prop_assert!(err <= 10.0 * tol * n as f64 + 1e-12, "gram error {err}");
            }
        }
    }
}
