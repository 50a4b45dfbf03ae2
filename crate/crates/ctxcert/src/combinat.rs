//! Exact classical bounds: weighted independence number (branch and bound
//! over exact rationals), weighted fractional packing number (LP over the
//! maximal-clique constraints), and the relaxed-model independence bound.

use crate::graphs::{enumerate_maximal_cliques, ratio_to_f64, EpsilonGraph, Weight, WeightedGraph};
use crate::optim::{solve_lp, LpProblem, LpStatus, OptimError};
use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CombinatError {
    #[error("linear program did not reach optimality: {0:?}")]
    LpFailed(LpStatus),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// Exact maximum-weight independent set: value and a witness attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceResult {
    pub value: Weight,
    pub witness: Vec<usize>,
}

impl IndependenceResult {
    pub fn value_f64(&self) -> f64 {
        ratio_to_f64(&self.value)
    }
}

/// Fractional packing optimum with the attaining per-vertex assignment.
#[derive(Debug, Clone)]
pub struct PackingResult {
    pub value: f64,
    pub assignment: Vec<f64>,
}

/// Exact maximum-weight independent set by branch and bound.
///
/// Upper bounds come from a greedy weighted clique cover of the candidate
/// set; branching picks the highest-degree candidate (lowest index on ties),
/// include-branch first. All arithmetic is exact.
pub fn weighted_independence_number(g: &WeightedGraph) -> IndependenceResult {
    let n = g.n_vertices();
    let mut best = IndependenceResult { value: Ratio::from_integer(0), witness: vec![] };
    let mut chosen: Vec<usize> = Vec::new();
    let cands: Vec<usize> = (0..n).collect();
    branch(g, &cands, Ratio::from_integer(0), &mut chosen, &mut best);
    best
}

fn branch(
    g: &WeightedGraph,
    cands: &[usize],
    current: Weight,
    chosen: &mut Vec<usize>,
    best: &mut IndependenceResult,
) {
    if cands.is_empty() {
        if current > best.value {
            best.value = current;
            best.witness = {
                let mut w = chosen.clone();
                w.sort_unstable();
                w
            };
        }
        return;
    }
    if current + clique_cover_bound(g, cands) <= best.value {
        return;
    }
    // Branch vertex: highest degree within the candidate set, lowest index tie.
    let v = *cands
        .iter()
        .max_by_key(|&&v| {
            let deg = cands.iter().filter(|&&u| g.has_edge(v, u)).count();
            (deg, usize::MAX - v)
        })
        .expect("nonempty");

    // Include v.
    let reduced: Vec<usize> = cands.iter().copied().filter(|&u| u != v && !g.has_edge(v, u)).collect();
    chosen.push(v);
    branch(g, &reduced, current + g.weight(v), chosen, best);
    chosen.pop();

    // Exclude v.
    let without: Vec<usize> = cands.iter().copied().filter(|&u| u != v).collect();
    branch(g, &without, current, chosen, best);
}

/// Greedy weighted clique cover of the candidate set: each clique contributes
/// its maximum weight, and any independent set picks at most one vertex per
/// clique, so the sum is an upper bound.
fn clique_cover_bound(g: &WeightedGraph, cands: &[usize]) -> Weight {
    let mut order: Vec<usize> = cands.to_vec();
    order.sort_by_key(|&v| {
        let deg = cands.iter().filter(|&&u| g.has_edge(v, u)).count();
        (usize::MAX - deg, v)
    });
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match cliques
            .iter_mut()
            .find(|c| c.iter().all(|&u| g.has_edge(u, v)))
        {
            Some(c) => c.push(v),
            None => cliques.push(vec![v]),
        }
    }
    cliques
        .iter()
        .map(|c| c.iter().map(|&v| g.weight(v)).max().expect("nonempty clique"))
        .sum()
}

/// Weighted fractional packing number: maximize `sum_v w_v p_v` subject to
/// `sum_{v in C} p_v <= 1` over all maximal cliques and `0 <= p <= 1`.
/// Constraining maximal cliques suffices: every clique extends to a maximal
/// one with a stronger constraint.
pub fn fractional_packing_number(g: &WeightedGraph) -> Result<PackingResult, CombinatError> {
    let n = g.n_vertices();
    let cliques = enumerate_maximal_cliques(g);
    let rows: Vec<(Vec<f64>, f64)> = cliques
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for &v in &c.members {
                a[v] = 1.0;
            }
            (a, 1.0)
        })
        .collect();
    let p = LpProblem { objective: g.weights_f64(), rows, upper: vec![1.0; n] };
    let (value, assignment, status) = solve_lp(&p, 1e-9)?;
    if status != LpStatus::Optimal {
        return Err(CombinatError::LpFailed(status));
    }
    Ok(PackingResult { value, assignment })
}

/// Relaxed-model upper bound `eps * alpha(G') + (1 - eps) * alpha(G'')` for
/// an ε-graph, using exact independence numbers of both views. When the
/// ε-graph came from `epsilon_expand`, the `G''` term equals the independence
/// number of the pre-expansion graph.
pub fn epsilon_independence_bound(ge: &EpsilonGraph) -> f64 {
    let (strict, full) = ge.strict_and_full_views();
    let a_strict = weighted_independence_number(&strict).value_f64();
    let a_full = weighted_independence_number(&full).value_f64();
    let eps = ge.epsilon();
    // a_full + eps * (a_strict - a_full) keeps the eps = 0 case exact
    a_full + eps * (a_strict - a_full)
}
