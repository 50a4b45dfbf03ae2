//! Moment-matrix relaxations of the adversarial guessing probability.
//!
//! Device outcomes are rank-one projectors `P_v` (one per graph vertex) with
//! `P_v^2 = P_v` and `P_u P_v = 0` on orthogonality edges. The adversary
//! holds projectors `E_1..E_{d+1}` forming a complete measurement that
//! commutes with every device operator; outcome `d+1` matches the device's
//! completion outcome `P_0 = I - sum of star projectors`. Commutation lets
//! every adversary outcome condition its own block of device moments, so
//! levels beyond the first are assembled as one PSD block per adversary
//! outcome over device words up to a length cap.

use crate::graphs::{enumerate_maximal_cliques, Clique, WeightedGraph};
use crate::optim::{SdpProblem, SymMat};
use crate::randomness::RandomnessError;
use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// The contextuality test scenario: graph, contexts (maximal cliques), the
/// distinguished generation context, and the score functional.
#[derive(Debug, Clone)]
pub struct ContextualityScenario {
    pub d: usize,
    pub graph: WeightedGraph,
    pub contexts: Vec<Clique>,
    /// Index into `contexts` of the size-`d` generation context.
    pub star_context: usize,
    /// Number of adversary outcomes (`d` star projectors plus completion).
    pub eve_outcomes: usize,
    /// Linear score functional on context-independent vertex marginals:
    /// `omega = sum_v score_weights[v] * Pr[v]`.
    pub score_weights: Vec<f64>,
}

impl ContextualityScenario {
    /// Scenario for the pentagon-family graph in dimension `d`. The score is
    /// the affine rescaling of the test expression onto the range bounded by
    /// the independence and theta numbers, which reduces to the weighted sum
    /// of projector probabilities.
    pub fn pentagon_family(d: usize) -> Result<Self, RandomnessError> {
        let graph = crate::graphs::build_gd(d)
            .map_err(|e| RandomnessError::Domain(e.to_string()))?;
        let contexts = enumerate_maximal_cliques(&graph);
        let star_context = contexts
            .iter()
            .position(|c| c.len() == d)
            .ok_or_else(|| RandomnessError::Domain("no generation context found".into()))?;
        let score_weights = graph.weights_f64();
        Ok(Self { d, graph, contexts, star_context, eve_outcomes: d + 1, score_weights })
    }

    pub fn star_vertices(&self) -> &[usize] {
        &self.contexts[self.star_context].members
    }

    /// Number of contexts containing each vertex.
    pub fn context_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.graph.n_vertices()];
        for c in &self.contexts {
            for &v in &c.members {
                counts[v] += 1;
            }
        }
        counts
    }

    /// Score of a behavior given its context-independent vertex marginals.
    pub fn score_from_marginals(&self, marginals: &[f64]) -> f64 {
        self.score_weights.iter().zip(marginals).map(|(w, p)| w * p).sum()
    }

    /// Largest feasible score (the weighted theta number of the graph).
    pub fn max_score(&self, tol: f64) -> Result<f64, RandomnessError> {
        Ok(crate::theta::lovasz_theta(&self.graph, tol)?.value)
    }
}

/// Relaxation level of the moment-matrix hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpaLevel {
    /// Single moment matrix over `{1, P_v, E_a}`.
    One,
    /// One device-moment block per adversary outcome, device words of
    /// length <= 1 (equivalent to the full matrix over `{1, P, E, PE}`).
    OnePlusAb,
    /// Blocks over device words of length <= 2. Exact but combinatorially
    /// large; practical only for small graphs.
    Two,
}

impl NpaLevel {
    pub fn label(self) -> &'static str {
        match self {
            NpaLevel::One => "1",
            NpaLevel::OnePlusAb => "1+AB",
            NpaLevel::Two => "2",
        }
    }
}

/// A built moment relaxation: the SDP data plus bookkeeping for reading the
/// dual multipliers of the distinguished rows.
#[derive(Debug, Clone)]
pub struct MomentRelaxation {
    pub level: NpaLevel,
    pub dim: usize,
    /// Human-readable monomial labels, block by block.
    pub monomials: Vec<String>,
    pub problem: SdpProblem,
    /// Index of the score row among the constraints.
    pub score_constraint: usize,
    /// Index of the normalization row.
    pub norm_constraint: usize,
}

// Reduced device word; `None` encodes the zero operator.
fn reduce_device_word(g: &WeightedGraph, syms: &[usize]) -> Option<Vec<usize>> {
    let mut out: Vec<usize> = Vec::with_capacity(syms.len());
    for &s in syms {
        match out.last() {
            Some(&t) if t == s => {} // idempotent
            Some(&t) if g.has_edge(t, s) => return None,
            _ => out.push(s),
        }
    }
    Some(out)
}

fn canonical(word: Vec<usize>) -> Vec<usize> {
    let mut rev = word.clone();
    rev.reverse();
    word.min(rev)
}

fn word_label(graph: &WeightedGraph, w: &[usize]) -> String {
    if w.is_empty() {
        "1".to_string()
    } else {
        w.iter()
            .map(|&v| graph.label(v).map(str::to_string).unwrap_or_else(|| format!("P{v}")))
            .collect::<Vec<_>>()
            .join("·")
    }
}

/// Build the guessing-probability SDP at the requested level and score.
///
/// The program maximizes `sum_{a<=d} <P_{star_a} E_a> + <P_0 E_{d+1}>`
/// subject to the moment-matrix structure, normalization, and the score row
/// `sum_v w_v <P_v> = omega`.
pub fn build_guessing_sdp(
    scenario: &ContextualityScenario,
    omega: f64,
    level: NpaLevel,
) -> Result<MomentRelaxation, RandomnessError> {
    match level {
        NpaLevel::One => build_level_one(scenario, omega),
        NpaLevel::OnePlusAb => build_block_level(scenario, omega, 1, level),
        NpaLevel::Two => build_block_level(scenario, omega, 2, level),
    }
}

/// Level 1: one matrix over `{1} ∪ {P_v} ∪ {E_a}`.
fn build_level_one(
    scenario: &ContextualityScenario,
    omega: f64,
) -> Result<MomentRelaxation, RandomnessError> {
    let g = &scenario.graph;
    let n = g.n_vertices();
    let ne = scenario.eve_outcomes;
    let dim = 1 + n + ne;
    let p_idx = |v: usize| 1 + v;
    let e_idx = |a: usize| 1 + n + a;

    let mut constraints: Vec<(SymMat, f64)> = Vec::new();
    // normalization <1> = 1
    let mut norm = SymMat::new(dim);
    norm.push_cell(0, 0, 1.0);
    constraints.push((norm, 1.0));
    let norm_constraint = 0;

    // score row
    let mut score = SymMat::new(dim);
    for v in 0..n {
        score.push_cell(0, p_idx(v), scenario.score_weights[v]);
    }
    constraints.push((score, omega));
    let score_constraint = 1;

    // projector idempotence: X[P_v,P_v] = X[0,P_v]
    for v in 0..n {
        let mut c = SymMat::new(dim);
        c.push_cell(p_idx(v), p_idx(v), 1.0);
        c.push_cell(0, p_idx(v), -1.0);
        constraints.push((c, 0.0));
    }
    // orthogonality edges
    for (u, v) in g.edges() {
        let mut c = SymMat::new(dim);
        c.push_cell(p_idx(u), p_idx(v), 1.0);
        constraints.push((c, 0.0));
    }
    // adversary projectivity
    for a in 0..ne {
        let mut c = SymMat::new(dim);
        c.push_cell(e_idx(a), e_idx(a), 1.0);
        c.push_cell(0, e_idx(a), -1.0);
        constraints.push((c, 0.0));
        for b in (a + 1)..ne {
            let mut c = SymMat::new(dim);
            c.push_cell(e_idx(a), e_idx(b), 1.0);
            constraints.push((c, 0.0));
        }
    }
    // completeness: sum_a <E_a> = 1 and sum_a <P_v E_a> = <P_v>
    let mut comp = SymMat::new(dim);
    for a in 0..ne {
        comp.push_cell(0, e_idx(a), 1.0);
    }
    constraints.push((comp, 1.0));
    for v in 0..n {
        let mut c = SymMat::new(dim);
        for a in 0..ne {
            c.push_cell(p_idx(v), e_idx(a), 1.0);
        }
        c.push_cell(0, p_idx(v), -1.0);
        constraints.push((c, 0.0));
    }

    // objective
    let mut objective = DMatrix::<f64>::zeros(dim, dim);
    let mut put = |r: usize, c: usize, v: f64| {
        if r == c {
            objective[(r, c)] += v;
        } else {
            objective[(r, c)] += 0.5 * v;
            objective[(c, r)] += 0.5 * v;
        }
    };
    let star = scenario.star_vertices().to_vec();
    for (a, &sv) in star.iter().enumerate() {
        put(p_idx(sv), e_idx(a), 1.0);
    }
    // completion term <(1 - sum_i P_star_i) E_{d+1}>
    put(0, e_idx(ne - 1), 1.0);
    for &sv in &star {
        put(p_idx(sv), e_idx(ne - 1), -1.0);
    }

    let mut monomials = vec!["1".to_string()];
    monomials.extend((0..n).map(|v| word_label(g, &[v])));
    monomials.extend((0..ne).map(|a| format!("E{}", a + 1)));

    Ok(MomentRelaxation {
        level: NpaLevel::One,
        dim,
        monomials,
        problem: SdpProblem { dim, objective, constraints },
        score_constraint,
        norm_constraint,
    })
}

/// Block levels: one device-moment block per adversary outcome, over device
/// words of length at most `cap`.
fn build_block_level(
    scenario: &ContextualityScenario,
    omega: f64,
    cap: usize,
    level: NpaLevel,
) -> Result<MomentRelaxation, RandomnessError> {
    let g = &scenario.graph;
    let n = g.n_vertices();
    let ne = scenario.eve_outcomes;

    // Device word basis: empty word, single projectors, then longer words in
    // lexicographic order.
    let mut basis: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..cap {
        let mut next = Vec::new();
        for w in &frontier {
            for v in 0..n {
                let mut ext = w.clone();
                ext.push(v);
                if let Some(r) = reduce_device_word(g, &ext) {
                    if r.len() == ext.len() {
                        next.push(ext);
                    }
                }
            }
        }
        basis.extend(next.iter().cloned());
        frontier = next;
    }
    let bdim = basis.len();
    let dim = ne * bdim;
    let cell = |a: usize, r: usize, c: usize| (a * bdim + r, a * bdim + c);

    let mut constraints: Vec<(SymMat, f64)> = Vec::new();

    // normalization: sum_a B_a[0,0] = 1
    let mut norm = SymMat::new(dim);
    for a in 0..ne {
        let (r, c) = cell(a, 0, 0);
        norm.push_cell(r, c, 1.0);
    }
    constraints.push((norm, 1.0));
    let norm_constraint = 0;

    // score: sum_a sum_v w_v B_a[0, P_v] = omega  (P_v is basis index 1+v)
    let mut score = SymMat::new(dim);
    for a in 0..ne {
        for v in 0..n {
            let (r, c) = cell(a, 0, 1 + v);
            score.push_cell(r, c, scenario.score_weights[v]);
        }
    }
    constraints.push((score, omega));
    let score_constraint = 1;

    // Per-block word structure: zero cells and identification classes.
    // The same pattern repeats in every block.
    let mut zero_cells: Vec<(usize, usize)> = Vec::new();
    let mut classes: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
    for r in 0..bdim {
        for c in r..bdim {
            let mut joined: Vec<usize> = basis[r].iter().rev().copied().collect();
            joined.extend(basis[c].iter().copied());
            match reduce_device_word(g, &joined) {
                None => zero_cells.push((r, c)),
                Some(w) => classes.entry(canonical(w)).or_default().push((r, c)),
            }
        }
    }
    for a in 0..ne {
        for &(r, c) in &zero_cells {
            let mut m = SymMat::new(dim);
            let (rr, cc) = cell(a, r, c);
            m.push_cell(rr, cc, 1.0);
            constraints.push((m, 0.0));
        }
        for cells in classes.values() {
            let (r0, c0) = cells[0];
            for &(r, c) in &cells[1..] {
                let mut m = SymMat::new(dim);
                let (rr, cc) = cell(a, r, c);
                let (rr0, cc0) = cell(a, r0, c0);
                m.push_cell(rr, cc, 1.0);
                m.push_cell(rr0, cc0, -1.0);
                constraints.push((m, 0.0));
            }
        }
    }

    // objective: sum_{a<=d} B_a[0, star_a] + B_{d+1}[0,0] - sum_i B_{d+1}[0, star_i]
    let mut objective = DMatrix::<f64>::zeros(dim, dim);
    let mut put = |r: usize, c: usize, v: f64| {
        if r == c {
            objective[(r, c)] += v;
        } else {
            objective[(r, c)] += 0.5 * v;
            objective[(c, r)] += 0.5 * v;
        }
    };
    let star = scenario.star_vertices().to_vec();
    for (a, &sv) in star.iter().enumerate() {
        let (r, c) = cell(a, 0, 1 + sv);
        put(r, c, 1.0);
    }
    let last = ne - 1;
    let (r, c) = cell(last, 0, 0);
    put(r, c, 1.0);
    for &sv in &star {
        let (r, c) = cell(last, 0, 1 + sv);
        put(r, c, -1.0);
    }

    let mut monomials = Vec::with_capacity(dim);
    for a in 0..ne {
        for w in &basis {
            monomials.push(format!("E{}·{}", a + 1, word_label(g, w)));
        }
    }

    Ok(MomentRelaxation {
        level,
        dim,
        monomials,
        problem: SdpProblem { dim, objective, constraints },
        score_constraint,
        norm_constraint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_structure() {
        let s = ContextualityScenario::pentagon_family(3).unwrap();
        assert_eq!(s.contexts.len(), 16);
        assert_eq!(s.star_vertices(), &[0, 5, 10]);
        assert_eq!(s.eve_outcomes, 4);
        let counts = s.context_counts();
        assert_eq!(counts[0], 3); // star vertex: central clique + two cycle edges
        assert_eq!(counts[1], 2);
        // score of the uniform-1/3-star behavior piece
        let mut marg = vec![0.0; 15];
        for &v in s.star_vertices() {
            marg[v] = 1.0 / 3.0;
        }
        assert!((s.score_from_marginals(&marg) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn level_dimensions() {
        let s = ContextualityScenario::pentagon_family(3).unwrap();
        let l1 = build_guessing_sdp(&s, 7.2, NpaLevel::One).unwrap();
        assert_eq!(l1.dim, 1 + 15 + 4);
        let lab = build_guessing_sdp(&s, 7.2, NpaLevel::OnePlusAb).unwrap();
        assert_eq!(lab.dim, 4 * 16);
        // level 2 block basis: empty + 15 singles + ordered non-adjacent pairs
        let l2 = build_guessing_sdp(&s, 7.2, NpaLevel::Two).unwrap();
        let pairs = 15 * 14 - 2 * 18;
        assert_eq!(l2.dim, 4 * (1 + 15 + pairs));
    }

    #[test]
    fn word_reduction() {
        let g = crate::graphs::build_odd_cycle(5).unwrap();
        assert_eq!(reduce_device_word(&g, &[2, 2, 4]), Some(vec![2, 4]));
        assert_eq!(reduce_device_word(&g, &[2, 3]), None); // edge
        assert_eq!(reduce_device_word(&g, &[0, 2, 0]), Some(vec![0, 2, 0]));
        assert_eq!(canonical(vec![3, 1]), vec![1, 3]);
    }
}
