//! Lovász-theta machinery: the bordered SDP for weighted theta, solution
//! symmetrization over graph automorphisms, the analytic one-parameter
//! reduction for the pentagon family, the odd-cycle closed form, the
//! two-block relaxed-orthogonality SDP, and orthonormal-representation
//! recovery from its optimum.

use crate::graphs::{EpsilonGraph, WeightedGraph};
use crate::optim::{psd_factor, solve_sdp, OptimError, SdpProblem, SdpStatus, SymMat};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("solver did not reach optimality: {0:?}")]
    SolverStatus(SdpStatus),
    #[error("permutation is not an automorphism of the graph")]
    NotAutomorphism,
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Graph(#[from] crate::graphs::GraphError),
}

/// Weighted Lovász theta value with its bordered moment matrix.
///
/// The matrix is `(n+1) x (n+1)` with `X[0,0] = 1`, `X[u,u] = X[0,u]`,
/// `X[u,v] = 0` on edges, and `value = sum_u w(u) X[0,u]`; `X[0,u]` is the
/// contribution of vertex `u`.
#[derive(Debug, Clone)]
pub struct ThetaResult {
    pub value: f64,
    pub moment_matrix: DMatrix<f64>,
    pub per_vertex_contribution: Vec<f64>,
}

/// Build the bordered theta SDP for a weighted graph.
pub fn theta_sdp_problem(g: &WeightedGraph) -> SdpProblem {
    let n = g.n_vertices();
    let dim = n + 1;
    let mut constraints = Vec::new();
    let mut corner = SymMat::new(dim);
    corner.push(0, 0, 1.0);
    constraints.push((corner, 1.0));
    for v in 0..n {
        let mut c = SymMat::new(dim);
        c.push(v + 1, v + 1, 1.0);
        c.push(0, v + 1, -0.5); // X[v,v] - X[0,v] = 0
        constraints.push((c, 0.0));
    }
    for (u, v) in g.edges() {
        let mut c = SymMat::new(dim);
        c.push(u + 1, v + 1, 0.5); // X[u,v] = 0
        constraints.push((c, 0.0));
    }
    let mut objective = DMatrix::<f64>::zeros(dim, dim);
    for (v, w) in g.weights_f64().iter().enumerate() {
        objective[(0, v + 1)] = 0.5 * w;
        objective[(v + 1, 0)] = 0.5 * w;
    }
    SdpProblem { dim, objective, constraints }
}

/// Weighted Lovász theta number via the bordered SDP.
pub fn lovasz_theta(g: &WeightedGraph, tol: f64) -> Result<ThetaResult, ThetaError> {
    let p = theta_sdp_problem(g);
    let sol = solve_sdp(&p, tol)?;
    if sol.status != SdpStatus::Optimal {
        return Err(ThetaError::SolverStatus(sol.status));
    }
    let per_vertex: Vec<f64> = (0..g.n_vertices()).map(|v| sol.primal[(0, v + 1)]).collect();
    Ok(ThetaResult {
        value: sol.primal_value,
        moment_matrix: sol.primal,
        per_vertex_contribution: per_vertex,
    })
}

/// Average a feasible bordered moment matrix over a list of automorphisms
/// (index 0 held fixed). Feasibility and objective are preserved; averaging
/// over a group (or any edge/weight-preserving covering set) equalizes the
/// per-vertex contributions along its orbits.
pub fn symmetrize_solution(
    g: &WeightedGraph,
    x: &DMatrix<f64>,
    perms: &[Vec<usize>],
) -> Result<DMatrix<f64>, ThetaError> {
    let n = g.n_vertices();
    if x.nrows() != n + 1 || x.ncols() != n + 1 {
        return Err(ThetaError::Domain(format!(
            "moment matrix is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            n + 1,
            n + 1
        )));
    }
    if perms.is_empty() {
        return Err(ThetaError::Domain("empty permutation list".into()));
    }
    for p in perms {
        if !g.verify_automorphism(p)? {
            return Err(ThetaError::NotAutomorphism);
        }
    }
    let mut acc = DMatrix::<f64>::zeros(n + 1, n + 1);
    for p in perms {
        // lifted index map on the bordered matrix
        let lift = |i: usize| if i == 0 { 0 } else { p[i - 1] + 1 };
        for r in 0..=n {
            for c in 0..=n {
                acc[(r, c)] += x[(lift(r), lift(c))];
            }
        }
    }
    Ok(acc / perms.len() as f64)
}

/// Objective value of a bordered moment matrix under the graph weights.
pub fn theta_objective(g: &WeightedGraph, x: &DMatrix<f64>) -> f64 {
    g.weights_f64()
        .iter()
        .enumerate()
        .map(|(v, w)| w * x[(0, v + 1)])
        .sum()
}

/// The reduced objective for one pentagon under the constraint that its
/// clique vertex contributes `1/t`:
///
/// ```text
/// f(x) = 5/t - 1 + 2(t-1)/t * x + (t-2)/t * 1/x
///        + 2 sqrt(t-1)/t * sqrt(-2x^2 + 3x - 1) / x ,   x in [1/2, 1].
/// ```
fn pentagon_objective(t: f64, x: f64) -> f64 {
    let rad = (-2.0 * x * x + 3.0 * x - 1.0).max(0.0);
    5.0 / t - 1.0 + 2.0 * (t - 1.0) / t * x + (t - 2.0) / t / x
        + 2.0 * (t - 1.0).sqrt() / t * rad.sqrt() / x
}

/// Maximize the reduced pentagon objective over `x in [1/2, 1]`.
/// Returns `(value, argmax)`.
///
/// Strategy: dense grid to bracket the maximum, golden-section refinement,
/// plus the closed-form stationary candidates `3/4 ± sqrt((t-9)/(t-1))/4`
/// (real for `t >= 9`) and both endpoints.
pub fn theta_c5_conditional(t: f64) -> Result<(f64, f64), ThetaError> {
    if !(t >= 3.0) {
        return Err(ThetaError::Domain(format!("conditional parameter must be >= 3, got {t}")));
    }
    let f = |x: f64| pentagon_objective(t, x);
    let mut candidates: Vec<f64> = vec![0.5, 1.0];
    if t >= 9.0 {
        let s = ((t - 9.0) / (t - 1.0)).sqrt() / 4.0;
        candidates.push(0.75 - s);
        candidates.push(0.75 + s);
    }
    // bracket interior maxima on a grid, then refine
    const GRID: usize = 4096;
    let h = 0.5 / GRID as f64;
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let v = f(0.5 + i as f64 * h);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = 0.5 + h * best_i.saturating_sub(1) as f64;
    let hi = (0.5 + h * (best_i + 1) as f64).min(1.0);
    candidates.push(golden_max(&f, lo, hi));

    let (mut vx, mut vv) = (0.5, f64::NEG_INFINITY);
    for x in candidates {
        let x = x.clamp(0.5, 1.0);
        let v = f(x);
        if v > vv {
            vv = v;
            vx = x;
        }
    }
    Ok((vv, vx))
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > 1e-13 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Analytic weighted theta of the pentagon family: `d` times the conditional
/// pentagon value at `t = d`.
pub fn theta_gd_analytic(d: usize) -> Result<f64, ThetaError> {
    if d < 3 {
        return Err(ThetaError::Domain(format!("dimension must be >= 3, got {d}")));
    }
    Ok(d as f64 * theta_c5_conditional(d as f64)?.0)
}

/// Closed-form Lovász theta of the odd cycle: `n cos(pi/n) / (1 + cos(pi/n))`.
pub fn theta_odd_cycle_closed(n: usize) -> f64 {
    assert!(n >= 3 && n % 2 == 1, "odd n >= 3 required, got {n}");
    let c = (std::f64::consts::PI / n as f64).cos();
    n as f64 * c / (1.0 + c)
}

/// Optimum of the two-block relaxed-orthogonality SDP.
///
/// `X` vanishes on strict edges, `Y` on strict and ε edges, the diagonals
/// agree, both have unit trace, and the value is
/// `sqrt(eps) * sw'X sw + (1 - sqrt(eps)) * sw'Y sw` with `sw = sqrt(w)`.
#[derive(Debug, Clone)]
pub struct EpsThetaResult {
    pub value: f64,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

/// Build and solve the two-block SDP for an ε-graph.
pub fn epsilon_theta_relaxation(
    ge: &EpsilonGraph,
    tol: f64,
) -> Result<EpsThetaResult, ThetaError> {
    let n = ge.n_vertices();
    let dim = 2 * n; // X block at 0..n, Y block at n..2n
    let sqrt_eps = ge.epsilon().sqrt();
    let sw: Vec<f64> = ge.weights_f64().iter().map(|w| w.sqrt()).collect();

    let mut constraints = Vec::new();
    let mut tr_x = SymMat::new(dim);
    let mut tr_y = SymMat::new(dim);
    for v in 0..n {
        tr_x.push(v, v, 1.0);
        tr_y.push(n + v, n + v, 1.0);
    }
    constraints.push((tr_x, 1.0));
    constraints.push((tr_y, 1.0));
    for v in 0..n {
        let mut c = SymMat::new(dim);
        c.push(v, v, 1.0);
        c.push(n + v, n + v, -1.0);
        constraints.push((c, 0.0));
    }
    for (u, v) in ge.strict_edges() {
        let mut cx = SymMat::new(dim);
        cx.push(u, v, 0.5);
        constraints.push((cx, 0.0));
        let mut cy = SymMat::new(dim);
        cy.push(n + u, n + v, 0.5);
        constraints.push((cy, 0.0));
    }
    for (u, v) in ge.eps_edges() {
        let mut cy = SymMat::new(dim);
        cy.push(n + u, n + v, 0.5);
        constraints.push((cy, 0.0));
    }

    let mut objective = DMatrix::<f64>::zeros(dim, dim);
    for u in 0..n {
        for v in 0..n {
            objective[(u, v)] = sqrt_eps * sw[u] * sw[v];
            objective[(n + u, n + v)] = (1.0 - sqrt_eps) * sw[u] * sw[v];
        }
    }

    let sol = solve_sdp(&SdpProblem { dim, objective, constraints }, tol)?;
    if sol.status != SdpStatus::Optimal {
        return Err(ThetaError::SolverStatus(sol.status));
    }
    let x = sol.primal.view((0, 0), (n, n)).into_owned();
    let y = sol.primal.view((n, n), (n, n)).into_owned();
    Ok(EpsThetaResult { value: sol.primal_value, x, y })
}

/// Recover a state and per-vertex unit vectors from a solved two-block
/// relaxation via the Gram factorization of `Z = sqrt(eps) X + (1-sqrt(eps)) Y`.
///
/// On strict edges the recovered vectors are orthogonal (up to tolerance);
/// on ε-edges their overlap is at most `sqrt(eps)`; and the recovered value
/// `sum_v w(v) |<psi|v>|^2` is at least the SDP optimum. A vertex whose Gram
/// norm vanishes gets the zero vector.
pub fn recover_orthonormal_rep(
    r: &EpsThetaResult,
    ge: &EpsilonGraph,
) -> Result<(DVector<f64>, Vec<DVector<f64>>), ThetaError> {
    let n = ge.n_vertices();
    let sqrt_eps = ge.epsilon().sqrt();
    let z = sqrt_eps * &r.x + (1.0 - sqrt_eps) * &r.y;
    let raw = psd_factor(&z, 1e-7)?;
    let dim = raw[0].len();
    let sw: Vec<f64> = ge.weights_f64().iter().map(|w| w.sqrt()).collect();
    let mut psi = DVector::<f64>::zeros(dim);
    for v in 0..n {
        psi += sw[v] * &raw[v];
    }
    let psi_norm = psi.norm();
    if psi_norm > 0.0 {
        psi /= psi_norm;
    }
    let units: Vec<DVector<f64>> = raw
        .iter()
        .map(|u| {
            let nrm = u.norm();
            if nrm > 1e-9 {
                u / nrm
            } else {
                DVector::zeros(dim)
            }
        })
        .collect();
    Ok((psi, units))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::weighted_independence_number;
    use crate::graphs::{
        build_gd, build_odd_cycle, epsilon_expand, gd_block_swap, gd_vertex, WeightedGraph,
    };

    #[test]
    fn theta_complete_graph_is_one() {
        for n in [2usize, 4, 6] {
            let edges: Vec<_> =
                (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
            let g = WeightedGraph::unit_weights(n, &edges).unwrap();
            let t = lovasz_theta(&g, 1e-9).unwrap();
            assert!((t.value - 1.0).abs() < 1e-7, "n={n}: {}", t.value);
        }
    }

    #[test]
    fn theta_c5_is_sqrt5() {
        let c5 = build_odd_cycle(5).unwrap();
        let t = lovasz_theta(&c5, 1e-9).unwrap();
        assert!((t.value - 5f64.sqrt()).abs() < 1e-7, "{}", t.value);
        // moment-matrix invariants
        for (u, v) in c5.edges() {
            assert!(t.moment_matrix[(u + 1, v + 1)].abs() < 1e-7);
        }
        for v in 0..5 {
            assert!(
                (t.moment_matrix[(v + 1, v + 1)] - t.moment_matrix[(0, v + 1)]).abs() < 1e-7
            );
        }
        let recomputed = theta_objective(&c5, &t.moment_matrix);
        assert!((recomputed - t.value).abs() < 1e-9);
    }

    #[test]
    fn theta_g3_matches_reference() {
        let g3 = build_gd(3).unwrap();
        let t = lovasz_theta(&g3, 1e-9).unwrap();
        assert!((t.value - 7.6753).abs() < 1e-3, "{}", t.value);
    }

    #[test]
    fn pentagon_conditional_reference_values() {
        let (v3, _) = theta_c5_conditional(3.0).unwrap();
        assert!((v3 - 2.5585).abs() < 1e-4, "{v3}");
        let (v9, x9) = theta_c5_conditional(9.0).unwrap();
        assert!((v9 - (2.0 + 2.0 / 9.0)).abs() < 1e-8, "{v9}");
        assert!((x9 - 0.75).abs() < 1e-5, "{x9}");
        let (v16, x16) = theta_c5_conditional(16.0).unwrap();
        assert!((v16 - 2.125).abs() < 1e-8);
        // both closed-form stationary points attain the optimum
        let s = 0.25 * (7.0f64 / 15.0).sqrt();
        for cand in [0.75 - s, 0.75 + s] {
            assert!((pentagon_objective(16.0, cand) - 2.125).abs() < 1e-9);
        }
        assert!((x16 - (0.75 - s)).abs() < 1e-6 || (x16 - (0.75 + s)).abs() < 1e-6);
        assert!(theta_c5_conditional(2.9).is_err());
    }

    #[test]
    fn pentagon_conditional_monotone_in_t() {
        let mut prev = f64::INFINITY;
        let mut t = 3.0;
        while t <= 50.0 {
            let (v, _) = theta_c5_conditional(t).unwrap();
            assert!(v <= prev + 1e-12, "t={t}");
            prev = v;
            t += 0.5;
        }
    }

    #[test]
    fn gd_analytic_reference_values() {
        assert!((theta_gd_analytic(3).unwrap() - 7.6753).abs() < 1e-3);
        assert!((theta_gd_analytic(8).unwrap() - 17.9944).abs() < 1e-3);
        assert!((theta_gd_analytic(20).unwrap() - 42.0).abs() < 1e-6);
        for d in 9..=16 {
            assert!(
                (theta_gd_analytic(d).unwrap() - (2.0 * d as f64 + 2.0)).abs() < 1e-8,
                "d={d}"
            );
        }
        assert!(theta_gd_analytic(2).is_err());
    }

    #[test]
    fn odd_cycle_closed_form() {
        assert!((theta_odd_cycle_closed(5) - 5f64.sqrt()).abs() < 1e-12);
        assert!((theta_odd_cycle_closed(3) - 1.0).abs() < 1e-12);
        assert!((theta_odd_cycle_closed(7) - 3.3177).abs() < 1e-4);
    }

    #[test]
    fn sdp_matches_closed_form_on_cycles() {
        for n in [5usize, 7, 9] {
            let c = build_odd_cycle(n).unwrap();
            let t = lovasz_theta(&c, 1e-9).unwrap();
            assert!((t.value - theta_odd_cycle_closed(n)).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn symmetrization_equalizes_g3() {
        let g3 = build_gd(3).unwrap();
        let t = lovasz_theta(&g3, 1e-9).unwrap();
        let swaps = vec![gd_block_swap(3, 1, 2), gd_block_swap(3, 1, 3), gd_block_swap(3, 2, 3)];
        let xs = symmetrize_solution(&g3, &t.moment_matrix, &swaps).unwrap();
        for i in 1..=3 {
            let c = xs[(0, gd_vertex(i, 1) + 1)];
            assert!((c - 1.0 / 3.0).abs() < 1e-5, "i={i}: {c}");
        }
        // objective preserved
        assert!((theta_objective(&g3, &xs) - t.value).abs() < 1e-9);
        // feasibility preserved on edges
        for (u, v) in g3.edges() {
            assert!(xs[(u + 1, v + 1)].abs() < 1e-7);
        }
    }

    #[test]
    fn symmetrization_identity_and_rotations() {
        let c5 = build_odd_cycle(5).unwrap();
        let t = lovasz_theta(&c5, 1e-9).unwrap();
        let id: Vec<usize> = (0..5).collect();
        let same = symmetrize_solution(&c5, &t.moment_matrix, &[id]).unwrap();
        assert!((same - &t.moment_matrix).norm() < 1e-12);

        // all five rotations equalize the contributions
        let rots: Vec<Vec<usize>> =
            (0..5).map(|s| (0..5).map(|v| (v + s) % 5).collect()).collect();
        let xs = symmetrize_solution(&c5, &t.moment_matrix, &rots).unwrap();
        let c0 = xs[(0, 1)];
        for v in 0..5 {
            assert!((xs[(0, v + 1)] - c0).abs() < 1e-10);
        }
        assert!((theta_objective(&c5, &xs) - t.value).abs() < 1e-9);

        // non-automorphism is rejected
        let bad: Vec<usize> = vec![1, 0, 2, 3, 4];
        assert!(matches!(
            symmetrize_solution(&c5, &t.moment_matrix, &[bad]),
            Err(ThetaError::NotAutomorphism)
        ));
    }

    #[test]
    fn sandwich_alpha_theta() {
        for g in [build_odd_cycle(7).unwrap(), build_gd(3).unwrap()] {
            let alpha = weighted_independence_number(&g).value_f64();
            let theta = lovasz_theta(&g, 1e-9).unwrap().value;
            assert!(alpha <= theta + 1e-6);
        }
    }

    #[test]
    fn eps_relaxation_c5() {
        let c5 = build_odd_cycle(5).unwrap();
        let ge = epsilon_expand(&c5, 0.3).unwrap();
        let r = epsilon_theta_relaxation(&ge, 1e-8).unwrap();
        assert!(r.value > 0.0);
        // invariants: diagonals agree, traces are one
        for v in 0..ge.n_vertices() {
            assert!((r.x[(v, v)] - r.y[(v, v)]).abs() < 1e-6);
        }
        assert!((r.x.trace() - 1.0).abs() < 1e-6);
        assert!((r.y.trace() - 1.0).abs() < 1e-6);
        for (u, v) in ge.strict_edges() {
            assert!(r.x[(u, v)].abs() < 1e-6);
            assert!(r.y[(u, v)].abs() < 1e-6);
        }
        for (u, v) in ge.eps_edges() {
            assert!(r.y[(u, v)].abs() < 1e-6);
        }
    }

    #[test]
    fn eps_relaxation_zero_eps_collapses_to_full_view_theta() {
        let c5 = build_odd_cycle(5).unwrap();
        let ge = epsilon_expand(&c5, 0.0).unwrap();
        let r = epsilon_theta_relaxation(&ge, 1e-8).unwrap();
        // with sqrt(eps) = 0 the objective reads the Y block only, whose
        // pattern is the full view; the trace normalization makes this the
        // standard theta program for G''.
        let (_, full) = ge.strict_and_full_views();
        let t = lovasz_theta(&full, 1e-9).unwrap();
        assert!((r.value - t.value).abs() < 1e-5, "{} vs {}", r.value, t.value);
    }

    #[test]
    fn recovery_certificates_c5() {
        let c5 = build_odd_cycle(5).unwrap();
        let ge = epsilon_expand(&c5, 0.3).unwrap();
        let r = epsilon_theta_relaxation(&ge, 1e-8).unwrap();
        let (psi, units) = recover_orthonormal_rep(&r, &ge).unwrap();
        let sqrt_eps = ge.epsilon().sqrt();
        for (u, v) in ge.strict_edges() {
            assert!(units[u].dot(&units[v]).abs() < 1e-6);
        }
        for (u, v) in ge.eps_edges() {
            assert!(units[u].dot(&units[v]).abs() <= sqrt_eps + 1e-6);
        }
        let recovered: f64 = ge
            .weights_f64()
            .iter()
            .enumerate()
            .map(|(v, w)| {
                let ov = psi.dot(&units[v]);
                w * ov * ov
            })
            .sum();
        assert!(recovered >= r.value - 1e-6, "{recovered} vs {}", r.value);
    }
}
