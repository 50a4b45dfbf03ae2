//! Guessing probability, dual-derived tradeoff functions, and the
//! min-entropy curve.

use crate::optim::{solve_sdp, SdpSolution, SdpStatus};
use crate::randomness::npa::{build_guessing_sdp, ContextualityScenario, NpaLevel};
use crate::randomness::RandomnessError;

/// How far inside the feasible score interval the solver anchors a boundary
/// request; at the exact boundary the primal loses strict feasibility.
const BOUNDARY_INSET: f64 = 1e-7;

/// One solved guessing instance.
#[derive(Debug, Clone)]
pub struct GuessingResult {
    /// Requested game score.
    pub omega: f64,
    /// Score actually solved at (equal to `omega` unless insetting from the
    /// feasibility boundary).
    pub omega_solved: f64,
    pub level: NpaLevel,
    pub p_guess: f64,
    /// Dual bound; a certified upper bound on the guessing probability
    /// (exceeds `p_guess` by the solver gap).
    pub dual_value: f64,
    /// Multiplier of the score row: slope of the dual affine dominator.
    pub lambda_score: f64,
    /// Intercept of the dominator, `dual_value - lambda_score * omega_solved`.
    pub intercept: f64,
    /// Smallest eigenvalue of the implied dual slack; near-zero negative
    /// values quantify how far the dual certificate is from exact
    /// feasibility.
    pub dual_slack_min_eig: f64,
    pub solution: SdpSolution,
}

/// An affine upper bound `g(omega) = lambda0 * omega + intercept` on the
/// guessing curve, tangent at its anchor when strong duality holds, and the
/// induced entropy bound `f(omega) = -log2 g(omega)`.
#[derive(Debug, Clone)]
pub struct TradeoffFunction {
    pub anchor: f64,
    pub lambda0: f64,
    pub intercept: f64,
    pub p_at_anchor: f64,
}

impl TradeoffFunction {
    pub fn g(&self, omega: f64) -> f64 {
        self.lambda0 * omega + self.intercept
    }

    /// Entropy lower bound in bits; requires `g(omega) > 0`.
    pub fn entropy(&self, omega: f64) -> f64 {
        -self.g(omega).log2()
    }
}

/// Acceptable relative duality gap for boundary-degenerate instances; at the
/// edges of the feasible score range the optimal face loses strict
/// complementarity and the solver stalls short of the interior tolerance.
const DEGENERATE_GAP: f64 = 2e-4;

/// Upper-bound the adversary's guessing probability at the given game score
/// and relaxation level. Scores outside `[0, theta]` are rejected as
/// infeasible before invoking the solver.
///
/// At the boundary scores the solver may stop at `MaxIterations` with a
/// small certified gap; such results are returned with the status recorded
/// as long as the dual certificate stays feasible, so `dual_value` remains a
/// valid upper bound.
pub fn guessing_probability(
    scenario: &ContextualityScenario,
    omega: f64,
    level: NpaLevel,
    tol: f64,
) -> Result<GuessingResult, RandomnessError> {
    let max = scenario.max_score(1e-9)?;
    if omega < -1e-9 || omega > max + 1e-6 {
        return Err(RandomnessError::InfeasibleScore { omega, max });
    }
    let omega_solved = omega.min(max - BOUNDARY_INSET).max(BOUNDARY_INSET);
    let relaxation = build_guessing_sdp(scenario, omega_solved, level)?;
    let sol = solve_sdp(&relaxation.problem, tol)?;
    if sol.status == SdpStatus::InfeasibleDetected {
        return Err(RandomnessError::InfeasibleScore { omega, max });
    }
    let gap_rel = sol.gap / (1.0 + sol.primal_value.abs() + sol.dual_value.abs());
    if sol.status != SdpStatus::Optimal && gap_rel > DEGENERATE_GAP {
        return Err(RandomnessError::SolverStatus(sol.status));
    }
    // implied dual slack: sum_i lambda_i S_i - G
    let mut slack = -&relaxation.problem.objective;
    for (i, (s, _)) in relaxation.problem.constraints.iter().enumerate() {
        s.add_into(&mut slack, sol.dual[i]);
    }
    let slack_sym = 0.5 * (&slack + slack.transpose());
    let dual_slack_min_eig = nalgebra::SymmetricEigen::new(slack_sym).eigenvalues.min();
    if dual_slack_min_eig < -1e-6 * (1.0 + relaxation.problem.objective.norm()) {
        return Err(RandomnessError::SolverStatus(sol.status));
    }
    let lambda_score = sol.dual[relaxation.score_constraint];
    let intercept = sol.dual_value - lambda_score * omega_solved;
    Ok(GuessingResult {
        omega,
        omega_solved,
        level,
        p_guess: sol.primal_value,
        dual_value: sol.dual_value,
        lambda_score,
        intercept,
        dual_slack_min_eig,
        solution: sol,
    })
}

/// One tradeoff function per anchor score. Weak duality makes each returned
/// affine function dominate the entire guessing curve; with the solver gap
/// at tolerance it touches the curve at its anchor.
pub fn min_tradeoff_family(
    scenario: &ContextualityScenario,
    anchors: &[f64],
    level: NpaLevel,
    tol: f64,
) -> Result<Vec<TradeoffFunction>, RandomnessError> {
    anchors
        .iter()
        .map(|&anchor| {
            let r = guessing_probability(scenario, anchor, level, tol)?;
            Ok(TradeoffFunction {
                anchor,
                lambda0: r.lambda_score,
                intercept: r.intercept,
                p_at_anchor: r.p_guess,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub omega: f64,
    pub p_guess: f64,
    pub h_min: f64,
}

/// Min-entropy versus game score on a grid: `h_min = -log2 p_guess`.
pub fn min_entropy_curve(
    scenario: &ContextualityScenario,
    grid: &[f64],
    level: NpaLevel,
    tol: f64,
) -> Result<Vec<CurvePoint>, RandomnessError> {
    grid.iter()
        .map(|&omega| {
            let r = guessing_probability(scenario, omega, level, tol)?;
            Ok(CurvePoint { omega, p_guess: r.p_guess, h_min: -r.p_guess.log2() })
        })
        .collect()
}
