//! Two-phase dense simplex with Bland's rule.
//!
//! Solves `max c'x  s.t.  A x <= b, 0 <= x <= u` (upper bounds may be
//! infinite). Bland's rule trades speed for cycle-freedom and determinism,
//! which is the right trade at the problem sizes used here.

use super::OptimError;

#[derive(Debug, Clone)]
pub struct LpProblem {
    /// Objective coefficients (maximization).
    pub objective: Vec<f64>,
    /// Inequality rows `a_i . x <= b_i`.
    pub rows: Vec<(Vec<f64>, f64)>,
    /// Upper bounds per variable; `f64::INFINITY` for unbounded above.
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    MaxIterations,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;

/// Solve an LP; returns (optimal value, solution, status).
pub fn solve_lp(p: &LpProblem, tol: f64) -> Result<(f64, Vec<f64>, LpStatus), OptimError> {
    if tol <= 0.0 {
        return Err(OptimError::BadTolerance(tol));
    }
    let n = p.objective.len();
    if p.upper.len() != n {
        return Err(OptimError::Shape(format!(
            "{} upper bounds for {n} variables",
            p.upper.len()
        )));
    }
    // Assemble rows: user inequalities plus finite upper bounds.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (a, b) in &p.rows {
        if a.len() != n {
            return Err(OptimError::Shape(format!("row has {} coefficients", a.len())));
        }
        rows.push((a.clone(), *b));
    }
    for (j, &u) in p.upper.iter().enumerate() {
        if u.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, u));
        } else if u < 0.0 {
            return Err(OptimError::Shape("negative upper bound".into()));
        }
    }
    let m = rows.len();

    // Tableau over variables [x (n) | slack (m) | artificial (as needed)].
    // Rows are normalized so b >= 0; slack coefficient becomes -1 on flipped
    // rows, which then need an artificial variable for the initial basis.
    let mut need_artificial = Vec::new();
    let mut tab = vec![vec![0.0f64; n + m]; m];
    let mut rhs = vec![0.0f64; m];
    for (i, (a, b)) in rows.iter().enumerate() {
        let flip = *b < 0.0;
        let sgn = if flip { -1.0 } else { 1.0 };
        for j in 0..n {
            tab[i][j] = sgn * a[j];
        }
        tab[i][n + i] = sgn; // slack
        rhs[i] = sgn * b;
        if flip {
            need_artificial.push(i);
        }
    }

    let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
    let total = n + m + need_artificial.len();
    for row in tab.iter_mut() {
        row.resize(total, 0.0);
    }
    for (k, &i) in need_artificial.iter().enumerate() {
        tab[i][n + m + k] = 1.0;
        basis[i] = n + m + k;
    }

    if !need_artificial.is_empty() {
        // Phase 1: minimize sum of artificials.
        let mut phase1 = vec![0.0f64; total];
        for k in 0..need_artificial.len() {
            phase1[n + m + k] = -1.0; // maximize -(sum of artificials)
        }
        let status = run_simplex(&mut tab, &mut rhs, &mut basis, &phase1, total);
        if status != LpStatus::Optimal {
            return Ok((f64::NAN, vec![f64::NAN; n], status));
        }
        let infeas: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &j)| j >= n + m)
            .map(|(i, _)| rhs[i])
            .sum();
        if infeas > 1e-8 {
            return Ok((f64::NAN, vec![f64::NAN; n], LpStatus::Infeasible));
        }
        // Drive any residual artificial out of the basis if possible.
        for i in 0..m {
            if basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| tab[i][j].abs() > PIVOT_TOL) {
                    pivot(&mut tab, &mut rhs, &mut basis, i, j);
                }
            }
        }
    }

    let mut cost = vec![0.0f64; total];
    cost[..n].copy_from_slice(&p.objective);
    let status = run_simplex(&mut tab, &mut rhs, &mut basis, &cost, n + m);

    let mut x = vec![0.0f64; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = rhs[i];
        }
    }
    let value: f64 = p.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
    Ok((value, x, status))
}

/// Bland-rule simplex on an existing basic feasible tableau; columns beyond
/// `active` (artificials in phase 2) are never entered.
fn run_simplex(
    tab: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    active: usize,
) -> LpStatus {
    let m = tab.len();
    for _ in 0..200_000 {
        // Reduced costs via basis multipliers (computed directly from the
        // tableau: z_j - c_j = c_B . col_j - c_j).
        let mut entering = None;
        for j in 0..active {
            if basis.contains(&j) {
                continue;
            }
            let zj: f64 = (0..m).map(|i| cost[basis[i]] * tab[i][j]).sum();
            let reduced = cost[j] - zj;
            if reduced > COST_TOL {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(e) = entering else {
            return LpStatus::Optimal;
        };
        // Ratio test, ties by lowest basis variable index (Bland).
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[i][e] > PIVOT_TOL {
                let ratio = rhs[i] / tab[i][e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-12
                            || (ratio < lr + 1e-12 && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((l, _)) = leave else {
            return LpStatus::Unbounded;
        };
        pivot(tab, rhs, basis, l, e);
    }
    LpStatus::MaxIterations
}

fn pivot(tab: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], l: usize, e: usize) {
    let m = tab.len();
    let piv = tab[l][e];
    for v in tab[l].iter_mut() {
        *v /= piv;
    }
    rhs[l] /= piv;
    for i in 0..m {
        if i != l && tab[i][e].abs() > 0.0 {
            let f = tab[i][e];
            let (src, dst) = if i < l {
                let (a, b) = tab.split_at_mut(l);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = tab.split_at_mut(i);
                (&a[l], &mut b[0])
            };
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d -= f * s;
            }
            rhs[i] -= f * rhs[l];
        }
    }
    basis[l] = e;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable() {
        // max x, x <= 1
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![(vec![1.0], 1.0)],
            upper: vec![f64::INFINITY],
        };
        let (v, x, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Optimal);
        assert!((v - 1.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_face() {
        // max x + y, x + y <= 1
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![(vec![1.0, 1.0], 1.0)],
            upper: vec![1.0, 1.0],
        };
        let (v, _, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Optimal);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded() {
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![],
            upper: vec![f64::INFINITY],
        };
        let (_, _, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible() {
        // x <= -1 with x >= 0
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![(vec![1.0], -1.0)],
            upper: vec![f64::INFINITY],
        };
        let (_, _, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Infeasible);
    }

    #[test]
    fn negative_rhs_feasible() {
        // max x s.t. -x <= -2, x <= 5  => x in [2,5], optimum 5
        let p = LpProblem {
            objective: vec![1.0],
            rows: vec![(vec![-1.0], -2.0), (vec![1.0], 5.0)],
            upper: vec![f64::INFINITY],
        };
        let (v, x, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Optimal);
        assert!((v - 5.0).abs() < 1e-9);
        assert!(x[0] >= 2.0 - 1e-9);
    }

    #[test]
    fn respects_upper_bounds() {
        // max 2x + y, x + y <= 10, x <= 3, y <= 4
        let p = LpProblem {
            objective: vec![2.0, 1.0],
            rows: vec![(vec![1.0, 1.0], 10.0)],
            upper: vec![3.0, 4.0],
        };
        let (v, x, st) = solve_lp(&p, 1e-9).unwrap();
        assert_eq!(st, LpStatus::Optimal);
        assert!((v - 10.0).abs() < 1e-9);
        assert!((x[0] - 3.0).abs() < 1e-9 && (x[1] - 4.0).abs() < 1e-9);
    }
}
