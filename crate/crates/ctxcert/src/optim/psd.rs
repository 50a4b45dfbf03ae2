//! Gram-vector factorization of (numerically) positive semidefinite matrices.

use super::OptimError;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Factor a symmetric PSD matrix `X` into vectors `u_v` with
/// `<u_v, u_w> = X_vw` (up to `rank_tol * dim`). Eigenvalues in
/// `[-rank_tol, 0)` are clipped to zero; anything below `-rank_tol` is an
/// error. The returned vectors have length equal to the numerical rank.
pub fn psd_factor(x: &DMatrix<f64>, rank_tol: f64) -> Result<Vec<DVector<f64>>, OptimError> {
    if x.nrows() != x.ncols() {
        return Err(OptimError::Shape(format!("matrix is {}x{}", x.nrows(), x.ncols())));
    }
    if rank_tol < 0.0 {
        return Err(OptimError::BadTolerance(rank_tol));
    }
    let n = x.nrows();
    let sym = 0.5 * (x + x.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut kept: Vec<usize> = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -rank_tol {
            return Err(OptimError::NotPsd(l, rank_tol));
        }
        if l > rank_tol {
            kept.push(i);
        }
    }
    // Deterministic coordinate order: descending eigenvalue, index tiebreak.
    kept.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let rank = kept.len().max(1);
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let mut u = DVector::zeros(rank);
        for (k, &i) in kept.iter().enumerate() {
            u[k] = eig.eigenvalues[i].sqrt() * eig.eigenvectors[(v, i)];
        }
        out.push(u);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_orthonormal_triple() {
        let x = DMatrix::<f64>::identity(3, 3);
        let vs = psd_factor(&x, 1e-12).unwrap();
        assert_eq!(vs.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vs[i].dot(&vs[j]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_recovered() {
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let x = &v * v.transpose();
        let vs = psd_factor(&x, 1e-10).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((vs[i].dot(&vs[j]) - x[(i, j)]).abs() < 1e-10);
            }
        }
        // single direction: all vectors parallel
        assert_eq!(vs[0].len(), 1);
    }

    #[test]
    fn rejects_indefinite() {
        let mut x = DMatrix::<f64>::identity(2, 2);
        x[(1, 1)] = -1.0;
        assert!(matches!(psd_factor(&x, 1e-9), Err(OptimError::NotPsd(_, _))));
    }

    #[test]
    fn clips_small_negatives() {
        let mut x = DMatrix::<f64>::identity(2, 2);
        x[(1, 1)] = -1e-12;
        let vs = psd_factor(&x, 1e-9).unwrap();
        assert!(vs[1].norm() < 1e-6);
    }
}
