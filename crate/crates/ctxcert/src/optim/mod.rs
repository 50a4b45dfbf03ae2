//! Self-contained dense convex solvers: a primal-dual interior-point method
//! for small equality-constrained SDPs, a two-phase simplex for LPs, and a
//! positive-semidefinite Gram factorization.
//!
//! Everything here is deterministic: fixed pivoting and step rules, no
//! randomized initialization, so repeated solves of the same data are
//! bit-for-bit reproducible.

mod lp;
mod psd;
mod sdp;

pub use lp::{solve_lp, LpProblem, LpStatus};
pub use psd::psd_factor;
pub use sdp::{solve_sdp, SdpProblem, SdpSolution, SdpStatus, SymMat};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix is not positive semidefinite: eigenvalue {0} below -{1}")]
    NotPsd(f64, f64),
    #[error("numeric failure: {0}")]
    Numeric(String),
}
