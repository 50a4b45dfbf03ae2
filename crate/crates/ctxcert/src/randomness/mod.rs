//! Adversarial randomness quantification and protocol simulation.
//!
//! The guessing probability of an adversary holding quantum side information
//! is upper-bounded by a moment-matrix SDP over device projectors and
//! adversary projectors, subject to a linear game-score constraint. Its dual
//! multipliers yield affine functions dominating the whole guessing curve,
//! whose negated logarithms serve as entropy tradeoff functions for the
//! spot-checking expansion protocol simulated here.

mod extractor;
mod guessing;
mod npa;
mod protocol;

pub use extractor::{extract_from_transcript, toeplitz_extract};
pub use guessing::{
    guessing_probability, min_entropy_curve, min_tradeoff_family, CurvePoint, GuessingResult,
    TradeoffFunction,
};
pub use npa::{build_guessing_sdp, ContextualityScenario, MomentRelaxation, NpaLevel};
pub use protocol::{
    classical_deterministic_behavior, honest_device_behavior, simulate_protocol, DeviceBehavior,
    ProtocolConfig, ProtocolTranscript, RoundRecord,
};

use crate::optim::{OptimError, SdpStatus};
use crate::theta::ThetaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RandomnessError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("score {omega} is outside the feasible range [0, {max}]")]
    InfeasibleScore { omega: f64, max: f64 },
    #[error("solver did not reach optimality: {0:?}")]
    SolverStatus(SdpStatus),
    #[error("bit-string length mismatch: {0}")]
    LengthMismatch(String),
    #[error("requested {requested} output bits but only {certified} are certified")]
    ExceedsCertified { requested: usize, certified: f64 },
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Combinat(#[from] crate::combinat::CombinatError),
}
