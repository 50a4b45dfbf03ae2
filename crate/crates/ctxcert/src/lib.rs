//! Bounds and certifications for graph-based contextuality tests.
//!
//! The crate computes the three standard bounds of a non-contextuality
//! expression attached to a weighted orthogonality graph — the exact
//! independence number (classical models), the Lovász theta number (quantum
//! models, via a dense SDP), and the fractional packing number
//! (non-disturbing models, via an LP) — together with their relaxed variants
//! on ε-orthogonality graphs. On top of those sit an adversarial
//! guessing-probability bound from a moment-matrix SDP hierarchy, affine
//! entropy tradeoff functions derived from its dual, a spot-checking
//! randomness-expansion protocol simulator with a Toeplitz extractor, and
//! explicit non-disturbing attack constructions for magic arrangements.

pub mod attacks;
pub mod combinat;
pub mod epsmodels;
pub mod graphs;
pub mod optim;
pub mod randomness;
pub mod theta;
