//! Spot-checking randomness-expansion protocol simulation.
//!
//! Rounds are designated test or generation. A test round draws a context
//! uniformly and records that context's score term (in game-score units)
//! under the device behavior; a generation round inputs the distinguished
//! context and records the mapped outcome as a raw symbol. The protocol
//! accepts when the empirical score over test rounds stays inside the
//! confidence window, and then certifies
//! `N * f_min(omega_exp - delta) - l_ext` extractable bits.
//!
//! Two deliberate simulation choices keep the acceptance statistics tight:
//! the number of test rounds is fixed to `round(gamma * N)` (a uniformly
//! random subset, so each round is a test round with probability `gamma`),
//! and the recorded score of a test round is the drawn context's score term
//! under the sampled device's distribution rather than a single-shot
//! estimate. The empirical score is then exactly the mean score term over
//! the drawn contexts.

use crate::combinat::weighted_independence_number;
use crate::graphs::gd_block_permutations;
use crate::optim::psd_factor;
use crate::randomness::guessing::TradeoffFunction;
use crate::randomness::npa::ContextualityScenario;
use crate::randomness::RandomnessError;
use crate::theta::{lovasz_theta, symmetrize_solution};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::fmt::Write as _;

/// An i.i.d. device: one outcome distribution per context. Entry `k` of
/// `context_probs[c]` is the probability that the `k`-th member of context
/// `c` fires; the trailing entry is the no-fire (completion) probability.
#[derive(Debug, Clone)]
pub struct DeviceBehavior {
    pub context_probs: Vec<Vec<f64>>,
}

impl DeviceBehavior {
    /// Build from context-independent vertex marginals.
    pub fn from_vertex_marginals(
        scenario: &ContextualityScenario,
        marginals: &[f64],
    ) -> Result<Self, RandomnessError> {
        if marginals.len() != scenario.graph.n_vertices() {
            return Err(RandomnessError::Domain(format!(
                "{} marginals for {} vertices",
                marginals.len(),
                scenario.graph.n_vertices()
            )));
        }
        let mut context_probs = Vec::with_capacity(scenario.contexts.len());
        for c in &scenario.contexts {
            let mut probs: Vec<f64> = c.members.iter().map(|&v| marginals[v].max(0.0)).collect();
            let total: f64 = probs.iter().sum();
            if total > 1.0 + 1e-6 {
                return Err(RandomnessError::Domain(format!(
                    "context probabilities sum to {total} > 1"
                )));
            }
            probs.push((1.0 - total).max(0.0));
            context_probs.push(probs);
        }
        Ok(Self { context_probs })
    }

    /// Score term of one context in game-score units:
    /// `|contexts| * sum_{v in C} w_v / n_v * Pr[v | C]`.
    pub fn context_score_term(&self, scenario: &ContextualityScenario, ctx: usize) -> f64 {
        let counts = scenario.context_counts();
        let c = &scenario.contexts[ctx];
        let term: f64 = c
            .members
            .iter()
            .enumerate()
            .map(|(k, &v)| scenario.score_weights[v] / counts[v] as f64 * self.context_probs[ctx][k])
            .sum();
        scenario.contexts.len() as f64 * term
    }

    /// Expected game score of the behavior (mean score term over contexts).
    pub fn score(&self, scenario: &ContextualityScenario) -> f64 {
        (0..scenario.contexts.len())
            .map(|c| self.context_score_term(scenario, c))
            .sum::<f64>()
            / scenario.contexts.len() as f64
    }

    /// Marginals of the distinguished generation context.
    pub fn star_marginals(&self, scenario: &ContextualityScenario) -> Vec<f64> {
        self.context_probs[scenario.star_context].clone()
    }
}

/// The optimal quantum device for the pentagon family: recovered from the
/// symmetrized theta SDP optimum via its Gram vectors (state = border row),
/// giving context-independent marginals `|<v|psi>|^2`. The star context
/// yields `d` uniform outcomes and the behavior attains the theta score.
pub fn honest_device_behavior(
    d: usize,
    tol: f64,
) -> Result<(ContextualityScenario, DeviceBehavior), RandomnessError> {
    if !(3..=6).contains(&d) {
        return Err(RandomnessError::Domain(format!(
            "honest device supported for dimensions 3..=6, got {d}"
        )));
    }
    let scenario = ContextualityScenario::pentagon_family(d)?;
    let theta = lovasz_theta(&scenario.graph, tol)?;
    let sym = symmetrize_solution(&scenario.graph, &theta.moment_matrix, &gd_block_permutations(d))?;
    let gram = psd_factor(&sym, 1e-6)?;
    let psi_norm = gram[0].norm();
    if psi_norm < 1e-6 {
        return Err(RandomnessError::Domain("degenerate state recovery".into()));
    }
    let psi = &gram[0] / psi_norm;
    let n = scenario.graph.n_vertices();
    let marginals: Vec<f64> = (0..n)
        .map(|v| {
            let g = &gram[v + 1];
            let nrm = g.norm();
            if nrm < 1e-9 {
                0.0
            } else {
                let ov = psi.dot(&(g / nrm));
                ov * ov
            }
        })
        .collect();
    let device = DeviceBehavior::from_vertex_marginals(&scenario, &marginals)?;
    Ok((scenario, device))
}

/// The best classical device: a deterministic assignment from a maximum
/// independent set, scoring the independence number.
pub fn classical_deterministic_behavior(
    scenario: &ContextualityScenario,
) -> Result<DeviceBehavior, RandomnessError> {
    let wit = weighted_independence_number(&scenario.graph);
    let marginals: Vec<f64> = (0..scenario.graph.n_vertices())
        .map(|v| if wit.witness.binary_search(&v).is_ok() { 1.0 } else { 0.0 })
        .collect();
    DeviceBehavior::from_vertex_marginals(scenario, &marginals)
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub n_rounds: usize,
    /// Test-round probability.
    pub gamma: f64,
    /// Expected score of an honest implementation.
    pub omega_exp: f64,
    /// Half-width of the acceptance window around `omega_exp`.
    pub delta: f64,
    /// Security-parameter placeholders recorded in the transcript contract;
    /// they do not enter the first-order certified length.
    pub eps_smooth: f64,
    pub eps_ext: f64,
    pub eps_eat: f64,
    /// Entropy loss of the extractor.
    pub l_ext: f64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(n_rounds: usize, gamma: f64, omega_exp: f64, delta: f64, seed: u64) -> Self {
        Self {
            n_rounds,
            gamma,
            omega_exp,
            delta,
            eps_smooth: 1e-8,
            eps_ext: 1e-8,
            eps_eat: 3e-8,
            l_ext: 100.0,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub test: bool,
    pub context: usize,
    /// Index of the fired member within the context; `None` when no
    /// projector fired.
    pub outcome: Option<usize>,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct ProtocolTranscript {
    pub rounds: Vec<RoundRecord>,
    /// Mapped outcome per generation round (`None` = reject symbol,
    /// excluded from the raw string).
    pub raw_symbols: Vec<Option<u8>>,
    pub n_test_rounds: usize,
    pub omega_obs: f64,
    pub aborted: bool,
    /// `N * f_min(omega_exp - delta) - l_ext` when accepted, else 0.
    pub certified_bits: f64,
}

impl ProtocolTranscript {
    /// Raw bit string: each symbol encoded in `ceil(log2 d)` bits, rejects
    /// skipped.
    pub fn raw_bits(&self, d: usize) -> Vec<u8> {
        let width = usize::BITS - (d - 1).leading_zeros();
        let mut bits = Vec::new();
        for s in self.raw_symbols.iter().flatten() {
            for k in (0..width).rev() {
                bits.push((s >> k) & 1);
            }
        }
        bits
    }

    /// Line-oriented dump: `round,T,input,outputs,score`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.rounds.iter().enumerate() {
            let out = match r.outcome {
                Some(k) => k.to_string(),
                None => "-".to_string(),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                i,
                if r.test { 1 } else { 0 },
                r.context,
                out,
                r.score
            );
        }
        s
    }
}

/// Run the spot-checking protocol with an i.i.d. device behavior.
/// Fully reproducible from the config seed.
pub fn simulate_protocol(
    scenario: &ContextualityScenario,
    cfg: &ProtocolConfig,
    device: &DeviceBehavior,
    tradeoff: &TradeoffFunction,
) -> Result<ProtocolTranscript, RandomnessError> {
    if cfg.n_rounds == 0 {
        return Err(RandomnessError::Domain("at least one round required".into()));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
        return Err(RandomnessError::Domain(format!(
            "test probability must lie in (0, 1], got {}",
            cfg.gamma
        )));
    }
    if cfg.delta <= 0.0 {
        return Err(RandomnessError::Domain("confidence width must be positive".into()));
    }
    if device.context_probs.len() != scenario.contexts.len() {
        return Err(RandomnessError::Domain("device does not match the scenario".into()));
    }

    let n = cfg.n_rounds;
    let n_ctx = scenario.contexts.len();
    let score_terms: Vec<f64> =
        (0..n_ctx).map(|c| device.context_score_term(scenario, c)).collect();
    let star = scenario.star_context;

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);

    // Fixed-count spot checking: round(gamma * N) test rounds at uniformly
    // random positions, so every round is a test round with probability
    // gamma and the empirical score is a mean over exactly that many terms.
    let m_test = ((cfg.gamma * n as f64).round() as usize).clamp(1, n);
    let mut positions: Vec<u32> = (0..n as u32).collect();
    for i in 0..m_test {
        let j = rng.gen_range(i..n);
        positions.swap(i, j);
    }
    let mut is_test = vec![false; n];
    for &p in &positions[..m_test] {
        is_test[p as usize] = true;
    }

    let sample = |rng: &mut ChaCha12Rng, probs: &[f64]| -> Option<usize> {
        let mut u: f64 = rng.gen();
        for (k, &p) in probs[..probs.len() - 1].iter().enumerate() {
            if u < p {
                return Some(k);
            }
            u -= p;
        }
        None
    };

    let mut rounds = Vec::with_capacity(n);
    let mut raw_symbols = Vec::new();
    let mut score_sum = 0.0;
    for i in 0..n {
        if is_test[i] {
            let ctx = rng.gen_range(0..n_ctx);
            let outcome = sample(&mut rng, &device.context_probs[ctx]);
            let score = score_terms[ctx];
            score_sum += score;
            rounds.push(RoundRecord { test: true, context: ctx, outcome, score });
        } else {
            let outcome = sample(&mut rng, &device.context_probs[star]);
            raw_symbols.push(outcome.map(|k| k as u8));
            rounds.push(RoundRecord { test: false, context: star, outcome, score: 0.0 });
        }
    }

    let omega_obs = score_sum / m_test as f64;
    let aborted = !(omega_obs > cfg.omega_exp - cfg.delta && omega_obs < cfg.omega_exp + cfg.delta);
    let certified_bits = if aborted {
        0.0
    } else {
        n as f64 * tradeoff.entropy(cfg.omega_exp - cfg.delta) - cfg.l_ext
    };
    Ok(ProtocolTranscript {
        rounds,
        raw_symbols,
        n_test_rounds: m_test,
        omega_obs,
        aborted,
        certified_bits,
    })
}
