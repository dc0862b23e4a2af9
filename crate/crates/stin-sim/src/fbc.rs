//! Short-blocklength coding: the normal approximation to the decoding
//! error probability of a finite-length codeword, its extension to
//! incremental-redundancy retransmissions that accumulate mutual
//! information across rounds, and the error-rate QoS exponent derived
//! from both.
//!
//! Everything here is analytic — no randomness. The simulation layer turns
//! these probabilities into Bernoulli decode outcomes.

use crate::channel::ChannelState;
use thiserror::Error;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Beyond this argument magnitude the Gaussian tail is below f64 noise;
/// the tail probability is clamped to exactly 0 or 1.
const Q_SATURATION: f64 = 38.0;

#[derive(Debug, Error, PartialEq)]
pub enum FbcError {
    #[error("retransmission error needs at least one per-round channel state")]
    EmptyRounds,
}

// --- configuration ------------------------------------------------------

/// Blocklength budget of one status update: `payload_bits` information
/// bits, sent in up to `max_rounds` sub-blocks of `sub_blocklength`
/// channel uses each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodingConfig {
    pub payload_bits: u32,
    pub sub_blocklength: u32,
    pub max_rounds: u32,
}

impl CodingConfig {
    /// Total codeword blocklength when all rounds are used.
    pub fn blocklength(&self) -> u32 {
        self.max_rounds * self.sub_blocklength
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.payload_bits < 1 {
            return Err(format!(
                "payload_bits must be >= 1, got {}",
                self.payload_bits
            ));
        }
        if self.sub_blocklength < 1 {
            return Err(format!(
                "sub_blocklength must be >= 1, got {}",
                self.sub_blocklength
            ));
        }
        if self.max_rounds < 1 {
            return Err(format!("max_rounds must be >= 1, got {}", self.max_rounds));
        }
        Ok(())
    }
}

// --- Gaussian tail ------------------------------------------------------

/// Upper tail of the standard normal distribution, `Q(x) = P(Z > x)`.
///
/// Implemented via the complementary error function and clamped to
/// exactly 0 / 1 beyond |x| = 38, where the true tail is far below f64
/// resolution; the clamp keeps downstream log-domain code out of
/// subnormal territory.
pub fn q_function(x: f64) -> f64 {
    if x > Q_SATURATION {
        return 0.0;
    }
    if x < -Q_SATURATION {
        return 1.0;
    }
    0.5 * libm::erfc(x / SQRT_2)
}

// --- decoding error -----------------------------------------------------

/// Shared normal-approximation kernel. Takes already-accumulated totals:
/// `info_bits` = sum of per-round `n_i * C_i`, `dispersion_total` = sum of
/// per-round `n_i * V_i`, and `blocklength_total` = sum of `n_i`.
fn accumulated_error(
    info_bits: f64,
    dispersion_total: f64,
    payload_bits: f64,
    blocklength_total: f64,
) -> f64 {
    let correction = 0.5 * blocklength_total.log2();
    if dispersion_total <= 0.0 {
        // Dispersion-free channel: decoding is a threshold test on whether
        // the accumulated information covers the payload.
        return if info_bits + correction >= payload_bits {
            0.0
        } else {
            1.0
        };
    }
    q_function((info_bits - payload_bits + correction) / dispersion_total.sqrt())
}

/// Decoding error probability of a single codeword of `blocklength`
/// channel uses carrying `payload_bits` information bits over `state`.
///
/// `payload_bits` is a real number so capacity-fraction rate rules can
/// produce non-integer payloads; zero payload is valid and decodes with
/// vanishing error on any channel with positive capacity.
pub fn decoding_error(blocklength: u32, payload_bits: f64, state: &ChannelState) -> f64 {
    assert!(blocklength >= 1, "blocklength must be >= 1");
    assert!(
        payload_bits >= 0.0 && payload_bits.is_finite(),
        "payload_bits must be finite and >= 0, got {payload_bits}"
    );
    let n = blocklength as f64;
    accumulated_error(
        n * state.capacity,
        n * state.dispersion,
        payload_bits,
        n,
    )
}

/// Decoding error probability after `states.len()` incremental-redundancy
/// rounds of `sub_blocklength` channel uses each, with per-round channel
/// states `states`. Capacity and dispersion accumulate across rounds; the
/// blocklength correction uses the total length received so far.
///
/// With a single round this reduces exactly to [`decoding_error`] at
/// `n = sub_blocklength`.
pub fn harq_ir_error(
    states: &[ChannelState],
    sub_blocklength: u32,
    payload_bits: f64,
) -> Result<f64, FbcError> {
    if states.is_empty() {
        return Err(FbcError::EmptyRounds);
    }
    assert!(sub_blocklength >= 1, "sub_blocklength must be >= 1");
    assert!(
        payload_bits >= 0.0 && payload_bits.is_finite(),
        "payload_bits must be finite and >= 0, got {payload_bits}"
    );
    let nhat = sub_blocklength as f64;
    let mut info_bits = 0.0;
    let mut dispersion_total = 0.0;
    for s in states {
        info_bits += nhat * s.capacity;
        dispersion_total += nhat * s.dispersion;
    }
    Ok(accumulated_error(
        info_bits,
        dispersion_total,
        payload_bits,
        nhat * states.len() as f64,
    ))
}

// --- error-rate exponent ------------------------------------------------

/// Convert an error probability into a decay exponent per `denominator`
/// channel uses: `-ln(eps) / denominator`.
///
/// Sentinels: a zero error probability maps to `+inf` (error-free link),
/// certain failure maps to 0 (no decay at all).
pub fn theta_from_error(error_prob: f64, denominator: f64) -> f64 {
    assert!(denominator > 0.0, "denominator must be positive");
    if error_prob <= 0.0 {
        return f64::INFINITY;
    }
    if error_prob >= 1.0 {
        return 0.0;
    }
    -error_prob.ln() / denominator
}

/// Error-rate QoS exponent of a single round of `sub_blocklength` channel
/// uses carrying `payload_bits` over `state`, normalized per sub-block
/// channel use.
pub fn error_exponent(sub_blocklength: u32, payload_bits: f64, state: &ChannelState) -> f64 {
    let eps = decoding_error(sub_blocklength, payload_bits, state);
    theta_from_error(eps, sub_blocklength as f64)
}

/// Normalization of the error-rate exponent reported by
/// [`theta_error_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentNorm {
    /// Decay per sub-block channel use (`-ln eps / nhat`), the
    /// retransmission-oriented normalization.
    PerSubBlock,
    /// Decay per total codeword channel use (`-ln eps / (rounds * nhat)`).
    PerCodeword,
}

/// How the payload scales along a sub-blocklength sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateRule {
    /// The payload is a fixed bit count regardless of blocklength.
    FixedPayload { bits: f64 },
    /// The payload is a fraction of the single-round capacity,
    /// `bits = fraction * capacity * nhat`.
    CapacityFraction { fraction: f64 },
}

impl RateRule {
    pub fn payload_bits(&self, sub_blocklength: u32, state: &ChannelState) -> f64 {
        match *self {
            RateRule::FixedPayload { bits } => bits,
            RateRule::CapacityFraction { fraction } => {
                fraction * state.capacity * sub_blocklength as f64
            }
        }
    }
}

/// Error-rate exponent across a grid of sub-blocklengths, for a codeword
/// that uses all `rounds` retransmissions over the identically-distributed
/// state `state`.
///
/// Returns `(nhat, theta)` pairs in grid order.
pub fn theta_error_curve(
    nhat_grid: &[u32],
    rounds: u32,
    rate: &RateRule,
    state: &ChannelState,
    norm: ExponentNorm,
) -> Vec<(u32, f64)> {
    assert!(rounds >= 1, "rounds must be >= 1");
    nhat_grid
        .iter()
        .map(|&nhat| {
            let k = rate.payload_bits(nhat, state);
            let states = vec![*state; rounds as usize];
            let eps = harq_ir_error(&states, nhat, k).expect("rounds >= 1");
            let denom = match norm {
                ExponentNorm::PerSubBlock => nhat as f64,
                ExponentNorm::PerCodeword => (rounds * nhat) as f64,
            };
            (nhat, theta_from_error(eps, denom))
        })
        .collect()
}

// ------------------------------------------------------------------------
