//! Round-by-round retransmission engines and their integer delay
//! accounting.
//!
//! Two variants share one incremental-redundancy error model:
//!
//! - **Standard**: decode and feed back after every round. Each round costs
//!   a sub-block transmission, a processing attempt, and a forward plus
//!   feedback propagation leg.
//! - **Fast**: after the first sub-block the receiver predicts how many
//!   rounds `l0` it needs and stays silent until then; rounds before `l0`
//!   cost only transmission plus the forward leg, and the first decode
//!   attempt happens at round `l0`.
//!
//! Decode outcomes are Bernoulli draws from the conditional failure
//! probability `eps_l / eps_{l-1}` of the accumulated-information error
//! chain, so a simulated trajectory reproduces the analytic per-round
//! error probabilities in distribution.

use crate::channel::ChannelState;
use crate::fbc::{harq_ir_error, CodingConfig};
use rand::Rng;

/// Which retransmission protocol a link runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarqVariant {
    Standard,
    Fast,
}

/// Protocol parameters for one link.
#[derive(Debug, Clone, PartialEq)]
pub struct HarqConfig {
    pub variant: HarqVariant,
    pub coding: CodingConfig,
    /// Safety margin on the predicted round count of the fast variant:
    /// the first decode is scheduled once `l * nhat * C_1` covers
    /// `payload_bits * (1 + l0_margin)`.
    pub l0_margin: f64,
    /// Decode-attempt processing time, channel uses.
    pub processing_delay_cu: u64,
}

impl HarqConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.coding.validate()?;
        if !(self.l0_margin >= 0.0 && self.l0_margin.is_finite()) {
            return Err(format!(
                "l0_margin must be finite and >= 0, got {}",
                self.l0_margin
            ));
        }
        Ok(())
    }
}

/// Additive delay components of one delivery, in channel uses. `total` is
/// always the sum of the four components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DelayBreakdown {
    pub queuing_cu: u64,
    pub transmission_cu: u64,
    pub processing_cu: u64,
    pub propagation_cu: u64,
    pub total_cu: u64,
}

impl DelayBreakdown {
    pub fn new(queuing_cu: u64, transmission_cu: u64, processing_cu: u64, propagation_cu: u64) -> Self {
        DelayBreakdown {
            queuing_cu,
            transmission_cu,
            processing_cu,
            propagation_cu,
            total_cu: queuing_cu + transmission_cu + processing_cu + propagation_cu,
        }
    }

    /// Componentwise sum of two breakdowns (multi-hop composition).
    pub fn plus(&self, other: &DelayBreakdown) -> DelayBreakdown {
        DelayBreakdown::new(
            self.queuing_cu + other.queuing_cu,
            self.transmission_cu + other.transmission_cu,
            self.processing_cu + other.processing_cu,
            self.propagation_cu + other.propagation_cu,
        )
    }

    /// The same breakdown with the queuing component replaced.
    pub fn with_queuing(&self, queuing_cu: u64) -> DelayBreakdown {
        DelayBreakdown::new(
            queuing_cu,
            self.transmission_cu,
            self.processing_cu,
            self.propagation_cu,
        )
    }
}

/// Result of running one update through a link's retransmission protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct HarqOutcome {
    /// Rounds actually transmitted (1..=max_rounds).
    pub rounds_used: u32,
    /// Whether the payload decoded within the round budget.
    pub success: bool,
    /// Predicted first-decode round of the fast variant; `None` for the
    /// standard variant.
    pub l0: Option<u32>,
    /// Channel state observed in each transmitted round.
    pub per_round_states: Vec<ChannelState>,
    /// Link-level delay (queuing component zero; the queue fills it in).
    pub delay: DelayBreakdown,
}

// --- round-count prediction ---------------------------------------------

/// Predict, from the first round's channel state, how many rounds the fast
/// variant should accumulate before its first decode attempt: the smallest
/// `l` with `l * nhat * C_1 >= payload_bits * (1 + margin)`, clamped to
/// `max_rounds`. A dead first round (`C_1 = 0`) predicts the full budget;
/// a zero payload predicts a single round.
pub fn estimate_rounds_l0(first: &ChannelState, coding: &CodingConfig, margin: f64) -> u32 {
    assert!(margin >= 0.0 && margin.is_finite(), "margin must be finite and >= 0");
    let target = coding.payload_bits as f64 * (1.0 + margin);
    for l in 1..=coding.max_rounds {
        if (l * coding.sub_blocklength) as f64 * first.capacity >= target {
            return l;
        }
    }
    coding.max_rounds
}

// --- delay accounting ---------------------------------------------------

/// Delay components implied by an outcome, given the protocol and the
/// link's one-way propagation delay.
///
/// Standard, `l` rounds: `l` sub-blocks on air, `l` decode attempts,
/// `2l` propagation legs (every round is acknowledged).
/// Fast, `l` rounds with first decode at `l0`: `l` sub-blocks,
/// `l - l0 + 1` decode attempts, and `2l - l0 + 1` propagation legs —
/// the `l0 - 1` silent rounds ride on one forward leg each and generate
/// no feedback.
pub fn delay_breakdown(
    outcome: &HarqOutcome,
    config: &HarqConfig,
    one_way_propagation_cu: u64,
) -> DelayBreakdown {
    let l = outcome.rounds_used as u64;
    let nhat = config.coding.sub_blocklength as u64;
    let p = config.processing_delay_cu;
    let d = one_way_propagation_cu;
    match config.variant {
        HarqVariant::Standard => DelayBreakdown::new(0, l * nhat, l * p, 2 * l * d),
        HarqVariant::Fast => {
            let l0 = outcome.l0.expect("fast outcome carries its l0") as u64;
            debug_assert!(l0 >= 1 && l0 <= l, "fast decode window must cover the rounds used");
            let attempts = l - l0 + 1;
            DelayBreakdown::new(0, l * nhat, attempts * p, (2 * l - l0 + 1) * d)
        }
    }
}

// --- protocol engines ---------------------------------------------------

/// Run the standard protocol: decode after every round, stop on the first
/// success or when the round budget is spent.
///
/// `draw_state` produces the channel state of each transmitted round;
/// every decode attempt consumes exactly one uniform draw from `rng`, so a
/// trajectory is reproducible from the seed alone.
pub fn run_standard_harq<R, F>(
    mut draw_state: F,
    config: &HarqConfig,
    one_way_propagation_cu: u64,
    rng: &mut R,
) -> HarqOutcome
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> ChannelState,
{
    let k = config.coding.payload_bits as f64;
    let nhat = config.coding.sub_blocklength;
    let mut states = Vec::with_capacity(config.coding.max_rounds as usize);
    let mut prev_eps = 1.0f64;
    for l in 1..=config.coding.max_rounds {
        states.push(draw_state(rng));
        let eps = harq_ir_error(&states, nhat, k).expect("at least one round present");
        let cond_fail = if prev_eps > 0.0 {
            (eps / prev_eps).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let decoded = rng.gen::<f64>() >= cond_fail;
        if decoded {
            return finish(l, true, None, states, config, one_way_propagation_cu);
        }
        prev_eps = eps;
    }
    finish(
        config.coding.max_rounds,
        false,
        None,
        states,
        config,
        one_way_propagation_cu,
    )
}

/// Run the fast protocol: predict `l0` from the first round, stay silent
/// through rounds `1..l0`, then decode every round from `l0` on. The first
/// decode uses the unconditional accumulated error probability; later
/// attempts use the conditional chain, exactly like the standard variant.
pub fn run_fast_harq<R, F>(
    mut draw_state: F,
    config: &HarqConfig,
    one_way_propagation_cu: u64,
    rng: &mut R,
) -> HarqOutcome
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> ChannelState,
{
    let k = config.coding.payload_bits as f64;
    let nhat = config.coding.sub_blocklength;
    let mut states = vec![draw_state(rng)];
    let l0 = estimate_rounds_l0(&states[0], &config.coding, config.l0_margin);
    let mut prev_eps: Option<f64> = None;
    for l in 1..=config.coding.max_rounds {
        if l > 1 {
            states.push(draw_state(rng));
        }
        if l < l0 {
            continue; // silent accumulation round: no decode, no feedback
        }
        let eps = harq_ir_error(&states, nhat, k).expect("at least one round present");
        let cond_fail = match prev_eps {
            None => eps.clamp(0.0, 1.0),
            Some(p) if p > 0.0 => (eps / p).clamp(0.0, 1.0),
            Some(_) => 0.0,
        };
        let decoded = rng.gen::<f64>() >= cond_fail;
        if decoded {
            return finish(l, true, Some(l0), states, config, one_way_propagation_cu);
        }
        prev_eps = Some(eps);
    }
    finish(
        config.coding.max_rounds,
        false,
        Some(l0),
        states,
        config,
        one_way_propagation_cu,
    )
}

/// Run whichever variant `config` selects.
pub fn run_harq<R, F>(
    draw_state: F,
    config: &HarqConfig,
    one_way_propagation_cu: u64,
    rng: &mut R,
) -> HarqOutcome
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> ChannelState,
{
    match config.variant {
        HarqVariant::Standard => run_standard_harq(draw_state, config, one_way_propagation_cu, rng),
        HarqVariant::Fast => run_fast_harq(draw_state, config, one_way_propagation_cu, rng),
    }
}

fn finish(
    rounds_used: u32,
    success: bool,
    l0: Option<u32>,
    per_round_states: Vec<ChannelState>,
    config: &HarqConfig,
    one_way_propagation_cu: u64,
) -> HarqOutcome {
    let mut outcome = HarqOutcome {
        rounds_used,
        success,
        l0,
        per_round_states,
        delay: DelayBreakdown::default(),
    };
    outcome.delay = delay_breakdown(&outcome, config, one_way_propagation_cu);
    outcome
}

// ------------------------------------------------------------------------
