//! Discrete-event simulator and statistical QoS toolkit for status-update
//! delivery over satellite-terrestrial integrated networks.
//!
//! The crate is organized in layers:
//!
//! - [`channel`] — geometry, pathloss, fading, and the SINR → (capacity,
//!   dispersion) mapping that everything above consumes.
//! - [`fbc`] — short-blocklength coding: decoding error probability for a
//!   single codeword and for incremental-redundancy retransmissions, plus the
//!   error-rate QoS exponent derived from it.
//! - [`harq`] — round-by-round retransmission state machines (standard and
//!   fast variants) with integer delay accounting.
//! - [`sim`] — arrival generation, path selection, the FCFS queueing loop,
//!   and age-of-information trajectories.
//! - [`metrics`] — empirical tail estimation, log-linear QoS-exponent
//!   fitting, violation probabilities, and Mellin transforms.
//! - [`config`] / [`runner`] / [`sweep`] / [`report`] — scenario files,
//!   run artifacts, parameter sweeps, and figure extraction for the CLI.
//!
//! All simulation time is carried as integer channel-use counts (1 cu =
//! one symbol duration, 10^-6 s at the reference symbol rate); floating
//! point enters only in the statistics layer.

// Validation code writes `!(x > 0.0)` instead of `x <= 0.0` on purpose:
// the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod fbc;
pub mod harq;
pub mod metrics;
pub mod par;
pub mod report;
pub mod runner;
pub mod sim;
pub mod svg;
pub mod sweep;

pub use channel::{ChannelState, FadingModel, LinkParams, PathlossModel, Topology, TopologyParams};
pub use config::{load_config, ConfigError, ScenarioConfig};
pub use fbc::CodingConfig;
pub use harq::{DelayBreakdown, HarqConfig, HarqOutcome, HarqVariant};
pub use metrics::QosExponentEstimate;
pub use sim::{AoiTrajectory, PathMode, SimTrace, StatusUpdate};
