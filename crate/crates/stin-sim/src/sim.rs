//! Discrete-event core: status-update generation, path selection over the
//! placed topology, the FCFS single-server queueing loop, and
//! age-of-information trajectories.
//!
//! All event times are integer channel uses. The queue is non-preemptive
//! with an infinite buffer: the source transmits updates strictly in
//! generation order, and the server stays busy with one update until it is
//! delivered at the destination (or dropped after a hop exhausts its round
//! budget). Updates present at the horizon still drain; the horizon only
//! stops generation.

use crate::channel::{
    channel_state, draw_fading, pathloss_db, place_gbs, propagation_delay_cu, sinr, ChannelState,
    ChannelError, LinkParams, Topology,
};
use crate::config::{RadioConfig, ScenarioConfig};
use crate::harq::{run_harq, DelayBreakdown};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Geometric};
use rand::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid traffic process: {0}")]
    InvalidTraffic(String),
    #[error("integrated mode needs at least one ground station")]
    NoGroundStations,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

// --- traffic ------------------------------------------------------------

/// Status-update generation process at the source.
#[derive(Debug, Clone, PartialEq)]
pub enum TrafficProcess {
    /// One update every `period_cu` channel uses, starting at t = 0.
    Periodic { period_cu: u64 },
    /// Poisson arrivals with the given rate (updates per channel use);
    /// continuous arrival epochs are floored to integer channel uses.
    Poisson { rate_per_cu: f64 },
    /// An independent coin per channel use.
    Bernoulli { prob_per_cu: f64 },
}

impl TrafficProcess {
    pub fn validate(&self) -> Result<(), SimError> {
        match *self {
            TrafficProcess::Periodic { period_cu } => {
                if period_cu == 0 {
                    return Err(SimError::InvalidTraffic(
                        "periodic traffic needs period_cu >= 1".into(),
                    ));
                }
            }
            TrafficProcess::Poisson { rate_per_cu } => {
                if !(rate_per_cu > 0.0 && rate_per_cu.is_finite()) {
                    return Err(SimError::InvalidTraffic(format!(
                        "Poisson rate must be positive and finite, got {rate_per_cu}"
                    )));
                }
            }
            TrafficProcess::Bernoulli { prob_per_cu } => {
                if !(0.0..=1.0).contains(&prob_per_cu) {
                    return Err(SimError::InvalidTraffic(format!(
                        "Bernoulli probability must lie in [0, 1], got {prob_per_cu}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One generated status update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusUpdate {
    pub id: u64,
    pub generated_at_cu: u64,
    pub payload_bits: u32,
}

/// Generate all update epochs in `[0, horizon_cu)`, in time order with
/// sequential ids.
pub fn generate_arrivals<R: Rng + ?Sized>(
    process: &TrafficProcess,
    horizon_cu: u64,
    payload_bits: u32,
    rng: &mut R,
) -> Result<Vec<StatusUpdate>, SimError> {
    process.validate()?;
    let mut out = Vec::new();
    let push = |t: u64, out: &mut Vec<StatusUpdate>| {
        out.push(StatusUpdate {
            id: out.len() as u64,
            generated_at_cu: t,
            payload_bits,
        });
    };
    match *process {
        TrafficProcess::Periodic { period_cu } => {
            let mut t = 0u64;
            while t < horizon_cu {
                push(t, &mut out);
                t += period_cu;
            }
        }
        TrafficProcess::Poisson { rate_per_cu } => {
            let exp = Exp::new(rate_per_cu).expect("validated rate");
            let mut t = 0.0f64;
            loop {
                t += exp.sample(rng);
                if t >= horizon_cu as f64 {
                    break;
                }
                push(t as u64, &mut out);
            }
        }
        TrafficProcess::Bernoulli { prob_per_cu } => {
            if prob_per_cu > 0.0 {
                // Skip over failures geometrically instead of flipping one
                // coin per channel use.
                let geo = Geometric::new(prob_per_cu).expect("validated probability");
                let mut t: u64 = 0;
                loop {
                    let gap = geo.sample(rng);
                    t = match t.checked_add(gap) {
                        Some(v) if v < horizon_cu => v,
                        _ => break,
                    };
                    push(t, &mut out);
                    t += 1;
                }
            }
        }
    }
    Ok(out)
}

// --- path selection -----------------------------------------------------

/// Which delivery route the source uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// Integrated route: satellite to the nearest ground station, then a
    /// terrestrial hop to the destination.
    Stin,
    /// Pure-satellite route: one direct satellite-to-destination hop.
    Psn,
}

/// Which physical segment a hop covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopLabel {
    SatToGbs,
    GbsToDestination,
    SatToDestination,
}

/// One hop of the selected route, with everything needed to draw per-round
/// channel states: resolved distance, precomputed pathloss, and the
/// received power of each potential co-channel interferer at the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct HopSpec {
    pub label: HopLabel,
    pub link: LinkParams,
    pub distance_km: f64,
    pub pathloss_db: f64,
    pub one_way_propagation_cu: u64,
    /// Received power (dBm) of each interferer, when active.
    pub interferers_dbm: Vec<f64>,
    /// Probability that an interferer transmits during a given round.
    pub interference_activity: f64,
}

impl HopSpec {
    /// Draw one round's channel state: a fading gain, then one activity
    /// coin per potential interferer (in listed order). The draw order is
    /// fixed so trajectories are reproducible from the seed.
    pub fn draw_state<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelState {
        let gain = draw_fading(&self.link.fading, rng);
        let mut active: Vec<f64> = Vec::new();
        if self.interference_activity > 0.0 {
            for &p_dbm in &self.interferers_dbm {
                if rng.gen::<f64>() < self.interference_activity {
                    active.push(p_dbm);
                }
            }
        }
        let s = sinr(&self.link, gain, self.pathloss_db, &active);
        channel_state(s).expect("sinr of non-negative powers is non-negative")
    }
}

fn build_hop(
    label: HopLabel,
    link: &LinkParams,
    distance_km: f64,
    interferers_dbm: Vec<f64>,
    interference_activity: f64,
) -> Result<HopSpec, SimError> {
    let pl = pathloss_db(distance_km, link.carrier_ghz, &link.pathloss)?;
    Ok(HopSpec {
        label,
        link: link.clone(),
        distance_km,
        pathloss_db: pl,
        one_way_propagation_cu: propagation_delay_cu(distance_km),
        interferers_dbm,
        interference_activity,
    })
}

/// Received interferer power at the destination from every ground station
/// except `exclude`, assuming interferers use the terrestrial link's
/// transmit parameters.
fn interferers_at_destination(
    topology: &Topology,
    terr: &LinkParams,
    exclude: Option<usize>,
) -> Result<Vec<f64>, SimError> {
    let mut out = Vec::new();
    for i in 0..topology.gbs_count() {
        if Some(i) == exclude {
            continue;
        }
        let d = topology.gbs_to_destination_km(i);
        let pl = pathloss_db(d, terr.carrier_ghz, &terr.pathloss)?;
        out.push(terr.tx_power_dbm + terr.antenna_gain_dbi - pl);
    }
    Ok(out)
}

/// Resolve the ordered hop list for `mode` over a placed topology.
///
/// The integrated route relays through the ground station nearest the
/// destination (ties toward the lower index) and fails when no stations
/// were placed. Satellite link distances default to the slant range
/// implied by the geometry unless the radio configuration overrides them.
pub fn select_path(
    topology: &Topology,
    mode: PathMode,
    radio: &RadioConfig,
) -> Result<Vec<HopSpec>, SimError> {
    match mode {
        PathMode::Psn => {
            // Destination sits directly below the satellite.
            let dist = radio
                .sat_dest_distance_km
                .unwrap_or(topology.altitude_km);
            let interferers =
                interferers_at_destination(topology, &radio.terr, None)?;
            Ok(vec![build_hop(
                HopLabel::SatToDestination,
                &radio.sat_dest,
                dist,
                interferers,
                radio.interference_activity,
            )?])
        }
        PathMode::Stin => {
            let serving = topology.nearest_gbs().ok_or(SimError::NoGroundStations)?;
            let ground = topology.gbs_to_destination_km(serving);
            let slant = radio
                .sat_gbs_distance_km
                .unwrap_or_else(|| (topology.altitude_km.powi(2) + ground.powi(2)).sqrt());
            let sat_hop = build_hop(HopLabel::SatToGbs, &radio.sat_gbs, slant, Vec::new(), 0.0)?;
            let interferers =
                interferers_at_destination(topology, &radio.terr, Some(serving))?;
            let terr_hop = build_hop(
                HopLabel::GbsToDestination,
                &radio.terr,
                ground,
                interferers,
                radio.interference_activity,
            )?;
            Ok(vec![sat_hop, terr_hop])
        }
    }
}

// --- simulation ---------------------------------------------------------

/// One delivered update, with its delay split and per-hop round usage
/// flattened for reporting: `rounds_total` sums rounds across hops, `l0`
/// is the fast-variant prediction on the first (satellite) hop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub id: u64,
    pub generated_at_cu: u64,
    pub delivered_at_cu: u64,
    pub rounds_total: u32,
    pub l0: Option<u32>,
    pub delay: DelayBreakdown,
}

impl Delivery {
    /// Delay excluding the queue wait: transmission + processing +
    /// propagation.
    pub fn service_cu(&self) -> u64 {
        self.delay.total_cu - self.delay.queuing_cu
    }
}

/// Complete result of one simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub horizon_cu: u64,
    pub arrivals: u64,
    pub deliveries: Vec<Delivery>,
    /// Ids of updates whose round budget ran out on some hop.
    pub dropped_ids: Vec<u64>,
    /// Number of updates waiting (excluding the one in service), sampled
    /// at each arrival epoch.
    pub queue_samples: Vec<(u64, u64)>,
}

impl SimTrace {
    pub fn drop_rate(&self) -> f64 {
        if self.arrivals == 0 {
            0.0
        } else {
            self.dropped_ids.len() as f64 / self.arrivals as f64
        }
    }

    pub fn delivery_totals_cu(&self) -> Vec<u64> {
        self.deliveries.iter().map(|d| d.delay.total_cu).collect()
    }

    pub fn service_times_cu(&self) -> Vec<u64> {
        self.deliveries.iter().map(|d| d.service_cu()).collect()
    }

    pub fn queuing_times_cu(&self) -> Vec<u64> {
        self.deliveries.iter().map(|d| d.delay.queuing_cu).collect()
    }

    pub fn max_queue_len(&self) -> u64 {
        self.queue_samples.iter().map(|&(_, q)| q).max().unwrap_or(0)
    }
}

/// Run one scenario end to end: place the topology, resolve the route,
/// generate arrivals, and push every update through the FCFS loop.
///
/// All randomness flows from one stream seeded with `cfg.seed`, consumed
/// in a fixed order (placement, arrivals, then per-update per-round
/// draws), so equal configurations reproduce equal traces bit for bit.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimTrace, SimError> {
    cfg.validate_semantics()
        .map_err(|e| SimError::InvalidScenario(e.to_string()))?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let topology = place_gbs(&cfg.topology, &mut rng)?;
    let hops = select_path(&topology, cfg.mode, &cfg.radio)?;
    let arrivals = generate_arrivals(
        &cfg.traffic,
        cfg.horizon_cu,
        cfg.coding.payload_bits,
        &mut rng,
    )?;
    let harq_cfg = cfg.harq_config();

    let mut deliveries = Vec::with_capacity(arrivals.len());
    let mut dropped_ids = Vec::new();
    let mut queue_samples = Vec::with_capacity(arrivals.len());
    // Service start of each already-scheduled update, in id order;
    // non-decreasing because the queue is FCFS.
    let mut service_starts: Vec<u64> = Vec::with_capacity(arrivals.len());
    let mut server_free_at = 0u64;

    for update in &arrivals {
        // Queue length seen on arrival: scheduled updates whose service
        // has not started yet (the one in service does not count).
        let started = service_starts.partition_point(|&s| s <= update.generated_at_cu);
        queue_samples.push((
            update.generated_at_cu,
            (service_starts.len() - started) as u64,
        ));

        let start = server_free_at.max(update.generated_at_cu);
        service_starts.push(start);

        let mut clock = start;
        let mut link_delay = DelayBreakdown::default();
        let mut rounds_total = 0u32;
        let mut first_hop_l0 = None;
        let mut delivered = true;
        for (h, hop) in hops.iter().enumerate() {
            let out = run_harq(
                |r: &mut ChaCha12Rng| hop.draw_state(r),
                &harq_cfg,
                hop.one_way_propagation_cu,
                &mut rng,
            );
            clock += out.delay.total_cu;
            link_delay = link_delay.plus(&out.delay);
            rounds_total += out.rounds_used;
            if h == 0 {
                first_hop_l0 = out.l0;
            }
            if !out.success {
                delivered = false;
                break;
            }
        }
        server_free_at = clock;

        if delivered {
            let delay = link_delay.with_queuing(start - update.generated_at_cu);
            debug_assert_eq!(update.generated_at_cu + delay.total_cu, clock);
            deliveries.push(Delivery {
                id: update.id,
                generated_at_cu: update.generated_at_cu,
                delivered_at_cu: clock,
                rounds_total,
                l0: first_hop_l0,
                delay,
            });
        } else {
            dropped_ids.push(update.id);
        }
    }

    Ok(SimTrace {
        horizon_cu: cfg.horizon_cu,
        arrivals: arrivals.len() as u64,
        deliveries,
        dropped_ids,
        queue_samples,
    })
}

// --- age of information -------------------------------------------------

/// Piecewise-linear age process and its per-delivery peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiTrajectory {
    /// `(time, age)` breakpoints; resets appear as two points at the same
    /// time (pre-reset apex, post-reset value). Age grows with slope one
    /// between resets.
    pub breakpoints: Vec<(u64, u64)>,
    /// Age just before each reset, one sample per delivery after the
    /// first.
    pub peaks: Vec<u64>,
}

impl AoiTrajectory {
    /// Time-average age over the trajectory's span, via exact trapezoids
    /// (every non-vertical segment has slope one).
    pub fn time_average_age(&self) -> f64 {
        let mut area = 0.0f64;
        for w in self.breakpoints.windows(2) {
            let (t0, a0) = w[0];
            let (t1, a1) = w[1];
            if t1 > t0 {
                area += (a0 + a1) as f64 * 0.5 * (t1 - t0) as f64;
            }
        }
        let span = self.breakpoints.last().unwrap().0 - self.breakpoints[0].0;
        if span == 0 {
            0.0
        } else {
            area / span as f64
        }
    }
}

/// Build the age trajectory of a trace. The destination is taken as fresh
/// at t = 0 (age 0); each delivery resets the age to the delivered
/// update's own age. Drops never reset anything — they only show up as
/// longer inter-reset ramps. The final segment extends to the horizon or
/// the last delivery, whichever is later.
pub fn aoi_trajectory(trace: &SimTrace) -> AoiTrajectory {
    let mut breakpoints = vec![(0u64, 0u64)];
    let mut peaks = Vec::new();
    let mut last_gen = 0u64;
    let mut first = true;
    for d in &trace.deliveries {
        let t = d.delivered_at_cu;
        breakpoints.push((t, t - last_gen));
        breakpoints.push((t, t - d.generated_at_cu));
        if !first {
            peaks.push(t - last_gen);
        }
        first = false;
        last_gen = d.generated_at_cu;
    }
    let last_t = breakpoints.last().unwrap().0;
    let end = trace.horizon_cu.max(last_t);
    if end > last_t {
        breakpoints.push((end, end - last_gen));
    }
    AoiTrajectory { breakpoints, peaks }
}

// ------------------------------------------------------------------------
