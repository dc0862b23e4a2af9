//! Parameter sweeps: derive per-point configurations from a base
//! scenario, run every (value, repetition) pair, and write the sweep
//! directory (`sweep.csv`, `errors.csv`, per-point run directories).
//!
//! Repetition seeds depend only on the base seed and the repetition
//! index — never on the axis value or the path mode — so rep `r` sees
//! the same traffic and fading stream at every sweep point. Comparisons
//! along the axis (or between the integrated and direct modes) are
//! therefore paired, which cancels most of the Monte-Carlo noise.

use crate::config::{ConfigError, ScenarioConfig};
use crate::par;
use crate::runner::{execute_run, write_run_dir, RunArtifacts};
use crate::sim::SimError;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

/// Which scenario parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Per-round sub-blocklength (`coding.sub_blocklength`), channel uses.
    Blocklength,
    /// Retransmission budget (`coding.max_rounds`).
    Rounds,
    /// Number of ground stations on the annulus (`topology.gbs_count`).
    GbsCount,
    /// Transmit power of all links (`radio.*.tx_power_dbm`), dBm.
    TxPower,
    /// Peak-age violation threshold (`thresholds.peak_aoi_violation_cu`).
    AoiThreshold,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 5] = [
        SweepAxis::Blocklength,
        SweepAxis::Rounds,
        SweepAxis::GbsCount,
        SweepAxis::TxPower,
        SweepAxis::AoiThreshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Blocklength => "blocklength",
            SweepAxis::Rounds => "rounds",
            SweepAxis::GbsCount => "gbs_count",
            SweepAxis::TxPower => "tx_power",
            SweepAxis::AoiThreshold => "aoi_threshold",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown sweep axis `{s}` (expected one of blocklength, rounds, gbs_count, tx_power, aoi_threshold)"
                )
            })
    }
}

fn integer_value(axis: SweepAxis, value: f64) -> Result<u64, ConfigError> {
    if !(value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
        return Err(ConfigError::Invalid {
            key: axis.name().into(),
            message: format!("axis value must be a non-negative integer, got {value}"),
        });
    }
    Ok(value as u64)
}

/// Derive the configuration of one sweep point from the base scenario.
/// The seed is left untouched; [`derive_seed`] handles repetitions.
pub fn apply_axis(
    base: &ScenarioConfig,
    axis: SweepAxis,
    value: f64,
) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Blocklength => {
            let v = integer_value(axis, value)?;
            cfg.coding.sub_blocklength = v as u32;
        }
        SweepAxis::Rounds => {
            let v = integer_value(axis, value)?;
            cfg.coding.max_rounds = v as u32;
        }
        SweepAxis::GbsCount => {
            let v = integer_value(axis, value)?;
            cfg.topology.gbs_count = v as u32;
        }
        SweepAxis::TxPower => {
            if !value.is_finite() {
                return Err(ConfigError::Invalid {
                    key: axis.name().into(),
                    message: format!("axis value must be finite, got {value}"),
                });
            }
            cfg.radio.sat_gbs.tx_power_dbm = value;
            cfg.radio.sat_dest.tx_power_dbm = value;
            cfg.radio.terr.tx_power_dbm = value;
        }
        SweepAxis::AoiThreshold => {
            let v = integer_value(axis, value)?;
            cfg.thresholds.peak_aoi_violation_cu = Some(v);
        }
    }
    Ok(cfg)
}

/// Seed of repetition `rep` under base seed `base`: a splitmix64 hash of
/// the pair, deliberately independent of the axis and its value.
pub fn derive_seed(base: u64, rep: u32) -> u64 {
    let mut z = base ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One executed sweep point. Runtime failures are recorded, not fatal:
/// the rest of the sweep still runs and `errors.csv` lists the losses.
#[derive(Debug)]
pub struct SweepOutcome {
    pub axis_value: f64,
    pub rep: u32,
    pub result: Result<RunArtifacts, SimError>,
}

/// Run the full grid `values x reps`. Configuration-level problems
/// (a fractional blocklength, say) abort the sweep; per-point runtime
/// failures land in the outcome list.
pub fn execute_sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    reps: u32,
) -> Result<Vec<SweepOutcome>, ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::Invalid {
            key: axis.name().into(),
            message: "sweep needs at least one axis value".into(),
        });
    }
    if reps == 0 {
        return Err(ConfigError::Invalid {
            key: "reps".into(),
            message: "sweep needs at least one repetition".into(),
        });
    }
    let mut points = Vec::with_capacity(values.len() * reps as usize);
    for &value in values {
        let derived = apply_axis(base, axis, value)?;
        for rep in 0..reps {
            let mut cfg = derived.clone();
            cfg.seed = derive_seed(base.seed, rep);
            points.push((value, rep, cfg));
        }
    }
    Ok(par::map_collect(points, |(axis_value, rep, cfg)| {
        SweepOutcome {
            axis_value,
            rep,
            result: execute_run(&cfg),
        }
    }))
}

// --- file output --------------------------------------------------------

fn summary_get<'a>(artifacts: &'a RunArtifacts, key: &str) -> Option<&'a str> {
    artifacts
        .summary
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn mean_and_ci95(samples: &[u64]) -> (Option<f64>, Option<f64>) {
    if samples.is_empty() {
        return (None, None);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / n;
    if samples.len() < 2 {
        return (Some(mean), None);
    }
    let var = samples
        .iter()
        .map(|&v| {
            let d = v as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    (Some(mean), Some(1.96 * (var / n).sqrt()))
}

fn opt_f64_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `sweep.csv`: one row per successful (value, rep) point.
pub fn sweep_csv(axis: SweepAxis, outcomes: &[SweepOutcome]) -> String {
    let mut out = String::from(
        "axis,axis_value,rep,seed,nhat,rounds,arrivals,deliveries,drops,drop_rate,\
         delay_mean_cu,delay_ci95_cu,peak_aoi_mean_cu,violation_delay_prob,\
         violation_peak_aoi_prob,theta_delay,theta_peak_aoi,theta_queue,\
         mellin_service_s2,theta_error_reference\n",
    );
    for o in outcomes {
        let Ok(artifacts) = &o.result else { continue };
        let trace = &artifacts.trace;
        let (delay_mean, delay_ci) = mean_and_ci95(&trace.delivery_totals_cu());
        let (peak_mean, _) = mean_and_ci95(&artifacts.aoi.peaks);
        let from_summary = |key: &str| summary_get(artifacts, key).unwrap_or("").to_string();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            axis,
            o.axis_value,
            o.rep,
            artifacts.config.seed,
            artifacts.config.coding.sub_blocklength,
            artifacts.config.coding.max_rounds,
            trace.arrivals,
            trace.deliveries.len(),
            trace.dropped_ids.len(),
            trace.drop_rate(),
            opt_f64_str(delay_mean),
            opt_f64_str(delay_ci),
            opt_f64_str(peak_mean),
            from_summary("violation.delay_prob"),
            from_summary("violation.peak_aoi_prob"),
            from_summary("theta.delay"),
            from_summary("theta.peak_aoi"),
            from_summary("theta.queue"),
            from_summary("mellin.service_s2"),
            from_summary("theta.error_reference_per_cu"),
        );
    }
    out
}

/// `errors.csv`: one row per failed point; empty (header only) when the
/// whole sweep succeeded.
pub fn errors_csv(outcomes: &[SweepOutcome]) -> String {
    let mut out = String::from("axis_value,rep,error\n");
    for o in outcomes {
        if let Err(e) = &o.result {
            // Commas in error text would break the row apart.
            let msg = e.to_string().replace(',', ";");
            let _ = writeln!(out, "{},{},{}", o.axis_value, o.rep, msg);
        }
    }
    out
}

/// Write `sweep.csv`, `errors.csv`, and a run directory per successful
/// point under `points/<axis>=<value>/rep<rep>/`.
pub fn write_sweep_dir(
    dir: &Path,
    axis: SweepAxis,
    outcomes: &[SweepOutcome],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sweep.csv"), sweep_csv(axis, outcomes))?;
    std::fs::write(dir.join("errors.csv"), errors_csv(outcomes))?;
    for o in outcomes {
        if let Ok(artifacts) = &o.result {
            let point_dir = dir
                .join("points")
                .join(format!("{axis}={}", o.axis_value))
                .join(format!("rep{}", o.rep));
            write_run_dir(&point_dir, artifacts)?;
        }
    }
    Ok(())
}

// ------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrafficProcess;

    fn small_base(seed: u64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(seed);
        cfg.horizon_cu = 300_000;
        cfg.traffic = TrafficProcess::Periodic { period_cu: 100_000 };
        cfg
    }

    #[test]
    fn axis_names_round_trip() {
        for axis in SweepAxis::ALL {
            assert_eq!(axis.name().parse::<SweepAxis>().unwrap(), axis);
        }
        assert!("bandwidth".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn apply_axis_touches_exactly_its_parameter() {
        let base = small_base(1);
        let cfg = apply_axis(&base, SweepAxis::Blocklength, 450.0).unwrap();
        assert_eq!(cfg.coding.sub_blocklength, 450);
        assert_eq!(cfg.coding.max_rounds, base.coding.max_rounds);

        let cfg = apply_axis(&base, SweepAxis::Rounds, 8.0).unwrap();
        assert_eq!(cfg.coding.max_rounds, 8);

        let cfg = apply_axis(&base, SweepAxis::GbsCount, 12.0).unwrap();
        assert_eq!(cfg.topology.gbs_count, 12);

        let cfg = apply_axis(&base, SweepAxis::TxPower, 37.5).unwrap();
        for link in [&cfg.radio.sat_gbs, &cfg.radio.sat_dest, &cfg.radio.terr] {
            assert_eq!(link.tx_power_dbm, 37.5);
        }

        let cfg = apply_axis(&base, SweepAxis::AoiThreshold, 250_000.0).unwrap();
        assert_eq!(cfg.thresholds.peak_aoi_violation_cu, Some(250_000));
    }

    #[test]
    fn fractional_values_on_integer_axes_are_rejected() {
        let base = small_base(1);
        for axis in [
            SweepAxis::Blocklength,
            SweepAxis::Rounds,
            SweepAxis::GbsCount,
            SweepAxis::AoiThreshold,
        ] {
            assert!(
                apply_axis(&base, axis, 300.5).is_err(),
                "{axis} must reject fractional values"
            );
        }
        assert!(apply_axis(&base, SweepAxis::TxPower, 30.5).is_ok());
    }

    #[test]
    fn repetition_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..100).map(|rep| derive_seed(42, rep)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len(), "collision among rep seeds");
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 0), derive_seed(43, 0));
    }

    #[test]
    fn sweep_points_share_seeds_across_axis_values() {
        let outcomes =
            execute_sweep(&small_base(5), SweepAxis::TxPower, &[30.0, 40.0], 2).unwrap();
        assert_eq!(outcomes.len(), 4);
        let artifacts: Vec<&RunArtifacts> =
            outcomes.iter().map(|o| o.result.as_ref().unwrap()).collect();
        // Same rep => same seed and the same arrival stream, whatever the
        // axis value — the pairing that cancels Monte-Carlo noise.
        assert_eq!(artifacts[0].config.seed, artifacts[2].config.seed);
        assert_eq!(artifacts[1].config.seed, artifacts[3].config.seed);
        assert_ne!(artifacts[0].config.seed, artifacts[1].config.seed);
        assert_eq!(artifacts[0].trace.arrivals, artifacts[2].trace.arrivals);
    }

    #[test]
    fn runtime_failures_are_recorded_without_stopping_the_sweep() {
        // Zero ground stations break the integrated route at run time;
        // the remaining points must still complete.
        let outcomes =
            execute_sweep(&small_base(5), SweepAxis::GbsCount, &[0.0, 4.0], 1).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes[0].result.is_err());
        assert!(outcomes[1].result.is_ok());
        let errors = errors_csv(&outcomes);
        assert_eq!(errors.lines().count(), 2, "{errors}");
        assert!(errors.lines().nth(1).unwrap().starts_with("0,0,"));
        let rows = sweep_csv(SweepAxis::GbsCount, &outcomes);
        assert_eq!(rows.lines().count(), 2, "only the success lands in sweep.csv");
    }

    #[test]
    fn sweep_directory_is_reproducible_and_complete() {
        let run = || execute_sweep(&small_base(9), SweepAxis::Rounds, &[1.0, 2.0], 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
        write_sweep_dir(&d1, SweepAxis::Rounds, &run()).unwrap();
        write_sweep_dir(&d2, SweepAxis::Rounds, &run()).unwrap();
        for name in ["sweep.csv", "errors.csv"] {
            assert_eq!(
                std::fs::read(d1.join(name)).unwrap(),
                std::fs::read(d2.join(name)).unwrap(),
                "{name} differs across reruns"
            );
        }
        for value in ["1", "2"] {
            let point = d1.join("points").join(format!("rounds={value}")).join("rep0");
            assert!(point.join("summary.txt").is_file(), "{point:?} missing");
        }
        let header = std::fs::read_to_string(d1.join("sweep.csv")).unwrap();
        let header = header.lines().next().unwrap();
        assert!(header.starts_with("axis,axis_value,rep,seed,"));
        assert_eq!(header.split(',').count(), 20);
    }
}
