//! Single-scenario execution: run the simulation, derive every reported
//! statistic, and write the run directory (`trace.csv`, `aoi.csv`,
//! `fits.csv`, `summary.txt`).
//!
//! Output files carry no timestamps or absolute paths, so rerunning the
//! same configuration reproduces them byte for byte.

use crate::channel::{self, channel_state, place_gbs};
use crate::config::ScenarioConfig;
use crate::fbc::error_exponent;
use crate::metrics::{
    self, FitWindow, MetricsError, QosExponentEstimate,
};
use crate::par;
use crate::sim::{aoi_trajectory, select_path, simulate, AoiTrajectory, SimError, SimTrace};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::fmt::Write as _;
use std::path::Path;

/// Microseconds per channel use; converts `_cu` quantities to seconds.
const CU_PER_SECOND: f64 = 1e6;

/// One tail fit, kept alongside its failure cause so reports can show
/// *why* an exponent is missing instead of silently dropping the row.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Which tail was fitted: `delay`, `peak_aoi`, or `queue`.
    pub metric: &'static str,
    pub outcome: Result<QosExponentEstimate, String>,
    /// Machine-readable status: `ok`, `flat_tail`, `insufficient_data`,
    /// `no_samples`, or `error`.
    pub status: &'static str,
}

fn fit_report(
    metric: &'static str,
    result: Result<QosExponentEstimate, MetricsError>,
) -> FitReport {
    let (status, outcome) = match result {
        Ok(est) => (
            if est.is_valid() { "ok" } else { "flat_tail" },
            Ok(est),
        ),
        Err(e) => (
            match e {
                MetricsError::EmptySamples => "no_samples",
                MetricsError::InsufficientData { .. } => "insufficient_data",
                _ => "error",
            },
            Err(e.to_string()),
        ),
    };
    FitReport {
        metric,
        outcome,
        status,
    }
}

/// Everything produced by one run, in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub config: ScenarioConfig,
    pub trace: SimTrace,
    pub aoi: AoiTrajectory,
    pub fits: Vec<FitReport>,
    /// `summary.txt` content as ordered key/value pairs.
    pub summary: Vec<(String, String)>,
}

fn mean_u64(values: &[u64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

/// Analytic error-rate exponent of the first hop at unit fading gain and
/// no interference — the fixed reference point that lets runs with
/// different random draws be compared on equal channels.
fn reference_error_exponent(cfg: &ScenarioConfig) -> Result<f64, SimError> {
    // Placement is the first consumer of the run's random stream, so
    // reseeding reproduces exactly the topology the simulation used.
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let topology = place_gbs(&cfg.topology, &mut rng)?;
    let hops = select_path(&topology, cfg.mode, &cfg.radio)?;
    let first = &hops[0];
    let sinr = channel::sinr(&first.link, 1.0, first.pathloss_db, &[]);
    let state = channel_state(sinr)?;
    Ok(error_exponent(
        cfg.coding.sub_blocklength,
        cfg.coding.payload_bits as f64,
        &state,
    ))
}

fn compute_fits(cfg: &ScenarioConfig, trace: &SimTrace, aoi: &AoiTrajectory) -> Vec<FitReport> {
    let window = FitWindow::default();
    let delays = trace.delivery_totals_cu();
    let delay_fit = match &cfg.thresholds.delay_grid_cu {
        Some(grid) => {
            let as_f64: Vec<f64> = delays.iter().map(|&d| d as f64).collect();
            metrics::fit_tail_exponent(&as_f64, Some(grid), &window)
        }
        None => metrics::fit_delay_exponent(&delays, &window),
    };
    let peak_fit = match &cfg.thresholds.aoi_grid_cu {
        Some(grid) => {
            let as_f64: Vec<f64> = aoi.peaks.iter().map(|&p| p as f64).collect();
            metrics::fit_tail_exponent(&as_f64, Some(grid), &window)
        }
        None => {
            if aoi.peaks.is_empty() {
                Err(MetricsError::EmptySamples)
            } else {
                let as_f64: Vec<f64> = aoi.peaks.iter().map(|&p| p as f64).collect();
                metrics::fit_tail_exponent(&as_f64, None, &window)
            }
        }
    };
    let queue_lengths: Vec<u64> = trace.queue_samples.iter().map(|&(_, q)| q).collect();
    let queue_fit = metrics::fit_queue_exponent(&queue_lengths, &window);
    vec![
        fit_report("delay", delay_fit),
        fit_report("peak_aoi", peak_fit),
        fit_report("queue", queue_fit),
    ]
}

fn build_summary(
    cfg: &ScenarioConfig,
    trace: &SimTrace,
    aoi: &AoiTrajectory,
    fits: &[FitReport],
) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (k, v) in cfg.to_key_values() {
        out.push((format!("config.{k}"), v));
    }
    let mut push = |k: &str, v: String| out.push((k.to_string(), v));

    push("run.arrivals", trace.arrivals.to_string());
    push("run.deliveries", trace.deliveries.len().to_string());
    push("run.drops", trace.dropped_ids.len().to_string());
    push("run.drop_rate", trace.drop_rate().to_string());
    push("run.max_queue_len", trace.max_queue_len().to_string());

    let totals = trace.delivery_totals_cu();
    if !totals.is_empty() {
        let mean_delay = mean_u64(&totals);
        push("delay.mean_cu", mean_delay.to_string());
        push("delay.mean_s", (mean_delay / CU_PER_SECOND).to_string());
        push(
            "delay.max_cu",
            totals.iter().max().unwrap().to_string(),
        );
        push(
            "queuing.mean_cu",
            mean_u64(&trace.queuing_times_cu()).to_string(),
        );
        let services = trace.service_times_cu();
        push("service.mean_cu", mean_u64(&services).to_string());

        let avg_age = aoi.time_average_age();
        push("aoi.time_average_cu", avg_age.to_string());
        push("aoi.time_average_s", (avg_age / CU_PER_SECOND).to_string());
        push("aoi.peak_count", aoi.peaks.len().to_string());
        if !aoi.peaks.is_empty() {
            push("aoi.peak_mean_cu", mean_u64(&aoi.peaks).to_string());
            push(
                "aoi.peak_max_cu",
                aoi.peaks.iter().max().unwrap().to_string(),
            );
        }

        // Violation probabilities. Absent configured thresholds, use twice
        // the observed mean — deep enough into the tail to discriminate,
        // shallow enough to keep a nonzero count at moderate run lengths.
        let delay_thr = cfg
            .thresholds
            .delay_violation_cu
            .unwrap_or((2.0 * mean_delay).round() as u64);
        push("violation.delay_threshold_cu", delay_thr.to_string());
        if let Ok(p) = metrics::delay_violation(&totals, delay_thr) {
            push("violation.delay_prob", p.to_string());
        }
        if !aoi.peaks.is_empty() {
            let peak_thr = cfg
                .thresholds
                .peak_aoi_violation_cu
                .unwrap_or((2.0 * mean_u64(&aoi.peaks)).round() as u64);
            push("violation.peak_aoi_threshold_cu", peak_thr.to_string());
            if let Ok(p) =
                metrics::peak_aoi_violation(&aoi.peaks, peak_thr, cfg.coding.sub_blocklength)
            {
                push("violation.peak_aoi_prob", p.to_string());
            }
        }

        let services_f64: Vec<f64> = services.iter().map(|&s| s as f64).collect();
        if let Ok(m) = metrics::mellin(&services_f64, 2.0) {
            push("mellin.service_s2", m.to_string());
        }
    }

    if let Ok(theta) = reference_error_exponent(cfg) {
        push("theta.error_reference_per_cu", theta.to_string());
    }
    for fit in fits {
        push(&format!("theta.{}.status", fit.metric), fit.status.to_string());
        if let Ok(est) = &fit.outcome {
            push(&format!("theta.{}", fit.metric), est.theta.to_string());
            push(
                &format!("theta.{}.r_squared", fit.metric),
                est.r_squared.to_string(),
            );
            push(
                &format!("theta.{}.std_error", fit.metric),
                est.std_error.to_string(),
            );
        }
    }
    out
}

/// Simulate one scenario and derive all reported statistics.
pub fn execute_run(cfg: &ScenarioConfig) -> Result<RunArtifacts, SimError> {
    let trace = simulate(cfg)?;
    let aoi = aoi_trajectory(&trace);
    let fits = compute_fits(cfg, &trace, &aoi);
    let summary = build_summary(cfg, &trace, &aoi, &fits);
    Ok(RunArtifacts {
        config: cfg.clone(),
        trace,
        aoi,
        fits,
        summary,
    })
}

/// Execute many scenarios, in parallel when the `parallel` feature is on.
pub fn run_batch(cfgs: Vec<ScenarioConfig>) -> Vec<Result<RunArtifacts, SimError>> {
    par::map_collect(cfgs, |cfg| execute_run(&cfg))
}

/// Always-sequential twin of [`run_batch`], for benchmarking and as a
/// reference the parallel path must match.
pub fn run_batch_sequential(cfgs: Vec<ScenarioConfig>) -> Vec<Result<RunArtifacts, SimError>> {
    par::map_collect_sequential(cfgs, |cfg| execute_run(&cfg))
}

// --- file output --------------------------------------------------------

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `trace.csv`: one row per delivered update, in delivery order.
pub fn trace_csv(artifacts: &RunArtifacts) -> String {
    let mut out = String::from(
        "id,generated_at_cu,delivered_at_cu,rounds,l0,queuing_cu,transmission_cu,processing_cu,propagation_cu,total_cu,peak_aoi_cu\n",
    );
    for (j, d) in artifacts.trace.deliveries.iter().enumerate() {
        // The first delivery closes no age peak; later ones close the
        // peak that began at the previous delivery's generation.
        let peak = if j == 0 {
            String::new()
        } else {
            artifacts.aoi.peaks[j - 1].to_string()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            d.id,
            d.generated_at_cu,
            d.delivered_at_cu,
            d.rounds_total,
            opt_str(d.l0),
            d.delay.queuing_cu,
            d.delay.transmission_cu,
            d.delay.processing_cu,
            d.delay.propagation_cu,
            d.delay.total_cu,
            peak,
        );
    }
    out
}

/// `aoi.csv`: the age sawtooth as breakpoints.
pub fn aoi_csv(artifacts: &RunArtifacts) -> String {
    let mut out = String::from("time_cu,age_cu\n");
    for &(t, age) in &artifacts.aoi.breakpoints {
        let _ = writeln!(out, "{t},{age}");
    }
    out
}

/// `fits.csv`: one row per fitted tail, failures included.
pub fn fits_csv(artifacts: &RunArtifacts) -> String {
    let mut out = String::from(
        "metric,status,theta,window_lo,window_hi,r_squared,std_error,n_points,n_samples\n",
    );
    for fit in &artifacts.fits {
        match &fit.outcome {
            Ok(est) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    fit.metric,
                    fit.status,
                    est.theta,
                    est.fit_window.0,
                    est.fit_window.1,
                    est.r_squared,
                    est.std_error,
                    est.n_points,
                    est.n_samples,
                );
            }
            Err(_) => {
                let _ = writeln!(out, "{},{},,,,,,,", fit.metric, fit.status);
            }
        }
    }
    out
}

/// `summary.txt` in the same `key = value` syntax as scenario files.
pub fn summary_text(artifacts: &RunArtifacts) -> String {
    let mut out = String::new();
    for (k, v) in &artifacts.summary {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// Write the four artifact files into `dir`, creating it if needed.
pub fn write_run_dir(dir: &Path, artifacts: &RunArtifacts) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trace.csv"), trace_csv(artifacts))?;
    std::fs::write(dir.join("aoi.csv"), aoi_csv(artifacts))?;
    std::fs::write(dir.join("fits.csv"), fits_csv(artifacts))?;
    std::fs::write(dir.join("summary.txt"), summary_text(artifacts))?;
    Ok(())
}

// ------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrafficProcess;

    fn small_cfg(seed: u64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(seed);
        cfg.horizon_cu = 400_000;
        cfg.traffic = TrafficProcess::Periodic { period_cu: 100_000 };
        cfg
    }

    fn summary_value<'a>(artifacts: &'a RunArtifacts, key: &str) -> &'a str {
        artifacts
            .summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("summary key `{key}` missing"))
    }

    #[test]
    fn rerunning_a_config_reproduces_identical_artifacts() {
        let a = execute_run(&small_cfg(3)).unwrap();
        let b = execute_run(&small_cfg(3)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.summary, b.summary);
        assert_eq!(trace_csv(&a), trace_csv(&b));
    }

    #[test]
    fn summary_statistics_agree_with_the_trace() {
        let artifacts = execute_run(&small_cfg(5)).unwrap();
        let trace = &artifacts.trace;
        assert_eq!(
            summary_value(&artifacts, "run.arrivals"),
            trace.arrivals.to_string()
        );
        assert_eq!(
            summary_value(&artifacts, "run.deliveries"),
            trace.deliveries.len().to_string()
        );
        let mean: f64 = summary_value(&artifacts, "delay.mean_cu").parse().unwrap();
        let expected = trace
            .delivery_totals_cu()
            .iter()
            .map(|&d| d as f64)
            .sum::<f64>()
            / trace.deliveries.len() as f64;
        assert!((mean - expected).abs() < 1e-9);
        // Seconds are microsecond channel uses scaled down.
        let mean_s: f64 = summary_value(&artifacts, "delay.mean_s").parse().unwrap();
        assert!((mean_s - mean / 1e6).abs() < 1e-15);
    }

    #[test]
    fn summary_echoes_the_resolved_config() {
        let artifacts = execute_run(&small_cfg(5)).unwrap();
        assert_eq!(summary_value(&artifacts, "config.seed"), "5");
        assert_eq!(summary_value(&artifacts, "config.mode"), "stin");
        assert_eq!(
            summary_value(&artifacts, "config.coding.sub_blocklength"),
            "300"
        );
    }

    #[test]
    fn reference_error_exponent_is_positive_and_finite() {
        let artifacts = execute_run(&small_cfg(7)).unwrap();
        let theta: f64 = summary_value(&artifacts, "theta.error_reference_per_cu")
            .parse()
            .unwrap();
        assert!(theta.is_finite() && theta > 0.0, "theta = {theta}");
    }

    #[test]
    fn trace_csv_shape_matches_the_deliveries() {
        let artifacts = execute_run(&small_cfg(11)).unwrap();
        let csv = trace_csv(&artifacts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), artifacts.trace.deliveries.len() + 1);
        assert!(lines[0].starts_with("id,generated_at_cu"));
        assert_eq!(lines[0].split(',').count(), 11);
        // First delivery has no age peak; every later row carries one.
        assert!(lines[1].ends_with(','), "row 1 must have an empty peak");
        for row in &lines[2..] {
            assert_eq!(row.split(',').count(), 11);
            let peak: u64 = row.rsplit(',').next().unwrap().parse().unwrap();
            assert!(peak > 0);
        }
        // The fast variant reports its early-decode round on every row.
        for row in &lines[1..] {
            let l0 = row.split(',').nth(4).unwrap();
            assert!(!l0.is_empty(), "fast variant must report l0: {row}");
        }
    }

    #[test]
    fn short_runs_report_fit_failures_instead_of_exponents() {
        let artifacts = execute_run(&small_cfg(13)).unwrap();
        let metrics: Vec<&str> = artifacts.fits.iter().map(|f| f.metric).collect();
        assert_eq!(metrics, ["delay", "peak_aoi", "queue"]);
        // Four deliveries cannot populate a tail window; the empty queue
        // has no backlog tail at all.
        for fit in &artifacts.fits {
            assert_ne!(fit.status, "ok", "{}: {:?}", fit.metric, fit.outcome);
        }
        let csv = fits_csv(&artifacts);
        assert_eq!(csv.lines().count(), 4);
        for row in csv.lines().skip(1) {
            assert_eq!(row.split(',').count(), 9);
        }
    }

    #[test]
    fn run_directories_are_byte_identical_across_reruns() {
        let artifacts = execute_run(&small_cfg(17)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (d1, d2) = (dir.path().join("a"), dir.path().join("b"));
        write_run_dir(&d1, &artifacts).unwrap();
        write_run_dir(&d2, &execute_run(&small_cfg(17)).unwrap()).unwrap();
        for name in ["trace.csv", "aoi.csv", "fits.csv", "summary.txt"] {
            let b1 = std::fs::read(d1.join(name)).unwrap();
            let b2 = std::fs::read(d2.join(name)).unwrap();
            assert_eq!(b1, b2, "{name} differs across reruns");
            assert!(!b1.is_empty(), "{name} is empty");
        }
    }

    #[test]
    fn parallel_and_sequential_batches_agree() {
        let cfgs: Vec<ScenarioConfig> = (0..4).map(small_cfg).collect();
        let par: Vec<_> = run_batch(cfgs.clone())
            .into_iter()
            .map(|r| r.unwrap().summary)
            .collect();
        let seq: Vec<_> = run_batch_sequential(cfgs)
            .into_iter()
            .map(|r| r.unwrap().summary)
            .collect();
        assert_eq!(par, seq);
    }
}
