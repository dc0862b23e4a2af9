//! End-to-end tests of the `stin-sim` binary: exit codes, output
//! determinism, artifact schemas, and the documented error taxonomy
//! (0 success, 1 input problem, 2 runtime failure).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stin-sim"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary must spawn");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code_of(cmd: &mut Command) -> (i32, String) {
    let out = cmd.output().expect("binary must spawn");
    (
        out.status.code().expect("no exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

const SMALL_SCENARIO: &str = "
    # twenty periodic updates through the default integrated route
    seed = 7
    horizon_cu = 1_000_000
    traffic.process = periodic
    traffic.period_cu = 50_000
";

fn write_scenario(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.txt");
    std::fs::write(&path, text).unwrap();
    path
}

// --- run ----------------------------------------------------------------

#[test]
fn run_writes_artifacts_and_reruns_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL_SCENARIO);
    let (out_a, out_b) = (dir.path().join("a"), dir.path().join("b"));

    let first = run_ok(bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_a));
    let second = run_ok(bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out_b));

    // Stdout is the summary and must not depend on the output path.
    assert_eq!(first.stdout, second.stdout);
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.contains("config.seed = 7"), "{stdout}");
    assert!(stdout.contains("run.arrivals = 20"), "{stdout}");

    for name in ["trace.csv", "aoi.csv", "fits.csv", "summary.txt"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // The summary file is exactly what was printed.
    assert_eq!(
        std::fs::read_to_string(out_a.join("summary.txt")).unwrap(),
        stdout
    );
}

#[test]
fn run_summary_is_consistent_with_the_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL_SCENARIO);
    let out = dir.path().join("out");
    run_ok(bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out));

    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let rows: Vec<&str> = trace.lines().skip(1).collect();
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    let get = |key: &str| {
        summary
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key} = ")))
            .unwrap_or_else(|| panic!("{key} missing from summary"))
            .to_string()
    };
    assert_eq!(get("run.deliveries"), rows.len().to_string());

    // Column 9 is total_cu; its mean must equal the summary's.
    let totals: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(9).unwrap().parse::<f64>().unwrap())
        .collect();
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    let reported: f64 = get("delay.mean_cu").parse().unwrap();
    assert!((mean - reported).abs() < 1e-9, "{mean} vs {reported}");
}

#[test]
fn out_dir_can_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL_SCENARIO);
    let out = dir.path().join("from_env");
    run_ok(bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .env("STIN_SIM_OUT", &out));
    assert!(out.join("summary.txt").is_file());
}

// --- error taxonomy -----------------------------------------------------

#[test]
fn config_problems_exit_1_with_a_named_cause() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    // Unknown key, with its line number.
    let bad = write_scenario(dir.path(), "seed = 1\ntraffic.process = poisson\ntraffic.rate_per_cu = 1e-4\ncoding.paylod_bits = 9\n");
    let (code, stderr) = code_of(bin().args(["run", "--config"]).arg(&bad).arg("--out").arg(&out));
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("unknown key"), "{stderr}");
    assert!(stderr.contains("line 4"), "{stderr}");

    // Missing file.
    let (code, _) = code_of(
        bin().args(["run", "--config", "/nonexistent/nope.txt", "--out"]).arg(&out),
    );
    assert_eq!(code, 1);

    // Bad axis name on the sweep subcommand.
    let good = write_scenario(dir.path(), SMALL_SCENARIO);
    let (code, stderr) = code_of(
        bin()
            .args(["sweep", "--config"])
            .arg(&good)
            .args(["--axis", "bandwidth", "--values", "1,2", "--out"])
            .arg(&out),
    );
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("bandwidth"), "{stderr}");
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL_SCENARIO);
    // A path through an existing *file* cannot be created as a directory.
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let (code, stderr) = code_of(bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn tx_power_warnings_go_to_stderr_not_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(
        dir.path(),
        "seed = 1\nhorizon_cu = 300_000\ntraffic.process = periodic\n\
         traffic.period_cu = 100_000\nradio.terr.tx_power_dbm = 55\n",
    );
    let out = dir.path().join("out");
    let result = run_ok(bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out));
    let stderr = String::from_utf8(result.stderr).unwrap();
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stderr.contains("warning:"), "{stderr}");
    assert!(stderr.contains("55"), "{stderr}");
    assert!(!stdout.contains("warning"), "{stdout}");
}

// --- sweep + report -----------------------------------------------------

#[test]
fn sweep_then_report_produces_figures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), SMALL_SCENARIO);
    let out = dir.path().join("sweep");

    let result = run_ok(
        bin()
            .args(["sweep", "--config"])
            .arg(&cfg)
            .args(["--axis", "rounds", "--values", "1,2", "--reps", "2", "--out"])
            .arg(&out),
    );
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert_eq!(stdout, "points = 4\nfailures = 0\n");

    let sweep_csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep_csv.lines().count(), 5, "{sweep_csv}");
    assert!(out.join("points/rounds=1/rep0/trace.csv").is_file());
    assert!(out.join("points/rounds=2/rep1/summary.txt").is_file());
    let errors = std::fs::read_to_string(out.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 1, "no failures expected: {errors}");

    let result = run_ok(bin().args(["report", "--in"]).arg(&out).args(["--figure", "fig2"]));
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert_eq!(stdout, "wrote plot_fig2.csv\nwrote plot_fig2.svg\n");
    assert!(out.join("plot_fig2.csv").is_file());
    let svg = std::fs::read_to_string(out.join("plot_fig2.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
}

#[test]
fn report_names_a_missing_column_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sweep.csv"), "a,b\n1,2\n").unwrap();
    let (code, stderr) = code_of(
        bin()
            .args(["report", "--in"])
            .arg(dir.path())
            .args(["--figure", "fig4"]),
    );
    assert_eq!(code, 1, "{stderr}");
    assert!(stderr.contains("axis_value"), "{stderr}");
}

// --- fit ----------------------------------------------------------------

#[test]
fn fit_recovers_a_known_exponential_tail() {
    use rand::{Rng, SeedableRng};
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
    let theta = 2e-3f64;
    let mut csv = String::from("delay\n");
    for _ in 0..40_000 {
        let u: f64 = rng.gen::<f64>();
        csv.push_str(&format!("{}\n", -u.ln() / theta));
    }
    std::fs::write(&path, csv).unwrap();

    let result = run_ok(
        bin().args(["fit", "--samples"]).arg(&path).args(["--column", "delay"]),
    );
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("status = ok"), "{stdout}");
    let fitted: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("theta = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (fitted - theta).abs() / theta < 0.1,
        "fitted {fitted} vs true {theta}"
    );

    // Wrong column name: input problem, exit 1, named.
    let (code, stderr) = code_of(
        bin().args(["fit", "--samples"]).arg(&path).args(["--column", "latency"]),
    );
    assert_eq!(code, 1);
    assert!(stderr.contains("latency"), "{stderr}");
}

#[test]
fn fit_reports_insufficient_data_without_failing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    std::fs::write(&path, "v\n1\n2\n3\n").unwrap();
    let result = run_ok(bin().args(["fit", "--samples"]).arg(&path).args(["--column", "v"]));
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("status = insufficient_data"), "{stdout}");
}
