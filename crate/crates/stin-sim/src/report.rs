//! Figure generation from sweep output: read `sweep.csv`, aggregate over
//! repetitions, and write a figure-oriented `plot_<figure>.csv` plus a
//! rendered `plot_<figure>.svg`.
//!
//! The reader handles exactly the CSV dialect this crate writes: comma
//! separated, no quoting, first line is the header. Schema problems are
//! reported by column name, not by silent misalignment.

use crate::svg::{line_chart, Series};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{figure}: input is missing required column `{column}`")]
    MissingColumn { figure: Figure, column: String },
    #[error("{path}: no column named `{column}`")]
    BadColumn { path: String, column: String },
    #[error("line {line}, column `{column}`: expected a number, got `{value}`")]
    BadNumber {
        line: usize,
        column: String,
        value: String,
    },
    #[error("{figure}: no usable data rows in the input")]
    NoRows { figure: Figure },
    #[error("input has no header line")]
    EmptyInput,
}

/// The figures the report subcommand can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Mean end-to-end delay vs the sweep axis.
    Fig2,
    /// Peak-age violation probability (and mean peak age) vs the axis.
    Fig4,
    /// Analytic error-rate exponent vs sub-blocklength, one series per
    /// retransmission budget.
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            other => Err(format!(
                "unknown figure `{other}` (expected fig2, fig4, or fig5)"
            )),
        }
    }
}

// --- CSV reading --------------------------------------------------------

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn parse(text: &str) -> Result<Table, ReportError> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or(ReportError::EmptyInput)?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let rows = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect())
            .collect();
        Ok(Table { header, rows })
    }

    fn column(&self, figure: Figure, name: &str) -> Result<usize, ReportError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ReportError::MissingColumn {
                figure,
                column: name.to_string(),
            })
    }

    /// Cell (row, col) as f64; `None` for an empty cell.
    fn number(
        &self,
        row: usize,
        col: usize,
        name: &str,
    ) -> Result<Option<f64>, ReportError> {
        // A short row reads as empty cells rather than a panic.
        let Some(cell) = self.rows[row].get(col) else {
            return Ok(None);
        };
        if cell.is_empty() {
            return Ok(None);
        }
        cell.parse::<f64>()
            .map(Some)
            .map_err(|_| ReportError::BadNumber {
                // +2: one for the header, one for 1-based numbering.
                line: row + 2,
                column: name.to_string(),
                value: cell.clone(),
            })
    }
}

// --- aggregation --------------------------------------------------------

/// Mean and 1.96-sigma half-width over repetitions.
fn aggregate(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(1.96 * (var / n).sqrt()))
}

/// Group rows by a key, preserving numeric order of the key.
fn group_by_key(pairs: Vec<(f64, f64)>) -> Vec<(f64, Vec<f64>)> {
    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for (key, value) in pairs {
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => vs.push(value),
            None => groups.push((key, vec![value])),
        }
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

struct FigureOutput {
    csv: String,
    svg: String,
}

fn fig2_output(table: &Table) -> Result<FigureOutput, ReportError> {
    let figure = Figure::Fig2;
    let x_col = table.column(figure, "axis_value")?;
    let y_col = table.column(figure, "delay_mean_cu")?;
    let mut pairs = Vec::new();
    for row in 0..table.rows.len() {
        let x = table.number(row, x_col, "axis_value")?;
        let y = table.number(row, y_col, "delay_mean_cu")?;
        if let (Some(x), Some(y)) = (x, y) {
            pairs.push((x, y));
        }
    }
    if pairs.is_empty() {
        return Err(ReportError::NoRows { figure });
    }
    let mut csv = String::from("axis_value,delay_mean_cu,ci95_cu,n_reps\n");
    let mut points = Vec::new();
    for (key, values) in group_by_key(pairs) {
        let (mean, ci) = aggregate(&values);
        csv.push_str(&format!("{key},{mean},{},{}\n", opt_str(ci), values.len()));
        points.push((key, mean));
    }
    let svg = line_chart(
        "Mean delay vs sweep axis",
        "axis value",
        "mean delay (cu)",
        &[Series {
            label: "mean delay".into(),
            points,
        }],
    );
    Ok(FigureOutput { csv, svg })
}

fn fig4_output(table: &Table) -> Result<FigureOutput, ReportError> {
    let figure = Figure::Fig4;
    let x_col = table.column(figure, "axis_value")?;
    let v_col = table.column(figure, "violation_peak_aoi_prob")?;
    let p_col = table.column(figure, "peak_aoi_mean_cu")?;
    let mut viol_pairs = Vec::new();
    let mut peak_pairs = Vec::new();
    for row in 0..table.rows.len() {
        let x = table.number(row, x_col, "axis_value")?;
        let v = table.number(row, v_col, "violation_peak_aoi_prob")?;
        let p = table.number(row, p_col, "peak_aoi_mean_cu")?;
        if let (Some(x), Some(v)) = (x, v) {
            viol_pairs.push((x, v));
        }
        if let (Some(x), Some(p)) = (x, p) {
            peak_pairs.push((x, p));
        }
    }
    if viol_pairs.is_empty() {
        return Err(ReportError::NoRows { figure });
    }
    let peak_groups = group_by_key(peak_pairs);
    let mut csv =
        String::from("axis_value,peak_violation_prob,peak_violation_ci95,peak_aoi_mean_cu,n_reps\n");
    let mut points = Vec::new();
    for (key, values) in group_by_key(viol_pairs) {
        let (mean, ci) = aggregate(&values);
        let peak_mean = peak_groups
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, vs)| aggregate(vs).0);
        csv.push_str(&format!(
            "{key},{mean},{},{},{}\n",
            opt_str(ci),
            opt_str(peak_mean),
            values.len()
        ));
        points.push((key, mean));
    }
    // The SVG shows the violation curve; the mean-peak column rides along
    // in the CSV where its different scale is no problem.
    let svg = line_chart(
        "Peak-age violation vs sweep axis",
        "axis value",
        "violation probability",
        &[Series {
            label: "violation".into(),
            points,
        }],
    );
    Ok(FigureOutput { csv, svg })
}

fn fig5_output(table: &Table) -> Result<FigureOutput, ReportError> {
    let figure = Figure::Fig5;
    let n_col = table.column(figure, "nhat")?;
    let r_col = table.column(figure, "rounds")?;
    let t_col = table.column(figure, "theta_error_reference")?;
    // Group by (rounds, nhat); the exponent is analytic, so repetitions
    // only deduplicate.
    let mut triples: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for row in 0..table.rows.len() {
        let n = table.number(row, n_col, "nhat")?;
        let r = table.number(row, r_col, "rounds")?;
        let t = table.number(row, t_col, "theta_error_reference")?;
        if let (Some(n), Some(r), Some(t)) = (n, r, t) {
            match triples.iter_mut().find(|(tr, tn, _)| *tr == r && *tn == n) {
                Some((_, _, vs)) => vs.push(t),
                None => triples.push((r, n, vec![t])),
            }
        }
    }
    if triples.is_empty() {
        return Err(ReportError::NoRows { figure });
    }
    triples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut csv = String::from("rounds,nhat,theta_error_per_cu\n");
    let mut series: Vec<Series> = Vec::new();
    for (rounds, nhat, values) in &triples {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        csv.push_str(&format!("{rounds},{nhat},{mean}\n"));
        let label = format!("rounds = {rounds}");
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((*nhat, mean)),
            None => series.push(Series {
                label,
                points: vec![(*nhat, mean)],
            }),
        }
    }
    let svg = line_chart(
        "Error-rate exponent vs sub-blocklength",
        "sub-blocklength (cu)",
        "error exponent (1/cu)",
        &series,
    );
    Ok(FigureOutput { csv, svg })
}

/// Read one numeric column from a CSV file, skipping empty cells. Used by
/// the standalone fit subcommand; reports schema problems by name like
/// the figure readers do.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let table = Table::parse(&text)?;
    let col = table
        .header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| ReportError::BadColumn {
            path: path.display().to_string(),
            column: column.to_string(),
        })?;
    let mut out = Vec::new();
    for row in 0..table.rows.len() {
        if let Some(v) = table.number(row, col, column)? {
            out.push(v);
        }
    }
    Ok(out)
}

/// Read `<input_dir>/sweep.csv` and write `plot_<figure>.csv` and
/// `plot_<figure>.svg` into `out_dir`. Returns the paths written.
pub fn generate_report(
    input_dir: &Path,
    out_dir: &Path,
    figure: Figure,
) -> Result<Vec<std::path::PathBuf>, ReportError> {
    let input = input_dir.join("sweep.csv");
    let text = std::fs::read_to_string(&input).map_err(|source| ReportError::Io {
        path: input.display().to_string(),
        source,
    })?;
    let table = Table::parse(&text)?;
    let output = match figure {
        Figure::Fig2 => fig2_output(&table)?,
        Figure::Fig4 => fig4_output(&table)?,
        Figure::Fig5 => fig5_output(&table)?,
    };
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::WriteIo {
        path: out_dir.display().to_string(),
        source,
    })?;
    let csv_path = out_dir.join(format!("plot_{figure}.csv"));
    let svg_path = out_dir.join(format!("plot_{figure}.svg"));
    for (path, content) in [(&csv_path, &output.csv), (&svg_path, &output.svg)] {
        std::fs::write(path, content).map_err(|source| ReportError::WriteIo {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(vec![csv_path, svg_path])
}

// ------------------------------------------------------------------------
