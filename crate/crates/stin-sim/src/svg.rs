//! Minimal deterministic SVG line charts for the report figures.
//!
//! Hand-rolled on purpose: the output must be byte-identical across
//! reruns and machines, with no styling or layout engine between the
//! numbers and the file. Coordinates are formatted with fixed precision
//! so equal inputs always produce equal bytes.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Line colors, cycled when a chart has more series than entries.
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One labeled polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Compact tick label: plain decimals in a middle range, exponent
/// notation outside it, trailing zeros trimmed.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        return format!("{v:.3e}");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Scale {
    min: f64,
    max: f64,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, pixel_lo: f64, pixel_hi: f64) -> Scale {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if !min.is_finite() || !max.is_finite() {
            (min, max) = (0.0, 1.0);
        }
        if min == max {
            // Degenerate range: pad so the single value sits mid-axis.
            let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.5 };
            min -= pad;
            max += pad;
        }
        Scale {
            min,
            max,
            pixel_lo,
            pixel_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.pixel_lo + (v - self.min) / (self.max - self.min) * (self.pixel_hi - self.pixel_lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.min + i as f64 * (self.max - self.min) / 4.0)
            .collect()
    }
}

/// Render a line chart of `series` to a standalone SVG document.
/// Non-finite points are dropped; an all-empty chart still renders its
/// frame and title.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let cleaned: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|s| {
            (
                s.label.as_str(),
                s.points
                    .iter()
                    .copied()
                    .filter(|&(x, y)| x.is_finite() && y.is_finite())
                    .collect(),
            )
        })
        .collect();

    let xs = Scale::new(
        cleaned.iter().flat_map(|(_, p)| p.iter().map(|&(x, _)| x)),
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT,
    );
    let ys = Scale::new(
        cleaned.iter().flat_map(|(_, p)| p.iter().map(|&(_, y)| y)),
        HEIGHT - MARGIN_BOTTOM,
        MARGIN_TOP,
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        MARGIN_LEFT,
        escape(title)
    );

    // Frame.
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    );

    for t in xs.ticks() {
        let px = xs.map(t);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{px:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
            y0 + 20.0,
            fmt_num(t)
        );
    }
    for t in ys.ticks() {
        let py = ys.map(t);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>",
            x0 - 8.0,
            py + 4.0,
            fmt_num(t)
        );
    }

    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );

    for (i, (label, points)) in cleaned.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if points.len() > 1 {
            let mut attr = String::new();
            for &(x, y) in points {
                let _ = write!(attr, "{:.2},{:.2} ", xs.map(x), ys.map(y));
            }
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
                attr.trim_end()
            );
        }
        for &(x, y) in points {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                xs.map(x),
                ys.map(y)
            );
        }
        let ly = MARGIN_TOP + 16.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{:.2}\" width=\"12\" height=\"4\" fill=\"{color}\"/>",
            x1 - 160.0,
            ly
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            x1 - 144.0,
            ly + 6.0,
            escape(label)
        );
    }

    out.push_str("</svg>\n");
    out
}

// ------------------------------------------------------------------------
