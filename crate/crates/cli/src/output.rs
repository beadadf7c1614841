//! Deterministic file outputs: CSV with full-precision floats, and
//! hand-rolled SVG line plots. Nothing here depends on time, locale, or
//! iteration order of hash maps, so byte-identical inputs give
//! byte-identical files.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    write_text(path, &text)
}

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub color: String,
    /// Polyline vertices in data coordinates; staircases are pre-expanded.
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

impl Plot {
    pub fn svg(&self) -> String {
        // Working coordinates: x as-is, y possibly log10-transformed.
        // Non-positive y values are unplottable on a log axis and dropped.
        let transformed: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_y || *y > 0.0))
                    .map(|&(x, y)| (x, if self.log_y { y.log10() } else { y }))
                    .collect()
            })
            .collect();

        let (x_min, x_max) = padded_range(transformed.iter().flatten().map(|p| p.0), false);
        let (y_min, y_max) = padded_range(transformed.iter().flatten().map(|p| p.1), true);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_px = |x: f64, y: f64| {
            (
                MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
                MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h,
            )
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // axes frame
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
             fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        ));

        for i in 0..TICKS {
            let f = i as f64 / (TICKS - 1) as f64;
            let xv = x_min + f * (x_max - x_min);
            let yv = y_min + f * (y_max - y_min);
            let (px, _) = to_px(xv, y_min);
            let (_, py) = to_px(x_min, yv);
            svg.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" \
                 stroke=\"#333333\" stroke-width=\"1\"/>\n",
                MARGIN_TOP + plot_h,
                MARGIN_TOP + plot_h + 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                MARGIN_TOP + plot_h + 18.0,
                fmt_tick(xv, false)
            ));
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.2}\" \
                 stroke=\"#333333\" stroke-width=\"1\"/>\n",
                MARGIN_LEFT - 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" \
                 font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                MARGIN_LEFT - 8.0,
                py + 4.0,
                fmt_tick(yv, self.log_y)
            ));
        }

        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"13\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        for (series, points) in self.series.iter().zip(&transformed) {
            if points.is_empty() {
                continue;
            }
            let path: Vec<String> = points
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = to_px(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                path.join(" "),
                series.color
            ));
        }

        for (i, series) in self.series.iter().enumerate() {
            let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT - 150.0;
            svg.push_str(&format!(
                "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                 stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                ly - 4.0,
                lx + 22.0,
                ly - 4.0,
                series.color
            ));
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" \
                 font-size=\"11\">{}</text>\n",
                lx + 28.0,
                escape(&series.label)
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }
}

/// Staircase polyline for a piecewise-constant signal on `breakpoints`
/// (length M+1, values length M).
pub fn staircase(breakpoints: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut points = Vec::with_capacity(2 * values.len());
    for (k, &v) in values.iter().enumerate() {
        points.push((breakpoints[k], v));
        points.push((breakpoints[k + 1], v));
    }
    points
}

fn padded_range(values: impl Iterator<Item = f64>, pad: bool) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if min == max {
        return (min - 1.0, max + 1.0);
    }
    if pad {
        let margin = 0.05 * (max - min);
        (min - margin, max + margin)
    } else {
        (min, max)
    }
}

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        return format!("{:.1e}", 10f64.powf(v));
    }
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
