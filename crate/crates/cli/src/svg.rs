//! Minimal line plots of result tables as standalone SVG.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::table::ResultTable;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub y: String,
    pub label: Option<String>,
    /// Column drawn as a shaded band of half-width `error_scale·error`.
    pub error: Option<String>,
    #[serde(default = "one")]
    pub error_scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub x: String,
    pub series: Vec<Series>,
    #[serde(default)]
    pub x_log: bool,
    #[serde(default)]
    pub y_log: bool,
    pub title: Option<String>,
    #[serde(default = "width")]
    pub width: u32,
    #[serde(default = "height")]
    pub height: u32,
}

fn width() -> u32 {
    640
}

fn height() -> u32 {
    400
}

const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN: f64 = 50.0;

fn plot_error(message: String) -> CliError {
    CliError::Plot(message)
}

fn column(table: &ResultTable, name: &str) -> Result<Vec<f64>, CliError> {
    table
        .column(name)
        .ok_or_else(|| plot_error(format!("table `{}` has no column `{name}`", table.schema)))
}

fn check_log(values: &[f64], name: &str) -> Result<(), CliError> {
    match values.iter().position(|&v| v.is_finite() && v <= 0.0) {
        Some(row) => Err(plot_error(format!(
            "log axis: column `{name}` has nonpositive value {} at row {row}",
            values[row]
        ))),
        None => Ok(()),
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, log: bool, from: f64, to: f64) -> Self {
        let t = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite())
            .map(t)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn label(&self, end: f64) -> String {
        let v = if self.log { 10f64.powf(end) } else { end };
        format!("{v:.4}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `spec` over `table`. Non-finite points are skipped; on log axes
/// a nonpositive value is an error naming its row.
pub fn emit_svg(table: &ResultTable, spec: &PlotSpec) -> Result<String, CliError> {
    if spec.series.is_empty() {
        return Err(plot_error("a plot needs at least one series".into()));
    }
    let x = column(table, &spec.x)?;
    if spec.x_log {
        check_log(&x, &spec.x)?;
    }
    let mut curves = Vec::new();
    for s in &spec.series {
        let y = column(table, &s.y)?;
        let err = match &s.error {
            Some(e) => Some(column(table, e)?.iter().map(|v| v * s.error_scale).collect::<Vec<_>>()),
            None => None,
        };
        let (lo, hi): (Vec<f64>, Vec<f64>) = match &err {
            Some(e) => y.iter().zip(e).map(|(y, e)| (y - e, y + e)).unzip(),
            None => (y.clone(), y.clone()),
        };
        if spec.y_log {
            check_log(&lo, &s.y)?;
        }
        curves.push((s, y, lo, hi));
    }

    let (w, h) = (f64::from(spec.width), f64::from(spec.height));
    let xs = Scale::new(x.iter().copied(), spec.x_log, MARGIN, w - MARGIN);
    let ys = Scale::new(
        curves.iter().flat_map(|c| c.2.iter().chain(&c.3).copied()),
        spec.y_log,
        h - MARGIN,
        MARGIN,
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * MARGIN,
        h - 2.0 * MARGIN
    );
    if let Some(t) = &spec.title {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, MARGIN / 2.0, escape(t));
    }
    let small = r#"font-size="10""#;
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" {small}>{}</text>"#, h - MARGIN + 14.0, xs.label(xs.lo));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {small}>{}</text>"#, w - MARGIN, h - MARGIN + 14.0, xs.label(xs.hi));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {small}>{}</text>"#, MARGIN - 4.0, h - MARGIN, ys.label(ys.lo));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" {small}>{}</text>"#, MARGIN - 4.0, MARGIN + 10.0, ys.label(ys.hi));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" {small}>{}</text>"#, w / 2.0, h - 10.0, escape(&spec.x));

    for (k, (s, y, lo, hi)) in curves.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let ok = |i: usize| x[i].is_finite() && y[i].is_finite();
        if s.error.is_some() {
            let idx: Vec<usize> = (0..x.len()).filter(|&i| ok(i) && lo[i].is_finite() && hi[i].is_finite()).collect();
            let mut band = String::new();
            for &i in &idx {
                let _ = write!(band, "{:.3},{:.3} ", xs.map(x[i]), ys.map(hi[i]));
            }
            for &i in idx.iter().rev() {
                let _ = write!(band, "{:.3},{:.3} ", xs.map(x[i]), ys.map(lo[i]));
            }
            let _ = writeln!(out, r#"<polygon points="{}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#, band.trim_end());
        }
        let mut line = String::new();
        for i in (0..x.len()).filter(|&i| ok(i)) {
            let _ = write!(line, "{:.3},{:.3} ", xs.map(x[i]), ys.map(y[i]));
        }
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, line.trim_end());
        let label = s.label.as_deref().unwrap_or(&s.y);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{colour}" {small}>{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
