//! Static SVG scatterplots over results CSV files.
//!
//! One marker per terminal row, color and shape keyed by a grouping column,
//! linear axes with unit labels, and a legend. The interactive viewer the
//! sweep flow otherwise implies is out of scope; everything it would show
//! lives in the CSV.

use crate::harness::{read_rows, ResultRow, SweepError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("unknown field {field:?}; numeric fields: {numeric}; group fields: {group}",
        numeric = NUMERIC_FIELDS.join(", "), group = GROUP_FIELDS.join(", "))]
    UnknownField { field: String },
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("cannot write svg {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

const NUMERIC_FIELDS: [&str; 10] = [
    "iteration",
    "f_target_mhz",
    "wns_ns",
    "f_achievable_mhz",
    "lut",
    "ff",
    "dsp",
    "bram",
    "wall_seconds",
    "width",
];

const GROUP_FIELDS: [&str; 8] = [
    "benchmark",
    "label",
    "size",
    "width",
    "precision",
    "strategy",
    "stop_reason",
    "run_id",
];

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 56.0;

fn numeric_field(row: &ResultRow, field: &str) -> Option<f64> {
    Some(match field {
        "iteration" => row.iteration as f64,
        "f_target_mhz" => row.f_target_mhz,
        "wns_ns" => row.wns_ns,
        "f_achievable_mhz" => row.f_achievable_mhz,
        "lut" => row.lut as f64,
        "ff" => row.ff as f64,
        "dsp" => row.dsp as f64,
        "bram" => row.bram as f64,
        "wall_seconds" => row.wall_seconds,
        "width" => row.width as f64,
        _ => return None,
    })
}

fn group_field(row: &ResultRow, field: &str) -> Option<String> {
    Some(match field {
        "benchmark" => row.benchmark.clone(),
        "label" => row.label.clone(),
        "size" => row.size.clone(),
        "width" => row.width.to_string(),
        "precision" => row.precision.clone(),
        "strategy" => row.strategy.clone(),
        "stop_reason" => row.stop_reason.clone(),
        "run_id" => row.run_id.clone(),
        _ => return None,
    })
}

fn axis_label(field: &str) -> String {
    match field {
        "f_target_mhz" => "f_target (MHz)".to_string(),
        "f_achievable_mhz" => "f_achievable (MHz)".to_string(),
        "wns_ns" => "WNS (ns)".to_string(),
        "wall_seconds" => "wall time (s)".to_string(),
        "lut" | "ff" | "dsp" | "bram" => format!("{field} (count)"),
        other => other.to_string(),
    }
}

struct LinearScale {
    lo: f64,
    hi: f64,
    out_lo: f64,
    out_hi: f64,
}

impl LinearScale {
    fn new(values: &[f64], out_lo: f64, out_hi: f64) -> LinearScale {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in values {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = 0.0;
            hi = 1.0;
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = (hi - lo) * 0.05;
        LinearScale {
            lo: lo - pad,
            hi: hi + pad,
            out_lo,
            out_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.out_lo + (v - self.lo) / (self.hi - self.lo) * (self.out_hi - self.out_lo)
    }

    fn ticks(&self, count: usize) -> Vec<f64> {
        (0..=count)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / count as f64)
            .collect()
    }
}

fn marker(svg: &mut String, shape: usize, color: &str, x: f64, y: f64, data: (f64, f64)) {
    let (dx, dy) = data;
    match shape % 4 {
        0 => {
            let _ = write!(
                svg,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}" data-x="{dx}" data-y="{dy}"/>"#
            );
        }
        1 => {
            let _ = write!(
                svg,
                r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="{color}" data-x="{dx}" data-y="{dy}"/>"#,
                x - 3.5,
                y - 3.5
            );
        }
        2 => {
            let _ = write!(
                svg,
                r#"<path d="M {x:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2} Z" fill="{color}" data-x="{dx}" data-y="{dy}"/>"#,
                y - 4.5,
                x - 4.5,
                y + 4.0,
                x + 4.5,
                y + 4.0
            );
        }
        _ => {
            let _ = write!(
                svg,
                r#"<path d="M {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} Z" fill="{color}" data-x="{dx}" data-y="{dy}"/>"#,
                y - 5.0,
                x + 5.0,
                y + 5.0,
                x - 5.0
            );
        }
    }
    svg.push('\n');
}

/// Summary of one rendered plot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlotSummary {
    pub markers: usize,
    pub groups: usize,
}

/// Render `y_field` against `x_field` for every terminal row of the CSV,
/// one color/shape per distinct `group_field` value, into a standalone SVG.
pub fn plot_scatter(
    csv_path: &Path,
    x_field: &str,
    y_field: &str,
    group_fld: &str,
    out_svg: &Path,
) -> Result<PlotSummary, PlotError> {
    for field in [x_field, y_field] {
        if !NUMERIC_FIELDS.contains(&field) {
            return Err(PlotError::UnknownField {
                field: field.to_string(),
            });
        }
    }
    if !GROUP_FIELDS.contains(&group_fld) {
        return Err(PlotError::UnknownField {
            field: group_fld.to_string(),
        });
    }

    let rows = read_rows(csv_path)?;
    let terminal: Vec<&ResultRow> = rows.iter().filter(|r| r.is_terminal()).collect();

    // group -> (x, y) points, keys sorted for deterministic output
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &terminal {
        let x = numeric_field(row, x_field).unwrap_or(f64::NAN);
        let y = numeric_field(row, y_field).unwrap_or(f64::NAN);
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        let key = group_field(row, group_fld).unwrap_or_default();
        groups.entry(key).or_default().push((x, y));
    }

    let xs: Vec<f64> = groups.values().flatten().map(|p| p.0).collect();
    let ys: Vec<f64> = groups.values().flatten().map(|p| p.1).collect();
    let x_scale = LinearScale::new(&xs, MARGIN_L, WIDTH - MARGIN_R);
    let y_scale = LinearScale::new(&ys, HEIGHT - MARGIN_B, MARGIN_T); // y grows upward

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{:.1}" stroke="black"/>"#,
        HEIGHT - MARGIN_B
    );
    for t in x_scale.ticks(5) {
        let x = x_scale.map(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{t:.1}</text>"#,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0,
            HEIGHT - MARGIN_B + 18.0
        );
    }
    for t in y_scale.ticks(5) {
        let y = y_scale.map(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_L}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{t:.1}</text>"#,
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        axis_label(x_field)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        axis_label(y_field)
    );

    // markers, one <g> per group
    let mut markers = 0usize;
    for (gi, (name, points)) in groups.iter().enumerate() {
        let color = PALETTE[gi % PALETTE.len()];
        let _ = writeln!(svg, r#"<g class="group" data-group="{name}">"#);
        for &(x, y) in points {
            marker(&mut svg, gi, color, x_scale.map(x), y_scale.map(y), (x, y));
            markers += 1;
        }
        let _ = writeln!(svg, "</g>");
    }

    // legend
    let legend_x = WIDTH - MARGIN_R + 16.0;
    let _ = writeln!(
        svg,
        r#"<text x="{legend_x:.1}" y="{MARGIN_T}" font-size="12" font-weight="bold">{group_fld}</text>"#
    );
    for (gi, name) in groups.keys().enumerate() {
        let y = MARGIN_T + 18.0 + gi as f64 * 18.0;
        let color = PALETTE[gi % PALETTE.len()];
        marker(&mut svg, gi, color, legend_x + 5.0, y - 4.0, (0.0, 0.0));
        let shown = if name.is_empty() { "(none)" } else { name };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{y:.1}" font-size="11">{shown}</text>"#,
            legend_x + 16.0
        );
    }
    let _ = writeln!(svg, "</svg>");

    std::fs::write(out_svg, &svg).map_err(|source| PlotError::Io {
        path: out_svg.to_path_buf(),
        source,
    })?;
    Ok(PlotSummary {
        markers,
        groups: groups.len(),
    })
}
