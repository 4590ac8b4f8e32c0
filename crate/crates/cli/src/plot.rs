//! Standalone SVG line plots of tables written by this tool.
//!
//! Axis columns default by table kind: sorted z profiles plot z against the
//! normalized rank, channel sweeps plot SER against SNR, source runs plot
//! SER against the source rate. Log-scale axes drop non-positive values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::table::Table;
use crate::{CliError, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, Default)]
pub struct PlotOptions {
    pub x: Option<String>,
    /// Comma-separated list of y columns.
    pub y: Option<String>,
    pub log_y: Option<bool>,
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

struct Defaults {
    x: &'static str,
    y: &'static str,
    log_y: bool,
    title: &'static str,
}

fn defaults(kind: Option<&str>) -> Defaults {
    match kind {
        Some("z-sorted") => Defaults { x: "fraction", y: "z", log_y: true, title: "Sorted Bhattacharyya parameters" },
        Some("z-profile") => Defaults { x: "index", y: "z", log_y: true, title: "Bhattacharyya parameters" },
        Some("simulate-channel") => Defaults { x: "snr_db", y: "ser", log_y: true, title: "Symbol error rate" },
        Some("simulate-source") => {
            Defaults { x: "rate_source", y: "ser", log_y: true, title: "Source decoding symbol error rate" }
        }
        Some("degradation") => {
            Defaults { x: "index", y: "z_better,z_degraded", log_y: true, title: "Degradation ordering" }
        }
        _ => Defaults { x: "", y: "", log_y: false, title: "" },
    }
}

fn series_label(t: &Table, path: &Path, column: &str, many_columns: bool) -> String {
    let base = t
        .meta("label")
        .map(str::to_owned)
        .or_else(|| t.meta("n").map(|n| format!("N={n}")))
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    if many_columns {
        format!("{base} {column}")
    } else {
        base
    }
}

/// Reads the series to draw and the resolved axis settings.
pub fn collect(paths: &[PathBuf], opts: &PlotOptions) -> Result<(Vec<Series>, String, String, bool, String)> {
    if paths.is_empty() {
        return Err(CliError::Config("no input tables".into()));
    }
    let mut series = Vec::new();
    let mut resolved = None;
    for path in paths {
        let t = Table::read(path)?;
        let table_err = |msg: String| CliError::Table { path: path.clone(), msg };
        if t.rows.is_empty() {
            return Err(table_err("no data rows".into()));
        }
        let d = defaults(t.meta("kind"));
        let x = opts.x.clone().unwrap_or_else(|| d.x.to_owned());
        let y = opts.y.clone().unwrap_or_else(|| d.y.to_owned());
        if x.is_empty() || y.is_empty() {
            return Err(table_err("unknown table kind; name the columns with --x and --y".into()));
        }
        let log_y = opts.log_y.unwrap_or(d.log_y);
        let title = opts.title.clone().unwrap_or_else(|| d.title.to_owned());
        let xs = t.column_f64(&x).map_err(table_err)?;
        let ycols: Vec<&str> = y.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        for col in &ycols {
            let ys = t.column_f64(col).map_err(table_err)?;
            let points = xs.iter().zip(&ys).map(|(&a, &b)| (a, b)).filter(|&(a, b)| {
                a.is_finite() && b.is_finite() && (!log_y || b > 0.0)
            });
            series.push(Series { label: series_label(&t, path, col, ycols.len() > 1), points: points.collect() });
        }
        resolved.get_or_insert((x, y, log_y, title));
    }
    let (x, y, log_y, title) = resolved.expect("at least one table");
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(CliError::Config("nothing to plot: every value was filtered out".into()));
    }
    Ok((series, x, y, log_y, title))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round tick positions covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

/// Renders the series as an SVG document.
pub fn render(series: &[Series], x_label: &str, y_label: &str, log_y: bool, title: &str) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        let y = if log_y { y.log10() } else { y };
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil();
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);

    for t in linear_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(t));
    }
    let yticks: Vec<f64> = if log_y {
        let step = ((y1 - y0) / 8.0).ceil().max(1.0);
        let mut v = Vec::new();
        let mut e = y0;
        while e <= y1 + 1e-9 {
            v.push(e);
            e += step;
        }
        v
    } else {
        linear_ticks(y0, y1)
    };
    for t in yticks {
        let y = sy(t);
        let label = if log_y { format!("1e{}", t.round() as i64) } else { fmt_tick(t) };
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 18.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&if log_y { format!("{y_label} (log)") } else { y_label.to_owned() })
    );

    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(if log_y { y.log10() } else { y })))
            .collect();
        if coords.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        if coords.len() <= 60 {
            for c in &coords {
                let (cx, cy) = c.split_once(',').expect("formatted above");
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
            }
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Reads `paths` and writes one SVG to `out`. Nothing is written on error.
pub fn plot(paths: &[PathBuf], out: &Path, opts: &PlotOptions) -> Result<String> {
    let (series, x, y, log_y, title) = collect(paths, opts)?;
    let svg = render(&series, &x, &y.replace(',', ", "), log_y, &title);
    std::fs::write(out, svg).map_err(|e| CliError::io(out, e))?;
    Ok(format!("wrote {} ({} series)", out.display(), series.len()))
}
