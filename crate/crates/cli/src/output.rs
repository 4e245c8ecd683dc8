//! Trace CSVs, checkpoint tables, and SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use nsopt_core::solvers::{Trace, TraceRecord};

use crate::error::{CliError, CliResult};

/// 17 significant digits, or `nan`/`inf`/`-inf`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// CSV text: `# key: value` header lines, the column row, one row per record.
pub fn trace_csv(header: &[(String, String)], trace: &Trace) -> String {
    let mut out = String::new();
    for (k, v) in header {
        writeln!(out, "# {k}: {v}").unwrap();
    }
    out.push_str(TraceRecord::CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iter,
            num(r.elapsed_ms),
            num(r.objective),
            num(r.gap),
            num(r.mu),
            num(r.beta),
            num(r.stepsize),
            num(r.grad_map_norm)
        )
        .unwrap();
    }
    out
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `count` equally spaced iteration numbers ending at `iters`.
pub fn checkpoints(iters: usize, count: usize) -> Vec<usize> {
    (1..=count).map(|j| (j * iters).div_ceil(count).max(1)).collect()
}

/// Gap after iteration `k` (1-based), NaN when the trace is shorter.
pub fn gap_at(trace: &Trace, k: usize) -> f64 {
    trace.records.get(k - 1).map_or(f64::NAN, |r| r.gap)
}

/// Fixed-width table: one row per named series, one column per checkpoint.
pub fn checkpoint_table(rows: &[(String, Vec<f64>)], marks: &[usize]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(9);
    let mut out = format!("{:<width$}", "algorithm");
    for k in marks {
        write!(out, " {:>10}", format!("k={k}")).unwrap();
    }
    out.push('\n');
    for (name, gaps) in rows {
        write!(out, "{name:<width$}").unwrap();
        for g in gaps {
            write!(out, " {:>10}", if g.is_nan() { "-".into() } else { format!("{g:.3e}") }).unwrap();
        }
        out.push('\n');
    }
    out
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Line plot of gap against iteration with a log-scale y axis. Nonpositive
/// and non-finite gaps are left out.
pub fn gap_plot(title: &str, series: &[(String, &Trace)]) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let points = |t: &Trace| -> Vec<(f64, f64)> {
        t.records
            .iter()
            .filter(|r| r.gap.is_finite() && r.gap > 0.0)
            .map(|r| (r.iter as f64, r.gap.log10()))
            .collect()
    };
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, t)| points(t)).collect();
    let max_iter = all.iter().map(|p| p.0).fold(1.0, f64::max);
    let lo = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    let hi = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
    let (lo, hi) = if lo.is_finite() && hi.is_finite() { (lo, hi.max(lo + 1.0)) } else { (-1.0, 0.0) };
    let sx = |x: f64| left + pw * x / max_iter;
    let sy = |y: f64| top + ph * (hi - y) / (hi - lo);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title)).unwrap();
    writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    let step = ((hi - lo) / 10.0).ceil().max(1.0);
    let mut e = lo;
    while e <= hi {
        let y = sy(e);
        writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0).unwrap();
        e += step;
    }
    for j in 0..=5 {
        let it = max_iter * j as f64 / 5.0;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(it), top + ph + 18.0, it.round()).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#, left + pw / 2.0, h - 10.0).unwrap();
    writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">relative gap</text>"#, top + ph / 2.0, top + ph / 2.0).unwrap();

    for (i, (name, t)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts = points(t);
        if !pts.is_empty() {
            let path: Vec<String> = thin(&pts, 2000).iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" ")).unwrap();
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, left + pw + 10.0, left + pw + 30.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, left + pw + 36.0, ly + 4.0, escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Keeps at most about `max` points, always including the last one.
fn thin(pts: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    let stride = pts.len().div_ceil(max).max(1);
    let mut out: Vec<_> = pts.iter().step_by(stride).copied().collect();
    if !(pts.len() - 1).is_multiple_of(stride) {
        out.push(pts[pts.len() - 1]);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
