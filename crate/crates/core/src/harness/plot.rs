//! SVG line charts of a logged column: mean across seeds with a ±k·std band.
//!
//! CSVs are grouped into series by their parent directory, so
//! `runs/peer/seed_*.csv` and `runs/dqn/seed_*.csv` plot as two curves.
//! Within a series the i-th non-blank value of every file is aligned with the
//! i-th of every other file; the x coordinate is their mean env step.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::log::{read_csv, LogTable};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// Trailing moving-average window applied to mean and std; 1 disables it.
    pub window: usize,
    /// Band half-width in standard deviations.
    pub band: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            window: 10,
            band: 1.0,
        }
    }
}

/// Per-point statistics of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStats {
    pub label: String,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// `(env_step, value)` points of one run.
pub type Series = Vec<(f64, f64)>;

fn moving_average(v: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(v.len());
    let mut sum = 0.0;
    for i in 0..v.len() {
        sum += v[i];
        if i >= w {
            sum -= v[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}

/// Align runs by ordinal position, then take per-point mean and population
/// std, then smooth both with a trailing window.
pub fn aggregate(label: &str, runs: &[Series], window: usize) -> SeriesStats {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    let k = runs.len() as f64;
    let mut x = Vec::with_capacity(len);
    let mut mean = Vec::with_capacity(len);
    let mut std = Vec::with_capacity(len);
    for i in 0..len {
        let xs = runs.iter().map(|r| r[i].0).sum::<f64>() / k;
        let m = runs.iter().map(|r| r[i].1).sum::<f64>() / k;
        let var = runs.iter().map(|r| (r[i].1 - m).powi(2)).sum::<f64>() / k;
        x.push(xs);
        mean.push(m);
        std.push(var.sqrt());
    }
    SeriesStats {
        label: label.to_string(),
        x,
        mean: moving_average(&mean, window),
        std: moving_average(&std, window),
    }
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Render series as a standalone SVG document.
pub fn render_svg(series: &[SeriesStats], column: &str, band: f64) -> String {
    let (w, h) = (800.0, 480.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for i in 0..s.x.len() {
            xmin = xmin.min(s.x[i]);
            xmax = xmax.max(s.x[i]);
            ymin = ymin.min(s.mean[i] - band * s.std[i]);
            ymax = ymax.max(s.mean[i] + band * s.std[i]);
        }
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    if xmax - xmin < 1e-12 {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if ymax - ymin < 1e-12 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    let sx = |x: f64| left + (x - xmin) / (xmax - xmin) * pw;
    let sy = |y: f64| top + (ymax - y) / (ymax - ymin) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>
<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>
<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        w / 2.0,
        escape(column),
        top + ph,
        left + pw,
        top + ph,
        top + ph
    );
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx(xv),
            top + ph + 18.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(yv) + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">env step</text>"#,
        left + pw / 2.0,
        h - 10.0
    );

    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let upper = (0..s.x.len()).map(|i| (sx(s.x[i]), sy(s.mean[i] + band * s.std[i])));
        let lower = (0..s.x.len())
            .rev()
            .map(|i| (sx(s.x[i]), sy(s.mean[i] - band * s.std[i])));
        let band_pts = points(upper.chain(lower));
        let mean_pts = points((0..s.x.len()).map(|i| (sx(s.x[i]), sy(s.mean[i]))));
        let _ = writeln!(
            out,
            r#"<polygon class="band" points="{band_pts}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#
        );
        let _ = writeln!(
            out,
            r#"<polyline class="mean" points="{mean_pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            left + 10.0,
            top + 16.0 + 16.0 * idx as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn points(it: impl Iterator<Item = (f64, f64)>) -> String {
    it.map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn series_label(path: &Path) -> String {
    path.parent()
        .and_then(Path::file_name)
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string())
}

/// Read CSV logs, aggregate `column` per series, and write the chart.
pub fn plot(
    csv_paths: &[PathBuf],
    column: &str,
    out_path: &Path,
    options: &PlotOptions,
) -> Result<Vec<SeriesStats>> {
    if csv_paths.is_empty() {
        return Err(Error::Domain("no CSV files given".into()));
    }
    let tables: Vec<LogTable> = csv_paths
        .iter()
        .map(|p| read_csv(p))
        .collect::<Result<_>>()?;
    let columns = &tables[0].columns;
    for (p, t) in csv_paths.iter().zip(&tables).skip(1) {
        if &t.columns != columns {
            return Err(Error::Format(format!(
                "{} has a different schema from {}",
                p.display(),
                csv_paths[0].display()
            )));
        }
    }
    tables[0].column_index(column)?;

    let mut groups: Vec<(String, Vec<Series>)> = Vec::new();
    for (p, t) in csv_paths.iter().zip(&tables) {
        let label = series_label(p);
        let data = t.series(column)?;
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, runs)) => runs.push(data),
            None => groups.push((label, vec![data])),
        }
    }
    let stats: Vec<SeriesStats> = groups
        .iter()
        .map(|(label, runs)| aggregate(label, runs, options.window))
        .collect();
    let svg = render_svg(&stats, column, options.band);
    std::fs::write(out_path, svg).map_err(|e| Error::io(out_path, e))?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_is_trailing() {
        assert_eq!(
            moving_average(&[1.0, 3.0, 5.0, 7.0], 2),
            vec![1.0, 2.0, 4.0, 6.0]
        );
        assert_eq!(moving_average(&[1.0, 3.0], 1), vec![1.0, 3.0]);
    }

    #[test]
    fn single_run_has_zero_band() {
        let s = aggregate("a", &[vec![(0.0, 1.0), (1.0, 4.0)]], 1);
        assert_eq!(s.mean, vec![1.0, 4.0]);
        assert_eq!(s.std, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_pair_statistics() {
        let a: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 1.0)).collect();
        let b: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 3.0)).collect();
        let s = aggregate("x", &[a, b], 10);
        assert!(s.mean.iter().all(|&m| (m - 2.0).abs() < 1e-12));
        assert!(s.std.iter().all(|&d| (d - 1.0).abs() < 1e-12));
    }

    #[test]
    fn truncates_to_shortest_run() {
        let s = aggregate("x", &[vec![(0.0, 1.0), (2.0, 1.0)], vec![(4.0, 3.0)]], 1);
        assert_eq!(s.x, vec![2.0]);
    }

    #[test]
    fn escapes_labels() {
        assert_eq!(escape("a<b&c>"), "a&lt;b&amp;c&gt;");
    }
}
