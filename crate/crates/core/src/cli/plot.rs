//! Self-contained SVG figures.
//!
//! - `trajectory`: mean cumulative entropy against step, one polyline per
//!   policy, from `trajectories.csv`. Runs that finish early hold their
//!   final value.
//! - `scatter`: accuracy against mean cumulative entropy, one point per row
//!   of `summary.csv`, annotated with the Pearson r.
//! - `sweep`: a metric column against a swept parameter column, one
//!   polyline per policy, from a sweep `summary.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::metrics::{pearson, RunSummary};

use super::commands::SamplerRuns;
use super::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Trajectory,
    Scatter,
    Sweep,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub csv: PathBuf,
    pub kind: PlotKind,
    pub out: Option<PathBuf>,
    /// Parameter column for sweep plots.
    pub x: String,
    /// Metric column for sweep plots.
    pub y: String,
}

/// A named series of points.
pub type Series = (String, Vec<(f64, f64)>);

struct Chart<'a> {
    title: &'a str,
    x_label: &'a str,
    y_label: &'a str,
    series: &'a [Series],
    lines: bool,
    note: Option<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if (hi - lo).abs() < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn render(c: &Chart) -> String {
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let (x0, x1) = bounds(c.series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let (y0, y1) = bounds(c.series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(c.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{xv:.3}</text>"#,
            x = sx(xv),
            b = MARGIN_T + ph,
            b2 = MARGIN_T + ph + 5.0,
            ty = MARGIN_T + ph + 18.0,
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{l2}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{yv:.3}</text>"#,
            l2 = MARGIN_L - 5.0,
            y = sy(yv),
            tx = MARGIN_L - 8.0,
            ty = sy(yv) + 4.0,
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 12.0,
        escape(c.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_T + ph / 2.0,
        escape(c.y_label)
    );
    for (i, (name, points)) in c.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if c.lines {
            let pts: Vec<String> = points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
                pts.join(" "),
                escape(name)
            );
        } else {
            for (x, y) in points {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="{color}"><title>{}</title></circle>"#,
                    sx(*x),
                    sy(*y),
                    escape(name)
                );
            }
        }
        let ly = MARGIN_T + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            ly - 10.0,
            lx + 18.0,
            ly,
            escape(name)
        );
    }
    if let Some(note) = &c.note {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN_L + pw - 6.0,
            MARGIN_T + 16.0,
            escape(note)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Averages per-step curves, holding each run's final value once it ends.
fn average_curves(curves: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let sum: f64 = curves
                .iter()
                .map(|c| c.get(i).or(c.last()).copied().unwrap_or(0.0))
                .sum();
            (i as f64, sum / curves.len() as f64)
        })
        .collect()
}

/// Mean cumulative-entropy curve per sampler, starting at step 0.
pub fn mean_curves(runs: &[SamplerRuns]) -> Vec<Series> {
    runs.iter()
        .map(|run| {
            let curves: Vec<Vec<f64>> = run
                .records
                .iter()
                .map(|r| std::iter::once(0.0).chain(r.cumulative_curve()).collect())
                .collect();
            (run.config.label(), average_curves(&curves))
        })
        .collect()
}

pub fn trajectory_svg(series: &[Series]) -> String {
    render(&Chart {
        title: "Cumulative entropy along the trajectory",
        x_label: "step",
        y_label: "mean cumulative entropy (nats)",
        series,
        lines: true,
        note: None,
    })
}

pub fn scatter_svg(summaries: &[RunSummary]) -> String {
    let points: Vec<(String, f64, f64)> = summaries
        .iter()
        .map(|s| (s.label.clone(), s.mean_cumulative_entropy, s.accuracy))
        .collect();
    scatter_from_points(&points)
}

fn scatter_from_points(points: &[(String, f64, f64)]) -> String {
    let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2).collect();
    let r = pearson(&xs, &ys).map_or("Pearson r = n/a".to_string(), |r| {
        format!("Pearson r = {r:.3}")
    });
    let series: Vec<Series> = points
        .iter()
        .map(|(n, x, y)| (n.clone(), vec![(*x, *y)]))
        .collect();
    render(&Chart {
        title: "Accuracy vs cumulative entropy",
        x_label: "mean cumulative entropy (nats)",
        y_label: "accuracy",
        series: &series,
        lines: false,
        note: Some(r),
    })
}

fn plot_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Result<Table, CliError> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| plot_err(format!("{}: {e}", path.display())))?;
        let headers: Vec<String> = r
            .headers()
            .map_err(|e| plot_err(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| plot_err(e.to_string()))?;
        if headers.iter().all(|h| h.is_empty()) || rows.is_empty() {
            return Err(plot_err(format!("{} has no data rows", path.display())));
        }
        Ok(Table { headers, rows })
    }

    fn column(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| plot_err(format!("missing column `{name}`")))
    }

    fn number(&self, row: usize, col: usize) -> Result<f64, CliError> {
        let v = &self.rows[row][col];
        v.parse().map_err(|_| {
            plot_err(format!(
                "column `{}` row {}: `{v}` is not a number",
                self.headers[col],
                row + 1
            ))
        })
    }
}

/// Groups `(x, y)` points by the `policy` column, in order of appearance.
fn grouped(t: &Table, x: usize, y: usize) -> Result<Vec<Series>, CliError> {
    let p = t.column("policy")?;
    let mut order: Vec<String> = vec![];
    let mut points: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for i in 0..t.rows.len() {
        let name = t.rows[i][p].clone();
        if !points.contains_key(&name) {
            order.push(name.clone());
        }
        points
            .entry(name)
            .or_default()
            .push((t.number(i, x)?, t.number(i, y)?));
    }
    Ok(order
        .into_iter()
        .map(|n| {
            let v = points.remove(&n).unwrap_or_default();
            (n, v)
        })
        .collect())
}

pub fn sweep_svg_from_csv(path: &Path, x: &str, y: &str) -> Result<String, CliError> {
    let t = Table::read(path)?;
    let (xc, yc) = (t.column(x)?, t.column(y)?);
    let mut series = grouped(&t, xc, yc)?;
    for s in &mut series {
        s.1.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(render(&Chart {
        title: &format!("{y} vs {x}"),
        x_label: x,
        y_label: y,
        series: &series,
        lines: true,
        note: None,
    }))
}

/// Renders an SVG from a CSV; returns the written path.
pub fn cmd_plot(opts: &PlotOptions) -> Result<PathBuf, CliError> {
    let svg = match opts.kind {
        PlotKind::Trajectory => {
            let t = Table::read(&opts.csv)?;
            let (p, seed) = (t.column("policy")?, t.column("seed")?);
            let (step, value) = (t.column("step")?, t.column("cumulative_entropy_nats")?);
            let mut order: Vec<String> = vec![];
            let mut runs: BTreeMap<String, BTreeMap<String, Vec<(f64, f64)>>> = BTreeMap::new();
            for i in 0..t.rows.len() {
                let name = t.rows[i][p].clone();
                if !runs.contains_key(&name) {
                    order.push(name.clone());
                }
                runs.entry(name)
                    .or_default()
                    .entry(t.rows[i][seed].clone())
                    .or_default()
                    .push((t.number(i, step)?, t.number(i, value)?));
            }
            let series: Vec<Series> = order
                .into_iter()
                .map(|n| {
                    let curves: Vec<Vec<f64>> = runs[&n]
                        .values()
                        .map(|pts| {
                            let mut pts = pts.clone();
                            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                            pts.into_iter().map(|p| p.1).collect()
                        })
                        .collect();
                    (n, average_curves(&curves))
                })
                .collect();
            trajectory_svg(&series)
        }
        PlotKind::Scatter => {
            let t = Table::read(&opts.csv)?;
            let p = t.column("policy")?;
            let (x, y) = (
                t.column("mean_cumulative_entropy_nats")?,
                t.column("accuracy")?,
            );
            let points = (0..t.rows.len())
                .map(|i| Ok((t.rows[i][p].clone(), t.number(i, x)?, t.number(i, y)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            scatter_from_points(&points)
        }
        PlotKind::Sweep => sweep_svg_from_csv(&opts.csv, &opts.x, &opts.y)?,
    };
    let out = opts
        .out
        .clone()
        .unwrap_or_else(|| opts.csv.with_extension("svg"));
    fs::write(&out, svg)?;
    Ok(out)
}
