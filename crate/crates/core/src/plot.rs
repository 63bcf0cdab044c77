//! Deterministic SVG charts of a report.

use std::fmt::Write;

use crate::bayes::beta_quantile;
use crate::error::Result;
use crate::report::SolutionSpaceReport;

/// Series drawn per chart; further solutions are omitted.
pub const MAX_SERIES: usize = 10;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; MAX_SERIES] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + (WIDTH - LEFT - RIGHT) * v / self.x_max
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * v / self.y_max
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{title}</text>"#,
        (WIDTH - RIGHT + LEFT) / 2.0
    );
}

fn axes(
    out: &mut String,
    f: &Frame,
    x_label: &str,
    y_label: &str,
    y_ticks: &[f64],
    x_ticks: &[f64],
) {
    let (x0, x1) = (f.x(0.0), f.x(f.x_max));
    let (y0, y1) = (f.y(0.0), f.y(f.y_max));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for &t in y_ticks {
        let y = f.y(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0,
            trim(t)
        );
    }
    for &t in x_ticks {
        let x = f.x(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 4.0,
            y0 + 18.0,
            trim(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn legend(out: &mut String, index: usize, text: &str) {
    let y = TOP + 10.0 + 18.0 * index as f64;
    let x = WIDTH - RIGHT + 15.0;
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{:.2}">{text}</text>"#,
        y - 10.0,
        PALETTE[index],
        x + 18.0,
        y
    );
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn ticks(max: f64, count: usize) -> Vec<f64> {
    let raw = max / count as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(raw);
    let mut out = Vec::new();
    let mut v = 0.0;
    while v <= max + 1e-9 {
        out.push(v);
        v += step;
    }
    out
}

/// Point estimate and interval of one solution after each trial prefix,
/// starting at its discovery.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSeries {
    pub rank: usize,
    /// `(t, p_point, p_lower, p_upper)`.
    pub points: Vec<(u64, f64, f64, f64)>,
}

pub fn confidence_series(report: &SolutionSpaceReport) -> Result<Vec<ConfidenceSeries>> {
    let level = report.config.thresholds.level;
    let tail = (1.0 - level) / 2.0;
    report
        .solutions
        .iter()
        .take(MAX_SERIES)
        .map(|row| {
            let mut count = 0u64;
            let mut points = Vec::new();
            for (i, &s) in report.trial_log.iter().enumerate() {
                if s == row.solution_id {
                    count += 1;
                }
                if count == 0 {
                    continue;
                }
                let t = i as u64 + 1;
                let a = count as f64 + 1.0;
                let b = (t - count) as f64 + 1.0;
                points.push((
                    t,
                    a / (a + b),
                    beta_quantile(a, b, tail)?,
                    beta_quantile(a, b, 1.0 - tail)?,
                ));
            }
            Ok(ConfidenceSeries {
                rank: row.rank,
                points,
            })
        })
        .collect()
}

/// Per-solution point estimate line with its credible ribbon versus the
/// number of trials, recomputed at every prefix of the trial log.
pub fn confidence_svg(report: &SolutionSpaceReport) -> Result<String> {
    let series = confidence_series(report)?;
    let f = Frame {
        x_max: report.t.max(1) as f64,
        y_max: 1.0,
    };
    let mut out = String::new();
    header(&mut out, "Solution probability by number of trials");
    axes(
        &mut out,
        &f,
        "trials",
        "probability",
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        &ticks(f.x_max, 8),
    );
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="4 4"/>"#,
        f.x(0.0),
        f.x(f.x_max),
        y = f.y(0.5)
    );
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i];
        let mut ribbon = String::new();
        for &(t, _, lo, _) in &s.points {
            let _ = write!(ribbon, "{:.2},{:.2} ", f.x(t as f64), f.y(lo));
        }
        for &(t, _, _, hi) in s.points.iter().rev() {
            let _ = write!(ribbon, "{:.2},{:.2} ", f.x(t as f64), f.y(hi));
        }
        let _ = writeln!(
            out,
            r#"<polygon class="ribbon" data-rank="{}" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            s.rank,
            ribbon.trim_end()
        );
        let line: Vec<String> = s
            .points
            .iter()
            .map(|&(t, p, _, _)| format!("{:.2},{:.2}", f.x(t as f64), f.y(p)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="estimate" data-rank="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            s.rank,
            line.join(" ")
        );
        legend(&mut out, i, &format!("solution {}", s.rank));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Descending community sizes of each solution, one series per solution.
pub fn sizes_svg(report: &SolutionSpaceReport) -> String {
    let rows: Vec<_> = report.solutions.iter().take(MAX_SERIES).collect();
    let k_max = rows.iter().map(|r| r.sizes.len()).max().unwrap_or(1).max(1);
    let s_max = rows
        .iter()
        .flat_map(|r| r.sizes.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1);
    let f = Frame {
        x_max: k_max as f64 + 1.0,
        y_max: s_max as f64,
    };
    let mut out = String::new();
    header(&mut out, "Community size distribution");
    let x_ticks: Vec<f64> = ticks(k_max as f64, 8)
        .into_iter()
        .filter(|&t| t >= 1.0)
        .collect();
    axes(
        &mut out,
        &f,
        "community (by size)",
        "size",
        &ticks(f.y_max, 5),
        &x_ticks,
    );
    for (i, r) in rows.iter().enumerate() {
        let color = PALETTE[i];
        let pts: Vec<(f64, f64)> = r
            .sizes
            .iter()
            .enumerate()
            .map(|(j, &s)| (f.x(j as f64 + 1.0), f.y(s as f64)))
            .collect();
        let line: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-rank="{}" points="{}" fill="none" stroke="{color}" stroke-opacity="0.6"/>"#,
            r.rank,
            line.join(" ")
        );
        for ((x, y), s) in pts.iter().zip(&r.sizes) {
            let _ = writeln!(
                out,
                r#"<circle class="size" data-rank="{}" data-size="{s}" cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#,
                r.rank
            );
        }
        legend(&mut out, i, &format!("solution {} (k={})", r.rank, r.k));
    }
    out.push_str("</svg>\n");
    out
}
