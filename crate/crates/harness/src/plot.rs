//! Static SVG plots written as plain text, with no external resources.

use std::fmt::Write as _;

use stochkit::{Problem, RunRecord, Task, Vector};

use crate::error::{HarnessError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 58.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Maps data coordinates to the plot area; `log_y` plots `log10(y)`.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    log_y: bool,
}

impl Frame {
    fn new(xs: (f64, f64), ys: (f64, f64), log_y: bool) -> Self {
        let (mut x0, mut x1) = xs;
        let (mut y0, mut y1) = if log_y { (ys.0.log10(), ys.1.log10()) } else { ys };
        if log_y {
            y0 = y0.floor();
            y1 = y1.ceil();
        }
        widen(&mut x0, &mut x1);
        widen(&mut y0, &mut y1);
        Frame { x0, x1, y0, y1, log_y }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let v = if self.log_y { y.log10() } else { y };
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn widen(lo: &mut f64, hi: &mut f64) {
    if hi.is_nan() || lo.is_nan() || *hi <= *lo {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.5 } else { 1.0 };
        *lo -= pad;
        *hi += pad;
    }
}

/// Round tick positions covering `[lo, hi]`.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !span.is_finite() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64 + 1e-9)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e5 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for x in nice_ticks(f.x0, f.x1, 6) {
        let p = f.px(x);
        let _ = writeln!(
            out,
            r#"<line x1="{p:.1}" y1="{b}" x2="{p:.1}" y2="{:.1}" stroke="black"/><text x="{p:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            b + 5.0,
            b + 18.0,
            fmt_tick(x)
        );
    }
    let yticks: Vec<(f64, String)> = if f.log_y {
        let step = ((f.y1 - f.y0) / 8.0).ceil().max(1.0) as i64;
        (f.y0 as i64..=f.y1 as i64)
            .filter(|e| (e - f.y0 as i64) % step == 0)
            .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
            .collect()
    } else {
        nice_ticks(f.y0, f.y1, 6)
            .into_iter()
            .map(|v| (v, fmt_tick(v)))
            .collect()
    };
    for (v, label) in yticks {
        let p = f.py(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{p:.1}" x2="{l}" y2="{p:.1}" stroke="black"/><line x1="{l}" y1="{p:.1}" x2="{r}" y2="{p:.1}" stroke="#dddddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            l - 5.0,
            l - 8.0,
            p + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    let x = WIDTH - RIGHT + 14.0;
    for (k, (name, c)) in entries.iter().enumerate() {
        let y = TOP + 12.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<g class="legend-entry"><line x1="{x}" y1="{y}" x2="{:.1}" y2="{y}" stroke="{c}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(name)
        );
    }
}

/// A line chart with one polyline per series. Non-finite points and, on a log
/// axis, non-positive points are left out.
pub fn line_chart(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[(String, Vec<(f64, f64)>)],
    log_y: bool,
) -> String {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!log_y || y > 0.0);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied().filter(keep))
        .collect();
    let range = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (xs, ys) = if pts.is_empty() {
        ((0.0, 1.0), if log_y { (1.0, 10.0) } else { (0.0, 1.0) })
    } else {
        (range(&mut pts.iter().map(|p| p.0)), range(&mut pts.iter().map(|p| p.1)))
    };
    let frame = Frame::new(xs, ys, log_y);
    let mut out = String::new();
    open_svg(&mut out, title);
    axes(&mut out, &frame, xlabel, ylabel);
    let mut entries = Vec::new();
    for (k, (name, s)) in series.iter().enumerate() {
        let c = color(k);
        let coords: Vec<String> = s
            .iter()
            .copied()
            .filter(keep)
            .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{c}" stroke-width="1.8" points="{}"/>"#,
            escape(name),
            coords.join(" ")
        );
        entries.push((name.clone(), c));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

pub fn cost_plot(records: &[(String, &RunRecord)]) -> String {
    let series: Vec<(String, Vec<(f64, f64)>)> = records
        .iter()
        .map(|(name, r)| {
            (
                name.clone(),
                r.grad_calc_count
                    .iter()
                    .map(|&g| g as f64)
                    .zip(r.cost.iter().copied())
                    .collect(),
            )
        })
        .collect();
    line_chart(
        "Cost function value",
        "# of gradient evaluations",
        "cost",
        &series,
        true,
    )
}

/// `None` when no record carries a finite optimality gap.
pub fn optgap_plot(records: &[(String, &RunRecord)]) -> Option<String> {
    if !records.iter().any(|(_, r)| r.optgap.iter().any(|g| g.is_finite())) {
        return None;
    }
    let series: Vec<(String, Vec<(f64, f64)>)> = records
        .iter()
        .map(|(name, r)| {
            (
                name.clone(),
                r.grad_calc_count
                    .iter()
                    .map(|&g| g as f64)
                    .zip(r.optgap.iter().copied())
                    .collect(),
            )
        })
        .collect();
    Some(line_chart(
        "Optimality gap",
        "# of gradient evaluations",
        "cost - f*",
        &series,
        true,
    ))
}

/// Scatter of test points over the first two features. Fill encodes the true
/// class; misclassified points get a black ring. For binary problems on two
/// features the decision line is drawn.
pub fn classification_plot(
    problem: &dyn Problem,
    solver: &str,
    w: &Vector,
    x: &stochkit::Matrix,
    y: &Vector,
) -> Result<String> {
    let d = x.ncols();
    if !(2..=3).contains(&d) {
        return Err(HarnessError::UnsupportedDimension {
            kind: "classification",
            needs: "2 or 3 features",
            found: d,
        });
    }
    if problem.task() == Task::Regression {
        return Err(HarnessError::Usage(
            "classification plot needs a classification problem".into(),
        ));
    }
    let pred = problem.predict(w, x);
    let col_range = |j: usize| {
        x.column(j)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    };
    let frame = Frame::new(col_range(0), col_range(1), false);
    let correct = pred.iter().zip(y.iter()).filter(|(p, t)| p == t).count();
    let title = format!(
        "Classification result ({solver}, accuracy {:.1}%)",
        100.0 * correct as f64 / y.len() as f64
    );
    let mut out = String::new();
    open_svg(&mut out, &title);
    axes(&mut out, &frame, "x1", "x2");
    let class_index = |label: f64| -> usize {
        match problem.task() {
            Task::Binary => usize::from(label > 0.0),
            _ => label.max(0.0) as usize,
        }
    };
    if problem.task() == Task::Binary && d == 2 && w[1].abs() > 1e-12 {
        let (a, b) = (frame.x0, frame.x1);
        let line = |x1: f64| -w[0] * x1 / w[1];
        let _ = writeln!(
            out,
            r#"<line class="boundary" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
            frame.px(a),
            frame.py(line(a).clamp(frame.y0, frame.y1)),
            frame.px(b),
            frame.py(line(b).clamp(frame.y0, frame.y1))
        );
    }
    for i in 0..x.nrows() {
        let (cx, cy) = (frame.px(x[(i, 0)]), frame.py(x[(i, 1)]));
        let fill = color(class_index(y[i]));
        let ring = if pred[i] == y[i] { "none" } else { "black" };
        let _ = writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{fill}" fill-opacity="0.8" stroke="{ring}" stroke-width="1.5"/>"#
        );
    }
    let classes = match problem.task() {
        Task::Multiclass { classes } => classes,
        _ => 2,
    };
    let mut entries: Vec<(String, &str)> = (0..classes)
        .map(|c| {
            let name = if problem.task() == Task::Binary {
                ["class -1", "class +1"][c].to_string()
            } else {
                format!("class {c}")
            };
            (name, color(c))
        })
        .collect();
    entries.push(("misclassified (ring)".into(), "black"));
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Iterate paths of two-parameter problems drawn over cost contours.
pub fn trajectory_plot(problem: &dyn Problem, paths: &[(String, &[Vector])]) -> Result<String> {
    if problem.dim() != 2 {
        return Err(HarnessError::UnsupportedDimension {
            kind: "trajectory",
            needs: "a 2-dimensional iterate",
            found: problem.dim(),
        });
    }
    let all: Vec<&Vector> = paths
        .iter()
        .flat_map(|(_, p)| p.iter())
        .filter(|w| w.iter().all(|v| v.is_finite()))
        .collect();
    if all.is_empty() {
        return Err(HarnessError::Usage(
            "trajectory plot needs stored iterates (store_w)".into(),
        ));
    }
    let bounds = |j: usize| {
        let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), w| {
            (a.min(w[j]), b.max(w[j]))
        });
        let pad = 0.1 * (hi - lo).max(1e-3);
        (lo - pad, hi + pad)
    };
    let frame = Frame::new(bounds(0), bounds(1), false);
    let mut out = String::new();
    open_svg(&mut out, "Trajectory of iterates");
    // contours first, so paths sit on top
    const GRID: usize = 60;
    let gx = |i: usize| frame.x0 + (frame.x1 - frame.x0) * i as f64 / GRID as f64;
    let gy = |j: usize| frame.y0 + (frame.y1 - frame.y0) * j as f64 / GRID as f64;
    let values: Vec<Vec<f64>> = (0..=GRID)
        .map(|i| {
            (0..=GRID)
                .map(|j| problem.cost(&Vector::from_vec(vec![gx(i), gy(j)])))
                .collect()
        })
        .collect();
    let finite: Vec<f64> = values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi > lo {
        // levels spaced evenly in log(v − lo) so the basin is resolved
        let span = hi - lo;
        for k in 1..=12 {
            let level = lo + span * 10f64.powf(-3.0 + 3.0 * k as f64 / 12.0);
            let mut d = String::new();
            for i in 0..GRID {
                for j in 0..GRID {
                    let corners = [
                        (gx(i), gy(j), values[i][j]),
                        (gx(i + 1), gy(j), values[i + 1][j]),
                        (gx(i + 1), gy(j + 1), values[i + 1][j + 1]),
                        (gx(i), gy(j + 1), values[i][j + 1]),
                    ];
                    let mut crossings = Vec::with_capacity(4);
                    for e in 0..4 {
                        let (ax, ay, av) = corners[e];
                        let (bx, by, bv) = corners[(e + 1) % 4];
                        if (av < level) != (bv < level) && av.is_finite() && bv.is_finite() {
                            let t = (level - av) / (bv - av);
                            crossings.push((ax + t * (bx - ax), ay + t * (by - ay)));
                        }
                    }
                    for pair in crossings.chunks_exact(2) {
                        let _ = write!(
                            d,
                            "M{:.2},{:.2}L{:.2},{:.2}",
                            frame.px(pair[0].0),
                            frame.py(pair[0].1),
                            frame.px(pair[1].0),
                            frame.py(pair[1].1)
                        );
                    }
                }
            }
            if !d.is_empty() {
                let _ = writeln!(
                    out,
                    r##"<path class="contour" d="{d}" fill="none" stroke="#b0b0b0" stroke-width="0.8"/>"##
                );
            }
        }
    }
    axes(&mut out, &frame, "w1", "w2");
    let mut entries = Vec::new();
    for (k, (name, path)) in paths.iter().enumerate() {
        let c = color(k);
        let coords: Vec<String> = path
            .iter()
            .filter(|w| w.iter().all(|v| v.is_finite()))
            .map(|w| format!("{:.2},{:.2}", frame.px(w[0]), frame.py(w[1])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{c}" stroke-width="1.5" points="{}"/>"#,
            escape(name),
            coords.join(" ")
        );
        if let Some(first) = coords.first() {
            let (x, y) = first.split_once(',').expect("formatted as x,y");
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{c}"/>"#);
        }
        entries.push((name.clone(), c));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}
