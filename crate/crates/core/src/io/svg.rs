//! Static SVG 1.1 charts on a fixed 800×600 canvas.

use std::fmt::Write;

use crate::analysis::{OutcomeTag, SweepMap};
use crate::integrator::Sample;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e5) {
        format!("{v:.3}")
    } else {
        format!("{v:.3e}")
    }
}

/// Two polylines, `s(t)` and `i(t)`, with linear axes spanning the data range.
pub fn trajectory_svg(samples: &[Sample], title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    if samples.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (t_min, t_max) = (samples[0].t, samples[samples.len() - 1].t);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in samples {
        y_min = y_min.min(s.state.s).min(s.state.i);
        y_max = y_max.max(s.state.s).max(s.state.i);
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let t_span = if t_max > t_min { t_max - t_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |t: f64| LEFT + (t - t_min) / t_span * plot_w;
    let py = |y: f64| TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let axis_labels = [
        (LEFT, HEIGHT - BOTTOM + 20.0, "start", label(t_min)),
        (WIDTH - RIGHT, HEIGHT - BOTTOM + 20.0, "end", label(t_max)),
        (LEFT - 6.0, TOP + 4.0, "end", label(y_max)),
        (LEFT - 6.0, HEIGHT - BOTTOM, "end", label(y_min)),
    ];
    for (x, y, anchor, text) in axis_labels {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">t</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    );

    for (name, color, pick) in [
        ("S", "#1f77b4", (|s: &Sample| s.state.s) as fn(&Sample) -> f64),
        ("I", "#d62728", |s: &Sample| s.state.i),
    ] {
        out.push_str(&format!(r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points=""#));
        for (k, s) in samples.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.2},{:.2}", px(s.t), py(pick(s)));
        }
        out.push_str("\"/>\n");
        let ly = if name == "S" { TOP + 16.0 } else { TOP + 32.0 };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{color}">{name}</text>"#,
            WIDTH - RIGHT - 30.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn color(tag: OutcomeTag) -> &'static str {
    match tag {
        OutcomeTag::Diverged => "#d62728",
        OutcomeTag::CollapseToOrigin => "#7f7f7f",
        OutcomeTag::SDominant => "#2ca02c",
        OutcomeTag::IDominant => "#ff7f0e",
        OutcomeTag::Mixed => "#1f77b4",
        OutcomeTag::StepLimit => "#9467bd",
        OutcomeTag::InvalidParams => "#000000",
    }
}

/// One rectangle per cell; axis1 runs left to right, axis2 bottom to top.
pub fn sweep_svg(map: &SweepMap, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let n1 = map.axis1.values.len().max(1);
    let n2 = map.axis2.values.len().max(1);
    let legend_w = 150.0;
    let plot_w = WIDTH - LEFT - RIGHT - legend_w;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let cw = plot_w / n1 as f64;
    let ch = plot_h / n2 as f64;
    for (a, row) in map.cells.iter().enumerate() {
        for (b, cell) in row.iter().enumerate() {
            let x = LEFT + a as f64 * cw;
            let y = TOP + (n2 - 1 - b) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}"/>"#,
                color(cell.tag)
            );
        }
    }
    let first = |v: &[f64]| v.first().copied().unwrap_or(0.0);
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    let texts = [
        (LEFT, HEIGHT - BOTTOM + 20.0, "start", label(first(&map.axis1.values))),
        (LEFT + plot_w, HEIGHT - BOTTOM + 20.0, "end", label(last(&map.axis1.values))),
        (LEFT + plot_w / 2.0, HEIGHT - 20.0, "middle", map.axis1.param.to_string()),
        (LEFT - 6.0, HEIGHT - BOTTOM, "end", label(first(&map.axis2.values))),
        (LEFT - 6.0, TOP + 12.0, "end", label(last(&map.axis2.values))),
        (LEFT - 6.0, TOP + plot_h / 2.0, "end", map.axis2.param.to_string()),
    ];
    for (x, y, anchor, text) in texts {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#
        );
    }
    let lx = LEFT + plot_w + 16.0;
    for (k, tag) in OutcomeTag::ALL.iter().enumerate() {
        let y = TOP + 20.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.2}" y="{y:.2}" width="12" height="12" fill="{}"/>"#,
            color(*tag)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{tag}</text>"#,
            lx + 18.0,
            y + 10.0
        );
    }
    out.push_str("</svg>\n");
    out
}
