//! Gap-curve plots as standalone SVG.
//!
//! One panel per principal task, stacked vertically with a shared y-scale
//! so forgetting on one task is visually comparable to another. The shaded
//! band in each panel marks the epochs during which that principal
//! participates in the drifting mixture.

use std::fmt::Write as _;

use anyhow::{ensure, Result};
use lifelong_vrp::metrics::MetricsLedger;

const WIDTH: f64 = 860.0;
const PANEL_HEIGHT: f64 = 150.0;
const PANEL_GAP: f64 = 34.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 26.0;
const MARGIN_BOTTOM: f64 = 42.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the full ledger; `interval` is the epoch spacing between adjacent
/// principals and controls the shaded participation bands.
pub fn render(ledger: &MetricsLedger, names: &[String], interval: u32) -> Result<String> {
    let tasks = ledger.tasks();
    let horizon = ledger.horizon();
    ensure!(names.len() == tasks, "{} names for {tasks} tasks", names.len());
    ensure!(interval > 0, "interval must be positive");
    ensure!(horizon > 0, "need at least two evaluation epochs to plot");

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut curves = Vec::with_capacity(tasks);
    for task in 0..tasks {
        let curve = ledger.curve(task)?;
        for &v in &curve {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        curves.push(curve);
    }
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (y_lo, y_hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let height = MARGIN_TOP + tasks as f64 * (PANEL_HEIGHT + PANEL_GAP) - PANEL_GAP + MARGIN_BOTTOM;
    let x_of = |t: u32| MARGIN_LEFT + plot_w * t as f64 / horizon as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH} {height:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<style>text{{font-family:monospace;font-size:12px;fill:#333}}.t{{font-size:13px;font-weight:bold}}</style>"
    );

    for (task, curve) in curves.iter().enumerate() {
        let top = MARGIN_TOP + task as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;
        let y_of = |v: f64| bottom - PANEL_HEIGHT * (v - y_lo) / (y_hi - y_lo);

        // epochs during which this principal is part of the active blend
        let band_from = interval * task.saturating_sub(1) as u32;
        let band_to = (interval * (task as u32 + 1)).min(horizon);
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{PANEL_HEIGHT}\" fill=\"#edf3fb\"/>",
            x_of(band_from),
            x_of(band_to) - x_of(band_from),
        );

        let _ = writeln!(
            out,
            "<text class=\"t\" x=\"{MARGIN_LEFT:.2}\" y=\"{:.2}\">{}</text>",
            top - 7.0,
            escape(&names[task])
        );

        // frame and y ticks at the shared bounds plus zero when visible
        let _ = writeln!(
            out,
            "<rect x=\"{MARGIN_LEFT:.2}\" y=\"{top:.2}\" width=\"{plot_w:.2}\" height=\"{PANEL_HEIGHT}\" fill=\"none\" stroke=\"#999\"/>"
        );
        let mut ticks = vec![y_lo + pad, y_hi - pad];
        if y_lo < 0.0 && y_hi > 0.0 {
            ticks.push(0.0);
        }
        for tick in ticks {
            let y = y_of(tick);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT:.2}\" y2=\"{y:.2}\" stroke=\"#999\"/>",
                MARGIN_LEFT - 4.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{tick:.1}</text>",
                MARGIN_LEFT - 7.0,
                y + 4.0
            );
        }

        let mut points = String::new();
        for (t, &v) in curve.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", x_of(t as u32), y_of(v));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#1a6fb0\" stroke-width=\"1.5\"/>",
            points.trim_end()
        );
    }

    // shared x axis labels under the last panel, one per principal boundary
    let axis_y = height - MARGIN_BOTTOM + 16.0;
    let mut epoch = 0;
    while epoch <= horizon {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{axis_y:.2}\" text-anchor=\"middle\">{epoch}</text>",
            x_of(epoch)
        );
        epoch += interval;
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">epoch</text>",
        MARGIN_LEFT + plot_w / 2.0,
        axis_y + 18.0
    );
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{:.2}\" transform=\"rotate(-90 14 {:.2})\" text-anchor=\"middle\">optimality gap %</text>",
        height / 2.0,
        height / 2.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}
