//! Standalone SVG learning-curve charts.

use std::fmt::Write as _;
use std::path::Path;

use fraclms::DB_FLOOR;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Mse,
    Nwd,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Mse => "mse",
            PlotKind::Nwd => "nwd",
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            PlotKind::Mse => "MSE (dB)",
            PlotKind::Nwd => "NWD (dB)",
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mse" => Ok(PlotKind::Mse),
            "nwd" => Ok(PlotKind::Nwd),
            other => Err(format!("unknown plot kind {other:?} (expected mse or nwd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurve {
    pub label: String,
    pub values: Vec<f64>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders one line chart with a polyline and legend entry per curve.
/// Output depends only on the input.
pub fn render_svg(curves: &[PlotCurve], kind: PlotKind, title: &str) -> String {
    let finite = curves
        .iter()
        .flat_map(|c| c.values.iter().copied())
        .filter(|v| v.is_finite() && *v > DB_FLOOR);
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let step = nice_step(hi - lo);
    let y_min = (lo / step).floor() * step;
    let y_max = (hi / step).ceil() * step;
    let n_max = curves
        .iter()
        .map(|c| c.values.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let x_max = (n_max - 1) as f64;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |i: f64| LEFT + i / x_max * plot_w;
    let sy = |v: f64| {
        let v = v.clamp(y_min, y_max);
        TOP + (y_max - v) / (y_max - y_min) * plot_h
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // y grid and ticks
    let mut tick = y_min;
    while tick <= y_max + step * 1e-6 {
        let y = sy(tick);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            format_tick(tick)
        );
        tick += step;
    }
    // x ticks
    let x_step = nice_step(x_max).max(1.0);
    let mut xt = 0.0;
    while xt <= x_max + 1e-9 {
        let x = sx(xt);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.1}" x2="{x:.2}" y2="{:.1}" stroke="#000"/>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 18.0,
            format_tick(xt)
        );
        xt += x_step;
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.1}" y="{TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#000"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Iteration</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        kind.axis_label()
    );

    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::with_capacity(curve.values.len() * 16);
        for (n, &v) in curve.values.iter().enumerate() {
            if !points.is_empty() {
                points.push(' ');
            }
            let v = if v.is_finite() { v } else { y_min };
            let _ = write!(points, "{:.2},{:.2}", sx(n as f64), sy(v));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
    }

    // legend
    for (i, curve) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 16.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r.fract() == 0.0 {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Writes [`render_svg`] output to `path`.
pub fn emit_plot(curves: &[PlotCurve], path: &Path, kind: PlotKind, title: &str) -> Result<()> {
    if curves.is_empty() || curves.iter().all(|c| c.values.is_empty()) {
        return Err(HarnessError::format(path, "nothing to plot"));
    }
    std::fs::write(path, render_svg(curves, kind, title)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_curve_and_legend_entries() {
        let one = [PlotCurve {
            label: "flat".into(),
            values: vec![-3.0; 10],
        }];
        let svg = render_svg(&one, PlotKind::Mse, "t");
        assert_eq!(svg.matches("<polyline").count(), 1);

        let two = [
            PlotCurve {
                label: "FLMS".into(),
                values: vec![0.0, -5.0, -10.0],
            },
            PlotCurve {
                label: "RVSS-FLMS".into(),
                values: vec![0.0, -8.0, -10.0],
            },
        ];
        let svg = render_svg(&two, PlotKind::Nwd, "t");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 2);
        assert!(svg.contains("NWD (dB)") && svg.contains("Iteration"));
        assert_eq!(svg, render_svg(&two, PlotKind::Nwd, "t"));
    }

    #[test]
    fn floor_values_do_not_stretch_the_axis() {
        let c = [PlotCurve {
            label: "x".into(),
            values: vec![0.0, -20.0, DB_FLOOR],
        }];
        let svg = render_svg(&c, PlotKind::Nwd, "t");
        assert!(!svg.contains(">-320<"));
    }

    #[test]
    fn empty_input_is_rejected() {
        let dir = std::env::temp_dir().join("fraclms-empty-plot.svg");
        assert!(emit_plot(&[], &dir, PlotKind::Mse, "t").is_err());
    }
}
