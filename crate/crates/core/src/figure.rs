//! Static SVG rendering of envs: one panel per env, panels side by side,
//! jumps drawn as vertical segments. Output bytes depend only on the input.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::env::{merge_sorted, PathEnv, PathLine};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureDims {
    /// Width of one panel in pixels.
    pub panel_width: u32,
    pub height: u32,
    pub margin: u32,
}

impl Default for FigureDims {
    fn default() -> Self {
        FigureDims { panel_width: 400, height: 300, margin: 20 }
    }
}

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

/// Vertices of a line's graph: at each breakpoint the left limit, then the
/// value, so jumps become vertical segments.
fn vertices(line: &PathLine, horizon: &Rational) -> Vec<(Rational, Rational)> {
    let grid = merge_sorted(line.breakpoints(), &[Rational::zero(), horizon.clone()]);
    let mut out = Vec::with_capacity(2 * grid.len());
    for t in grid.iter().filter(|t| *t <= horizon) {
        let left = line.left_limit(t);
        let value = line.value(t);
        if left != value {
            out.push((t.clone(), left));
        }
        out.push((t.clone(), value));
    }
    out
}

/// Renders `panels` left to right, each with its own time axis and a shared
/// vertical scale.
pub fn render_svg(panels: &[(&str, &PathEnv)], dims: FigureDims) -> String {
    let FigureDims { panel_width, height, margin } = dims;
    let width = panel_width * panels.len().max(1) as u32;
    let top = panels
        .iter()
        .flat_map(|(_, env)| env.lines().iter().map(|l| l.value(env.horizon())))
        .chain(panels.iter().flat_map(|(_, env)| env.lines().iter().flat_map(|l| vertices(l, env.horizon())).map(|v| v.1)))
        .max()
        .unwrap_or_else(Rational::zero)
        .max(Rational::one());
    let plot_w = f64::from(panel_width.saturating_sub(2 * margin).max(1));
    let plot_h = f64::from(height.saturating_sub(2 * margin).max(1));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    for (p, (title, env)) in panels.iter().enumerate() {
        let left = f64::from(panel_width * p as u32 + margin);
        let bottom = f64::from(height - margin);
        let horizon = env.horizon().to_f64().max(f64::MIN_POSITIVE);
        let x = |t: &Rational| left + t.to_f64() / horizon * plot_w;
        let y = |v: &Rational| bottom - v.to_f64() / top.to_f64() * plot_h;
        let _ = writeln!(svg, r#"<g id="panel-{p}">"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            left,
            f64::from(margin) * 0.75,
            escape(title)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{left:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#cccccc"/>"##,
            f64::from(margin)
        );
        for (i, line) in env.lines().iter().enumerate() {
            let points: Vec<String> =
                vertices(line, env.horizon()).iter().map(|(t, v)| format!("{:.2},{:.2}", x(t), y(v))).collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                PALETTE[i % PALETTE.len()],
                points.join(" ")
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fixtures::{e1, q};

    #[test]
    fn flat_env_draws_horizontal_polylines() {
        let svg = render_svg(&[("flat", &PathEnv::flat(3, q(2)))], FigureDims::default());
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(r#"points="20.00,280.00 380.00,280.00""#));
    }

    #[test]
    fn jumps_are_vertical() {
        let pts = vertices(e1().line(1), &q(3));
        assert!(pts.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1));
        let svg = render_svg(&[("a", &e1()), ("b<c", &e1())], FigureDims::default());
        assert!(svg.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" width="800""#));
        assert!(svg.contains("b&lt;c"));
        assert_eq!(svg, render_svg(&[("a", &e1()), ("b<c", &e1())], FigureDims::default()));
    }
}
