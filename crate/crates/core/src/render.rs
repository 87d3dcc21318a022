//! SVG drawings of embedded trees.
//!
//! One distance unit is 100 px and the y axis points up. Elements are
//! emitted in label order and coordinates are printed with three decimals,
//! so the output is byte-identical for identical input.

use std::fmt::Write;

use crate::geometry::Point;
use crate::scalar::{ceil_eps, Scalar};
use crate::tree::EmbeddedTree;

pub const PX_PER_UNIT: f64 = 100.0;
pub const TERMINAL_RADIUS: f64 = 8.0;
pub const STEINER_RADIUS: f64 = 6.0;
pub const BEAD_RADIUS: f64 = 2.5;
const MARGIN: f64 = 40.0;
/// Side of the unit-ball inset box.
const INSET: f64 = 80.0;

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn escape(label: &str) -> String {
    label.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders `tree` with its subdivision beads and, for polygon norms, the
/// unit ball in the top-left corner.
pub fn render_svg<T: Scalar>(tree: &EmbeddedTree<T>) -> String {
    let t = tree.topology();
    let pos: Vec<Point<f64>> = tree.positions().iter().map(|p| p.cast::<f64>()).collect();
    let (mut min_x, mut min_y, mut max_x, mut max_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &pos {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let inset = tree.norm().ball().is_some();
    let top = if inset { MARGIN + INSET } else { MARGIN };
    let width = (max_x - min_x) * PX_PER_UNIT + 2.0 * MARGIN;
    let height = (max_y - min_y) * PX_PER_UNIT + top + MARGIN;
    let sx = |p: Point<f64>| num((p.x - min_x) * PX_PER_UNIT + MARGIN);
    let sy = |p: Point<f64>| num((max_y - p.y) * PX_PER_UNIT + top);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    )
    .unwrap();
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(ball) = tree.norm().ball() {
        let scale = ball.vertices().iter().map(|v| v.cast::<f64>().length()).fold(0.0, f64::max);
        let r = (INSET / 2.0 - 6.0) / scale;
        let (cx, cy) = (MARGIN / 2.0 + INSET / 2.0, MARGIN / 2.0 + INSET / 2.0);
        let pts: Vec<String> = ball
            .vertices()
            .iter()
            .map(|v| {
                let v = v.cast::<f64>();
                format!("{},{}", num(cx + v.x * r), num(cy - v.y * r))
            })
            .collect();
        writeln!(
            svg,
            r##"<g class="unit-ball"><rect x="{}" y="{}" width="{i}" height="{i}" fill="none" stroke="#999"/><polygon points="{}" fill="#eef" stroke="#336"/></g>"##,
            num(MARGIN / 2.0),
            num(MARGIN / 2.0),
            pts.join(" "),
            i = num(INSET)
        )
        .unwrap();
    }

    let mut edges: Vec<(String, String, usize, usize)> = t
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (a, b) = if t.label(a) <= t.label(b) { (a, b) } else { (b, a) };
            (escape(t.label(a)), escape(t.label(b)), a, b)
        })
        .collect();
    edges.sort();
    svg.push_str("<g class=\"edges\" stroke=\"#444\" stroke-width=\"1.5\">\n");
    for (la, lb, a, b) in &edges {
        writeln!(
            svg,
            r#"<line data-edge="{la}-{lb}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            sx(pos[*a]),
            sy(pos[*a]),
            sx(pos[*b]),
            sy(pos[*b])
        )
        .unwrap();
    }
    svg.push_str("</g>\n<g class=\"beads\" fill=\"#c33\">\n");
    for (_, _, a, b) in &edges {
        let k = ceil_eps(tree.norm().distance(tree.position(*a), tree.position(*b)));
        for i in 1..k {
            let p = pos[*a].lerp(pos[*b], i as f64 / k as f64);
            writeln!(svg, r#"<circle class="bead" cx="{}" cy="{}" r="{}"/>"#, sx(p), sy(p), num(BEAD_RADIUS)).unwrap();
        }
    }
    svg.push_str("</g>\n");

    let mut nodes: Vec<usize> = (0..t.node_count()).collect();
    nodes.sort_by(|&a, &b| t.label(a).cmp(t.label(b)));
    for &v in nodes.iter().filter(|&&v| !t.is_terminal(v)) {
        writeln!(
            svg,
            r##"<circle class="steiner" data-label="{}" cx="{}" cy="{}" r="{}" fill="white" stroke="#226" stroke-width="2"/>"##,
            escape(t.label(v)),
            sx(pos[v]),
            sy(pos[v]),
            num(STEINER_RADIUS)
        )
        .unwrap();
    }
    for &v in nodes.iter().filter(|&&v| t.is_terminal(v)) {
        writeln!(
            svg,
            r##"<circle class="terminal" data-label="{}" cx="{}" cy="{}" r="{}" fill="#226"/>"##,
            escape(t.label(v)),
            sx(pos[v]),
            sy(pos[v]),
            num(TERMINAL_RADIUS)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            num((pos[v].x - min_x) * PX_PER_UNIT + MARGIN + TERMINAL_RADIUS + 2.0),
            num((max_y - pos[v].y) * PX_PER_UNIT + top - TERMINAL_RADIUS),
            escape(t.label(v))
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
