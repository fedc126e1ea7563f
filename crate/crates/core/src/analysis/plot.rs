//! Minimal deterministic SVG rendering.

use std::fmt::Write;

use super::pareto::ParetoFront;
use super::sweep::TradeoffPoint;
use super::violin::ViolinSummary;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 48.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn unit(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{:.3}" stroke="black"/>"#,
        HEIGHT - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.3}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {:.3})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn px(axis: &Axis, v: f64) -> f64 {
    MARGIN + axis.unit(v) * (WIDTH - 2.0 * MARGIN)
}

fn py(axis: &Axis, v: f64) -> f64 {
    HEIGHT - MARGIN - axis.unit(v) * (HEIGHT - 2.0 * MARGIN)
}

/// Every sweep point as a grey circle and the front as one polyline with a
/// vertex per front point.
pub fn front_svg(cloud: &[TradeoffPoint], front: &ParetoFront) -> String {
    let cloud: Vec<(f64, f64)> = cloud
        .iter()
        .filter_map(|p| {
            let u = front.notion.unfairness(p.value(front.notion)?, front.scale);
            u.is_finite().then_some((u, p.accuracy))
        })
        .collect();
    let xs = Axis::fit(
        cloud
            .iter()
            .map(|c| c.0)
            .chain(front.points.iter().map(|p| p.unfairness)),
    );
    let ys = Axis::fit(
        cloud
            .iter()
            .map(|c| c.1)
            .chain(front.points.iter().map(|p| p.accuracy)),
    );
    let mut out = String::new();
    open(
        &mut out,
        &format!("{} ({})", front.notion_name, front.notion.label()),
        "unfairness",
        "accuracy",
    );
    for (u, a) in &cloud {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="#999999"/>"##,
            px(&xs, *u),
            py(&ys, *a)
        );
    }
    let vertices: Vec<String> = front
        .points
        .iter()
        .map(|p| format!("{:.3},{:.3}", px(&xs, p.unfairness), py(&ys, p.accuracy)))
        .collect();
    let _ = writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
        vertices.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Mirrored density outlines side by side with median and quartile marks.
pub fn violin_svg(title: &str, violins: &[ViolinSummary]) -> String {
    let ys = Axis::fit(violins.iter().flat_map(|v| v.grid.iter().copied()));
    let slot = (WIDTH - 2.0 * MARGIN) / violins.len().max(1) as f64;
    let mut out = String::new();
    let variable = violins.first().map(|v| v.variable.as_str()).unwrap_or("");
    open(&mut out, title, "group", variable);
    for (i, v) in violins.iter().enumerate() {
        let centre = MARGIN + slot * (i as f64 + 0.5);
        let peak = v.density.iter().copied().fold(0.0, f64::max);
        let half = if peak > 0.0 { 0.45 * slot / peak } else { 0.0 };
        let right = v
            .grid
            .iter()
            .zip(&v.density)
            .map(|(g, d)| (centre + d * half, py(&ys, *g)));
        let left = v
            .grid
            .iter()
            .zip(&v.density)
            .rev()
            .map(|(g, d)| (centre - d * half, py(&ys, *g)));
        let outline: Vec<String> = right
            .chain(left)
            .map(|(x, y)| format!("{x:.3},{y:.3}"))
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="#5dade2" fill-opacity="0.6" stroke="#1b4f72"/>"##,
            outline.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<line x1="{centre:.3}" y1="{:.3}" x2="{centre:.3}" y2="{:.3}" stroke="black" stroke-width="3"/>"#,
            py(&ys, v.q1),
            py(&ys, v.q3)
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{centre:.3}" cy="{:.3}" r="3" fill="white" stroke="black"/>"#,
            py(&ys, v.median)
        );
        let _ = writeln!(
            out,
            r#"<text x="{centre:.3}" y="{:.3}" text-anchor="middle" font-size="11">{} (n={})</text>"#,
            HEIGHT - MARGIN + 16.0,
            escape(&v.group),
            v.n
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{pareto_front, violin_summary, Bandwidth};
    use crate::group_metrics::FairnessNotion;

    fn point(seed: u64, u: f64, acc: f64) -> TradeoffPoint {
        let mut fairness = vec![None; 16];
        fairness[0] = Some(u);
        TradeoffPoint {
            lambda: 0.0,
            seed,
            accuracy: acc,
            ad: 0.0,
            fairness,
        }
    }

    #[test]
    fn front_polyline_has_one_vertex_per_point() {
        let cloud = vec![point(0, 0.1, 0.6), point(1, 0.2, 0.7), point(2, 0.3, 0.65)];
        let front = pareto_front(&cloud, FairnessNotion::ALL[0]).unwrap();
        let svg = front_svg(&cloud, &front);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
        let pts = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert_eq!(pts.split(' ').count(), front.points.len());
        assert_eq!(svg, front_svg(&cloud, &front));
    }

    #[test]
    fn violin_renders_each_group() {
        let a = violin_summary(&[1.0, 2.0, 3.0], 32, Bandwidth::Auto)
            .unwrap()
            .labeled("age", "a");
        let b = violin_summary(&[2.0, 5.0], 32, Bandwidth::Auto)
            .unwrap()
            .labeled("age", "b<");
        let svg = violin_svg("age by race", &[a, b]);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains("b&lt; (n=2)"));
    }
}
