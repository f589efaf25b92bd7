//! Polyline charts written as plain SVG text.

use std::fmt::Write as _;

use crate::io::fmt12;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart<'_> {
    pub fn render(&self, series: &[Series]) -> String {
        let tx = |v: f64| if self.log_x { v.ln() } else { v };
        let ty = |v: f64| if self.log_y { v.ln() } else { v };
        let usable = |&(x, y): &(f64, f64)| (!self.log_x || x > 0.0) && (!self.log_y || y > 0.0);
        let pts = || series.iter().flat_map(|s| s.points.iter().filter(|p| usable(p)));
        let (x0, x1) = range(pts().map(|p| tx(p.0)));
        let (y0, y1) = range(pts().map(|p| ty(p.1)));
        let px = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (ty(y) - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
        let back = |v: f64, log: bool| if log { v.exp() } else { v };

        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(self.title));
        let (left, right, top, bottom) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(out, r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#);
        for (k, frac) in [0.0, 0.5, 1.0].iter().enumerate() {
            let xv = back(x0 + frac * (x1 - x0), self.log_x);
            let yv = back(y0 + frac * (y1 - y0), self.log_y);
            let x = left + frac * (right - left);
            let y = bottom - frac * (bottom - top);
            let anchor = ["start", "middle", "end"][k];
            let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#, bottom + 16.0, fmt_tick(xv));
            let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, left - 6.0, fmt_tick(yv));
        }
        let scale = |log: bool| if log { " (log)" } else { "" };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}{}</text>"#,
            W / 2.0,
            H - 20.0,
            escape(self.x_label),
            scale(self.log_x)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(self.y_label),
            scale(self.log_y)
        );
        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> =
                s.points.iter().filter(|p| usable(p)).map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#, coords.join(" "));
            for c in &coords {
                let (cx, cy) = c.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
            }
            let ly = top + 8.0 + 16.0 * i as f64;
            let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, right - 150.0, right - 130.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, right - 124.0, ly + 4.0, escape(&s.name));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn fmt_tick(v: f64) -> String {
    let s = fmt12(v);
    if s.len() > 8 {
        format!("{v:.3e}")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_point() {
        let chart = Chart { title: "t", x_label: "n", y_label: "OD", log_x: true, log_y: true };
        let svg = chart.render(&[Series { name: "a<b".into(), points: vec![(1.0, 2.0), (2.0, 1.0), (4.0, 0.5)] }]);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a&lt;b"));
    }
}
