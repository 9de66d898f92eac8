//! Upper-half-plane figure of isometric circles and axes.

use std::fmt::Write;

use tracelab_core::moebius::Circle;
use tracelab_core::number::rational_to_f64;

pub struct Figure {
    circles: Vec<(String, f64, f64, &'static str)>,
}

impl Figure {
    pub fn new() -> Self {
        Figure { circles: Vec::new() }
    }

    pub fn add(&mut self, label: &str, circle: &Circle, color: &'static str) {
        let r = rational_to_f64(&circle.radius_sq).sqrt();
        self.circles.push((label.to_string(), rational_to_f64(&circle.center_x), r, color));
    }

    pub fn render(&self) -> String {
        let (mut lo, mut hi, mut top) = (-1.0f64, 1.0f64, 1.0f64);
        for (_, c, r, _) in &self.circles {
            lo = lo.min(c - r);
            hi = hi.max(c + r);
            top = top.max(*r);
        }
        let pad = 0.1 * (hi - lo);
        let (x0, width, height) = (lo - pad, hi - lo + 2.0 * pad, top + pad);
        let stroke = width / 400.0;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.6} {y0:.6} {width:.6} {height:.6}">"#,
            y0 = -top - pad,
        );
        let _ = writeln!(
            out,
            r#"  <line x1="{x0:.6}" y1="0" x2="{x1:.6}" y2="0" stroke="black" stroke-width="{stroke:.6}"/>"#,
            x1 = x0 + width,
        );
        for (label, c, r, color) in &self.circles {
            let _ = writeln!(
                out,
                r#"  <circle cx="{c:.6}" cy="0" r="{r:.6}" fill="none" stroke="{color}" stroke-width="{stroke:.6}"><title>{label}</title></circle>"#,
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
