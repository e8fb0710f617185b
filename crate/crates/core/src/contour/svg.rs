use std::fmt::Write as _;

use super::{ContourSet, ScalarField};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    pub width: u32,
    pub height: u32,
    /// Blank border around the plot area, pixels.
    pub margin: u32,
    pub title: Option<String>,
    /// Provenance text placed in the document's `<desc>` element.
    pub description: Option<String>,
    pub axis_names: [String; 2],
    pub shade_color: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            margin: 60,
            title: None,
            description: None,
            axis_names: ["x".into(), "y".into()],
            shade_color: "#d6e6f5".into(),
        }
    }
}

/// One family of curves drawn in a single colour.
#[derive(Debug, Clone)]
pub struct Layer<'a, S> {
    pub contours: &'a ContourSet<S>,
    pub stroke: String,
    pub label: Option<String>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    /// Data `+y` points up the page.
    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }
}

/// Renders contour layers over the data box `bounds`, optionally shading
/// the nodes of `shading` where the field is `>= 0`.
///
/// The frame is a `<rect>` and axes are `<line>`s, so the number of `<path>`
/// elements equals the number of polylines.
pub fn render_svg<S: Scalar>(
    bounds: [(S, S); 2],
    layers: &[Layer<'_, S>],
    shading: Option<&ScalarField<S>>,
    style: &SvgStyle,
) -> String {
    let (w, h, m) = (style.width as f64, style.height as f64, style.margin as f64);
    let f = Frame {
        x0: bounds[0].0.as_f64(),
        x1: bounds[0].1.as_f64(),
        y0: bounds[1].0.as_f64(),
        y1: bounds[1].1.as_f64(),
        left: m,
        right: w - m,
        top: m,
        bottom: h - m,
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    if let Some(d) = &style.description {
        let _ = writeln!(s, "<desc>{}</desc>", escape(d));
    }
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#, style.width, style.height);

    if let Some(field) = shading.filter(|fl| fl.dim() == 2) {
        let (nx, ny) = (field.resolution()[0], field.resolution()[1]);
        let hx = field.spacing(0).as_f64() / 2.0;
        let hy = field.spacing(1).as_f64() / 2.0;
        let _ = writeln!(s, r#"<g fill="{}" stroke="none">"#, escape(&style.shade_color));
        for j in 0..ny {
            let y = field.coordinate(1, j).as_f64();
            let (ya, yb) = ((y - hy).max(f.y0), (y + hy).min(f.y1));
            let mut i = 0;
            while i < nx {
                if field.values()[j * nx + i] < S::zero() {
                    i += 1;
                    continue;
                }
                let start = i;
                while i < nx && field.values()[j * nx + i] >= S::zero() {
                    i += 1;
                }
                let xa = (field.coordinate(0, start).as_f64() - hx).max(f.x0);
                let xb = (field.coordinate(0, i - 1).as_f64() + hx).min(f.x1);
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                    f.px(xa),
                    f.py(yb),
                    f.px(xb) - f.px(xa),
                    f.py(ya) - f.py(yb)
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    // axes through the origin when it is in view
    let _ = writeln!(s, r##"<g stroke="#888888" stroke-width="1">"##);
    if f.x0 < 0.0 && 0.0 < f.x1 {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            f.px(0.0),
            f.top,
            f.px(0.0),
            f.bottom
        );
    }
    if f.y0 < 0.0 && 0.0 < f.y1 {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            f.left,
            f.py(0.0),
            f.right,
            f.py(0.0)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        f.left,
        f.top,
        f.right - f.left,
        f.bottom - f.top
    );

    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="14" fill="black">"#);
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#, escape(text));
    };
    label(&mut s, f.left, f.bottom + 20.0, "middle", &format!("{}", f.x0));
    label(&mut s, f.right, f.bottom + 20.0, "middle", &format!("{}", f.x1));
    label(&mut s, f.left - 8.0, f.bottom + 5.0, "end", &format!("{}", f.y0));
    label(&mut s, f.left - 8.0, f.top + 5.0, "end", &format!("{}", f.y1));
    label(&mut s, (f.left + f.right) / 2.0, f.bottom + 40.0, "middle", &style.axis_names[0]);
    label(&mut s, f.left - 40.0, (f.top + f.bottom) / 2.0, "middle", &style.axis_names[1]);
    if let Some(t) = &style.title {
        label(&mut s, w / 2.0, m / 2.0, "middle", t);
    }
    for (k, layer) in layers.iter().enumerate() {
        if let Some(name) = &layer.label {
            let y = f.top + 20.0 + 18.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" fill="{}">{}</text>"#,
                f.right - 8.0,
                escape(&layer.stroke),
                escape(name)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    for layer in layers {
        let _ = writeln!(s, r#"<g fill="none" stroke="{}" stroke-width="2">"#, escape(&layer.stroke));
        for line in &layer.contours.polylines {
            let mut d = String::new();
            for (k, p) in line.points.iter().enumerate() {
                let cmd = if k == 0 { 'M' } else { 'L' };
                let _ = write!(d, "{cmd}{:.2},{:.2} ", f.px(p[0].as_f64()), f.py(p[1].as_f64()));
            }
            if line.closed {
                d.push('Z');
            }
            let _ = writeln!(s, r#"<path d="{}"/>"#, d.trim_end());
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}
