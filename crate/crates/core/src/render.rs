//! SVG output for layouts, leaders and interpolated animation frames.

use std::fmt::Write as _;

use crate::geometry::{Point, Rect};
use crate::layout::{interpolation_frames, LayoutError, SquareLayout};
use crate::leaders::Leader;
use crate::Scalar;

/// Twelve-colour qualitative palette (ColorBrewer "Set3").
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

#[derive(Clone, Debug)]
pub struct RenderStyle {
    pub labels: bool,
    /// Padding around the content, as a fraction of the map diagonal.
    pub padding: f64,
    /// Map diagonal; leader width and padding scale with it.
    pub diagonal: f64,
    pub leader_color: String,
    /// Leader stroke width as a fraction of the diagonal.
    pub leader_width: f64,
}

impl RenderStyle {
    pub fn new(diagonal: f64) -> Self {
        RenderStyle {
            labels: true,
            padding: 0.02,
            diagonal,
            leader_color: "#e00000".into(),
            leader_width: 0.004,
        }
    }
}

/// Palette entry for a region id (FNV-1a hash, stable across runs).
pub fn region_color(id: &str) -> &'static str {
    let mut h: u32 = 0x811c_9dc5;
    for b in id.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    PALETTE[(h % PALETTE.len() as u32) as usize]
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn content_box<T: Scalar>(layout: &SquareLayout<T>, leaders: &[Leader<T>]) -> Rect<f64> {
    let mut b = layout.bbox();
    for l in leaders {
        for p in &l.points {
            b = b.union(&Rect::new(*p, *p));
        }
    }
    Rect::new(
        Point::new(b.min.x.as_f64(), b.min.y.as_f64()),
        Point::new(b.max.x.as_f64(), b.max.y.as_f64()),
    )
}

/// Renders one layout with its leaders.
pub fn render_svg<T: Scalar>(layout: &SquareLayout<T>, leaders: &[Leader<T>], style: &RenderStyle) -> String {
    let frame = content_box(layout, leaders);
    render_svg_in(layout, leaders, style, &frame)
}

/// Renders into a fixed view box (given in map coordinates).
pub fn render_svg_in<T: Scalar>(
    layout: &SquareLayout<T>,
    leaders: &[Leader<T>],
    style: &RenderStyle,
    view: &Rect<f64>,
) -> String {
    let pad = style.padding * style.diagonal;
    // y grows downward in SVG: map y becomes -y
    let (x0, y0) = (view.min.x - pad, -view.max.y - pad);
    let (w, h) = (view.width() + 2.0 * pad, view.height() + 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        num(x0),
        num(y0),
        num(w),
        num(h)
    );
    let font = (style.diagonal * 0.012).max(1e-9);
    let stroke = style.diagonal * 0.001;
    let _ = writeln!(out, r##"<g id="squares" stroke="#333333" stroke-width="{}">"##, num(stroke));
    for r in 0..layout.len() {
        let c = layout.centers[r];
        let s = layout.sides[r].as_f64();
        let _ = writeln!(
            out,
            r#"<rect id="sq-{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            escape(&layout.ids[r]),
            num(c.x.as_f64() - s / 2.0),
            num(-c.y.as_f64() - s / 2.0),
            num(s),
            num(s),
            region_color(&layout.ids[r])
        );
    }
    out.push_str("</g>\n");
    if !leaders.is_empty() {
        let _ = writeln!(
            out,
            r#"<g id="leaders" fill="none" stroke="{}" stroke-width="{}">"#,
            style.leader_color,
            num(style.leader_width * style.diagonal)
        );
        for l in leaders {
            let pts: Vec<String> = l
                .points
                .iter()
                .map(|p| format!("{},{}", num(p.x.as_f64()), num(-p.y.as_f64())))
                .collect();
            let _ = writeln!(out, r#"<polyline points="{}"/>"#, pts.join(" "));
        }
        out.push_str("</g>\n");
    }
    if style.labels {
        let _ = writeln!(
            out,
            r#"<g id="labels" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="central">"#,
            num(font)
        );
        for r in 0..layout.len() {
            let c = layout.centers[r];
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(c.x.as_f64()),
                num(-c.y.as_f64()),
                escape(&layout.ids[r])
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

/// `n` frames morphing `a` into `b`, sharing one view box.
pub fn render_frames<T: Scalar>(
    a: &SquareLayout<T>,
    b: &SquareLayout<T>,
    n: usize,
    style: &RenderStyle,
) -> Result<Vec<String>, LayoutError> {
    let frames = interpolation_frames(a, b, n)?;
    let view = content_box(a, &[]).union(&content_box(b, &[]));
    Ok(frames.iter().map(|f| render_svg_in(f, &[], style, &view)).collect())
}

/// File name of animation frame `i`.
pub fn frame_name(i: usize) -> String {
    format!("frame_{i:04}.svg")
}
