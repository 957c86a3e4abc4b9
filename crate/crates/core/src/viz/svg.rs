use std::fmt::Write;

use super::{Primitive, Scene};

/// Fixed three-decimal numbers with trailing zeros dropped.
fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Deterministic SVG for a scene: the same scene always gives the same
/// bytes. An empty scene renders as its frame alone.
pub fn render_svg(scene: &Scene) -> String {
    let v = scene.viewport;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        num(v.x),
        num(v.y),
        num(v.width),
        num(v.height),
        num(v.width),
        num(v.height)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#ffffff" stroke="#cccccc"/>"##,
        num(v.x),
        num(v.y),
        num(v.width),
        num(v.height)
    );
    let l = scene.layout;
    for a in &scene.axes {
        if !a.active {
            continue;
        }
        let (top, bottom) = (l.y(1.0, a.shift), l.y(0.0, a.shift));
        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#000000"/>"##,
            num(top),
            num(bottom),
            x = num(a.x)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            num(a.x),
            num(top - 4.0),
            escape(&a.name)
        );
    }
    for p in &scene.primitives {
        match p {
            Primitive::Polyline {
                points,
                width,
                color,
                ..
            } => {
                out.push_str("<polyline points=\"");
                for (i, pt) in points.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    out.push_str(&num(pt[0]));
                    out.push(',');
                    out.push_str(&num(pt[1]));
                }
                let _ = writeln!(
                    out,
                    r#"" fill="none" stroke="{}" stroke-width="{}"/>"#,
                    escape(color),
                    num(*width)
                );
            }
            Primitive::Band {
                axis,
                y0,
                y1,
                half_width,
                shade,
                color,
                ..
            } => {
                let x = scene.axes.get(*axis).map_or(0.0, |a| a.x);
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{c}" fill-opacity="{}" stroke="{c}" stroke-width="0.5"/>"#,
                    num(x - half_width),
                    num(y0.min(*y1)),
                    num(2.0 * half_width),
                    num((y1 - y0).abs()),
                    num(*shade),
                    c = escape(color)
                );
            }
            Primitive::Marker { x, y, token, .. } => {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{}</text>"#,
                    num(*x),
                    num(*y),
                    escape(token)
                );
            }
            Primitive::Label { text, anchor } => {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
                    num(anchor[0]),
                    num(anchor[1]),
                    escape(text)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1.25), "1.25");
        assert_eq!(num(-0.0001), "0");
        assert_eq!(num(2.0 / 3.0), "0.667");
    }

    #[test]
    fn empty_scene_is_frame_only() {
        let svg = render_svg(&Scene::empty());
        assert_eq!(svg.matches('<').count(), 3);
        assert!(svg.contains("<rect"));
    }
}
