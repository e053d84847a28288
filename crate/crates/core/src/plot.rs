//! SVG scatter of M (horizontal) against JSD similarity (vertical).

use std::fmt::Write as _;

use crate::report::ParsedRow;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlotError {
    #[error("no position has both M and JSD defined")]
    NoDefinedPairs,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn px(v: f64) -> f64 {
    MARGIN_LEFT + v.clamp(0.0, 1.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
}

fn py(v: f64) -> f64 {
    HEIGHT - MARGIN_BOTTOM - v.clamp(0.0, 1.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
}

/// Renders one labelled point per row with both values defined. Rows whose
/// id is in `marked` get an arrow pointing at them.
pub fn scatter_svg<S: AsRef<str>>(rows: &[ParsedRow], marked: &[S]) -> Result<String, PlotError> {
    let points: Vec<(&str, f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r.id.as_str(), r.m_measure?, r.jsd?)))
        .collect();
    if points.is_empty() {
        return Err(PlotError::NoDefinedPairs);
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    svg.push_str(concat!(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto">"#,
        r#"<path d="M0,0 L10,5 L0,10 z" fill="crimson"/></marker></defs>"#,
        "\n"
    ));
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    let (x0, x1, y0, y1) = (px(0.0), px(1.0), py(0.0), py(1.0));
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y0}" x2="{}" y2="{}"/>"#,
            px(t),
            px(t),
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{x0}" y1="{}" x2="{}" y2="{}"/>"#,
            py(t),
            x0 - 5.0,
            py(t)
        );
    }
    svg.push_str("</g>\n");
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{t:.1}</text>"#,
            px(t),
            y0 + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#,
            x0 - 8.0,
            py(t) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">M-measure</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {})">JSD similarity</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (id, m, j) in points {
        let (x, y) = (px(m), py(j));
        let id = escape(id);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="steelblue"><title>{id}</title></circle>"#
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{id}</text>"#, x + 5.0, y - 5.0);
        if marked.iter().any(|s| escape(s.as_ref()) == id) {
            // Arrow from the lower left, ending just short of the point.
            let _ = writeln!(
                svg,
                r#"<line class="outlier" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5" marker-end="url(#arrow)"/>"#,
                x - 40.0,
                y + 40.0,
                x - 6.0,
                y + 6.0
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
