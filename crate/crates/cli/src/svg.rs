//! Minimal SVG plots of profiles on the unit interval. Presentation only.

use std::fmt::Write;

use hotelling::mixed::{mu, MeasureQuery, MixedProfile};
use hotelling::Rational;

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 40.0;
const ROW: f64 = 36.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn x_of(v: &Rational) -> f64 {
    MARGIN + v.to_f64() * (WIDTH - 2.0 * MARGIN)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// One row per player; each support point is a dot whose opacity is the
/// expected number of that player's facilities there.
pub fn render(title: &str, profile: &MixedProfile) -> String {
    let players = profile.players();
    let height = MARGIN * 2.0 + ROW * players as f64 + 20.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20">{}</text>"#, escape(title));
    let axis_y = MARGIN + ROW * players as f64;
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    for (label, anchor) in [("0", MARGIN), ("1", WIDTH - MARGIN)] {
        let _ = writeln!(
            out,
            r#"<text x="{anchor}" y="{}" text-anchor="middle">{label}</text>"#,
            axis_y + 16.0
        );
    }
    for (i, strategy) in profile.mixed.iter().enumerate() {
        let y = MARGIN + ROW * i as f64 + ROW / 2.0;
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(out, r#"<text x="4" y="{}">P{}</text>"#, y + 4.0, i + 1);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#ccc" stroke-dasharray="2,3"/>"##,
            WIDTH - MARGIN
        );
        for x in strategy.support_positions() {
            let weight = mu(strategy, &MeasureQuery::Point(x.clone()))
                .to_f64()
                .clamp(0.15, 1.0);
            let cx = x_of(&x);
            let _ = writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{y}" r="7" fill="{color}" fill-opacity="{weight:.3}"><title>{x}</title></circle>"#
            );
            let _ = writeln!(
                out,
                r#"<line x1="{cx:.2}" y1="{axis_y}" x2="{cx:.2}" y2="{}" stroke="{color}"/>"#,
                axis_y - 4.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
