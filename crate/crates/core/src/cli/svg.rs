//! Static SVG 1.1 scatter plot of LDA coordinates.

use std::fmt::Write as _;

use super::LdaPoint;
use crate::corpus::Domain;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 60.0;
const TOP: f64 = 40.0;
const PLOT_W: f64 = 460.0;
const PLOT_H: f64 = 420.0;

fn color(d: Domain) -> &'static str {
    match d {
        Domain::Appearance => "#1f77b4",
        Domain::ThoughtContent => "#ff7f0e",
        Domain::Interpersonal => "#2ca02c",
        Domain::Mood => "#d62728",
        Domain::Occupation => "#9467bd",
        Domain::ThoughtProcess => "#8c564b",
        Domain::Substance => "#e377c2",
        Domain::Other => "#7f7f7f",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Points colored by domain, with axes, tick labels and a legend listing the
/// domains present.
pub fn lda_svg(points: &[LdaPoint]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.xy[0]);
        x1 = x1.max(p.xy[0]);
        y0 = y0.min(p.xy[1]);
        y1 = y1.max(p.xy[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let span = if hi > lo { hi - lo } else { 1.0 };
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * PLOT_W;
    let sy = |y: f64| TOP + PLOT_H - (y - y0) / (y1 - y0) * PLOT_H;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">Two-component LDA of paragraph vectors</text>"#,
        LEFT + PLOT_W / 2.0
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{PLOT_W}" height="{PLOT_H}" fill="none" stroke="#333333"/>"##
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{xv:.2}</text>"#,
            sx(xv),
            TOP + PLOT_H + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{yv:.2}</text>"#,
            LEFT - 6.0,
            sy(yv) + 3.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">LD1</text>"#,
        LEFT + PLOT_W / 2.0,
        TOP + PLOT_H + 32.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">LD2</text>"#,
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0
    );
    let _ = writeln!(s, "<g fill-opacity=\"0.7\">");
    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"><title>{}</title></circle>"#,
            sx(p.xy[0]),
            sy(p.xy[1]),
            color(p.domain),
            escape(&p.id)
        );
    }
    let _ = writeln!(s, "</g>");
    let present: Vec<Domain> = Domain::ALL
        .into_iter()
        .filter(|d| points.iter().any(|p| p.domain == *d))
        .collect();
    let lx = LEFT + PLOT_W + 24.0;
    for (i, d) in present.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{y}" width="12" height="12" fill="{}"/>"#,
            color(*d)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 18.0,
            y + 10.0,
            d.display_name()
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}
