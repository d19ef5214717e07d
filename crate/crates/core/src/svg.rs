//! Deterministic SVG drawings of curves, crossings and snake neighbourhoods.
//!
//! The annulus is drawn as its fundamental rectangle `[0,1] × [0,1]`
//! (θ to the right, s upwards) with the identified edges marked as seams;
//! curves are drawn on every sheet that meets the rectangle and clipped.

use crate::curve::Curve;
use crate::geometry::{wrap_delta, Point, Surface};
use crate::intersect::IntersectionPattern;
use crate::obstruction::ObstructionReport;
use std::fmt::Write;

const SIZE: f64 = 520.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 4] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad"];

fn to_px(surface: Surface, x: f64, y: f64) -> (f64, f64) {
    let span = SIZE - 2.0 * MARGIN;
    match surface {
        Surface::Annulus => (MARGIN + x * span, SIZE - MARGIN - y * span),
        Surface::Disk => (SIZE / 2.0 + x * span / 2.0, SIZE / 2.0 - y * span / 2.0),
    }
}

fn scale(surface: Surface) -> f64 {
    let span = SIZE - 2.0 * MARGIN;
    match surface {
        Surface::Annulus => span,
        Surface::Disk => span / 2.0,
    }
}

fn polyline(out: &mut String, surface: Surface, pts: impl Iterator<Item = [f64; 2]>, class: &str, color: &str) {
    let coords: Vec<String> = pts
        .map(|p| {
            let (x, y) = to_px(surface, p[0], p[1]);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    writeln!(
        out,
        r#"  <polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    )
    .unwrap();
}

/// Render curves with optional crossings and snake neighbourhoods.
pub fn render_svg(
    curves: &[&Curve],
    pattern: Option<&IntersectionPattern>,
    report: Option<&ObstructionReport>,
) -> String {
    let surface = curves
        .first()
        .map(|c| c.surface())
        .or(pattern.map(|p| p.surface))
        .unwrap_or(Surface::Annulus);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .unwrap();
    let k = scale(surface);
    match surface {
        Surface::Annulus => {
            let (x0, y0) = to_px(surface, 0.0, 1.0);
            writeln!(out, r#"  <defs><clipPath id="domain"><rect x="{x0:.3}" y="{y0:.3}" width="{k:.3}" height="{k:.3}"/></clipPath></defs>"#).unwrap();
            writeln!(out, r##"  <rect class="surface" x="{x0:.3}" y="{y0:.3}" width="{k:.3}" height="{k:.3}" fill="#fafafa" stroke="#333"/>"##).unwrap();
            for theta in [0.0, 1.0] {
                let (x, _) = to_px(surface, theta, 0.0);
                writeln!(
                    out,
                    r##"  <line class="seam" x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="#999" stroke-dasharray="6 4" stroke-width="3"/>"##,
                    y0,
                    y0 + k
                )
                .unwrap();
            }
        }
        Surface::Disk => {
            let (cx, cy) = to_px(surface, 0.0, 0.0);
            writeln!(
                out,
                r#"  <defs><clipPath id="domain"><circle cx="{cx:.3}" cy="{cy:.3}" r="{k:.3}"/></clipPath></defs>"#
            )
            .unwrap();
            writeln!(
                out,
                r##"  <circle class="surface" cx="{cx:.3}" cy="{cy:.3}" r="{k:.3}" fill="#fafafa" stroke="#333"/>"##
            )
            .unwrap();
        }
    }
    writeln!(out, r#"  <g clip-path="url(#domain)">"#).unwrap();
    if let (Some(pat), Some(rep)) = (pattern, report) {
        for t in &rep.triples {
            let pts: Vec<Point> = t.indices.iter().map(|&i| pat.points[i].location).collect();
            let (cx, cy) = match surface {
                Surface::Annulus => {
                    let base = pts[0].x;
                    let mean_dx = pts.iter().map(|p| wrap_delta(p.x - base)).sum::<f64>() / 3.0;
                    (base + mean_dx, pts.iter().map(|p| p.y).sum::<f64>() / 3.0)
                }
                Surface::Disk => (
                    pts.iter().map(|p| p.x).sum::<f64>() / 3.0,
                    pts.iter().map(|p| p.y).sum::<f64>() / 3.0,
                ),
            };
            let reach = pts
                .iter()
                .map(|p| surface.distance(*p, Point::new(cx, cy)))
                .fold(0.0, f64::max);
            let r = (reach + t.isolation_radius) * k;
            let shifts: &[f64] = match surface {
                Surface::Annulus => &[-1.0, 0.0, 1.0],
                Surface::Disk => &[0.0],
            };
            for &sh in shifts {
                let (px, py) = to_px(surface, cx + sh, cy);
                writeln!(out, r##"  <circle class="snake" cx="{px:.3}" cy="{py:.3}" r="{r:.3}" fill="#f5c542" fill-opacity="0.35" stroke="#d4a017"/>"##).unwrap();
            }
        }
    }
    for (n, c) in curves.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let class = format!("curve curve-{n}");
        let path = c.path();
        match surface {
            Surface::Annulus => {
                let lo = path.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min).floor() as i64;
                let hi = path.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
                for sheet in lo..hi.max(lo + 1) {
                    let off = sheet as f64;
                    polyline(
                        &mut out,
                        surface,
                        path.iter().map(|p| [p[0] - off, p[1]]),
                        &class,
                        color,
                    );
                }
            }
            Surface::Disk => polyline(&mut out, surface, path.iter().copied(), &class, color),
        }
    }
    writeln!(out, "  </g>").unwrap();
    if let Some(pat) = pattern {
        for p in &pat.points {
            let (x, y) = to_px(surface, p.location.x, p.location.y);
            let label = if p.sign > 0 { "+" } else { "\u{2212}" };
            writeln!(
                out,
                r#"  <circle class="crossing" cx="{x:.3}" cy="{y:.3}" r="3.5" fill="black"/>"#
            )
            .unwrap();
            writeln!(
                out,
                r#"  <text class="sign" x="{:.3}" y="{:.3}" font-size="11" font-family="sans-serif">{label}</text>"#,
                x + 5.0,
                y - 5.0
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}
