//! Deterministic SVG plots.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::error::Result;
use crate::hilbert::hilbert_norm;
use crate::interp::AffineSphere;
use crate::projective::ConvexDomain;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = [
    "#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d4880f", "#555555",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: &str, xs: &[f64], ys: &[f64]) -> Self {
        Series {
            label: label.into(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Line chart of several series sharing axes. Non-finite points break lines.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    )
    .expect("string write");
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).expect("string write");
    writeln!(out, r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, W / 2.0, escape(title)).expect("string write");
    writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    )
    .expect("string write");
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{fx:.3}</text>"#, px(fx), H - MARGIN + 16.0).expect("string write");
        writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{fy:.3}</text>"#, MARGIN - 6.0, py(fy) + 4.0).expect("string write");
    }
    writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, W / 2.0, H - 14.0, escape(xlabel)).expect("string write");
    writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    )
    .expect("string write");
    for (n, s) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let mut path = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            write!(
                path,
                "{}{:.2},{:.2} ",
                if pen_down { "L" } else { "M" },
                px(x),
                py(y)
            )
            .expect("string write");
            pen_down = true;
        }
        writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            path.trim_end()
        )
        .expect("string write");
        let ly = MARGIN + 16.0 + 16.0 * n as f64;
        writeln!(out, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, W - MARGIN - 120.0, W - MARGIN - 100.0).expect("string write");
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            W - MARGIN - 94.0,
            ly + 4.0,
            escape(&s.label)
        )
        .expect("string write");
    }
    out.push_str("</svg>\n");
    out
}

fn chart_px(p: &Vector2<f64>) -> (f64, f64) {
    let side = H - 2.0 * MARGIN;
    (
        MARGIN + (p.x + 1.0) / 2.0 * side,
        H - MARGIN - (p.y + 1.0) / 2.0 * side,
    )
}

fn outline(domain: &ConvexDomain) -> String {
    let pts: Vec<Vector2<f64>> = match domain.shape() {
        crate::projective::Shape::Polygon(p) => p.vertices().to_vec(),
        crate::projective::Shape::Ellipse(_) => domain
            .boundary_samples(180)
            .into_iter()
            .map(|(p, _)| p)
            .collect(),
    };
    let mut d = String::new();
    for (k, p) in pts.iter().enumerate() {
        let (x, y) = chart_px(p);
        write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" }).expect("string write");
    }
    d.push('Z');
    format!(r#"<path d="{d}" fill="none" stroke="black" stroke-width="1.2"/>"#)
}

/// Tangent unit balls on an `n × n` lattice of reliable points: Hilbert
/// (blue polygon) and Blaschke (red ellipse), each glyph scaled by the
/// largest Hilbert radius at its centre.
pub fn glyph_field(sphere: &AffineSphere, n: usize) -> Result<String> {
    const DIRS: usize = 48;
    let side = H - 2.0 * MARGIN;
    let cell = side / n as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{H}" height="{H}" viewBox="0 0 {H} {H}">"#
    )
    .expect("string write");
    writeln!(out, r#"<rect width="{H}" height="{H}" fill="white"/>"#).expect("string write");
    writeln!(out, r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">unit balls: Hilbert (blue), Blaschke (red)</text>"#, H / 2.0).expect("string write");
    out.push_str(&outline(sphere.domain()));
    out.push('\n');
    for a in 0..n {
        for b in 0..n {
            let p = Vector2::new(
                -1.0 + (a as f64 + 0.5) * 2.0 / n as f64,
                -1.0 + (b as f64 + 0.5) * 2.0 / n as f64,
            );
            if !sphere.reliable(&p) {
                continue;
            }
            let hm = sphere.h_at(&p)?;
            let mut hil = Vec::with_capacity(DIRS);
            let mut bla = Vec::with_capacity(DIRS);
            for k in 0..DIRS {
                let th = 2.0 * std::f64::consts::PI * k as f64 / DIRS as f64;
                let v = Vector2::new(th.cos(), th.sin());
                hil.push(v / hilbert_norm(sphere.domain(), &p, &v)?);
                bla.push(v / v.dot(&(hm * v)).sqrt());
            }
            let rmax = hil.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let (cx, cy) = chart_px(&p);
            let s = 0.45 * cell / rmax;
            for (pts, color) in [(&hil, "#1f4e9c"), (&bla, "#c0392b")] {
                let mut d = String::new();
                for (k, v) in pts.iter().enumerate() {
                    write!(
                        d,
                        "{}{:.2},{:.2} ",
                        if k == 0 { "M" } else { "L" },
                        cx + s * v.x,
                        cy - s * v.y
                    )
                    .expect("string write");
                }
                d.push('Z');
                writeln!(
                    out,
                    r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="0.9"/>"#
                )
                .expect("string write");
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
