//! Hilbert distance, Finsler norm, balls and geodesics.

use std::fmt::Write as _;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::projective::{Containment, ConvexDomain, ProjectivePoint, BOUNDARY_TOL};

/// `d^H(x, y)` for projective points of the domain.
pub fn hilbert_distance(
    domain: &ConvexDomain,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
) -> Result<f64> {
    distance(domain, &x.chart()?, &y.chart()?)
}

/// `d^H` for chart points.
///
/// With `dir = y − x`, `a = x − s_a·dir` and `b = y + t_y·dir` the cross-ratio
/// `[a, x, b, y]` equals `(1 + 1/s_a)(1 + 1/t_y)`, which avoids cancellation
/// when `y` is close to `b`.
pub fn distance(domain: &ConvexDomain, x: &Vector2<f64>, y: &Vector2<f64>) -> Result<f64> {
    if x == y {
        if domain.contains_chart(x, BOUNDARY_TOL) == Containment::Outside {
            return Err(Error::Containment { x: x.x, y: x.y });
        }
        return Ok(0.0);
    }
    let (_, [s_a, _, t_y]) = domain.chord_through_chart(x, y)?;
    Ok(0.5 * ((1.0 / s_a).ln_1p() + (1.0 / t_y).ln_1p()))
}

/// Finsler norm `F(x, v) = (|v|/2)(1/t₊ + 1/t₋)`.
pub fn hilbert_norm(domain: &ConvexDomain, x: &Vector2<f64>, v: &Vector2<f64>) -> Result<f64> {
    let n = v.norm();
    if !(n > 0.0) {
        return Err(Error::Degenerate("zero tangent vector"));
    }
    let u = v / n;
    let tp = domain.ray_exit(x, &u);
    let tm = domain.ray_exit(x, &-u);
    Ok(0.5 * n * (1.0 / tp + 1.0 / tm))
}

/// `B^H(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HilbertBall {
    pub center: Vector2<f64>,
    pub radius: f64,
}

impl HilbertBall {
    pub fn new(center: Vector2<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::Argument(format!("ball radius {radius} is negative")));
        }
        Ok(HilbertBall { center, radius })
    }

    pub fn contains(&self, domain: &ConvexDomain, x: &Vector2<f64>) -> Result<bool> {
        ball_membership(domain, &self.center, self.radius, x)
    }
}

pub fn ball_membership(
    domain: &ConvexDomain,
    o: &Vector2<f64>,
    r: f64,
    x: &Vector2<f64>,
) -> Result<bool> {
    if !(r >= 0.0) {
        return Err(Error::Argument(format!("ball radius {r} is negative")));
    }
    Ok(distance(domain, o, x)? <= r)
}

/// `k` points from `x` to `y`, equally spaced in Hilbert arclength.
pub fn geodesic_sample(
    domain: &ConvexDomain,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
    k: usize,
) -> Result<Vec<Vector2<f64>>> {
    if k < 2 {
        return Err(Error::Argument("geodesic_sample needs k >= 2".into()));
    }
    if x == y {
        distance(domain, x, y)?;
        return Ok(vec![*x; k]);
    }
    let (chord, [s_a, s_b, t_y]) = domain.chord_through_chart(x, y)?;
    // The chord point at parameter t sits at fraction eᵗ/(eᵗ + e⁻ᵗ) from a.
    let tx = 0.5 * (s_a / s_b).ln();
    let ty = 0.5 * ((s_a + 1.0) / t_y).ln();
    let mut out = Vec::with_capacity(k);
    out.push(*x);
    for i in 1..k - 1 {
        let t = tx + (ty - tx) * i as f64 / (k - 1) as f64;
        out.push(chord.point(t));
    }
    out.push(*y);
    Ok(out)
}

/// Lebesgue area of the tangent unit ball `{v : F(x, v) ≤ 1}`, approximated
/// by the inscribed `n`-gon on equally spaced directions.
pub fn unit_ball_area(domain: &ConvexDomain, x: &Vector2<f64>, n: usize) -> Result<f64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let radii: Vec<f64> = (0..n)
        .map(|k| {
            let th = step * k as f64;
            hilbert_norm(domain, x, &Vector2::new(th.cos(), th.sin())).map(|f| 1.0 / f)
        })
        .collect::<Result<_>>()?;
    Ok(0.5 * step.sin() * (0..n).map(|k| radii[k] * radii[(k + 1) % n]).sum::<f64>())
}

/// CSV rows `x,y,F_e1,F_e2,F_diag` over the interior nodes of a regular grid
/// of `[−1, 1]²` with `n` cells per side. `F_diag` uses the unit diagonal.
pub fn metric_field_csv(domain: &ConvexDomain, n: usize) -> Result<String> {
    let mut out = String::from("x,y,F_e1,F_e2,F_diag\n");
    let h = 2.0 / n as f64;
    let diag = Vector2::new(1.0, 1.0) / 2f64.sqrt();
    for j in 0..=n {
        for i in 0..=n {
            let p = Vector2::new(-1.0 + h * i as f64, -1.0 + h * j as f64);
            if domain.boundary_distance(&p) <= 1e-9 {
                continue;
            }
            let f1 = hilbert_norm(domain, &p, &Vector2::x())?;
            let f2 = hilbert_norm(domain, &p, &Vector2::y())?;
            let fd = hilbert_norm(domain, &p, &diag)?;
            writeln!(
                out,
                "{:.6},{:.6},{:.12e},{:.12e},{:.12e}",
                p.x, p.y, f1, f2, fd
            )
            .expect("string write");
        }
    }
    Ok(out)
}
