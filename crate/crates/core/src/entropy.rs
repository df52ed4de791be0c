//! Volume forms, Hilbert-ball volumes and growth rates.

use std::fmt::Write as _;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chord::blaschke_distance_upper;
use crate::error::{Error, Result};
use crate::grid::COLLAR_CELLS;
use crate::hilbert::{distance, unit_ball_area};
use crate::interp::AffineSphere;
use crate::par;

/// Polygon resolution for tangent unit balls.
pub const BALL_GON: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeKind {
    Blaschke,
    Busemann,
}

/// Density per grid node with respect to Lebesgue measure of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeForm {
    pub kind: VolumeKind,
    pub density: Vec<f64>,
}

impl VolumeForm {
    pub fn new(sphere: &AffineSphere, kind: VolumeKind) -> Result<Self> {
        let grid = &sphere.solution.grid;
        let density = par::map_range(grid.len(), |k| -> Result<f64> {
            match kind {
                VolumeKind::Blaschke => Ok(sphere.node_h(k).determinant().max(0.0).sqrt()),
                VolumeKind::Busemann => {
                    Ok(1.0 / unit_ball_area(sphere.domain(), &grid.points[k], BALL_GON)?)
                }
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(VolumeForm { kind, density })
    }
}

/// Hilbert distance from `o` to every grid node.
fn node_distances(sphere: &AffineSphere, o: &Vector2<f64>) -> Result<Vec<f64>> {
    let grid = &sphere.solution.grid;
    par::map_slice(&grid.points, |p| distance(sphere.domain(), o, p))
        .into_iter()
        .collect()
}

/// Largest radius whose ball contains no collar node.
pub fn r_max(sphere: &AffineSphere, o: &Vector2<f64>) -> Result<f64> {
    let d = node_distances(sphere, o)?;
    Ok(r_max_from(sphere, &d))
}

fn r_max_from(sphere: &AffineSphere, d: &[f64]) -> f64 {
    let grid = &sphere.solution.grid;
    (0..grid.len())
        .filter(|k| !grid.reliable(*k, COLLAR_CELLS))
        .map(|k| d[k])
        .fold(f64::INFINITY, f64::min)
}

fn check_base(sphere: &AffineSphere, o: &Vector2<f64>) -> Result<()> {
    if !sphere.reliable(o) {
        return Err(Error::Collar(vec![sphere.domain().boundary_distance(o)]));
    }
    Ok(())
}

fn volume_from(sphere: &AffineSphere, form: &VolumeForm, d: &[f64], r: f64) -> f64 {
    let cell = sphere.h() * sphere.h();
    let mut total = 0.0;
    for (k, dk) in d.iter().enumerate() {
        if *dk <= r && r > 0.0 {
            total += form.density[k];
        }
    }
    total * cell
}

/// Sum of `density × h²` over nodes with `d^H(o, node) ≤ R`.
pub fn ball_volume(
    sphere: &AffineSphere,
    form: &VolumeForm,
    o: &Vector2<f64>,
    r: f64,
) -> Result<f64> {
    check_base(sphere, o)?;
    if !(r >= 0.0) {
        return Err(Error::Argument(format!("radius {r} is negative")));
    }
    let d = node_distances(sphere, o)?;
    let rm = r_max_from(sphere, &d);
    if r > rm {
        return Err(Error::Truncation { r_max: rm });
    }
    Ok(volume_from(sphere, form, &d, r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub r_list: Vec<f64>,
    pub volumes: Vec<f64>,
    pub log_volumes: Vec<f64>,
    /// `Δ log V / ΔR` between consecutive radii.
    pub increments: Vec<f64>,
    /// Least-squares slope of `log V` against `R` over `window`.
    pub raw_slope: f64,
    /// Inclusive index range of the radii used for `raw_slope`.
    pub window: (usize, usize),
    /// Growth rate `s` of the best fit `log V ≈ c + log(cosh(sR) − 1)`.
    pub rate: f64,
    pub r_max: f64,
}

impl EntropyEstimate {
    pub fn to_csv(&self, seed: Option<u64>) -> String {
        let mut out = String::new();
        if let Some(s) = seed {
            writeln!(out, "# seed={s}").expect("string write");
        }
        writeln!(
            out,
            "# rate={:.12e} raw_slope={:.12e} R_max={:.12e}",
            self.rate, self.raw_slope, self.r_max
        )
        .expect("string write");
        out.push_str("R,volume,log_volume,slope_window\n");
        for i in 0..self.r_list.len() {
            let inside = i >= self.window.0 && i <= self.window.1;
            writeln!(
                out,
                "{:.6},{:.12e},{:.12e},{}",
                self.r_list[i], self.volumes[i], self.log_volumes[i], inside
            )
            .expect("string write");
        }
        out
    }
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

/// `log((cosh(sR) − 1)/s²)`, continuous at `s = 0`.
fn profile(s: f64, r: f64) -> f64 {
    let x = s * r;
    if x < 1e-4 {
        (0.5 * r * r * (1.0 + x * x / 12.0)).ln()
    } else {
        // cosh(x) − 1 = 2 sinh²(x/2)
        (2.0 * (0.5 * x).sinh().powi(2) / (s * s)).ln()
    }
}

/// Residual of the profile fit with the additive constant eliminated.
fn profile_misfit(s: f64, r: &[f64], logv: &[f64]) -> f64 {
    let diffs: Vec<f64> = r
        .iter()
        .zip(logv)
        .map(|(r, l)| l - profile(s, *r))
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    diffs.iter().map(|d| (d - mean).powi(2)).sum()
}

/// Best-fit rate over `s ∈ [0, 3]`: grid scan then golden-section refinement.
pub fn profile_rate(r: &[f64], logv: &[f64]) -> f64 {
    let n = 3000;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let s = 3.0 * i as f64 / n as f64;
        let m = profile_misfit(s, r, logv);
        if m < best.1 {
            best = (s, m);
        }
    }
    let (mut a, mut b) = ((best.0 - 1e-3).max(0.0), (best.0 + 1e-3).min(3.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if profile_misfit(c, r, logv) <= profile_misfit(d, r, logv) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Largest contiguous window (at least 3 radii) whose linear fit has RMS
/// residual at most `tol`; the full list when none qualifies.
fn stable_window(r: &[f64], logv: &[f64], tol: f64) -> (usize, usize) {
    let n = r.len();
    for len in (3..=n).rev() {
        for start in 0..=n - len {
            let (_, _, rms) = least_squares(&r[start..start + len], &logv[start..start + len]);
            if rms <= tol {
                return (start, start + len - 1);
            }
        }
    }
    (0, n - 1)
}

pub fn entropy_estimate(
    sphere: &AffineSphere,
    form: &VolumeForm,
    o: &Vector2<f64>,
    r_list: &[f64],
) -> Result<EntropyEstimate> {
    check_base(sphere, o)?;
    if r_list.len() < 3 || r_list.windows(2).any(|w| !(w[1] > w[0])) || r_list[0] <= 0.0 {
        return Err(Error::Argument(
            "R_list must be positive, increasing, with at least 3 entries".into(),
        ));
    }
    let d = node_distances(sphere, o)?;
    let rm = r_max_from(sphere, &d);
    if let Some(r) = r_list.iter().find(|r| **r > rm) {
        let _ = r;
        return Err(Error::Truncation { r_max: rm });
    }
    let volumes: Vec<f64> = r_list
        .iter()
        .map(|r| volume_from(sphere, form, &d, *r))
        .collect();
    let log_volumes: Vec<f64> = volumes.iter().map(|v| v.ln()).collect();
    let increments = r_list
        .windows(2)
        .zip(log_volumes.windows(2))
        .map(|(r, l)| (l[1] - l[0]) / (r[1] - r[0]))
        .collect();
    let window = stable_window(r_list, &log_volumes, 0.01);
    let (raw_slope, _, _) = least_squares(
        &r_list[window.0..=window.1],
        &log_volumes[window.0..=window.1],
    );
    let rate = profile_rate(r_list, &log_volumes);
    Ok(EntropyEstimate {
        r_list: r_list.to_vec(),
        volumes,
        log_volumes,
        increments,
        raw_slope,
        window,
        rate,
        r_max: rm,
    })
}

/// Samples points of `B^H(o, R)` and counts those with
/// `blaschke_distance_upper(o, x) > R + 1`.
pub fn ball_inclusion_check(
    sphere: &AffineSphere,
    o: &Vector2<f64>,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<usize> {
    check_base(sphere, o)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = sphere.domain().bounding_box();
    let mut pts = Vec::with_capacity(n);
    let mut tries = 0usize;
    while pts.len() < n {
        tries += 1;
        if tries > 1000 * n.max(1) {
            return Err(Error::Argument(format!(
                "could not sample {n} reliable points of the ball"
            )));
        }
        let p = Vector2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if sphere.reliable(&p) && distance(sphere.domain(), o, &p)? <= r {
            pts.push(p);
        }
    }
    let over = par::map_slice(&pts, |p| {
        blaschke_distance_upper(sphere, o, p).map(|d| d > r + 1.0)
    });
    let mut count = 0;
    for v in over {
        if v? {
            count += 1;
        }
    }
    Ok(count)
}

/// `sup/inf` over reliable nodes of the form's volume of the tangent
/// Hilbert unit ball.
pub fn uniformity_constant(sphere: &AffineSphere, form: &VolumeForm) -> Result<f64> {
    let nodes = sphere.reliable_nodes();
    let vols = par::map_slice(&nodes, |&k| {
        unit_ball_area(sphere.domain(), &sphere.solution.grid.points[k], BALL_GON)
            .map(|a| a * form.density[k])
    });
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for v in vols {
        let v = v?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi / lo)
}
