//! Profiles of the affine sphere along chords, the comparison constant, and
//! the audit of `d^B` against `d^H`.
//!
//! Along a chord with endpoint lifts `e₁` (at `a`) and `e₂` (at `b`) the
//! sphere is `e^{α(t)}(eᵗe₂ + e⁻ᵗe₁)`, so `α = log r(x(t)) − log z(t)` where
//! `z(t)` is the third coordinate of `eᵗe₂ + e⁻ᵗe₁`. The Blaschke norm of
//! the velocity is then `α″ − α′² + 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::COLLAR_CELLS;
use crate::hilbert::{distance, hilbert_norm};
use crate::interp::AffineSphere;
use crate::par;
use crate::projective::{Chord, ConvexDomain};
use crate::quad::integrate64;

/// Step used for the centred differences, in chart units along the chord.
const STEP_CELLS: f64 = 4.0;
/// Directions sampled by the pointwise norm comparisons, over half a turn.
pub const DIRECTIONS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordProfile {
    #[serde(skip)]
    pub chord: Option<Chord>,
    pub ts: Vec<f64>,
    pub alpha: Vec<f64>,
    pub alpha_p: Vec<f64>,
    pub alpha_pp: Vec<f64>,
    pub hb_chord: Vec<f64>,
}

impl ChordProfile {
    /// `α″ − α′² + 1` at every sample.
    pub fn identity_lhs(&self) -> Vec<f64> {
        self.alpha_p
            .iter()
            .zip(&self.alpha_pp)
            .map(|(p, pp)| pp - p * p + 1.0)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,alpha,alpha_p,alpha_pp,hB_chord\n");
        for i in 0..self.ts.len() {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.ts[i], self.alpha[i], self.alpha_p[i], self.alpha_pp[i], self.hb_chord[i]
            )
            .expect("string write");
        }
        out
    }
}

fn log_z(chord: &Chord, t: f64) -> f64 {
    chord.lift(t).z.ln() + t.abs()
}

fn alpha_at(sphere: &AffineSphere, chord: &Chord, t: f64) -> Result<f64> {
    Ok(sphere.r_at(&chord.point(t))?.ln() - log_z(chord, t))
}

fn diff_step(sphere: &AffineSphere, chord: &Chord, t: f64) -> f64 {
    STEP_CELLS * sphere.h() / chord.velocity(t).norm()
}

/// Samples `α`, `α′`, `α″` and `h^B(ẋ, ẋ)` at `n` equally spaced parameters.
pub fn alpha_profile(
    sphere: &AffineSphere,
    chord: &Chord,
    t_min: f64,
    t_max: f64,
    n: usize,
) -> Result<ChordProfile> {
    if n < 2 || !(t_max > t_min) {
        return Err(Error::Argument(
            "need t_min < t_max and at least 2 samples".into(),
        ));
    }
    let ts: Vec<f64> = (0..n)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (n - 1) as f64)
        .collect();
    let rows = par::map_slice(&ts, |&t| -> std::result::Result<[f64; 4], f64> {
        let dt = diff_step(sphere, chord, t);
        let a0 = alpha_at(sphere, chord, t).map_err(|_| t)?;
        let ap = alpha_at(sphere, chord, t + dt).map_err(|_| t)?;
        let am = alpha_at(sphere, chord, t - dt).map_err(|_| t)?;
        let v = chord.velocity(t);
        let hb = sphere.h_at(&chord.point(t)).map_err(|_| t)?;
        Ok([
            a0,
            (ap - am) / (2.0 * dt),
            (ap - 2.0 * a0 + am) / (dt * dt),
            v.dot(&(hb * v)),
        ])
    });
    let bad: Vec<f64> = rows.iter().filter_map(|r| r.err()).collect();
    if !bad.is_empty() {
        return Err(Error::Collar(bad));
    }
    let rows: Vec<[f64; 4]> = rows.into_iter().map(|r| r.expect("checked")).collect();
    Ok(ChordProfile {
        chord: Some(chord.clone()),
        ts,
        alpha: rows.iter().map(|r| r[0]).collect(),
        alpha_p: rows.iter().map(|r| r[1]).collect(),
        alpha_pp: rows.iter().map(|r| r[2]).collect(),
        hb_chord: rows.iter().map(|r| r[3]).collect(),
    })
}

/// Parameter interval on which the chord point and its difference stencil
/// stay outside the collar.
/// `n` chords through points near the centroid, at angles `πk/n + 0.1`
/// and offsets cycling through 0, 0.2 and 0.4 of the unit length.
pub fn sample_chords(domain: &ConvexDomain, n: usize) -> Result<Vec<Chord>> {
    let c = domain.centroid();
    (0..n)
        .map(|k| {
            let th = std::f64::consts::PI * k as f64 / n as f64 + 0.1;
            let d = Vector2::new(th.cos(), th.sin());
            let p = c + Vector2::new(-d.y, d.x) * (0.2 * (k % 3) as f64);
            mid_chord_through(domain, &p, &d)
        })
        .collect()
}

/// The chord through `p` along `d`.
pub fn mid_chord_through(
    domain: &ConvexDomain,
    p: &Vector2<f64>,
    d: &Vector2<f64>,
) -> Result<Chord> {
    let d = d.normalize() * 0.1;
    let (_, [sa, sb, _]) = domain.chord_through_chart(p, &(p + d))?;
    Ok(Chord::from_chart(p - d * sa, p + d * sb))
}

/// Profile over the whole reliable parameter range, `n` samples.
pub fn reliable_profile(sphere: &AffineSphere, chord: &Chord, n: usize) -> Result<ChordProfile> {
    let (t0, t1) = reliable_t_range(sphere, chord)?;
    alpha_profile(sphere, chord, t0, t1, n)
}

pub fn reliable_t_range(sphere: &AffineSphere, chord: &Chord) -> Result<(f64, f64)> {
    let need = (COLLAR_CELLS + STEP_CELLS) * sphere.h() * (1.0 + 1e-9);
    let ok = |t: f64| sphere.domain().boundary_distance(&chord.point(t)) >= need;
    // The boundary distance is concave along the chord; start from its peak.
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let d = |t: f64| sphere.domain().boundary_distance(&chord.point(t));
        if d(m1) < d(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let peak = 0.5 * (lo + hi);
    if !ok(peak) {
        return Err(Error::Collar(vec![peak]));
    }
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let m = 0.5 * (inside + outside);
            if ok(m) {
                inside = m
            } else {
                outside = m
            }
        }
        inside
    };
    Ok((edge(peak, -40.0), edge(peak, 40.0)))
}

/// `sup |(α″ − α′² + 1) − h^B(ẋ, ẋ)|` over the samples.
pub fn chord_identity_check(profile: &ChordProfile) -> f64 {
    profile
        .identity_lhs()
        .iter()
        .zip(&profile.hb_chord)
        .map(|(l, h)| (l - h).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub max_abs_slope: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Slack added to `√(1 − 1/C)` when judging sampled slopes.
pub const SLOPE_SLACK: f64 = 0.02;

pub fn slope_bound_check(profile: &ChordProfile, c: f64) -> Result<SlopeCheck> {
    if !(c >= 1.0) {
        return Err(Error::Argument(format!(
            "comparison constant {c} is below 1"
        )));
    }
    let max_abs_slope = profile.alpha_p.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let bound = (1.0 - 1.0 / c).sqrt();
    Ok(SlopeCheck {
        max_abs_slope,
        bound,
        pass: max_abs_slope <= bound + SLOPE_SLACK,
    })
}

/// Blow-up time of the barrier started at `f₀ > √(1 − 1/C)` at `t₀`; infinite
/// when `f₀` does not exceed the equilibrium.
pub fn blow_up_time(f0: f64, c: f64, t0: f64) -> f64 {
    let s = (1.0 - 1.0 / c).sqrt();
    let d = (f0 - s) / (f0 + s);
    if d > 0.0 {
        t0 - d.ln() / (2.0 * s)
    } else {
        f64::INFINITY
    }
}

/// Solution of `f′ = f² − (1 − 1/C)`, `f(t₀) = f₀`, in closed form.
pub fn ode_barrier(f0: f64, c: f64, t0: f64, t: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::Argument(format!("barrier needs C > 1, got {c}")));
    }
    let s = (1.0 - 1.0 / c).sqrt();
    if !(f0 > -s) {
        return Err(Error::Argument(format!(
            "initial value {f0} is below −√(1 − 1/C)"
        )));
    }
    let t_max = blow_up_time(f0, c, t0);
    if t >= t_max {
        return Err(Error::BlowUp { t_max });
    }
    let d = (f0 - s) / (f0 + s);
    let e = d * (2.0 * s * (t - t0)).exp();
    Ok(s * (1.0 + e) / (1.0 - e))
}

fn direction(k: usize) -> Vector2<f64> {
    let th = std::f64::consts::PI * k as f64 / DIRECTIONS as f64;
    Vector2::new(th.cos(), th.sin())
}

/// Extremes of `h^B(v, v)/F(x, v)²` over reliable nodes and sampled
/// directions.
pub fn norm_ratio_range(sphere: &AffineSphere) -> Result<(f64, f64)> {
    let nodes = sphere.reliable_nodes();
    let per = par::map_slice(&nodes, |&k| -> Result<(f64, f64)> {
        let p = sphere.solution.grid.points[k];
        let h = sphere.node_h(k);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for d in 0..DIRECTIONS {
            let v = direction(d);
            let f = hilbert_norm(sphere.domain(), &p, &v)?;
            let r = v.dot(&(h * v)) / (f * f);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((lo, hi))
    });
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for r in per {
        let (a, b) = r?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

/// `sup F²/h^B` over reliable nodes and sampled directions, at least 1.
pub fn estimate_comparison_constant(sphere: &AffineSphere) -> Result<f64> {
    let (lo, _) = norm_ratio_range(sphere)?;
    Ok((1.0 / lo).max(1.0))
}

/// Blaschke length of the straight segment, by 64-point quadrature.
pub fn chord_length(sphere: &AffineSphere, x: &Vector2<f64>, y: &Vector2<f64>) -> Result<f64> {
    let v = y - x;
    let err = std::cell::Cell::new(None);
    let len = integrate64(0.0, 1.0, |s| match sphere.norm_at(&(x + v * s), &v) {
        Ok(n) => n,
        Err(e) => {
            err.set(Some(e));
            0.0
        }
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(len),
    }
}

const GRAPH_STEPS: [(i64, i64); 16] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
    (2, 1),
    (2, -1),
    (-2, 1),
    (-2, -1),
    (1, 2),
    (1, -2),
    (-1, 2),
    (-1, -2),
];

/// Shortest path through reliable nodes with 16-neighbour moves; edge
/// weights by the trapezoid rule on the node tensors.
fn graph_length(sphere: &AffineSphere, x: &Vector2<f64>, y: &Vector2<f64>) -> Result<f64> {
    let grid = &sphere.solution.grid;
    let reliable = |k: usize| grid.reliable(k, COLLAR_CELLS);
    let attach = |p: &Vector2<f64>| -> Result<Vec<(usize, f64)>> {
        let (i0, j0) = (
            ((p.x + 1.0) / grid.h).floor() as i64,
            ((p.y + 1.0) / grid.h).floor() as i64,
        );
        let mut out = Vec::new();
        for a in -1..=2 {
            for b in -1..=2 {
                if i0 + a < 0 || j0 + b < 0 {
                    continue;
                }
                if let Some(k) = grid.node_at((i0 + a) as usize, (j0 + b) as usize) {
                    if reliable(k) {
                        out.push((k, chord_length(sphere, p, &grid.points[k])?));
                    }
                }
            }
        }
        Ok(out)
    };
    let sources = attach(x)?;
    let targets = attach(y)?;
    if sources.is_empty() || targets.is_empty() {
        return Ok(f64::INFINITY);
    }
    let n = grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &(k, d) in &sources {
        if d < dist[k] {
            dist[k] = d;
            heap.push(Reverse((Ord64(d), k)));
        }
    }
    let mut exit = vec![f64::INFINITY; n];
    for &(k, d) in &targets {
        exit[k] = exit[k].min(d);
    }
    let mut best = f64::INFINITY;
    while let Some(Reverse((Ord64(d), k))) = heap.pop() {
        if d > dist[k] || d >= best {
            if d >= best {
                break;
            }
            continue;
        }
        best = best.min(d + exit[k]);
        let hk = sphere.node_h(k);
        for &(di, dj) in &GRAPH_STEPS {
            let Some(m) = grid.neighbour(k, di, dj) else {
                continue;
            };
            if !reliable(m) {
                continue;
            }
            let v = grid.points[m] - grid.points[k];
            let hm = sphere.node_h(m);
            let w = 0.5 * (v.dot(&(hk * v)).sqrt() + v.dot(&(hm * v)).sqrt());
            let nd = d + w;
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Reverse((Ord64(nd), m)));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ord64(f64);

impl Eq for Ord64 {}

impl PartialOrd for Ord64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ord64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Upper estimate of `d^B(x, y)`: the shorter of the straight segment and
/// the grid-graph path.
pub fn blaschke_distance_upper(
    sphere: &AffineSphere,
    x: &Vector2<f64>,
    y: &Vector2<f64>,
) -> Result<f64> {
    let bad: Vec<f64> = [x, y]
        .iter()
        .filter(|p| !sphere.reliable(p))
        .map(|p| sphere.domain().boundary_distance(p))
        .collect();
    if !bad.is_empty() {
        return Err(Error::Collar(bad));
    }
    if x == y {
        return Ok(0.0);
    }
    let straight = chord_length(sphere, x, y)?;
    let graph = graph_length(sphere, x, y)?;
    Ok(straight.min(graph))
}

/// `n` points drawn uniformly from the reliable interior.
pub fn reliable_points(sphere: &AffineSphere, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vector2<f64>> {
    let (lo, hi) = sphere.domain().bounding_box();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vector2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if sphere.reliable(&p) {
            out.push(p);
        }
    }
    out
}

/// Absolute tolerance for the inequality checks, to absorb rounding when
/// the two sides agree exactly.
pub const AUDIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub pair_id: usize,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub d_h: f64,
    pub d_b_upper: f64,
    pub bound_sharp: f64,
    pub bound_unit: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub c_est: f64,
    pub rows: Vec<AuditRow>,
    pub violations_sharp: usize,
    pub violations_unit: usize,
    /// `max(d^B_upper − d^H)` over the pairs.
    pub max_slack_consumed: f64,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# seed={} C_est={:.12e}\npair_id,xh,yh,dH,dB_upper,bound_sharp,bound_lemma1,ok\n",
            self.seed, self.c_est
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.9} {:.9} 1,{:.9} {:.9} 1,{:.12e},{:.12e},{:.12e},{:.12e},{}",
                r.pair_id,
                r.x[0],
                r.x[1],
                r.y[0],
                r.y[1],
                r.d_h,
                r.d_b_upper,
                r.bound_sharp,
                r.bound_unit,
                r.ok
            )
            .expect("string write");
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.violations_sharp == 0 && self.violations_unit == 0
    }
}

/// Audits `d^B ≤ d^H + √(1 − 1/C)` and `d^B < d^H + 1` on seeded pairs, with
/// `d^B` replaced by its upper estimate.
pub fn comparison_audit(
    sphere: &AffineSphere,
    n_pairs: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    let c_est = estimate_comparison_constant(sphere)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = reliable_points(sphere, 2 * n_pairs, &mut rng);
    let pairs: Vec<(usize, Vector2<f64>, Vector2<f64>)> = (0..n_pairs)
        .map(|i| (i, pts[2 * i], pts[2 * i + 1]))
        .collect();
    let sharp = (1.0 - 1.0 / c_est).sqrt();
    let rows = par::map_slice(&pairs, |(i, x, y)| -> Result<AuditRow> {
        let d_h = distance(sphere.domain(), x, y)?;
        let d_b = blaschke_distance_upper(sphere, x, y)?;
        let bound_sharp = d_h + sharp;
        let bound_unit = d_h + 1.0;
        let ok = d_b <= bound_sharp + AUDIT_TOL && d_b < bound_unit;
        Ok(AuditRow {
            pair_id: *i,
            x: [x.x, x.y],
            y: [y.x, y.y],
            d_h,
            d_b_upper: d_b,
            bound_sharp,
            bound_unit,
            ok,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let violations_sharp = rows
        .iter()
        .filter(|r| r.d_b_upper > r.bound_sharp + AUDIT_TOL)
        .count();
    let violations_unit = rows.iter().filter(|r| r.d_b_upper >= r.bound_unit).count();
    let max_slack_consumed = rows
        .iter()
        .map(|r| r.d_b_upper - r.d_h)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport {
        seed,
        c_est,
        rows,
        violations_sharp,
        violations_unit,
        max_slack_consumed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine_sphere::SolverConfig;
    use crate::projective::ConvexDomain;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn disc() -> &'static AffineSphere {
        static S: OnceLock<AffineSphere> = OnceLock::new();
        S.get_or_init(|| {
            AffineSphere::solve(
                &ConvexDomain::unit_disc(),
                &SolverConfig {
                    h: 1.0 / 32.0,
                    ..Default::default()
                },
            )
            .unwrap()
        })
    }

    #[test]
    fn disc_diameter_gate() {
        let s = disc();
        let chord = Chord::from_chart(Vector2::new(-1.0, 0.0), Vector2::new(1.0, 0.0));
        let (t0, t1) = reliable_t_range(s, &chord).unwrap();
        let p = alpha_profile(s, &chord, t0, t1, 41).unwrap();
        for i in 0..p.ts.len() {
            // With third-coordinate-one lifts the hyperboloid gives α ≡ −log 2.
            assert!((p.alpha[i] + 2f64.ln()).abs() < 1e-9);
            assert!(p.alpha_p[i].abs() < 1e-6);
            assert!((p.hb_chord[i] - 1.0).abs() < 1e-9);
        }
        assert!(chord_identity_check(&p) < 1e-5);
    }

    #[test]
    fn lift_rescaling_only_shifts_parameters() {
        let s = disc();
        let chord = Chord::from_chart(Vector2::new(-0.6, -0.8), Vector2::new(1.0, 0.0));
        let lam: f64 = 2.5;
        let shift = 0.5 * lam.ln();
        let p = alpha_profile(s, &chord, -1.0, 1.0, 11).unwrap();
        let q = alpha_profile(s, &chord.rescaled(lam, 1.0), -1.0 + shift, 1.0 + shift, 11).unwrap();
        for i in 0..11 {
            assert!((p.alpha_p[i] - q.alpha_p[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn collar_samples_are_listed() {
        let s = disc();
        let chord = Chord::from_chart(Vector2::new(-1.0, 0.0), Vector2::new(1.0, 0.0));
        match alpha_profile(s, &chord, -5.0, 0.0, 6) {
            Err(Error::Collar(ts)) => assert!(ts.contains(&-5.0) && !ts.contains(&0.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthetic_profiles() {
        let p = ChordProfile {
            chord: None,
            ts: vec![0.0, 1.0],
            alpha: vec![0.0, 0.0],
            alpha_p: vec![0.0, 0.0],
            alpha_pp: vec![0.0, 0.0],
            hb_chord: vec![1.0, 1.0],
        };
        assert_eq!(chord_identity_check(&p), 0.0);
        let q = ChordProfile {
            alpha_p: vec![0.5, -0.5],
            ..p.clone()
        };
        let c = slope_bound_check(&q, 4.0 / 3.0).unwrap();
        assert!(c.pass && (c.bound - 0.5).abs() < 1e-15);
        assert!(slope_bound_check(&q, 0.9).is_err());
    }

    fn rk4(f0: f64, c: f64, t0: f64, t1: f64, steps: usize) -> f64 {
        let k = 1.0 - 1.0 / c;
        let g = |f: f64| f * f - k;
        let h = (t1 - t0) / steps as f64;
        let mut f = f0;
        for _ in 0..steps {
            let k1 = g(f);
            let k2 = g(f + 0.5 * h * k1);
            let k3 = g(f + 0.5 * h * k2);
            let k4 = g(f + h * k3);
            f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        f
    }

    #[test]
    fn barrier_examples() {
        let s = (0.5f64).sqrt();
        assert_eq!(ode_barrier(s, 2.0, 0.0, 3.7).unwrap(), s);
        let tm = blow_up_time(1.0, 2.0, 0.0);
        let d = (1.0 - s) / (1.0 + s);
        assert!((tm - (-d.ln() / (2.0 * s))).abs() < 1e-12);
        for t in [0.2, 0.5, tm - 0.1] {
            let exact = ode_barrier(1.0, 2.0, 0.0, t).unwrap();
            assert!((exact - rk4(1.0, 2.0, 0.0, t, 20_000)).abs() < 1e-8 * exact.max(1.0));
        }
        assert!(matches!(
            ode_barrier(1.0, 2.0, 0.0, tm),
            Err(Error::BlowUp { .. })
        ));
        assert!(ode_barrier(1.0, 1.0, 0.0, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn barrier_is_monotone(c in 1.2f64..5.0, f0 in 0.0f64..2.0, t in 0.0f64..0.5, dt in 0.001f64..0.1) {
            let tm = blow_up_time(f0, c, 0.0);
            prop_assume!(t + dt < tm);
            let a = ode_barrier(f0, c, 0.0, t).unwrap();
            let b = ode_barrier(f0, c, 0.0, t + dt).unwrap();
            let s = (1.0 - 1.0 / c).sqrt();
            if f0 > s { prop_assert!(b > a); } else if f0 < s { prop_assert!(b < a); }
            prop_assume!(t < blow_up_time(f0 + 0.01, c, 0.0));
            prop_assert!(ode_barrier(f0 + 0.01, c, 0.0, t).unwrap() > a);
        }
    }

    #[test]
    fn disc_distances_match_klein() {
        let s = disc();
        let o = Vector2::new(0.0, 0.0);
        let x = Vector2::new(0.5, 0.0);
        let d = blaschke_distance_upper(s, &o, &x).unwrap();
        let exact = 0.5f64.atanh();
        assert!(d >= exact - 1e-12 && d <= exact + 0.02, "{d}");
        assert_eq!(blaschke_distance_upper(s, &x, &x).unwrap(), 0.0);
        assert!(matches!(
            blaschke_distance_upper(s, &o, &Vector2::new(0.99, 0.0)),
            Err(Error::Collar(_))
        ));
        assert!(estimate_comparison_constant(s).unwrap() <= 1.05);
    }

    #[test]
    fn mean_identity_over_windows() {
        // ∫(α″ − α′² + 1) = Δα′ − ∫α′² + Δt, by the trapezoid rule.
        let chord = Chord::from_chart(Vector2::new(-0.6, -0.8), Vector2::new(1.0, 0.0));
        let p = alpha_profile(disc(), &chord, -1.0, 1.0, 401).unwrap();
        let trap = |f: &[f64]| -> f64 {
            let dt = p.ts[1] - p.ts[0];
            dt * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[f.len() - 1]))
        };
        let lhs = trap(&p.identity_lhs());
        let sq: Vec<f64> = p.alpha_p.iter().map(|a| a * a).collect();
        let n = p.ts.len() - 1;
        let rhs = p.alpha_p[n] - p.alpha_p[0] - trap(&sq) + (p.ts[n] - p.ts[0]);
        assert!((lhs - rhs).abs() < 1e-3, "{lhs} {rhs}");
    }

    #[test]
    fn audit_is_seed_deterministic() {
        let a = comparison_audit(disc(), 5, 11).unwrap();
        let b = comparison_audit(disc(), 5, 11).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.passed());
        assert!(a.to_csv().starts_with("# seed=11"));
    }
}
