//! Translation lengths of projective transformations.

use std::fmt::Write as _;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::chord::blaschke_distance_upper;
use crate::error::{Error, Result};
use crate::exact::{big_matrix, big_vector, mat_vec, reduce, ExactDomain};
use crate::interp::AffineSphere;
use crate::par;
use crate::projective::{ConvexDomain, Normalization, Shape};

/// Default word length for limit-set hulls.
pub const DEFAULT_DEPTH: usize = 8;
/// Orbit length for dynamical lengths.
pub const N_MAX: usize = 200;
/// Allowed gap between dynamical and eigenvalue lengths at `N_MAX`.
pub const DYN_TOL: f64 = 5e-3;
/// Slack in the Blaschke length audit.
pub const BLASCHKE_SLACK: f64 = 0.05;
/// Margin that keeps the collar inequalities strict under roundoff.
pub const COLLAR_MARGIN: f64 = 1e-12;
/// Word length listed in spectrum reports.
pub const REPORT_DEPTH: usize = 2;

/// A projective transformation scaled to determinant one.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub m: Matrix3<f64>,
    /// Eigenvalue moduli, largest first.
    pub moduli: [f64; 3],
    pub proximal: bool,
}

impl GroupElement {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::Degenerate("singular matrix"));
        }
        let m = m / det.cbrt();
        let ev = m.complex_eigenvalues();
        let mut moduli = [ev[0].norm(), ev[1].norm(), ev[2].norm()];
        moduli.sort_by(|a, b| b.total_cmp(a));
        let real = ev.iter().all(|z| z.im.abs() <= 1e-12 * z.norm().max(1.0));
        let gap = |a: f64, b: f64| a > b * (1.0 + 1e-9);
        let proximal =
            real && gap(moduli[0], moduli[1]) && gap(moduli[1], moduli[2]) && moduli[2] > 0.0;
        Ok(GroupElement {
            m,
            moduli,
            proximal,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::new(
            self.m
                .try_inverse()
                .ok_or(Error::Degenerate("singular matrix"))?,
        )
    }

    pub fn compose(&self, other: &GroupElement) -> Result<Self> {
        Self::new(self.m * other.m)
    }

    fn require_proximal(&self) -> Result<()> {
        if self.proximal {
            Ok(())
        } else {
            Err(Error::NotProximal(self.moduli))
        }
    }

    /// Unit eigenvector of the top eigenvalue.
    pub fn attracting_direction(&self) -> Result<Vector3<f64>> {
        self.require_proximal()?;
        let lam = self
            .m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .expect("three eigenvalues");
        let svd = (self.m - Matrix3::identity() * lam).svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let k = (0..3)
            .min_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]))
            .expect("nonempty");
        let mut v: Vector3<f64> = v_t.row(k).transpose().normalize();
        // Power steps polish the direction; the gap λ₁/λ₂ makes them fast.
        for _ in 0..4 {
            v = (self.m * v).normalize();
        }
        Ok(v)
    }
}

/// `½(log λ₁ − log λ₃)`.
pub fn translation_length_eig(g: &GroupElement) -> Result<f64> {
    g.require_proximal()?;
    Ok(0.5 * (g.moduli[0].ln() - g.moduli[2].ln()))
}

/// Action of `[[a, b], [c, d]]` on quadratic forms in the basis `(x², xy, y²)`.
pub fn iota3(a: f64, b: f64, c: f64, d: f64) -> Result<GroupElement> {
    let det = a * d - b * c;
    if (det - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("ad - bc = {det}, expected 1")));
    }
    Ok(GroupElement {
        m: Matrix3::new(
            a * a,
            a * b,
            b * b,
            2.0 * a * c,
            a * d + b * c,
            2.0 * b * d,
            c * c,
            c * d,
            d * d,
        ),
        moduli: [0.0; 3],
        proximal: false,
    })
    .and_then(|g| GroupElement::new(g.m))
}

/// `ι₃` of a 2×2 matrix.
pub fn iota3_matrix(g: &Matrix2<f64>) -> Result<GroupElement> {
    iota3(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynLength {
    pub value: f64,
    /// `(1/n) d^H(x, gⁿx)` for `n = 1..=n_max`.
    pub table: Vec<f64>,
}

fn apply_chart(g: &Matrix3<f64>, p: &Vector2<f64>) -> Option<Vector2<f64>> {
    let w = g * Vector3::new(p.x, p.y, 1.0);
    (w.z.abs() > 1e-14).then(|| Vector2::new(w.x / w.z, w.y / w.z))
}

/// Checks that `g` maps boundary samples (and polygon vertices) into the
/// closed domain within `tol`.
pub fn check_invariance(domain: &ConvexDomain, g: &Matrix3<f64>, tol: f64) -> Result<()> {
    let mut pts: Vec<Vector2<f64>> = domain
        .boundary_samples(64)
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    if let Shape::Polygon(p) = domain.shape() {
        pts.extend_from_slice(p.vertices());
    }
    for p in &pts {
        match apply_chart(g, p) {
            Some(q) if domain.boundary_distance(&q) >= -tol => {}
            _ => return Err(Error::Invariance { step: 0 }),
        }
    }
    Ok(())
}

/// `(1/n_max) d^H(x, g^{n_max} x)`, with the orbit and distances computed in
/// exact integer arithmetic.
pub fn translation_length_dyn(
    domain: &ConvexDomain,
    g: &GroupElement,
    x: &Vector2<f64>,
    n_max: usize,
) -> Result<DynLength> {
    if n_max == 0 {
        return Err(Error::Argument("n_max must be positive".into()));
    }
    if domain.boundary_distance(x) <= 0.0 {
        return Err(Error::Containment { x: x.x, y: x.y });
    }
    check_invariance(domain, &g.m, 1e-6)?;
    let exact = ExactDomain::new(domain)?;
    let gm = big_matrix(&g.m)?;
    let x0 = big_vector(&Vector3::new(x.x, x.y, 1.0))?;
    let mut xn = x0.clone();
    let mut table = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        xn = mat_vec(&gm, &xn);
        reduce(&mut xn);
        if !exact.contains(&xn) {
            return Err(Error::Invariance { step: n });
        }
        table.push(exact.distance(&x0, &xn)? / n as f64);
    }
    Ok(DynLength {
        value: table[n_max - 1],
        table,
    })
}

/// Upper bound on `(1/n) d^B(x, gⁿx)`.
///
/// The orbit of `x` leaves the reliable region after a few steps, so the
/// longest orbit segment `z, gz, …, g^m z` through `x` with both ends
/// reliable is measured once and chained: `g` is an isometry of the
/// Blaschke metric, hence `d^B(x, gⁿx) ≤ q·d^B(z, g^m z) + d^B(z, g^r z)`
/// with `n = qm + r`.
pub fn blaschke_length_upper(
    sphere: &AffineSphere,
    g: &GroupElement,
    x: &Vector2<f64>,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    if !sphere.reliable(x) {
        return Err(Error::Collar(vec![]));
    }
    check_invariance(sphere.domain(), &g.m, 1e-6)?;
    let ginv =
        g.m.try_inverse()
            .ok_or(Error::Degenerate("singular matrix"))?;
    let walk = |m: &Matrix3<f64>| {
        let mut pts = vec![];
        let mut p = *x;
        while pts.len() < n {
            match apply_chart(m, &p) {
                Some(q) if sphere.reliable(&q) => {
                    pts.push(q);
                    p = q;
                }
                _ => break,
            }
        }
        pts
    };
    let fwd = walk(&g.m);
    let back = walk(&ginv);
    let m = (fwd.len() + back.len()).min(n);
    if m == 0 {
        return Err(Error::Collar(vec![]));
    }
    // Orbit segment [z, g^m z] with z = g^{-a} x.
    let a = back.len().min(m);
    let orbit_at = |k: usize| -> Vector2<f64> {
        // k counts steps from z
        if k < a {
            back[a - 1 - k]
        } else if k == a {
            *x
        } else {
            fwd[k - a - 1]
        }
    };
    let z = orbit_at(0);
    let block = blaschke_distance_upper(sphere, &z, &orbit_at(m))?;
    let (q, r) = (n / m, n % m);
    let rest = if r == 0 {
        0.0
    } else {
        blaschke_distance_upper(sphere, &z, &orbit_at(r))?
    };
    Ok((q as f64 * block + rest) / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub matrix: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let set: GeneratorSet = serde_json::from_str(text).map_err(|e| Error::Parse {
            key: "generators".into(),
            message: e.to_string(),
        })?;
        for (i, g) in set.generators.iter().enumerate() {
            if g.matrix.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    key: format!("generators[{i}].matrix"),
                    message: "non-finite entry".into(),
                });
            }
            if GroupElement::new(g.matrix()).is_err() {
                return Err(Error::Parse {
                    key: format!("generators[{i}].matrix"),
                    message: "singular matrix".into(),
                });
            }
        }
        if set.generators.is_empty() {
            return Err(Error::Parse {
                key: "generators".into(),
                message: "empty generator list".into(),
            });
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

impl Generator {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.matrix[i][j])
    }
}

fn letter_label(gens: &[Generator], l: usize) -> String {
    let base = &gens[l / 2].label;
    if l % 2 == 0 {
        base.clone()
    } else if base.len() == 1 && base.chars().all(|c| c.is_ascii_lowercase()) {
        base.to_ascii_uppercase()
    } else {
        format!("{base}^-1")
    }
}

/// A reduced word in the generators and their inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub label: String,
    pub element: GroupElement,
}

/// Reduced words of length `1..=depth`, in shortlex order.
pub fn reduced_words(gens: &[Generator], depth: usize) -> Result<Vec<Word>> {
    let mut letters = Vec::with_capacity(2 * gens.len());
    for g in gens {
        let e = GroupElement::new(g.matrix())?;
        letters.push(e.m);
        letters.push(e.inverse()?.m);
    }
    let single = gens.iter().all(|g| g.label.chars().count() == 1);
    let letters = &letters;
    let mut layer: Vec<(Vec<usize>, Matrix3<f64>)> =
        (0..letters.len()).map(|l| (vec![l], letters[l])).collect();
    let mut out = vec![];
    for len in 1..=depth {
        if len > 1 {
            layer = layer
                .into_iter()
                .flat_map(|(w, m)| {
                    let last = *w.last().expect("nonempty");
                    (0..letters.len())
                        .filter(move |l| *l != (last ^ 1))
                        .map(move |l| {
                            let mut w2 = w.clone();
                            w2.push(l);
                            (w2, m * letters[l])
                        })
                })
                .collect();
        }
        let built = par::map_slice(&layer, |(w, m)| -> Result<Word> {
            let parts: Vec<String> = w.iter().map(|l| letter_label(gens, *l)).collect();
            let label = if single {
                parts.concat()
            } else {
                parts.join(".")
            };
            Ok(Word {
                label,
                element: GroupElement::new(*m)?,
            })
        });
        for b in built {
            out.push(b?);
        }
    }
    Ok(out)
}

/// Hull of attracting fixed points, with the frame it was built in.
#[derive(Debug, Clone)]
pub struct LimitSet {
    /// Hull in the chart `x ↦ [A x]`, before normalization.
    pub raw: ConvexDomain,
    /// Chart change `A`: integer rows, so conjugation by it is exact.
    pub frame: Matrix3<f64>,
    pub normalization: Normalization,
    /// Normalized hull.
    pub domain: ConvexDomain,
    /// Labels of non-proximal words that were skipped.
    pub skipped: Vec<String>,
    /// Hausdorff distance between the hull and its image, per generator.
    pub invariance_defect: Vec<f64>,
}

impl LimitSet {
    /// Full chart change into the normalized domain.
    pub fn conjugator(&self) -> Matrix3<f64> {
        self.normalization.matrix() * self.frame
    }

    /// Generator matrix expressed in the raw chart.
    pub fn to_raw(&self, g: &GroupElement) -> Result<GroupElement> {
        GroupElement::new(self.frame * g.m * frame_inverse(&self.frame))
    }

    /// Generator matrix expressed in the normalized chart.
    pub fn to_normalized(&self, g: &GroupElement) -> Result<GroupElement> {
        let c = self.conjugator();
        GroupElement::new(c * g.m * c.try_inverse().ok_or(Error::Degenerate("singular chart"))?)
    }
}

/// Integer functionals tried as the chart's third coordinate.
fn chart_candidates() -> Vec<Vector3<f64>> {
    let mut out = vec![];
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                let v = Vector3::new(a as f64, b as f64, c as f64);
                // One of ±v suffices.
                if v != Vector3::zeros() && [c, b, a].into_iter().find(|t| *t != 0) == Some(1) {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Rows `e_a, e_b, φ`, where `j` is the last index with `φ_j ≠ 0`.
fn frame_for(phi: &Vector3<f64>) -> Matrix3<f64> {
    let j = (0..3).rev().find(|k| phi[*k] != 0.0).expect("nonzero");
    let rest: Vec<usize> = (0..3).filter(|k| *k != j).collect();
    let mut a = Matrix3::zeros();
    a[(0, rest[0])] = 1.0;
    a[(1, rest[1])] = 1.0;
    for k in 0..3 {
        a[(2, k)] = phi[k];
    }
    a
}

/// Exact inverse of a frame from `frame_for`.
fn frame_inverse(a: &Matrix3<f64>) -> Matrix3<f64> {
    let phi = a.row(2).transpose();
    let j = (0..3).rev().find(|k| phi[*k] != 0.0).expect("nonzero");
    let rest: Vec<usize> = (0..3).filter(|k| *k != j).collect();
    let mut inv = Matrix3::zeros();
    inv[(rest[0], 0)] = 1.0;
    inv[(rest[1], 1)] = 1.0;
    // x_j = (y_2 − φ_a y_0 − φ_b y_1)/φ_j
    inv[(j, 0)] = -phi[rest[0]] / phi[j];
    inv[(j, 1)] = -phi[rest[1]] / phi[j];
    inv[(j, 2)] = 1.0 / phi[j];
    inv
}

fn hausdorff(a: &ConvexDomain, b: &ConvexDomain) -> f64 {
    let outside = |from: &ConvexDomain, to: &ConvexDomain| match from.shape() {
        Shape::Polygon(p) => p
            .vertices()
            .iter()
            .map(|v| (-to.boundary_distance(v)).max(0.0))
            .fold(0.0, f64::max),
        Shape::Ellipse(_) => from
            .boundary_samples(256)
            .iter()
            .map(|(v, _)| (-to.boundary_distance(v)).max(0.0))
            .fold(0.0, f64::max),
    };
    outside(a, b).max(outside(b, a))
}

/// Convex hull of the attracting fixed directions of all reduced words up
/// to `depth`, in an integer chart where every direction is finite.
pub fn limit_set_domain(generators: &GeneratorSet, depth: usize) -> Result<LimitSet> {
    let words = reduced_words(&generators.generators, depth)?;
    let mut skipped = vec![];
    let mut dirs = vec![];
    let found = par::map_slice(&words, |w| w.element.attracting_direction().ok());
    for (w, d) in words.iter().zip(found) {
        match d {
            Some(v) => dirs.push(v),
            None => skipped.push(w.label.clone()),
        }
    }
    if dirs.is_empty() {
        return Err(Error::HullDegenerate { area: 0.0 });
    }
    // Consistent signs: the directions of a properly convex set lie in one
    // open half-space.
    let mut sum = Vector3::zeros();
    for v in dirs.iter_mut() {
        if v.dot(&sum) < 0.0
            || (sum == Vector3::zeros()
                && v.iter().find(|c| **c != 0.0).copied().unwrap_or(1.0) < 0.0)
        {
            *v = -*v;
        }
        sum += *v;
    }
    let score = |phi: &Vector3<f64>| {
        dirs.iter()
            .map(|v| phi.dot(v) / phi.norm())
            .fold(f64::INFINITY, f64::min)
    };
    let phi = chart_candidates()
        .into_iter()
        .flat_map(|c| [c, -c])
        .map(|c| (score(&c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .filter(|(s, _)| *s > 1e-6)
        .map(|(_, c)| c)
        .ok_or(Error::Degenerate(
            "fixed directions are not in a properly convex cone",
        ))?;
    let frame = frame_for(&phi);
    let pts: Vec<Vector2<f64>> = dirs
        .iter()
        .map(|v| {
            let w = frame * v;
            Vector2::new(w.x / w.z, w.y / w.z)
        })
        .collect();
    let raw = ConvexDomain::hull(&pts)?;
    let normalization = raw.normalization();
    let domain = raw.apply_normalization(&normalization);
    let mut ls = LimitSet {
        raw,
        frame,
        normalization,
        domain,
        skipped,
        invariance_defect: vec![],
    };
    for g in &generators.generators {
        let e = ls.to_normalized(&GroupElement::new(g.matrix())?)?;
        let defect = match ls.domain.transform(&e.m) {
            Ok(img) => hausdorff(&ls.domain, &img),
            Err(_) => f64::INFINITY,
        };
        ls.invariance_defect.push(defect);
    }
    Ok(ls)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollarRow {
    pub l1: f64,
    pub l2: f64,
    /// `sinh(L/2)·sinh(L′/2)`
    pub sinh_product: f64,
    /// `(e^L − 1)(e^{L′/(n−1)} − 1)` with `n = 3`.
    pub lee_zhang: f64,
    pub pass_sinh: bool,
    pub pass_lee_zhang: bool,
}

/// Both collar inequalities for pairs of lengths the caller asserts belong
/// to linked curves. Strictness is enforced with margin `COLLAR_MARGIN`.
pub fn collar_audit(pairs: &[(f64, f64)]) -> Vec<CollarRow> {
    pairs
        .iter()
        .map(|&(l1, l2)| {
            let sinh_product = (0.5 * l1).sinh() * (0.5 * l2).sinh();
            let lee_zhang = l1.exp_m1() * (0.5 * l2).exp_m1();
            CollarRow {
                l1,
                l2,
                sinh_product,
                lee_zhang,
                pass_sinh: sinh_product > 1.0 + COLLAR_MARGIN,
                pass_lee_zhang: lee_zhang > 1.0 + COLLAR_MARGIN,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub word: String,
    pub l_h_eig: f64,
    pub l_h_dyn: Option<f64>,
    pub l_b_upper: Option<f64>,
    /// Orbit length used for `l_b_upper`.
    pub n_b: usize,
}

impl SpectrumEntry {
    pub fn pass(&self) -> bool {
        let dyn_ok = self
            .l_h_dyn
            .map_or(true, |d| (d - self.l_h_eig).abs() <= DYN_TOL);
        let b_ok = self.l_b_upper.map_or(true, |b| {
            b <= self.l_h_eig + 1.0 / self.n_b as f64 + BLASCHKE_SLACK
        });
        self.l_h_eig >= 0.0 && dyn_ok && b_ok
    }
}

pub fn spectrum_csv(entries: &[SpectrumEntry], header: &str) -> String {
    let mut out = String::new();
    if !header.is_empty() {
        writeln!(out, "# {header}").expect("string write");
    }
    out.push_str("word,l_H_eig,l_H_dyn,l_B_upper,pass\n");
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |v| format!("{v:.12e}"));
    for e in entries {
        writeln!(
            out,
            "{},{:.12e},{},{},{}",
            e.word,
            e.l_h_eig,
            opt(e.l_h_dyn),
            opt(e.l_b_upper),
            e.pass()
        )
        .expect("string write");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;

    fn diag(a: f64, b: f64, c: f64) -> GroupElement {
        GroupElement::new(Matrix3::from_diagonal(&Vector3::new(a, b, c))).unwrap()
    }

    /// Maps the positive simplex onto the triangle (−1,−1), (1,−1), (0,1).
    fn t_matrix() -> Matrix3<f64> {
        Matrix3::new(-1.0, 1.0, 0.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0)
    }

    fn triangle() -> ConvexDomain {
        ConvexDomain::polygon(vec![
            Vector2::new(-1.0, -1.0),
            Vector2::new(1.0, -1.0),
            Vector2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn eigenvalue_lengths() {
        assert!(
            (translation_length_eig(&diag(1f64.exp(), 1.0, (-1f64).exp())).unwrap() - 1.0).abs()
                < 1e-12
        );
        assert!((translation_length_eig(&diag(4.0, 1.0, 0.25)).unwrap() - 4f64.ln()).abs() < 1e-12);
        let g = diag(3.0, 3.0, 1.0 / 9.0);
        assert!(!g.proximal);
        assert!(matches!(
            translation_length_eig(&g),
            Err(Error::NotProximal(_))
        ));
        let rot =
            GroupElement::new(Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(!rot.proximal);
        // Determinant normalization.
        let g = GroupElement::new(Matrix3::from_diagonal(&Vector3::new(8.0, 2.0, 0.5))).unwrap();
        assert!((g.m.determinant() - 1.0).abs() < 1e-12);
        assert!((g.moduli.iter().product::<f64>() - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn conjugation_and_powers(seed in prop::array::uniform9(-1.0f64..1.0), k in 1u32..4) {
            let p = Matrix3::from_row_slice(&seed) + Matrix3::identity() * 2.5;
            prop_assume!(p.determinant().abs() > 0.1);
            let g = diag(4.0, 1.5, 1.0 / 6.0);
            let c = GroupElement::new(p * g.m * p.try_inverse().unwrap()).unwrap();
            let l = translation_length_eig(&g).unwrap();
            prop_assert!((translation_length_eig(&c).unwrap() - l).abs() < 1e-9);
            let gk = GroupElement::new(g.m.pow(k)).unwrap();
            prop_assert!((translation_length_eig(&gk).unwrap() - k as f64 * l).abs() < 1e-9);
        }

        #[test]
        fn iota3_is_a_homomorphism(a in prop::array::uniform3(-2.0f64..2.0), b in prop::array::uniform3(-2.0f64..2.0)) {
            let sl2 = |v: [f64; 3]| {
                // [[x, y], [z, (1 + yz)/x]] with x bounded away from zero
                let x = if v[0].abs() < 0.3 { 0.3 + v[0].abs() } else { v[0] };
                Matrix2::new(x, v[1], v[2], (1.0 + v[1] * v[2]) / x)
            };
            let (g1, g2) = (sl2(a), sl2(b));
            let lhs = iota3_matrix(&(g1 * g2)).unwrap().m;
            let rhs = iota3_matrix(&g1).unwrap().m * iota3_matrix(&g2).unwrap().m;
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn iota3_diagonal_and_lengths() {
        let a = 1.7f64;
        let g = iota3(a, 0.0, 0.0, 1.0 / a).unwrap();
        assert!(
            (g.m - Matrix3::from_diagonal(&Vector3::new(a * a, 1.0, 1.0 / (a * a)))).norm() < 1e-12
        );
        assert!((translation_length_eig(&g).unwrap() - 2.0 * a.ln()).abs() < 1e-12);
        assert!(iota3(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dynamical_length_on_the_triangle() {
        let t = t_matrix();
        let g = GroupElement::new(t * diag(4.0, 1.0, 0.25).m * t.try_inverse().unwrap()).unwrap();
        // Exact dyadic entries.
        assert!((g.m * 16.0).iter().all(|v| v.fract() == 0.0));
        let dl = translation_length_dyn(&triangle(), &g, &Vector2::new(0.1, -0.3), N_MAX).unwrap();
        assert!((dl.value - 4f64.ln()).abs() <= DYN_TOL, "{}", dl.value);
        assert_eq!(dl.table.len(), N_MAX);
        let id = GroupElement::new(Matrix3::identity()).unwrap();
        assert_eq!(
            translation_length_dyn(&triangle(), &id, &Vector2::zeros(), 10)
                .unwrap()
                .value,
            0.0
        );
        // Power law.
        let g3 = GroupElement::new(g.m.pow(3)).unwrap();
        let l3 = translation_length_dyn(&triangle(), &g3, &Vector2::new(0.1, -0.3), N_MAX)
            .unwrap()
            .value;
        assert!((l3 - 3.0 * dl.value).abs() < 1e-2);
    }

    #[test]
    fn dynamical_length_on_the_disc() {
        let boost = Matrix3::new(1.25, 0.0, 0.75, 0.0, 1.0, 0.0, 0.75, 0.0, 1.25);
        let s = Matrix3::new(0.5, 0.0, 0.5, 0.0, 1.0, 0.0, -0.5, 0.0, 0.5);
        let i3 = iota3(2f64.sqrt(), 0.0, 0.0, 1.0 / 2f64.sqrt()).unwrap();
        assert!((s.try_inverse().unwrap() * i3.m * s - boost).norm() < 1e-12);
        let g = GroupElement::new(boost).unwrap();
        let dl = translation_length_dyn(
            &ConvexDomain::unit_disc(),
            &g,
            &Vector2::new(0.2, 0.3),
            N_MAX,
        )
        .unwrap();
        assert!((dl.value - 2f64.ln()).abs() <= DYN_TOL);
    }

    #[test]
    fn orbit_leaving_the_domain_is_an_error() {
        let shear =
            GroupElement::new(Matrix3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!(matches!(
            translation_length_dyn(&triangle(), &shear, &Vector2::zeros(), 5),
            Err(Error::Invariance { .. })
        ));
    }

    fn triangle_gens() -> GeneratorSet {
        let cyc = Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let a = diag(4.0, 1.0, 0.25).m;
        let b = cyc * a * cyc.transpose();
        let c = cyc * b * cyc.transpose();
        let gen = |l: &str, m: Matrix3<f64>| Generator {
            label: l.into(),
            matrix: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])),
        };
        GeneratorSet {
            generators: vec![gen("a", a), gen("b", b), gen("c", c)],
        }
    }

    #[test]
    fn limit_set_of_diagonal_generators_is_a_triangle() {
        let ls = limit_set_domain(&triangle_gens(), 4).unwrap();
        match ls.raw.shape() {
            Shape::Polygon(p) => assert_eq!(p.vertices().len(), 3),
            _ => panic!("polygon expected"),
        }
        assert!(!ls.skipped.is_empty());
        assert!(ls.invariance_defect.iter().all(|d| *d < 1e-12));
        assert!((frame_inverse(&ls.frame) * ls.frame - Matrix3::identity()).norm() == 0.0);
        // Exact raw chart: dynamical lengths run on the hull.
        let a = ls
            .to_raw(&GroupElement::new(triangle_gens().generators[0].matrix()).unwrap())
            .unwrap();
        let x = ls.raw.centroid();
        let dl = translation_length_dyn(&ls.raw, &a, &x, N_MAX).unwrap();
        assert!((dl.value - 4f64.ln()).abs() <= DYN_TOL);
    }

    #[test]
    fn single_generator_hull_is_degenerate() {
        let mut g = triangle_gens();
        g.generators.truncate(1);
        assert!(matches!(
            limit_set_domain(&g, 3),
            Err(Error::HullDegenerate { .. })
        ));
    }

    #[test]
    fn fuchsian_limit_set_lies_on_a_conic() {
        let h1 = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        let r = Matrix2::new(0.6, -0.8, 0.8, 0.6);
        let h2 = r * h1 * r.transpose();
        let gen = |l: &str, m: &Matrix2<f64>| {
            let e = iota3_matrix(m).unwrap().m;
            Generator {
                label: l.into(),
                matrix: std::array::from_fn(|i| std::array::from_fn(|j| e[(i, j)])),
            }
        };
        let set = GeneratorSet {
            generators: vec![gen("a", &h1), gen("b", &h2)],
        };
        let mut areas = vec![];
        for depth in [2, 4, 6] {
            let ls = limit_set_domain(&set, depth).unwrap();
            // Squares (p², 2pq, q²) lie on Y² = 4XZ; the chart X/(X+Z), Y/(X+Z)
            // sends it to the ellipse 4(u − ½)² + v² = 1.
            assert_eq!(ls.frame.row(2), Vector3::new(1.0, 0.0, 1.0).transpose());
            if let Shape::Polygon(p) = ls.raw.shape() {
                for v in p.vertices() {
                    assert!((4.0 * (v.x - 0.5).powi(2) + v.y * v.y - 1.0).abs() < 1e-9);
                }
            }
            areas.push(ls.raw.area());
        }
        assert!(
            areas[0] < areas[1] && areas[1] < areas[2] && areas[2] < std::f64::consts::PI / 2.0
        );
    }

    #[test]
    fn collar_examples() {
        let b = 2.0 * 1f64.asinh();
        let rows = collar_audit(&[(b, b), (2.0, 2.0), (1.0, 1.0)]);
        assert!((rows[0].sinh_product - 1.0).abs() < 1e-12 && !rows[0].pass_sinh);
        assert!((rows[1].sinh_product - 1f64.sinh().powi(2)).abs() < 1e-12 && rows[1].pass_sinh);
        assert!((rows[1].sinh_product - 1.3811).abs() < 1e-4);
        assert!((rows[2].lee_zhang - (1f64.exp() - 1.0) * (0.5f64.exp() - 1.0)).abs() < 1e-12);
        assert!(rows[2].pass_lee_zhang && (rows[2].lee_zhang - 1.115).abs() < 1e-3);
    }

    #[test]
    fn generator_parsing() {
        let s = triangle_gens();
        assert_eq!(GeneratorSet::from_json(&s.to_json()).unwrap(), s);
        let bad = r#"{"generators":[{"label":"a","matrix":[[1,0,0],[0,1,0],[0,0,0]]}]}"#;
        match GeneratorSet::from_json(bad) {
            Err(Error::Parse { key, .. }) => assert_eq!(key, "generators[0].matrix"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            GeneratorSet::from_json("{}"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn reduced_word_counts() {
        let w = reduced_words(&triangle_gens().generators, 3).unwrap();
        assert_eq!(w.len(), 6 + 30 + 150);
        assert_eq!(w[0].label, "a");
        assert_eq!(w[1].label, "A");
    }
}
