//! Projective primitives in the fixed affine chart `x₃ = 1`.
//!
//! Domains are bounded convex sets of the chart plane. Polygons are stored as
//! counter-clockwise vertex lists with outward unit edge normals, ellipses by
//! center, semi-axes and rotation. Hull inputs are converted to polygons when
//! the domain is built.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collinearity tolerance on the normalized triple product.
pub const COLLINEARITY_TOL: f64 = 1e-9;
/// Default boundary tolerance for [`ConvexDomain::contains`], in chart units.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// A point of RP², stored as a unit vector whose first nonzero coordinate is
/// positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectivePoint(Vector3<f64>);

impl ProjectivePoint {
    pub fn new(coords: Vector3<f64>) -> Result<Self> {
        let n = coords.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Degenerate("homogeneous coordinates are all zero"));
        }
        let mut v = coords / n;
        let lead = v.iter().copied().find(|c| *c != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            v = -v;
        }
        Ok(ProjectivePoint(v))
    }

    /// The point `[x : y : 1]`.
    pub fn from_chart(p: Vector2<f64>) -> Self {
        Self::new(Vector3::new(p.x, p.y, 1.0)).expect("chart points are never zero")
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    /// Chart coordinates `(x₁/x₃, x₂/x₃)`.
    pub fn chart(&self) -> Result<Vector2<f64>> {
        let v = &self.0;
        if v.z.abs() <= 1e-14 {
            return Err(Error::Chart);
        }
        Ok(Vector2::new(v.x / v.z, v.y / v.z))
    }

    pub fn normalized(&self) -> Self {
        Self::new(self.0).expect("already nonzero")
    }

    pub fn transform(&self, g: &Matrix3<f64>) -> Result<Self> {
        Self::new(g * self.0)
    }
}

/// Cross-ratio of four collinear points, normalized so that `(0, 1, ∞, t)`
/// has value `t`.
pub fn cross_ratio(
    x1: &ProjectivePoint,
    x2: &ProjectivePoint,
    x3: &ProjectivePoint,
    x4: &ProjectivePoint,
) -> Result<f64> {
    let pts = [x1.coords(), x2.coords(), x3.coords(), x4.coords()];
    // Orthonormal basis of the plane through the origin spanned by the line.
    let (i, j) = farthest_pair(&pts);
    let e = *pts[i];
    let f = pts[j] - e * e.dot(pts[j]);
    let fnorm = f.norm();
    if fnorm < 1e-14 {
        return Err(Error::Degenerate("points coincide"));
    }
    let f = f / fnorm;
    let normal = e.cross(&f);
    for p in pts {
        let off = normal.dot(p);
        if off.abs() > COLLINEARITY_TOL {
            return Err(Error::Collinear(off));
        }
    }
    let line: Vec<Vector2<f64>> = pts
        .iter()
        .map(|p| Vector2::new(e.dot(p), f.dot(p)))
        .collect();
    let det = |a: usize, b: usize| line[a].x * line[b].y - line[a].y * line[b].x;
    for a in 0..4 {
        for b in (a + 1)..4 {
            if det(a, b).abs() < 1e-14 {
                return Err(Error::Degenerate("coincident points in cross-ratio"));
            }
        }
    }
    Ok(det(3, 0) * det(1, 2) / (det(3, 2) * det(1, 0)))
}

/// Cross-ratio in an affine coordinate on the line; `f64::INFINITY` is
/// accepted for one argument.
pub fn cross_ratio_affine(x1: f64, x2: f64, x3: f64, x4: f64) -> f64 {
    if x3.is_infinite() {
        return (x4 - x1) / (x2 - x1);
    }
    ((x4 - x1) * (x2 - x3)) / ((x4 - x3) * (x2 - x1))
}

fn farthest_pair(pts: &[&Vector3<f64>; 4]) -> (usize, usize) {
    let mut best = (0, 1, -1.0);
    for a in 0..4 {
        for b in (a + 1)..4 {
            let s = pts[a].cross(pts[b]).norm();
            if s > best.2 {
                best = (a, b, s);
            }
        }
    }
    (best.0, best.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Domain description as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        rotation_rad: f64,
    },
    Hull {
        points: Vec<[f64; 2]>,
    },
}

impl DomainSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            key: "<document>".into(),
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            key: "<document>".into(),
            message: "expected a JSON object".into(),
        })?;
        let kind = obj
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::Parse {
                key: "type".into(),
                message: "missing or not a string".into(),
            })?;
        let points = |key: &str| -> Result<Vec<[f64; 2]>> {
            let arr = obj
                .get(key)
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::Parse {
                    key: key.into(),
                    message: "missing or not an array".into(),
                })?;
            arr.iter()
                .enumerate()
                .map(|(i, p)| {
                    pair(p).ok_or_else(|| Error::Parse {
                        key: format!("{key}[{i}]"),
                        message: "expected [x, y]".into(),
                    })
                })
                .collect()
        };
        let pair_key = |key: &str| -> Result<[f64; 2]> {
            obj.get(key).and_then(pair).ok_or_else(|| Error::Parse {
                key: key.into(),
                message: "expected [x, y]".into(),
            })
        };
        match kind {
            "polygon" => Ok(DomainSpec::Polygon {
                vertices: points("vertices")?,
            }),
            "hull" => Ok(DomainSpec::Hull {
                points: points("points")?,
            }),
            "ellipse" => Ok(DomainSpec::Ellipse {
                center: pair_key("center")?,
                semi_axes: pair_key("semi_axes")?,
                rotation_rad: obj
                    .get("rotation_rad")
                    .map(|r| {
                        r.as_f64().ok_or_else(|| Error::Parse {
                            key: "rotation_rad".into(),
                            message: "expected a number".into(),
                        })
                    })
                    .transpose()?
                    .unwrap_or(0.0),
            }),
            other => Err(Error::Parse {
                key: "type".into(),
                message: format!("unknown domain type `{other}`"),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain specs serialize")
    }
}

fn pair(v: &serde_json::Value) -> Option<[f64; 2]> {
    let a = v.as_array()?;
    if a.len() != 2 {
        return None;
    }
    Some([a[0].as_f64()?, a[1].as_f64()?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vector2<f64>>,
    normals: Vec<Vector2<f64>>,
    offsets: Vec<f64>,
}

impl Polygon {
    /// Builds a strictly convex polygon. Vertices may be given in either
    /// orientation; every vertex must be extremal.
    pub fn new(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(
                "a polygon needs at least 3 vertices".into(),
            ));
        }
        if vertices
            .iter()
            .any(|v| !v.x.is_finite() || !v.y.is_finite())
        {
            return Err(Error::InvalidDomain("non-finite vertex".into()));
        }
        let mut vertices = vertices;
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        let scale = vertices
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        for i in 0..n {
            let p = vertices[(i + n - 1) % n];
            let q = vertices[i];
            let r = vertices[(i + 1) % n];
            let turn = cross2(q - p, r - q);
            if !(turn > 1e-12 * scale * scale) {
                return Err(Error::InvalidDomain(format!(
                    "vertex {i} ({}, {}) is not extremal",
                    q.x, q.y
                )));
            }
        }
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let e = q - p;
            let nrm = Vector2::new(e.y, -e.x).normalize();
            normals.push(nrm);
            offsets.push(nrm.dot(&p));
        }
        let poly = Polygon {
            vertices,
            normals,
            offsets,
        };
        // Turning angles must add to one full turn, otherwise the polygon
        // winds more than once.
        let total: f64 = (0..n)
            .map(|i| {
                let a = poly.normals[i];
                let b = poly.normals[(i + 1) % n];
                cross2(a, b).atan2(a.dot(&b))
            })
            .sum();
        if (total - 2.0 * std::f64::consts::PI).abs() > 1e-6 {
            return Err(Error::InvalidDomain("polygon is not simple".into()));
        }
        Ok(poly)
    }

    /// Convex hull of a point cloud (monotone chain). Duplicates and
    /// collinear boundary points are dropped.
    pub fn hull(points: &[Vector2<f64>]) -> Result<Self> {
        let mut pts: Vec<Vector2<f64>> = points.to_vec();
        if pts.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidDomain("non-finite hull point".into()));
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup_by(|a, b| (*a - *b).norm() <= 1e-14);
        let mut hull = monotone_chain(&pts);
        // Drop nearly straight vertices that the constructor would reject.
        let scale = hull.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        while hull.len() >= 3 {
            let n = hull.len();
            let flat = (0..n).find(|&i| {
                cross2(hull[i] - hull[(i + n - 1) % n], hull[(i + 1) % n] - hull[i])
                    <= 1e-12 * scale * scale
            });
            match flat {
                Some(i) => {
                    hull.remove(i);
                }
                None => break,
            }
        }
        if hull.len() < 3 {
            let area = 0.0;
            return Err(Error::HullDegenerate { area });
        }
        let area = signed_area(&hull).abs();
        if area < 1e-8 {
            return Err(Error::HullDegenerate { area });
        }
        Polygon::new(hull)
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    /// Outward unit normals; edge `i` joins vertex `i` to `i + 1`.
    pub fn normals(&self) -> &[Vector2<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vector2<f64> {
        let n = self.vertices.len();
        let mut c = Vector2::zeros();
        let mut a = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross2(p, q);
            a += w;
            c += (p + q) * w;
        }
        c / (3.0 * a)
    }

    /// Edge functionals `cᵢ − nᵢ·p`, positive inside.
    pub fn edge_values(&self, p: &Vector2<f64>) -> impl Iterator<Item = f64> + '_ {
        let p = *p;
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(move |(n, c)| c - n.dot(&p))
    }
}

pub(crate) fn monotone_chain(sorted: &[Vector2<f64>]) -> Vec<Vector2<f64>> {
    if sorted.len() < 3 {
        return sorted.to_vec();
    }
    let mut lower: Vec<Vector2<f64>> = Vec::new();
    for p in sorted {
        while lower.len() >= 2
            && cross2(
                lower[lower.len() - 1] - lower[lower.len() - 2],
                p - lower[lower.len() - 2],
            ) <= 1e-14
        {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vector2<f64>> = Vec::new();
    for p in sorted.iter().rev() {
        while upper.len() >= 2
            && cross2(
                upper[upper.len() - 1] - upper[upper.len() - 2],
                p - upper[upper.len() - 2],
            ) <= 1e-14
        {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub(crate) fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

fn signed_area(v: &[Vector2<f64>]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross2(v[i], v[(i + 1) % n])).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipse {
    pub center: Vector2<f64>,
    pub semi_axes: [f64; 2],
    pub rotation: f64,
}

impl Ellipse {
    pub fn new(center: Vector2<f64>, semi_axes: [f64; 2], rotation: f64) -> Result<Self> {
        if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) || !semi_axes.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidDomain(
                "ellipse semi-axes must be positive".into(),
            ));
        }
        Ok(Ellipse {
            center,
            semi_axes,
            rotation,
        })
    }

    fn frame(&self) -> Matrix2<f64> {
        let (s, c) = self.rotation.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    /// Coordinates in the frame where the ellipse is `(x/a)² + (y/b)² = 1`.
    fn local(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.frame().transpose() * (p - self.center)
    }

    /// Shape matrix `M` with `(p − c)ᵀ M (p − c) = 1` on the boundary.
    pub fn shape_matrix(&self) -> Matrix2<f64> {
        let r = self.frame();
        let d = Matrix2::new(
            1.0 / self.semi_axes[0].powi(2),
            0.0,
            0.0,
            1.0 / self.semi_axes[1].powi(2),
        );
        r * d * r.transpose()
    }

    /// Homogeneous quadratic form, negative inside the ellipse.
    pub fn conic(&self) -> Matrix3<f64> {
        let m = self.shape_matrix();
        let c = self.center;
        let mc = m * c;
        Matrix3::new(
            m[(0, 0)],
            m[(0, 1)],
            -mc.x,
            m[(1, 0)],
            m[(1, 1)],
            -mc.y,
            -mc.x,
            -mc.y,
            c.dot(&mc) - 1.0,
        )
    }

    /// Reads an ellipse back from a homogeneous conic; fails unless the conic
    /// bounds an ellipse in the chart.
    pub fn from_conic(q: &Matrix3<f64>) -> Result<Self> {
        let m = Matrix2::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
        let m = (m + m.transpose()) * 0.5;
        let lin = Vector2::new(q[(0, 2)] + q[(2, 0)], q[(1, 2)] + q[(2, 1)]) * 0.5;
        let minv = m.try_inverse().ok_or_else(|| {
            Error::InvalidDomain("conic image is not bounded in the chart".into())
        })?;
        let center = -(minv * lin);
        let f0 = q[(2, 2)] + lin.dot(&center);
        let eig = m.symmetric_eigen();
        let (l0, l1) = (eig.eigenvalues[0] / -f0, eig.eigenvalues[1] / -f0);
        if !(l0 > 0.0 && l1 > 0.0) {
            return Err(Error::InvalidDomain(
                "conic image is not an ellipse in the chart".into(),
            ));
        }
        let v0 = eig.eigenvectors.column(0);
        let rotation = v0[1].atan2(v0[0]);
        Ellipse::new(center, [1.0 / l0.sqrt(), 1.0 / l1.sqrt()], rotation)
    }

    /// Euclidean distance from `p` to the boundary curve.
    pub fn boundary_distance(&self, p: &Vector2<f64>) -> f64 {
        let q = self.local(p);
        let (a, b) = (self.semi_axes[0], self.semi_axes[1]);
        let (x, y) = (q.x.abs(), q.y.abs());
        // Work with a >= b.
        let (a, b, x, y) = if a >= b { (a, b, x, y) } else { (b, a, y, x) };
        distance_to_ellipse_quadrant(a, b, x, y)
    }
}

/// Distance from `(x, y)` (first quadrant, `a >= b`) to the ellipse
/// `(x/a)² + (y/b)² = 1`, by bisection on the Lagrange parameter.
fn distance_to_ellipse_quadrant(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if y > 0.0 {
        if x > 0.0 {
            let z0 = x / a;
            let z1 = y / b;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (a / b).powi(2);
                let sbar = root_bisection(r0, z0, z1, g);
                let px = r0 * x / (sbar + r0);
                let py = y / (sbar + 1.0);
                return ((px - x).powi(2) + (py - y).powi(2)).sqrt();
            }
            0.0
        } else {
            (y - b).abs()
        }
    } else {
        let numer = a * x;
        let denom = a * a - b * b;
        if numer < denom {
            let xde = numer / denom;
            let px = a * xde;
            let py = b * (1.0 - xde * xde).max(0.0).sqrt();
            ((px - x).powi(2) + py * py).sqrt()
        } else {
            (x - a).abs()
        }
    }
}

fn root_bisection(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Polygon(Polygon),
    Ellipse(Ellipse),
}

/// A bounded open convex domain of the chart plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexDomain {
    shape: Shape,
}

/// The affine map applied by [`ConvexDomain::from_spec`]: `p ↦ scale·(p − shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub shift: Vector2<f64>,
    pub scale: f64,
}

impl Normalization {
    pub fn identity() -> Self {
        Normalization {
            shift: Vector2::zeros(),
            scale: 1.0,
        }
    }

    /// The map as a projective transformation of homogeneous coordinates.
    pub fn matrix(&self) -> Matrix3<f64> {
        let s = self.scale;
        Matrix3::new(
            s,
            0.0,
            -s * self.shift.x,
            0.0,
            s,
            -s * self.shift.y,
            0.0,
            0.0,
            1.0,
        )
    }

    pub fn apply(&self, p: &Vector2<f64>) -> Vector2<f64> {
        (p - self.shift) * self.scale
    }
}

impl ConvexDomain {
    pub fn polygon(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        Ok(ConvexDomain {
            shape: Shape::Polygon(Polygon::new(vertices)?),
        })
    }

    pub fn ellipse(center: Vector2<f64>, semi_axes: [f64; 2], rotation: f64) -> Result<Self> {
        Ok(ConvexDomain {
            shape: Shape::Ellipse(Ellipse::new(center, semi_axes, rotation)?),
        })
    }

    pub fn hull(points: &[Vector2<f64>]) -> Result<Self> {
        Ok(ConvexDomain {
            shape: Shape::Polygon(Polygon::hull(points)?),
        })
    }

    pub fn unit_disc() -> Self {
        Self::ellipse(Vector2::zeros(), [1.0, 1.0], 0.0).expect("valid")
    }

    /// The square `(−1, 1)²`.
    pub fn unit_square() -> Self {
        Self::polygon(vec![
            Vector2::new(-1.0, -1.0),
            Vector2::new(1.0, -1.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(-1.0, 1.0),
        ])
        .expect("valid")
    }

    /// Builds the domain described by `spec`, then normalizes it: centroid to
    /// the origin, scaled so that its bounding box fits `[−1, 1]²` with at
    /// least one side touching.
    pub fn from_spec(spec: &DomainSpec) -> Result<(Self, Normalization)> {
        let raw = Self::from_spec_raw(spec)?;
        let norm = raw.normalization();
        Ok((raw.apply_normalization(&norm), norm))
    }

    /// Builds the domain described by `spec` without normalizing it.
    pub fn from_spec_raw(spec: &DomainSpec) -> Result<Self> {
        Ok(match spec {
            DomainSpec::Polygon { vertices } => {
                Self::polygon(vertices.iter().map(|p| Vector2::new(p[0], p[1])).collect())?
            }
            DomainSpec::Hull { points } => {
                let pts: Vec<_> = points.iter().map(|p| Vector2::new(p[0], p[1])).collect();
                Self::hull(&pts).map_err(|e| match e {
                    Error::HullDegenerate { area } => {
                        Error::InvalidDomain(format!("hull has area {area:.3e}"))
                    }
                    other => other,
                })?
            }
            DomainSpec::Ellipse {
                center,
                semi_axes,
                rotation_rad,
            } => Self::ellipse(
                Vector2::new(center[0], center[1]),
                *semi_axes,
                *rotation_rad,
            )?,
        })
    }

    /// Centroid shift and scale that bring the domain into `[−1, 1]²`.
    pub fn normalization(&self) -> Normalization {
        let shift = self.centroid();
        let (lo, hi) = self.bounding_box();
        let reach = [
            lo.x - shift.x,
            lo.y - shift.y,
            hi.x - shift.x,
            hi.y - shift.y,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        Normalization {
            shift,
            scale: 1.0 / reach,
        }
    }

    pub fn apply_normalization(&self, n: &Normalization) -> Self {
        match &self.shape {
            Shape::Polygon(p) => Self::polygon(p.vertices.iter().map(|v| n.apply(v)).collect())
                .expect("similarity keeps convexity"),
            Shape::Ellipse(e) => Self::ellipse(
                n.apply(&e.center),
                [e.semi_axes[0] * n.scale, e.semi_axes[1] * n.scale],
                e.rotation,
            )
            .expect("similarity keeps ellipses"),
        }
    }

    /// Image of the domain under a projective transformation. Fails if the
    /// image is not bounded in the chart.
    pub fn transform(&self, g: &Matrix3<f64>) -> Result<Self> {
        match &self.shape {
            Shape::Polygon(p) => {
                let mut sign = 0.0;
                let mut verts = Vec::with_capacity(p.vertices.len());
                for v in &p.vertices {
                    let w = g * Vector3::new(v.x, v.y, 1.0);
                    if sign == 0.0 {
                        sign = w.z.signum();
                    }
                    if w.z * sign <= 1e-12 {
                        return Err(Error::InvalidDomain(
                            "image polygon crosses the line at infinity".into(),
                        ));
                    }
                    verts.push(Vector2::new(w.x / w.z, w.y / w.z));
                }
                Self::polygon(verts)
            }
            Shape::Ellipse(e) => {
                let ginv = g
                    .try_inverse()
                    .ok_or(Error::Degenerate("singular projective transformation"))?;
                let q = ginv.transpose() * e.conic() * ginv;
                Ok(ConvexDomain {
                    shape: Shape::Ellipse(Ellipse::from_conic(&q)?),
                })
            }
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.shape, Shape::Polygon(_))
    }

    pub fn spec(&self) -> DomainSpec {
        match &self.shape {
            Shape::Polygon(p) => DomainSpec::Polygon {
                vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
            },
            Shape::Ellipse(e) => DomainSpec::Ellipse {
                center: [e.center.x, e.center.y],
                semi_axes: e.semi_axes,
                rotation_rad: e.rotation,
            },
        }
    }

    pub fn centroid(&self) -> Vector2<f64> {
        match &self.shape {
            Shape::Polygon(p) => p.centroid(),
            Shape::Ellipse(e) => e.center,
        }
    }

    pub fn bounding_box(&self) -> (Vector2<f64>, Vector2<f64>) {
        match &self.shape {
            Shape::Polygon(p) => {
                let mut lo = Vector2::repeat(f64::INFINITY);
                let mut hi = Vector2::repeat(f64::NEG_INFINITY);
                for v in &p.vertices {
                    lo = lo.inf(v);
                    hi = hi.sup(v);
                }
                (lo, hi)
            }
            Shape::Ellipse(e) => {
                let m = e.shape_matrix().try_inverse().expect("positive definite");
                let half = Vector2::new(m[(0, 0)].sqrt(), m[(1, 1)].sqrt());
                (e.center - half, e.center + half)
            }
        }
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(p) => p.area(),
            Shape::Ellipse(e) => std::f64::consts::PI * e.semi_axes[0] * e.semi_axes[1],
        }
    }

    /// Euclidean distance to the boundary for points of the closed domain;
    /// negative outside (exact for polygons only up to the sign).
    pub fn boundary_distance(&self, p: &Vector2<f64>) -> f64 {
        match &self.shape {
            Shape::Polygon(poly) => poly.edge_values(p).fold(f64::INFINITY, f64::min),
            Shape::Ellipse(e) => {
                let d = e.boundary_distance(p);
                let q = e.local(p);
                let r = (q.x / e.semi_axes[0]).powi(2) + (q.y / e.semi_axes[1]).powi(2);
                if r <= 1.0 {
                    d
                } else {
                    -d
                }
            }
        }
    }

    pub fn contains_chart(&self, p: &Vector2<f64>, tol: f64) -> Containment {
        let d = self.boundary_distance(p);
        if d > tol {
            Containment::Inside
        } else if d >= -tol {
            Containment::Boundary
        } else {
            Containment::Outside
        }
    }

    pub fn contains(&self, x: &ProjectivePoint) -> Result<Containment> {
        Ok(self.contains_chart(&x.chart()?, BOUNDARY_TOL))
    }

    /// Smallest `s > 0` with `p + s·dir` on the boundary, for `p` in the
    /// closed domain. Infinite if `dir` is zero.
    pub fn ray_exit(&self, p: &Vector2<f64>, dir: &Vector2<f64>) -> f64 {
        match &self.shape {
            Shape::Polygon(poly) => {
                let mut best = f64::INFINITY;
                for (n, c) in poly.normals.iter().zip(&poly.offsets) {
                    let den = n.dot(dir);
                    if den > 0.0 {
                        let s = (c - n.dot(p)) / den;
                        if s < best {
                            best = s;
                        }
                    }
                }
                best.max(0.0)
            }
            Shape::Ellipse(e) => {
                let m = e.shape_matrix();
                let q = p - e.center;
                let a = dir.dot(&(m * dir));
                if a == 0.0 {
                    return f64::INFINITY;
                }
                let b = q.dot(&(m * dir));
                let c = q.dot(&(m * q)) - 1.0;
                let disc = (b * b - a * c).max(0.0);
                // Larger root of a s² + 2 b s + c, in the stable form.
                let s = if b <= 0.0 {
                    (-b + disc.sqrt()) / a
                } else {
                    -c / (b + disc.sqrt())
                };
                s.max(0.0)
            }
        }
    }

    /// Boundary intersections of the line through `x` and `y`, ordered so
    /// that the points read `a, x, y, b` along the line.
    pub fn chord_through(&self, x: &ProjectivePoint, y: &ProjectivePoint) -> Result<Chord> {
        let (xc, yc) = (x.chart()?, y.chart()?);
        Ok(self.chord_through_chart(&xc, &yc)?.0)
    }

    /// Chart version of [`chord_through`](Self::chord_through). Also returns
    /// the exit parameters `(s_a, s_b, t_y)` along `dir = y − x`:
    /// `a = x − s_a·dir`, `b = x + s_b·dir`, `b = y + t_y·dir`.
    pub fn chord_through_chart(
        &self,
        x: &Vector2<f64>,
        y: &Vector2<f64>,
    ) -> Result<(Chord, [f64; 3])> {
        for p in [x, y] {
            if self.contains_chart(p, BOUNDARY_TOL) == Containment::Outside {
                return Err(Error::Containment { x: p.x, y: p.y });
            }
        }
        let dir = y - x;
        if dir.norm() <= 1e-15 * (1.0 + x.norm()) {
            return Err(Error::Degenerate("chord through coincident points"));
        }
        let s_a = self.ray_exit(x, &-dir);
        let t_y = self.ray_exit(y, &dir);
        let s_b = 1.0 + t_y;
        let a = x - dir * s_a;
        let b = x + dir * s_b;
        Ok((Chord::from_chart(a, b), [s_a, s_b, t_y]))
    }

    /// `n` boundary points with their inward unit normals, in order.
    pub fn boundary_samples(&self, n: usize) -> Vec<(Vector2<f64>, Vector2<f64>)> {
        match &self.shape {
            Shape::Polygon(p) => {
                let perim: f64 = (0..p.vertices.len())
                    .map(|i| (p.vertices[(i + 1) % p.vertices.len()] - p.vertices[i]).norm())
                    .sum();
                let mut out = Vec::with_capacity(n + p.vertices.len());
                for i in 0..p.vertices.len() {
                    let a = p.vertices[i];
                    let b = p.vertices[(i + 1) % p.vertices.len()];
                    let m = (((b - a).norm() / perim) * n as f64).ceil().max(1.0) as usize;
                    for k in 0..m {
                        let t = (k as f64 + 0.5) / m as f64;
                        out.push((a + (b - a) * t, -p.normals[i]));
                    }
                }
                out
            }
            Shape::Ellipse(e) => {
                let r = e.frame();
                (0..n)
                    .map(|k| {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                        let (s, c) = th.sin_cos();
                        let local = Vector2::new(e.semi_axes[0] * c, e.semi_axes[1] * s);
                        let ln = Vector2::new(c / e.semi_axes[0], s / e.semi_axes[1]).normalize();
                        (e.center + r * local, -(r * ln))
                    })
                    .collect()
            }
        }
    }
}

/// A chord of the domain: distinct boundary points `a`, `b` with lifts of
/// third coordinate one.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub a: ProjectivePoint,
    pub b: ProjectivePoint,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

impl Chord {
    pub fn from_chart(a: Vector2<f64>, b: Vector2<f64>) -> Self {
        Chord {
            a: ProjectivePoint::from_chart(a),
            b: ProjectivePoint::from_chart(b),
            e1: Vector3::new(a.x, a.y, 1.0),
            e2: Vector3::new(b.x, b.y, 1.0),
        }
    }

    pub fn a_chart(&self) -> Vector2<f64> {
        Vector2::new(self.e1.x / self.e1.z, self.e1.y / self.e1.z)
    }

    pub fn b_chart(&self) -> Vector2<f64> {
        Vector2::new(self.e2.x / self.e2.z, self.e2.y / self.e2.z)
    }

    /// Same chord with lifts rescaled by `λ₁`, `λ₂`.
    pub fn rescaled(&self, l1: f64, l2: f64) -> Self {
        Chord {
            a: self.a,
            b: self.b,
            e1: self.e1 * l1,
            e2: self.e2 * l2,
        }
    }

    /// Chart point of `[eᵗ e₂ + e⁻ᵗ e₁]`: tends to `b` as `t → ∞`, to `a` as
    /// `t → −∞`.
    pub fn point(&self, t: f64) -> Vector2<f64> {
        let v = self.lift(t);
        Vector2::new(v.x / v.z, v.y / v.z)
    }

    pub fn lift(&self, t: f64) -> Vector3<f64> {
        // Divide by e^{|t|} first so large |t| stays finite.
        let (p, q) = if t >= 0.0 {
            (1.0, (-2.0 * t).exp())
        } else {
            ((2.0 * t).exp(), 1.0)
        };
        self.e2 * p + self.e1 * q
    }

    /// Chart velocity `d/dt` of [`point`](Self::point).
    pub fn velocity(&self, t: f64) -> Vector2<f64> {
        // Closed form: x(t) = (eᵗ B + e⁻ᵗ A)/(eᵗ β + e⁻ᵗ α) in lift coordinates.
        let (a, b) = (self.e1, self.e2);
        let (ep, em) = if t >= 0.0 {
            (1.0, (-2.0 * t).exp())
        } else {
            ((2.0 * t).exp(), 1.0)
        };
        let num = b * ep + a * em;
        let dnum = b * ep - a * em;
        let z = num.z;
        let dz = dnum.z;
        Vector2::new(
            (dnum.x * z - num.x * dz) / (z * z),
            (dnum.y * z - num.y * dz) / (z * z),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(x: f64, y: f64) -> ProjectivePoint {
        ProjectivePoint::from_chart(Vector2::new(x, y))
    }

    #[test]
    fn normalization_is_idempotent() {
        let p = ProjectivePoint::new(Vector3::new(0.0, -3.0, 4.0)).unwrap();
        assert_eq!(p.normalized(), p);
        assert!(p.coords()[1] > 0.0);
        assert!(ProjectivePoint::new(Vector3::zeros()).is_err());
    }

    #[test]
    fn cross_ratio_normalization() {
        let t = 0.37;
        let inf = ProjectivePoint::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let cr = cross_ratio(&pp(0.0, 0.0), &pp(1.0, 0.0), &inf, &pp(t, 0.0)).unwrap();
        assert!((cr - t).abs() < 1e-14);
        let r = 0.3;
        let cr = cross_ratio(&pp(-1.0, 0.0), &pp(0.0, 0.0), &pp(1.0, 0.0), &pp(r, 0.0)).unwrap();
        assert!((cr - (1.0 + r) / (1.0 - r)).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_errors() {
        let e = cross_ratio(&pp(0.0, 0.0), &pp(1.0, 0.0), &pp(2.0, 0.1), &pp(3.0, 0.0));
        assert!(matches!(e, Err(Error::Collinear(_))));
        let e = cross_ratio(&pp(0.0, 0.0), &pp(1.0, 0.0), &pp(1.0, 0.0), &pp(3.0, 0.0));
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }

    /// Builds the Möbius map sending (x1, x2, x3) to (0, 1, ∞) and evaluates
    /// it at x4.
    fn mobius_oracle(x: [f64; 4]) -> f64 {
        // m(z) = (z − x1)(x2 − x3) / ((z − x3)(x2 − x1))
        let num = |z: f64| (z - x[0]) * (x[1] - x[2]);
        let den = |z: f64| (z - x[2]) * (x[1] - x[0]);
        let m = |z: f64| num(z) / den(z);
        assert!(m(x[0]).abs() < 1e-12 && (m(x[1]) - 1.0).abs() < 1e-9);
        m(x[3])
    }

    proptest! {
        #[test]
        fn cross_ratio_matches_mobius_oracle(
            s in prop::array::uniform4(-3.0f64..3.0),
            dir in 0.0f64..std::f64::consts::PI,
            base in prop::array::uniform2(-1.0f64..1.0),
        ) {
            let mut s = s;
            s.sort_by(f64::total_cmp);
            prop_assume!(s.windows(2).all(|w| w[1] - w[0] > 1e-2));
            let d = Vector2::new(dir.cos(), dir.sin());
            let b = Vector2::new(base[0], base[1]);
            let p: Vec<ProjectivePoint> = s.iter().map(|t| ProjectivePoint::from_chart(b + d * *t)).collect();
            let cr = cross_ratio(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let oracle = mobius_oracle(s);
            prop_assert!((cr - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        }

        #[test]
        fn cross_ratio_is_projectively_invariant(
            s in prop::array::uniform4(-2.0f64..2.0),
            g in prop::array::uniform9(-1.0f64..1.0),
        ) {
            let mut s = s;
            s.sort_by(f64::total_cmp);
            prop_assume!(s.windows(2).all(|w| w[1] - w[0] > 5e-2));
            let m = Matrix3::from_row_slice(&g) + Matrix3::identity() * 2.0;
            prop_assume!(m.determinant().abs() > 0.5);
            let p: Vec<ProjectivePoint> = s.iter().map(|t| pp(*t, 0.5 * t - 0.2)).collect();
            let q: Vec<ProjectivePoint> = p.iter().map(|x| x.transform(&m).unwrap()).collect();
            let a = cross_ratio(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let b = cross_ratio(&q[0], &q[1], &q[2], &q[3]).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn chords_of_disc_and_square() {
        let disc = ConvexDomain::unit_disc();
        let c = disc.chord_through(&pp(0.0, 0.0), &pp(0.5, 0.0)).unwrap();
        assert!((c.a_chart() - Vector2::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((c.b_chart() - Vector2::new(1.0, 0.0)).norm() < 1e-14);
        let sq = ConvexDomain::unit_square();
        let c = sq.chord_through(&pp(0.0, 0.0), &pp(0.3, 0.3)).unwrap();
        assert!((c.a_chart() - Vector2::new(-1.0, -1.0)).norm() < 1e-14);
        assert!((c.b_chart() - Vector2::new(1.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn chord_errors() {
        let disc = ConvexDomain::unit_disc();
        assert!(matches!(
            disc.chord_through(&pp(0.0, 0.0), &pp(2.0, 0.0)),
            Err(Error::Containment { .. })
        ));
        assert!(matches!(
            disc.chord_through(&pp(0.1, 0.0), &pp(0.1, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn containment() {
        let disc = ConvexDomain::unit_disc();
        assert_eq!(disc.contains(&pp(0.0, 0.0)).unwrap(), Containment::Inside);
        assert_eq!(disc.contains(&pp(1.0, 0.0)).unwrap(), Containment::Boundary);
        assert_eq!(disc.contains(&pp(2.0, 0.0)).unwrap(), Containment::Outside);
        let at_infinity = ProjectivePoint::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(disc.contains(&at_infinity), Err(Error::Chart));
    }

    /// Marches along the ray in small steps, then bisects the exit.
    fn bisection_exit(dom: &ConvexDomain, p: Vector2<f64>, d: Vector2<f64>) -> f64 {
        let inside = |s: f64| dom.contains_chart(&(p + d * s), 0.0) == Containment::Inside;
        let mut lo = 0.0;
        let mut hi = 1e-3;
        while inside(hi) {
            lo = hi;
            hi += 1e-3;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    proptest! {
        #[test]
        fn polygon_chords_match_ray_bisection(
            radii in prop::collection::vec(0.5f64..1.0, 5..9),
            x in prop::array::uniform2(-0.3f64..0.3),
            y in prop::array::uniform2(-0.3f64..0.3),
        ) {
            let n = radii.len();
            let verts: Vec<_> = radii.iter().enumerate().map(|(i, r)| {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Vector2::new(r * th.cos(), r * th.sin())
            }).collect();
            let dom = match ConvexDomain::polygon(verts) { Ok(d) => d, Err(_) => return Ok(()) };
            let (x, y) = (Vector2::new(x[0], x[1]), Vector2::new(y[0], y[1]));
            prop_assume!((x - y).norm() > 1e-3);
            prop_assume!(dom.boundary_distance(&x) > 0.01 && dom.boundary_distance(&y) > 0.01);
            let (chord, _) = dom.chord_through_chart(&x, &y).unwrap();
            let d = (y - x).normalize();
            let b = x + d * bisection_exit(&dom, x, d);
            let a = x - d * bisection_exit(&dom, x, -d);
            prop_assert!((chord.b_chart() - b).norm() < 1e-9);
            prop_assert!((chord.a_chart() - a).norm() < 1e-9);
            // symmetry
            let (rev, _) = dom.chord_through_chart(&y, &x).unwrap();
            prop_assert!((rev.a_chart() - chord.b_chart()).norm() < 1e-12);
            prop_assert!((rev.b_chart() - chord.a_chart()).norm() < 1e-12);
        }

        #[test]
        fn ellipse_chord_endpoints_on_curve(
            x in prop::array::uniform2(-0.4f64..0.4),
            y in prop::array::uniform2(-0.4f64..0.4),
            rot in 0.0f64..3.0,
        ) {
            let dom = ConvexDomain::ellipse(Vector2::new(0.1, -0.05), [1.0, 0.6], rot).unwrap();
            let (x, y) = (Vector2::new(x[0], x[1]) * 0.5, Vector2::new(y[0], y[1]) * 0.5);
            prop_assume!((x - y).norm() > 1e-3);
            let (chord, _) = dom.chord_through_chart(&x, &y).unwrap();
            let Shape::Ellipse(e) = dom.shape() else { unreachable!() };
            let m = e.shape_matrix();
            for p in [chord.a_chart(), chord.b_chart()] {
                let q = p - e.center;
                prop_assert!((q.dot(&(m * q)) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn polygon_validation() {
        let bad = ConvexDomain::polygon(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(2.0, 0.0),
            Vector2::new(1.0, 1.0),
        ]);
        assert!(matches!(bad, Err(Error::InvalidDomain(_))));
        let concave = ConvexDomain::polygon(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(2.0, 0.0),
            Vector2::new(1.0, 0.5),
            Vector2::new(2.0, 2.0),
            Vector2::new(0.0, 2.0),
        ]);
        assert!(concave.is_err());
        // clockwise input is reoriented
        let cw = ConvexDomain::polygon(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn hull_drops_interior_and_duplicate_points() {
        let pts = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.5, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.5, 0.5),
        ];
        let d = ConvexDomain::hull(&pts).unwrap();
        let Shape::Polygon(p) = d.shape() else {
            unreachable!()
        };
        assert_eq!(p.vertices().len(), 4);
        assert!(matches!(
            ConvexDomain::hull(&pts[..3]),
            Err(Error::HullDegenerate { .. })
        ));
    }

    #[test]
    fn spec_parsing_names_the_bad_key() {
        let spec = DomainSpec::from_json(
            r#"{"type":"ellipse","center":[0,0],"semi_axes":[1,0.5],"rotation_rad":0.3}"#,
        )
        .unwrap();
        assert!(matches!(spec, DomainSpec::Ellipse { .. }));
        let err = DomainSpec::from_json(r#"{"type":"polygon","vertices":[[0,0],[1],[0,1]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { ref key, .. } if key == "vertices[1]"));
        let err = DomainSpec::from_json(r#"{"type":"ellipse","center":[0,0]}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref key, .. } if key == "semi_axes"));
        let err = DomainSpec::from_json(r#"{"type":"blob"}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref key, .. } if key == "type"));
    }

    #[test]
    fn load_time_normalization() {
        let spec = DomainSpec::Polygon {
            vertices: vec![[1.0, 1.0], [5.0, 1.0], [5.0, 3.0], [1.0, 3.0]],
        };
        let (d, n) = ConvexDomain::from_spec(&spec).unwrap();
        let (lo, hi) = d.bounding_box();
        assert!((lo - Vector2::new(-1.0, -0.5)).norm() < 1e-14);
        assert!((hi - Vector2::new(1.0, 0.5)).norm() < 1e-14);
        assert!((n.apply(&Vector2::new(3.0, 2.0))).norm() < 1e-14);
        let (disc, n) = ConvexDomain::from_spec(&ConvexDomain::unit_disc().spec()).unwrap();
        assert_eq!(disc, ConvexDomain::unit_disc());
        assert_eq!(n, Normalization::identity());
    }

    #[test]
    fn ellipse_through_projective_map() {
        let disc = ConvexDomain::unit_disc();
        // Boost along x preserves the disc.
        let g = Matrix3::new(1.25, 0.0, 0.75, 0.0, 1.0, 0.0, 0.75, 0.0, 1.25);
        let img = disc.transform(&g).unwrap();
        let Shape::Ellipse(e) = img.shape() else {
            unreachable!()
        };
        assert!(e.center.norm() < 1e-12);
        assert!((e.semi_axes[0] - 1.0).abs() < 1e-12 && (e.semi_axes[1] - 1.0).abs() < 1e-12);
        let far = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0);
        assert!(disc.transform(&far).is_err());
    }

    #[test]
    fn ellipse_boundary_distance() {
        let e = ConvexDomain::ellipse(Vector2::zeros(), [2.0, 1.0], 0.0).unwrap();
        assert!((e.boundary_distance(&Vector2::zeros()) - 1.0).abs() < 1e-12);
        assert!((e.boundary_distance(&Vector2::new(1.5, 0.0)) - 0.5).abs() < 1e-9);
        // brute-force check
        let p = Vector2::new(0.7, 0.3);
        let brute = (0..200_000)
            .map(|k| {
                let t = k as f64 / 200_000.0 * 2.0 * std::f64::consts::PI;
                (Vector2::new(2.0 * t.cos(), t.sin()) - p).norm()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((e.boundary_distance(&p) - brute).abs() < 1e-6);
    }

    #[test]
    fn lift_rescaling_shifts_parameter() {
        let c = Chord::from_chart(Vector2::new(-1.0, 0.0), Vector2::new(1.0, 0.2));
        let lam = 3.0;
        let r = c.rescaled(lam, 1.0);
        // e1 scaled by λ: [eᵗ e2 + e⁻ᵗ λ e1] = point at t − ½ log λ of the original.
        for t in [-1.0, 0.0, 0.7] {
            let shifted = c.point(t - 0.5 * lam.ln());
            assert!((r.point(t) - shifted).norm() < 1e-12);
        }
    }

    #[test]
    fn chord_velocity_matches_difference_quotient() {
        let c = Chord::from_chart(Vector2::new(-0.8, -0.3), Vector2::new(0.9, 0.4));
        for t in [-2.0, -0.3, 0.0, 1.1] {
            let h = 1e-6;
            let fd = (c.point(t + h) - c.point(t - h)) / (2.0 * h);
            assert!((fd - c.velocity(t)).norm() < 1e-8);
        }
    }
}
