//! Exact integer arithmetic for long orbits.
//!
//! Every finite `f64` is a dyadic rational, so a matrix, a point and a
//! domain given in floating point can be rescaled to integers without loss.
//! Orbits `gⁿx` are then computed exactly and Hilbert distances evaluated
//! from exact facet or conic values, which keeps `d^H(x, gⁿx)` accurate
//! long after `gⁿx` is closer to the boundary than `f64` can resolve.

use nalgebra::{Matrix3, Vector3};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::projective::{ConvexDomain, Shape};

pub type BigVec = [BigInt; 3];
pub type BigMat = [[BigInt; 3]; 3];

/// Exact integers proportional (by one positive power of two) to `values`.
pub fn dyadic_scale(values: &[f64]) -> Result<Vec<BigInt>> {
    let mut parts = Vec::with_capacity(values.len());
    let mut e_min = i32::MAX;
    for v in values {
        if !v.is_finite() {
            return Err(Error::Argument(format!("non-finite value {v}")));
        }
        let (mut mant, mut exp, sign) = v.integer_decode();
        if mant != 0 {
            let tz = mant.trailing_zeros();
            mant >>= tz;
            exp += tz as i16;
            e_min = e_min.min(exp as i32);
        }
        parts.push((mant, exp as i32, sign));
    }
    Ok(parts
        .into_iter()
        .map(|(mant, exp, sign)| {
            if mant == 0 {
                return BigInt::zero();
            }
            let b = BigInt::from(mant) << (exp - e_min) as usize;
            if sign < 0 {
                -b
            } else {
                b
            }
        })
        .collect())
}

pub fn big_matrix(m: &Matrix3<f64>) -> Result<BigMat> {
    let flat: Vec<f64> = (0..3)
        .flat_map(|i| (0..3).map(move |j| m[(i, j)]))
        .collect();
    let b = dyadic_scale(&flat)?;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| b[3 * i + j].clone())
    }))
}

pub fn big_vector(v: &Vector3<f64>) -> Result<BigVec> {
    let b = dyadic_scale(v.as_slice())?;
    Ok([b[0].clone(), b[1].clone(), b[2].clone()])
}

pub fn mat_vec(m: &BigMat, v: &BigVec) -> BigVec {
    std::array::from_fn(|i| &m[i][0] * &v[0] + &m[i][1] * &v[1] + &m[i][2] * &v[2])
}

pub fn dot(a: &BigVec, b: &BigVec) -> BigInt {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub fn cross(a: &BigVec, b: &BigVec) -> BigVec {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// Divides out the common factor of the coordinates.
pub fn reduce(v: &mut BigVec) {
    let g = v[0].gcd(&v[1]).gcd(&v[2]);
    if !g.is_zero() && g != BigInt::from(1) {
        for c in v.iter_mut() {
            *c /= &g;
        }
    }
}

/// Natural log of a positive integer of any size.
pub fn ln_big(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift as usize)
        .to_f64()
        .expect("64-bit value fits f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// A domain with exact integer boundary data.
#[derive(Debug, Clone)]
pub enum ExactDomain {
    /// Facet functionals, positive on the interior cone.
    Polygon(Vec<BigVec>),
    /// Quadratic form, negative on the interior cone.
    Conic(BigMat),
}

impl ExactDomain {
    pub fn new(domain: &ConvexDomain) -> Result<Self> {
        match domain.shape() {
            Shape::Polygon(p) => {
                let lifts = p
                    .vertices()
                    .iter()
                    .map(|v| big_vector(&Vector3::new(v.x, v.y, 1.0)))
                    .collect::<Result<Vec<_>>>()?;
                let n = lifts.len();
                // Counter-clockwise order puts the interior on the left.
                Ok(ExactDomain::Polygon(
                    (0..n)
                        .map(|i| cross(&lifts[i], &lifts[(i + 1) % n]))
                        .collect(),
                ))
            }
            Shape::Ellipse(e) => Ok(ExactDomain::Conic(big_matrix(&e.conic())?)),
        }
    }

    fn quad(q: &BigMat, x: &BigVec, y: &BigVec) -> BigInt {
        dot(x, &mat_vec(q, y))
    }

    /// Signed facet values with the sign fixed so the interior is positive;
    /// `None` outside the open cone.
    fn facets(ls: &[BigVec], x: &BigVec) -> Option<Vec<BigInt>> {
        let mut vals: Vec<BigInt> = ls.iter().map(|l| dot(l, x)).collect();
        if vals[0].is_negative() {
            vals.iter_mut().for_each(|v| *v = -v.clone());
        }
        vals.iter().all(|v| v.is_positive()).then_some(vals)
    }

    pub fn contains(&self, x: &BigVec) -> bool {
        match self {
            ExactDomain::Polygon(ls) => Self::facets(ls, x).is_some(),
            ExactDomain::Conic(q) => Self::quad(q, x, x).is_negative(),
        }
    }

    /// Hilbert distance between interior points.
    pub fn distance(&self, x: &BigVec, y: &BigVec) -> Result<f64> {
        match self {
            ExactDomain::Polygon(ls) => {
                let fx = Self::facets(ls, x).ok_or(Error::Invariance { step: 0 })?;
                let fy = Self::facets(ls, y).ok_or(Error::Invariance { step: 0 })?;
                // ½ log(max_j ℓ_j(x)/ℓ_j(y) · max_i ℓ_i(y)/ℓ_i(x))
                let argmax = |num: &[BigInt], den: &[BigInt]| {
                    let mut best = 0;
                    for k in 1..num.len() {
                        if &num[k] * &den[best] > &num[best] * &den[k] {
                            best = k;
                        }
                    }
                    best
                };
                let j = argmax(&fx, &fy);
                let i = argmax(&fy, &fx);
                let d = 0.5 * (ln_big(&fx[j]) - ln_big(&fy[j]) + ln_big(&fy[i]) - ln_big(&fx[i]));
                Ok(d.max(0.0))
            }
            ExactDomain::Conic(q) => {
                let qxx = -Self::quad(q, x, x);
                let qyy = -Self::quad(q, y, y);
                if !qxx.is_positive() || !qyy.is_positive() {
                    return Err(Error::Invariance { step: 0 });
                }
                let qxy = Self::quad(q, x, y);
                let num = &qxy * &qxy - &qxx * &qyy;
                if !num.is_positive() {
                    return Ok(0.0);
                }
                // d = asinh(s), s² = (Q(x,y)² − Q(x,x)Q(y,y)) / (Q(x,x)Q(y,y))
                let ln_s = 0.5 * (ln_big(&num) - ln_big(&qxx) - ln_big(&qyy));
                Ok(if ln_s > 20.0 {
                    ln_s + (1.0 + (1.0 + (-2.0 * ln_s).exp()).sqrt()).ln()
                } else {
                    ln_s.exp().asinh()
                })
            }
        }
    }
}
