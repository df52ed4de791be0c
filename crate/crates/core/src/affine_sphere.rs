//! Hyperbolic affine sphere over a convex domain.
//!
//! The radial graph `ξ = (x, 1)/(−u)` is an affine sphere asymptotic to the
//! cone over the domain exactly when `det D²u = (−u)⁻⁴` with `u = 0` on the
//! boundary. The solver works with `w = (−u)ᵏ`, which is smooth up to the
//! boundary for the right `k`: the ellipse solution is a quadratic for
//! `k = 2`, the triangle solution a cubic for `k = 3`. With `m = 1/k` the
//! equation becomes
//!
//! ```text
//! log det M − log k² − (4 − 6m) log w = 0,   M = (1 − m)∇w∇wᵀ − w D²w,
//! ```
//!
//! and the Blaschke metric is `h = D²u/(−u) = P/w²` with `P = m·M`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::grid::{arm_weights, Differences, Grid};
use crate::par;
use crate::projective::{ConvexDomain, Shape};

const EIG_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            h: 1.0 / 64.0,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MongeAmpereSolution {
    pub domain: ConvexDomain,
    pub grid: Grid,
    /// Exponent `k` of the unknown `w = (−u)ᵏ`.
    pub k: u32,
    pub w: Vec<f64>,
    /// Sup of the log-residual away from a one-cell collar.
    pub residual_sup: f64,
    pub iterations: usize,
    /// Sup of the log-residual over all nodes, one entry per iteration.
    pub trace: Vec<f64>,
}

impl MongeAmpereSolution {
    pub fn m(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// `u` at node `idx`.
    pub fn u(&self, idx: usize) -> f64 {
        -self.w[idx].powf(self.m())
    }

    pub fn u_values(&self) -> Vec<f64> {
        (0..self.w.len()).map(|i| self.u(i)).collect()
    }

    /// The same grid function with `u` multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let f = lambda.powi(self.k as i32);
        MongeAmpereSolution {
            w: self.w.iter().map(|w| w * f).collect(),
            ..self.clone()
        }
    }

    /// Residual of the discrete equation at every node.
    pub fn residuals(&self) -> Vec<f64> {
        let k = self.k as f64;
        par::map_range(self.grid.len(), |i| linearize(&self.grid, &self.w, k, i).f)
    }
}

/// Newton data at one node.
struct NodeLin {
    f: f64,
    minv: Matrix2<f64>,
    grad: Vector2<f64>,
    hess: Matrix2<f64>,
}

fn linearize(grid: &Grid, w: &[f64], k: f64, i: usize) -> NodeLin {
    let m = 1.0 / k;
    let d = Differences::at(grid, w, i);
    let grad = d.gradient();
    let hess = d.hessian();
    let mm = grad * grad.transpose() * (1.0 - m) - hess * w[i];
    let eig = SymmetricEigen::new(mm);
    let ev = eig.eigenvalues.map(|l| l.max(EIG_FLOOR));
    let q = eig.eigenvectors;
    let minv = q * Matrix2::from_diagonal(&ev.map(|l| 1.0 / l)) * q.transpose();
    let f = ev[0].ln() + ev[1].ln() - (k * k).ln() - (4.0 - 6.0 * m) * w[i].ln();
    NodeLin {
        f,
        minv,
        grad,
        hess,
    }
}

/// Jacobian row at node `i`: `(column, value)` pairs. With `frozen_rhs` the
/// `w`-dependence of the right-hand side is dropped (Picard linearization).
fn jacobian_row(
    grid: &Grid,
    w: &[f64],
    k: f64,
    i: usize,
    lin: &NodeLin,
    frozen_rhs: bool,
) -> Vec<(usize, f64)> {
    let m = 1.0 / k;
    let b = lin.minv * lin.grad * (2.0 * (1.0 - m));
    let rhs = if frozen_rhs { 0.0 } else { (4.0 - 6.0 * m) / w[i] };
    let c0 = -(lin.minv * lin.hess).trace() - rhs;
    let a = lin.minv * -w[i];
    let coef2 = [a[(0, 0)], a[(1, 1)], 0.5 * a[(0, 1)], -0.5 * a[(0, 1)]];
    let coef1 = [b.x, b.y, 0.0, 0.0];
    let mut row = Vec::with_capacity(9);
    let mut diag = c0;
    for d in 0..4 {
        let [p, q] = grid.arms[i][d];
        let (first, second) = arm_weights(p.dist, q.dist);
        let cf = [
            coef2[d] * second[0] + coef1[d] * first[0],
            coef2[d] * second[1] + coef1[d] * first[1],
            coef2[d] * second[2] + coef1[d] * first[2],
        ];
        diag += cf[2];
        if let Some(n) = p.node {
            row.push((n, cf[0]));
        }
        if let Some(n) = q.node {
            row.push((n, cf[1]));
        }
    }
    row.push((i, diag));
    row
}

/// Exponent used for the unknown on this kind of domain.
pub fn exponent_for(domain: &ConvexDomain) -> u32 {
    if domain.is_polygon() {
        3
    } else {
        2
    }
}

/// Starting guess: the exact solution for ellipses, `(∏ ℓᵢ)^{k/N}` for
/// polygons with `N` unit-normal edge functionals `ℓᵢ`.
pub fn initial_guess(domain: &ConvexDomain, grid: &Grid, k: u32) -> Vec<f64> {
    let kf = k as f64;
    match domain.shape() {
        Shape::Ellipse(e) => {
            let m = e.shape_matrix();
            let scale = (e.semi_axes[0] * e.semi_axes[1]).powf(1.0 / 3.0);
            grid.points
                .iter()
                .map(|p| {
                    let q = p - e.center;
                    let s = (1.0 - q.dot(&(m * q))).max(0.0);
                    (scale * s.sqrt()).powf(kf)
                })
                .collect()
        }
        Shape::Polygon(poly) => {
            let n = poly.normals().len() as f64;
            grid.points
                .iter()
                .map(|p| {
                    poly.edge_values(p)
                        .map(|l| l.max(0.0))
                        .product::<f64>()
                        .powf(kf / n)
                })
                .collect()
        }
    }
}

pub fn solve_monge_ampere(
    domain: &ConvexDomain,
    cfg: &SolverConfig,
) -> Result<MongeAmpereSolution> {
    let grid = Grid::new(domain, cfg.h)?;
    let k = exponent_for(domain);
    let w0 = initial_guess(domain, &grid, k);
    solve_from(domain, grid, k, w0, cfg)
}

/// Damped Newton iteration from a given positive starting field.
pub fn solve_from(
    domain: &ConvexDomain,
    grid: Grid,
    k: u32,
    w0: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<MongeAmpereSolution> {
    if w0.len() != grid.len() || w0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Argument(
            "starting field must be positive at every node".into(),
        ));
    }
    let kf = k as f64;
    let bw = grid.bandwidth();
    let mut w = w0;
    let mut trace = Vec::new();
    let eval =
        |w: &[f64]| -> Vec<NodeLin> { par::map_range(grid.len(), |i| linearize(&grid, w, kf, i)) };
    let mut lins = eval(&w);
    for iter in 0..=cfg.max_iter {
        let sup = lins.iter().map(|l| l.f.abs()).fold(0.0, f64::max);
        trace.push(sup);
        if !sup.is_finite() {
            break;
        }
        if sup <= cfg.tol {
            let residual_sup = lins
                .iter()
                .enumerate()
                .filter(|(i, _)| grid.reliable(*i, 1.0))
                .map(|(_, l)| l.f.abs())
                .fold(0.0, f64::max);
            return Ok(MongeAmpereSolution {
                domain: domain.clone(),
                grid,
                k,
                w,
                residual_sup,
                iterations: iter,
                trace,
            });
        }
        if iter == cfg.max_iter {
            break;
        }
        // Newton first; a Picard step when its line search stalls.
        let mut accepted = None;
        for frozen_rhs in [false, true] {
            let rows = par::map_range(grid.len(), |i| {
                jacobian_row(&grid, &w, kf, i, &lins[i], frozen_rhs)
            });
            let mut jac = BandMatrix::zeros(grid.len(), bw, bw);
            for (i, row) in rows.iter().enumerate() {
                for &(c, v) in row {
                    jac.add(i, c, v);
                }
            }
            let mut step: Vec<f64> = lins.iter().map(|l| -l.f).collect();
            jac.factor()?.solve(&mut step);
            accepted = line_search(&w, &step, l2(&lins), &eval);
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((trial, tl)) => {
                w = trial;
                lins = tl;
            }
            None => break,
        }
    }
    Err(Error::NonConvergence {
        iterations: trace.len().saturating_sub(1),
        residual: *trace.last().unwrap_or(&f64::NAN),
        trace,
    })
}

/// Backtracking on `‖F‖₂` with the Armijo factor `1 − 10⁻⁴λ`, keeping `w > 0`.
fn line_search(
    w: &[f64],
    step: &[f64],
    norm0: f64,
    eval: impl Fn(&[f64]) -> Vec<NodeLin>,
) -> Option<(Vec<f64>, Vec<NodeLin>)> {
    let mut lambda = 1.0;
    while lambda > 1e-6 {
        let trial: Vec<f64> = w.iter().zip(step).map(|(a, b)| a + lambda * b).collect();
        if trial.iter().all(|v| *v > 0.0) {
            let tl = eval(&trial);
            if l2(&tl) < (1.0 - 1e-4 * lambda) * norm0 {
                return Some((trial, tl));
            }
        }
        lambda *= 0.5;
    }
    None
}

fn l2(lins: &[NodeLin]) -> f64 {
    lins.iter().map(|l| l.f * l.f).sum::<f64>().sqrt()
}

/// `ξ(x) = (x₁, x₂, 1)/(−u(x))` at every node.
pub fn embedding(sol: &MongeAmpereSolution) -> Result<Vec<Vector3<f64>>> {
    (0..sol.grid.len())
        .map(|i| {
            let u = sol.u(i);
            if !(u < 0.0) {
                let (a, b) = sol.grid.nodes[i];
                return Err(Error::CorruptSolution {
                    i: a,
                    j: b,
                    value: u,
                });
            }
            let p = sol.grid.points[i];
            Ok(Vector3::new(p.x, p.y, 1.0) / -u)
        })
        .collect()
}

/// Blaschke metric and its Gauss curvature on the grid.
#[derive(Debug, Clone)]
pub struct BlaschkeField {
    /// `(h₁₁, h₁₂, h₂₂)` per node.
    pub h_b: Vec<[f64; 3]>,
    /// `P = m·M`, so that `h = P/w²`.
    pub p: Vec<[f64; 3]>,
    /// Gauss curvature; NaN where the 3×3 neighbourhood is incomplete.
    pub kappa: Vec<f64>,
}

/// Derivatives of `ξ` at a node, from the stencil derivatives of `w` by the
/// chain rule: `∂ᵢξ = r eᵢ + rᵢ X`, `∂ᵢ∂ⱼξ = rⱼ eᵢ + rᵢ eⱼ + rᵢⱼ X` with
/// `r = w^{−m}` and `X = (x, 1)`.
struct Jet {
    xi: Vector3<f64>,
    d1: [Vector3<f64>; 2],
    d2: [Vector3<f64>; 3],
}

fn jet(sol: &MongeAmpereSolution, i: usize) -> Jet {
    let m = sol.m();
    let w = sol.w[i];
    let d = Differences::at(&sol.grid, &sol.w, i);
    let (g, hw) = (d.gradient(), d.hessian());
    let r = w.powf(-m);
    let rd = g * (-m * w.powf(-m - 1.0));
    let rdd = hw * (-m * w.powf(-m - 1.0)) + g * g.transpose() * (m * (m + 1.0) * w.powf(-m - 2.0));
    let p = sol.grid.points[i];
    let x = Vector3::new(p.x, p.y, 1.0);
    let e = [Vector3::x(), Vector3::y()];
    let d1 = [e[0] * r + x * rd.x, e[1] * r + x * rd.y];
    let dd = |a: usize, b: usize| e[a] * rd[b] + e[b] * rd[a] + x * rdd[(a, b)];
    Jet {
        xi: x * r,
        d1,
        d2: [dd(0, 0), dd(0, 1), dd(1, 1)],
    }
}

pub fn blaschke_from_embedding(sol: &MongeAmpereSolution) -> Result<BlaschkeField> {
    embedding(sol)?;
    let grid = &sol.grid;
    let h_b = par::map_range(grid.len(), |i| -> Result<[f64; 3]> {
        let j = jet(sol, i);
        let frame = Matrix3::from_columns(&[j.d1[0], j.d1[1], j.xi]);
        let sv = frame.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= 1e12) {
            let (a, b) = grid.nodes[i];
            return Err(Error::FrameDegeneracy { i: a, j: b, cond });
        }
        let lu = frame.lu();
        let coef = |v: &Vector3<f64>| {
            lu.solve(v).map(|c| c.z).ok_or(Error::FrameDegeneracy {
                i: grid.nodes[i].0,
                j: grid.nodes[i].1,
                cond,
            })
        };
        Ok([coef(&j.d2[0])?, coef(&j.d2[1])?, coef(&j.d2[2])?])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let m = sol.m();
    let p = par::map_range(grid.len(), |i| {
        let d = Differences::at(grid, &sol.w, i);
        let g = d.gradient();
        let mm = g * g.transpose() * (1.0 - m) - d.hessian() * sol.w[i];
        [m * mm[(0, 0)], m * mm[(0, 1)], m * mm[(1, 1)]]
    });
    let kappa = par::map_range(grid.len(), |i| curvature(sol, &p, i).unwrap_or(f64::NAN));
    Ok(BlaschkeField { h_b, p, kappa })
}

/// Gauss curvature of `P/w²` through the conformal change
/// `κ = w²K_P + w Δ_P w − |∇w|²_P`, with `K_P` from the Brioschi formula.
fn curvature(sol: &MongeAmpereSolution, p: &[[f64; 3]], i: usize) -> Option<f64> {
    let grid = &sol.grid;
    let h = grid.h;
    let mut nb = [[0usize; 3]; 3];
    for (a, row) in nb.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            *slot = grid.neighbour(i, a as i64 - 1, b as i64 - 1)?;
        }
    }
    let at = |c: usize, a: i64, b: i64| p[nb[(a + 1) as usize][(b + 1) as usize]][c];
    let du = |c: usize| (at(c, 1, 0) - at(c, -1, 0)) / (2.0 * h);
    let dv = |c: usize| (at(c, 0, 1) - at(c, 0, -1)) / (2.0 * h);
    let (e, f, g) = (p[i][0], p[i][1], p[i][2]);
    let (eu, ev, fu, fv, gu, gv) = (du(0), dv(0), du(1), dv(1), du(2), dv(2));
    let evv = (at(0, 0, 1) - 2.0 * e + at(0, 0, -1)) / (h * h);
    let guu = (at(2, 1, 0) - 2.0 * g + at(2, -1, 0)) / (h * h);
    let fuv = (at(1, 1, 1) - at(1, 1, -1) - at(1, -1, 1) + at(1, -1, -1)) / (4.0 * h * h);
    let det = e * g - f * f;
    if !(det > 0.0) {
        return None;
    }
    let a = Matrix3::new(
        -0.5 * evv + fuv - 0.5 * guu,
        0.5 * eu,
        fu - 0.5 * ev,
        fv - 0.5 * gu,
        e,
        f,
        0.5 * gv,
        f,
        g,
    );
    let b = Matrix3::new(0.0, 0.5 * ev, 0.5 * gu, 0.5 * ev, e, f, 0.5 * gu, f, g);
    let kp = (a.determinant() - b.determinant()) / (det * det);

    let d = Differences::at(grid, &sol.w, i);
    let (gw, hw) = (d.gradient(), d.hessian());
    let pinv = Matrix2::new(g, -f, -f, e) / det;
    // (1/√|P|) ∂ᵢ(√|P| Pⁱʲ) expanded, so only derivatives of P are differenced.
    let dp = [Matrix2::new(eu, fu, fu, gu), Matrix2::new(ev, fv, fv, gv)];
    let mut div = Vector2::zeros();
    for (a, dpa) in dp.iter().enumerate() {
        let t = 0.5 * (pinv * dpa).trace();
        let q = pinv * dpa * pinv;
        for j in 0..2 {
            div[j] += t * pinv[(a, j)] - q[(a, j)];
        }
    }
    let lap = (pinv * hw).trace() + div.dot(&gw);
    let grad2 = gw.dot(&(pinv * gw));
    let w = sol.w[i];
    let kappa = w * w * kp + w * lap - grad2;
    kappa.is_finite().then_some(kappa)
}

/// `sup |det(ĥ-orthonormal frame) − 1|` over nodes at least `collar_cells`
/// cells from the boundary.
pub fn unimodularity_check(
    sol: &MongeAmpereSolution,
    field: &BlaschkeField,
    collar_cells: f64,
) -> f64 {
    let dev = par::map_range(sol.grid.len(), |i| {
        if !sol.grid.reliable(i, collar_cells) {
            return 0.0;
        }
        let j = jet(sol, i);
        let [a, b, c] = field.h_b[i];
        let h = Matrix2::new(a, b, b, c);
        // Columns of h^{-1/2} are h-orthonormal.
        let eig = SymmetricEigen::new(h);
        let s = eig.eigenvectors
            * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        let t1 = j.d1[0] * s[(0, 0)] + j.d1[1] * s[(1, 0)];
        let t2 = j.d1[0] * s[(0, 1)] + j.d1[1] * s[(1, 1)];
        (Matrix3::from_columns(&[t1, t2, j.xi]).determinant() - 1.0).abs()
    });
    dev.into_iter().fold(0.0, f64::max)
}
