//! A solved affine sphere with bicubic access to its fields.

use nalgebra::{Matrix2, Vector2};

use crate::affine_sphere::{
    blaschke_from_embedding, solve_monge_ampere, BlaschkeField, MongeAmpereSolution, SolverConfig,
};
use crate::error::{Error, Result};
use crate::grid::COLLAR_CELLS;
use crate::projective::ConvexDomain;

#[derive(Debug, Clone)]
pub struct AffineSphere {
    pub solution: MongeAmpereSolution,
    pub field: BlaschkeField,
}

/// Cubic Lagrange weights for nodes at offsets −1, 0, 1, 2.
fn lagrange4(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

impl AffineSphere {
    pub fn new(solution: MongeAmpereSolution) -> Result<Self> {
        let field = blaschke_from_embedding(&solution)?;
        Ok(AffineSphere { solution, field })
    }

    pub fn solve(domain: &ConvexDomain, cfg: &SolverConfig) -> Result<Self> {
        Self::new(solve_monge_ampere(domain, cfg)?)
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.solution.domain
    }

    pub fn h(&self) -> f64 {
        self.solution.grid.h
    }

    /// Outside the boundary collar where the fields are trusted.
    pub fn reliable(&self, p: &Vector2<f64>) -> bool {
        self.domain().boundary_distance(p) >= COLLAR_CELLS * self.h()
    }

    fn block(&self, p: &Vector2<f64>) -> Option<([usize; 16], [f64; 16])> {
        let g = &self.solution.grid;
        let fx = (p.x + 1.0) / g.h;
        let fy = (p.y + 1.0) / g.h;
        let (i0, j0) = (fx.floor(), fy.floor());
        let (wx, wy) = (lagrange4(fx - i0), lagrange4(fy - j0));
        let mut idx = [0usize; 16];
        let mut wt = [0.0; 16];
        for a in 0..4 {
            for b in 0..4 {
                let (i, j) = (i0 as i64 + a as i64 - 1, j0 as i64 + b as i64 - 1);
                if i < 0 || j < 0 {
                    return None;
                }
                idx[4 * a + b] = g.node_at(i as usize, j as usize)?;
                wt[4 * a + b] = wx[a] * wy[b];
            }
        }
        Some((idx, wt))
    }

    fn checked_block(&self, p: &Vector2<f64>) -> Result<([usize; 16], [f64; 16])> {
        if !self.reliable(p) {
            return Err(Error::Collar(vec![]));
        }
        self.block(p).ok_or(Error::Collar(vec![]))
    }

    /// `w = (−u)ᵏ` at a reliable point.
    pub fn w_at(&self, p: &Vector2<f64>) -> Result<f64> {
        let (idx, wt) = self.checked_block(p)?;
        Ok(idx
            .iter()
            .zip(&wt)
            .map(|(i, c)| c * self.solution.w[*i])
            .sum())
    }

    /// `r = −1/u` at a reliable point.
    pub fn r_at(&self, p: &Vector2<f64>) -> Result<f64> {
        Ok(self.w_at(p)?.powf(-self.solution.m()))
    }

    /// Blaschke metric tensor at a reliable point.
    pub fn h_at(&self, p: &Vector2<f64>) -> Result<Matrix2<f64>> {
        let (idx, wt) = self.checked_block(p)?;
        let mut acc = [0.0; 4];
        for (i, c) in idx.iter().zip(&wt) {
            let q = self.field.p[*i];
            acc[0] += c * q[0];
            acc[1] += c * q[1];
            acc[2] += c * q[2];
            acc[3] += c * self.solution.w[*i];
        }
        let w2 = acc[3] * acc[3];
        Ok(Matrix2::new(acc[0], acc[1], acc[1], acc[2]) / w2)
    }

    /// `√(h_B(v, v))` at a reliable point.
    pub fn norm_at(&self, p: &Vector2<f64>, v: &Vector2<f64>) -> Result<f64> {
        Ok(v.dot(&(self.h_at(p)? * v)).max(0.0).sqrt())
    }

    /// Node tensor `h_B` as a matrix.
    pub fn node_h(&self, k: usize) -> Matrix2<f64> {
        let [a, b, c] = self.field.h_b[k];
        Matrix2::new(a, b, b, c)
    }

    /// Indices of nodes outside the collar.
    pub fn reliable_nodes(&self) -> Vec<usize> {
        (0..self.solution.grid.len())
            .filter(|k| self.solution.grid.reliable(*k, COLLAR_CELLS))
            .collect()
    }
}
