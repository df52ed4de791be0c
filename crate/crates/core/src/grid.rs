//! Cartesian grid over `[−1, 1]²` with cut-cell stencils.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::projective::ConvexDomain;

/// Stencil directions, in grid steps: the axes and the two diagonals.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Width of the unreliable boundary collar, in cells.
pub const COLLAR_CELLS: f64 = 3.0;

/// One side of a stencil arm: a neighbouring unknown or the boundary (value
/// zero), at parameter distance `dist` along the direction vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    pub node: Option<usize>,
    pub dist: f64,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub h: f64,
    /// Cells per side; node indices run over `0..=n`.
    pub n: usize,
    /// Unknown index per `(i, j)`, row-major in `i`.
    index: Vec<Option<usize>>,
    pub nodes: Vec<(usize, usize)>,
    pub points: Vec<Vector2<f64>>,
    pub boundary_dist: Vec<f64>,
    /// `arms[k][d] = [forward, backward]` along `DIRS[d]`.
    pub arms: Vec<[[Arm; 2]; 4]>,
}

impl Grid {
    /// Nodes `x_i = −1 + i·h`. A node is an unknown when it lies inside the
    /// domain and no stencil arm is shorter than `1e−6·h`.
    pub fn new(domain: &ConvexDomain, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Argument(format!(
                "grid spacing {h} must be positive"
            )));
        }
        let n = (2.0 / h).round() as usize;
        let h = 2.0 / n as f64;
        let (lo, hi) = domain.bounding_box();
        let across = ((hi - lo).min() / h).floor() as usize;
        if across < 20 {
            return Err(Error::Resolution(across));
        }
        let coord = |i: usize| -1.0 + h * i as f64;
        let mut index = vec![None; (n + 1) * (n + 1)];
        let mut nodes = Vec::new();
        let mut points = Vec::new();
        let mut boundary_dist = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                let p = Vector2::new(coord(i), coord(j));
                let bd = domain.boundary_distance(&p);
                if bd <= 0.0 {
                    continue;
                }
                let short = DIRS.iter().any(|&(di, dj)| {
                    let d = Vector2::new(di as f64, dj as f64);
                    domain.ray_exit(&p, &d) < 1e-6 * h || domain.ray_exit(&p, &-d) < 1e-6 * h
                });
                if short {
                    continue;
                }
                index[i * (n + 1) + j] = Some(nodes.len());
                nodes.push((i, j));
                points.push(p);
                boundary_dist.push(bd);
            }
        }
        let mut arms = Vec::with_capacity(nodes.len());
        for (k, &(i, j)) in nodes.iter().enumerate() {
            let mut node_arms = [[Arm {
                node: None,
                dist: h,
            }; 2]; 4];
            for (d, &(di, dj)) in DIRS.iter().enumerate() {
                for (s, sgn) in [1i64, -1].into_iter().enumerate() {
                    let (ii, jj) = (i as i64 + sgn * di, j as i64 + sgn * dj);
                    let nb = if (0..=n as i64).contains(&ii) && (0..=n as i64).contains(&jj) {
                        index[ii as usize * (n + 1) + jj as usize]
                    } else {
                        None
                    };
                    node_arms[d][s] = match nb {
                        Some(m) => Arm {
                            node: Some(m),
                            dist: h,
                        },
                        None => {
                            let dir = Vector2::new((sgn * di) as f64, (sgn * dj) as f64);
                            Arm {
                                node: None,
                                dist: domain.ray_exit(&points[k], &dir).min(h),
                            }
                        }
                    };
                }
            }
            arms.push(node_arms);
        }
        Ok(Grid {
            h,
            n,
            index,
            nodes,
            points,
            boundary_dist,
            arms,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -1.0 + self.h * i as f64
    }

    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        if i > self.n || j > self.n {
            return None;
        }
        self.index[i * (self.n + 1) + j]
    }

    /// Node `(i, j)` offset by `(di, dj)`, if it is an unknown.
    pub fn neighbour(&self, k: usize, di: i64, dj: i64) -> Option<usize> {
        let (i, j) = self.nodes[k];
        let (ii, jj) = (i as i64 + di, j as i64 + dj);
        if ii < 0 || jj < 0 {
            return None;
        }
        self.node_at(ii as usize, jj as usize)
    }

    /// True when the node lies outside the collar of `cells` grid cells.
    pub fn reliable(&self, k: usize, cells: f64) -> bool {
        self.boundary_dist[k] >= cells * self.h
    }

    /// Largest index distance between a node and its stencil neighbours.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for (k, a) in self.arms.iter().enumerate() {
            for arm in a.iter().flatten() {
                if let Some(m) = arm.node {
                    bw = bw.max(m.abs_diff(k));
                }
            }
        }
        bw
    }
}

/// First and second differences of a nodal field along the four stencil
/// directions, with zero boundary values on cut arms.
#[derive(Debug, Clone, Copy)]
pub struct Differences {
    pub d1: [f64; 4],
    pub d2: [f64; 4],
}

impl Differences {
    pub fn at(grid: &Grid, values: &[f64], k: usize) -> Self {
        let w0 = values[k];
        let mut d1 = [0.0; 4];
        let mut d2 = [0.0; 4];
        for d in 0..4 {
            let [p, m] = grid.arms[k][d];
            let wp = p.node.map_or(0.0, |i| values[i]);
            let wm = m.node.map_or(0.0, |i| values[i]);
            let (hp, hm) = (p.dist, m.dist);
            d2[d] = 2.0 / (hp + hm) * ((wp - w0) / hp - (w0 - wm) / hm);
            d1[d] = (hm * hm * (wp - w0) + hp * hp * (w0 - wm)) / (hp * hm * (hp + hm));
        }
        Differences { d1, d2 }
    }

    pub fn gradient(&self) -> Vector2<f64> {
        Vector2::new(self.d1[0], self.d1[1])
    }

    pub fn hessian(&self) -> Matrix2<f64> {
        let xy = 0.25 * (self.d2[2] - self.d2[3]);
        Matrix2::new(self.d2[0], xy, xy, self.d2[1])
    }
}

/// Weights of `(forward, backward, centre)` values in the first and second
/// difference of one arm pair.
pub fn arm_weights(hp: f64, hm: f64) -> ([f64; 3], [f64; 3]) {
    let a2 = 2.0 / (hp + hm);
    let second = [a2 / hp, a2 / hm, -a2 * (1.0 / hp + 1.0 / hm)];
    let den = hp * hm * (hp + hm);
    let first = [hm * hm / den, -hp * hp / den, (hp * hp - hm * hm) / den];
    (first, second)
}
