//! Banded LU with partial pivoting.
//!
//! Row `r` is stored densely over columns `r − kl ..= r + kl + ku`, which
//! leaves room for the fill that row interchanges create.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.kl + self.ku);
        r * self.width + (c + self.kl - r)
    }

    /// Adds `v` at `(r, c)`; `c` must lie within the declared band.
    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        assert!(
            c + self.kl >= r && c <= r + self.ku,
            "entry ({r}, {c}) outside the band"
        );
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c + self.kl < r || c > r + self.kl + self.ku {
            return 0.0;
        }
        self.data[self.slot(r, c)]
    }

    /// Factors in place and returns the factorization.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for r in 0..n {
            let last_row = (r + kl).min(n - 1);
            let last_col = (r + kl + ku).min(n - 1);
            let mut p = r;
            let mut best = self.data[self.slot(r, r)].abs();
            for i in r + 1..=last_row {
                let v = self.data[self.slot(i, r)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Degenerate("singular banded system"));
            }
            piv[r] = p;
            if p != r {
                for c in r..=last_col {
                    let (a, b) = (self.slot(r, c), self.slot(p, c));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.slot(r, r)];
            for i in r + 1..=last_row {
                let li = self.slot(i, r);
                let f = self.data[li] / d;
                self.data[li] = f;
                if f == 0.0 {
                    continue;
                }
                let (ri, ii) = (self.slot(r, r), self.slot(i, r));
                let len = last_col - r;
                debug_assert!(ri < ii);
                let (lo, hi) = self.data.split_at_mut(ii);
                let src = &lo[ri + 1..ri + 1 + len];
                let dst = &mut hi[1..1 + len];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= f * s;
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let m = &self.m;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        for r in 0..n {
            let p = self.piv[r];
            if p != r {
                b.swap(r, p);
            }
            let br = b[r];
            if br != 0.0 {
                for i in r + 1..=(r + kl).min(n - 1) {
                    b[i] -= m.data[m.slot(i, r)] * br;
                }
            }
        }
        for r in (0..n).rev() {
            let mut s = b[r];
            for c in r + 1..=(r + kl + ku).min(n - 1) {
                s -= m.data[m.slot(r, c)] * b[c];
            }
            b[r] = s / m.data[m.slot(r, r)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, kl, ku) = (40, 4, 3);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            for c in r.saturating_sub(kl)..=(r + ku).min(n - 1) {
                // Weak diagonal so that pivoting actually happens.
                let v = rng.gen_range(-1.0..1.0) + if r == c { 0.1 } else { 0.0 };
                band.add(r, c, v);
                dense[(r, c)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = b.clone();
        band.factor().unwrap().solve(&mut x);
        let xd = dense.lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()));
        }
    }

    #[test]
    fn singular_is_reported() {
        let m = BandMatrix::zeros(3, 1, 1);
        assert!(m.factor().is_err());
    }
}
