//! Symmetric positive definite banded matrices and their Cholesky factors.

use crate::error::{Error, Result};

/// Lower band storage: `band[i * (k + 1) + d]` holds `A[i][i - d]`.
#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    k: usize,
    band: Vec<f64>,
}

impl BandedSpd {
    pub fn zeros(n: usize, k: usize) -> Self {
        BandedSpd { n, k, band: vec![0.0; n * (k + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.k
    }

    #[inline]
    fn idx(&self, i: usize, d: usize) -> usize {
        i * (self.k + 1) + d
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.k {
            0.0
        } else {
            self.band[self.idx(hi, d)]
        }
    }

    /// Add `value` to the symmetric pair of entries `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.k, "entry ({i}, {j}) outside bandwidth {}", self.k);
        let at = self.idx(hi, d);
        self.band[at] += value;
    }

    /// Add the rank-one stencil `w (e_i - e_j)(e_i - e_j)^T`.
    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) {
        self.add(i, i, w);
        self.add(j, j, w);
        self.add(i, j, -w);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] += self.band[self.idx(i, 0)] * x[i];
            for d in 1..=self.k.min(i) {
                let a = self.band[self.idx(i, d)];
                y[i] += a * x[i - d];
                y[i - d] += a * x[i];
            }
        }
        y
    }

    pub fn cholesky(&self) -> Result<BandedCholesky> {
        let (n, k) = (self.n, self.k);
        let mut l = self.band.clone();
        let at = |i: usize, d: usize| i * (k + 1) + d;
        for j in 0..n {
            // diagonal
            let mut s = l[at(j, 0)];
            for d in 1..=k.min(j) {
                let v = l[at(j, d)];
                s -= v * v;
            }
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: s });
            }
            let ljj = s.sqrt();
            l[at(j, 0)] = ljj;
            // column below the diagonal
            for i in j + 1..(j + k + 1).min(n) {
                let dij = i - j;
                let mut s = l[at(i, dij)];
                // sum over m < j with both (i, m) and (j, m) in band
                let lo = i.saturating_sub(k);
                for m in lo..j {
                    s -= l[at(i, i - m)] * l[at(j, j - m)];
                }
                l[at(i, dij)] = s / ljj;
            }
        }
        Ok(BandedCholesky { n, k, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    k: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let (n, k) = (self.n, self.k);
        let at = |i: usize, d: usize| i * (k + 1) + d;
        for i in 0..n {
            let mut s = x[i];
            for d in 1..=k.min(i) {
                s -= self.l[at(i, d)] * x[i - d];
            }
            x[i] = s / self.l[at(i, 0)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for d in 1..=k.min(n - 1 - i) {
                s -= self.l[at(i + d, d)] * x[i + d];
            }
            x[i] = s / self.l[at(i, 0)];
        }
    }
}
