//! Discrete nonlocal forms `B(u, v)` and `B_h(u, v)` on a uniform grid.
//!
//! The ordered double integral over the extended domain is stored as a flat
//! list of unordered pairs `(i, j)`, `0 < |x_i - x_j| < delta`, each counted
//! twice on evaluation. The diagonal is excluded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::Kernel;
use crate::par;

/// `|t|^(p-2) t`, with the value 0 at `t = 0` for every `p > 1`.
#[inline]
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if p == 2.0 {
        t
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// `|t|^p`, specialised for the quadratic case.
#[inline]
pub fn abs_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

/// Diffusion coefficient: bounded in `[h_min, h_max]` inside, zero on the collar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    values: Vec<f64>,
    h_min: f64,
    h_max: f64,
}

impl CoefficientField {
    pub fn new(grid: &Grid, values: Vec<f64>, h_min: f64, h_max: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Length { expected: grid.len(), got: values.len() });
        }
        if !(h_min > 0.0 && h_max >= h_min && h_max.is_finite()) {
            return Err(Error::Coefficient(format!("need 0 < h_min <= h_max, got h_min = {h_min}, h_max = {h_max}")));
        }
        for (i, &v) in values.iter().enumerate() {
            if grid.interior_mask()[i] {
                if !(h_min..=h_max).contains(&v) {
                    return Err(Error::Coefficient(format!(
                        "value {v} at interior node {i} outside [{h_min}, {h_max}]"
                    )));
                }
            } else if v != 0.0 {
                return Err(Error::Coefficient(format!("value {v} at collar node {i} must be 0")));
            }
        }
        Ok(CoefficientField { values, h_min, h_max })
    }

    /// Sample `f` on the interior and set the collar to zero.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, h_min: f64, h_max: f64, f: F) -> Result<Self> {
        let values = grid
            .nodes()
            .iter()
            .zip(grid.interior_mask())
            .map(|(&x, &inside)| if inside { f(x) } else { 0.0 })
            .collect();
        Self::new(grid, values, h_min, h_max)
    }

    /// `h = 1` on the interior.
    pub fn unit(grid: &Grid) -> Self {
        Self::from_fn(grid, 1.0, 1.0, |_| 1.0).expect("unit coefficient is admissible")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }
}

/// Quadrature rule for the inner (pair-distance) integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelQuadrature {
    /// Trapezoid weights with the diagonal omitted.
    Punched,
    /// Punched weights rescaled so the discrete kernel mass equals `C_N`.
    #[default]
    MomentMatched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    /// `w_i w_j k(|x_i - x_j|) / |x_i - x_j|^p`.
    pub coupling: f64,
    /// `(h_i + h_j) / 2`, or 1 for the unweighted form.
    pub h_mid: f64,
}

impl Pair {
    #[inline]
    pub fn weight(&self) -> f64 {
        self.coupling * self.h_mid
    }
}

#[derive(Debug, Clone)]
pub struct PairTable {
    n_nodes: usize,
    delta: f64,
    p: f64,
    pairs: Vec<Pair>,
    // CSR adjacency: neighbors of node i with the combined pair weight
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
    bandwidth: usize,
    weighted: bool,
    quadrature: KernelQuadrature,
    calibration: f64,
}

pub fn assemble_pairs(grid: &Grid, kernel: &Kernel, h: Option<&CoefficientField>) -> Result<PairTable> {
    assemble_pairs_with(grid, kernel, h, KernelQuadrature::default())
}

pub fn assemble_pairs_with(
    grid: &Grid,
    kernel: &Kernel,
    h: Option<&CoefficientField>,
    quadrature: KernelQuadrature,
) -> Result<PairTable> {
    let delta = grid.delta();
    if (kernel.delta - delta).abs() > 1e-12 * delta {
        return Err(Error::HorizonMismatch { grid: delta, kernel: kernel.delta });
    }
    if kernel.dim != 1 {
        return Err(Error::Kernel(format!("pair assembly is one-dimensional, kernel has dim = {}", kernel.dim)));
    }
    if let Some(h) = h {
        if h.values().len() != grid.len() {
            return Err(Error::Length { expected: grid.len(), got: h.values().len() });
        }
    }
    let dx = grid.dx();
    let p = kernel.p;
    let band = max_offset(delta, dx);
    let calibration = match quadrature {
        KernelQuadrature::Punched => 1.0,
        KernelQuadrature::MomentMatched => {
            let mass: f64 = (1..=band).map(|m| 2.0 * dx * kernel.value(m as f64 * dx)).sum();
            if mass > 0.0 {
                kernel.c_n / mass
            } else {
                1.0
            }
        }
    };
    let per_offset: Vec<f64> = (1..=band)
        .map(|m| {
            let r = m as f64 * dx;
            calibration * kernel.value(r) / r.powf(p)
        })
        .collect();

    let n = grid.len();
    let w = grid.quad_weights();
    let mut pairs = Vec::with_capacity(n * band);
    for i in 0..n {
        for m in 1..=band {
            let j = i + m;
            if j >= n {
                break;
            }
            let h_mid = h.map_or(1.0, |h| 0.5 * (h.values()[i] + h.values()[j]));
            pairs.push(Pair { i, j, coupling: w[i] * w[j] * per_offset[m - 1], h_mid });
        }
    }

    let mut degree = vec![0usize; n];
    for pr in &pairs {
        degree[pr.i] += 1;
        degree[pr.j] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    // neighbors in increasing index order: lower ones first, then upper
    let mut neighbors = vec![(0usize, 0.0f64); offsets[n]];
    let mut fill = offsets.clone();
    for pr in &pairs {
        neighbors[fill[pr.j]] = (pr.i, pr.weight());
        fill[pr.j] += 1;
    }
    for pr in &pairs {
        neighbors[fill[pr.i]] = (pr.j, pr.weight());
        fill[pr.i] += 1;
    }

    Ok(PairTable {
        n_nodes: n,
        delta,
        p,
        pairs,
        offsets,
        neighbors,
        bandwidth: band,
        weighted: h.is_some(),
        quadrature,
        calibration,
    })
}

/// Largest integer `m` with `m dx < delta`.
fn max_offset(delta: f64, dx: f64) -> usize {
    let ratio = delta / dx;
    let mut m = ratio.floor() as usize;
    if (m as f64) >= ratio * (1.0 - 1e-10) {
        m = m.saturating_sub(1);
    }
    m
}

impl PairTable {
    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Exponent the couplings were assembled with.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Maximum index distance between paired nodes.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn quadrature(&self) -> KernelQuadrature {
        self.quadrature
    }

    /// Factor applied to the punched couplings.
    pub fn calibration(&self) -> f64 {
        self.calibration
    }

    /// Neighbors of node `i` and the combined weights `coupling * H`.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    fn check_len(&self, u: &[f64]) {
        assert_eq!(u.len(), self.n_nodes, "field length does not match pair table");
    }
}

/// `(1/p) B_h(u, u)`.
pub fn energy(table: &PairTable, u: &[f64], p: f64) -> f64 {
    table.check_len(u);
    let pairs = table.pairs();
    let sum = par::chunked_sum(pairs.len(), |k| {
        let pr = &pairs[k];
        pr.weight() * abs_pow(u[pr.i] - u[pr.j], p)
    });
    2.0 * sum / p
}

/// `B_h(u, v)`.
pub fn bh_form(table: &PairTable, u: &[f64], v: &[f64], p: f64) -> f64 {
    table.check_len(u);
    table.check_len(v);
    let pairs = table.pairs();
    let sum = par::chunked_sum(pairs.len(), |k| {
        let pr = &pairs[k];
        pr.weight() * phi_p(u[pr.i] - u[pr.j], p) * (v[pr.i] - v[pr.j])
    });
    2.0 * sum
}

/// Gradient of [`energy`] with respect to every nodal value.
pub fn energy_gradient(table: &PairTable, u: &[f64], p: f64) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    energy_gradient_into(table, u, p, &mut out);
    out
}

pub fn energy_gradient_into(table: &PairTable, u: &[f64], p: f64, out: &mut [f64]) {
    table.check_len(u);
    table.check_len(out);
    par::fill_indexed(out, |i| {
        let ui = u[i];
        2.0 * table.neighbors(i).iter().map(|&(j, w)| w * phi_p(ui - u[j], p)).sum::<f64>()
    });
}

/// Discrete `L^p` norm over the extended domain, trapezoid weights.
pub fn lp_norm(grid: &Grid, w: &[f64], p: f64) -> f64 {
    grid.quad_weights().iter().zip(w).map(|(q, v)| q * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}
