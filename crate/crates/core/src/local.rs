//! Local weighted p-Laplacian reference on `[a, b]` with Dirichlet data.
//!
//! The discrete energy is piecewise linear: `(1/p) sum_cells h_mid
//! |(u_{i+1} - u_i)/dx|^p dx - sum_i w_i g_i u_i` with `h_mid` the cell
//! average of the nodal coefficient. Sources live on interior nodes.

use serde::{Deserialize, Serialize};

use crate::banded::BandedSpd;
use crate::error::{Error, Result};
use crate::form::{abs_pow, phi_p};
use crate::optim::{max_abs, minimize, Method, MinimizeOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGrid {
    a: f64,
    b: f64,
    dx: f64,
    /// Prescribed values at `a` and `b`.
    pub boundary: (f64, f64),
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl LocalGrid {
    pub fn new(a: f64, b: f64, dx: f64, boundary: (f64, f64)) -> Result<Self> {
        if !(b > a) || !(dx > 0.0) {
            return Err(Error::Domain(format!("need a < b and dx > 0, got a = {a}, b = {b}, dx = {dx}")));
        }
        let cells = ((b - a) / dx).round();
        if cells < 2.0 || (cells * dx - (b - a)).abs() > 1e-9 * (b - a) {
            return Err(Error::Domain(format!("length {} is not a multiple of dx = {dx} (or too short)", b - a)));
        }
        if !(boundary.0.is_finite() && boundary.1.is_finite()) {
            return Err(Error::Domain("boundary values must be finite".into()));
        }
        let cells = cells as usize;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| a + i as f64 * dx).collect();
        nodes[cells] = b;
        let mut weights = vec![dx; cells + 1];
        weights[0] = 0.5 * dx;
        weights[cells] = 0.5 * dx;
        Ok(LocalGrid { a, b, dx, boundary, nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn interior_weights(&self) -> &[f64] {
        &self.weights[1..self.weights.len() - 1]
    }

    /// Linear interpolation of nodal values at `x` in `[a, b]`.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let t = ((x - self.a) / self.dx).clamp(0.0, (self.len() - 1) as f64);
        let k = (t.floor() as usize).min(self.len() - 2);
        let f = t - k as f64;
        (1.0 - f) * u[k] + f * u[k + 1]
    }

    fn check(&self, u: &[f64], h: &[f64], g: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::Length { expected: self.len(), got: u.len() });
        }
        check_coefficient(self, h)?;
        if g.len() != self.interior_count() {
            return Err(Error::Length { expected: self.interior_count(), got: g.len() });
        }
        Ok(())
    }
}

fn check_coefficient(lg: &LocalGrid, h: &[f64]) -> Result<()> {
    if h.len() != lg.len() {
        return Err(Error::Length { expected: lg.len(), got: h.len() });
    }
    if let Some(v) = h.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Coefficient(format!("local coefficient must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEnergyReport {
    #[serde(skip)]
    pub u: Vec<f64>,
    /// `b_h(u, u) = sum_cells h_mid |u'|^p dx`.
    pub bh_local: f64,
    pub energy: f64,
    pub residual: f64,
    pub converged: bool,
}

fn cell_coefficients(h: &[f64]) -> impl Iterator<Item = f64> + '_ {
    h.windows(2).map(|w| 0.5 * (w[0] + w[1]))
}

/// `b_h(u, u)`: the weighted `L^p` norm of the piecewise-linear gradient, to the power `p`.
pub fn gradient_energy(u: &[f64], h: &[f64], lg: &LocalGrid, p: f64) -> f64 {
    let dx = lg.dx;
    cell_coefficients(h).zip(u.windows(2)).map(|(hm, w)| hm * abs_pow((w[1] - w[0]) / dx, p) * dx).sum()
}

pub fn local_energy(u: &[f64], h: &[f64], g: &[f64], lg: &LocalGrid, p: f64) -> Result<f64> {
    lg.check(u, h, g)?;
    let src: f64 = lg.interior_weights().iter().zip(g).zip(&u[1..u.len() - 1]).map(|((w, g), u)| w * g * u).sum();
    Ok(gradient_energy(u, h, lg, p) / p - src)
}

/// Euler-Lagrange residual at interior nodes: `q_{i-1} - q_i - w_i g_i`,
/// with fluxes `q_k = h_mid phi_p(u'_k)`.
pub fn local_residual(u: &[f64], h: &[f64], g: &[f64], lg: &LocalGrid, p: f64) -> Vec<f64> {
    let dx = lg.dx;
    let q: Vec<f64> = cell_coefficients(h).zip(u.windows(2)).map(|(hm, w)| hm * phi_p((w[1] - w[0]) / dx, p)).collect();
    (0..lg.interior_count()).map(|k| q[k] - q[k + 1] - lg.interior_weights()[k] * g[k]).collect()
}

/// Linearized operator on interior unknowns: cell weights
/// `(p-1) h_mid max(|u'|, floor)^(p-2) / dx`.
pub fn local_hessian(u: &[f64], h: &[f64], lg: &LocalGrid, p: f64, floor: f64) -> BandedSpd {
    let dx = lg.dx;
    let n = lg.interior_count();
    let mut a = BandedSpd::zeros(n, 1);
    for (k, (hm, w)) in cell_coefficients(h).zip(u.windows(2)).enumerate() {
        let slope = ((w[1] - w[0]) / dx).abs();
        let wk = if p == 2.0 { hm / dx } else { (p - 1.0) * hm * slope.max(floor).powf(p - 2.0) / dx };
        // cell k joins nodes k and k+1; interior unknown m - 1 belongs to node m
        let left = (1..=n).contains(&k).then(|| k - 1);
        let right = (1..=n).contains(&(k + 1)).then_some(k);
        match (left, right) {
            (Some(l), Some(r)) => a.add_edge(l, r, wk),
            (Some(l), None) => a.add(l, l, wk),
            (None, Some(r)) => a.add(r, r, wk),
            (None, None) => {}
        }
    }
    a
}

/// Solve the discrete local problem exactly.
///
/// For `p = 2` this is a tridiagonal solve. For other `p` the flux obeys the
/// one-dimensional recurrence `q_k = q_0 - sum_{i<=k} w_i g_i`, the slopes are
/// `phi_{p'}(q_k / h_mid)`, and the scalar `q_0` is fixed by the boundary
/// values (a monotone equation solved by bisection to machine precision).
/// Residual tolerance of [`solve_local`]: `1e-10` for `p = 2`, `1e-8` otherwise.
pub fn residual_tol(p: f64) -> f64 {
    if p == 2.0 {
        1e-10
    } else {
        1e-8
    }
}

pub fn solve_local(g: &[f64], h: &[f64], lg: &LocalGrid, p: f64) -> Result<LocalEnergyReport> {
    let n = lg.len();
    let mut u0 = vec![0.0; n];
    u0[0] = lg.boundary.0;
    u0[n - 1] = lg.boundary.1;
    lg.check(&u0, h, g)?;
    if !(p > 1.0) {
        return Err(Error::Solver(format!("p must exceed 1, got {p}")));
    }
    let u = if p == 2.0 { solve_quadratic(g, h, lg)? } else { solve_by_flux(g, h, lg, p) };
    finish(u, g, h, lg, p, residual_tol(p))
}

fn finish(u: Vec<f64>, g: &[f64], h: &[f64], lg: &LocalGrid, p: f64, tol: f64) -> Result<LocalEnergyReport> {
    let residual = max_abs(&local_residual(&u, h, g, lg, p));
    let energy = local_energy(&u, h, g, lg, p)?;
    let bh_local = gradient_energy(&u, h, lg, p);
    Ok(LocalEnergyReport { u, bh_local, energy, residual, converged: residual <= tol })
}

fn solve_quadratic(g: &[f64], h: &[f64], lg: &LocalGrid) -> Result<Vec<f64>> {
    let n = lg.len();
    let (ua, ub) = lg.boundary;
    let mut boundary = vec![0.0; n];
    boundary[0] = ua;
    boundary[n - 1] = ub;
    let a = local_hessian(&boundary, h, lg, 2.0, 0.0);
    let hm: Vec<f64> = cell_coefficients(h).collect();
    let mut rhs: Vec<f64> = lg.interior_weights().iter().zip(g).map(|(w, g)| w * g).collect();
    let m = rhs.len();
    rhs[0] += hm[0] / lg.dx * ua;
    rhs[m - 1] += hm[n - 2] / lg.dx * ub;
    let x = a.cholesky()?.solve(&rhs);
    let mut u = Vec::with_capacity(n);
    u.push(ua);
    u.extend(x);
    u.push(ub);
    Ok(u)
}

fn solve_by_flux(g: &[f64], h: &[f64], lg: &LocalGrid, p: f64) -> Vec<f64> {
    let pp = p / (p - 1.0);
    let dx = lg.dx;
    let hm: Vec<f64> = cell_coefficients(h).collect();
    let mut cumulative = Vec::with_capacity(hm.len());
    let mut s = 0.0;
    cumulative.push(0.0);
    for (w, gi) in lg.interior_weights().iter().zip(g) {
        s += w * gi;
        cumulative.push(s);
    }
    let (ua, ub) = lg.boundary;
    let rise = ub - ua;
    let mismatch = |q0: f64| -> f64 {
        cumulative.iter().zip(&hm).map(|(c, hk)| dx * phi_p((q0 - c) / hk, pp)).sum::<f64>() - rise
    };
    let scale = 1.0 + cumulative.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let (mut lo, mut hi) = (-scale, scale);
    while mismatch(lo) > 0.0 {
        lo -= hi - lo;
    }
    while mismatch(hi) < 0.0 {
        hi += hi - lo;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mismatch(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q0 = if mismatch(lo).abs() <= mismatch(hi).abs() { lo } else { hi };
    let mut u = Vec::with_capacity(lg.len());
    let mut v = ua;
    u.push(v);
    for (c, hk) in cumulative.iter().zip(&hm).take(hm.len() - 1) {
        v += dx * phi_p((q0 - c) / hk, pp);
        u.push(v);
    }
    u.push(ub);
    u
}

/// Minimize the local energy by L-BFGS from `initial` interior values.
pub fn solve_local_descent(
    g: &[f64],
    h: &[f64],
    lg: &LocalGrid,
    p: f64,
    initial: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<LocalEnergyReport> {
    let n = lg.len();
    if initial.len() != n - 2 {
        return Err(Error::Length { expected: n - 2, got: initial.len() });
    }
    let mut u = vec![0.0; n];
    u[0] = lg.boundary.0;
    u[n - 1] = lg.boundary.1;
    lg.check(&u, h, g)?;
    let mut objective = |x: &[f64], grad: &mut [f64]| -> Result<f64> {
        u[1..n - 1].copy_from_slice(x);
        // the Euler-Lagrange residual is the energy gradient
        grad.copy_from_slice(&local_residual(&u, h, g, lg, p));
        local_energy(&u, h, g, lg, p)
    };
    let opts = MinimizeOptions::new(Method::Lbfgs, tol, max_iters);
    let r = minimize(&mut objective, initial, &opts, max_abs)?;
    let mut full = vec![lg.boundary.0];
    full.extend_from_slice(&r.x);
    full.push(lg.boundary.1);
    finish(full, g, h, lg, p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(lg: &LocalGrid) -> Vec<f64> {
        vec![1.0; lg.len()]
    }

    #[test]
    fn linear_energy_is_exact() {
        let lg = LocalGrid::new(0.0, 1.0, 0.05, (0.0, 1.0)).unwrap();
        let u: Vec<f64> = lg.nodes().to_vec();
        let g = vec![0.0; lg.interior_count()];
        let e = local_energy(&u, &unit(&lg), &g, &lg, 2.0).unwrap();
        assert!((e - 0.5).abs() < 1e-14);
        let c = vec![3.0; lg.len()];
        assert_eq!(local_energy(&c, &unit(&lg), &g, &lg, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_matches_cell_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lg = LocalGrid::new(0.0, 1.0, 0.04, (0.3, -0.2)).unwrap();
        let n = lg.len();
        for &p in &[1.5, 2.0, 3.0] {
            let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            u[0] = 0.3;
            u[n - 1] = -0.2;
            let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let g: Vec<f64> = (0..n - 2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut oracle = 0.0;
            for k in 0..n - 1 {
                let slope = (u[k + 1] - u[k]) / 0.04;
                oracle += 0.5 * (h[k] + h[k + 1]) * slope.abs().powf(p) * 0.04 / p;
            }
            for k in 1..n - 1 {
                oracle -= 0.04 * g[k - 1] * u[k];
            }
            let e = local_energy(&u, &h, &g, &lg, p).unwrap();
            assert!((e - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn p_harmonic_is_linear() {
        let lg = LocalGrid::new(0.0, 1.0, 0.02, (0.0, 1.0)).unwrap();
        let g = vec![0.0; lg.interior_count()];
        for &p in &[1.5, 2.0, 3.0, 4.0] {
            let r = solve_local(&g, &unit(&lg), &lg, p).unwrap();
            assert!(r.converged);
            for (u, x) in r.u.iter().zip(lg.nodes()) {
                assert!((u - x).abs() < 1e-12, "p = {p}");
            }
        }
    }

    #[test]
    fn quadratic_manufactured_solution_second_order() {
        let mut errors = Vec::new();
        for &dx in &[0.05, 0.025, 0.0125] {
            let lg = LocalGrid::new(0.0, 1.0, dx, (0.0, 0.0)).unwrap();
            let g = vec![1.0; lg.interior_count()];
            let r = solve_local(&g, &unit(&lg), &lg, 2.0).unwrap();
            assert!(r.residual <= 1e-10);
            let err = r.u.iter().zip(lg.nodes()).map(|(u, x)| (u - x * (1.0 - x) / 2.0).abs()).fold(0.0, f64::max);
            errors.push(err);
        }
        // piecewise-linear FE is nodally exact for constant sources in 1-D
        assert!(errors.iter().all(|&e| e < 1e-12), "{errors:?}");
    }

    #[test]
    fn variable_coefficient_converges_second_order() {
        // -(h u')' = g with h = 1 + x, u = sin(pi x): g = -pi cos(pi x) + (1+x) pi^2 sin(pi x)
        let pi = std::f64::consts::PI;
        let mut errors = Vec::new();
        for &dx in &[0.05, 0.025, 0.0125] {
            let lg = LocalGrid::new(0.0, 1.0, dx, (0.0, 0.0)).unwrap();
            let h: Vec<f64> = lg.nodes().iter().map(|x| 1.0 + x).collect();
            let g: Vec<f64> = lg
                .interior_nodes()
                .iter()
                .map(|&x| -pi * (pi * x).cos() + (1.0 + x) * pi * pi * (pi * x).sin())
                .collect();
            let r = solve_local(&g, &h, &lg, 2.0).unwrap();
            let err = r.u.iter().zip(lg.nodes()).map(|(u, x)| (u - (pi * x).sin()).abs()).fold(0.0, f64::max);
            errors.push(err);
        }
        for w in errors.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.8, "rate {rate}, errors {errors:?}");
        }
    }

    #[test]
    fn flux_solution_matches_descent_from_random_starts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lg = LocalGrid::new(0.0, 1.0, 0.02, (0.2, -0.1)).unwrap();
        let h: Vec<f64> = lg.nodes().iter().map(|x| 1.0 + 0.5 * x).collect();
        let g: Vec<f64> = lg.interior_nodes().iter().map(|x| (4.0 * x).cos()).collect();
        for &p in &[1.5, 3.0] {
            let exact = solve_local(&g, &h, &lg, p).unwrap();
            assert!(exact.converged, "p = {p}: residual {}", exact.residual);
            for _ in 0..2 {
                let start: Vec<f64> = (0..lg.interior_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let r = solve_local_descent(&g, &h, &lg, p, &start, 1e-12, 20_000).unwrap();
                assert!(r.converged, "p = {p}: residual {:e}", r.residual);
                let diff = r.u.iter().zip(&exact.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-8, "p = {p}: {diff}");
            }
        }
    }

    #[test]
    fn interpolation_on_nodes_and_midpoints() {
        let lg = LocalGrid::new(0.0, 1.0, 0.25, (0.0, 1.0)).unwrap();
        let u: Vec<f64> = lg.nodes().iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((lg.interpolate(&u, 0.3) - 1.6).abs() < 1e-14);
        assert_eq!(lg.interpolate(&u, 1.0), 3.0);
    }
}
