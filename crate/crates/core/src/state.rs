//! Nonlocal Dirichlet problem: minimize `(1/p) B_h(w, w) - int g w` over
//! fields that match the volume constraint on the collar.
//!
//! Collar values are substituted, never penalized; the unknowns are the
//! interior nodal values only.

use serde::{Deserialize, Serialize};

use crate::banded::BandedSpd;
use crate::error::{Error, Result};
use crate::form::{abs_pow, energy, energy_gradient_into, PairTable};
use crate::grid::Grid;
use crate::optim::{max_abs, minimize, minimize_newton, Method, MinimizeOptions};

/// Prescribed values on the collar nodes, in node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeConstraint {
    values: Vec<f64>,
}

impl VolumeConstraint {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        let n = grid.len() - grid.interior_count();
        if values.len() != n {
            return Err(Error::Length { expected: n, got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("volume constraint value {v} is not finite")));
        }
        Ok(VolumeConstraint { values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        let values = grid.collar_indices().into_iter().map(|i| f(grid.nodes()[i])).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: &Grid) -> Self {
        VolumeConstraint { values: vec![0.0; grid.len() - grid.interior_count()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Full nodal field with the collar set from the constraint and `interior` inside.
    pub fn extend(&self, grid: &Grid, interior: &[f64]) -> Vec<f64> {
        let range = grid.interior_range();
        assert_eq!(interior.len(), range.len());
        let mut u = vec![0.0; grid.len()];
        let mut c = self.values.iter();
        for (i, slot) in u.iter_mut().enumerate() {
            *slot = if range.contains(&i) {
                interior[i - range.start]
            } else {
                *c.next().expect("collar count matches grid")
            };
        }
        u
    }

    fn check(&self, grid: &Grid, u: &[f64]) -> Result<()> {
        for (k, i) in grid.collar_indices().into_iter().enumerate() {
            if u[i] != self.values[k] {
                return Err(Error::Constraint { node: i, expected: self.values[k], got: u[i] });
            }
        }
        Ok(())
    }
}

/// Source values on the interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub values: Vec<f64>,
}

impl Control {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.interior_count() {
            return Err(Error::Length { expected: grid.interior_count(), got: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("control value {v} is not finite")));
        }
        Ok(Control { values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Self {
        Control { values: grid.nodes()[grid.interior_range()].iter().map(|&x| f(x)).collect() }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Control { values: vec![0.0; grid.interior_count()] }
    }

    /// Discrete `L^q` norm over the interior with the grid weights.
    pub fn lp_norm(&self, grid: &Grid, q: f64) -> f64 {
        let w = &grid.quad_weights()[grid.interior_range()];
        w.iter().zip(&self.values).map(|(w, g)| w * g.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Nodal state over the extended domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    NonlinearCg,
    Lbfgs,
    /// Damped Newton on the floored Hessian, banded Cholesky per step.
    Newton,
    DirectLinear,
}

pub const MAX_ITERS_PER_NODE: usize = 50;
pub const MIN_MAX_ITERS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub p_prime: f64,
    pub grad_tol: f64,
    /// `None` means [`MAX_ITERS_PER_NODE`] per interior node, at least
    /// [`MIN_MAX_ITERS`]; for `p < 2` the degenerate curvature needs the room.
    pub max_iters: Option<usize>,
    pub optimizer: Optimizer,
}

impl SolverConfig {
    /// Defaults: direct solve and `1e-10` for `p = 2`, L-BFGS and `1e-8` otherwise.
    pub fn new(p: f64) -> Self {
        let (optimizer, grad_tol) = if p == 2.0 { (Optimizer::DirectLinear, 1e-10) } else { (Optimizer::Lbfgs, 1e-8) };
        SolverConfig { p, p_prime: p / (p - 1.0), grad_tol, max_iters: None, optimizer }
    }

    pub fn with_optimizer(mut self, optimizer: Optimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = Some(iters);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Solver(format!("p must exceed 1, got {}", self.p)));
        }
        if (self.p_prime * (self.p - 1.0) - self.p).abs() > 1e-12 * self.p {
            return Err(Error::Solver(format!(
                "conjugate exponent mismatch: p' = {} for p = {}",
                self.p_prime, self.p
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Solver(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if self.optimizer == Optimizer::DirectLinear && self.p != 2.0 {
            return Err(Error::Solver(format!("direct linear solve requires p = 2, got {}", self.p)));
        }
        Ok(())
    }

    pub fn resolved_max_iters(&self, grid: &Grid) -> usize {
        self.max_iters.unwrap_or((MAX_ITERS_PER_NODE * grid.interior_count()).max(MIN_MAX_ITERS))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub state: StateField,
    pub energy_value: f64,
    pub variational_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn source_term(grid: &Grid, g: &Control, u: &[f64]) -> f64 {
    let range = grid.interior_range();
    let w = &grid.quad_weights()[range.clone()];
    w.iter().zip(&g.values).zip(&u[range]).map(|((w, g), u)| w * g * u).sum()
}

/// `(1/p) B_h(u, u) - sum_i w_i g_i u_i`, after checking the volume constraint.
pub fn dirichlet_energy(
    u: &[f64],
    g: &Control,
    u0: &VolumeConstraint,
    table: &PairTable,
    grid: &Grid,
    p: f64,
) -> Result<f64> {
    if u.len() != grid.len() {
        return Err(Error::Length { expected: grid.len(), got: u.len() });
    }
    u0.check(grid, u)?;
    Ok(energy(table, u, p) - source_term(grid, g, u))
}

/// Interior gradient of the Dirichlet energy: `B_h(u, e_i) - w_i g_i`.
pub fn interior_residual(u: &[f64], g: &Control, table: &PairTable, grid: &Grid, p: f64) -> Vec<f64> {
    let mut full = vec![0.0; grid.len()];
    energy_gradient_into(table, u, p, &mut full);
    let range = grid.interior_range();
    let w = &grid.quad_weights()[range.clone()];
    full[range].iter().zip(w).zip(&g.values).map(|((r, w), g)| r - w * g).collect()
}

/// `max_i |B_h(u, e_i) - w_i g_i|` over interior coordinate directions.
pub fn variational_residual(u: &[f64], g: &Control, table: &PairTable, grid: &Grid, p: f64) -> f64 {
    max_abs(&interior_residual(u, g, table, grid, p))
}

/// Hessian of `(1/p) B_h` restricted to interior unknowns, evaluated at `u`.
///
/// Pair weights are `2 (p-1) coupling H max(|u_i - u_j|, floor)^(p-2)`; for
/// `p = 2` this is the exact (state independent) operator. Collar
/// couplings land on the diagonal only.
pub fn interior_hessian(table: &PairTable, grid: &Grid, u: &[f64], p: f64, floor: f64) -> BandedSpd {
    let range = grid.interior_range();
    let mut a = BandedSpd::zeros(range.len(), table.bandwidth());
    for pr in table.pairs() {
        let w = pr.weight();
        if w == 0.0 {
            continue;
        }
        let scale = if p == 2.0 { 2.0 } else { 2.0 * (p - 1.0) * (u[pr.i] - u[pr.j]).abs().max(floor).powf(p - 2.0) };
        let w = scale * w;
        match (range.contains(&pr.i), range.contains(&pr.j)) {
            (true, true) => a.add_edge(pr.i - range.start, pr.j - range.start, w),
            (true, false) => a.add(pr.i - range.start, pr.i - range.start, w),
            (false, true) => a.add(pr.j - range.start, pr.j - range.start, w),
            (false, false) => {}
        }
    }
    a
}

/// Differences below this fraction of the largest pair difference are clamped
/// in the Newton model; it keeps the model positive definite for `p > 2` and
/// bounded for `p < 2` without affecting the exact gradient.
pub const NEWTON_FLOOR_RELATIVE: f64 = 1e-3;
/// Absolute lower limit of the Newton clamp.
pub const NEWTON_FLOOR_ABSOLUTE: f64 = 1e-12;

fn newton_floor(table: &PairTable, u: &[f64]) -> f64 {
    let scale =
        table.pairs().iter().filter(|pr| pr.weight() > 0.0).fold(0.0f64, |m, pr| m.max((u[pr.i] - u[pr.j]).abs()));
    (NEWTON_FLOOR_RELATIVE * scale).max(NEWTON_FLOOR_ABSOLUTE)
}

/// Linear interpolation of the constraint across the interior.
pub fn default_initial_guess(grid: &Grid, u0: &VolumeConstraint) -> Vec<f64> {
    let range = grid.interior_range();
    if range.is_empty() {
        return Vec::new();
    }
    let collar = u0.extend(grid, &vec![0.0; range.len()]);
    let (l, r) = (range.start - 1, range.end);
    let (xl, xr) = (grid.nodes()[l], grid.nodes()[r]);
    let (ul, ur) = (collar[l], collar[r]);
    grid.nodes()[range].iter().map(|&x| ul + (ur - ul) * (x - xl) / (xr - xl)).collect()
}

pub fn solve_state(
    g: &Control,
    u0: &VolumeConstraint,
    table: &PairTable,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    solve_state_from(g, u0, table, grid, cfg, None)
}

/// [`solve_state`] with an optional interior starting point for the iterative paths.
pub fn solve_state_from(
    g: &Control,
    u0: &VolumeConstraint,
    table: &PairTable,
    grid: &Grid,
    cfg: &SolverConfig,
    initial: Option<&[f64]>,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n_int = grid.interior_count();
    if g.values.len() != n_int {
        return Err(Error::Length { expected: n_int, got: g.values.len() });
    }
    if table.n_nodes() != grid.len() {
        return Err(Error::Length { expected: grid.len(), got: table.n_nodes() });
    }
    let p = cfg.p;
    match cfg.optimizer {
        Optimizer::DirectLinear => {
            let u = solve_linear(g, u0, table, grid)?;
            let residual = variational_residual(&u, g, table, grid, p);
            let energy_value = dirichlet_energy(&u, g, u0, table, grid, p)?;
            Ok(SolveReport {
                state: StateField { values: u },
                energy_value,
                variational_residual: residual,
                iterations: 1,
                converged: residual <= cfg.grad_tol,
            })
        }
        Optimizer::Lbfgs | Optimizer::NonlinearCg | Optimizer::Newton => {
            let x0 = match initial {
                Some(x) if x.len() == n_int => x.to_vec(),
                Some(x) => return Err(Error::Length { expected: n_int, got: x.len() }),
                None => default_initial_guess(grid, u0),
            };
            let range = grid.interior_range();
            let weights = &grid.quad_weights()[range.clone()];
            let mut full = u0.extend(grid, &x0);
            let mut full_grad = vec![0.0; grid.len()];
            let mut objective = |x: &[f64], grad: &mut [f64]| -> Result<f64> {
                full[range.clone()].copy_from_slice(x);
                energy_gradient_into(table, &full, p, &mut full_grad);
                for (k, gk) in grad.iter_mut().enumerate() {
                    *gk = full_grad[range.start + k] - weights[k] * g.values[k];
                }
                let src: f64 = weights.iter().zip(&g.values).zip(x).map(|((w, g), u)| w * g * u).sum();
                Ok(energy(table, &full, p) - src)
            };
            let method = if cfg.optimizer == Optimizer::NonlinearCg { Method::NonlinearCg } else { Method::Lbfgs };
            let opts = MinimizeOptions::new(method, cfg.grad_tol, cfg.resolved_max_iters(grid));
            let r = if cfg.optimizer == Optimizer::Newton {
                let mut work = u0.extend(grid, &x0);
                let direction = |x: &[f64], grad: &[f64]| -> Result<Vec<f64>> {
                    work[range.clone()].copy_from_slice(x);
                    let floor = newton_floor(table, &work);
                    let hess = interior_hessian(table, grid, &work, p, floor);
                    let mut d = hess.cholesky()?.solve(grad);
                    d.iter_mut().for_each(|v| *v = -*v);
                    Ok(d)
                };
                minimize_newton(&mut objective, &x0, &opts, max_abs, direction)?
            } else {
                minimize(&mut objective, &x0, &opts, max_abs)?
            };
            let u = u0.extend(grid, &r.x);
            let residual = variational_residual(&u, g, table, grid, p);
            let energy_value = dirichlet_energy(&u, g, u0, table, grid, p)?;
            Ok(SolveReport {
                state: StateField { values: u },
                energy_value,
                variational_residual: residual,
                iterations: r.iterations,
                converged: residual <= cfg.grad_tol,
            })
        }
    }
}

fn solve_linear(g: &Control, u0: &VolumeConstraint, table: &PairTable, grid: &Grid) -> Result<Vec<f64>> {
    let range = grid.interior_range();
    let collar = u0.extend(grid, &vec![0.0; range.len()]);
    let a = interior_hessian(table, grid, &collar, 2.0, 0.0);
    let weights = &grid.quad_weights()[range.clone()];
    let mut rhs: Vec<f64> = weights.iter().zip(&g.values).map(|(w, g)| w * g).collect();
    for pr in table.pairs() {
        let w = 2.0 * pr.weight();
        match (range.contains(&pr.i), range.contains(&pr.j)) {
            (true, false) => rhs[pr.i - range.start] += w * collar[pr.j],
            (false, true) => rhs[pr.j - range.start] += w * collar[pr.i],
            _ => {}
        }
    }
    let x = a.cholesky()?.solve(&rhs);
    Ok(u0.extend(grid, &x))
}

/// Lower bound on the Dirichlet energy from the Poincare constant `c`:
/// `-(1/p) B_h(u0, u0) - (1/p') (|g|_{p'} / c^{1/p})^{p'} - |g|_{p'} |u0|_p`.
pub fn energy_lower_bound(
    g: &Control,
    u0: &VolumeConstraint,
    table: &PairTable,
    grid: &Grid,
    p: f64,
    poincare: f64,
) -> f64 {
    let pp = p / (p - 1.0);
    let u0_field = u0.extend(grid, &vec![0.0; grid.interior_count()]);
    let b00 = p * energy(table, &u0_field, p);
    let gnorm = g.lp_norm(grid, pp);
    let u0norm = grid.quad_weights().iter().zip(&u0_field).map(|(w, v)| w * abs_pow(*v, p)).sum::<f64>().powf(1.0 / p);
    -b00 / p - (gnorm / poincare.powf(1.0 / p)).powf(pp) / pp - gnorm * u0norm
}
