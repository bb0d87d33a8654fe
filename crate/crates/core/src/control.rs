//! Source control: minimize `sum w [G(u - u_d) + beta |g|^p'] + gamma B_{h0}(u, u)`
//! over sources `g`, with `u` the state of `g`.
//!
//! The reduced cost `g -> I(g, u(g))` is minimized by L-BFGS with gradients
//! from an adjoint solve. For `p = 2` the state operator is linear and
//! self-adjoint, so one Cholesky factor serves both state and adjoint.
//! Otherwise the adjoint uses the state operator linearized at `u`, with
//! `|u_i - u_j|` floored at `reg_floor` inside `|.|^(p-2)`.

use serde::{Deserialize, Serialize};

use crate::banded::BandedCholesky;
use crate::error::{Error, Result};
use crate::form::{abs_pow, energy, energy_gradient_into, phi_p, PairTable};
use crate::grid::Grid;
use crate::local::{gradient_energy, local_hessian, local_residual, solve_local, LocalGrid};
use crate::optim::{max_abs, minimize, Method, MinimizeOptions};
use crate::state::{
    interior_hessian, solve_state_from, variational_residual, Control, Optimizer, SolverConfig, StateField,
    VolumeConstraint,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tracking {
    /// `(u - u_d)^2`; not globally Lipschitz.
    Quadratic,
    /// Huber function of `u - u_d` with transition at `width`; Lipschitz with constant `width`.
    Huber { width: f64 },
    /// `|u - u_d|`; Lipschitz, nonsmooth at the target (subgradient 0 there).
    Abs,
}

impl Tracking {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Tracking::Quadratic => r * r,
            Tracking::Huber { width } => {
                if r.abs() <= width {
                    0.5 * r * r
                } else {
                    width * (r.abs() - 0.5 * width)
                }
            }
            Tracking::Abs => r.abs(),
        }
    }

    #[inline]
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            Tracking::Quadratic => 2.0 * r,
            Tracking::Huber { width } => r.clamp(-width, width),
            Tracking::Abs => {
                if r == 0.0 {
                    0.0
                } else {
                    r.signum()
                }
            }
        }
    }

    /// Global Lipschitz constant, when one exists.
    pub fn lipschitz(&self) -> Option<f64> {
        match *self {
            Tracking::Quadratic => None,
            Tracking::Huber { width } => Some(width),
            Tracking::Abs => Some(1.0),
        }
    }

    pub fn is_convex(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub tracking: Tracking,
    /// Target state on the interior nodes of the grid the cost is used with.
    pub u_d: Vec<f64>,
    pub beta: f64,
    pub gamma: f64,
    /// Whether the tracking term is globally Lipschitz.
    pub lipschitz: bool,
}

impl CostSpec {
    /// Validate the cost. `gamma > 0` is accepted only for `p = 2` unless `experimental` is set.
    pub fn new(tracking: Tracking, u_d: Vec<f64>, beta: f64, gamma: f64, p: f64, experimental: bool) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Cost(format!("beta must be positive, got {beta}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Cost(format!("gamma must be nonnegative, got {gamma}")));
        }
        if gamma > 0.0 && p != 2.0 && !experimental {
            return Err(Error::Cost(format!(
                "gamma > 0 requires p = 2 (got p = {p}); set experimental_gamma to override"
            )));
        }
        if let Tracking::Huber { width } = tracking {
            if !(width > 0.0) {
                return Err(Error::Cost(format!("huber width must be positive, got {width}")));
            }
        }
        if u_d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Cost("target state must be finite".into()));
        }
        Ok(CostSpec { tracking, u_d, beta, gamma, lipschitz: tracking.lipschitz().is_some() })
    }

    fn control_term(&self, weights: &[f64], g: &[f64], pp: f64) -> f64 {
        weights.iter().zip(g).map(|(w, g)| w * self.beta * g.abs().powf(pp)).sum()
    }

    fn tracking_term(&self, weights: &[f64], u_interior: &[f64]) -> f64 {
        weights.iter().zip(u_interior).zip(&self.u_d).map(|((w, u), d)| w * self.tracking.value(u - d)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub p: f64,
    /// Stop when `max_i |dI/dg_i| / w_i` falls below this.
    pub tol: f64,
    pub max_iters: usize,
    pub memory: usize,
    /// Inner state solver for `p != 2`.
    pub state: SolverConfig,
    pub reg_floor: f64,
}

impl ControlConfig {
    /// Defaults: `1e-8` for `p = 2`, `1e-6` otherwise; Newton state solves to `1e-12`.
    pub fn new(p: f64) -> Self {
        let state = if p == 2.0 {
            SolverConfig::new(p)
        } else {
            SolverConfig::new(p).with_optimizer(Optimizer::Newton).with_tol(1e-12).with_max_iters(500)
        };
        ControlConfig {
            p,
            tol: if p == 2.0 { 1e-8 } else { 1e-6 },
            max_iters: 2000,
            memory: 20,
            state,
            reg_floor: 1e-12,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }

    pub fn p_prime(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    #[serde(skip)]
    pub g_opt: Vec<f64>,
    #[serde(skip)]
    pub u_opt: StateField,
    pub cost: f64,
    pub reduced_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual of the state equation at the returned pair.
    pub state_residual: f64,
    pub history: Vec<f64>,
}

/// How [`eval_cost`] treats the state argument.
#[derive(Debug, Clone, Copy)]
pub enum StateCheck<'a> {
    /// Verify that `u` solves the state equation for `g` within `tol`.
    OnManifold {
        table_h: &'a PairTable,
        tol: f64,
    },
    OffManifold,
}

/// Nonlocal cost `I_delta(g, u)`.
pub fn eval_cost(
    g: &Control,
    u: &[f64],
    spec: &CostSpec,
    table_h0: &PairTable,
    grid: &Grid,
    p: f64,
    check: StateCheck<'_>,
) -> Result<f64> {
    let range = grid.interior_range();
    if u.len() != grid.len() {
        return Err(Error::Length { expected: grid.len(), got: u.len() });
    }
    if spec.u_d.len() != range.len() {
        return Err(Error::Length { expected: range.len(), got: spec.u_d.len() });
    }
    if let StateCheck::OnManifold { table_h, tol } = check {
        let residual = variational_residual(u, g, table_h, grid, p);
        if residual > tol {
            return Err(Error::OffManifold { residual, tol });
        }
    }
    let w = &grid.quad_weights()[range.clone()];
    let pp = p / (p - 1.0);
    let mut cost = spec.tracking_term(w, &u[range]) + spec.control_term(w, &g.values, pp);
    if spec.gamma > 0.0 {
        cost += spec.gamma * p * energy(table_h0, u, p);
    }
    Ok(cost)
}

/// A reduced control problem `g -> I(g, u(g))` with adjoint gradients.
pub trait ReducedProblem {
    fn weights(&self) -> &[f64];
    /// Reduced cost at `g`; writes the gradient and caches the state.
    fn evaluate(&mut self, g: &[f64], grad: &mut [f64]) -> Result<f64>;
    /// State of the last evaluated control.
    fn state(&self) -> &[f64];
    /// State-equation residual of the last evaluation.
    fn state_residual(&self) -> f64;
}

/// Nonlocal reduced problem.
pub struct NonlocalReduced<'a> {
    spec: &'a CostSpec,
    u0: &'a VolumeConstraint,
    table_h: &'a PairTable,
    table_h0: &'a PairTable,
    grid: &'a Grid,
    cfg: ControlConfig,
    weights: Vec<f64>,
    // p = 2: factor of the interior operator and the collar contribution
    factor: Option<(BandedCholesky, Vec<f64>)>,
    state: Vec<f64>,
    residual: f64,
    scratch: Vec<f64>,
}

impl<'a> NonlocalReduced<'a> {
    pub fn new(
        spec: &'a CostSpec,
        u0: &'a VolumeConstraint,
        table_h: &'a PairTable,
        table_h0: &'a PairTable,
        grid: &'a Grid,
        cfg: ControlConfig,
    ) -> Result<Self> {
        let range = grid.interior_range();
        if spec.u_d.len() != range.len() {
            return Err(Error::Length { expected: range.len(), got: spec.u_d.len() });
        }
        let p = cfg.p;
        if spec.gamma > 0.0 && p != 2.0 {
            return Err(Error::Cost(format!("gamma > 0 requires p = 2, got p = {p}")));
        }
        cfg.state.validate()?;
        let weights = grid.quad_weights()[range.clone()].to_vec();
        let state = u0.extend(grid, &crate::state::default_initial_guess(grid, u0));
        let factor = if p == 2.0 {
            let collar = u0.extend(grid, &vec![0.0; range.len()]);
            let a = interior_hessian(table_h, grid, &collar, 2.0, 0.0);
            let mut rhs = vec![0.0; range.len()];
            for pr in table_h.pairs() {
                let w = 2.0 * pr.weight();
                match (range.contains(&pr.i), range.contains(&pr.j)) {
                    (true, false) => rhs[pr.i - range.start] += w * collar[pr.j],
                    (false, true) => rhs[pr.j - range.start] += w * collar[pr.i],
                    _ => {}
                }
            }
            Some((a.cholesky()?, rhs))
        } else {
            None
        };
        Ok(NonlocalReduced {
            spec,
            u0,
            table_h,
            table_h0,
            grid,
            cfg,
            weights,
            factor,
            state,
            residual: 0.0,
            scratch: vec![0.0; grid.len()],
        })
    }

    fn solve_state(&mut self, g: &[f64]) -> Result<()> {
        let range = self.grid.interior_range();
        let control = Control { values: g.to_vec() };
        if let Some((chol, collar_rhs)) = &self.factor {
            let mut rhs: Vec<f64> = self.weights.iter().zip(g).zip(collar_rhs).map(|((w, g), c)| w * g + c).collect();
            chol.solve_in_place(&mut rhs);
            self.state[range].copy_from_slice(&rhs);
        } else {
            let warm = self.state[range].to_vec();
            let r = solve_state_from(&control, self.u0, self.table_h, self.grid, &self.cfg.state, Some(&warm))?;
            if !r.converged {
                return Err(Error::NotConverged { iterations: r.iterations, residual: r.variational_residual });
            }
            self.state = r.state.values;
        }
        self.residual = variational_residual(&self.state, &control, self.table_h, self.grid, self.cfg.p);
        Ok(())
    }
}

impl ReducedProblem for NonlocalReduced<'_> {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn evaluate(&mut self, g: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.solve_state(g)?;
        let p = self.cfg.p;
        let pp = self.cfg.p_prime();
        let range = self.grid.interior_range();
        let u = &self.state;
        let spec = self.spec;
        let mut cost = spec.tracking_term(&self.weights, &u[range.clone()]) + spec.control_term(&self.weights, g, pp);
        // d cost / d u on the interior
        let mut du: Vec<f64> = self
            .weights
            .iter()
            .zip(&u[range.clone()])
            .zip(&spec.u_d)
            .map(|((w, u), d)| w * spec.tracking.derivative(u - d))
            .collect();
        if spec.gamma > 0.0 {
            cost += spec.gamma * p * energy(self.table_h0, u, p);
            energy_gradient_into(self.table_h0, u, p, &mut self.scratch);
            for (d, s) in du.iter_mut().zip(&self.scratch[range.clone()]) {
                *d += spec.gamma * p * s;
            }
        }
        let adjoint = match &self.factor {
            Some((chol, _)) => chol.solve(&du),
            None => interior_hessian(self.table_h, self.grid, u, p, self.cfg.reg_floor).cholesky()?.solve(&du),
        };
        for (k, gk) in grad.iter_mut().enumerate() {
            let w = self.weights[k];
            *gk = w * (spec.beta * pp * phi_p(g[k], pp) + adjoint[k]);
        }
        Ok(cost)
    }

    fn state(&self) -> &[f64] {
        &self.state
    }

    fn state_residual(&self) -> f64 {
        self.residual
    }
}

/// Local reduced problem on a [`LocalGrid`].
pub struct LocalReduced<'a> {
    spec: &'a CostSpec,
    h: &'a [f64],
    h0: &'a [f64],
    lg: &'a LocalGrid,
    cfg: ControlConfig,
    weights: Vec<f64>,
    factor: Option<BandedCholesky>,
    state: Vec<f64>,
    residual: f64,
}

impl<'a> LocalReduced<'a> {
    pub fn new(spec: &'a CostSpec, h: &'a [f64], h0: &'a [f64], lg: &'a LocalGrid, cfg: ControlConfig) -> Result<Self> {
        let n = lg.interior_count();
        if spec.u_d.len() != n {
            return Err(Error::Length { expected: n, got: spec.u_d.len() });
        }
        for field in [h, h0] {
            if field.len() != lg.len() {
                return Err(Error::Length { expected: lg.len(), got: field.len() });
            }
        }
        if spec.gamma > 0.0 && cfg.p != 2.0 {
            return Err(Error::Cost(format!("gamma > 0 requires p = 2, got p = {}", cfg.p)));
        }
        let factor =
            if cfg.p == 2.0 { Some(local_hessian(&vec![0.0; lg.len()], h, lg, 2.0, 0.0).cholesky()?) } else { None };
        let mut state = vec![0.0; lg.len()];
        state[0] = lg.boundary.0;
        state[lg.len() - 1] = lg.boundary.1;
        Ok(LocalReduced { spec, h, h0, lg, cfg, weights: lg.interior_weights().to_vec(), factor, state, residual: 0.0 })
    }
}

impl ReducedProblem for LocalReduced<'_> {
    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn evaluate(&mut self, g: &[f64], grad: &mut [f64]) -> Result<f64> {
        let p = self.cfg.p;
        let pp = self.cfg.p_prime();
        let lg = self.lg;
        let n = lg.len();
        if let Some(chol) = &self.factor {
            let dx = lg.dx();
            let (ua, ub) = lg.boundary;
            let mut rhs: Vec<f64> = self.weights.iter().zip(g).map(|(w, g)| w * g).collect();
            let m = rhs.len();
            rhs[0] += 0.5 * (self.h[0] + self.h[1]) / dx * ua;
            rhs[m - 1] += 0.5 * (self.h[n - 2] + self.h[n - 1]) / dx * ub;
            chol.solve_in_place(&mut rhs);
            self.state[1..n - 1].copy_from_slice(&rhs);
        } else {
            let r = solve_local(g, self.h, lg, p)?;
            self.state = r.u;
        }
        self.residual = max_abs(&local_residual(&self.state, self.h, g, lg, p));
        let u = &self.state;
        let spec = self.spec;
        let mut cost = spec.tracking_term(&self.weights, &u[1..n - 1]) + spec.control_term(&self.weights, g, pp);
        let mut du: Vec<f64> = self
            .weights
            .iter()
            .zip(&u[1..n - 1])
            .zip(&spec.u_d)
            .map(|((w, u), d)| w * spec.tracking.derivative(u - d))
            .collect();
        if spec.gamma > 0.0 {
            cost += spec.gamma * gradient_energy(u, self.h0, lg, p);
            let zero = vec![0.0; n - 2];
            let dgrad = local_residual(u, self.h0, &zero, lg, p);
            for (d, s) in du.iter_mut().zip(&dgrad) {
                *d += spec.gamma * p * s;
            }
        }
        let adjoint = match &self.factor {
            Some(chol) => chol.solve(&du),
            None => local_hessian(u, self.h, lg, p, self.cfg.reg_floor).cholesky()?.solve(&du),
        };
        for (k, gk) in grad.iter_mut().enumerate() {
            *gk = self.weights[k] * (spec.beta * pp * phi_p(g[k], pp) + adjoint[k]);
        }
        Ok(cost)
    }

    fn state(&self) -> &[f64] {
        &self.state
    }

    fn state_residual(&self) -> f64 {
        self.residual
    }
}

/// Reduced gradient of the nonlocal cost at `g`.
pub fn reduced_gradient(
    g: &Control,
    spec: &CostSpec,
    u0: &VolumeConstraint,
    table_h: &PairTable,
    table_h0: &PairTable,
    grid: &Grid,
    cfg: &ControlConfig,
) -> Result<Vec<f64>> {
    let mut problem = NonlocalReduced::new(spec, u0, table_h, table_h0, grid, *cfg)?;
    let mut grad = vec![0.0; g.values.len()];
    problem.evaluate(&g.values, &mut grad)?;
    Ok(grad)
}

/// Reduced cost `I(g, u(g))` of the nonlocal problem.
pub fn reduced_cost(
    g: &Control,
    spec: &CostSpec,
    u0: &VolumeConstraint,
    table_h: &PairTable,
    table_h0: &PairTable,
    grid: &Grid,
    cfg: &ControlConfig,
) -> Result<f64> {
    let mut problem = NonlocalReduced::new(spec, u0, table_h, table_h0, grid, *cfg)?;
    let mut grad = vec![0.0; g.values.len()];
    problem.evaluate(&g.values, &mut grad)
}

/// Minimize a reduced problem from `initial`.
pub fn minimize_reduced<R: ReducedProblem>(
    problem: &mut R,
    initial: &[f64],
    cfg: &ControlConfig,
) -> Result<ControlReport> {
    let weights = problem.weights().to_vec();
    if initial.len() != weights.len() {
        return Err(Error::Length { expected: weights.len(), got: initial.len() });
    }
    let metric = |grad: &[f64]| grad.iter().zip(&weights).fold(0.0f64, |m, (g, w)| m.max((g / w).abs()));
    let mut objective = |x: &[f64], grad: &mut [f64]| problem.evaluate(x, grad);
    let mut opts = MinimizeOptions::new(Method::Lbfgs, cfg.tol, cfg.max_iters);
    opts.memory = cfg.memory;
    let r = minimize(&mut objective, initial, &opts, metric)?;
    // re-evaluate so the cached state belongs to the returned control
    let mut grad = vec![0.0; r.x.len()];
    let cost = problem.evaluate(&r.x, &mut grad)?;
    Ok(ControlReport {
        u_opt: StateField { values: problem.state().to_vec() },
        g_opt: r.x,
        cost,
        reduced_grad_norm: metric(&grad),
        iterations: r.iterations,
        converged: r.converged,
        state_residual: problem.state_residual(),
        history: r.history,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn solve_control(
    spec: &CostSpec,
    u0: &VolumeConstraint,
    table_h: &PairTable,
    table_h0: &PairTable,
    grid: &Grid,
    cfg: &ControlConfig,
    initial: Option<&Control>,
) -> Result<ControlReport> {
    let mut problem = NonlocalReduced::new(spec, u0, table_h, table_h0, grid, *cfg)?;
    let start = initial.map_or_else(|| vec![0.0; grid.interior_count()], |g| g.values.clone());
    minimize_reduced(&mut problem, &start, cfg)
}

pub fn solve_local_control(
    spec: &CostSpec,
    h: &[f64],
    h0: &[f64],
    lg: &LocalGrid,
    cfg: &ControlConfig,
    initial: Option<&[f64]>,
) -> Result<ControlReport> {
    let mut problem = LocalReduced::new(spec, h, h0, lg, *cfg)?;
    let start = initial.map_or_else(|| vec![0.0; lg.interior_count()], <[f64]>::to_vec);
    minimize_reduced(&mut problem, &start, cfg)
}

/// Local cost `I(g, u)` for a given pair, without a state check.
pub fn eval_local_cost(g: &[f64], u: &[f64], spec: &CostSpec, h0: &[f64], lg: &LocalGrid, p: f64) -> f64 {
    let n = lg.len();
    let w = lg.interior_weights();
    let pp = p / (p - 1.0);
    let mut cost = spec.tracking_term(w, &u[1..n - 1]) + spec.control_term(w, g, pp);
    if spec.gamma > 0.0 {
        cost += spec.gamma * gradient_energy(u, h0, lg, p);
    }
    cost
}

/// `beta * sum w |g|^p'`.
pub fn control_penalty(g: &[f64], weights: &[f64], beta: f64, p: f64) -> f64 {
    let pp = p / (p - 1.0);
    weights.iter().zip(g).map(|(w, g)| w * beta * abs_pow(*g, pp)).sum()
}
