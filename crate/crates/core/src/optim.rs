//! Unconstrained smooth minimization: L-BFGS and nonlinear conjugate
//! gradients, both driven by a strong-Wolfe line search.
//!
//! The line search also accepts the approximate Wolfe conditions, which rely
//! on directional derivatives only. Near a minimizer the objective is flat to
//! within rounding and the Armijo test in function values is no longer
//! decidable, while derivatives stay accurate.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A differentiable objective: returns `f(x)` and writes the gradient.
pub trait Objective {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64>;
}

impl<F> Objective for F
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lbfgs,
    NonlinearCg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub method: Method,
    pub tol: f64,
    pub max_iters: usize,
    pub memory: usize,
}

impl MinimizeOptions {
    pub fn new(method: Method, tol: f64, max_iters: usize) -> Self {
        MinimizeOptions { method, tol, max_iters, memory: 12 }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub grad_metric: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

/// Armijo constant of the line search.
pub const C1: f64 = 1e-4;
/// Relative energy change below which the approximate Wolfe test applies.
pub const FLAT_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `obj` from `x0`, stopping once `metric(grad) <= opts.tol`.
pub fn minimize<O, M>(obj: &mut O, x0: &[f64], opts: &MinimizeOptions, metric: M) -> Result<MinimizeReport>
where
    O: Objective + ?Sized,
    M: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g)?;
    let mut evaluations = 1;
    let mut history = vec![f];

    let mut lbfgs = Lbfgs::new(opts.memory);
    let mut d = vec![0.0; n];
    let mut prev_g = vec![0.0; n];
    let mut prev_gd = 0.0;
    let mut prev_alpha = 0.0;
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut failures = 0;
    let mut iterations = 0;
    let c2 = match opts.method {
        Method::Lbfgs => 0.9,
        Method::NonlinearCg => 0.1,
    };

    loop {
        let gm = metric(&g);
        if gm <= opts.tol {
            return Ok(MinimizeReport {
                x,
                f,
                grad: g,
                grad_metric: gm,
                iterations,
                evaluations,
                converged: true,
                history,
            });
        }
        if iterations >= opts.max_iters || failures >= 2 {
            return Ok(MinimizeReport {
                x,
                f,
                grad: g,
                grad_metric: gm,
                iterations,
                evaluations,
                converged: false,
                history,
            });
        }

        // search direction
        let restart = failures > 0 || iterations == 0;
        match opts.method {
            Method::Lbfgs => {
                if restart {
                    lbfgs.clear();
                }
                lbfgs.direction(&g, &mut d);
            }
            Method::NonlinearCg => {
                if restart {
                    d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
                } else {
                    let gg_prev = dot(&prev_g, &prev_g);
                    let num: f64 = g.iter().zip(&prev_g).map(|(a, b)| a * (a - b)).sum();
                    let beta = (num / gg_prev).max(0.0);
                    d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi + beta * *di);
                }
            }
        }
        let mut gd = dot(&g, &d);
        if !(gd < 0.0) {
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            gd = dot(&g, &d);
            lbfgs.clear();
        }

        let unit_step = 1.0 / dot(&d, &d).sqrt().max(1e-300);
        let alpha0 = match opts.method {
            Method::Lbfgs if lbfgs.is_empty() => unit_step,
            Method::Lbfgs => 1.0,
            Method::NonlinearCg if restart || prev_alpha <= 0.0 => unit_step,
            Method::NonlinearCg => (prev_alpha * prev_gd / gd).clamp(1e-12, 1e12),
        };

        let found = line_search(obj, &x, &d, f, gd, alpha0, c2, &mut xt, &mut gt, &mut evaluations)?;
        match found {
            Some((alpha, ft)) => {
                failures = 0;
                iterations += 1;
                if opts.method == Method::Lbfgs {
                    let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
                    lbfgs.push(s, y);
                }
                prev_g.copy_from_slice(&g);
                prev_gd = gd;
                prev_alpha = alpha;
                std::mem::swap(&mut x, &mut xt);
                std::mem::swap(&mut g, &mut gt);
                f = ft;
                history.push(f);
            }
            None => {
                failures += 1;
            }
        }
    }
}

/// Damped Newton-type iteration: `direction(x, g)` returns a descent
/// direction (typically `-H^{-1} g` for a positive definite model `H`), and
/// the step length comes from the same Wolfe line search.
pub fn minimize_newton<O, M, D>(
    obj: &mut O,
    x0: &[f64],
    opts: &MinimizeOptions,
    metric: M,
    mut direction: D,
) -> Result<MinimizeReport>
where
    O: Objective + ?Sized,
    M: Fn(&[f64]) -> f64,
    D: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.eval(&x, &mut g)?;
    let mut evaluations = 1;
    let mut history = vec![f];
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut iterations = 0;
    let mut failures = 0;
    loop {
        let gm = metric(&g);
        if gm <= opts.tol || iterations >= opts.max_iters || failures >= 2 {
            return Ok(MinimizeReport {
                x,
                f,
                grad: g,
                grad_metric: gm,
                iterations,
                evaluations,
                converged: gm <= opts.tol,
                history,
            });
        }
        let mut d = if failures == 0 { direction(&x, &g)? } else { g.iter().map(|v| -v).collect() };
        let mut gd = dot(&g, &d);
        if !(gd < 0.0) || d.iter().any(|v| !v.is_finite()) {
            d = g.iter().map(|v| -v).collect();
            gd = dot(&g, &d);
        }
        let alpha0 = if failures == 0 { 1.0 } else { 1.0 / dot(&d, &d).sqrt().max(1e-300) };
        match line_search(obj, &x, &d, f, gd, alpha0, 0.9, &mut xt, &mut gt, &mut evaluations)? {
            Some((_, ft)) => {
                failures = 0;
                iterations += 1;
                std::mem::swap(&mut x, &mut xt);
                std::mem::swap(&mut g, &mut gt);
                f = ft;
                history.push(f);
            }
            None => failures += 1,
        }
    }
}

struct Lbfgs {
    memory: usize,
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    rho: Vec<f64>,
}

impl Lbfgs {
    fn new(memory: usize) -> Self {
        Lbfgs { memory: memory.max(1), s: Vec::new(), y: Vec::new(), rho: Vec::new() }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if !(sy > 1e-300) || !(sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt()) {
            return;
        }
        if self.s.len() == self.memory {
            self.s.remove(0);
            self.y.remove(0);
            self.rho.remove(0);
        }
        self.rho.push(1.0 / sy);
        self.s.push(s);
        self.y.push(y);
    }

    /// `d = -H g` by the two-loop recursion.
    fn direction(&self, g: &[f64], d: &mut [f64]) {
        d.iter_mut().zip(g).for_each(|(di, gi)| *di = -gi);
        let m = self.s.len();
        let mut alpha = vec![0.0; m];
        for k in (0..m).rev() {
            alpha[k] = self.rho[k] * dot(&self.s[k], d);
            d.iter_mut().zip(&self.y[k]).for_each(|(di, yi)| *di -= alpha[k] * yi);
        }
        if m > 0 {
            let yl = &self.y[m - 1];
            let gamma = dot(&self.s[m - 1], yl) / dot(yl, yl);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for (((s, y), rho), a) in self.s.iter().zip(&self.y).zip(&self.rho).zip(&alpha) {
            let beta = rho * dot(y, d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - beta) * si);
        }
    }
}

struct Probe {
    alpha: f64,
    f: f64,
    dphi: f64,
}

#[allow(clippy::too_many_arguments)]
fn line_search<O: Objective + ?Sized>(
    obj: &mut O,
    x: &[f64],
    d: &[f64],
    f0: f64,
    dphi0: f64,
    alpha0: f64,
    c2: f64,
    xt: &mut [f64],
    gt: &mut [f64],
    evaluations: &mut usize,
) -> Result<Option<(f64, f64)>> {
    let flat = FLAT_TOL * f0.abs().max(1e-300);
    let mut probe = |alpha: f64, xt: &mut [f64], gt: &mut [f64], evals: &mut usize| -> Result<Probe> {
        for ((t, xi), di) in xt.iter_mut().zip(x).zip(d) {
            *t = xi + alpha * di;
        }
        let f = obj.eval(xt, gt)?;
        *evals += 1;
        Ok(Probe { alpha, f, dphi: dot(gt, d) })
    };
    let sufficient = |p: &Probe| {
        p.f.is_finite()
            && (p.f <= f0 + C1 * p.alpha * dphi0 || (p.f <= f0 + flat && p.dphi <= (2.0 * C1 - 1.0) * dphi0))
    };
    let curvature = |p: &Probe| p.dphi.abs() <= -c2 * dphi0;

    let mut lo = Probe { alpha: 0.0, f: f0, dphi: dphi0 };
    let mut alpha = alpha0;
    let mut hi: Option<Probe> = None;
    for it in 0..40 {
        let p = probe(alpha, xt, gt, evaluations)?;
        if !sufficient(&p) || (it > 0 && p.f >= lo.f && p.f > f0 + flat) {
            hi = Some(p);
            break;
        }
        if curvature(&p) {
            return Ok(Some((p.alpha, p.f)));
        }
        if p.dphi >= 0.0 {
            hi = Some(Probe { ..lo });
            lo = p;
            break;
        }
        lo = p;
        alpha *= 4.0;
    }
    let Some(mut hi) = hi else {
        return Ok(None);
    };

    for _ in 0..60 {
        let (a, b) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
        let width = b - a;
        if width <= 1e-16 * b.max(1e-300) {
            break;
        }
        let mut trial = cubic_min(&lo, &hi);
        if !(trial.is_finite() && trial > a + 0.1 * width && trial < b - 0.1 * width) {
            trial = 0.5 * (a + b);
        }
        let p = probe(trial, xt, gt, evaluations)?;
        if !sufficient(&p) || p.f >= lo.f && p.f > f0 + flat {
            hi = p;
        } else {
            if curvature(&p) {
                return Ok(Some((p.alpha, p.f)));
            }
            if p.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    // fall back to the best point with decrease
    if lo.alpha > 0.0 && lo.f <= f0 {
        let p = probe(lo.alpha, xt, gt, evaluations)?;
        return Ok(Some((p.alpha, p.f)));
    }
    Ok(None)
}

fn cubic_min(a: &Probe, b: &Probe) -> f64 {
    let d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.dphi * b.dphi;
    if disc < 0.0 {
        return f64::NAN;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / (b.dphi - a.dphi + 2.0 * d2)
}

/// Max-norm of a vector.
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> Result<f64> {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        Ok((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2))
    }

    #[test]
    fn lbfgs_rosenbrock() {
        let opts = MinimizeOptions::new(Method::Lbfgs, 1e-10, 500);
        let r = minimize(&mut rosenbrock, &[-1.2, 1.0], &opts, max_abs).unwrap();
        assert!(r.converged, "{:?}", r.grad_metric);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ncg_rosenbrock() {
        let opts = MinimizeOptions::new(Method::NonlinearCg, 1e-8, 5000);
        let r = minimize(&mut rosenbrock, &[-1.2, 1.0], &opts, max_abs).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn history_is_monotone() {
        let mut quartic = |x: &[f64], g: &mut [f64]| -> Result<f64> {
            let mut f = 0.0;
            for (i, (xi, gi)) in x.iter().zip(g.iter_mut()).enumerate() {
                let c = (i + 1) as f64;
                f += c * xi.powi(4) + xi * xi - xi;
                *gi = 4.0 * c * xi.powi(3) + 2.0 * xi - 1.0;
            }
            Ok(f)
        };
        for method in [Method::Lbfgs, Method::NonlinearCg] {
            let opts = MinimizeOptions::new(method, 1e-12, 1000);
            let r = minimize(&mut quartic, &[3.0; 8], &opts, max_abs).unwrap();
            assert!(r.converged);
            assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
        }
    }

    #[test]
    fn newton_on_separable_quartic() {
        let mut obj = |x: &[f64], g: &mut [f64]| -> Result<f64> {
            g[0] = 4.0 * x[0].powi(3) - 1.0;
            g[1] = 2.0 * (x[1] - 2.0);
            Ok(x[0].powi(4) - x[0] + (x[1] - 2.0).powi(2))
        };
        let dir = |x: &[f64], g: &[f64]| -> Result<Vec<f64>> {
            Ok(vec![-g[0] / (12.0 * x[0] * x[0]).max(1e-12), -g[1] / 2.0])
        };
        let opts = MinimizeOptions::new(Method::Lbfgs, 1e-13, 100);
        let r = minimize_newton(&mut obj, &[2.0, 0.0], &opts, max_abs, dir).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(r.iterations < 20);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let opts = MinimizeOptions::new(Method::Lbfgs, 1e-14, 2);
        let r = minimize(&mut rosenbrock, &[-1.2, 1.0], &opts, max_abs).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }
}
