//! Oracles shared by the integration tests. Nothing here calls the
//! quantities it checks; each helper recomputes them from first principles.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use nonlocal_control::grid::Grid;
use nonlocal_control::kernel::Kernel;
use nonlocal_control::profile::Profile;

/// Tanh-sinh quadrature of `f` over `(0, len)`, tolerating integrable endpoint
/// singularities: abscissas are formed from the distance to the nearer end.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, len: f64, tol: f64) -> f64 {
    let eval = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let du = FRAC_PI_2 * t.cosh();
        // distance to the left end for t < 0, to the right end for t >= 0
        let e = (-2.0 * u.abs()).exp();
        let near = len * e / (1.0 + e);
        let x = if t < 0.0 { near } else { len - near };
        let w = len * du * 2.0 * e / ((1.0 + e) * (1.0 + e));
        if near <= 0.0 {
            0.0
        } else {
            w * f(x)
        }
    };
    let tmax = 6.5;
    let mut h = 0.5;
    let mut prev = f64::NAN;
    loop {
        let n = (tmax / h) as i64;
        let sum: f64 = (-n..=n).map(|k| eval(k as f64 * h)).sum::<f64>() * h;
        if (sum - prev).abs() <= tol * sum.abs() || h < 1e-4 {
            return sum;
        }
        prev = sum;
        h *= 0.5;
    }
}

/// `(1/C_N) int_{-delta}^{delta} k(|z|) dz` by tanh-sinh on `(0, delta)`.
pub fn kernel_mass(kernel: &Kernel) -> f64 {
    2.0 * tanh_sinh(|r| kernel.value(r), kernel.delta, 1e-14) / kernel.c_n
}

/// Dense interior operator `A` and collar load `b` of the linear (`p = 2`)
/// nonlocal problem, assembled node by node from kernel values.
pub fn dense_linear_system(
    grid: &Grid,
    kernel: &Kernel,
    h: &[f64],
    collar: &[f64],
    calibration: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let x = grid.nodes();
    let w = grid.quad_weights();
    let range = grid.interior_range();
    let n = range.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    for (ri, i) in range.clone().enumerate() {
        for j in 0..x.len() {
            let r = (x[i] - x[j]).abs();
            if j == i || r >= kernel.delta * (1.0 - 1e-12) {
                continue;
            }
            let c = 2.0 * w[i] * w[j] * calibration * kernel.value(r) / (r * r) * 0.5 * (h[i] + h[j]);
            a[(ri, ri)] += c;
            if range.contains(&j) {
                a[(ri, j - range.start)] -= c;
            } else {
                b[ri] += c * collar[j];
            }
        }
    }
    (a, b)
}

fn cosine(amplitude: f64, k: f64) -> Profile {
    Profile::Sine { amplitude, frequency: k, phase: FRAC_PI_2, offset: 0.0 }
}

/// Target for Huber tracking (in its quadratic range) with `p = 2`, `h = 1`,
/// `u0 = 0` whose local optimal state is `A sin^4(pi x)`. Stationarity gives
/// `g = -lambda / (2 beta)`, `lambda = 2 beta u''`, and the adjoint equation
/// `-lambda'' = u - u_d`, so `u_d = u + 2 beta u''''`. State and adjoint both
/// have zero flux at the ends, which removes the leading boundary-layer term
/// of the horizon-to-zero error.
pub fn flux_free_target(amplitude: f64, beta: f64) -> Profile {
    // sin^4 = 3/8 - cos(2 pi x)/2 + cos(4 pi x)/8
    Profile::Sum {
        terms: vec![
            Profile::constant(3.0 * amplitude / 8.0),
            cosine(-0.5 * amplitude * (1.0 + 2.0 * beta * (2.0 * PI).powi(4)), 2.0),
            cosine(amplitude / 8.0 * (1.0 + 2.0 * beta * (4.0 * PI).powi(4)), 4.0),
        ],
    }
}

/// Largest `|u - u_d| = 2 beta |u''''|` for [`flux_free_target`]; must stay
/// inside the Huber width for the construction to be exact.
pub fn flux_free_residual(amplitude: f64, beta: f64) -> f64 {
    2.0 * beta * amplitude * (0.5 * (2.0 * PI).powi(4) + (4.0 * PI).powi(4) / 8.0)
}
