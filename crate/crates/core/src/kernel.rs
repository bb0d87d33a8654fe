//! Radial horizon kernels with compact support in `B(0, delta)`.
//!
//! Every kernel is normalized so that `(1/C_N) * integral over B(0, delta)
//! of k(|z|) dz = 1`, with the amplitude fixed in closed form.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `amplitude / |z|^(N + (s-1) p)` on `0 < |z| < delta`.
    FractionalTruncated,
    /// `amplitude` on `|z| < delta`.
    Constant,
}

/// The normalization constant `C_N`: the average of `|w . e|^p` over the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstant {
    pub value: f64,
}

/// Surface measure of the unit sphere in `R^dim`.
pub fn sphere_measure(dim: u32) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma(n / 2.0)
}

pub fn compute_c_n(dim: u32, p: f64) -> Result<NormConstant> {
    if dim < 1 {
        return Err(Error::Kernel(format!("dimension must be >= 1, got {dim}")));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Kernel(format!("p must exceed 1, got {p}")));
    }
    if dim == 1 {
        // S^0 = {-1, 1} and |+-1|^p = 1
        return Ok(NormConstant { value: 1.0 });
    }
    let n = dim as f64;
    let log = ln_gamma(n / 2.0) + ln_gamma((p + 1.0) / 2.0) - 0.5 * std::f64::consts::PI.ln() - ln_gamma((n + p) / 2.0);
    Ok(NormConstant { value: log.exp() })
}

/// Whether the lower bound `k(|z|) >= c0 / |z|^(N + (s-1) p)` holds on the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub holds: bool,
    /// Largest admissible `c0`, when the bound holds for some positive constant.
    pub c0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub delta: f64,
    pub p: f64,
    pub s: f64,
    pub dim: u32,
    pub amplitude: f64,
    pub c_n: f64,
    pub lower_bound: LowerBound,
}

pub fn build_kernel(
    family: KernelFamily,
    delta: f64,
    p: f64,
    s: f64,
    c0_floor: Option<f64>,
    dim: u32,
) -> Result<Kernel> {
    let c_n = compute_c_n(dim, p)?.value;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Kernel(format!("delta must be positive, got {delta}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Kernel(format!("s must lie in (0, 1), got {s}")));
    }
    let n = dim as f64;
    if n <= p * s {
        return Err(Error::Kernel(format!("hypothesis N > p s violated: N = {dim}, p s = {}", p * s)));
    }
    let alpha = n + (s - 1.0) * p;
    let (amplitude, c0) = match family {
        KernelFamily::Constant => {
            let ball = sphere_measure(dim) * delta.powf(n) / n;
            let amplitude = c_n / ball;
            // amplitude >= c0 |z|^(-alpha) on (0, delta) needs alpha <= 0
            let c0 = (alpha <= 0.0).then(|| amplitude * delta.powf(alpha));
            (amplitude, c0)
        }
        KernelFamily::FractionalTruncated => {
            // integral of r^(N-1-alpha) over (0, delta) = delta^(N-alpha) / (N-alpha)
            let m = n - alpha;
            let amplitude = c_n * m / (sphere_measure(dim) * delta.powf(m));
            (amplitude, Some(amplitude))
        }
    };
    let holds = match (c0, c0_floor) {
        (Some(c), Some(floor)) => c >= floor,
        (Some(_), None) => true,
        (None, _) => false,
    };
    Ok(Kernel { family, delta, p, s, dim, amplitude, c_n, lower_bound: LowerBound { holds, c0 } })
}

impl Kernel {
    /// Exponent `N + (s-1) p` of the fractional lower bound.
    pub fn exponent(&self) -> f64 {
        self.dim as f64 + (self.s - 1.0) * self.p
    }

    /// Kernel value at radius `r`, without the sign check of [`eval_kernel`].
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        if r >= self.delta {
            return 0.0;
        }
        match self.family {
            KernelFamily::Constant => self.amplitude,
            KernelFamily::FractionalTruncated => {
                let alpha = self.exponent();
                if r == 0.0 {
                    return match alpha.partial_cmp(&0.0) {
                        Some(std::cmp::Ordering::Greater) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => self.amplitude,
                        _ => 0.0,
                    };
                }
                self.amplitude * r.powf(-alpha)
            }
        }
    }
}

pub fn eval_kernel(kernel: &Kernel, r: f64) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::Kernel(format!("radius must be nonnegative, got {r}")));
    }
    Ok(kernel.value(r))
}
