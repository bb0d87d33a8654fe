//! Closed-form profiles of `x` used to specify coefficients, sources, targets
//! and volume constraints independently of any grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `sum_k coeffs[k] x^k`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `offset + amplitude sin(frequency pi x + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Piecewise-linear interpolation of samples `(x, y)`, constant beyond the ends.
    Table {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    /// Pointwise sum of profiles.
    Sum {
        terms: Vec<Profile>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        Profile::Polynomial { coeffs: coeffs.to_vec() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Profile::Sine { amplitude, frequency, phase, offset } => {
                offset + amplitude * (frequency * PI * x + phase).sin()
            }
            Profile::Table { x: xs, y: ys } => interpolate_table(xs, ys, x),
            Profile::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    /// Structural problems (a table with mismatched or unsorted samples), if any.
    pub fn check(&self) -> Result<(), String> {
        match self {
            Profile::Table { x, y } => {
                if x.is_empty() || x.len() != y.len() {
                    return Err(format!("table needs equally many x and y samples, got {} and {}", x.len(), y.len()));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("table x samples must be strictly increasing".into());
                }
            }
            Profile::Sum { terms } => terms.iter().try_for_each(Profile::check)?,
            _ => {}
        }
        if self.is_finite() {
            Ok(())
        } else {
            Err("profile parameters must be finite".into())
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Profile::Constant { value } => value.is_finite(),
            Profile::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            Profile::Sine { amplitude, frequency, phase, offset } => {
                [amplitude, frequency, phase, offset].iter().all(|v| v.is_finite())
            }
            Profile::Table { x, y } => x.iter().chain(y).all(|v| v.is_finite()),
            Profile::Sum { terms } => terms.iter().all(Profile::is_finite),
        }
    }

    /// Bounds of the profile on `[lo, hi]`, sampled finely (exact for constants).
    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        if let Profile::Constant { value } = self {
            return (*value, *value);
        }
        let n = 4096;
        (0..=n)
            .map(|k| self.eval(lo + (hi - lo) * k as f64 / n as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }
}

fn interpolate_table(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let k = xs.partition_point(|&t| t <= x) - 1;
    let f = (x - xs[k]) / (xs[k + 1] - xs[k]);
    (1.0 - f) * ys[k] + f * ys[k + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_closed_forms() {
        assert_eq!(Profile::constant(2.5).eval(0.3), 2.5);
        assert_eq!(Profile::polynomial(&[1.0, 0.0, 3.0]).eval(2.0), 13.0);
        let s = Profile::Sine { amplitude: 2.0, frequency: 1.0, phase: 0.0, offset: 1.0 };
        assert!((s.eval(0.5) - 3.0).abs() < 1e-15);
        assert_eq!(Profile::polynomial(&[]).eval(1.0), 0.0);
        let sum = Profile::Sum { terms: vec![Profile::constant(1.0), Profile::polynomial(&[0.0, 2.0])] };
        assert_eq!(sum.eval(3.0), 7.0);
    }

    #[test]
    fn parses_tagged_toml() {
        let p: Profile = toml::from_str("kind = \"sine\"\namplitude = 1.0\nfrequency = 2.0").unwrap();
        assert_eq!(p, Profile::Sine { amplitude: 1.0, frequency: 2.0, phase: 0.0, offset: 0.0 });
        assert!(toml::from_str::<Profile>("kind = \"constant\"\nvalue = 1.0\nextra = 2").is_err());
    }

    #[test]
    fn table_interpolates_and_validates() {
        let t = Profile::Table { x: vec![0.0, 1.0, 3.0], y: vec![1.0, 3.0, -1.0] };
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(5.0), -1.0);
        assert!(t.check().is_ok());
        assert!(Profile::Table { x: vec![0.0, 0.0], y: vec![1.0, 2.0] }.check().is_err());
        assert!(Profile::Table { x: vec![0.0], y: vec![] }.check().is_err());
    }

    #[test]
    fn range_brackets_samples() {
        let (lo, hi) = Profile::polynomial(&[1.0, 0.5]).range_on(0.0, 1.0);
        assert_eq!((lo, hi), (1.0, 1.5));
    }
}
