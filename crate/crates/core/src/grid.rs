//! Uniform 1-D discretization of the extended domain `(a - delta, b + delta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The physical interval `(a, b)` together with the horizon and node spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub dx: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64, delta: f64, dx: f64) -> Result<Self> {
        let d = Domain { a, b, delta, dx };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) || self.b <= self.a {
            return Err(Error::Domain(format!("need finite a < b, got a = {}, b = {}", self.a, self.b)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(Error::Domain(format!("dx must be positive, got {}", self.dx)));
        }
        if self.dx > self.delta / 4.0 * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "grid rule dx <= delta/4 violated: dx = {}, delta/4 = {}",
                self.dx,
                self.delta / 4.0
            )));
        }
        Ok(())
    }

    /// Left end of the extended domain.
    pub fn left(&self) -> f64 {
        self.a - self.delta
    }

    /// Right end of the extended domain.
    pub fn right(&self) -> f64 {
        self.b + self.delta
    }

    /// Measure of the extended domain.
    pub fn extended_measure(&self) -> f64 {
        (self.b - self.a) + 2.0 * self.delta
    }
}

/// Node set over the extended domain with interior/collar classification.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    nodes: Vec<f64>,
    interior_mask: Vec<bool>,
    collar_mask: Vec<bool>,
    quad_weights: Vec<f64>,
}

/// Build the uniform grid for `domain`.
///
/// The extended length must be an integer multiple of `dx` (relative
/// tolerance `1e-9`) so that the end nodes sit exactly on `a - delta` and
/// `b + delta`. Nodes on the boundary of `(a, b)` are classified as collar.
pub fn build_grid(domain: Domain) -> Result<Grid> {
    domain.validate()?;
    let length = domain.extended_measure();
    let cells = (length / domain.dx).round();
    if (cells * domain.dx - length).abs() > 1e-9 * length {
        return Err(Error::Domain(format!("extended length {} is not a multiple of dx = {}", length, domain.dx)));
    }
    let cells = cells as usize;
    let n = cells + 1;
    let snap = 1e-9 * domain.dx;
    let left = domain.left();
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = if i == cells { domain.right() } else { left + i as f64 * domain.dx };
        if (x - domain.a).abs() <= snap {
            x = domain.a;
        } else if (x - domain.b).abs() <= snap {
            x = domain.b;
        }
        nodes.push(x);
    }
    let interior_mask: Vec<bool> = nodes.iter().map(|&x| x > domain.a && x < domain.b).collect();
    let collar_mask = interior_mask.iter().map(|&m| !m).collect();
    let mut quad_weights = vec![domain.dx; n];
    quad_weights[0] = 0.5 * domain.dx;
    quad_weights[n - 1] = 0.5 * domain.dx;
    Ok(Grid { domain, nodes, interior_mask, collar_mask, quad_weights })
}

impl Grid {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior_mask
    }

    pub fn collar_mask(&self) -> &[bool] {
        &self.collar_mask
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn dx(&self) -> f64 {
        self.domain.dx
    }

    pub fn delta(&self) -> f64 {
        self.domain.delta
    }

    /// Half-open index range of the interior nodes; they are contiguous.
    pub fn interior_range(&self) -> std::ops::Range<usize> {
        let start = self.interior_mask.iter().position(|&m| m).unwrap_or(0);
        let count = self.interior_mask.iter().filter(|&&m| m).count();
        start..start + count
    }

    pub fn interior_count(&self) -> usize {
        self.interior_range().len()
    }

    pub fn collar_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.collar_mask[i]).collect()
    }

    /// Indices of nodes in the closed interval `[a, b]`.
    pub fn closed_domain_range(&self) -> std::ops::Range<usize> {
        let (a, b) = (self.domain.a, self.domain.b);
        let start = self.nodes.iter().position(|&x| x >= a).unwrap_or(0);
        let end = self.nodes.iter().rposition(|&x| x <= b).map_or(start, |e| e + 1);
        start..end
    }

    /// Integrate nodal values over the extended domain.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.quad_weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Evaluate `f` at every node.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Values of `field` at the interior nodes, in node order.
pub fn restrict_to_interior(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(Error::Length { expected: grid.len(), got: field.len() });
    }
    let range = grid.interior_range();
    if range.is_empty() {
        return Err(Error::Domain("grid has no interior nodes".into()));
    }
    Ok(field[range].to_vec())
}
