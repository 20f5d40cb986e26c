use serde::{Deserialize, Serialize};

use super::GoodError;

/// Axis-parallel box `[lower, upper]` in `R^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GoodError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(GoodError::BadBox("corner dimensions differ".into()));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(GoodError::BadBox(format!("{lower:?} is not below {upper:?}")));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^k`.
    pub fn unit(k: usize) -> Self {
        Self {
            lower: vec![0.0; k],
            upper: vec![1.0; k],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    /// Scales axis `i` by `factors[i]`.
    pub fn scaled(&self, factors: &[f64]) -> Self {
        Self {
            lower: self.lower.iter().zip(factors).map(|(a, f)| a * f).collect(),
            upper: self.upper.iter().zip(factors).map(|(a, f)| a * f).collect(),
        }
    }

    pub fn translated(&self, by: &[f64]) -> Self {
        Self {
            lower: self.lower.iter().zip(by).map(|(a, f)| a + f).collect(),
            upper: self.upper.iter().zip(by).map(|(a, f)| a + f).collect(),
        }
    }

    /// Midpoint of cell `idx` of a `grid^k` tensor grid (row-major index).
    pub fn midpoint(&self, grid: usize, mut idx: usize, out: &mut [f64]) {
        for i in (0..self.dim()).rev() {
            let c = idx % grid;
            idx /= grid;
            out[i] = self.lower[i] + (c as f64 + 0.5) * self.width(i) / grid as f64;
        }
    }

    /// Node `idx` of a `grid^k` grid including both ends of every axis.
    pub fn node(&self, grid: usize, mut idx: usize, out: &mut [f64]) {
        for i in (0..self.dim()).rev() {
            let c = idx % grid;
            idx /= grid;
            out[i] = self.lower[i] + c as f64 * self.width(i) / (grid - 1) as f64;
        }
    }
}
