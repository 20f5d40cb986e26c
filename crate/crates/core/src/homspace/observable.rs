use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HomError, UnimodularLattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    IndicatorBall,
    SmoothBump,
}

/// Radial, compactly supported `f` on `R^N`; the observable is its Siegel
/// transform `g -> sum_{v in Z^N \ 0} f(gv)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub kind: Kind,
    pub radius: f64,
}

impl TestFunction {
    pub fn indicator(radius: f64) -> Self {
        Self {
            kind: Kind::IndicatorBall,
            radius,
        }
    }

    pub fn bump(radius: f64) -> Self {
        Self {
            kind: Kind::SmoothBump,
            radius,
        }
    }

    /// `f` at a vector of squared length `r2`.
    pub fn profile(&self, r2: f64) -> f64 {
        let rr = self.radius * self.radius;
        if r2 > rr {
            return 0.0;
        }
        match self.kind {
            Kind::IndicatorBall => 1.0,
            Kind::SmoothBump => {
                let u = 1.0 - r2 / rr;
                u * u
            }
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            Kind::IndicatorBall => "indicator",
            Kind::SmoothBump => "bump",
        };
        write!(f, "siegel:{kind}:{}", self.radius)
    }
}

impl FromStr for TestFunction {
    type Err = HomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HomError::Observable(s.to_string());
        let mut parts = s.split(':');
        if parts.next() != Some("siegel") {
            return Err(bad());
        }
        let kind = match parts.next() {
            Some("indicator") => Kind::IndicatorBall,
            Some("bump") => Kind::SmoothBump,
            _ => return Err(bad()),
        };
        let radius: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() || !(radius > 0.0) || !radius.is_finite() {
            return Err(bad());
        }
        Ok(Self { kind, radius })
    }
}

/// `sum_{v != 0} f(gv)`.
pub fn siegel_transform(lattice: &UnimodularLattice, f: &TestFunction) -> Result<f64, HomError> {
    let mut acc = 0.0;
    lattice.enumerate(f.radius, |r2| acc += f.profile(r2))?;
    Ok(acc)
}

fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unimplemented!("dimensions 1 to 3"),
    }
}

/// Composite Simpson with doubling until two successive estimates agree.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 16;
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut prev = simpson(n);
    loop {
        n *= 2;
        let next = simpson(n);
        if (next - prev).abs() <= tol * next.abs().max(1e-300) || n > 1 << 22 {
            return next;
        }
        prev = next;
    }
}

/// `int_{R^N} f`, the Haar average of the Siegel transform.
pub fn haar_expectation(f: &TestFunction, n: usize) -> f64 {
    let r = f.radius;
    match f.kind {
        Kind::IndicatorBall => sphere_area(n) * r.powi(n as i32) / n as f64,
        Kind::SmoothBump => {
            let area = sphere_area(n);
            integrate(
                |u| area * f.profile(u * u) * u.powi(n as i32 - 1),
                0.0,
                r,
                1e-12,
            )
        }
    }
}
