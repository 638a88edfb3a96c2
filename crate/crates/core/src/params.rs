//! Problem parameters: dimension, derivative order and supercritical weight.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
}

impl ProblemParams {
    pub fn new(n: usize, m: usize, alpha: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("n >= 3 required (got n = {n})")));
        }
        if m < 1 {
            return Err(Error::Config("m >= 1 required".into()));
        }
        if n <= 2 * m {
            return Err(Error::Config(format!(
                "n > 2m required (got n = {n}, m = {m})"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("alpha > 0 required (got {alpha})")));
        }
        Ok(Self { n, m, alpha })
    }

    /// Critical Sobolev exponent 2n/(n-2m).
    pub fn two_m_star(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0 * self.m as f64)
    }

    /// Decay exponent (n-2m)/2 of the bubble.
    pub fn half_gap(&self) -> f64 {
        (self.n as f64 - 2.0 * self.m as f64) / 2.0
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.n, self.m, alpha)
    }

    pub fn omega(&self) -> f64 {
        sphere_area(self.n)
    }
}

/// Surface measure of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2).
pub fn sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}
