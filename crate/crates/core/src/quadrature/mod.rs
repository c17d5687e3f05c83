//! Deterministic adaptive quadrature: a global-adaptive Gauss–Kronrod
//! (10/21-point) rule in one dimension, line integrals along parametric
//! paths, and nested volume integrals over cylinders.

pub(crate) mod gk;
mod path;
mod volume;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gk::{integrate, integrate_with_side};
pub use path::{integrate_line, PathKind, PathSpec};
pub use volume::{integrate_volume, CylinderRegion};

/// Tolerances for an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self { rel_tol, abs_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || !self.rel_tol.is_finite() || !self.abs_tol.is_finite() {
            return Err(Error::Config(format!(
                "quadrature tolerances must be positive and finite (rel_tol = {}, abs_tol = {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("quadrature max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    /// Both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { rel_tol: self.rel_tol * factor, abs_tol: self.abs_tol * factor, ..*self }
    }

    /// The tolerance a result of magnitude `value` must meet.
    pub fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 2000 }
    }
}

/// Value, error estimate and bookkeeping of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl IntegralResult {
    /// Scale value and error by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { value: self.value * factor, error_estimate: self.error_estimate * factor.abs(), ..*self }
    }
}
