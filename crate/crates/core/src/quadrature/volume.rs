use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{integrate_with_side, IntegralResult, QuadratureSpec};
use crate::{Error, Result, Vec3};

/// A solid cylinder with axis parallel to `ẑ` through `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderRegion {
    pub axis: Vec3,
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl CylinderRegion {
    pub fn new(axis: Vec3, radius: f64, z_min: f64, z_max: f64) -> Result<Self> {
        if !(radius > 0.0) || !(z_max > z_min) || !radius.is_finite() || !z_min.is_finite() || !z_max.is_finite() {
            return Err(Error::Geometry(format!(
                "cylinder needs radius > 0 and z_max > z_min (radius {radius}, z in [{z_min}, {z_max}])"
            )));
        }
        Ok(Self { axis, radius, z_min, z_max })
    }

    pub fn volume(&self) -> f64 {
        PI * self.radius * self.radius * (self.z_max - self.z_min)
    }
}

/// Triple integral of `f` over `region` in cylindrical coordinates, nested
/// as `z` (outer), `r`, `θ` (inner), each level adaptive.
///
/// Inner error estimates are carried outward and integrated alongside the
/// values, so `error_estimate` bounds all three levels.
pub fn integrate_volume<F>(f: F, region: &CylinderRegion, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&Vec3) -> Result<f64>,
{
    let CylinderRegion { axis, radius, z_min, z_max } = *region;
    let length = z_max - z_min;
    let inner_rel = 0.1 * spec.rel_tol;
    let theta_spec = QuadratureSpec { rel_tol: inner_rel, abs_tol: 0.1 * spec.abs_tol / (0.5 * radius * radius * length), ..*spec };
    let r_spec = QuadratureSpec { rel_tol: inner_rel, abs_tol: 0.1 * spec.abs_tol / length, ..*spec };
    let evaluations = Cell::new(0usize);
    let all_converged = Cell::new(true);

    let theta_integral = |r: f64, z: f64| -> Result<IntegralResult> {
        let res = integrate_with_side(
            |theta| {
                let (s, c) = theta.sin_cos();
                let p = Vec3::new(axis.x + r * c, axis.y + r * s, z);
                let v = f(&p)?;
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("(z, r, θ) = ({z}, {r}, {theta})")));
                }
                Ok((v, 0.0))
            },
            0.0,
            2.0 * PI,
            &theta_spec,
        )?
        .0;
        evaluations.set(evaluations.get() + res.evaluations);
        if !res.converged {
            all_converged.set(false);
        }
        Ok(res)
    };

    let radial = |z: f64| -> Result<(f64, f64)> {
        let (res, inner_err) = integrate_with_side(
            |r| {
                let t = theta_integral(r, z)?;
                Ok((r * t.value, r * t.error_estimate))
            },
            0.0,
            radius,
            &r_spec,
        )?;
        if !res.converged {
            all_converged.set(false);
        }
        Ok((res.value, res.error_estimate + inner_err.abs()))
    };

    let (outer, inner_err) = integrate_with_side(radial, z_min, z_max, spec)?;
    let error_estimate = outer.error_estimate + inner_err.abs();
    Ok(IntegralResult {
        value: outer.value,
        error_estimate,
        evaluations: evaluations.get(),
        converged: outer.converged && all_converged.get() && error_estimate <= spec.target(outer.value),
    })
}
