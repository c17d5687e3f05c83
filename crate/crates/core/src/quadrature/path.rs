use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{integrate, IntegralResult, QuadratureSpec};
use crate::{Error, Result, Vec3};

/// Geometry of a path parameterized by `s ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathKind {
    /// Straight segment `from → to`.
    Segment { from: Vec3, to: Vec3 },
    /// Circular arc in the plane `z = center.z`, starting at angle
    /// `start_angle` and sweeping the signed angle `sweep`.
    Arc { center: Vec3, radius: f64, start_angle: f64, sweep: f64 },
}

/// An integration contour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub label: String,
    pub kind: PathKind,
    pub closed: bool,
    /// Traverse `kind` from `s = 1` to `s = 0`.
    #[serde(default)]
    pub reversed: bool,
}

impl PathSpec {
    pub fn segment(from: Vec3, to: Vec3) -> Self {
        Self { label: "segment".into(), kind: PathKind::Segment { from, to }, closed: false, reversed: false }
    }

    /// A full circle traversed `winding` times (negative for clockwise).
    pub fn circle(center: Vec3, radius: f64, winding: i32) -> Self {
        Self {
            label: format!("circle(w={winding})"),
            kind: PathKind::Arc { center, radius, start_angle: 0.0, sweep: 2.0 * PI * winding as f64 },
            closed: true,
            reversed: false,
        }
    }

    pub fn arc(center: Vec3, radius: f64, start_angle: f64, sweep: f64) -> Self {
        Self {
            label: "arc".into(),
            kind: PathKind::Arc { center, radius, start_angle, sweep },
            closed: false,
            reversed: false,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// The same geometry traversed backwards.
    pub fn reversed(&self) -> Self {
        Self { reversed: !self.reversed, label: format!("reverse({})", self.label), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            PathKind::Segment { from, to } => {
                if !from.iter().chain(to.iter()).all(|x| x.is_finite()) {
                    return Err(Error::Config(format!("path '{}': non-finite endpoint", self.label)));
                }
            }
            PathKind::Arc { center, radius, start_angle, sweep } => {
                if !(*radius > 0.0) || !radius.is_finite() || !start_angle.is_finite() || !sweep.is_finite() {
                    return Err(Error::Config(format!("path '{}': arc needs a positive radius and finite angles", self.label)));
                }
                if !center.iter().all(|x| x.is_finite()) {
                    return Err(Error::Config(format!("path '{}': non-finite center", self.label)));
                }
            }
        }
        if self.closed && (self.curve(0.0) - self.curve(1.0)).norm() > 1e-12 * self.scale() {
            return Err(Error::Config(format!("path '{}' is marked closed but its endpoints differ", self.label)));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        match &self.kind {
            PathKind::Segment { from, to } => from.norm().max(to.norm()).max(1.0),
            PathKind::Arc { center, radius, .. } => (center.norm() + radius).max(1.0),
        }
    }

    fn forward_curve(&self, s: f64) -> Vec3 {
        match &self.kind {
            PathKind::Segment { from, to } => from + s * (to - from),
            PathKind::Arc { center, radius, start_angle, sweep } => {
                let (sn, cs) = (start_angle + sweep * s).sin_cos();
                center + *radius * Vec3::new(cs, sn, 0.0)
            }
        }
    }

    fn forward_derivative(&self, s: f64) -> Vec3 {
        match &self.kind {
            PathKind::Segment { from, to } => to - from,
            PathKind::Arc { radius, start_angle, sweep, .. } => {
                let (sn, cs) = (start_angle + sweep * s).sin_cos();
                *radius * *sweep * Vec3::new(-sn, cs, 0.0)
            }
        }
    }

    pub fn curve(&self, s: f64) -> Vec3 {
        if self.reversed {
            self.forward_curve(1.0 - s)
        } else {
            self.forward_curve(s)
        }
    }

    /// `d curve / ds`.
    pub fn derivative(&self, s: f64) -> Vec3 {
        if self.reversed {
            -self.forward_derivative(1.0 - s)
        } else {
            self.forward_derivative(s)
        }
    }

    pub fn start(&self) -> Vec3 {
        self.curve(0.0)
    }

    pub fn end(&self) -> Vec3 {
        self.curve(1.0)
    }

    pub fn length(&self) -> f64 {
        match &self.kind {
            PathKind::Segment { from, to } => (to - from).norm(),
            PathKind::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Number of turns of a closed arc about its own center, signed by the
    /// traversal direction.
    pub fn winding(&self) -> Option<i64> {
        match (&self.kind, self.closed) {
            (PathKind::Arc { sweep, .. }, true) => {
                let w = (sweep / (2.0 * PI)).round() as i64;
                Some(if self.reversed { -w } else { w })
            }
            _ => None,
        }
    }

    /// Continuously tracked azimuth swept about the line through `axis`
    /// parallel to `ẑ`, from `samples + 1` points along the path.
    ///
    /// Returns `None` if the path touches the axis or a step exceeds π in
    /// azimuth (the sampling is too coarse to follow the branch).
    pub fn swept_azimuth(&self, axis: &Vec3, samples: usize) -> Option<f64> {
        let samples = samples.max(2);
        let azimuth = |s: f64| {
            let p = self.curve(s);
            let (dx, dy) = (p.x - axis.x, p.y - axis.y);
            (dx != 0.0 || dy != 0.0).then(|| dy.atan2(dx))
        };
        let mut prev = azimuth(0.0)?;
        let mut total = 0.0;
        for i in 1..=samples {
            let next = azimuth(i as f64 / samples as f64)?;
            let step = (next - prev + PI).rem_euclid(2.0 * PI) - PI;
            if step.abs() > 0.9 * PI {
                return None;
            }
            total += step;
            prev = next;
        }
        Some(total)
    }
}

/// `∫ F(r) · dl` along `path`, i.e. `∫₀¹ F(curve(s)) · curve'(s) ds`.
///
/// A reversed path is integrated on its forward geometry and negated, so the
/// two orientations use the same samples.
pub fn integrate_line<F>(field: F, path: &PathSpec, spec: &QuadratureSpec) -> Result<IntegralResult>
where
    F: Fn(&Vec3) -> Result<Vec3>,
{
    let forward = PathSpec { reversed: false, ..path.clone() };
    let result = integrate(
        |s| {
            let v = field(&forward.curve(s))?.dot(&forward.derivative(s));
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("path '{}' at s = {s}", path.label)));
            }
            Ok(v)
        },
        0.0,
        1.0,
        spec,
    )?;
    Ok(if path.reversed { result.scaled(-1.0) } else { result })
}
