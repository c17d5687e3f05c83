use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Solenoid;
use crate::{Result, Vec3};

/// The shipped family of time-independent gauge functions `χ(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChiKind {
    /// `χ = c` everywhere.
    Constant { value: f64 },
    /// `χ = g · r`.
    Linear { gradient: Vec3 },
    /// `χ = c (n̂ · r)²`.
    Quadratic { coefficient: f64, direction: Vec3 },
    /// `χ = c · atan2(y − y0, x − x0)`: multivalued around the line through `center` along `ẑ`.
    Azimuthal { coefficient: f64, center: Vec3 },
    /// `χ = A exp(−|r − r0|² / w²)`.
    Bump { amplitude: f64, center: Vec3, width: f64 },
}

/// A gauge function with an analytic gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiFunction {
    pub label: String,
    #[serde(flatten)]
    pub kind: ChiKind,
}

impl ChiFunction {
    pub fn new(label: impl Into<String>, kind: ChiKind) -> Self {
        Self { label: label.into(), kind }
    }

    pub fn zero() -> Self {
        Self::new("zero", ChiKind::Constant { value: 0.0 })
    }

    pub fn linear(gradient: Vec3) -> Self {
        Self::new("linear", ChiKind::Linear { gradient })
    }

    pub fn quadratic(coefficient: f64, direction: Vec3) -> Self {
        Self::new("quadratic", ChiKind::Quadratic { coefficient, direction })
    }

    pub fn azimuthal(coefficient: f64, center: Vec3) -> Self {
        Self::new("azimuthal", ChiKind::Azimuthal { coefficient, center })
    }

    pub fn bump(amplitude: f64, center: Vec3, width: f64) -> Self {
        Self::new("bump", ChiKind::Bump { amplitude, center, width })
    }

    /// The library used by the gauge scans: linear, quadratic, azimuthal and a
    /// localized bump, scaled to a problem of characteristic length `scale`.
    pub fn library(scale: f64) -> Vec<Self> {
        vec![
            Self::linear(Vec3::new(0.7, -0.3, 0.2)),
            Self::quadratic(0.5 / scale, Vec3::new(1.0, 0.0, 0.0)),
            Self::azimuthal(0.25, Vec3::zeros()),
            Self::bump(0.4 * scale, Vec3::new(2.0 * scale, scale, 0.0), 1.5 * scale),
        ]
    }

    /// True for gauge functions that are not single-valued on loops around
    /// their singular line.
    pub fn is_multivalued(&self) -> bool {
        matches!(self.kind, ChiKind::Azimuthal { .. })
    }

    /// Principal-branch value. The azimuthal kind jumps by `2πc` across the
    /// negative-x half plane.
    pub fn value(&self, r: &Vec3) -> f64 {
        match &self.kind {
            ChiKind::Constant { value } => *value,
            ChiKind::Linear { gradient } => gradient.dot(r),
            ChiKind::Quadratic { coefficient, direction } => {
                let s = direction.normalize().dot(r);
                coefficient * s * s
            }
            ChiKind::Azimuthal { coefficient, center } => coefficient * (r.y - center.y).atan2(r.x - center.x),
            ChiKind::Bump { amplitude, center, width } => {
                amplitude * (-(r - center).norm_squared() / (width * width)).exp()
            }
        }
    }

    /// Analytic gradient. Non-finite on the azimuthal singular line.
    pub fn gradient(&self, r: &Vec3) -> Vec3 {
        match &self.kind {
            ChiKind::Constant { .. } => Vec3::zeros(),
            ChiKind::Linear { gradient } => *gradient,
            ChiKind::Quadratic { coefficient, direction } => {
                let n = direction.normalize();
                2.0 * coefficient * n.dot(r) * n
            }
            ChiKind::Azimuthal { coefficient, center } => {
                let dx = r.x - center.x;
                let dy = r.y - center.y;
                coefficient / (dx * dx + dy * dy) * Vec3::new(-dy, dx, 0.0)
            }
            ChiKind::Bump { amplitude, center, width } => {
                let w2 = width * width;
                let d = r - center;
                -2.0 * amplitude * (-d.norm_squared() / w2).exp() / w2 * d
            }
        }
    }
}

/// Pure position-to-vector sampler.
pub type Sampler = Arc<dyn Fn(&Vec3) -> Result<Vec3> + Send + Sync>;

/// A vector-potential field together with the record of gauge
/// transformations applied to it.
#[derive(Clone)]
pub struct GaugeField {
    sampler: Sampler,
    pub gauge_tag: String,
    pub chi_applied: Vec<ChiFunction>,
}

impl fmt::Debug for GaugeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeField")
            .field("gauge_tag", &self.gauge_tag)
            .field("chi_applied", &self.chi_applied)
            .finish_non_exhaustive()
    }
}

impl GaugeField {
    pub fn new<F>(gauge_tag: impl Into<String>, sampler: F) -> Self
    where
        F: Fn(&Vec3) -> Result<Vec3> + Send + Sync + 'static,
    {
        Self { sampler: Arc::new(sampler), gauge_tag: gauge_tag.into(), chi_applied: Vec::new() }
    }

    /// The solenoid's Coulomb-gauge potential.
    pub fn coulomb_solenoid(sol: &Solenoid) -> Self {
        let sol = sol.clone();
        Self::new("coulomb", move |r| sol.vector_potential(r))
    }

    pub fn sample(&self, r: &Vec3) -> Result<Vec3> {
        (self.sampler)(r)
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// `A' = A + ∇χ`.
    pub fn apply_gauge(&self, chi: &ChiFunction) -> Self {
        let base = Arc::clone(&self.sampler);
        let shift = chi.clone();
        let mut chi_applied = self.chi_applied.clone();
        chi_applied.push(chi.clone());
        Self {
            sampler: Arc::new(move |r| Ok(base(r)? + shift.gradient(r))),
            gauge_tag: format!("{}+grad({})", self.gauge_tag, chi.label),
            chi_applied,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::diffops;

    fn probes() -> Vec<Vec3> {
        vec![Vec3::new(0.5, 0.1, 0.0), Vec3::new(-0.3, 0.6, 0.4), Vec3::new(0.15, -0.08, -0.3), Vec3::new(2.0, -1.5, 0.3)]
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for chi in ChiFunction::library(0.1).into_iter().chain([ChiFunction::zero()]) {
            for r in probes() {
                let h = diffops::step(&r, 0.1);
                let fd = diffops::gradient(|p| chi.value(p), &r, h);
                let exact = chi.gradient(&r);
                let scale = exact.norm().max(1e-300);
                assert!((fd - exact).norm() <= 1e-6 * scale + 1e-12, "{} at {r:?}: {fd:?} vs {exact:?}", chi.label);
            }
        }
    }

    #[test]
    fn zero_gauge_is_identity() {
        let sol = Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap();
        let base = GaugeField::coulomb_solenoid(&sol);
        let same = base.apply_gauge(&ChiFunction::zero());
        for r in probes() {
            assert_eq!(base.sample(&r).unwrap(), same.sample(&r).unwrap());
        }
        assert_eq!(same.gauge_tag, "coulomb+grad(zero)");
        assert_eq!(same.chi_applied.len(), 1);
    }

    #[test]
    fn linear_gauge_shifts_one_component() {
        let sol = Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap();
        let base = GaugeField::coulomb_solenoid(&sol);
        let shifted = base.apply_gauge(&ChiFunction::linear(Vec3::new(0.3, 0.0, 0.0)));
        for r in probes() {
            let d = shifted.sample(&r).unwrap() - base.sample(&r).unwrap();
            assert!((d.x - 0.3).abs() < 1e-15 && d.y == 0.0 && d.z == 0.0);
        }
    }

    #[test]
    fn gauge_leaves_curl_unchanged() {
        let sol = Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap();
        let base = GaugeField::coulomb_solenoid(&sol);
        for chi in ChiFunction::library(0.1) {
            let field = base.apply_gauge(&chi);
            for r in probes() {
                let h = diffops::step(&r, 0.1);
                let c0 = diffops::curl(|p| base.sample(p).unwrap(), &r, h);
                let c1 = diffops::curl(|p| field.sample(p).unwrap(), &r, h);
                let scale = base.sample(&r).unwrap().norm() / sol.axis_distance(&r).max(sol.radius);
                assert!((c1 - c0).norm() <= 1e-6 * scale.max(sol.b0), "{}: {c0:?} {c1:?}", chi.label);
            }
        }
    }
}
