use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::CurrentElement;
use crate::{Constants, Error, Result, Vec3};

/// Discretization of the solenoid winding into stacked circular rings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteModel {
    /// Axial length of the finite winding, centered on the solenoid center.
    pub length: f64,
    pub n_rings: usize,
    pub n_segments: usize,
}

impl FiniteModel {
    /// Default discretization for a solenoid of radius `a`: length `2000a`,
    /// rings spaced by `a/2`, 64 segments per ring.
    pub fn default_for_radius(a: f64) -> Self {
        Self { length: 2000.0 * a, n_rings: 4000, n_segments: 64 }
    }
}

/// An idealized infinite solenoid along `ẑ` through `center`, with uniform
/// axial field `b0` inside radius `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solenoid {
    pub radius: f64,
    pub b0: f64,
    pub center: Vec3,
    pub finite: FiniteModel,
}

impl Solenoid {
    pub fn new(radius: f64, b0: f64, center: Vec3) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("solenoid radius must be positive, got {radius}")));
        }
        if !b0.is_finite() || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Config("solenoid field and center must be finite".into()));
        }
        Ok(Self { radius, b0, center, finite: FiniteModel::default_for_radius(radius) })
    }

    pub fn with_finite_model(mut self, finite: FiniteModel) -> Self {
        self.finite = finite;
        self
    }

    /// `Φ = B0 π a²`.
    pub fn flux(&self) -> f64 {
        self.b0 * PI * self.radius * self.radius
    }

    /// Offset of `r` from the axis, projected onto the transverse plane.
    pub fn transverse_offset(&self, r: &Vec3) -> Vec3 {
        Vec3::new(r.x - self.center.x, r.y - self.center.y, 0.0)
    }

    pub fn axis_distance(&self, r: &Vec3) -> f64 {
        self.transverse_offset(r).norm()
    }

    pub fn is_inside(&self, r: &Vec3) -> bool {
        self.axis_distance(r) <= self.radius
    }

    /// Coulomb-gauge vector potential. Inside: `(B0/2)(−y, x, 0)`; outside:
    /// `Φ/(2πρ²)(−y, x, 0)`, coordinates relative to the axis.
    pub fn vector_potential(&self, r: &Vec3) -> Result<Vec3> {
        if self.is_inside(r) {
            Ok(self.interior_vector_potential(r))
        } else {
            self.exterior_vector_potential(r)
        }
    }

    pub fn interior_vector_potential(&self, r: &Vec3) -> Vec3 {
        let d = self.transverse_offset(r);
        0.5 * self.b0 * Vec3::new(-d.y, d.x, 0.0)
    }

    /// The exterior branch evaluated at any point off the axis.
    pub fn exterior_vector_potential(&self, r: &Vec3) -> Result<Vec3> {
        let d = self.transverse_offset(r);
        let rho2 = d.norm_squared();
        if rho2 == 0.0 {
            return Err(Error::OnAxis(r.x, r.y, r.z));
        }
        Ok(self.flux() / (2.0 * PI * rho2) * Vec3::new(-d.y, d.x, 0.0))
    }

    /// `B0 ẑ` for `ρ ≤ a` (the boundary counts as inside), zero outside.
    pub fn b_field(&self, r: &Vec3) -> Vec3 {
        if self.is_inside(r) {
            Vec3::new(0.0, 0.0, self.b0)
        } else {
            Vec3::zeros()
        }
    }

    /// Surface current density `n I = B0 / μ0`.
    pub fn surface_current_density(&self, consts: &Constants) -> f64 {
        self.b0 / consts.mu0
    }

    /// Current carried by each ring of the finite model.
    pub fn ring_current(&self, consts: &Constants) -> f64 {
        self.surface_current_density(consts) * self.finite.length / self.finite.n_rings as f64
    }

    pub fn total_current(&self, consts: &Constants) -> f64 {
        self.ring_current(consts) * self.finite.n_rings as f64
    }

    /// Current elements of the finite model: `n_rings` rings equally spaced
    /// over `length`, each split into `n_segments` elements placed on the
    /// circle with tangent `I dl` of arc length `2πa/n_segments`.
    ///
    /// With arc-length weights each ring carries the exact dipole moment
    /// `I π a²`, so the model's moment per unit length is `Φ / μ0`.
    pub fn current_elements(&self, consts: &Constants) -> Result<Vec<CurrentElement>> {
        let FiniteModel { length, n_rings, n_segments } = self.finite;
        if n_rings == 0 || n_segments == 0 {
            return Err(Error::Config(format!(
                "finite solenoid model needs at least one ring and one segment (got {n_rings} rings, {n_segments} segments)"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(format!("finite solenoid length must be positive, got {length}")));
        }
        let current = self.ring_current(consts);
        let arc = 2.0 * PI * self.radius / n_segments as f64;
        let mut out = Vec::with_capacity(n_rings * n_segments);
        for ring in 0..n_rings {
            let z = self.center.z - 0.5 * length + (ring as f64 + 0.5) * length / n_rings as f64;
            for seg in 0..n_segments {
                let theta = 2.0 * PI * seg as f64 / n_segments as f64;
                let (s, c) = theta.sin_cos();
                out.push(CurrentElement {
                    position: Vec3::new(self.center.x + self.radius * c, self.center.y + self.radius * s, z),
                    idl: current * arc * Vec3::new(-s, c, 0.0),
                });
            }
        }
        Ok(out)
    }

    /// Total magnetic dipole moment `½ Σ x × I dl` of the finite model.
    pub fn finite_dipole_moment(&self, consts: &Constants) -> Result<Vec3> {
        Ok(self
            .current_elements(consts)?
            .iter()
            .map(|e| 0.5 * (e.position - self.center).cross(&e.idl))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{biot_savart_vector_potential, diffops};

    fn standard() -> Solenoid {
        Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap()
    }

    #[test]
    fn exterior_example_value() {
        let a = standard().vector_potential(&Vec3::new(0.5, 0.0, 0.0)).unwrap();
        assert!((a - Vec3::new(0.0, 0.01, 0.0)).norm() < 1e-15, "{a:?}");
    }

    #[test]
    fn exterior_on_x_axis_is_azimuthal() {
        let sol = standard();
        for x in [0.2, 0.7, 3.0] {
            let a = sol.vector_potential(&Vec3::new(x, 0.0, 1.3)).unwrap();
            assert_eq!(a.x, 0.0);
            assert_eq!(a.z, 0.0);
            assert!(a.y > 0.0);
        }
    }

    #[test]
    fn branches_agree_on_boundary() {
        let sol = standard();
        for phi in [0.0, 0.4, 2.0, -1.1] {
            let r = Vec3::new(0.1 * f64::cos(phi), 0.1 * f64::sin(phi), 0.0);
            let inside = sol.interior_vector_potential(&r);
            let outside = sol.exterior_vector_potential(&r).unwrap();
            assert!((inside - outside).norm() < 1e-12);
        }
    }

    #[test]
    fn exterior_branch_rejects_axis() {
        let err = standard().exterior_vector_potential(&Vec3::new(0.0, 0.0, 2.0)).unwrap_err();
        assert!(matches!(err, Error::OnAxis(..)));
        assert!(err.to_string().contains("(0, 0, 2)"));
    }

    #[test]
    fn field_inside_and_outside() {
        let sol = standard();
        assert_eq!(sol.b_field(&Vec3::new(0.0, 0.0, 5.0)), Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(sol.b_field(&Vec3::new(0.2, 0.0, 0.0)), Vec3::zeros());
        assert_eq!(sol.b_field(&Vec3::new(0.1, 0.0, 0.0)), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn interior_curl_is_b0() {
        let sol = standard();
        let r = Vec3::new(0.05, 0.0, 0.0);
        let h = diffops::step(&r, sol.radius);
        let curl = diffops::curl(|p| sol.vector_potential(p).unwrap(), &r, h);
        assert!((curl - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-6, "{curl:?}");
    }

    #[test]
    fn flux_is_closed_form() {
        let sol = Solenoid::new(0.3, 2.5, Vec3::zeros()).unwrap();
        assert_eq!(sol.flux(), 2.5 * PI * 0.3 * 0.3);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(Solenoid::new(0.0, 1.0, Vec3::zeros()).is_err());
        assert!(Solenoid::new(-1.0, 1.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn four_segment_ring_geometry() {
        let consts = Constants::natural();
        let sol = standard().with_finite_model(FiniteModel { length: 1.0, n_rings: 1, n_segments: 4 });
        let els = sol.current_elements(&consts).unwrap();
        assert_eq!(els.len(), 4);
        for (i, e) in els.iter().enumerate() {
            let angle = e.position.y.atan2(e.position.x);
            let expected = i as f64 * PI / 2.0;
            assert!((angle.rem_euclid(2.0 * PI) - expected).abs() < 1e-12);
            assert!((e.position.xy().norm() - 0.1).abs() < 1e-15);
            // tangent: perpendicular to the radius, counter-clockwise
            assert!(e.idl.dot(&e.position).abs() < 1e-15);
            assert!(e.position.cross(&e.idl).z > 0.0);
        }
    }

    #[test]
    fn rings_close() {
        let consts = Constants::natural();
        let sol = standard().with_finite_model(FiniteModel { length: 2.0, n_rings: 7, n_segments: 33 });
        let els = sol.current_elements(&consts).unwrap();
        let scale: f64 = els.iter().map(|e| e.idl.norm()).sum();
        let net: Vec3 = els.iter().map(|e| e.idl).sum();
        assert!(net.norm() <= 1e-12 * scale);
        for ring in els.chunks(33) {
            let s: Vec3 = ring.iter().map(|e| e.idl).sum();
            assert!(s.norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn zero_counts_are_rejected() {
        let consts = Constants::natural();
        for (n_rings, n_segments) in [(0, 4), (3, 0)] {
            let sol = standard().with_finite_model(FiniteModel { length: 1.0, n_rings, n_segments });
            assert!(matches!(sol.current_elements(&consts), Err(Error::Config(_))));
        }
    }

    #[test]
    fn dipole_moment_matches_surface_current() {
        for consts in [Constants::natural(), Constants::si()] {
            let sol = Solenoid::new(0.1, 0.7, Vec3::new(0.3, -0.2, 1.0))
                .unwrap()
                .with_finite_model(FiniteModel { length: 4.0, n_rings: 40, n_segments: 16 });
            let m = sol.finite_dipole_moment(&consts).unwrap();
            let per_length = m.z / sol.finite.length;
            let expected = sol.flux() / consts.mu0;
            assert!((per_length - expected).abs() <= 1e-12 * expected, "{per_length} vs {expected}");
            assert!((sol.total_current(&consts) - sol.surface_current_density(&consts) * 4.0).abs() < 1e-9 * sol.total_current(&consts));
        }
    }

    #[test]
    fn long_finite_model_reproduces_ideal_exterior_potential() {
        let consts = Constants::natural();
        let sol = standard().with_finite_model(FiniteModel { length: 20.0, n_rings: 400, n_segments: 64 });
        let els = sol.current_elements(&consts).unwrap();
        let r = Vec3::new(0.5, 0.0, 0.0);
        let numeric = biot_savart_vector_potential(&els, &r, &consts).unwrap();
        let ideal = sol.vector_potential(&r).unwrap();
        assert!((numeric - ideal).norm() < 0.02 * ideal.norm(), "{numeric:?} vs {ideal:?}");
    }

    #[test]
    fn finite_model_error_shrinks_with_refinement() {
        let consts = Constants::natural();
        let r = Vec3::new(0.5, 0.0, 0.0);
        let ideal = standard().vector_potential(&r).unwrap();
        let errors: Vec<f64> = [(2.0, 20, 16), (5.0, 50, 32), (10.0, 100, 48), (20.0, 200, 64)]
            .into_iter()
            .map(|(length, n_rings, n_segments)| {
                let sol = standard().with_finite_model(FiniteModel { length, n_rings, n_segments });
                let els = sol.current_elements(&consts).unwrap();
                (biot_savart_vector_potential(&els, &r, &consts).unwrap() - ideal).norm()
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    }
}
