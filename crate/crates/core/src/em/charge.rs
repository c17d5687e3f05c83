
use serde::{Deserialize, Serialize};

use crate::{Constants, Error, Result, Vec3};

/// A classical point charge: the source of `A_c` and `B_c`, and the holder
/// of the kinetic momentum `p = m v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeState {
    pub charge: f64,
    pub mass: f64,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl ChargeState {
    pub fn new(charge: f64, mass: f64, position: Vec3, velocity: Vec3) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Config(format!("charge mass must be positive, got {mass}")));
        }
        let finite = charge.is_finite()
            && position.iter().all(|x| x.is_finite())
            && velocity.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Config("charge, position and velocity must be finite".into()));
        }
        Ok(Self { charge, mass, position, velocity })
    }

    pub fn momentum(&self) -> Vec3 {
        self.mass * self.velocity
    }

    pub fn at(&self, position: Vec3) -> Self {
        Self { position, ..self.clone() }
    }

    pub fn with_velocity(&self, velocity: Vec3) -> Self {
        Self { velocity, ..self.clone() }
    }

    pub fn with_charge(&self, charge: f64) -> Self {
        Self { charge, ..self.clone() }
    }

    fn separation(&self, r: &Vec3) -> Result<(Vec3, f64)> {
        let d = r - self.position;
        let dist = d.norm();
        if dist == 0.0 {
            return Err(Error::CoincidentPoint(r.x, r.y, r.z));
        }
        Ok((d, dist))
    }

    /// Non-relativistic potential `μ0 q v / (4π |r − r_c|)`.
    ///
    /// This is the form used in the field-energy equivalence argument. It is
    /// not transverse: its divergence is `−μ0 q v·d / (4π d³)`, see
    /// [`ChargeState::vector_potential_divergence`].
    pub fn vector_potential(&self, r: &Vec3, consts: &Constants) -> Result<Vec3> {
        let (_, dist) = self.separation(r)?;
        Ok(consts.mu0_over_4pi() * self.charge / dist * self.velocity)
    }

    /// Analytic divergence of [`ChargeState::vector_potential`].
    pub fn vector_potential_divergence(&self, r: &Vec3, consts: &Constants) -> Result<f64> {
        let (d, dist) = self.separation(r)?;
        Ok(-consts.mu0_over_4pi() * self.charge * self.velocity.dot(&d) / dist.powi(3))
    }

    /// `μ0 q v × (r − r_c) / (4π |r − r_c|³)`.
    pub fn b_field(&self, r: &Vec3, consts: &Constants) -> Result<Vec3> {
        let (d, dist) = self.separation(r)?;
        Ok(consts.mu0_over_4pi() * self.charge / dist.powi(3) * self.velocity.cross(&d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::em::diffops;

    fn unit_charge() -> ChargeState {
        ChargeState::new(1.0, 1.0, Vec3::zeros(), Vec3::new(0.0, 1.0, 0.0)).unwrap()
    }

    #[test]
    fn potential_example() {
        let k = Constants::natural();
        let a = unit_charge().vector_potential(&Vec3::new(1.0, 0.0, 0.0), &k).unwrap();
        assert!((a - Vec3::new(0.0, 1.0 / (4.0 * PI), 0.0)).norm() < 1e-16);
    }

    #[test]
    fn potential_scales_inverse_distance() {
        let k = Constants::natural();
        let ch = unit_charge();
        let near = ch.vector_potential(&Vec3::new(0.3, 0.4, 0.1), &k).unwrap();
        let far = ch.vector_potential(&Vec3::new(0.6, 0.8, 0.2), &k).unwrap();
        assert!((near - 2.0 * far).norm() < 1e-15);
        let still = ch.with_velocity(Vec3::zeros());
        assert_eq!(still.vector_potential(&Vec3::new(1.0, 2.0, 3.0), &k).unwrap(), Vec3::zeros());
    }

    #[test]
    fn field_example_and_orthogonality() {
        let k = Constants::natural();
        let ch = unit_charge();
        let b = ch.b_field(&Vec3::new(0.0, 0.0, 1.0), &k).unwrap();
        assert!((b - Vec3::new(1.0 / (4.0 * PI), 0.0, 0.0)).norm() < 1e-16);
        assert_eq!(ch.b_field(&Vec3::new(0.0, 3.0, 0.0), &k).unwrap(), Vec3::zeros());
        let r = Vec3::new(0.3, -0.7, 1.1);
        let b = ch.b_field(&r, &k).unwrap();
        assert!(b.dot(&ch.velocity).abs() < 1e-16 && b.dot(&r).abs() < 1e-16);
    }

    #[test]
    fn coincident_point_is_an_error() {
        let k = Constants::natural();
        let ch = unit_charge();
        assert!(matches!(ch.vector_potential(&Vec3::zeros(), &k), Err(Error::CoincidentPoint(..))));
        assert!(matches!(ch.b_field(&Vec3::zeros(), &k), Err(Error::CoincidentPoint(..))));
    }

    #[test]
    fn curl_of_potential_is_field() {
        let k = Constants::si();
        let ch = ChargeState::new(1.6e-19, 9.1e-31, Vec3::new(0.1, 0.2, -0.3), Vec3::new(1e5, -2e5, 3e4)).unwrap();
        for r in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(-0.4, 0.9, 0.3), Vec3::new(0.1, 0.2, 0.7)] {
            let h = diffops::step(&r, 0.1);
            let curl = diffops::curl(|p| ch.vector_potential(p, &k).unwrap(), &r, h);
            let b = ch.b_field(&r, &k).unwrap();
            assert!((curl - b).norm() <= 1e-6 * b.norm(), "{curl:?} vs {b:?}");
        }
    }

    #[test]
    fn divergence_is_the_longitudinal_remainder() {
        let k = Constants::natural();
        let ch = unit_charge();
        let r = Vec3::new(0.4, 0.5, -0.2);
        let h = diffops::step(&r, 0.1);
        let fd = diffops::divergence(|p| ch.vector_potential(p, &k).unwrap(), &r, h);
        let exact = ch.vector_potential_divergence(&r, &k).unwrap();
        assert!((fd - exact).abs() < 1e-6 * exact.abs());
    }

    #[test]
    fn rejects_nonpositive_mass() {
        assert!(ChargeState::new(1.0, 0.0, Vec3::zeros(), Vec3::zeros()).is_err());
        assert!(ChargeState::new(f64::NAN, 1.0, Vec3::zeros(), Vec3::zeros()).is_err());
    }

    #[test]
    fn momentum_over_mass_is_velocity() {
        let ch = ChargeState::new(2.0, 3.0, Vec3::zeros(), Vec3::new(0.1, 0.2, 0.3)).unwrap();
        assert!((ch.momentum() / ch.mass - ch.velocity).norm() < 1e-16);
    }
}
