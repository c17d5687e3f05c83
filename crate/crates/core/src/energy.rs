//! Field-overlap interaction energy between the solenoid and a moving
//! charge, compared with the minimal-coupling energies `±q v·A_s`.
//!
//! For a steady, neutral solenoid the electric overlap vanishes and the
//! overlap energy reduces to `κ/μ0 ∫ B0·B_c d³r` over the solenoid interior,
//! with `κ = ½` in the original proposal and `κ = 1` for the interaction
//! energy of two distinct sources. In the Coulomb gauge the `κ = 1` form
//! equals `+q v·A_s(r_c)`, while minimal coupling gives `−q v·A_s(r_c)`.
//!
//! The infinite solenoid is integrated over a finite cylinder centred on the
//! charge's `z`. Beyond the cut the integrand is bounded by
//! `B0 |q| |v⊥| (ρ_c + a) / (4π |Δz|³)`, which integrates to the reported
//! `truncation_bound = κ Φ |q| |v⊥| (ρ_c + a) / (4π h²)` for half-length `h`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::em::{ChargeState, ChiFunction, Solenoid};
use crate::quadrature::{integrate_volume, CylinderRegion, IntegralResult, QuadratureSpec};
use crate::{Constants, Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prefactor {
    Half,
    Full,
}

impl Prefactor {
    pub fn value(self) -> f64 {
        match self {
            Prefactor::Half => 0.5,
            Prefactor::Full => 1.0,
        }
    }
}

/// Integration settings for the overlap energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapSettings {
    pub quadrature: QuadratureSpec,
    /// Full axial length of the integration cylinder; `None` means `2000 a`.
    pub truncation_length: Option<f64>,
}

impl Default for OverlapSettings {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSpec { rel_tol: 1e-7, abs_tol: 1e-300, max_subdivisions: 400 },
            truncation_length: None,
        }
    }
}

impl OverlapSettings {
    pub fn length_for(&self, sol: &Solenoid) -> f64 {
        self.truncation_length.unwrap_or(2000.0 * sol.radius)
    }
}

/// A prefactored overlap integral and its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapEnergy {
    pub prefactor: Prefactor,
    pub integral: IntegralResult,
    pub truncation_bound: f64,
    pub region: CylinderRegion,
}

impl OverlapEnergy {
    pub fn value(&self) -> f64 {
        self.integral.value
    }

    /// Quadrature error plus truncation bound.
    pub fn error_bound(&self) -> f64 {
        self.integral.error_estimate + self.truncation_bound
    }

    fn with_prefactor(&self, prefactor: Prefactor) -> Self {
        let ratio = prefactor.value() / self.prefactor.value();
        Self {
            prefactor,
            integral: self.integral.scaled(ratio),
            truncation_bound: self.truncation_bound * ratio,
            region: self.region,
        }
    }
}

fn transverse_speed(v: &Vec3) -> f64 {
    v.x.hypot(v.y)
}

/// `κ/μ0 ∫_cylinder B0·B_c d³r` over the solenoid interior.
pub fn overlap_energy(
    sol: &Solenoid,
    charge: &ChargeState,
    prefactor: Prefactor,
    consts: &Constants,
    settings: &OverlapSettings,
) -> Result<OverlapEnergy> {
    let rho_c = sol.axis_distance(&charge.position);
    if rho_c <= sol.radius {
        return Err(Error::Geometry(format!(
            "charge at axis distance {rho_c} is not outside the solenoid of radius {}",
            sol.radius
        )));
    }
    let length = settings.length_for(sol);
    let half = 0.5 * length;
    let zc = charge.position.z;
    let region = CylinderRegion::new(sol.center, sol.radius, zc - half, zc + half)?;
    let kappa = prefactor.value();
    // absolute floor relative to the largest possible |q v·A_s| at this distance
    let scale = kappa * charge.charge.abs() * charge.velocity.norm() * sol.flux().abs() / (2.0 * PI * rho_c);
    let spec = QuadratureSpec {
        abs_tol: settings.quadrature.abs_tol.max(settings.quadrature.rel_tol * scale).max(f64::MIN_POSITIVE),
        ..settings.quadrature
    };
    let integral = integrate_volume(
        |p| Ok(kappa / consts.mu0 * sol.b_field(p).dot(&charge.b_field(p, consts)?)),
        &region,
        &spec,
    )?;
    let truncation_bound = kappa * sol.flux().abs() * charge.charge.abs() * transverse_speed(&charge.velocity)
        * (rho_c + sol.radius)
        / (4.0 * PI * half * half);
    Ok(OverlapEnergy { prefactor, integral, truncation_bound, region })
}

/// `+q v·A_s(r_c)` with the Coulomb-gauge solenoid potential.
pub fn canonical_energy(sol: &Solenoid, charge: &ChargeState) -> Result<f64> {
    Ok(charge.charge * charge.velocity.dot(&sol.vector_potential(&charge.position)?))
}

/// Minimal-coupling interaction energy `−q v·A_s(r_c)`.
pub fn qed_interaction_energy(sol: &Solenoid, charge: &ChargeState) -> Result<f64> {
    Ok(-canonical_energy(sol, charge)?)
}

/// `∫ A_c·j_s d³r` evaluated as `Σ A_c(x)·I dl` over the finite model's
/// current elements.
pub fn current_element_energy(sol: &Solenoid, charge: &ChargeState, consts: &Constants) -> Result<f64> {
    sol.current_elements(consts)?
        .iter()
        .map(|e| Ok(charge.vector_potential(&e.position, consts)?.dot(&e.idl)))
        .sum()
}

/// Comparison of the overlap energy with `q v·A'` in a shifted gauge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeVarianceRow {
    pub chi_label: String,
    /// Gauge-invariant `κ = 1` overlap energy.
    pub e_overlap_full: f64,
    /// `q v·(A_s + ∇χ)(r_c)`.
    pub e_gauge_shifted: f64,
    /// `q v·∇χ(r_c)`, the amount by which the equivalence fails.
    pub discrepancy: f64,
    pub overlap_minus_shifted: f64,
    /// `∇χ ≠ 0` but `v ⊥ ∇χ`, so this gauge happens to preserve the equivalence.
    pub orthogonal_gradient: bool,
}

fn variance_row(sol: &Solenoid, charge: &ChargeState, chi: &ChiFunction, e_overlap_full: f64) -> Result<GaugeVarianceRow> {
    let grad = chi.gradient(&charge.position);
    let discrepancy = charge.charge * charge.velocity.dot(&grad);
    let e_gauge_shifted = canonical_energy(sol, charge)? + discrepancy;
    let orthogonal_gradient =
        grad.norm() > 0.0 && charge.velocity.dot(&grad).abs() <= 1e-12 * charge.velocity.norm() * grad.norm();
    Ok(GaugeVarianceRow {
        chi_label: chi.label.clone(),
        e_overlap_full,
        e_gauge_shifted,
        discrepancy,
        overlap_minus_shifted: e_overlap_full - e_gauge_shifted,
        orthogonal_gradient,
    })
}

/// Overlap energy against `q v·(A_s + ∇χ)` for one gauge function.
pub fn gauge_variance_probe(
    sol: &Solenoid,
    charge: &ChargeState,
    chi: &ChiFunction,
    consts: &Constants,
    settings: &OverlapSettings,
) -> Result<GaugeVarianceRow> {
    gauge_variance_table(sol, charge, std::slice::from_ref(chi), consts, settings)?
        .pop()
        .ok_or_else(|| Error::Config("empty gauge table".into()))
}

/// [`gauge_variance_probe`] for several gauge functions, sharing one volume integral.
pub fn gauge_variance_table(
    sol: &Solenoid,
    charge: &ChargeState,
    chis: &[ChiFunction],
    consts: &Constants,
    settings: &OverlapSettings,
) -> Result<Vec<GaugeVarianceRow>> {
    let full = overlap_energy(sol, charge, Prefactor::Full, consts, settings)?.value();
    chis.iter().map(|chi| variance_row(sol, charge, chi, full)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub label: String,
    pub position: Vec3,
    pub velocity: Vec3,
    /// `½/μ0 ∫ B0·B_c`.
    pub e_overlap_half: f64,
    /// `1/μ0 ∫ B0·B_c`.
    pub e_overlap_full: f64,
    /// `+q v·A_s`.
    pub e_canonical_plus: f64,
    /// `−q v·A_s`.
    pub e_qed_minus: f64,
    pub ratio_half_to_canonical: Option<f64>,
    pub ratio_full_to_canonical: Option<f64>,
    pub sign_mismatch: bool,
    /// Analytic bound on the part of the full-prefactor integral beyond the cut.
    pub truncation_bound: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub truncation_length: f64,
}

impl EnergyReport {
    /// Quadrature error plus truncation bound of the full-prefactor energy.
    pub fn error_bound(&self) -> f64 {
        self.error_estimate + self.truncation_bound
    }
}

/// All four energies for one charge state, from a single volume integral.
pub fn energy_comparison_report(
    sol: &Solenoid,
    charge: &ChargeState,
    consts: &Constants,
    settings: &OverlapSettings,
) -> Result<EnergyReport> {
    let full = overlap_energy(sol, charge, Prefactor::Full, consts, settings)?;
    let half = full.with_prefactor(Prefactor::Half);
    let e_canonical_plus = canonical_energy(sol, charge)?;
    let e_qed_minus = -e_canonical_plus;
    let ratio = |e: f64| (e_canonical_plus != 0.0).then(|| e / e_canonical_plus);
    let bound = full.error_bound();
    let sign_mismatch = full.value() * e_qed_minus < 0.0
        && full.value().abs() > 10.0 * bound
        && e_qed_minus.abs() > 10.0 * bound;
    Ok(EnergyReport {
        label: String::new(),
        position: charge.position,
        velocity: charge.velocity,
        e_overlap_half: half.value(),
        e_overlap_full: full.value(),
        e_canonical_plus,
        e_qed_minus,
        ratio_half_to_canonical: ratio(half.value()),
        ratio_full_to_canonical: ratio(full.value()),
        sign_mismatch,
        truncation_bound: full.truncation_bound,
        error_estimate: full.integral.error_estimate,
        evaluations: full.integral.evaluations,
        converged: full.integral.converged,
        truncation_length: full.region.z_max - full.region.z_min,
    })
}

/// Twenty charge states at axis distances between `2a` and `10a` with
/// velocity directions mixing azimuthal, radial and axial components.
pub fn equivalence_grid(sol: &Solenoid, charge: f64, mass: f64) -> Result<Vec<(String, ChargeState)>> {
    let a = sol.radius;
    let combos: [(f64, [f64; 3]); 4] = [
        (0.0, [1.0, 0.0, 0.0]),
        (PI / 3.0, [1.0, 0.0, 0.5]),
        (2.0 * PI / 3.0 + 0.2, [0.6, 0.8, 0.0]),
        (-PI / 4.0, [-1.0, 0.3, -0.2]),
    ];
    let mut out = Vec::with_capacity(20);
    for (i, factor) in [2.0, 3.5, 5.0, 7.5, 10.0].into_iter().enumerate() {
        for (j, (azimuth, [t, r, z])) in combos.iter().enumerate() {
            let (s, c) = azimuth.sin_cos();
            let radial = Vec3::new(c, s, 0.0);
            let tangential = Vec3::new(-s, c, 0.0);
            let v = (*t * tangential + *r * radial + *z * Vec3::z()).normalize();
            let position = sol.center + factor * a * radial + Vec3::new(0.0, 0.0, 0.1 * (i + j) as f64 * a);
            out.push((format!("rho={factor}a/{j}"), ChargeState::new(charge, mass, position, v)?));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> (Solenoid, ChargeState, Constants) {
        (
            Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap(),
            ChargeState::new(1.0, 1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap(),
            Constants::natural(),
        )
    }

    #[test]
    fn canonical_and_qed_values() {
        let (sol, ch, _) = standard();
        assert!((canonical_energy(&sol, &ch).unwrap() - 0.01).abs() < 1e-15);
        assert!((qed_interaction_energy(&sol, &ch).unwrap() + 0.01).abs() < 1e-15);
        let radial = ch.with_velocity(Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(canonical_energy(&sol, &radial).unwrap(), 0.0);
        let mirrored = ch.at(Vec3::new(-0.5, 0.0, 0.0));
        assert!((canonical_energy(&sol, &mirrored).unwrap() + 0.01).abs() < 1e-15);
    }

    #[test]
    fn overlap_standard_values() {
        let (sol, ch, k) = standard();
        let s = OverlapSettings::default();
        let full = overlap_energy(&sol, &ch, Prefactor::Full, &k, &s).unwrap();
        let half = overlap_energy(&sol, &ch, Prefactor::Half, &k, &s).unwrap();
        assert!((full.value() - 0.01).abs() < 1e-4, "{}", full.value());
        assert!((half.value() - 0.005).abs() < 5e-5, "{}", half.value());
        assert!(full.integral.converged);
    }

    #[test]
    fn still_charge_has_no_overlap() {
        let (sol, ch, k) = standard();
        let r = overlap_energy(&sol, &ch.with_velocity(Vec3::zeros()), Prefactor::Full, &k, &OverlapSettings::default()).unwrap();
        assert_eq!(r.value(), 0.0);
        assert_eq!(r.truncation_bound, 0.0);
    }

    #[test]
    fn charge_inside_is_rejected() {
        let (sol, ch, k) = standard();
        let inside = ch.at(Vec3::new(0.05, 0.0, 0.0));
        let err = overlap_energy(&sol, &inside, Prefactor::Full, &k, &OverlapSettings::default()).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
    }

    #[test]
    fn truncation_bound_covers_short_cylinder_error() {
        let (sol, ch, k) = standard();
        let s = OverlapSettings { truncation_length: Some(4.0), ..Default::default() };
        let r = overlap_energy(&sol, &ch, Prefactor::Full, &k, &s).unwrap();
        let err = (r.value() - 0.01).abs();
        assert!(err > 1e-5, "the short cylinder should visibly truncate");
        assert!(err <= r.error_bound(), "{err} > {}", r.error_bound());
    }

    #[test]
    fn report_invariants() {
        let (sol, ch, k) = standard();
        let rep = energy_comparison_report(&sol, &ch, &k, &OverlapSettings::default()).unwrap();
        assert_eq!(rep.e_overlap_half, rep.e_overlap_full * 0.5);
        assert_eq!(rep.e_qed_minus, -rep.e_canonical_plus);
        assert!(rep.sign_mismatch);
        let half = rep.ratio_half_to_canonical.unwrap();
        assert!((half - 0.5).abs() < 0.005);
    }

    #[test]
    fn zero_velocity_report() {
        let (sol, ch, k) = standard();
        let rep = energy_comparison_report(&sol, &ch.with_velocity(Vec3::zeros()), &k, &OverlapSettings::default()).unwrap();
        assert_eq!((rep.e_overlap_full, rep.e_canonical_plus), (0.0, 0.0));
        assert!(!rep.sign_mismatch && rep.ratio_full_to_canonical.is_none());
    }

    #[test]
    fn charge_on_y_axis_sees_nothing() {
        let (sol, ch, k) = standard();
        let rep = energy_comparison_report(&sol, &ch.at(Vec3::new(0.0, 0.5, 0.0)), &k, &OverlapSettings::default()).unwrap();
        for e in [rep.e_overlap_half, rep.e_overlap_full, rep.e_canonical_plus, rep.e_qed_minus] {
            assert!(e.abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn gauge_variance_examples() {
        let (sol, ch, k) = standard();
        let chis = [
            ChiFunction::zero(),
            ChiFunction::linear(Vec3::new(0.3, 0.0, 0.0)).with_label_for_test("cx"),
            ChiFunction::linear(Vec3::new(0.0, 0.3, 0.0)).with_label_for_test("cy"),
        ];
        let rows = gauge_variance_table(&sol, &ch, &chis, &k, &OverlapSettings::default()).unwrap();
        assert_eq!(rows[0].discrepancy, 0.0);
        assert_eq!(rows[1].discrepancy, 0.0);
        assert!(rows[1].orthogonal_gradient && !rows[0].orthogonal_gradient);
        assert!((rows[2].discrepancy - 0.3).abs() < 1e-15);
        assert!((rows[2].overlap_minus_shifted + 0.3).abs() < 1e-3);
    }

    #[test]
    fn element_sum_matches_volume_integral() {
        let (sol, ch, k) = standard();
        let elements = current_element_energy(&sol, &ch, &k).unwrap();
        let volume = overlap_energy(&sol, &ch, Prefactor::Full, &k, &OverlapSettings::default()).unwrap().value();
        assert!((elements - volume).abs() < 0.01 * volume.abs(), "{elements} vs {volume}");
    }

    impl ChiFunction {
        fn with_label_for_test(mut self, label: &str) -> Self {
            self.label = label.into();
            self
        }
    }
}
