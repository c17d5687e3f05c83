//! Aharonov–Bohm phases along paths and their behavior under gauge
//! transformations.
//!
//! The phase accumulated by a charge moving along a path is
//! `φ = −(q/ħ) ∫ A · dl`. For a closed loop this is `−(q/ħ) w Φ` for a loop
//! winding `w` times around a flux `Φ`, independent of the gauge. For an
//! open path a gauge transformation `A → A + ∇χ` shifts it by
//! `−(q/ħ) [χ(end) − χ(start)]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::em::{ChargeState, ChiFunction, ChiKind, GaugeField};
use crate::quadrature::{integrate_line, IntegralResult, PathSpec, QuadratureSpec};
use crate::{Constants, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    /// `−(q/ħ) ∫ A · dl`, radians.
    pub phase: f64,
    /// `|phase|`, for comparison with the magnitude `qΦ/ħ`.
    pub magnitude: f64,
    pub path_label: String,
    pub gauge_tag: String,
    pub winding: Option<i64>,
    /// Analytic open-path shift `−(q/ħ) Δχ` when the report comes from a gauge scan.
    pub gauge_shift_analytic: Option<f64>,
    /// The line integral, scaled to radians.
    pub convergence: IntegralResult,
}

/// Phase `−(q/ħ) ∫ A · dl` along `path`.
pub fn path_phase(
    field: &GaugeField,
    path: &PathSpec,
    charge: &ChargeState,
    consts: &Constants,
    spec: &QuadratureSpec,
) -> Result<PhaseReport> {
    let line = integrate_line(|r| field.sample(r), path, spec)?;
    let convergence = line.scaled(-charge.charge / consts.hbar);
    Ok(PhaseReport {
        phase: convergence.value,
        magnitude: convergence.value.abs(),
        path_label: path.label.clone(),
        gauge_tag: field.gauge_tag.clone(),
        winding: path.winding(),
        gauge_shift_analytic: None,
        convergence,
    })
}

/// Endpoint shift of the phase under `A → A + ∇χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeShift {
    /// `−(q/ħ) Δχ`, radians.
    pub radians: f64,
    /// `Δχ` along the path, tracking the branch of a multivalued `χ`.
    pub delta_chi: f64,
    pub multivalued: bool,
    /// The tracked branch differs from the principal-branch endpoint difference.
    pub branch_cut_crossed: bool,
}

/// `−(q/ħ) [χ(end) − χ(start)]` from endpoint values, without quadrature.
///
/// For the azimuthal gauge function the azimuth is followed continuously
/// along the path, so a loop around its singular line picks up `2πc` per
/// turn; the row is flagged when this differs from the principal branch.
pub fn gauge_phase_shift(chi: &ChiFunction, path: &PathSpec, charge: &ChargeState, consts: &Constants) -> Result<GaugeShift> {
    let principal = chi.value(&path.end()) - chi.value(&path.start());
    let (delta_chi, branch_cut_crossed) = match &chi.kind {
        ChiKind::Azimuthal { coefficient, center } => {
            let swept = [1 << 10, 1 << 14, 1 << 18]
                .into_iter()
                .find_map(|n| path.swept_azimuth(center, n))
                .ok_or_else(|| {
                    Error::Geometry(format!("path '{}' meets the singular line of gauge function '{}'", path.label, chi.label))
                })?;
            let tracked = coefficient * swept;
            (tracked, (tracked - principal).abs() > 1e-9 * coefficient.abs().max(1.0))
        }
        _ => (principal, false),
    };
    Ok(GaugeShift {
        radians: -charge.charge / consts.hbar * delta_chi,
        delta_chi,
        multivalued: chi.is_multivalued(),
        branch_cut_crossed,
    })
}

/// One `(χ, path)` entry of a gauge scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeScanRow {
    pub chi_label: String,
    pub path_label: String,
    pub closed: bool,
    pub multivalued: bool,
    pub base_phase: f64,
    /// Phase in the transformed gauge, with the analytic shift attached.
    pub report: Option<PhaseReport>,
    /// Recomputed phase minus base phase.
    pub numeric_shift: f64,
    pub analytic_shift: f64,
    pub residual: f64,
    /// `10 ×` the combined quadrature error plus a rounding allowance.
    pub bound: f64,
    pub violation: bool,
    pub branch_cut_crossed: bool,
    pub failure: Option<String>,
}

fn scan_row(
    field: &GaugeField,
    base: &Result<PhaseReport>,
    chi: &ChiFunction,
    path: &PathSpec,
    charge: &ChargeState,
    consts: &Constants,
    spec: &QuadratureSpec,
) -> GaugeScanRow {
    let mut row = GaugeScanRow {
        chi_label: chi.label.clone(),
        path_label: path.label.clone(),
        closed: path.closed,
        multivalued: chi.is_multivalued(),
        base_phase: f64::NAN,
        report: None,
        numeric_shift: f64::NAN,
        analytic_shift: f64::NAN,
        residual: f64::NAN,
        bound: f64::NAN,
        violation: true,
        branch_cut_crossed: false,
        failure: None,
    };
    let outcome = (|| -> Result<()> {
        let base = base.as_ref().map_err(|e| Error::Config(format!("base phase failed: {e}")))?;
        row.base_phase = base.phase;
        let shift = gauge_phase_shift(chi, path, charge, consts)?;
        let mut report = path_phase(&field.apply_gauge(chi), path, charge, consts, spec)?;
        report.gauge_shift_analytic = Some(shift.radians);
        row.numeric_shift = report.phase - base.phase;
        row.analytic_shift = shift.radians;
        row.residual = row.numeric_shift - row.analytic_shift;
        let rounding = 64.0 * f64::EPSILON * (base.phase.abs() + report.phase.abs() + shift.radians.abs());
        row.bound = 10.0 * (base.convergence.error_estimate + report.convergence.error_estimate) + rounding;
        row.violation = !(row.residual.abs() <= row.bound);
        row.branch_cut_crossed = shift.branch_cut_crossed;
        row.report = Some(report);
        Ok(())
    })();
    if let Err(e) = outcome {
        row.failure = Some(e.to_string());
    }
    row
}

/// Recompute every path phase under every gauge function and compare the
/// change with the analytic endpoint shift. Failures are recorded per row.
pub fn gauge_scan(
    field: &GaugeField,
    chis: &[ChiFunction],
    paths: &[PathSpec],
    charge: &ChargeState,
    consts: &Constants,
    spec: &QuadratureSpec,
) -> Vec<GaugeScanRow> {
    let bases: Vec<Result<PhaseReport>> =
        paths.par_iter().map(|p| path_phase(field, p, charge, consts, spec)).collect();
    let pairs: Vec<(usize, &ChiFunction)> =
        (0..paths.len()).flat_map(|i| chis.iter().map(move |c| (i, c))).collect();
    pairs
        .par_iter()
        .map(|(i, chi)| scan_row(field, &bases[*i], chi, &paths[*i], charge, consts, spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::Solenoid;
    use crate::Vec3;
    use std::f64::consts::PI;

    fn setup() -> (Solenoid, GaugeField, ChargeState, Constants, QuadratureSpec) {
        let sol = Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap();
        let field = GaugeField::coulomb_solenoid(&sol);
        let ch = ChargeState::new(1.0, 1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, max_subdivisions: 1000 };
        (sol, field, ch, Constants::natural(), spec)
    }

    #[test]
    fn flux_theorem_with_winding() {
        let (sol, field, ch, k, spec) = setup();
        for w in [1, 2, -1] {
            let r = path_phase(&field, &PathSpec::circle(Vec3::zeros(), 0.3, w), &ch, &k, &spec).unwrap();
            let expected = -(w as f64) * sol.flux();
            assert!((r.phase - expected).abs() < 1e-10 * sol.flux(), "w={w}: {}", r.phase);
            assert_eq!(r.winding, Some(w as i64));
            assert_eq!(r.magnitude, r.phase.abs());
        }
    }

    #[test]
    fn radial_segment_has_no_phase() {
        let (_, field, ch, k, spec) = setup();
        let path = PathSpec::segment(Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.5, 0.0, 0.0));
        let r = path_phase(&field, &path, &ch, &k, &spec).unwrap();
        assert!(r.phase.abs() < 1e-15);
    }

    #[test]
    fn phase_is_linear_in_charge() {
        let (_, field, ch, k, spec) = setup();
        let path = PathSpec::arc(Vec3::new(0.1, 0.0, 0.0), 0.4, 0.1, 1.3);
        let one = path_phase(&field, &path, &ch, &k, &spec).unwrap().phase;
        let three = path_phase(&field, &path, &ch.with_charge(3.0), &k, &spec).unwrap().phase;
        assert_eq!(three, 3.0 * one);
    }

    #[test]
    fn linear_gauge_shift_on_segment() {
        let (_, _, ch, k, _) = setup();
        let c = 0.37;
        let chi = ChiFunction::linear(Vec3::new(c, 0.0, 0.0));
        let path = PathSpec::segment(Vec3::new(1.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0));
        let shift = gauge_phase_shift(&chi, &path, &ch, &k).unwrap();
        assert!((shift.radians - (-2.0 * c)).abs() < 1e-15);
        assert!(!shift.multivalued);
    }

    #[test]
    fn closed_and_constant_shifts_vanish() {
        let (_, _, ch, k, _) = setup();
        let loop_ = PathSpec::circle(Vec3::new(0.2, 0.1, 0.0), 0.6, 1);
        for chi in ChiFunction::library(0.1).into_iter().filter(|c| !c.is_multivalued()) {
            let s = gauge_phase_shift(&chi, &loop_, &ch, &k).unwrap();
            assert!(s.radians.abs() < 1e-12, "{}: {}", chi.label, s.radians);
        }
        let constant = ChiFunction::new("c", ChiKind::Constant { value: 4.2 });
        for path in [loop_, PathSpec::segment(Vec3::zeros(), Vec3::new(1.0, 2.0, 3.0))] {
            assert_eq!(gauge_phase_shift(&constant, &path, &ch, &k).unwrap().radians, 0.0);
        }
    }

    #[test]
    fn azimuthal_branch_is_tracked() {
        let (_, _, ch, k, _) = setup();
        let chi = ChiFunction::azimuthal(0.5, Vec3::zeros());
        let loop_ = PathSpec::circle(Vec3::zeros(), 0.3, 1);
        let s = gauge_phase_shift(&chi, &loop_, &ch, &k).unwrap();
        assert!((s.delta_chi - PI).abs() < 1e-12);
        assert!(s.multivalued && s.branch_cut_crossed);
        // an arc across the negative x axis crosses the principal cut
        let arc = PathSpec::arc(Vec3::zeros(), 0.3, 0.75 * PI, 0.5 * PI);
        let s = gauge_phase_shift(&chi, &arc, &ch, &k).unwrap();
        assert!((s.delta_chi - 0.25 * PI).abs() < 1e-12 && s.branch_cut_crossed);
        let through = PathSpec::segment(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0));
        assert!(gauge_phase_shift(&chi, &through, &ch, &k).is_err());
    }

    #[test]
    fn scan_matches_analytic_shifts() {
        let (_, field, ch, k, spec) = setup();
        let mut chis = ChiFunction::library(0.1);
        chis.push(ChiFunction::zero());
        let paths = vec![
            PathSpec::segment(Vec3::new(0.2, -0.3, 0.0), Vec3::new(0.6, 0.4, 0.1)).with_label("open"),
            PathSpec::circle(Vec3::zeros(), 0.3, 1).with_label("loop"),
            PathSpec::arc(Vec3::zeros(), 0.5, -0.5, 2.0).with_label("arc"),
        ];
        let rows = gauge_scan(&field, &chis, &paths, &ch, &k, &spec);
        assert_eq!(rows.len(), chis.len() * paths.len());
        for row in &rows {
            assert!(row.failure.is_none(), "{row:?}");
            assert!(row.residual.abs() < 1e-9, "{}/{}: {}", row.chi_label, row.path_label, row.residual);
            assert!(!row.violation, "{row:?}");
            if row.chi_label == "zero" {
                assert_eq!(row.numeric_shift, 0.0);
            }
        }
    }

    #[test]
    fn scan_records_failures_and_continues() {
        let (_, field, ch, k, spec) = setup();
        let chis = vec![ChiFunction::azimuthal(1.0, Vec3::zeros()), ChiFunction::linear(Vec3::new(1.0, 0.0, 0.0))];
        let paths = vec![PathSpec::segment(Vec3::new(-0.05, 0.0, 0.0), Vec3::new(0.05, 0.0, 0.0)).with_label("via-axis")];
        let rows = gauge_scan(&field, &chis, &paths, &ch, &k, &spec);
        assert!(rows[0].failure.is_some());
        assert!(rows[1].failure.is_none());
    }
}
