//! Structural checks shared by the acceptance suite and the command line:
//! hermiticity and unitarity of the truncated model, validity of `ρ_C`,
//! transversality of the modes, and finite-difference curl/divergence of
//! both potentials.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::em::{diffops, ChargeState, CurrentElement, Solenoid};
use crate::qed::{
    branch_evolution, build_hamiltonian, build_mode_grid, reduced_density_matrix, ModeGridSpec, Propagator,
    QubitEnergies, TruncatedSpace,
};
use crate::{Constants, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self { name, value, tolerance, passed: value <= tolerance }
    }
}

/// Inputs of [`structural_suite`].
pub struct SuiteInputs<'a> {
    pub solenoid: &'a Solenoid,
    pub charge: &'a ChargeState,
    /// Current elements of a short source for the mode model.
    pub source: &'a [CurrentElement],
    /// `(L, index_range)` of the grid whose modes are checked for transversality.
    pub transverse_grid: (f64, u32),
}

/// Runs every structural check and returns one entry per check.
pub fn structural_suite(inputs: &SuiteInputs, consts: &Constants) -> Result<Vec<InvariantCheck>> {
    let SuiteInputs { solenoid: sol, charge: ch, source, transverse_grid } = *inputs;
    let mut out = Vec::new();

    let grid = build_mode_grid(&ModeGridSpec::new(2.0, 1).with_coupling_scale(3.0), consts)?;
    let space = TruncatedSpace::new(4, 3)?;
    let h = build_hamiltonian(&grid, ch, source, &space, QubitEnergies { e_c: 0.3, e_s: 0.2 }, consts)?;
    let scale = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    out.push(InvariantCheck::new("hermiticity residual / max|H|", h.hermiticity_residual / scale, 1e-12));

    let prop = Propagator::new(&h, consts)?;
    let trace: f64 = (0..h.dimension()).map(|i| h.matrix[(i, i)].re).sum();
    let spectral: f64 = prop.eigenvalues().iter().sum();
    out.push(InvariantCheck::new(
        "trace minus eigenvalue sum (relative)",
        (trace - spectral).abs() / trace.abs().max(1.0),
        1e-10,
    ));

    let psi = DVector::from_fn(h.dimension(), |i, _| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
    let psi = &psi / Complex64::new(psi.norm(), 0.0);
    let drift = [0.5, 3.0, 20.0].iter().map(|&t| (prop.apply(&psi, t).norm() - 1.0).abs()).fold(0.0, f64::max);
    out.push(InvariantCheck::new("norm drift under evolution", drift, 1e-10));

    let (l, n) = transverse_grid;
    let fine = build_mode_grid(&ModeGridSpec::new(l, n), consts)?;
    let trans = fine
        .modes
        .iter()
        .map(|m| {
            let kh = m.k.normalize();
            kh.dot(&m.pol[0]).abs().max(kh.dot(&m.pol[1]).abs()).max(m.pol[0].dot(&m.pol[1]).abs())
        })
        .fold(0.0, f64::max);
    out.push(InvariantCheck::new("mode transversality", trans, 1e-12));

    let left = ch.at(ch.position + Vec3::new(-2.0 * ch.position.x, 0.2, 0.0));
    let small = build_mode_grid(&ModeGridSpec::new(4.0, 4).with_coupling_scale(0.7), consts)?;
    let rep = reduced_density_matrix(&branch_evolution(&small, &left, ch, source, 3.0, consts)?);
    let rho = rep.rho_c;
    out.push(InvariantCheck::new("ρ_C trace − 1", (rho[0][0].re + rho[1][1].re - 1.0).abs(), 1e-12));
    out.push(InvariantCheck::new("ρ_C hermiticity", (rho[0][1] - rho[1][0].conj()).norm(), 1e-15));
    let outside = rep.eigenvalues.iter().map(|&l| (-l).max(l - 1.0).max(0.0)).fold(0.0, f64::max);
    out.push(InvariantCheck::new("ρ_C eigenvalues outside [0, 1]", outside, 0.0));

    let probes = [Vec3::new(0.3, 0.4, 0.2), Vec3::new(3.0, 2.0, -1.0), Vec3::new(-9.0, 4.0, 5.0)]
        .map(|p| sol.center + sol.radius * p);
    let mut curl_s: f64 = 0.0;
    let mut div_s: f64 = 0.0;
    let mut curl_c: f64 = 0.0;
    let mut div_c: f64 = 0.0;
    for r in probes {
        let h = diffops::step(&r, sol.radius);
        let a = |p: &Vec3| sol.vector_potential(p).unwrap_or_else(|_| Vec3::repeat(f64::NAN));
        let b_scale = sol.b0.abs();
        curl_s = curl_s.max((diffops::curl(a, &r, h) - sol.b_field(&r)).norm() / b_scale);
        div_s = div_s.max(diffops::divergence(a, &r, h).abs() / b_scale);
        if (r - ch.position).norm() > 0.0 {
            let ac = |p: &Vec3| ch.vector_potential(p, consts).unwrap_or_else(|_| Vec3::repeat(f64::NAN));
            let bc = ch.b_field(&r, consts)?;
            if bc.norm() > 0.0 {
                curl_c = curl_c.max((diffops::curl(ac, &r, h) - bc).norm() / bc.norm());
            }
            let div = ch.vector_potential_divergence(&r, consts)?;
            if div != 0.0 {
                div_c = div_c.max((diffops::divergence(ac, &r, h) - div).abs() / div.abs());
            }
        }
    }
    out.push(InvariantCheck::new("solenoid curl A − B (relative to B0)", curl_s, 1e-6));
    out.push(InvariantCheck::new("solenoid div A (relative to B0)", div_s, 1e-6));
    out.push(InvariantCheck::new("charge curl A − B (relative)", curl_c, 1e-6));
    out.push(InvariantCheck::new("charge div A − analytic (relative)", div_c, 1e-6));
    Ok(out)
}
