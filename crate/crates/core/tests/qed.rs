use std::f64::consts::PI;

use ablab::em::{biot_savart_vector_potential, ChargeState, CurrentElement, FiniteModel, GaugeField, Solenoid};
use ablab::phase::path_phase;
use ablab::qed::{
    analytic_phase, branch_evolution, branch_evolution_along, build_mode_grid, coherent_log_overlap,
    coupling_amplitudes, hamiltonian_from_couplings, polarizations, reduced_density_matrix, BranchStates,
    ModeCoupling, ModeGridSpec, Propagator, QubitEnergies, TruncatedSpace,
};
use ablab::quadrature::{integrate, PathSpec, QuadratureSpec};
use ablab::{Constants, Vec3};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn source(k: &Constants) -> Vec<CurrentElement> {
    Solenoid::new(0.1, 1.0, Vec3::zeros())
        .unwrap()
        .with_finite_model(FiniteModel { length: 0.2, n_rings: 4, n_segments: 32 })
        .current_elements(k)
        .unwrap()
}

fn charge() -> ChargeState {
    ChargeState::new(1.0, 1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap()
}

#[test]
fn analytic_phase_rate_matches_line_integral() {
    let k = Constants::natural();
    let els = source(&k);
    let (r0, r1) = (Vec3::new(0.5, -0.3, 0.05), Vec3::new(0.2, 0.6, -0.1));
    let duration = 1.7;
    let v = (r1 - r0) / duration;
    let ch = charge().at(r0).with_velocity(v);
    let spec = QuadratureSpec::new(1e-12, 1e-16, 500).unwrap();
    let accumulated = integrate(|t| analytic_phase(&ch.at(r0 + t * v), &els, 1.0, &k), 0.0, duration, &spec)
        .unwrap()
        .value;
    let sampler = {
        let els = els.clone();
        move |r: &Vec3| biot_savart_vector_potential(&els, r, &Constants::natural())
    };
    let field = GaugeField::new("biot-savart", sampler);
    let line = path_phase(&field, &PathSpec::segment(r0, r1), &ch, &k, &spec).unwrap().phase;
    assert!((accumulated - line).abs() <= 1e-6 * line.abs(), "{accumulated} vs {line}");
}

/// Exact evolution of one driven oscillator leaves the coherent state the
/// branch model predicts.
#[test]
fn branch_displacement_matches_exact_evolution() {
    let k = Constants::natural();
    let grid = build_mode_grid(&ModeGridSpec::new(2.0, 1).with_coupling_scale(0.5), &k).unwrap();
    let ch = charge();
    let els = source(&k);
    let mut c: ModeCoupling = coupling_amplitudes(&grid, &ch, &els, &k).unwrap()[0];
    c.m_s = Complex64::new(0.0, 0.0);
    let space = TruncatedSpace::new(1, 12).unwrap();
    let h = hamiltonian_from_couplings(&[c], &space, QubitEnergies::default(), &k).unwrap();
    let tau = 0.9;
    let mut psi = DVector::zeros(space.dimension());
    psi[space.index(1, 1, 0)] = Complex64::new(1.0, 0.0);
    let out = Propagator::new(&h, &k).unwrap().apply(&psi, tau);
    let ratio = out[space.index(1, 1, 1)] / out[space.index(1, 1, 0)];

    let b = branch_evolution(&grid, &ch, &ch, &els, tau, &k).unwrap();
    let alpha = b.alpha_l[0];
    assert!((ratio - alpha).norm() < 1e-10 * alpha.norm(), "{ratio} vs {alpha}");
    let vacuum = out[space.index(1, 1, 0)].norm();
    assert!((vacuum - (-0.5 * alpha.norm_sqr()).exp()).abs() < 1e-12);
}

#[test]
fn moving_branch_phase_difference_is_flux_phase() {
    let k = Constants::natural();
    let grid = build_mode_grid(&ModeGridSpec::new(4.0, 4).with_coupling_scale(0.1), &k).unwrap();
    let els = Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap().current_elements(&k).unwrap();
    let start = charge().at(Vec3::new(-0.5, 0.0, 0.0));
    let upper = PathSpec::arc(Vec3::zeros(), 0.5, PI, -PI);
    let lower = PathSpec::arc(Vec3::zeros(), 0.5, PI, PI);
    let spec = QuadratureSpec::new(1e-10, 1e-14, 200).unwrap();
    let b = branch_evolution_along(&grid, &start, &upper, &lower, &els, 4.0, &k, &spec).unwrap();
    let loop_phase = path_phase(
        &GaugeField::coulomb_solenoid(&Solenoid::new(0.1, 1.0, Vec3::zeros()).unwrap()),
        &PathSpec::circle(Vec3::zeros(), 0.5, 1),
        &start,
        &k,
        &spec,
    )
    .unwrap()
    .phase;
    assert!((b.delta_phi - loop_phase).abs() < 1e-3, "{} vs {loop_phase}", b.delta_phi);
    let rep = reduced_density_matrix(&b);
    assert!(rep.overlap_modulus > 0.99);
    assert!((rep.offdiag_phase - b.delta_phi + b.log_overlap.im).abs() < 1e-12);
}

fn branches_from(alpha_l: Vec<Complex64>, alpha_r: Vec<Complex64>, dphi: f64) -> BranchStates {
    let log_overlap = coherent_log_overlap(&alpha_l, &alpha_r);
    BranchStates {
        alpha_l,
        alpha_r,
        phi_l: 0.0,
        phi_r: dphi,
        delta_phi: dphi,
        overlap: log_overlap.exp(),
        log_overlap,
        tau: 1.0,
        model: "test",
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarizations_are_transverse(nx in -40i32..40, ny in -40i32..40, nz in -40i32..40) {
        prop_assume!((nx, ny, nz) != (0, 0, 0));
        let n = [nx, ny, nz];
        let kh = Vec3::new(nx as f64, ny as f64, nz as f64).normalize();
        let [u1, u2] = polarizations(n);
        prop_assert!(kh.dot(&u1).abs() < 1e-12 && kh.dot(&u2).abs() < 1e-12 && u1.dot(&u2).abs() < 1e-12);
        prop_assert_eq!(polarizations([-nx, -ny, -nz]), [u1, u2]);
    }

    #[test]
    fn random_hamiltonians_are_hermitian_and_unitary(
        re in prop::collection::vec(-1.0..1.0f64, 6),
        im in prop::collection::vec(-1.0..1.0f64, 6),
        omega in prop::collection::vec(0.5..5.0f64, 3),
        e_c in -1.0..1.0f64, e_s in -1.0..1.0f64, tau in 0.1..10.0f64,
    ) {
        let k = Constants::natural();
        let couplings: Vec<ModeCoupling> = (0..3)
            .map(|j| ModeCoupling {
                mode: j,
                pol: 0,
                omega: omega[j],
                m_c: Complex64::new(re[2 * j], im[2 * j]),
                m_s: Complex64::new(re[2 * j + 1], im[2 * j + 1]),
            })
            .collect();
        let space = TruncatedSpace::new(3, 2).unwrap();
        let h = hamiltonian_from_couplings(&couplings, &space, QubitEnergies { e_c, e_s }, &k).unwrap();
        prop_assert!(h.hermitian);
        let prop = Propagator::new(&h, &k).unwrap();
        let psi = DVector::from_fn(space.dimension(), |i, _| Complex64::new(1.0 + (i % 3) as f64, -((i % 5) as f64)));
        let psi = &psi / Complex64::new(psi.norm(), 0.0);
        prop_assert!((prop.apply(&psi, tau).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reduced_density_matrix_is_a_state(
        al in prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64), 1..8),
        shift in prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64), 8),
        dphi in -3.0..3.0f64,
    ) {
        let alpha_l: Vec<Complex64> = al.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let alpha_r: Vec<Complex64> = alpha_l.iter().zip(&shift).map(|(a, &(x, y))| a + Complex64::new(x, y)).collect();
        let dist: f64 = alpha_l.iter().zip(&alpha_r).map(|(l, r)| (l - r).norm_sqr()).sum();
        let b = branches_from(alpha_l, alpha_r, dphi);
        prop_assert!((b.overlap.norm() - (-0.5 * dist).exp()).abs() < 1e-12);
        prop_assert!(b.overlap.norm() <= 1.0);
        let rep = reduced_density_matrix(&b);
        let rho = rep.rho_c;
        prop_assert!(((rho[0][0] + rho[1][1]).re - 1.0).abs() < 1e-12);
        prop_assert!((rho[0][1] - rho[1][0].conj()).norm() < 1e-15);
        prop_assert!(rep.eigenvalues.iter().all(|l| (0.0..=1.0).contains(l)));
        prop_assert!(rep.entropy >= 0.0 && rep.entropy <= 2f64.ln() + 1e-12);
        // eigenvalues of the assembled matrix
        let det = (rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0]).re;
        prop_assert!((rep.eigenvalues[0] * rep.eigenvalues[1] - det).abs() < 1e-12);
    }
}
