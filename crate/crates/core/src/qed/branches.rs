use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::coupling::{analytic_phase, charge_amplitude};
use super::modes::ModeGrid;
use crate::em::{biot_savart_vector_potential, ChargeState, CurrentElement};
use crate::quadrature::{gk, integrate_line, PathSpec, QuadratureSpec};
use crate::{Constants, Error, Result, Vec3};

/// Photon states left behind by the two branches of the charge, modeled as
/// coherent displacements of the vacuum driven by the charge's coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchStates {
    /// Displacements per `(mode, polarization)`, mode-major.
    pub alpha_l: Vec<Complex64>,
    pub alpha_r: Vec<Complex64>,
    pub phi_l: f64,
    pub phi_r: f64,
    /// `φ_R − φ_L`.
    pub delta_phi: f64,
    /// `⟨χ_L|χ_R⟩`.
    pub overlap: Complex64,
    /// `ln ⟨χ_L|χ_R⟩`, kept for `1 − |overlap|` below rounding.
    pub log_overlap: Complex64,
    pub tau: f64,
    pub model: &'static str,
}

const MODEL: &str = "coherent displacement, linear response";

fn check_pair(l: &ChargeState, r: &ChargeState) -> Result<()> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !(close(l.charge, r.charge) && close(l.mass, r.mass) && close(l.velocity.norm(), r.velocity.norm())) {
        return Err(Error::Config("both branches must share charge, mass and speed".into()));
    }
    Ok(())
}

/// `ln ⟨α_L|α_R⟩ = Σ (−½|α_L|² − ½|α_R|² + α_L* α_R)`.
pub fn coherent_log_overlap(alpha_l: &[Complex64], alpha_r: &[Complex64]) -> Complex64 {
    alpha_l
        .iter()
        .zip(alpha_r)
        .map(|(l, r)| -0.5 * (l.norm_sqr() + r.norm_sqr()) + l.conj() * r)
        .sum()
}

fn assemble(alpha_l: Vec<Complex64>, alpha_r: Vec<Complex64>, phi_l: f64, phi_r: f64, tau: f64) -> BranchStates {
    let log_overlap = coherent_log_overlap(&alpha_l, &alpha_r);
    BranchStates {
        alpha_l,
        alpha_r,
        phi_l,
        phi_r,
        delta_phi: phi_r - phi_l,
        overlap: log_overlap.exp(),
        log_overlap,
        tau,
        model: MODEL,
    }
}

/// Static displacement `M_C* (1 − e^{−iωτ}) / ħω` for every oscillator.
fn static_alphas(grid: &ModeGrid, ch: &ChargeState, tau: f64, hbar: f64) -> Vec<Complex64> {
    grid.modes
        .par_iter()
        .flat_map_iter(|m| {
            let h = (Complex64::new(1.0, 0.0) - Complex64::cis(-m.omega * tau)) / (hbar * m.omega);
            (0..2).map(move |pol| charge_amplitude(grid, m, pol, ch).conj() * h)
        })
        .collect()
}

/// Branches that sit at their positions with fixed velocity for `τ`.
///
/// The phases are `analytic_phase` at each position.
pub fn branch_evolution(
    grid: &ModeGrid,
    ch_l: &ChargeState,
    ch_r: &ChargeState,
    elements: &[CurrentElement],
    tau: f64,
    consts: &Constants,
) -> Result<BranchStates> {
    check_pair(ch_l, ch_r)?;
    let phi_l = analytic_phase(ch_l, elements, tau, consts)?;
    let phi_r = analytic_phase(ch_r, elements, tau, consts)?;
    let alpha_l = static_alphas(grid, ch_l, tau, consts.hbar);
    let alpha_r = static_alphas(grid, ch_r, tau, consts.hbar);
    Ok(assemble(alpha_l, alpha_r, phi_l, phi_r, tau))
}

struct Sample {
    weight: f64,
    t: f64,
    state: ChargeState,
}

fn trajectory(ch: &ChargeState, path: &PathSpec, tau: f64, panels: usize) -> Vec<Sample> {
    let mut out = Vec::with_capacity(21 * panels);
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (s, w) in gk::nodes(a, b).into_iter().zip(gk::weights(a, b)) {
            let state = ch.at(path.curve(s)).with_velocity(path.derivative(s) / tau);
            out.push(Sample { weight: w * tau, t: s * tau, state });
        }
    }
    out
}

/// `α(τ) = (i/ħ) ∫₀^τ M_C*(t) e^{−iω(τ−t)} dt` along a sampled trajectory.
fn moving_alphas(grid: &ModeGrid, samples: &[Sample], tau: f64, hbar: f64) -> Vec<Complex64> {
    grid.modes
        .par_iter()
        .flat_map_iter(|m| {
            let mut acc = [Complex64::new(0.0, 0.0); 2];
            for s in samples {
                let rot = s.weight * Complex64::cis(-m.omega * (tau - s.t));
                for (pol, a) in acc.iter_mut().enumerate() {
                    *a += charge_amplitude(grid, m, pol, &s.state).conj() * rot;
                }
            }
            acc.map(|a| Complex64::new(0.0, 1.0 / hbar) * a)
        })
        .collect()
}

/// Branches that traverse `path_l` and `path_r` at uniform parameter rate
/// during `τ`, starting from `ch`'s charge and mass.
///
/// Each phase is `−(q/ħ) ∫ A·dl` of the elements' Biot–Savart potential
/// along its path, the time integral of `𝓔/ħ` for the instantaneous velocity.
#[allow(clippy::too_many_arguments)]
pub fn branch_evolution_along(
    grid: &ModeGrid,
    ch: &ChargeState,
    path_l: &PathSpec,
    path_r: &PathSpec,
    elements: &[CurrentElement],
    tau: f64,
    consts: &Constants,
    spec: &QuadratureSpec,
) -> Result<BranchStates> {
    if !(tau > 0.0) {
        return Err(Error::Config(format!("branch duration must be positive, got {tau}")));
    }
    let field = |r: &Vec3| biot_savart_vector_potential(elements, r, consts);
    let phase = |p: &PathSpec| -> Result<f64> { Ok(-ch.charge / consts.hbar * integrate_line(field, p, spec)?.value) };
    let (phi_l, phi_r) = (phase(path_l)?, phase(path_r)?);

    let k_max = grid.modes.iter().map(|m| m.k.norm()).fold(0.0, f64::max);
    let w_max = grid.modes.iter().map(|m| m.omega).fold(0.0, f64::max);
    let longest = path_l.length().max(path_r.length());
    // at most two radians of mode phase per 21-point panel
    let panels = (((k_max * longest + w_max * tau) / 2.0).ceil() as usize).max(4);
    let alpha_l = moving_alphas(grid, &trajectory(ch, path_l, tau, panels), tau, consts.hbar);
    let alpha_r = moving_alphas(grid, &trajectory(ch, path_r, tau, panels), tau, consts.hbar);
    Ok(assemble(alpha_l, alpha_r, phi_l, phi_r, tau))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementReport {
    /// `ρ_C` in the basis `(|L⟩, |R⟩)`.
    pub rho_c: [[Complex64; 2]; 2],
    /// `arg ⟨L|ρ_C|R⟩`.
    pub offdiag_phase: f64,
    pub offdiag_magnitude: f64,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    /// Ascending.
    pub eigenvalues: [f64; 2],
    pub overlap_modulus: f64,
    pub delta_phi_reference: f64,
}

fn wrap(angle: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    angle - two_pi * (angle / two_pi).round()
}

/// Trace out the photons from `(e^{−iφ_L}|L⟩|χ_L⟩ + e^{−iφ_R}|R⟩|χ_R⟩)/√2`.
///
/// The `|L⟩⟨R|` entry is `½ e^{iΔφ} ⟨χ_R|χ_L⟩`.
pub fn reduced_density_matrix(branches: &BranchStates) -> EntanglementReport {
    let coherence = Complex64::cis(branches.delta_phi) * branches.overlap.conj();
    let half = Complex64::new(0.5, 0.0);
    let rho_c = [[half, 0.5 * coherence], [0.5 * coherence.conj(), half]];
    let modulus = branches.log_overlap.re.exp();
    let small = (-0.5 * branches.log_overlap.re.exp_m1()).clamp(0.0, 0.5);
    let eigenvalues = [small, 1.0 - small];
    let entropy = eigenvalues.iter().filter(|&&l| l > 0.0).map(|l| -l * l.ln()).sum::<f64>().max(0.0);
    EntanglementReport {
        rho_c,
        offdiag_phase: wrap(branches.delta_phi - branches.log_overlap.im),
        offdiag_magnitude: 0.5 * modulus,
        entropy,
        eigenvalues,
        overlap_modulus: modulus,
        delta_phi_reference: branches.delta_phi,
    }
}
