use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::modes::{Mode, ModeGrid};
use crate::em::{biot_savart_vector_potential, ChargeState, CurrentElement};
use crate::{Constants, Error, Result, Vec3};

/// Amplitudes multiplying `a_kλ` in the charge and source interaction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoupling {
    pub mode: usize,
    pub pol: usize,
    pub omega: f64,
    /// `g (q/m) p·u e^{ik·r_c} F(k)`.
    pub m_c: Complex64,
    /// `g Σ I dl·u e^{ik·x}`.
    pub m_s: Complex64,
}

impl ModeCoupling {
    /// Second-order cross shift `−2 Re(M_C M_S*) / ħω` of the `|1⟩_C|1⟩_S` vacuum.
    pub fn cross_energy(&self, hbar: f64) -> f64 {
        -2.0 * (self.m_c * self.m_s.conj()).re / (hbar * self.omega)
    }
}

fn source_sum(k: &Vec3, elements: &[CurrentElement]) -> [Complex64; 3] {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for e in elements {
        let phase = Complex64::cis(k.dot(&e.position));
        for (a, c) in acc.iter_mut().zip(e.idl.iter()) {
            *a += c * phase;
        }
    }
    acc
}

pub(crate) fn charge_amplitude(grid: &ModeGrid, mode: &Mode, pol: usize, ch: &ChargeState) -> Complex64 {
    let u = &mode.pol[pol];
    let weight = mode.g * ch.charge / ch.mass * ch.momentum().dot(u) * grid.form_factor(&mode.k);
    weight * Complex64::cis(mode.k.dot(&ch.position))
}

fn mode_pair(grid: &ModeGrid, index: usize, ch: &ChargeState, elements: &[CurrentElement]) -> [ModeCoupling; 2] {
    let mode = &grid.modes[index];
    let s = source_sum(&mode.k, elements);
    std::array::from_fn(|pol| {
        let u = &mode.pol[pol];
        let m_s = mode.g * (s[0] * u.x + s[1] * u.y + s[2] * u.z);
        ModeCoupling { mode: index, pol, omega: mode.omega, m_c: charge_amplitude(grid, mode, pol, ch), m_s }
    })
}

/// Couplings of the first `count` modes of `grid`, mode-major.
pub(crate) fn couplings_for(
    grid: &ModeGrid,
    count: usize,
    ch: &ChargeState,
    elements: &[CurrentElement],
) -> Result<Vec<ModeCoupling>> {
    if elements.is_empty() {
        return Err(Error::Config("the source needs at least one current element".into()));
    }
    let count = count.min(grid.modes.len());
    Ok((0..count).into_par_iter().flat_map_iter(|i| mode_pair(grid, i, ch, elements)).collect())
}

/// `(M_C, M_S)` for every `(k, λ)` of the grid, mode-major.
pub fn coupling_amplitudes(
    grid: &ModeGrid,
    ch: &ChargeState,
    elements: &[CurrentElement],
    _consts: &Constants,
) -> Result<Vec<ModeCoupling>> {
    couplings_for(grid, grid.modes.len(), ch, elements)
}

/// Secular second-order phase from the mode sum, with convergence metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderPhase {
    /// `𝓔_cross τ / ħ`.
    pub phase: f64,
    pub cross_energy: f64,
    /// `−Σ |M_C|² / ħω`.
    pub self_energy_charge: f64,
    /// `−Σ |M_S|² / ħω`.
    pub self_energy_source: f64,
    /// `(self_energy_charge + self_energy_source) τ / ħ`, the global phase ξ.
    pub xi: f64,
    pub tau: f64,
    pub n_modes: usize,
    pub box_length: f64,
    pub index_range: u32,
    /// `L / index_range`.
    pub resolution: f64,
    /// Smallest distance from the charge to a current element.
    pub min_separation: f64,
    /// False when some element lies within one resolution length of the charge.
    pub resolved: bool,
}

/// Second-order phase of `|1⟩_C|1⟩_S` from the cross term of the mode sum.
///
/// The sign follows the amplitude convention `exp(−i(ξ + φ))`, so that
/// `φ = 𝓔 τ / ħ` and a static charge with `𝓔 = −q v·A` picks up
/// `−(q/ħ) v·A τ`.
pub fn second_order_phase(
    grid: &ModeGrid,
    ch: &ChargeState,
    elements: &[CurrentElement],
    tau: f64,
    consts: &Constants,
) -> Result<SecondOrderPhase> {
    let hbar = consts.hbar;
    let couplings = coupling_amplitudes(grid, ch, elements, consts)?;
    let terms: Vec<[f64; 3]> = couplings
        .par_iter()
        .map(|c| {
            let w = hbar * c.omega;
            [c.cross_energy(hbar), -c.m_c.norm_sqr() / w, -c.m_s.norm_sqr() / w]
        })
        .collect();
    let mut sums = [0.0; 3];
    for t in &terms {
        for (s, v) in sums.iter_mut().zip(t) {
            *s += v;
        }
    }
    let [cross, self_c, self_s] = sums;
    let min_separation = elements.iter().map(|e| (ch.position - e.position).norm()).fold(f64::INFINITY, f64::min);
    Ok(SecondOrderPhase {
        phase: cross * tau / hbar,
        cross_energy: cross,
        self_energy_charge: self_c,
        self_energy_source: self_s,
        xi: (self_c + self_s) * tau / hbar,
        tau,
        n_modes: grid.modes.len(),
        box_length: grid.box_length,
        index_range: grid.index_range,
        resolution: grid.resolution(),
        min_separation,
        resolved: min_separation > grid.resolution(),
    })
}

/// Second-order cross phase at finite `τ`, including the transient:
/// `Σ [𝓔_k τ/ħ + 2 Re(M_C M_S*) sin(ωτ) / (ħω)²]`.
pub fn perturbative_cross_phase(couplings: &[ModeCoupling], tau: f64, consts: &Constants) -> f64 {
    couplings
        .iter()
        .map(|c| {
            let w = consts.hbar * c.omega;
            let re = 2.0 * (c.m_c * c.m_s.conj()).re;
            -re / w * tau / consts.hbar + re * (c.omega * tau).sin() / (w * w)
        })
        .sum()
}

/// `𝓔 = −q v·A_elements(r_c)` with the Biot–Savart potential of the elements.
pub fn interaction_energy(ch: &ChargeState, elements: &[CurrentElement], consts: &Constants) -> Result<f64> {
    Ok(-ch.charge * ch.velocity.dot(&biot_savart_vector_potential(elements, &ch.position, consts)?))
}

/// Continuum limit of [`second_order_phase`]: `𝓔 τ / ħ` with
/// `𝓔 = −(μ0/4π) q v·Σ I dl / |r_c − x|`.
pub fn analytic_phase(ch: &ChargeState, elements: &[CurrentElement], tau: f64, consts: &Constants) -> Result<f64> {
    Ok(interaction_energy(ch, elements, consts)? * tau / consts.hbar)
}
