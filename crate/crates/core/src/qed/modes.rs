use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Constants, Error, Result, Vec3};

/// Parameters of a periodic-box mode grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGridSpec {
    pub box_length: f64,
    /// Largest `|n_i|` per axis.
    pub index_range: u32,
    #[serde(default)]
    pub cutoff_omega: Option<f64>,
    /// Multiplies every `g_k`; 1 is the physical coupling.
    #[serde(default = "one")]
    pub coupling_scale: f64,
    /// Gaussian charge radius `σ`; the charge couples through `exp(−k²σ²/2)`.
    #[serde(default = "default_charge_radius")]
    pub charge_radius: f64,
}

fn one() -> f64 {
    1.0
}

fn default_charge_radius() -> f64 {
    0.1
}

impl ModeGridSpec {
    pub fn new(box_length: f64, index_range: u32) -> Self {
        Self { box_length, index_range, cutoff_omega: None, coupling_scale: 1.0, charge_radius: default_charge_radius() }
    }

    pub fn with_coupling_scale(mut self, s: f64) -> Self {
        self.coupling_scale = s;
        self
    }

    pub fn with_charge_radius(mut self, sigma: f64) -> Self {
        self.charge_radius = sigma;
        self
    }

    pub fn with_cutoff(mut self, omega: f64) -> Self {
        self.cutoff_omega = Some(omega);
        self
    }
}

/// One plane-wave mode with its two transverse polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub n: [i32; 3],
    pub k: Vec3,
    pub omega: f64,
    pub g: f64,
    pub pol: [Vec3; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeGrid {
    pub box_length: f64,
    pub index_range: u32,
    pub cutoff_omega: Option<f64>,
    pub coupling_scale: f64,
    pub charge_radius: f64,
    pub modes: Vec<Mode>,
}

impl ModeGrid {
    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Shortest resolved wavelength, `L / index_range`.
    pub fn resolution(&self) -> f64 {
        self.box_length / self.index_range as f64
    }

    /// Number of `(mode, polarization)` oscillators.
    pub fn oscillators(&self) -> usize {
        2 * self.modes.len()
    }

    /// `exp(−k²σ²/2)` for the charge's Gaussian profile.
    pub fn form_factor(&self, k: &Vec3) -> f64 {
        (-0.5 * k.norm_squared() * self.charge_radius * self.charge_radius).exp()
    }
}

/// Polarization pair shared by `k` and `−k`.
///
/// Built from the representative of `±n` whose first nonzero component is
/// positive: `u1 = ẑ × k̂ / |ẑ × k̂|`, or `x̂` when `k ∥ ẑ`, then `u2 = k̂ × u1`.
/// Sharing the pair makes the field Hermitian mode by mode:
/// `M(−k, λ) = M(k, λ)*`.
pub fn polarizations(n: [i32; 3]) -> [Vec3; 2] {
    let first = n.iter().copied().find(|&c| c != 0).unwrap_or(1);
    let sign = if first > 0 { 1.0 } else { -1.0 };
    let khat = (sign * Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64)).normalize();
    let u1 = if n[0] == 0 && n[1] == 0 { Vec3::x() } else { Vec3::z().cross(&khat).normalize() };
    [u1, khat.cross(&u1)]
}

/// All `n ≠ 0` with `|n_i| ≤ index_range` and `ω ≤ cutoff`, ordered by
/// `|n|²` and then lexicographically.
pub fn build_mode_grid(spec: &ModeGridSpec, consts: &Constants) -> Result<ModeGrid> {
    let ModeGridSpec { box_length, index_range, cutoff_omega, coupling_scale, charge_radius } = *spec;
    if !(box_length > 0.0 && box_length.is_finite()) {
        return Err(Error::Config(format!("box_length must be positive, got {box_length}")));
    }
    if index_range < 1 {
        return Err(Error::Config("index_range must be at least 1".into()));
    }
    if !(coupling_scale.is_finite() && coupling_scale > 0.0) {
        return Err(Error::Config(format!("coupling_scale must be positive, got {coupling_scale}")));
    }
    if !(charge_radius.is_finite() && charge_radius >= 0.0) {
        return Err(Error::Config(format!("charge_radius must be non-negative, got {charge_radius}")));
    }
    let volume = box_length.powi(3);
    let r = index_range as i32;
    let mut ns = Vec::with_capacity(((2 * r + 1) as usize).pow(3));
    for i in -r..=r {
        for j in -r..=r {
            for l in -r..=r {
                if (i, j, l) != (0, 0, 0) {
                    ns.push([i, j, l]);
                }
            }
        }
    }
    ns.sort_by_key(|n| (n[0] * n[0] + n[1] * n[1] + n[2] * n[2], *n));

    let modes: Vec<Mode> = ns
        .into_iter()
        .filter_map(|n| {
            let k = 2.0 * PI / box_length * Vec3::new(n[0] as f64, n[1] as f64, n[2] as f64);
            let omega = consts.c * k.norm();
            if cutoff_omega.is_some_and(|w| omega > w) {
                return None;
            }
            let g = coupling_scale * (consts.hbar / (2.0 * consts.eps0 * omega * volume)).sqrt();
            Some(Mode { n, k, omega, g, pol: polarizations(n) })
        })
        .collect();
    if modes.is_empty() {
        return Err(Error::Config(format!("mode grid is empty after the cutoff {cutoff_omega:?}")));
    }
    Ok(ModeGrid { box_length, index_range, cutoff_omega, coupling_scale, charge_radius, modes })
}
