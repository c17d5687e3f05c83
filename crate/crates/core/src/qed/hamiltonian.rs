use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupling::{couplings_for, ModeCoupling};
use super::modes::ModeGrid;
use super::space::{qz, TruncatedSpace};
use crate::em::{ChargeState, CurrentElement};
use crate::{Constants, Error, Result};

/// Largest composite dimension accepted for dense evolution.
pub const DIMENSION_CAP: usize = 4096;

/// Level splittings of the two qubits, `E_C q_z^(C) + E_S q_z^(S)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitEnergies {
    pub e_c: f64,
    pub e_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: DMatrix<Complex64>,
    pub hermitian: bool,
    /// `max |H − H†|`.
    pub hermiticity_residual: f64,
}

impl OperatorMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Self {
        let residual = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        Self { hermitian: residual <= 1e-12 * scale, hermiticity_residual: residual, matrix }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Dense `H` of the charge qubit, the source qubit and the active oscillators:
///
/// `E_C q_z^C + E_S q_z^S + Σ ħω a†a − Σ (q_z^C M_C + q_z^S M_S) a + h.c.`
///
/// Oscillator `j` is the `j`-th `(mode, polarization)` pair of the grid.
pub fn build_hamiltonian(
    grid: &ModeGrid,
    ch: &ChargeState,
    elements: &[CurrentElement],
    space: &TruncatedSpace,
    qubits: QubitEnergies,
    consts: &Constants,
) -> Result<OperatorMatrix> {
    check_dimension(space)?;
    let modes_needed = space.n_modes_active.div_ceil(2);
    if modes_needed > grid.modes.len() {
        return Err(Error::Config(format!(
            "{} active oscillators need {modes_needed} modes, the grid has {}",
            space.n_modes_active,
            grid.modes.len()
        )));
    }
    let couplings = couplings_for(grid, modes_needed, ch, elements)?;
    hamiltonian_from_couplings(&couplings[..space.n_modes_active], space, qubits, consts)
}

fn check_dimension(space: &TruncatedSpace) -> Result<()> {
    if space.dimension() > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim: space.dimension(), cap: DIMENSION_CAP });
    }
    Ok(())
}

/// [`build_hamiltonian`] from precomputed couplings, one per active oscillator.
pub fn hamiltonian_from_couplings(
    couplings: &[ModeCoupling],
    space: &TruncatedSpace,
    qubits: QubitEnergies,
    consts: &Constants,
) -> Result<OperatorMatrix> {
    check_dimension(space)?;
    if couplings.len() != space.n_modes_active {
        return Err(Error::Config(format!(
            "expected {} oscillator couplings, got {}",
            space.n_modes_active,
            couplings.len()
        )));
    }
    let dim = space.dimension();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let mut lowered = Vec::with_capacity(space.n_modes_active);
    for i in 0..dim {
        let (c, s, f) = space.decompose(i);
        let occ = space.fock_state(f);
        let free: f64 = couplings.iter().zip(occ).map(|(m, &n)| consts.hbar * m.omega * n as f64).sum();
        h[(i, i)] = Complex64::new(qubits.e_c * qz(c) + qubits.e_s * qz(s) + free, 0.0);
        for (j, m) in couplings.iter().enumerate() {
            if occ[j] == 0 {
                continue;
            }
            lowered.clear();
            lowered.extend_from_slice(occ);
            lowered[j] -= 1;
            let Some(fl) = space.fock_index(&lowered) else { continue };
            let target = space.index(c, s, fl);
            // ⟨n−1| a |n⟩ = √n
            let amp = -(qz(c) * m.m_c + qz(s) * m.m_s) * (occ[j] as f64).sqrt();
            h[(target, i)] += amp;
            h[(i, target)] += amp.conj();
        }
    }
    Ok(OperatorMatrix::new(h))
}

struct Block {
    indices: Vec<usize>,
    eigen: SymmetricEigen<Complex64, nalgebra::Dyn>,
}

/// `exp(−iHτ/ħ)` through eigendecompositions of the connected blocks of `H`.
pub struct Propagator {
    blocks: Vec<Block>,
    dimension: usize,
    hbar: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Propagator {
    pub fn new(h: &OperatorMatrix, consts: &Constants) -> Result<Self> {
        if !h.hermitian {
            return Err(Error::NotHermitian(h.hermiticity_residual));
        }
        let n = h.dimension();
        let mut parent: Vec<usize> = (0..n).collect();
        for j in 0..n {
            for i in 0..j {
                if h.matrix[(i, j)] != Complex64::new(0.0, 0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|indices| {
                let sub = DMatrix::from_fn(indices.len(), indices.len(), |r, c| h.matrix[(indices[r], indices[c])]);
                Block { eigen: SymmetricEigen::new(sub), indices }
            })
            .collect();
        Ok(Self { blocks, dimension: n, hbar: consts.hbar })
    }

    /// Real spectrum of `H`, block by block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.eigen.eigenvalues.iter().copied()).collect()
    }

    pub fn apply(&self, psi: &DVector<Complex64>, tau: f64) -> DVector<Complex64> {
        assert_eq!(psi.len(), self.dimension, "state dimension mismatch");
        let mut out = DVector::zeros(self.dimension);
        for b in &self.blocks {
            let sub = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i]));
            if sub.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            let v = &b.eigen.eigenvectors;
            let mut coeffs = v.adjoint() * sub;
            for (c, e) in coeffs.iter_mut().zip(b.eigen.eigenvalues.iter()) {
                *c *= Complex64::cis(-e * tau / self.hbar);
            }
            for (&i, z) in b.indices.iter().zip((v * coeffs).iter()) {
                out[i] = *z;
            }
        }
        out
    }
}

/// A complex amplitude with its modulus and argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub value: Complex64,
    pub modulus: f64,
    pub argument: f64,
}

impl From<Complex64> for Amplitude {
    fn from(value: Complex64) -> Self {
        Self { value, modulus: value.norm(), argument: value.arg() }
    }
}

fn basis(dim: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(dim);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// `⟨1|_C ⟨0|_F ⟨1|_S exp(−iHτ/ħ) |1⟩_C |0⟩_F |1⟩_S`.
pub fn evolve_amplitude(h: &OperatorMatrix, space: &TruncatedSpace, tau: f64, consts: &Constants) -> Result<Amplitude> {
    let prop = Propagator::new(h, consts)?;
    let i = space.index(1, 1, 0);
    Ok(prop.apply(&basis(space.dimension(), i), tau)[i].into())
}

/// Cross phase from exact evolution of the four qubit sectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactCrossPhase {
    /// `−arg(A₁₁ A₀₀ / (A₁₀ A₀₁)) / 4`; qubit energies and self-energies cancel.
    pub phase: f64,
    /// Vacuum amplitudes indexed by `2c + s`.
    pub amplitudes: [Complex64; 4],
    /// Largest `| ‖ψ(τ)‖ − 1 |` over the four evolved states.
    pub norm_error: f64,
}

pub fn exact_cross_phase(h: &OperatorMatrix, space: &TruncatedSpace, tau: f64, consts: &Constants) -> Result<ExactCrossPhase> {
    let prop = Propagator::new(h, consts)?;
    let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
    let mut norm_error: f64 = 0.0;
    for (sector, amp) in amplitudes.iter_mut().enumerate() {
        let i = space.index((sector / 2) as u8, (sector % 2) as u8, 0);
        let psi = prop.apply(&basis(space.dimension(), i), tau);
        norm_error = norm_error.max((psi.norm() - 1.0).abs());
        *amp = psi[i];
    }
    let ratio = amplitudes[3] * amplitudes[0] / (amplitudes[2] * amplitudes[1]);
    Ok(ExactCrossPhase { phase: -ratio.arg() / 4.0, amplitudes, norm_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{FiniteModel, Solenoid};
    use crate::qed::coupling::perturbative_cross_phase;
    use crate::qed::modes::{build_mode_grid, ModeGridSpec};
    use crate::Vec3;

    fn inputs(scale: f64) -> (ModeGrid, ChargeState, Vec<CurrentElement>, Constants) {
        let k = Constants::natural();
        let grid = build_mode_grid(&ModeGridSpec::new(2.0, 1).with_coupling_scale(scale), &k).unwrap();
        let sol = Solenoid::new(0.1, 1.0, Vec3::zeros())
            .unwrap()
            .with_finite_model(FiniteModel { length: 0.2, n_rings: 4, n_segments: 32 });
        let ch = ChargeState::new(1.0, 1.0, Vec3::new(0.5, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let els = sol.current_elements(&k).unwrap();
        (grid, ch, els, k)
    }

    #[test]
    fn free_hamiltonian_is_diagonal() {
        let (grid, ch, els, k) = inputs(1.0);
        let space = TruncatedSpace::new(3, 2).unwrap();
        let q = QubitEnergies { e_c: 0.3, e_s: -0.7 };
        let h = build_hamiltonian(&grid, &ch.with_velocity(Vec3::zeros()), &els, &space, q, &k).unwrap();
        // a still charge still leaves the source coupled; silence it too
        let couplings: Vec<_> = super::couplings_for(&grid, 2, &ch.with_velocity(Vec3::zeros()), &els)
            .unwrap()
            .into_iter()
            .take(3)
            .map(|mut c| {
                c.m_s = Complex64::new(0.0, 0.0);
                c
            })
            .collect();
        let free = hamiltonian_from_couplings(&couplings, &space, q, &k).unwrap();
        for i in 0..space.dimension() {
            for j in 0..space.dimension() {
                if i != j {
                    assert_eq!(free.matrix[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
            let (c, s, f) = space.decompose(i);
            let photons: f64 = space.fock_state(f).iter().zip(&couplings).map(|(&n, m)| n as f64 * m.omega).sum();
            assert!((free.matrix[(i, i)].re - (0.3 * qz(c) - 0.7 * qz(s) + photons)).abs() < 1e-14);
        }
        assert!(h.hermitian);
    }

    #[test]
    fn hermitian_with_small_residual() {
        let (grid, ch, els, k) = inputs(1.0);
        let space = TruncatedSpace::new(4, 2).unwrap();
        let h = build_hamiltonian(&grid, &ch, &els, &space, QubitEnergies::default(), &k).unwrap();
        assert!(h.hermitian && h.hermiticity_residual <= 1e-12 * h.matrix.camax().max(1.0));
        assert_eq!(TruncatedSpace::new(1, 1).unwrap().dimension(), 8);
    }

    #[test]
    fn dimension_cap_enforced() {
        let (grid, ch, els, k) = inputs(1.0);
        let space = TruncatedSpace::new(10, 5).unwrap();
        let err = build_hamiltonian(&grid, &ch, &els, &space, QubitEnergies::default(), &k).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { cap: DIMENSION_CAP, .. }));
    }

    #[test]
    fn non_hermitian_rejected() {
        let space = TruncatedSpace::new(1, 1).unwrap();
        let mut m = DMatrix::<Complex64>::zeros(8, 8);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let h = OperatorMatrix::new(m);
        assert!(!h.hermitian);
        assert!(matches!(evolve_amplitude(&h, &space, 1.0, &Constants::natural()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zero_coupling_amplitude_is_free_phase() {
        let (grid, ch, els, k) = inputs(1.0);
        let space = TruncatedSpace::new(2, 2).unwrap();
        let mut cs = super::couplings_for(&grid, 1, &ch, &els).unwrap();
        for c in &mut cs {
            c.m_c = Complex64::new(0.0, 0.0);
            c.m_s = Complex64::new(0.0, 0.0);
        }
        let q = QubitEnergies { e_c: 0.4, e_s: 0.25 };
        let h = hamiltonian_from_couplings(&cs, &space, q, &k).unwrap();
        let a = evolve_amplitude(&h, &space, 1.3, &k).unwrap();
        let expected = Complex64::cis(-(0.4 + 0.25) * 1.3);
        assert!((a.value - expected).norm() < 1e-13);
        assert!((a.modulus - 1.0).abs() < 1e-13);
    }

    #[test]
    fn exact_matches_perturbative_at_weak_coupling() {
        let (grid, ch, els, k) = inputs(0.5);
        let space = TruncatedSpace::new(4, 2).unwrap();
        let h = build_hamiltonian(&grid, &ch, &els, &space, QubitEnergies { e_c: 0.2, e_s: 0.1 }, &k).unwrap();
        let exact = exact_cross_phase(&h, &space, 1.0, &k).unwrap();
        let cs = super::couplings_for(&grid, 2, &ch, &els).unwrap();
        let pert = perturbative_cross_phase(&cs[..4], 1.0, &k);
        assert!(exact.norm_error < 1e-10);
        assert!((exact.phase - pert).abs() < 1e-3 * pert.abs(), "{} vs {pert}", exact.phase);
    }

    #[test]
    fn leakage_grows_with_coupling() {
        let mut last = 1.0;
        for s in [0.5, 1.0, 2.0, 4.0] {
            let (grid, ch, els, k) = inputs(s);
            let space = TruncatedSpace::new(4, 2).unwrap();
            let h = build_hamiltonian(&grid, &ch, &els, &space, QubitEnergies::default(), &k).unwrap();
            let a = evolve_amplitude(&h, &space, 1.0, &k).unwrap();
            assert!(a.modulus < last && a.modulus <= 1.0);
            last = a.modulus;
        }
    }
}
