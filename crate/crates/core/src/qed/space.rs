use std::collections::HashMap;

use serde::Serialize;

use crate::{Error, Result};

/// Two qubits times a photon Fock space truncated at total occupation
/// `photon_cutoff` over `n_modes_active` oscillators.
///
/// Fock states are enumerated by total occupation, then lexicographically
/// in the occupation tuple. The composite index of `|c⟩_C |s⟩_S |f⟩_F` is
/// `(2c + s) · fock_dim + f`.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedSpace {
    pub n_modes_active: usize,
    pub photon_cutoff: usize,
    fock: Vec<Vec<u8>>,
    #[serde(skip)]
    lookup: HashMap<Vec<u8>, usize>,
}

fn compositions(total: usize, parts: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if parts == 1 {
        prefix.push(total as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first as u8);
        compositions(total - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl TruncatedSpace {
    pub fn new(n_modes_active: usize, photon_cutoff: usize) -> Result<Self> {
        if n_modes_active == 0 {
            return Err(Error::Config("at least one active mode is required".into()));
        }
        if photon_cutoff > u8::MAX as usize {
            return Err(Error::Config(format!("photon_cutoff {photon_cutoff} is too large")));
        }
        let mut fock = Vec::new();
        for total in 0..=photon_cutoff {
            compositions(total, n_modes_active, &mut Vec::with_capacity(n_modes_active), &mut fock);
        }
        let lookup = fock.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        Ok(Self { n_modes_active, photon_cutoff, fock, lookup })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock.len()
    }

    pub fn dimension(&self) -> usize {
        4 * self.fock.len()
    }

    pub fn fock_state(&self, f: usize) -> &[u8] {
        &self.fock[f]
    }

    pub fn fock_index(&self, occupation: &[u8]) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    /// Composite index of `|charge⟩_C |source⟩_S |f⟩_F`, qubit levels 0 or 1.
    pub fn index(&self, charge: u8, source: u8, f: usize) -> usize {
        (2 * charge as usize + source as usize) * self.fock.len() + f
    }

    /// `(charge, source, fock)` of a composite index.
    pub fn decompose(&self, i: usize) -> (u8, u8, usize) {
        let sector = i / self.fock.len();
        ((sector / 2) as u8, (sector % 2) as u8, i % self.fock.len())
    }
}

/// Eigenvalue of `q_z` on a qubit level: `+1` on `|1⟩`, `−1` on `|0⟩`.
pub fn qz(level: u8) -> f64 {
    if level == 1 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn dimensions() {
        assert_eq!(TruncatedSpace::new(1, 1).unwrap().dimension(), 8);
        for (n, c) in [(2, 2), (4, 1), (8, 2), (3, 4)] {
            let sp = TruncatedSpace::new(n, c).unwrap();
            assert_eq!(sp.fock_dim(), binomial(n + c, c), "n = {n}, cutoff = {c}");
        }
    }

    #[test]
    fn enumeration_order() {
        let sp = TruncatedSpace::new(2, 2).unwrap();
        let states: Vec<&[u8]> = (0..sp.fock_dim()).map(|i| sp.fock_state(i)).collect();
        assert_eq!(states, vec![&[0, 0][..], &[0, 1], &[1, 0], &[0, 2], &[1, 1], &[2, 0]]);
        for i in 0..sp.fock_dim() {
            assert_eq!(sp.fock_index(sp.fock_state(i)), Some(i));
        }
        assert_eq!(sp.fock_index(&[3, 0]), None);
    }

    #[test]
    fn composite_index_round_trip() {
        let sp = TruncatedSpace::new(3, 2).unwrap();
        for i in 0..sp.dimension() {
            let (c, s, f) = sp.decompose(i);
            assert_eq!(sp.index(c, s, f), i);
        }
        assert_eq!(sp.index(1, 1, 0), 3 * sp.fock_dim());
    }
}
