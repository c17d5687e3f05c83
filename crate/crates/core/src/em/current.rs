use serde::{Deserialize, Serialize};

use crate::{Constants, Error, Result, Vec3};

/// A point current element carrying `I dl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentElement {
    pub position: Vec3,
    pub idl: Vec3,
}

/// Biot–Savart sum `μ0/4π Σ I dl / |r − x|`.
pub fn biot_savart_vector_potential(elements: &[CurrentElement], r: &Vec3, consts: &Constants) -> Result<Vec3> {
    let mut acc = Vec3::zeros();
    for e in elements {
        let dist = (r - e.position).norm();
        if dist == 0.0 {
            return Err(Error::CoincidentPoint(r.x, r.y, r.z));
        }
        acc += e.idl / dist;
    }
    Ok(consts.mu0_over_4pi() * acc)
}

/// Biot–Savart field `μ0/4π Σ I dl × (r − x) / |r − x|³`.
pub fn biot_savart_b_field(elements: &[CurrentElement], r: &Vec3, consts: &Constants) -> Result<Vec3> {
    let mut acc = Vec3::zeros();
    for e in elements {
        let d = r - e.position;
        let dist = d.norm();
        if dist == 0.0 {
            return Err(Error::CoincidentPoint(r.x, r.y, r.z));
        }
        acc += e.idl.cross(&d) / dist.powi(3);
    }
    Ok(consts.mu0_over_4pi() * acc)
}
