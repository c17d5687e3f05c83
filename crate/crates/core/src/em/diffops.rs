//! Central finite-difference gradient, divergence and curl.

use crate::Vec3;

/// Step `h = 1e-4 · max(scale, |r|)`.
pub fn step(r: &Vec3, scale: f64) -> f64 {
    1e-4 * scale.max(r.norm())
}

fn axis(i: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[i] = 1.0;
    e
}

/// `∂f/∂x_i` for every component of a vector field, as columns `[∂_x f, ∂_y f, ∂_z f]`.
fn jacobian_columns<F: Fn(&Vec3) -> Vec3>(f: &F, r: &Vec3, h: f64) -> [Vec3; 3] {
    std::array::from_fn(|i| {
        let e = axis(i) * h;
        (f(&(r + e)) - f(&(r - e))) / (2.0 * h)
    })
}

pub fn gradient<F: Fn(&Vec3) -> f64>(f: F, r: &Vec3, h: f64) -> Vec3 {
    Vec3::from_fn(|i, _| {
        let e = axis(i) * h;
        (f(&(r + e)) - f(&(r - e))) / (2.0 * h)
    })
}

pub fn divergence<F: Fn(&Vec3) -> Vec3>(f: F, r: &Vec3, h: f64) -> f64 {
    let [dx, dy, dz] = jacobian_columns(&f, r, h);
    dx.x + dy.y + dz.z
}

pub fn curl<F: Fn(&Vec3) -> Vec3>(f: F, r: &Vec3, h: f64) -> Vec3 {
    let [dx, dy, dz] = jacobian_columns(&f, r, h);
    Vec3::new(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
}
