//! Classical electromagnetic primitives: the ideal solenoid and its finite
//! current model, the moving point charge, gauge functions, and the
//! finite-difference operators used to check them.

mod charge;
mod current;
pub mod diffops;
mod gauge;
mod solenoid;

pub use charge::ChargeState;
pub use current::{biot_savart_b_field, biot_savart_vector_potential, CurrentElement};
pub use gauge::{ChiFunction, ChiKind, GaugeField, Sampler};
pub use solenoid::{FiniteModel, Solenoid};
