//! Desk-scale simulator for a circuit-QED analog of the Holstein polaron
//! model.
//!
//! The crate maps superconducting-circuit parameters onto the Holstein model,
//! solves it exactly in a truncated Fock space and variationally with the
//! Toyozawa ansatz, evaluates polaron observables and squeezing, and
//! simulates the microwave preparation of polaron states.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod circuit;
pub mod eigen;
pub mod error;
pub mod fock;
pub mod observables;
pub mod preparation;
pub mod scalar;
pub mod toyozawa;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CircuitParams64 = circuit::CircuitParams<f64>;
pub type HolsteinParams64 = circuit::HolsteinParams<f64>;
pub type StateVector64 = fock::StateVector<f64>;
pub type SparseOperator64 = fock::SparseOperator<f64>;
pub type ToyozawaState64 = toyozawa::ToyozawaState<f64>;
pub type PumpParams64 = preparation::PumpParams<f64>;
