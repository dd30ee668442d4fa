//! Classical driven-spin simulator for prethermal discrete time crystals.
//!
//! Spins on a periodic hypercubic lattice interact through a Kac-normalized
//! power-law Ising coupling and are kicked about `x` once per drive period.
//! The crate provides the lattice geometry, the exact stroboscopic map,
//! order-parameter and chaos diagnostics, and realization-averaged sweeps.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod observables;
pub mod state;
pub mod trig;

pub use error::{Error, Result};
