//! Verification toolkit for minimally twisted spectral triples on
//! discretized flat tori.
//!
//! The crate builds Clifford algebras in even dimension, scalar and spinor
//! fields on periodic grids, differential forms with Hodge duality,
//! connections with torsion, the minimally twisted spectral triple with its
//! twisted fluctuations and rho-unitaries, and the fermionic and spectral
//! actions. Every identity the construction relies on is checked
//! numerically; empirically pinned signs and prefactors are recorded in the
//! verification report rather than silently assumed.

pub mod error;
pub mod linalg;

pub mod clifford;
pub mod geometry;
pub mod torsion;
pub mod twist;
pub mod action;
pub mod verify;

pub use error::{Error, Result};
