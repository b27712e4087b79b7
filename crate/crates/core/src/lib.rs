//! Casimir energy of a one-dimensional absorbing dielectric between two
//! perfect mirrors, for two microscopic models of absorption:
//!
//! * model D ([`dmodel`]): the field couples directly to a continuum of
//!   reservoir oscillators;
//! * model HB ([`hbmodel`]): the field couples to an atom oscillator which in
//!   turn couples to the reservoir.
//!
//! Both models can be tuned to the same dielectric function `ε(ω)`; this
//! crate computes their ground-state energies independently so the two
//! Casimir energies can be compared.
//!
//! Natural units `ħ = c = 1` are used throughout, with the reservoir scale
//! `m` setting the unit of frequency.

pub mod coupling;
pub mod dmodel;
pub mod error;
pub mod hbmodel;
pub mod modesum;
pub mod numerics;
pub mod reduction;
pub mod spectral;
pub mod types;

pub use coupling::{CouplingDef, CouplingSpec};
pub use error::{Error, Result};
pub use types::{
    make_mode_context, vacuum_energy, vacuum_force, CasimirResult, Model, ModeContext,
    PhysParams, QuadSettings, Quantity,
};
