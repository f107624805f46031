//! Three particles on a line with inverse-square interactions: the family
//! interpolating between the Calogero and Wolfes potentials, its closed-form
//! scattering map, numerical trajectories and spectra.
//!
//! The crate provides coordinates and sector geometry ([`coords`]), the
//! potential families and their conserved quantities ([`potentials`]), the
//! closed-form scattering maps and classical orbits ([`exact`]), numerical
//! scattering experiments ([`dynamics`]), finite-difference spectra
//! ([`spectra`]) and the command-line front end ([`cli`]).

// negated comparisons are how parameter checks reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coords;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod potentials;
pub mod spectra;

pub use error::{Error, Result};
pub use potentials::{Family, FamilyBVariant, PotentialSpec};
