//! Design of fast collision-based SWAP and √SWAP gates for two fermionic
//! atoms in an optical-superlattice double well.
//!
//! The pipeline goes from laser parameters to gates in five stages:
//!
//! 1. [`lattice`] solves the single-particle band problem of the bichromatic
//!    superlattice in Fourier space and builds localized Wannier bases by
//!    diagonalizing the position operator.
//! 2. [`hubbard`] converts lattice solutions into Fermi-Hubbard parameters
//!    (hopping, onsite energies, contact-interaction tensors) and provides a
//!    spline-table backend for fast two-band parameter/gradient evaluation.
//! 3. [`fock`] enumerates labeled fermionic occupation bases and assembles
//!    second-quantized Hamiltonians for the two-band, multi-band, and 3D
//!    models, plus Slater-determinant lifts of basis transformations.
//! 4. [`dynamics`] propagates many-body states under piecewise-constant
//!    pulses with per-step non-adiabatic Wannier reprojection and evaluates
//!    transfer and gate costs.
//! 5. [`optimize`] runs bounded quasi-Newton pulse optimization with three
//!    interchangeable gradient backends, and [`robustness`] quantifies the
//!    sensitivity of optimized pulses to phase, intensity, inter-well, and
//!    scattering-length errors.
//!
//! Units: energies are carried in angular kHz (10^3 rad/s), times in ms, so
//! `H * t` is directly a phase in radians. Lengths along the lattice axis are
//! in units of the superlattice cell `d`. Nominal frequencies quoted in "kHz"
//! throughout follow the angular convention; the quantum-speed-limit relation
//! `T = pi / (2 J)` only reproduces the reference gate times under that
//! reading.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hubbard;
pub mod lattice;
pub mod optimize;
pub mod robustness;
pub mod units;

pub use error::{Error, Result};
