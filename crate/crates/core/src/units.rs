//! Physical constants and unit conversions.
//!
//! Internally hbar = 1: energies are angular kHz (10^3 rad/s), times are ms,
//! so exp(-i H t) needs no conversion factor. Lattice-axis lengths are in
//! units of the superlattice cell d.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of lithium-6 (kg).
pub const MASS_LI6: f64 = 6.015_122_887_4 * ATOMIC_MASS_UNIT;

/// Bohr radius (m); scattering lengths come in as multiples of this.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// Angular frequency (rad/s) -> angular kHz (rad/ms).
pub const RAD_PER_S_TO_ANGULAR_KHZ: f64 = 1e-3;

/// Recoil energy hbar k^2 / (2 m) in angular kHz for a wave vector in 1/m.
pub fn recoil_angular_khz(k: f64, mass_kg: f64) -> f64 {
    HBAR * k * k / (2.0 * mass_kg) * RAD_PER_S_TO_ANGULAR_KHZ
}

/// Contact-interaction prefactor 4 pi hbar a / m in m^3/ms for a scattering
/// length in Bohr radii. Multiplying by three inverse-length Wannier overlap
/// factors (1/m each) yields an interaction energy in angular kHz.
pub fn contact_prefactor(a_bohr: f64, mass_kg: f64) -> f64 {
    4.0 * std::f64::consts::PI * HBAR * (a_bohr * BOHR_RADIUS) / mass_kg
        * RAD_PER_S_TO_ANGULAR_KHZ
}
