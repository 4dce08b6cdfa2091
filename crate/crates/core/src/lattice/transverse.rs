//! Transverse (y, z) lattice levels.
//!
//! The transverse directions hold a single-color attractive lattice
//! -V cos^2(k y) at constant depth, solved once with the same plane-wave
//! machinery as the superlattice by setting the short component to zero.
//! Each cell is a single well, so levels are individual bands; two levels
//! are kept for the 3D interaction model, and the ground-mode quartic
//! integral feeds the 1D contact-interaction reduction.

use crate::error::Result;
use crate::units;

use super::wannier::{localized_modes, RealGrid};
use super::{solve_bands, DepthPoint, Geometry};

/// Two transverse levels of one direction: onsite energies and the quartic
/// Wannier integrals that enter contact-interaction matrix elements.
#[derive(Debug, Clone)]
pub struct TransverseLevels {
    /// Level energies (angular kHz).
    pub eps: [f64; 2],
    /// I4[m][n][o][p] = integral of w_m w_n w_o w_p over the direction (1/m).
    pub i4_per_m: [[[[f64; 2]; 2]; 2]; 2],
    /// Transverse cell length (m).
    pub cell_m: f64,
}

impl TransverseLevels {
    /// Ground-mode quartic integral (1/m), the factor entering the 1D-reduced
    /// interaction.
    pub fn i4_ground(&self) -> f64 {
        self.i4_per_m[0][0][0][0]
    }
}

/// Solve one transverse direction with depth `v_t` (in recoils of `k_t`) and
/// wave vector `k_t` (1/m).
pub fn solve_transverse(v_t: f64, k_t: f64, mass_kg: f64) -> Result<TransverseLevels> {
    // Single-color lattice of wave vector k_t maps onto the superlattice
    // builder as a pure long component: ladder spacing 2 k_t, cell pi / k_t.
    let geom = Geometry {
        k_s: 2.0 * k_t,
        k_l: k_t,
        cell_m: std::f64::consts::PI / k_t,
        e_rs: units::recoil_angular_khz(2.0 * k_t, mass_kg),
        e_rl: units::recoil_angular_khz(k_t, mass_kg),
        mass_kg,
    };
    let depth = DepthPoint::new(0.0, v_t);
    let bands = solve_bands(&geom, &depth, 2, 16, 10)?;
    let grid = RealGrid::window(3, 512);

    let mut modes = Vec::with_capacity(2);
    for b in 0..2 {
        let all = localized_modes(&bands, &[b], &grid)?;
        let home = all
            .into_iter()
            .find(|m| m.center >= -0.5 && m.center < 0.5)
            .ok_or_else(|| {
                crate::error::Error::Numerical(format!(
                    "no home-cell transverse mode for band {b}"
                ))
            })?;
        modes.push(home);
    }

    let mut i4 = [[[[0.0; 2]; 2]; 2]; 2];
    #[allow(clippy::needless_range_loop)]
    for m in 0..2 {
        for n in 0..2 {
            for o in 0..2 {
                for p in 0..2 {
                    let mut acc = 0.0;
                    for j in 0..grid.n {
                        acc += modes[m].samples[j]
                            * modes[n].samples[j]
                            * modes[o].samples[j]
                            * modes[p].samples[j];
                    }
                    // cell-unit integral -> 1/m
                    i4[m][n][o][p] = acc * grid.h / geom.cell_m;
                }
            }
        }
    }

    Ok(TransverseLevels {
        eps: [modes[0].energy(), modes[1].energy()],
        i4_per_m: i4,
        cell_m: geom.cell_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use approx::assert_relative_eq;

    #[test]
    fn deep_transverse_lattice_is_nearly_harmonic() {
        let config = LatticeConfig::li6_superlattice();
        let k_t = config.transverse_wave_vector().unwrap();
        let t = solve_transverse(45.0, k_t, config.species_mass_kg).unwrap();
        let e_r = units::recoil_angular_khz(k_t, config.species_mass_kg);
        // harmonic frequency 2 sqrt(V) E_r around the well bottom -V
        let omega = 2.0 * 45.0f64.sqrt() * e_r;
        let gap = t.eps[1] - t.eps[0];
        assert_relative_eq!(gap, omega, max_relative = 0.06);

        // ground quartic integral close to the oscillator value
        let a_ho = (units::HBAR / (config.species_mass_kg * omega * 1e3)).sqrt();
        let expected = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * a_ho);
        assert_relative_eq!(t.i4_ground(), expected, max_relative = 0.05);

        // parity: odd quartic combinations vanish
        assert!(t.i4_per_m[0][0][0][1].abs() < 1e-6 * t.i4_ground());
        assert!(t.i4_per_m[1][1][1][0].abs() < 1e-6 * t.i4_ground());
        // exchange-type entries all equal by symmetry
        assert_relative_eq!(
            t.i4_per_m[0][0][1][1],
            t.i4_per_m[0][1][0][1],
            max_relative = 1e-10
        );
    }
}
