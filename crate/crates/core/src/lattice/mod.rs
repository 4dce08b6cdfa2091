//! Single-particle band problem of the bichromatic superlattice.
//!
//! The optical potential along the lattice axis is
//!
//! ```text
//! V(x, t) = V_s(t) cos^2(k_s x + phi) - V_l(t) cos^2(k_l x)
//! ```
//!
//! with k_b = (2 pi / lambda_b) sin(tilt/2) and lambda_l = 2 lambda_s, so the
//! reciprocal vector relation G = 2 k_l = k_s closes the Fourier grid. In the
//! plane-wave basis e^{i (f k_s + k) x} the long lattice couples f <-> f +- 1
//! with amplitude -V_l/4 and the short lattice couples f <-> f +- 2 with
//! amplitude (V_s/4) e^{+-2 i phi}; both contribute constant offsets
//! V_s/2 - V_l/2. Diagonalizing at each quasi-momentum k of a discretized
//! Brillouin zone yields band energies and Bloch coefficients, from which
//! [`wannier`] builds localized left/right bases per double-well level.

pub mod transverse;
pub mod wannier;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

pub use wannier::{build_wannier_basis, wannier_overlap_matrix, RealGrid, WannierBasis};

/// Default number of quasi-momenta in the Brillouin zone.
pub const DEFAULT_L: usize = 16;
/// Default plane-wave cutoff; the basis spans f in [-f_max, f_max].
pub const DEFAULT_F_MAX: usize = 10;
/// Default real-space samples per superlattice cell.
pub const DEFAULT_POINTS_PER_CELL: usize = 512;

/// Laser parameters and species constants defining the superlattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Short-lattice wavelength (nm).
    pub lambda_s_nm: f64,
    /// Long-lattice wavelength (nm); must equal 2 lambda_s.
    pub lambda_l_nm: f64,
    /// Angle between the tilted lasers (degrees).
    pub tilt_angle_deg: f64,
    /// Transverse depth along y in units of E_ry.
    pub v_y: f64,
    /// Transverse depth along z in units of E_rz.
    pub v_z: f64,
    /// Atomic mass (kg).
    pub species_mass_kg: f64,
    /// Relative phase phi between short and long lattice (radians).
    pub relative_phase: f64,
}

impl LatticeConfig {
    /// Reference parameters: 532/1064 nm lasers tilted by 26.7 degrees,
    /// lithium-6, symmetric well, 45-recoil transverse lattices.
    pub fn li6_superlattice() -> Self {
        Self {
            lambda_s_nm: 532.0,
            lambda_l_nm: 1064.0,
            tilt_angle_deg: 26.7,
            v_y: 45.0,
            v_z: 45.0,
            species_mass_kg: units::MASS_LI6,
            relative_phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.lambda_s_nm,
            self.lambda_l_nm,
            self.tilt_angle_deg,
            self.v_y,
            self.v_z,
            self.species_mass_kg,
            self.relative_phase,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lattice configuration"));
        }
        if self.lambda_s_nm <= 0.0 || self.lambda_l_nm <= 0.0 || self.species_mass_kg <= 0.0 {
            return Err(Error::InvalidConfig(
                "wavelengths and mass must be positive".into(),
            ));
        }
        if ((self.lambda_l_nm - 2.0 * self.lambda_s_nm) / self.lambda_l_nm).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "lambda_l = {} nm must equal 2 lambda_s = {} nm for the Fourier grid to close",
                self.lambda_l_nm,
                2.0 * self.lambda_s_nm
            )));
        }
        if self.tilt_angle_deg <= 0.0 || self.tilt_angle_deg >= 180.0 {
            return Err(Error::InvalidConfig(format!(
                "tilt angle {} deg outside (0, 180)",
                self.tilt_angle_deg
            )));
        }
        if self.v_y < 0.0 || self.v_z < 0.0 {
            return Err(Error::InvalidConfig(
                "transverse depths must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Derived wave vectors, recoil energies, and the cell length.
    pub fn geometry(&self) -> Result<Geometry> {
        self.validate()?;
        let half_angle = (self.tilt_angle_deg / 2.0).to_radians();
        let k_s = 2.0 * std::f64::consts::PI / (self.lambda_s_nm * 1e-9) * half_angle.sin();
        let k_l = k_s / 2.0;
        Ok(Geometry {
            k_s,
            k_l,
            cell_m: std::f64::consts::PI / k_l,
            e_rs: units::recoil_angular_khz(k_s, self.species_mass_kg),
            e_rl: units::recoil_angular_khz(k_l, self.species_mass_kg),
            mass_kg: self.species_mass_kg,
        })
    }

    /// Transverse lattices share the tilted short-laser geometry, so the
    /// transverse wave vector equals k_s.
    pub fn transverse_wave_vector(&self) -> Result<f64> {
        Ok(self.geometry()?.k_s)
    }
}

/// Derived geometric quantities of one lattice configuration.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    /// Short-lattice wave vector (1/m).
    pub k_s: f64,
    /// Long-lattice wave vector k_s / 2 (1/m).
    pub k_l: f64,
    /// Superlattice cell length d = pi / k_l (m).
    pub cell_m: f64,
    /// Short-lattice recoil energy (angular kHz).
    pub e_rs: f64,
    /// Long-lattice recoil energy E_rs / 4 (angular kHz).
    pub e_rl: f64,
    pub mass_kg: f64,
}

impl Geometry {
    /// Potential in angular kHz at position x in cell units for given depths.
    pub fn potential(&self, depth: &DepthPoint, x_cell: f64) -> f64 {
        use std::f64::consts::PI;
        let short = (2.0 * PI * x_cell + depth.phi).cos().powi(2);
        let long = (PI * x_cell).cos().powi(2);
        depth.v_s * self.e_rs * short - depth.v_l * self.e_rl * long
    }
}

/// One point in control space: lattice depths in their own recoil units and
/// the relative phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub v_s: f64,
    pub v_l: f64,
    pub phi: f64,
}

impl DepthPoint {
    pub fn new(v_s: f64, v_l: f64) -> Self {
        Self { v_s, v_l, phi: 0.0 }
    }

    pub fn with_phase(v_s: f64, v_l: f64, phi: f64) -> Self {
        Self { v_s, v_l, phi }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.v_s.is_finite() || !self.v_l.is_finite() || !self.phi.is_finite() {
            return Err(Error::NonFinite("lattice depths"));
        }
        if self.v_s < 0.0 || self.v_l < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "negative lattice depth (V_s = {}, V_l = {})",
                self.v_s, self.v_l
            )));
        }
        Ok(())
    }
}

/// Fourier-space single-particle Hamiltonian at quasi-momentum `k_frac` (in
/// units of k_s, inside (-1/2, 1/2)), over plane waves f in [-f_max, f_max].
/// Entries are in angular kHz.
pub fn build_fourier_hamiltonian(
    geom: &Geometry,
    depth: &DepthPoint,
    k_frac: f64,
    f_max: usize,
) -> Result<DMatrix<Complex64>> {
    depth.validate()?;
    if f_max < 2 {
        return Err(Error::CutoffTooSmall(f_max));
    }
    if !k_frac.is_finite() || k_frac.abs() > 0.5 {
        return Err(Error::InvalidConfig(format!(
            "quasi-momentum {k_frac} outside the first Brillouin zone"
        )));
    }
    let n = 2 * f_max + 1;
    let dc = 0.5 * (depth.v_s * geom.e_rs - depth.v_l * geom.e_rl);
    let long_amp = -0.25 * depth.v_l * geom.e_rl;
    let short_amp = 0.25
        * depth.v_s
        * geom.e_rs
        * Complex64::new(0.0, 2.0 * depth.phi).exp();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let f = i as f64 - f_max as f64;
        h[(i, i)] = Complex64::new(geom.e_rs * (f + k_frac).powi(2) + dc, 0.0);
        if i + 1 < n {
            // row f+1, column f: long-lattice e^{+i k_s x} component
            h[(i + 1, i)] = Complex64::new(long_amp, 0.0);
            h[(i, i + 1)] = Complex64::new(long_amp, 0.0);
        }
        if i + 2 < n {
            // row f+2, column f: short-lattice e^{+2 i (k_s x + phi)} component
            h[(i + 2, i)] = short_amp;
            h[(i, i + 2)] = short_amp.conj();
        }
    }
    Ok(h)
}

/// Band energies and Bloch coefficients over a discretized Brillouin zone.
#[derive(Debug, Clone)]
pub struct BandSolution {
    /// Quasi-momenta in units of k_s: (2n + 1 - L) / (2L) for n in 0..L.
    pub k_fracs: Vec<f64>,
    /// `energies[n][b]`, sorted ascending in b, in angular kHz.
    pub energies: Vec<DVector<f64>>,
    /// `coeffs[n]` is the (2 f_max + 1) x B matrix of plane-wave coefficients.
    pub coeffs: Vec<DMatrix<Complex64>>,
    pub f_max: usize,
    pub n_bands: usize,
}

impl BandSolution {
    pub fn n_sites(&self) -> usize {
        self.k_fracs.len()
    }

    /// Mean of E_b(k) over the momentum grid; for the nearly flat bands of a
    /// deep long lattice this is the double-well level energy.
    pub fn band_mean(&self, b: usize) -> f64 {
        let sum: f64 = self.energies.iter().map(|e| e[b]).sum();
        sum / self.energies.len() as f64
    }
}

/// Diagonalize the Fourier Hamiltonian on the L-point momentum grid and keep
/// the `n_bands` lowest eigenpairs per momentum.
pub fn solve_bands(
    geom: &Geometry,
    depth: &DepthPoint,
    n_bands: usize,
    l: usize,
    f_max: usize,
) -> Result<BandSolution> {
    if l < 2 || l % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "site count L = {l} must be even and at least 2"
        )));
    }
    if n_bands == 0 || n_bands > 2 * f_max {
        return Err(Error::InvalidConfig(format!(
            "band count {n_bands} exceeds the plane-wave basis (2 f_max = {})",
            2 * f_max
        )));
    }
    let mut k_fracs = Vec::with_capacity(l);
    let mut energies = Vec::with_capacity(l);
    let mut coeffs = Vec::with_capacity(l);
    for n in 0..l {
        let k_frac = (2.0 * n as f64 + 1.0 - l as f64) / (2.0 * l as f64);
        let h = build_fourier_hamiltonian(geom, depth, k_frac, f_max)?;
        let (evals, evecs) = hermitian_eig_sorted(&h)?;
        let dim = 2 * f_max + 1;
        let mut e = DVector::zeros(n_bands);
        let mut c = DMatrix::zeros(dim, n_bands);
        for b in 0..n_bands {
            e[b] = evals[b];
            c.set_column(b, &evecs.column(b));
        }
        k_fracs.push(k_frac);
        energies.push(e);
        coeffs.push(c);
    }
    Ok(BandSolution {
        k_fracs,
        energies,
        coeffs,
        f_max,
        n_bands,
    })
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn hermitian_eig_sorted(h: &DMatrix<Complex64>) -> Result<(DVector<f64>, DMatrix<Complex64>)> {
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entries".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (i, &j) in order.iter().enumerate() {
        vals[i] = eig.eigenvalues[j];
        vecs.set_column(i, &eig.eigenvectors.column(j));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalues".into()));
    }
    Ok((vals, vecs))
}

/// Real-symmetric eigendecomposition with eigenvalues sorted ascending.
pub fn symmetric_eig_sorted(h: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entries".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (i, &j) in order.iter().enumerate() {
        vals[i] = eig.eigenvalues[j];
        vecs.set_column(i, &eig.eigenvectors.column(j));
    }
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom() -> Geometry {
        LatticeConfig::li6_superlattice().geometry().unwrap()
    }

    #[test]
    fn recoil_energies_land_in_the_expected_range() {
        let g = geom();
        // hbar k_s^2 / (2 m) for tilted 532 nm beams on lithium-6
        assert_relative_eq!(g.e_rs, 39.27, epsilon = 0.05);
        assert_relative_eq!(g.e_rl, g.e_rs / 4.0, epsilon = 1e-12);
        assert_relative_eq!(g.cell_m, 2.303e-6, epsilon = 3e-9);
    }

    #[test]
    fn free_particle_hamiltonian_is_diagonal_kinetic() {
        let g = geom();
        let h = build_fourier_hamiltonian(&g, &DepthPoint::new(0.0, 0.0), 0.25, 4).unwrap();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                if i == j {
                    let f = i as f64 - 4.0;
                    assert_relative_eq!(h[(i, j)].re, g.e_rs * (f + 0.25).powi(2), epsilon = 1e-10);
                } else {
                    assert_eq!(h[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn cosine_square_identity_fixes_couplings_and_offset() {
        let g = geom();
        let h = build_fourier_hamiltonian(&g, &DepthPoint::new(10.0, 0.0), 0.1, 5).unwrap();
        // V_s = 10 E_rs: DC shift 5 E_rs, |df| = 2 coupling 2.5 E_rs, no |df| = 1
        assert_relative_eq!(h[(0, 0)].re - g.e_rs * (-5.0f64 + 0.1).powi(2), 5.0 * g.e_rs);
        assert_relative_eq!(h[(2, 0)].re, 2.5 * g.e_rs);
        assert_eq!(h[(1, 0)].re, 0.0);
    }

    #[test]
    fn phase_keeps_hamiltonian_hermitian_and_converged() {
        let g = geom();
        let depth = DepthPoint::with_phase(8.0, 20.0, 0.1);
        let h = build_fourier_hamiltonian(&g, &depth, -0.2, 6).unwrap();
        let diff = (&h - h.adjoint()).norm();
        assert!(diff < 1e-12);
        // cutoff-doubling convergence oracle: eigenvalues drift < 1e-8 relative
        let lo = solve_bands(&g, &depth, 6, 4, 10).unwrap();
        let hi = solve_bands(&g, &depth, 6, 4, 20).unwrap();
        for n in 0..4 {
            for b in 0..6 {
                let rel = (lo.energies[n][b] - hi.energies[n][b]).abs()
                    / hi.energies[n][b].abs().max(g.e_rs);
                assert!(rel < 1e-8, "band {b} at k {n}: rel drift {rel:.2e}");
            }
        }
    }

    #[test]
    fn free_particle_bands_fold_the_parabola() {
        let g = geom();
        let bands = solve_bands(&g, &DepthPoint::new(0.0, 0.0), 3, 16, 8).unwrap();
        let mut min_e = f64::INFINITY;
        for (n, k) in bands.k_fracs.iter().enumerate() {
            assert_relative_eq!(bands.energies[n][0], g.e_rs * k * k, epsilon = 1e-9);
            min_e = min_e.min(bands.energies[n][0]);
        }
        // minimum of the lowest band approaches zero within grid resolution
        assert!(min_e < g.e_rs * (1.0 / 32.0f64).powi(2) + 1e-9);
    }

    #[test]
    fn deep_double_well_bands_group_in_pairs() {
        let g = geom();
        let bands = solve_bands(&g, &DepthPoint::new(30.0, 40.0), 6, 16, 10).unwrap();
        let e: Vec<f64> = (0..6).map(|b| bands.band_mean(b)).collect();
        // splitting within a pair is much smaller than the gap between pairs
        assert!(e[1] - e[0] < 0.05 * (e[2] - e[1]), "pair 0: {:?}", e);
        assert!(e[3] - e[2] < 0.3 * (e[4] - e[3]), "pair 1: {:?}", e);
        // sorted ascending at every k
        for n in 0..16 {
            for b in 1..6 {
                assert!(bands.energies[n][b] >= bands.energies[n][b - 1]);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = geom();
        assert!(build_fourier_hamiltonian(&g, &DepthPoint::new(1.0, 1.0), 0.0, 1).is_err());
        assert!(build_fourier_hamiltonian(&g, &DepthPoint::new(f64::NAN, 1.0), 0.0, 4).is_err());
        assert!(solve_bands(&g, &DepthPoint::new(1.0, 1.0), 30, 16, 10).is_err());
        assert!(solve_bands(&g, &DepthPoint::new(1.0, 1.0), 2, 5, 10).is_err());
        let mut bad = LatticeConfig::li6_superlattice();
        bad.lambda_l_nm = 1000.0;
        assert!(bad.geometry().is_err());
    }
}
