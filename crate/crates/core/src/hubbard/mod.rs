//! Fermi-Hubbard parameters from lattice solutions.
//!
//! Hopping amplitudes and onsite energies are matrix elements of the
//! single-particle Hamiltonian between Wannier modes, evaluated exactly in
//! the spectral expansion. Interaction tensors reduce the 3D contact kernel
//! to products of a 1D quartic Wannier integral and precomputed transverse
//! factors; of the general four-index tensor only the families with
//! significant contributions are kept (onsite, offsite density, spin
//! exchange, pair tunneling, density-assisted hopping), restricted to terms
//! where the two atoms share a level or a side.

pub mod spline;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    build_fourier_hamiltonian, solve_bands, BandSolution, DepthPoint, Geometry, WannierBasis,
};
use crate::units;

pub use spline::{build_spline_table, SplineTable};

/// Transverse quartic integrals entering the 1D-reduced contact interaction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransverseFactors {
    /// Integral of |w_0(y)|^4 (1/m).
    pub i4_y_per_m: f64,
    /// Integral of |w_0(z)|^4 (1/m).
    pub i4_z_per_m: f64,
}

/// Hubbard parameters of one depth point. Energies in angular kHz; modes are
/// indexed 2 * level + side with side 0 = left, 1 = right.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HubbardParameters {
    /// Hopping J_p per level.
    pub j: Vec<f64>,
    /// Onsite energies [eps_pL, eps_pR] per level.
    pub eps: Vec<[f64; 2]>,
    /// Onsite interactions U^{aaaa}_{pppp} as [left, right] per level.
    pub u_onsite: Vec<[f64; 2]>,
    /// Shared strength of the offsite-density, spin-exchange, and
    /// pair-tunneling families between two distinct modes (i < j); the three
    /// families carry the same quartic integral for a contact kernel. Only
    /// same-level or same-side pairs are significant.
    pub u_pair: BTreeMap<(usize, usize), f64>,
    /// Density-assisted hopping corrections dJ as [left, right] per level.
    pub dj: Vec<[f64; 2]>,
}

impl HubbardParameters {
    pub fn n_levels(&self) -> usize {
        self.j.len()
    }

    /// Largest interaction magnitude, handy for a = 0 checks.
    pub fn max_interaction(&self) -> f64 {
        let mut m: f64 = 0.0;
        for u in &self.u_onsite {
            m = m.max(u[0].abs()).max(u[1].abs());
        }
        for u in self.u_pair.values() {
            m = m.max(u.abs());
        }
        for d in &self.dj {
            m = m.max(d[0].abs()).max(d[1].abs());
        }
        m
    }
}

/// Depth-independent pieces of the parameters: quartic integrals in cell
/// units, scaled by the contact prefactor and transverse factors when a
/// scattering length is applied.
#[derive(Debug, Clone)]
pub struct RawInteractionIntegrals {
    /// I4 for w_palpha^4 per level as [left, right] (cell units).
    pub onsite: Vec<[f64; 2]>,
    /// I4 for w_i^2 w_j^2 between distinct significant mode pairs.
    pub pair: BTreeMap<(usize, usize), f64>,
    /// I4 for w_palpha^2 w_pL w_pR per level as [left, right].
    pub dj: Vec<[f64; 2]>,
}

/// Hamiltonian matrix elements and interaction integrals of one Wannier
/// basis, before any scattering length is applied.
#[derive(Debug, Clone)]
pub struct RawHubbard {
    pub j: Vec<f64>,
    pub eps: Vec<[f64; 2]>,
    pub integrals: RawInteractionIntegrals,
}

/// Compute J_p, eps_p from the spectral expansion of the Wannier modes and
/// the quartic integrals from their real-space samples.
pub fn compute_raw_hubbard(wannier: &WannierBasis) -> Result<RawHubbard> {
    let defect = wannier.orthonormality_defect();
    if defect > 1e-6 {
        return Err(Error::NotNormalized(defect));
    }
    let m = wannier.n_levels();
    let mut j = Vec::with_capacity(m);
    let mut eps = Vec::with_capacity(m);
    let mut onsite = Vec::with_capacity(m);
    let mut dj = Vec::with_capacity(m);
    let h = wannier.grid.h;

    let quartic = |a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>| {
        let mut acc = 0.0;
        for i in 0..a.len() {
            acc += a[i] * b[i] * c[i] * d[i];
        }
        acc * h
    };

    for p in 0..m {
        let [left, right] = &wannier.levels[p];
        j.push(-crate::lattice::wannier::h1_element(left, right));
        eps.push([left.energy(), right.energy()]);
        onsite.push([
            quartic(&left.samples, &left.samples, &left.samples, &left.samples),
            quartic(
                &right.samples,
                &right.samples,
                &right.samples,
                &right.samples,
            ),
        ]);
        dj.push([
            quartic(&left.samples, &left.samples, &left.samples, &right.samples),
            quartic(
                &right.samples,
                &right.samples,
                &left.samples,
                &right.samples,
            ),
        ]);
    }

    let mut pair = BTreeMap::new();
    for i in 0..2 * m {
        for jdx in (i + 1)..2 * m {
            let (pi, si) = (i / 2, i % 2);
            let (pj, sj) = (jdx / 2, jdx % 2);
            // significant only when levels match or sides match
            if pi != pj && si != sj {
                continue;
            }
            let wi = &wannier.mode(i).samples;
            let wj = &wannier.mode(jdx).samples;
            pair.insert((i, jdx), quartic(wi, wi, wj, wj));
        }
    }

    Ok(RawHubbard {
        j,
        eps,
        integrals: RawInteractionIntegrals { onsite, pair, dj },
    })
}

/// Scale factor turning a cell-unit quartic integral into an interaction
/// energy in angular kHz for scattering length `a_bohr`.
pub fn interaction_scale(
    geom: &Geometry,
    a_bohr: f64,
    transverse: &TransverseFactors,
) -> f64 {
    units::contact_prefactor(a_bohr, geom.mass_kg) / geom.cell_m
        * transverse.i4_y_per_m
        * transverse.i4_z_per_m
}

/// Assemble full Hubbard parameters for scattering length `a_bohr` (Bohr
/// radii). A vanishing scattering length zeroes every interaction entry.
pub fn compute_hubbard_parameters(
    wannier: &WannierBasis,
    depth: &DepthPoint,
    a_bohr: f64,
    transverse: &TransverseFactors,
    geom: &Geometry,
) -> Result<HubbardParameters> {
    depth.validate()?;
    if !a_bohr.is_finite() {
        return Err(Error::NonFinite("scattering length"));
    }
    let raw = compute_raw_hubbard(wannier)?;
    Ok(scale_parameters(&raw, geom, a_bohr, transverse))
}

/// Apply the contact prefactor to raw integrals.
pub fn scale_parameters(
    raw: &RawHubbard,
    geom: &Geometry,
    a_bohr: f64,
    transverse: &TransverseFactors,
) -> HubbardParameters {
    let g = interaction_scale(geom, a_bohr, transverse);
    HubbardParameters {
        j: raw.j.clone(),
        eps: raw.eps.clone(),
        u_onsite: raw
            .integrals
            .onsite
            .iter()
            .map(|u| [u[0] * g, u[1] * g])
            .collect(),
        u_pair: raw
            .integrals
            .pair
            .iter()
            .map(|(&k, &v)| (k, v * g))
            .collect(),
        dj: raw.integrals.dj.iter().map(|d| [d[0] * g, d[1] * g]).collect(),
    }
}

/// First-order derivatives of one band energy with respect to the depths,
/// via the Hellmann-Feynman identity on the Fourier Hamiltonian.
/// Units: angular kHz per recoil unit of the respective lattice.
pub fn band_energy_gradient(
    geom: &Geometry,
    depth: &DepthPoint,
    band: usize,
    k_frac: f64,
    f_max: usize,
) -> Result<(f64, f64)> {
    let h = build_fourier_hamiltonian(geom, depth, k_frac, f_max)?;
    let (evals, evecs) = crate::lattice::hermitian_eig_sorted(&h)?;
    if band >= evals.len() {
        return Err(Error::InvalidConfig(format!(
            "band {band} outside the solved set"
        )));
    }
    let gap_below = if band > 0 {
        evals[band] - evals[band - 1]
    } else {
        f64::INFINITY
    };
    let gap_above = if band + 1 < evals.len() {
        evals[band + 1] - evals[band]
    } else {
        f64::INFINITY
    };
    let gap = gap_below.min(gap_above);
    if gap < 1e-10 {
        return Err(Error::DegenerateBands { band, gap });
    }
    let v = evecs.column(band);
    Ok(eigvec_depth_gradient(geom, depth, &v.into_owned(), f_max))
}

/// v^dag (dH/dV_k) v for both depths; dH/dV_s has 1/2 on the diagonal and
/// (1/4) e^{+-2 i phi} on |df| = 2, dH/dV_l has -1/2 and -1/4 on |df| = 1.
fn eigvec_depth_gradient(
    geom: &Geometry,
    depth: &DepthPoint,
    v: &DVector<Complex64>,
    f_max: usize,
) -> (f64, f64) {
    let n = 2 * f_max + 1;
    let phase = Complex64::new(0.0, 2.0 * depth.phi).exp();
    let mut d_vs = 0.0;
    let mut d_vl = 0.0;
    for i in 0..n {
        d_vs += 0.5 * v[i].norm_sqr();
        d_vl += -0.5 * v[i].norm_sqr();
        if i + 1 < n {
            d_vl += -0.25 * 2.0 * (v[i + 1].conj() * v[i]).re;
        }
        if i + 2 < n {
            d_vs += 0.25 * 2.0 * (v[i + 2].conj() * v[i] * phase).re;
        }
    }
    (d_vs * geom.e_rs, d_vl * geom.e_rl)
}

/// Depth derivatives of the level parameters J_p and eps_p, averaged over the
/// momentum grid: dJ_p = (dE_{2p+1} - dE_{2p}) / 2 and
/// deps_p = (dE_{2p+1} + dE_{2p}) / 2. Momenta where the Hellmann-Feynman
/// form is invalid (near-degenerate bands) fall back to a symmetric finite
/// difference of the band energies.
#[derive(Debug, Clone, Copy, Default)]
pub struct LevelGradient {
    pub dj_dvs: f64,
    pub dj_dvl: f64,
    pub deps_dvs: f64,
    pub deps_dvl: f64,
}

pub fn level_gradients(
    geom: &Geometry,
    depth: &DepthPoint,
    n_levels: usize,
    l: usize,
    f_max: usize,
) -> Result<Vec<LevelGradient>> {
    let bands = solve_bands(geom, depth, 2 * n_levels, l, f_max)?;
    level_gradients_from_bands(geom, depth, &bands)
}

/// Same as [`level_gradients`] but reusing an existing band solution's
/// eigenvectors for the Hellmann-Feynman elements.
pub fn level_gradients_from_bands(
    geom: &Geometry,
    depth: &DepthPoint,
    bands: &BandSolution,
) -> Result<Vec<LevelGradient>> {
    let n_bands = bands.n_bands;
    let n_levels = n_bands / 2;
    let l = bands.n_sites();
    let f_max = bands.f_max;
    let mut de_dvs = vec![0.0; n_bands];
    let mut de_dvl = vec![0.0; n_bands];
    let mut fallback: Vec<(usize, usize)> = Vec::new();
    for kn in 0..l {
        for b in 0..n_bands {
            let gap_below = if b > 0 {
                bands.energies[kn][b] - bands.energies[kn][b - 1]
            } else {
                f64::INFINITY
            };
            let gap_above = if b + 1 < n_bands {
                bands.energies[kn][b + 1] - bands.energies[kn][b]
            } else {
                // the solve keeps only n_bands eigenpairs; treat the edge as
                // isolated, which holds for the gapped double-well spectrum
                f64::INFINITY
            };
            if gap_below.min(gap_above) < 1e-10 {
                fallback.push((kn, b));
                continue;
            }
            let v = bands.coeffs[kn].column(b).into_owned();
            let (gvs, gvl) = eigvec_depth_gradient(geom, depth, &v, f_max);
            de_dvs[b] += gvs;
            de_dvl[b] += gvl;
        }
    }
    if !fallback.is_empty() {
        let step = 1e-6;
        for &(kn, b) in &fallback {
            let k = bands.k_fracs[kn];
            let e = |vs: f64, vl: f64| -> Result<f64> {
                let d = DepthPoint::with_phase(vs, vl, depth.phi);
                let h = build_fourier_hamiltonian(geom, &d, k, f_max)?;
                Ok(crate::lattice::hermitian_eig_sorted(&h)?.0[b])
            };
            de_dvs[b] +=
                (e(depth.v_s + step, depth.v_l)? - e(depth.v_s - step, depth.v_l)?) / (2.0 * step);
            de_dvl[b] +=
                (e(depth.v_s, depth.v_l + step)? - e(depth.v_s, depth.v_l - step)?) / (2.0 * step);
        }
    }
    let ln = l as f64;
    Ok((0..n_levels)
        .map(|p| LevelGradient {
            dj_dvs: (de_dvs[2 * p + 1] - de_dvs[2 * p]) / (2.0 * ln),
            dj_dvl: (de_dvl[2 * p + 1] - de_dvl[2 * p]) / (2.0 * ln),
            deps_dvs: (de_dvs[2 * p + 1] + de_dvs[2 * p]) / (2.0 * ln),
            deps_dvl: (de_dvl[2 * p + 1] + de_dvl[2 * p]) / (2.0 * ln),
        })
        .collect())
}

/// Direct two-band hopping J(V_s, V_l): the level-0 hopping of a fresh
/// band/Wannier solve. This is the quantity tabulated by the spline backend.
pub fn two_band_hopping(
    geom: &Geometry,
    depth: &DepthPoint,
    l: usize,
    f_max: usize,
) -> Result<f64> {
    let bands = solve_bands(geom, depth, 2, l, f_max)?;
    let grid = crate::lattice::RealGrid::window(3, crate::lattice::DEFAULT_POINTS_PER_CELL);
    let wannier = crate::lattice::build_wannier_basis(&bands, 1, None, &grid)?;
    Ok(compute_raw_hubbard(&wannier)?.j[0])
}

/// Quadrature route for the hopping integral: applies the single-particle
/// Hamiltonian in real space (spectral Laplacian plus sampled potential) and
/// integrates against the partner mode. Used to cross-check the spectral J.
pub fn hopping_by_quadrature(
    geom: &Geometry,
    depth: &DepthPoint,
    bands: &BandSolution,
    wannier: &WannierBasis,
    level: usize,
) -> f64 {
    let grid = &wannier.grid;
    let [left, right] = &wannier.levels[level];
    // H_1 w_R sampled on the grid: kinetic part from the plane-wave expansion
    // (each component carries E_rs (f + kappa)^2), potential part pointwise.
    let l = bands.n_sites() as f64;
    let f_max = bands.f_max;
    let two_pi = 2.0 * std::f64::consts::PI;
    let cols: Vec<(usize, usize)> = [2 * level, 2 * level + 1]
        .iter()
        .flat_map(|&b| (0..bands.n_sites()).map(move |kn| (b, kn)))
        .collect();
    let mut h_wr = vec![Complex64::new(0.0, 0.0); grid.n];
    for jx in 0..grid.n {
        let x = grid.x(jx);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(b, kn), &a) in cols.iter().zip(&right.coeffs) {
            if a.norm_sqr() < 1e-60 {
                continue;
            }
            let kappa = bands.k_fracs[kn];
            let c = &bands.coeffs[kn];
            for f_idx in 0..2 * f_max + 1 {
                let f = f_idx as f64 - f_max as f64;
                let kinetic = geom.e_rs * (f + kappa).powi(2);
                let phase = Complex64::new(0.0, two_pi * (f + kappa) * x).exp();
                acc += a * c[(f_idx, b)] * phase * kinetic / l.sqrt();
            }
        }
        acc += Complex64::new(geom.potential(depth, x) * right.samples[jx], 0.0);
        h_wr[jx] = acc;
    }
    let mut integral = 0.0;
    for jx in 0..grid.n {
        integral += left.samples[jx] * h_wr[jx].re;
    }
    -integral * grid.h
}
