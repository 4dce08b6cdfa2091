//! Localized Wannier bases from position-operator diagonalization.
//!
//! Bloch states of a periodic potential are delocalized; the localized modes
//! used by the Hubbard description are eigenstates of the position operator
//! restricted to a band subspace. For a double-well level p the subspace is
//! the band pair {2p, 2p+1} over all quasi-momenta; its position eigenstates
//! come in left/right pairs per superlattice cell. Matrix elements of x in
//! the plane-wave basis over the L-cell domain are analytic, so no real-space
//! quadrature enters the diagonalization itself; modes are only sampled on a
//! real grid afterwards for overlap and interaction integrals.
//!
//! Gauge: each mode is rotated to be real with a positive peak; when a
//! previous basis is supplied, signs are additionally aligned to maximize the
//! overlap with it so that consecutive bases connect continuously.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{hermitian_eig_sorted, BandSolution};

/// Uniform midpoint-sampled grid over a window of whole cells centered on the
/// home cell; positions are in cell units.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl RealGrid {
    /// Window of `cells` cells (odd count keeps it centered) with
    /// `points_per_cell` samples per cell.
    pub fn window(cells: usize, points_per_cell: usize) -> Self {
        let n = cells * points_per_cell;
        Self {
            x0: -(cells as f64) / 2.0,
            h: 1.0 / points_per_cell as f64,
            n,
        }
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x0 + (j as f64 + 0.5) * self.h
    }

    pub fn matches(&self, other: &RealGrid) -> bool {
        self.n == other.n && (self.x0 - other.x0).abs() < 1e-12 && (self.h - other.h).abs() < 1e-15
    }
}

/// One localized mode: real-space samples plus its expansion over the band
/// subspace it was built from.
#[derive(Debug, Clone)]
pub struct WannierMode {
    /// Real samples on the shared grid, orthonormal under the midpoint rule.
    pub samples: DVector<f64>,
    /// Position expectation value in cell units.
    pub center: f64,
    /// Coefficients over the (band, k) subspace columns.
    pub coeffs: Vec<Complex64>,
    /// Band energies E_{b,k} aligned with `coeffs` (angular kHz).
    pub energies: Vec<f64>,
}

impl WannierMode {
    /// <w| H_1 |w> from the spectral expansion.
    pub fn energy(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.energies)
            .map(|(c, e)| c.norm_sqr() * e)
            .sum()
    }
}

/// Matrix element <a| H_1 |b> for two modes expanded over the same band
/// subspace; modes from disjoint band sets are orthogonal under H_1.
pub fn h1_element(a: &WannierMode, b: &WannierMode) -> f64 {
    debug_assert_eq!(a.coeffs.len(), b.coeffs.len());
    a.coeffs
        .iter()
        .zip(&b.coeffs)
        .zip(&a.energies)
        .map(|((ca, cb), e)| (ca.conj() * cb).re * e)
        .sum()
}

/// Left/right localized modes per double-well level on a shared grid.
#[derive(Debug, Clone)]
pub struct WannierBasis {
    pub grid: RealGrid,
    /// `levels[p] = [w_pL, w_pR]` with center(w_pL) < center(w_pR).
    pub levels: Vec<[WannierMode; 2]>,
    /// Continuity sign applied on top of the positive-peak gauge, one entry
    /// per mode in level-major, side-minor order.
    pub gauge_signs: Vec<f64>,
}

impl WannierBasis {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_modes(&self) -> usize {
        2 * self.levels.len()
    }

    /// Mode by flattened index 2 * level + side (0 = left, 1 = right).
    pub fn mode(&self, idx: usize) -> &WannierMode {
        &self.levels[idx / 2][idx % 2]
    }

    /// Gram matrix of all modes under the midpoint rule.
    pub fn gram(&self) -> DMatrix<f64> {
        let m = self.n_modes();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = self.mode(i).samples.dot(&self.mode(j).samples) * self.grid.h;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        let mut worst: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Position matrix element between plane waves over the L-cell domain.
/// For momentum difference 2 pi nu / L (nu integer, nonzero) the element is
/// -i (-1)^nu L / (2 pi nu); the diagonal vanishes on the symmetric domain.
#[inline]
fn plane_wave_x_element(nu: i64, l: usize) -> Complex64 {
    if nu == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, -sign * l as f64 / (2.0 * std::f64::consts::PI * nu as f64))
}

/// All position eigenmodes of the subspace spanned by `band_set` over every
/// quasi-momentum, sorted by center.
pub(crate) fn localized_modes(
    bands: &BandSolution,
    band_set: &[usize],
    grid: &RealGrid,
) -> Result<Vec<WannierMode>> {
    let l = bands.n_sites();
    let f_dim = 2 * bands.f_max + 1;
    let cols: Vec<(usize, usize)> = band_set
        .iter()
        .flat_map(|&b| (0..l).map(move |kn| (b, kn)))
        .collect();
    let dim = cols.len();

    // Position operator in the Bloch-state basis of the subspace.
    let mut x_op = DMatrix::<Complex64>::zeros(dim, dim);
    for (row, &(b_r, kn_r)) in cols.iter().enumerate() {
        for (col, &(b_c, kn_c)) in cols.iter().enumerate().take(row + 1) {
            let cr = &bands.coeffs[kn_r];
            let cc = &bands.coeffs[kn_c];
            let dk = kn_c as i64 - kn_r as i64;
            let mut acc = Complex64::new(0.0, 0.0);
            for fr in 0..f_dim {
                let a = cr[(fr, b_r)].conj();
                if a.norm_sqr() < 1e-60 {
                    continue;
                }
                for fc in 0..f_dim {
                    let nu = (fc as i64 - fr as i64) * l as i64 + dk;
                    if nu == 0 {
                        continue;
                    }
                    acc += a * cc[(fc, b_c)] * plane_wave_x_element(nu, l);
                }
            }
            x_op[(row, col)] = acc;
            x_op[(col, row)] = acc.conj();
        }
    }

    let (centers, vectors) = hermitian_eig_sorted(&x_op)?;

    let energies: Vec<f64> = cols
        .iter()
        .map(|&(b, kn)| bands.energies[kn][b])
        .collect();

    let mut modes: Vec<WannierMode> = (0..dim)
        .map(|m| {
            let coeffs: Vec<Complex64> = (0..dim).map(|i| vectors[(i, m)]).collect();
            let samples = sample_subspace_mode(bands, &cols, &coeffs, grid);
            WannierMode {
                samples: DVector::zeros(0),
                center: centers[m],
                coeffs,
                energies: energies.clone(),
            }
            .with_complex_samples(samples)
        })
        .collect::<Result<_>>()?;
    modes.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    Ok(modes)
}

impl WannierMode {
    /// Rotate the sampled mode to the real, positive-peak gauge.
    fn with_complex_samples(mut self, z: DVector<Complex64>) -> Result<Self> {
        let mut peak = 0usize;
        let mut peak_abs = 0.0;
        for (j, v) in z.iter().enumerate() {
            let a = v.norm();
            if a > peak_abs {
                peak_abs = a;
                peak = j;
            }
        }
        if peak_abs == 0.0 {
            return Err(Error::Numerical("zero Wannier mode".into()));
        }
        let phase = z[peak] / peak_abs;
        let rotated = z.map(|v| v * phase.conj());
        let imag_residue = rotated.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / peak_abs;
        if imag_residue > 1e-9 {
            return Err(Error::Numerical(format!(
                "Wannier mode not gauge-fixable to real (residue {imag_residue:.2e})"
            )));
        }
        for c in self.coeffs.iter_mut() {
            *c *= phase.conj();
        }
        self.samples = rotated.map(|v| v.re);
        Ok(self)
    }

    fn flip_sign(&mut self) {
        self.samples.iter_mut().for_each(|v| *v = -*v);
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
    }
}

/// Evaluate a subspace mode on the real grid from its Bloch coefficients.
fn sample_subspace_mode(
    bands: &BandSolution,
    cols: &[(usize, usize)],
    coeffs: &[Complex64],
    grid: &RealGrid,
) -> DVector<Complex64> {
    let l = bands.n_sites() as f64;
    let f_max = bands.f_max;
    let f_dim = 2 * f_max + 1;
    let norm = 1.0 / l.sqrt();

    // Collapse band coefficients: d[kn][f] = sum_b A_(b,kn) C_(f,b,kn).
    let n_k = bands.n_sites();
    let mut d = vec![vec![Complex64::new(0.0, 0.0); f_dim]; n_k];
    for (&(b, kn), &a) in cols.iter().zip(coeffs) {
        if a.norm_sqr() < 1e-60 {
            continue;
        }
        let c = &bands.coeffs[kn];
        for f in 0..f_dim {
            d[kn][f] += a * c[(f, b)];
        }
    }

    let mut out = DVector::from_element(grid.n, Complex64::new(0.0, 0.0));
    let two_pi = 2.0 * std::f64::consts::PI;
    for j in 0..grid.n {
        let x = grid.x(j);
        // e^{i 2 pi (f + kappa) x} via Horner over f for each kappa
        let e1 = Complex64::new(0.0, two_pi * x).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for (kn, dk) in d.iter().enumerate() {
            if dk.iter().all(|c| c.norm_sqr() < 1e-60) {
                continue;
            }
            let kappa = bands.k_fracs[kn];
            // phase of the lowest plane wave f = -f_max
            let mut pw = Complex64::new(0.0, two_pi * (kappa - f_max as f64) * x).exp();
            let mut sum_k = Complex64::new(0.0, 0.0);
            for c in dk.iter() {
                sum_k += c * pw;
                pw *= e1;
            }
            acc += sum_k;
        }
        out[j] = acc * norm;
    }
    out
}

/// Build the left/right Wannier basis for the lowest `n_levels` double-well
/// levels. Each level diagonalizes the position operator on its band pair
/// {2p, 2p+1}; the two modes centered in the home cell are kept, ordered by
/// center, gauge-fixed real with positive peak, and sign-aligned to `prev`
/// when given.
pub fn build_wannier_basis(
    bands: &BandSolution,
    n_levels: usize,
    prev: Option<&WannierBasis>,
    grid: &RealGrid,
) -> Result<WannierBasis> {
    if bands.n_bands < 2 * n_levels {
        return Err(Error::InvalidConfig(format!(
            "band solution has {} bands; {} levels need {}",
            bands.n_bands,
            n_levels,
            2 * n_levels
        )));
    }
    if let Some(p) = prev {
        if !p.grid.matches(grid) {
            return Err(Error::GridMismatch);
        }
        if p.n_levels() != n_levels {
            return Err(Error::DimensionMismatch(format!(
                "previous basis has {} levels, expected {n_levels}",
                p.n_levels()
            )));
        }
    }

    let mut levels = Vec::with_capacity(n_levels);
    let mut gauge_signs = Vec::with_capacity(2 * n_levels);
    for p in 0..n_levels {
        let all = localized_modes(bands, &[2 * p, 2 * p + 1], grid)?;
        let mut home: Vec<WannierMode> = all
            .into_iter()
            .filter(|m| m.center >= -0.5 && m.center < 0.5)
            .collect();
        if home.len() != 2 {
            return Err(Error::Numerical(format!(
                "expected 2 home-cell modes for level {p}, found {}",
                home.len()
            )));
        }
        if (home[0].center - home[1].center).abs() < 1e-9 {
            return Err(Error::DegeneratePosition {
                level: p,
                c0: home[0].center,
                c1: home[1].center,
            });
        }
        let mut right = home.pop().unwrap();
        let mut left = home.pop().unwrap();
        debug_assert!(left.center < right.center);

        for (side, mode) in [&mut left, &mut right].into_iter().enumerate() {
            let mut sign = 1.0;
            if let Some(prev_basis) = prev {
                let overlap = mode
                    .samples
                    .dot(&prev_basis.levels[p][side].samples)
                    * grid.h;
                if overlap < 0.0 {
                    mode.flip_sign();
                    sign = -1.0;
                }
            }
            gauge_signs.push(sign);
        }
        levels.push([left, right]);
    }

    Ok(WannierBasis {
        grid: grid.clone(),
        levels,
        gauge_signs,
    })
}

/// Single-particle overlap matrix O_ij = integral of w_i^new w_j^old between
/// two bases on the same grid, with its deviation from orthogonality
/// (truncation leakage of the basis change).
pub fn wannier_overlap_matrix(
    new: &WannierBasis,
    old: &WannierBasis,
) -> Result<(DMatrix<f64>, f64)> {
    if !new.grid.matches(&old.grid) {
        return Err(Error::GridMismatch);
    }
    let n = new.n_modes();
    let m = old.n_modes();
    if n != m {
        return Err(Error::DimensionMismatch(format!(
            "bases have {n} and {m} modes"
        )));
    }
    let mut o = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            o[(i, j)] = new.mode(i).samples.dot(&old.mode(j).samples) * new.grid.h;
        }
    }
    let gram = &o * o.transpose();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    Ok((o, defect))
}

/// Localized left/right modes of one level for a row of cells around the home
/// cell, used by the inter-well leakage model. Returns 2 modes per requested
/// cell, ordered cell-major then left/right.
pub(crate) fn cell_modes(
    bands: &BandSolution,
    level: usize,
    cells: &[i64],
    grid: &RealGrid,
) -> Result<Vec<WannierMode>> {
    let all = localized_modes(bands, &[2 * level, 2 * level + 1], grid)?;
    let mut out = Vec::with_capacity(2 * cells.len());
    for &cell in cells {
        let lo = cell as f64 - 0.5;
        let hi = cell as f64 + 0.5;
        let mut in_cell: Vec<&WannierMode> = all
            .iter()
            .filter(|m| m.center >= lo && m.center < hi)
            .collect();
        if in_cell.len() != 2 {
            return Err(Error::Numerical(format!(
                "expected 2 modes in cell {cell} for level {level}, found {}",
                in_cell.len()
            )));
        }
        in_cell.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
        for m in in_cell {
            out.push(m.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{solve_bands, DepthPoint, LatticeConfig};
    use approx::assert_relative_eq;

    fn default_basis(v_s: f64, v_l: f64, phi: f64, m: usize) -> WannierBasis {
        let geom = LatticeConfig::li6_superlattice().geometry().unwrap();
        let depth = DepthPoint::with_phase(v_s, v_l, phi);
        let bands = solve_bands(&geom, &depth, 2 * m, 16, 10).unwrap();
        let grid = RealGrid::window(3, 512);
        build_wannier_basis(&bands, m, None, &grid).unwrap()
    }

    #[test]
    fn symmetric_well_modes_mirror_each_other() {
        let basis = default_basis(12.0, 35.0, 0.0, 2);
        let n = basis.grid.n;
        for level in &basis.levels {
            let (l, r) = (&level[0], &level[1]);
            let mut worst: f64 = 0.0;
            for j in 0..n {
                worst = worst.max((r.samples[j] - l.samples[n - 1 - j]).abs());
            }
            assert!(worst < 1e-6, "mirror defect {worst:.2e}");
            assert!(l.center < r.center);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        let basis = default_basis(10.0, 40.0, 0.0, 3);
        assert!(basis.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn centers_split_by_half_cell_in_a_symmetric_well() {
        let basis = default_basis(25.0, 40.0, 0.0, 1);
        let sep = basis.levels[0][1].center - basis.levels[0][0].center;
        assert_relative_eq!(sep, 0.5, epsilon = 0.05);
        assert_relative_eq!(
            basis.levels[0][0].center,
            -basis.levels[0][1].center,
            epsilon = 1e-6
        );
    }

    #[test]
    fn identity_continuity_keeps_signs_positive() {
        let geom = LatticeConfig::li6_superlattice().geometry().unwrap();
        let depth = DepthPoint::new(15.0, 38.0);
        let bands = solve_bands(&geom, &depth, 4, 16, 10).unwrap();
        let grid = RealGrid::window(3, 512);
        let first = build_wannier_basis(&bands, 2, None, &grid).unwrap();
        let second = build_wannier_basis(&bands, 2, Some(&first), &grid).unwrap();
        assert!(second.gauge_signs.iter().all(|&s| s == 1.0));
        for p in 0..2 {
            for side in 0..2 {
                assert_eq!(
                    first.levels[p][side].samples,
                    second.levels[p][side].samples
                );
            }
        }
    }

    #[test]
    fn overlap_matrix_identity_and_small_leakage() {
        let basis = default_basis(14.0, 36.0, 0.0, 2);
        let (o, defect) = wannier_overlap_matrix(&basis, &basis).unwrap();
        for i in 0..o.nrows() {
            for j in 0..o.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((o[(i, j)] - target).abs() < 1e-9);
            }
        }
        assert!(defect < 1e-9);

        // depths differing by 1 percent: overlap stays near-orthogonal
        let nearby = default_basis(14.14, 36.36, 0.0, 2);
        let (_, defect) = wannier_overlap_matrix(&nearby, &basis).unwrap();
        assert!(defect < 1e-3, "leakage {defect:.2e}");
    }

    #[test]
    fn brillouin_sum_rule_normalizes_each_mode() {
        let basis = default_basis(18.0, 42.0, 0.0, 2);
        for i in 0..basis.n_modes() {
            let norm: f64 = basis.mode(i).coeffs.iter().map(|c| c.norm_sqr()).sum();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = default_basis(12.0, 35.0, 0.0, 1);
        let geom = LatticeConfig::li6_superlattice().geometry().unwrap();
        let bands = solve_bands(&geom, &DepthPoint::new(12.0, 35.0), 2, 16, 10).unwrap();
        let grid = RealGrid::window(5, 512);
        let b = build_wannier_basis(&bands, 1, None, &grid).unwrap();
        assert!(matches!(
            wannier_overlap_matrix(&a, &b),
            Err(Error::GridMismatch)
        ));
    }
}
