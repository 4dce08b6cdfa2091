//! Fermionic occupation bases and second-quantized Hamiltonian assembly.
//!
//! Occupation states are bitmask pairs (up, down) with mode order level-major
//! and side-minor: mode 2p is the left mode of level p, mode 2p + 1 the
//! right. Within the operator algebra, up modes occupy Jordan-Wigner
//! positions 0..S and down modes S..2S (the spin-ordered convention), so a
//! basis state is the ascending product of creation operators on the vacuum.
//! Basis states are ordered by up mask, then down mask, which makes the
//! label I = I_up * C(S, N_down) + I_down the position in the list.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hubbard::{HubbardParameters, RawHubbard, TransverseFactors};
use crate::lattice::transverse::TransverseLevels;
use crate::lattice::Geometry;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Labeled occupation basis of a fixed (S, N_up, N_down) sector.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub sites: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// (up mask, down mask) in label order.
    pub states: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), usize>,
}

impl FockBasis {
    pub fn enumerate(sites: usize, n_up: usize, n_down: usize) -> Result<Arc<Self>> {
        if sites == 0 || sites > 16 {
            return Err(Error::InvalidConfig(format!(
                "site count {sites} outside supported range 1..=16"
            )));
        }
        if n_up > sites || n_down > sites {
            return Err(Error::InvalidConfig(format!(
                "cannot place {n_up} up and {n_down} down fermions on {sites} sites"
            )));
        }
        let up_masks = masks_with_popcount(sites, n_up);
        let down_masks = masks_with_popcount(sites, n_down);
        let mut states = Vec::with_capacity(up_masks.len() * down_masks.len());
        for &u in &up_masks {
            for &d in &down_masks {
                states.push((u, d));
            }
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, &s)| (s, i))
            .collect::<HashMap<_, _>>();
        Ok(Arc::new(Self {
            sites,
            n_up,
            n_down,
            states,
            index,
        }))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, up: u32, down: u32) -> Option<usize> {
        self.index.get(&(up, down)).copied()
    }

    /// Bitstring label like "u0011 d0001" with site 0 rightmost.
    pub fn state_label(&self, i: usize) -> String {
        let (u, d) = self.states[i];
        format!(
            "u{:0width$b} d{:0width$b}",
            u,
            d,
            width = self.sites
        )
    }
}

fn masks_with_popcount(sites: usize, n: usize) -> Vec<u32> {
    (0u32..(1 << sites))
        .filter(|m| m.count_ones() as usize == n)
        .collect()
}

/// Complex amplitudes over a Fock basis. The norm may fall below one after
/// projection onto a truncated basis; the deficit is the recorded leakage.
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    pub basis: Arc<FockBasis>,
    pub amplitudes: DVector<Complex64>,
}

impl ManyBodyState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes over a {}-state basis",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Unit amplitude on the occupation state (up, down).
    pub fn basis_state(basis: &Arc<FockBasis>, up: u32, down: u32) -> Result<Self> {
        let idx = basis.index_of(up, down).ok_or_else(|| {
            Error::InvalidConfig(format!("state (u{up:b}, d{down:b}) not in basis"))
        })?;
        let mut amp = DVector::from_element(basis.len(), Complex64::new(0.0, 0.0));
        amp[idx] = Complex64::new(1.0, 0.0);
        Self::new(basis.clone(), amp)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// 1 - ||psi||^2, the probability lost to truncated basis changes.
    pub fn leakage(&self) -> f64 {
        1.0 - self.amplitudes.norm_squared()
    }
}

/// Apply one ladder operator to an occupation state, returning the new state
/// and the fermionic sign, or None when it annihilates.
#[inline]
fn apply_ladder(
    up: u32,
    down: u32,
    sites: usize,
    mode: usize,
    spin: Spin,
    dagger: bool,
) -> Option<(u32, u32, f64)> {
    let (mask, pos, same) = match spin {
        Spin::Up => (up, mode, true),
        Spin::Down => (down, mode, false),
    };
    let occupied = mask & (1 << pos) != 0;
    if dagger == occupied {
        return None;
    }
    // occupied Jordan-Wigner positions below this operator: for a down-spin
    // operator every up mode sits below it.
    let below = (mask & ((1u32 << pos) - 1)).count_ones()
        + if same { 0 } else { up.count_ones() };
    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
    let new_mask = mask ^ (1 << pos);
    debug_assert!(mode < sites);
    match spin {
        Spin::Up => Some((new_mask, down, sign)),
        Spin::Down => Some((up, new_mask, sign)),
    }
}

/// Apply a product of ladder operators (listed left to right, applied right
/// to left) to an occupation state.
pub(crate) fn apply_monomial(
    ops: &[(usize, Spin, bool)],
    up: u32,
    down: u32,
    sites: usize,
) -> Option<(u32, u32, f64)> {
    let mut state = (up, down, 1.0);
    for &(mode, spin, dagger) in ops.iter().rev() {
        let (u, d, s) = apply_ladder(state.0, state.1, sites, mode, spin, dagger)?;
        state = (u, d, state.2 * s);
    }
    Some(state)
}

/// The two-band double-well Hamiltonian over |D0>, |ud>, |du>, |0D>.
pub fn assemble_two_band_hamiltonian(j: f64, u: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            u, -j, -j, 0.0, //
            -j, 0.0, 0.0, -j, //
            -j, 0.0, 0.0, -j, //
            0.0, -j, -j, u,
        ],
    )
}

/// Assemble the multi-band Hamiltonian (hopping, onsite energies, and the
/// significant interaction families) on a Fock basis whose site count must
/// match the parameter set.
pub fn assemble_multiband_hamiltonian(
    params: &HubbardParameters,
    basis: &FockBasis,
) -> Result<DMatrix<f64>> {
    let m = params.n_levels();
    if basis.sites != 2 * m {
        return Err(Error::MissingLevels {
            have: m,
            need: basis.sites.div_ceil(2),
        });
    }
    let dim = basis.len();
    let s = basis.sites;
    let mut h = DMatrix::<f64>::zeros(dim, dim);

    let occupied = |mask: u32, mode: usize| mask & (1 << mode) != 0;

    for (col, &(up, down)) in basis.states.iter().enumerate() {
        // diagonal: onsite energies, onsite U, offsite density families
        let mut diag = 0.0;
        for p in 0..m {
            for side in 0..2 {
                let mode = 2 * p + side;
                let eps = params.eps[p][side];
                if occupied(up, mode) {
                    diag += eps;
                }
                if occupied(down, mode) {
                    diag += eps;
                }
                if occupied(up, mode) && occupied(down, mode) {
                    diag += params.u_onsite[p][side];
                }
            }
        }
        for (&(i, j), &u_val) in &params.u_pair {
            if occupied(up, i) && occupied(down, j) {
                diag += u_val;
            }
            if occupied(up, j) && occupied(down, i) {
                diag += u_val;
            }
        }
        h[(col, col)] += diag;

        let mut add = |ops: &[(usize, Spin, bool)], coeff: f64| {
            if coeff == 0.0 {
                return;
            }
            if let Some((u2, d2, sign)) = apply_monomial(ops, up, down, s) {
                if let Some(row) = basis.index_of(u2, d2) {
                    h[(row, col)] += coeff * sign;
                }
            }
        };

        for p in 0..m {
            let (l, r) = (2 * p, 2 * p + 1);
            for spin in [Spin::Up, Spin::Down] {
                // hopping -J_p (c^dag_L c_R + h.c.)
                add(&[(l, spin, true), (r, spin, false)], -params.j[p]);
                add(&[(r, spin, true), (l, spin, false)], -params.j[p]);
                // density-assisted hopping dJ_{p alpha} n_{p alpha, -sigma} hop_sigma
                let other = match spin {
                    Spin::Up => down,
                    Spin::Down => up,
                };
                for side in 0..2 {
                    if occupied(other, 2 * p + side) {
                        let dj = params.dj[p][side];
                        add(&[(l, spin, true), (r, spin, false)], dj);
                        add(&[(r, spin, true), (l, spin, false)], dj);
                    }
                }
            }
        }

        for (&(i, j), &u_val) in &params.u_pair {
            // spin exchange: c^dag_{i up} c^dag_{j down} c_{i down} c_{j up} + h.c.
            add(
                &[
                    (i, Spin::Up, true),
                    (j, Spin::Down, true),
                    (i, Spin::Down, false),
                    (j, Spin::Up, false),
                ],
                u_val,
            );
            add(
                &[
                    (j, Spin::Up, true),
                    (i, Spin::Down, true),
                    (j, Spin::Down, false),
                    (i, Spin::Up, false),
                ],
                u_val,
            );
            // pair tunneling: c^dag_{i up} c^dag_{i down} c_{j down} c_{j up} + h.c.
            add(
                &[
                    (i, Spin::Up, true),
                    (i, Spin::Down, true),
                    (j, Spin::Down, false),
                    (j, Spin::Up, false),
                ],
                u_val,
            );
            add(
                &[
                    (j, Spin::Up, true),
                    (j, Spin::Down, true),
                    (i, Spin::Down, false),
                    (i, Spin::Up, false),
                ],
                u_val,
            );
        }
    }

    debug_assert!(
        (0..dim).all(|i| (0..dim).all(|j| (h[(i, j)] - h[(j, i)]).abs() < 1e-12)),
        "assembled Hamiltonian not symmetric"
    );
    Ok(h)
}

/// Lift a single-particle basis change (spin-diagonal blocks) to the Fock
/// space: the matrix element between occupation states is the product over
/// spin species of the determinant of the overlap submatrix restricted to
/// occupied modes.
pub fn lift_projection_to_fock(o: &DMatrix<f64>, basis: &FockBasis) -> Result<DMatrix<f64>> {
    if o.nrows() != basis.sites || o.ncols() != basis.sites {
        return Err(Error::DimensionMismatch(format!(
            "overlap is {}x{}, basis has {} modes",
            o.nrows(),
            o.ncols(),
            basis.sites
        )));
    }
    let dim = basis.len();
    let mut p = DMatrix::<f64>::zeros(dim, dim);
    let modes = |mask: u32| -> Vec<usize> {
        (0..basis.sites).filter(|&m| mask & (1 << m) != 0).collect()
    };
    for (row, &(u_new, d_new)) in basis.states.iter().enumerate() {
        let up_rows = modes(u_new);
        let down_rows = modes(d_new);
        for (col, &(u_old, d_old)) in basis.states.iter().enumerate() {
            let up_det = occupied_determinant(o, &up_rows, &modes(u_old));
            if up_det == 0.0 {
                continue;
            }
            let down_det = occupied_determinant(o, &down_rows, &modes(d_old));
            p[(row, col)] = up_det * down_det;
        }
    }
    Ok(p)
}

fn occupied_determinant(o: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    match rows.len() {
        0 => 1.0,
        1 => o[(rows[0], cols[0])],
        2 => {
            o[(rows[0], cols[0])] * o[(rows[1], cols[1])]
                - o[(rows[0], cols[1])] * o[(rows[1], cols[0])]
        }
        n => {
            let mut sub = DMatrix::<f64>::zeros(n, n);
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    sub[(i, j)] = o[(r, c)];
                }
            }
            sub.determinant()
        }
    }
}

/// Interaction-only multi-band operator (the five families, no hopping or
/// onsite energies) with a unit transverse factor; building block of the 3D
/// Hamiltonian.
fn interaction_only(params: &HubbardParameters, basis: &FockBasis) -> Result<DMatrix<f64>> {
    let stripped = HubbardParameters {
        j: vec![0.0; params.n_levels()],
        eps: vec![[0.0; 2]; params.n_levels()],
        u_onsite: params.u_onsite.clone(),
        u_pair: params.u_pair.clone(),
        dj: params.dj.clone(),
    };
    assemble_multiband_hamiltonian(&stripped, basis)
}

/// Product basis and Hamiltonian of the 3D model: a four-band (two-level)
/// x direction and two static levels in each of y and z. Index order is
/// I = i_x * 16 + i_y * 4 + i_z over two-atom sectors in every direction.
pub struct ThreeDimensionalModel {
    pub x_basis: Arc<FockBasis>,
    pub y_basis: Arc<FockBasis>,
    pub hamiltonian: DMatrix<f64>,
}

pub fn assemble_3d_hamiltonian(
    raw_x: &RawHubbard,
    geom: &Geometry,
    a_bohr: f64,
    y: &TransverseLevels,
    z: &TransverseLevels,
) -> Result<ThreeDimensionalModel> {
    if raw_x.j.len() != 2 {
        return Err(Error::MissingLevels {
            have: raw_x.j.len(),
            need: 2,
        });
    }
    let x_basis = FockBasis::enumerate(4, 1, 1)?;
    let y_basis = FockBasis::enumerate(2, 1, 1)?;

    // x part: hopping + onsite energies, and the interaction families scaled
    // by the contact prefactor per meter (transverse factors come from the
    // y and z interaction operators).
    let unit = TransverseFactors {
        i4_y_per_m: 1.0,
        i4_z_per_m: 1.0,
    };
    let x_params = crate::hubbard::scale_parameters(raw_x, geom, a_bohr, &unit);
    let kinetic = HubbardParameters {
        j: x_params.j.clone(),
        eps: x_params.eps.clone(),
        u_onsite: vec![[0.0; 2]; 2],
        u_pair: x_params.u_pair.keys().map(|&k| (k, 0.0)).collect(),
        dj: vec![[0.0; 2]; 2],
    };
    let h_j_x = assemble_multiband_hamiltonian(&kinetic, &x_basis)?;
    let u_x = interaction_only(&x_params, &x_basis)?;

    let transverse_operators = |levels: &TransverseLevels| -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = y_basis.len();
        let mut h_e = DMatrix::<f64>::zeros(dim, dim);
        let mut u = DMatrix::<f64>::zeros(dim, dim);
        for (col, &(up, down)) in y_basis.states.iter().enumerate() {
            for mode in 0..2 {
                if up & (1 << mode) != 0 {
                    h_e[(col, col)] += levels.eps[mode];
                }
                if down & (1 << mode) != 0 {
                    h_e[(col, col)] += levels.eps[mode];
                }
            }
            for m in 0..2 {
                for n in 0..2 {
                    for o in 0..2 {
                        for p in 0..2 {
                            let coeff = levels.i4_per_m[m][n][o][p];
                            if coeff == 0.0 {
                                continue;
                            }
                            let ops = [
                                (m, Spin::Up, true),
                                (n, Spin::Down, true),
                                (o, Spin::Down, false),
                                (p, Spin::Up, false),
                            ];
                            if let Some((u2, d2, sign)) = apply_monomial(&ops, up, down, 2) {
                                if let Some(row) = y_basis.index_of(u2, d2) {
                                    u[(row, col)] += coeff * sign;
                                }
                            }
                        }
                    }
                }
            }
        }
        (h_e, u)
    };
    let (h_e_y, u_y) = transverse_operators(y);
    let (h_e_z, u_z) = transverse_operators(z);

    let i_x = DMatrix::<f64>::identity(x_basis.len(), x_basis.len());
    let i_t = DMatrix::<f64>::identity(y_basis.len(), y_basis.len());

    let h = h_j_x.kronecker(&i_t).kronecker(&i_t)
        + i_x.kronecker(&h_e_y).kronecker(&i_t)
        + i_x.kronecker(&i_t).kronecker(&h_e_z)
        + u_x.kronecker(&u_y).kronecker(&u_z);

    Ok(ThreeDimensionalModel {
        x_basis,
        y_basis,
        hamiltonian: h,
    })
}
