//! Non-adiabatic propagation of many-body states under piecewise-constant
//! pulses.
//!
//! Every segment of a pulse gets its own band solve, Wannier basis, and
//! Hubbard parameters; the state evolves with the segment propagator and is
//! then projected onto the next segment's Wannier frame through the
//! determinant-lifted overlap matrix. The state enters the first segment in
//! that segment's basis and leaves the last segment in the final basis, so a
//! pulse pinned to deep depths at both ends starts and ends in the frame its
//! initial and target states are written in. Fast depth changes excite the
//! state relative to the instantaneous frame; the projection captures that
//! as amplitude on higher levels plus a norm deficit (leakage) from the
//! truncated level set.
//!
//! The two-band model is the frozen-frame simplification: no reprojection,
//! interaction fixed at its initial Wannier value, hopping either recomputed
//! per segment or read from a spline table.
//!
//! Parameter computation is cached per quantized depth point, so line
//! searches and finite-difference sweeps that revisit depths cost one band
//! solve each.

pub mod export;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    assemble_3d_hamiltonian, assemble_multiband_hamiltonian, assemble_two_band_hamiltonian,
    lift_projection_to_fock, FockBasis, ManyBodyState,
};
use crate::hubbard::spline::SplineTable;
use crate::hubbard::{
    compute_raw_hubbard, scale_parameters, HubbardParameters, LevelGradient, RawHubbard,
    TransverseFactors,
};
use crate::lattice::transverse::{solve_transverse, TransverseLevels};
use crate::lattice::{
    build_wannier_basis, solve_bands, wannier_overlap_matrix, DepthPoint, Geometry, LatticeConfig,
    RealGrid, WannierBasis, DEFAULT_F_MAX, DEFAULT_L, DEFAULT_POINTS_PER_CELL,
};

/// Piecewise-constant control schedule: per-segment depths, a constant
/// scattering length, and the control bounds the segments must respect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub duration_ms: f64,
    /// Short-lattice depth per segment (units of E_rs).
    pub v_s_ers: Vec<f64>,
    /// Long-lattice depth per segment (units of E_rl).
    pub v_l_erl: Vec<f64>,
    /// Scattering length (Bohr radii), constant over the pulse.
    pub a_bohr: f64,
    pub bounds: PulseBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseBounds {
    pub v_s: (f64, f64),
    pub v_l: (f64, f64),
}

impl PulseSchedule {
    pub fn n_steps(&self) -> usize {
        self.v_s_ers.len()
    }

    pub fn dt_ms(&self) -> f64 {
        self.duration_ms / self.n_steps() as f64
    }

    pub fn depth(&self, step: usize, phi: f64) -> DepthPoint {
        DepthPoint::with_phase(self.v_s_ers[step], self.v_l_erl[step], phi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_s_ers.is_empty() || self.v_s_ers.len() != self.v_l_erl.len() {
            return Err(Error::InvalidConfig(
                "pulse needs equal, nonzero segment counts per control".into(),
            ));
        }
        if !(self.duration_ms > 0.0) {
            return Err(Error::InvalidConfig("pulse duration must be positive".into()));
        }
        if !self.a_bohr.is_finite() {
            return Err(Error::NonFinite("scattering length"));
        }
        let (s_lo, s_hi) = self.bounds.v_s;
        let (l_lo, l_hi) = self.bounds.v_l;
        let eps = 1e-9;
        for (j, (&vs, &vl)) in self.v_s_ers.iter().zip(&self.v_l_erl).enumerate() {
            if !vs.is_finite() || !vl.is_finite() {
                return Err(Error::NonFinite("pulse segment"));
            }
            if vs < s_lo - eps || vs > s_hi + eps || vl < l_lo - eps || vl > l_hi + eps {
                return Err(Error::InvalidConfig(format!(
                    "segment {j} at ({vs:.4}, {vl:.4}) violates bounds"
                )));
            }
        }
        Ok(())
    }
}

/// Which many-body model a trajectory runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// Frozen-frame two-band model (4 states for one up and one down atom).
    TwoBand,
    /// Multi-band model with this many double-well levels (2 levels = four
    /// bands) and per-step reprojection.
    Multiband(usize),
    /// Four-band x direction with two static levels in each of y and z.
    ThreeD,
}

impl ModelKind {
    pub fn tag(&self) -> String {
        match self {
            ModelKind::TwoBand => "two-band".into(),
            ModelKind::Multiband(m) => format!("multiband-{m}"),
            ModelKind::ThreeD => "3d".into(),
        }
    }

    pub fn n_levels(&self) -> usize {
        match self {
            ModelKind::TwoBand => 1,
            ModelKind::Multiband(m) => *m,
            ModelKind::ThreeD => 2,
        }
    }
}

/// Where the two-band hopping comes from.
#[derive(Clone, Copy)]
pub enum TwoBandJSource<'a> {
    /// Fresh band/Wannier solve per segment (cached by depth).
    Direct,
    /// Spline-table lookup; depths must stay inside the table domain.
    Spline(&'a SplineTable),
}

/// Canonical-gauge solution of one depth point: Wannier basis, raw Hubbard
/// integrals, and depth derivatives of the level parameters.
#[derive(Debug)]
pub struct CanonicalStep {
    pub depth: DepthPoint,
    pub wannier: WannierBasis,
    pub raw: RawHubbard,
    pub gradients: Vec<LevelGradient>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct DepthKey {
    vs: i64,
    vl: i64,
    phi: i64,
    levels: usize,
}

impl DepthKey {
    fn new(depth: &DepthPoint, levels: usize) -> Self {
        Self {
            vs: (depth.v_s * 1e9).round() as i64,
            vl: (depth.v_l * 1e9).round() as i64,
            phi: (depth.phi * 1e12).round() as i64,
            levels,
        }
    }
}

const CACHE_CAP: usize = 4096;

/// Shared solver state for one lattice configuration: geometry, transverse
/// factors, discretization choices, and the per-depth step cache. Safe to
/// share across threads.
pub struct StepContext {
    pub config: LatticeConfig,
    pub geom: Geometry,
    pub l: usize,
    pub f_max: usize,
    pub grid: RealGrid,
    pub transverse: TransverseFactors,
    pub transverse_y: TransverseLevels,
    pub transverse_z: TransverseLevels,
    cache: Mutex<HashMap<DepthKey, Arc<CanonicalStep>>>,
}

impl StepContext {
    pub fn new(config: &LatticeConfig) -> Result<Self> {
        let geom = config.geometry()?;
        let k_t = config.transverse_wave_vector()?;
        let transverse_y = solve_transverse(config.v_y, k_t, config.species_mass_kg)?;
        let transverse_z = solve_transverse(config.v_z, k_t, config.species_mass_kg)?;
        let transverse = TransverseFactors {
            i4_y_per_m: transverse_y.i4_ground(),
            i4_z_per_m: transverse_z.i4_ground(),
        };
        Ok(Self {
            config: config.clone(),
            geom,
            l: DEFAULT_L,
            f_max: DEFAULT_F_MAX,
            grid: RealGrid::window(3, DEFAULT_POINTS_PER_CELL),
            transverse,
            transverse_y,
            transverse_z,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Canonical-gauge step solution at one depth, cached.
    pub fn step(&self, depth: &DepthPoint, n_levels: usize) -> Result<Arc<CanonicalStep>> {
        let key = DepthKey::new(depth, n_levels);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let bands = solve_bands(&self.geom, depth, 2 * n_levels, self.l, self.f_max)?;
        let wannier = build_wannier_basis(&bands, n_levels, None, &self.grid)?;
        let raw = compute_raw_hubbard(&wannier)?;
        let gradients =
            crate::hubbard::level_gradients_from_bands(&self.geom, depth, &bands)?;
        let step = Arc::new(CanonicalStep {
            depth: *depth,
            wannier,
            raw,
            gradients,
        });
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAP {
            cache.clear();
        }
        cache.insert(key, step.clone());
        Ok(step)
    }

    /// Hubbard parameters at one depth for a given scattering length.
    pub fn parameters(
        &self,
        depth: &DepthPoint,
        n_levels: usize,
        a_bohr: f64,
    ) -> Result<HubbardParameters> {
        let step = self.step(depth, n_levels)?;
        Ok(scale_parameters(&step.raw, &self.geom, a_bohr, &self.transverse))
    }
}

/// One gauge-aligned pulse segment: parameters, depth derivatives, and the
/// single-particle overlap with the previous segment's basis.
pub struct AlignedStep {
    pub step: Arc<CanonicalStep>,
    /// Continuity signs per mode relative to the canonical gauge.
    pub signs: Vec<f64>,
    /// Raw parameters in the aligned gauge.
    pub raw: RawHubbard,
    pub gradients: Vec<LevelGradient>,
    /// Overlap from the previous segment's aligned basis (identity leading
    /// the first segment).
    pub overlap_from_prev: DMatrix<f64>,
}

/// Resolve per-segment solutions for a pulse in the multiband model and
/// align gauges across segments. Scattering-length independent.
pub fn aligned_steps(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    n_levels: usize,
) -> Result<Vec<AlignedStep>> {
    pulse.validate()?;
    let n = pulse.n_steps();
    let mut out: Vec<AlignedStep> = Vec::with_capacity(n);
    for j in 0..n {
        let depth = pulse.depth(j, ctx.config.relative_phase);
        let step = ctx.step(&depth, n_levels)?;
        let n_modes = step.wannier.n_modes();
        let (signs, overlap) = match out.last() {
            // a revisited depth reuses the cached basis: the frame does not
            // move, so the projection is exactly the identity
            Some(prev) if Arc::ptr_eq(&step, &prev.step) => {
                (prev.signs.clone(), DMatrix::identity(n_modes, n_modes))
            }
            Some(prev) => {
                let (mut o, _) = wannier_overlap_matrix(&step.wannier, &prev.step.wannier)?;
                // columns inherit the previous segment's alignment
                for (c, s_prev) in prev.signs.iter().enumerate() {
                    if *s_prev < 0.0 {
                        o.column_mut(c).scale_mut(-1.0);
                    }
                }
                // continuity: keep the aligned overlap diagonal positive
                let mut signs = vec![1.0; n_modes];
                for i in 0..n_modes {
                    if o[(i, i)] < 0.0 {
                        signs[i] = -1.0;
                        o.row_mut(i).scale_mut(-1.0);
                    }
                }
                (signs, o)
            }
            None => (vec![1.0; n_modes], DMatrix::identity(n_modes, n_modes)),
        };

        let mut raw = step.raw.clone();
        let mut gradients = step.gradients.clone();
        for p in 0..n_levels {
            let flip = signs[2 * p] * signs[2 * p + 1];
            raw.j[p] *= flip;
            raw.integrals.dj[p][0] *= flip;
            raw.integrals.dj[p][1] *= flip;
            gradients[p].dj_dvs *= flip;
            gradients[p].dj_dvl *= flip;
        }
        out.push(AlignedStep {
            step,
            signs,
            raw,
            gradients,
            overlap_from_prev: overlap,
        });
    }
    Ok(out)
}

/// exp(-i H dt) for a Hermitian complex matrix, via eigendecomposition.
pub fn step_propagator(h: &DMatrix<Complex64>, dt: f64) -> Result<DMatrix<Complex64>> {
    let (vals, vecs) = crate::lattice::hermitian_eig_sorted(h)?;
    let n = h.nrows();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let phase = Complex64::new(0.0, -vals[k] * dt).exp();
        let col = vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += col[i] * phase * col[j].conj();
            }
        }
    }
    Ok(u)
}

/// Eigendecomposition of a real-symmetric Hamiltonian, reusable for both the
/// propagator and its exact directional derivatives.
#[derive(Debug, Clone)]
pub struct HamiltonianEig {
    pub vals: DVector<f64>,
    pub vecs: DMatrix<f64>,
}

pub fn eig_real(h: &DMatrix<f64>) -> Result<HamiltonianEig> {
    let (vals, vecs) = crate::lattice::symmetric_eig_sorted(h)?;
    Ok(HamiltonianEig { vals, vecs })
}

pub fn propagator_from_eig(eig: &HamiltonianEig, dt: f64) -> DMatrix<Complex64> {
    let n = eig.vals.len();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let phase = Complex64::new(0.0, -eig.vals[k] * dt).exp();
        let col = eig.vecs.column(k);
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += phase * col[i] * col[j];
            }
        }
    }
    u
}

/// exp(-i H dt) for a real-symmetric Hamiltonian.
pub fn step_propagator_real(h: &DMatrix<f64>, dt: f64) -> Result<DMatrix<Complex64>> {
    Ok(propagator_from_eig(&eig_real(h)?, dt))
}

/// Exact directional derivative of exp(-i H dt) along a symmetric direction
/// D, from the spectral divided-difference formula.
pub fn propagator_directional_derivative(
    eig: &HamiltonianEig,
    direction: &DMatrix<f64>,
    dt: f64,
) -> DMatrix<Complex64> {
    let n = eig.vals.len();
    let vt_d_v = eig.vecs.transpose() * direction * &eig.vecs;
    let mut core = DMatrix::<Complex64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let la = eig.vals[a];
            let lb = eig.vals[b];
            let g = if (la - lb).abs() < 1e-12 {
                Complex64::new(0.0, -dt) * Complex64::new(0.0, -la * dt).exp()
            } else {
                (Complex64::new(0.0, -la * dt).exp() - Complex64::new(0.0, -lb * dt).exp())
                    / (la - lb)
            };
            core[(a, b)] = g * vt_d_v[(a, b)];
        }
    }
    let vecs_c = eig.vecs.map(|v| Complex64::new(v, 0.0));
    &vecs_c * core * vecs_c.transpose()
}

/// Transfer infidelity 1 - |<target|psi>|^2.
pub fn evaluate_state_cost(psi: &ManyBodyState, target: &ManyBodyState) -> f64 {
    debug_assert_eq!(psi.basis.len(), target.basis.len());
    let overlap: Complex64 = target
        .amplitudes
        .iter()
        .zip(psi.amplitudes.iter())
        .map(|(t, p)| t.conj() * p)
        .sum();
    1.0 - overlap.norm_sqr()
}

#[derive(Debug, Clone, Copy)]
pub struct PropagateOptions {
    /// Abort when cumulative truncation leakage exceeds this.
    pub leakage_threshold: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            leakage_threshold: 0.05,
        }
    }
}

/// Time-resolved result of one propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times_ms: Vec<f64>,
    pub states: Vec<ManyBodyState>,
    /// 1 - norm^2 per snapshot.
    pub leakage: Vec<f64>,
    /// Gauge-aligned parameters per segment (multiband models).
    pub step_params: Vec<HubbardParameters>,
    pub model: ModelKind,
}

impl Trajectory {
    pub fn final_state(&self) -> &ManyBodyState {
        self.states.last().expect("trajectory has snapshots")
    }

    pub fn max_leakage(&self) -> f64 {
        self.leakage.iter().copied().fold(0.0, f64::max)
    }
}

/// Propagate `psi0` under a pulse in the requested model.
pub fn propagate_nonadiabatic(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    model: ModelKind,
    psi0: &ManyBodyState,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    match model {
        ModelKind::TwoBand => {
            propagate_two_band(ctx, pulse, TwoBandJSource::Direct, psi0)
        }
        ModelKind::Multiband(m) => propagate_multiband(ctx, pulse, m, psi0, opts),
        ModelKind::ThreeD => propagate_three_d(ctx, pulse, psi0, opts),
    }
}

/// Two-band propagation: frozen Wannier frame, interaction fixed at the
/// initial depths, hopping per segment from a direct solve or a spline.
pub fn propagate_two_band(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    j_source: TwoBandJSource,
    psi0: &ManyBodyState,
) -> Result<Trajectory> {
    pulse.validate()?;
    if psi0.basis.sites != 2 {
        return Err(Error::DimensionMismatch(
            "two-band model runs on the 2-site basis".into(),
        ));
    }
    let u = two_band_frozen_interaction(ctx, pulse)?;
    let j = two_band_hoppings(ctx, pulse, j_source)?;
    let dt = pulse.dt_ms();

    let mut states = vec![psi0.clone()];
    let mut times = vec![0.0];
    let mut leakage = vec![psi0.leakage()];
    let mut step_params = Vec::with_capacity(pulse.n_steps());
    let mut psi = psi0.amplitudes.clone();
    for (s, &jv) in j.iter().enumerate() {
        let h = assemble_two_band_hamiltonian(jv, u);
        let u_step = step_propagator_real(&h, dt)?;
        psi = &u_step * psi;
        let state = ManyBodyState::new(psi0.basis.clone(), psi.clone())?;
        leakage.push(state.leakage());
        states.push(state);
        times.push(dt * (s + 1) as f64);
        step_params.push(HubbardParameters {
            j: vec![jv],
            eps: vec![[0.0; 2]],
            u_onsite: vec![[u, u]],
            u_pair: Default::default(),
            dj: vec![[0.0; 2]],
        });
    }
    Ok(Trajectory {
        times_ms: times,
        states,
        leakage,
        step_params,
        model: ModelKind::TwoBand,
    })
}

/// Frozen two-band interaction: the level-0 onsite U of the first segment's
/// Wannier basis, scaled by the pulse's scattering length.
pub fn two_band_frozen_interaction(ctx: &StepContext, pulse: &PulseSchedule) -> Result<f64> {
    if pulse.a_bohr == 0.0 {
        return Ok(0.0);
    }
    let params = ctx.parameters(
        &pulse.depth(0, ctx.config.relative_phase),
        1,
        pulse.a_bohr,
    )?;
    Ok(params.u_onsite[0][0])
}

/// Per-segment two-band hopping from the requested source.
pub fn two_band_hoppings(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    source: TwoBandJSource,
) -> Result<Vec<f64>> {
    (0..pulse.n_steps())
        .map(|s| match source {
            TwoBandJSource::Direct => {
                Ok(ctx.step(&pulse.depth(s, ctx.config.relative_phase), 1)?.raw.j[0])
            }
            TwoBandJSource::Spline(table) => table.value(pulse.v_s_ers[s], pulse.v_l_erl[s]),
        })
        .collect()
}

/// Multiband non-adiabatic propagation with per-step reprojection.
pub fn propagate_multiband(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    n_levels: usize,
    psi0: &ManyBodyState,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    let steps = aligned_steps(ctx, pulse, n_levels)?;
    propagate_aligned(ctx, pulse, &steps, pulse.a_bohr, psi0, opts)
}

/// Propagate over precomputed aligned steps; splitting this out lets a
/// scattering-length scan reuse the expensive per-segment solutions.
pub fn propagate_aligned(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    steps: &[AlignedStep],
    a_bohr: f64,
    psi0: &ManyBodyState,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    let n_levels = steps
        .first()
        .map(|s| s.raw.j.len())
        .ok_or(Error::EmptyGrid)?;
    if psi0.basis.sites != 2 * n_levels {
        return Err(Error::DimensionMismatch(format!(
            "state basis has {} sites, model needs {}",
            psi0.basis.sites,
            2 * n_levels
        )));
    }
    let dt = pulse.dt_ms();
    let basis = &psi0.basis;

    let mut states = vec![psi0.clone()];
    let mut times = vec![0.0];
    let mut leakage = vec![psi0.leakage()];
    let mut step_params = Vec::with_capacity(steps.len());
    let mut psi = psi0.amplitudes.clone();
    for (idx, aligned) in steps.iter().enumerate() {
        let params = scale_parameters(&aligned.raw, &ctx.geom, a_bohr, &ctx.transverse);
        let h = assemble_multiband_hamiltonian(&params, basis)?;
        let u_step = step_propagator_real(&h, dt)?;
        psi = &u_step * psi;
        if let Some(next) = steps.get(idx + 1) {
            let p = lift_projection_to_fock(&next.overlap_from_prev, basis)?;
            let p_c = p.map(|v| Complex64::new(v, 0.0));
            psi = &p_c * psi;
        }
        let state = ManyBodyState::new(basis.clone(), psi.clone())?;
        let leak = state.leakage();
        if leak > opts.leakage_threshold {
            return Err(Error::LeakageExceeded {
                step: idx,
                leakage: leak,
                threshold: opts.leakage_threshold,
            });
        }
        leakage.push(leak);
        states.push(state);
        times.push(dt * (idx + 1) as f64);
        step_params.push(params);
    }
    Ok(Trajectory {
        times_ms: times,
        states,
        leakage,
        step_params,
        model: ModelKind::Multiband(n_levels),
    })
}

/// 3D propagation: four-band x dynamics with reprojection, static two-level
/// y and z directions coupled through the contact interaction.
pub fn propagate_three_d(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    psi0: &ManyBodyState,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    let steps = aligned_steps(ctx, pulse, 2)?;
    let x_basis = FockBasis::enumerate(4, 1, 1)?;
    let t_dim = 16; // 4 y-states x 4 z-states
    if psi0.basis.len() != x_basis.len() * t_dim {
        return Err(Error::DimensionMismatch(format!(
            "3D state needs {} amplitudes, got {}",
            x_basis.len() * t_dim,
            psi0.basis.len()
        )));
    }
    let dt = pulse.dt_ms();
    let mut states = vec![psi0.clone()];
    let mut times = vec![0.0];
    let mut leakage = vec![psi0.leakage()];
    let mut step_params = Vec::with_capacity(steps.len());
    let mut psi = psi0.amplitudes.clone();
    let i_t = DMatrix::<f64>::identity(t_dim, t_dim);
    for (idx, aligned) in steps.iter().enumerate() {
        let model = assemble_3d_hamiltonian(
            &aligned.raw,
            &ctx.geom,
            pulse.a_bohr,
            &ctx.transverse_y,
            &ctx.transverse_z,
        )?;
        let u_step = step_propagator_real(&model.hamiltonian, dt)?;
        psi = &u_step * psi;
        if let Some(next) = steps.get(idx + 1) {
            let p_x = lift_projection_to_fock(&next.overlap_from_prev, &x_basis)?;
            let p = p_x.kronecker(&i_t).map(|v| Complex64::new(v, 0.0));
            psi = &p * psi;
        }
        let state = ManyBodyState::new(psi0.basis.clone(), psi.clone())?;
        let leak = state.leakage();
        if leak > opts.leakage_threshold {
            return Err(Error::LeakageExceeded {
                step: idx,
                leakage: leak,
                threshold: opts.leakage_threshold,
            });
        }
        leakage.push(leak);
        states.push(state);
        times.push(dt * (idx + 1) as f64);
        step_params.push(scale_parameters(
            &aligned.raw,
            &ctx.geom,
            pulse.a_bohr,
            &ctx.transverse,
        ));
    }
    Ok(Trajectory {
        times_ms: times,
        states,
        leakage,
        step_params,
        model: ModelKind::ThreeD,
    })
}

/// Average gate infidelity over a set of (initial, target) pairs:
/// 1 - (1/N) sum |<target_i| U |initial_i>|^2.
pub fn evaluate_gate_cost(
    ctx: &StepContext,
    pulse: &PulseSchedule,
    pairs: &[(ManyBodyState, ManyBodyState)],
    model: ModelKind,
    opts: &PropagateOptions,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut total = 0.0;
    for (ini, tar) in pairs {
        let traj = propagate_nonadiabatic(ctx, pulse, model, ini, opts)?;
        total += 1.0 - evaluate_state_cost(traj.final_state(), tar);
    }
    Ok(1.0 - total / pairs.len() as f64)
}

#[cfg(test)]
mod tests;
