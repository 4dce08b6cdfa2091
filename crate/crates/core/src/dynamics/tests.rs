use std::sync::OnceLock;

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::*;
use crate::fock::assemble_two_band_hamiltonian;

fn ctx() -> &'static StepContext {
    static CTX: OnceLock<StepContext> = OnceLock::new();
    CTX.get_or_init(|| StepContext::new(&LatticeConfig::li6_superlattice()).unwrap())
}

fn bounds() -> PulseBounds {
    PulseBounds {
        v_s: (0.1, 45.0),
        v_l: (7.0, 50.0),
    }
}

fn two_band_basis() -> std::sync::Arc<FockBasis> {
    FockBasis::enumerate(2, 1, 1).unwrap()
}

fn four_band_basis() -> std::sync::Arc<FockBasis> {
    FockBasis::enumerate(4, 1, 1).unwrap()
}

#[test]
fn zero_hamiltonian_propagates_to_identity() {
    let h = DMatrix::<Complex64>::zeros(5, 5);
    let u = step_propagator(&h, 0.37).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((u[(i, j)] - Complex64::new(target, 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn propagator_is_unitary_for_random_hermitian_matrices() {
    let mut state = 0x853c49e6748fea9bu64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64) - 0.5
    };
    for n in [2usize, 5, 9] {
        let raw = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
        let h = (&raw + raw.adjoint()).scale(3.0);
        let u = step_propagator(&h, 0.21).unwrap();
        let residual = (&u * u.adjoint() - DMatrix::identity(n, n)).camax();
        assert!(residual < 1e-12, "unitarity defect {residual:.2e}");
    }
}

#[test]
fn constant_hopping_follows_the_closed_form_trajectory() {
    let j = 27.4;
    let h = assemble_two_band_hamiltonian(j, 0.0);
    for i in 1..=20 {
        let t = 0.004 * i as f64;
        let u = step_propagator_real(&h, t).unwrap();
        let mut psi = DVector::from_element(4, Complex64::new(0.0, 0.0));
        psi[1] = Complex64::new(1.0, 0.0);
        psi = &u * psi;
        let (x1, x2, x3) = crate::analytic::analytic_trajectory(j, t);
        assert!((psi[1] - x1).norm() < 1e-10);
        assert!((psi[2] - x2).norm() < 1e-10);
        let sym = (psi[0] + psi[3]) / Complex64::new(2.0f64.sqrt(), 0.0);
        assert!((sym - x3).norm() < 1e-10);
        // antisymmetric combination stays empty
        assert!((psi[0] - psi[3]).norm() < 1e-12);
    }
}

#[test]
fn directional_derivative_matches_finite_difference() {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64) - 0.5
    };
    let n = 6;
    let raw = DMatrix::from_fn(n, n, |_, _| next());
    let h = (&raw + raw.transpose()).scale(8.0);
    let rawd = DMatrix::from_fn(n, n, |_, _| next());
    let d = &rawd + rawd.transpose();
    let dt = 0.05;
    let eig = eig_real(&h).unwrap();
    let deriv = propagator_directional_derivative(&eig, &d, dt);
    let eps = 1e-6;
    let plus = step_propagator_real(&(&h + d.scale(eps)), dt).unwrap();
    let minus = step_propagator_real(&(&h - d.scale(eps)), dt).unwrap();
    let fd = (plus - minus).map(|v| v / (2.0 * eps));
    let diff = (&deriv - &fd).camax();
    assert!(diff < 1e-7, "directional derivative defect {diff:.2e}");
}

#[test]
fn constant_depth_pulse_matches_plain_piecewise_propagation() {
    let pulse = PulseSchedule {
        duration_ms: 0.04,
        v_s_ers: vec![10.0; 8],
        v_l_erl: vec![35.0; 8],
        a_bohr: 800.0,
        bounds: bounds(),
    };
    let basis = four_band_basis();
    let psi0 = ManyBodyState::basis_state(&basis, 0b0001, 0b0010).unwrap();
    let traj = propagate_multiband(ctx(), &pulse, 2, &psi0, &PropagateOptions::default()).unwrap();

    // plain product of segment propagators, no reprojection
    let params = ctx().parameters(&pulse.depth(0, 0.0), 2, pulse.a_bohr).unwrap();
    let h = assemble_multiband_hamiltonian(&params, &basis).unwrap();
    let u = step_propagator_real(&h, pulse.dt_ms()).unwrap();
    let mut psi = psi0.amplitudes.clone();
    for _ in 0..8 {
        psi = &u * psi;
    }
    let diff: f64 = (psi - &traj.final_state().amplitudes).norm();
    assert!(diff < 1e-10, "static-basis mismatch {diff:.2e}");
    assert!(traj.max_leakage() < 1e-12);
}

#[test]
fn norm_is_conserved_without_projection() {
    let pulse = PulseSchedule {
        duration_ms: 0.06,
        v_s_ers: vec![30.0, 20.0, 8.0, 3.0, 3.0, 8.0, 20.0, 30.0],
        v_l_erl: vec![30.0; 8],
        a_bohr: 0.0,
        bounds: bounds(),
    };
    let basis = two_band_basis();
    let psi0 = ManyBodyState::basis_state(&basis, 0b01, 0b10).unwrap();
    let traj = propagate_two_band(ctx(), &pulse, TwoBandJSource::Direct, &psi0).unwrap();
    for state in &traj.states {
        assert!((state.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn swap_pulse_transfers_both_directions_with_equal_cost() {
    let pulse = PulseSchedule {
        duration_ms: 0.08,
        v_s_ers: vec![40.0, 25.0, 10.0, 2.0, 2.0, 2.0, 10.0, 25.0, 40.0, 40.0],
        v_l_erl: vec![32.0; 10],
        a_bohr: 500.0,
        bounds: bounds(),
    };
    let basis = four_band_basis();
    let up_down = ManyBodyState::basis_state(&basis, 0b0001, 0b0010).unwrap();
    let down_up = ManyBodyState::basis_state(&basis, 0b0010, 0b0001).unwrap();
    let opts = PropagateOptions::default();
    let fwd = propagate_multiband(ctx(), &pulse, 2, &up_down, &opts).unwrap();
    let bwd = propagate_multiband(ctx(), &pulse, 2, &down_up, &opts).unwrap();
    let c_fwd = evaluate_state_cost(fwd.final_state(), &down_up);
    let c_bwd = evaluate_state_cost(bwd.final_state(), &up_down);
    assert_relative_eq!(c_fwd, c_bwd, epsilon = 1e-12);
}

#[test]
fn halving_the_sampling_step_barely_moves_the_cost() {
    // a smooth profile sampled at dt and dt/2
    let profile = |t: f64, total: f64| {
        let s = (std::f64::consts::PI * t / total).sin();
        (30.0 - 27.0 * s * s, 32.0)
    };
    let total = 0.1;
    let build = |n: usize| {
        let mut vs = Vec::with_capacity(n);
        let mut vl = Vec::with_capacity(n);
        for i in 0..n {
            let t = total * (i as f64 + 0.5) / n as f64;
            let (a, b) = profile(t, total);
            vs.push(a);
            vl.push(b);
        }
        PulseSchedule {
            duration_ms: total,
            v_s_ers: vs,
            v_l_erl: vl,
            a_bohr: 0.0,
            bounds: bounds(),
        }
    };
    let basis = four_band_basis();
    let psi0 = ManyBodyState::basis_state(&basis, 0b0001, 0b0010).unwrap();
    let target = ManyBodyState::basis_state(&basis, 0b0010, 0b0001).unwrap();
    let opts = PropagateOptions::default();
    let coarse = propagate_multiband(ctx(), &build(20), 2, &psi0, &opts).unwrap();
    let fine = propagate_multiband(ctx(), &build(40), 2, &psi0, &opts).unwrap();
    let c0 = evaluate_state_cost(coarse.final_state(), &target);
    let c1 = evaluate_state_cost(fine.final_state(), &target);
    assert!((c0 - c1).abs() < 1e-4, "refinement moved cost by {:.2e}", (c0 - c1).abs());
}

#[test]
fn leakage_threshold_aborts_with_diagnostics() {
    let pulse = PulseSchedule {
        duration_ms: 0.02,
        v_s_ers: vec![45.0, 0.1, 45.0, 0.1],
        v_l_erl: vec![50.0, 7.0, 50.0, 7.0],
        a_bohr: 0.0,
        bounds: bounds(),
    };
    let basis = four_band_basis();
    let psi0 = ManyBodyState::basis_state(&basis, 0b0001, 0b0010).unwrap();
    let opts = PropagateOptions {
        leakage_threshold: 1e-9,
    };
    match propagate_multiband(ctx(), &pulse, 2, &psi0, &opts) {
        Err(Error::LeakageExceeded { leakage, .. }) => assert!(leakage > 1e-9),
        other => panic!("expected leakage abort, got {other:?}"),
    }
}

#[test]
fn state_cost_limits() {
    let basis = two_band_basis();
    let a = ManyBodyState::basis_state(&basis, 0b01, 0b10).unwrap();
    let b = ManyBodyState::basis_state(&basis, 0b10, 0b01).unwrap();
    assert_relative_eq!(evaluate_state_cost(&a, &a), 0.0, epsilon = 1e-15);
    assert_relative_eq!(evaluate_state_cost(&a, &b), 1.0, epsilon = 1e-15);
    let mut half = a.clone();
    half.amplitudes = (a.amplitudes.clone() + b.amplitudes.clone()).scale(1.0 / 2.0f64.sqrt());
    assert_relative_eq!(evaluate_state_cost(&half, &b), 0.5, epsilon = 1e-12);
}

#[test]
fn gate_cost_requires_pairs_and_matches_state_cost_for_the_swap_set() {
    let pulse = PulseSchedule {
        duration_ms: 0.05,
        v_s_ers: vec![30.0, 12.0, 4.0, 12.0, 30.0],
        v_l_erl: vec![30.0; 5],
        a_bohr: 0.0,
        bounds: bounds(),
    };
    let basis = two_band_basis();
    let ud = ManyBodyState::basis_state(&basis, 0b01, 0b10).unwrap();
    let du = ManyBodyState::basis_state(&basis, 0b10, 0b01).unwrap();
    let opts = PropagateOptions::default();
    assert!(matches!(
        evaluate_gate_cost(ctx(), &pulse, &[], ModelKind::TwoBand, &opts),
        Err(Error::EmptyGrid)
    ));
    let pairs = vec![(ud.clone(), du.clone()), (du.clone(), ud.clone())];
    let gate = evaluate_gate_cost(ctx(), &pulse, &pairs, ModelKind::TwoBand, &opts).unwrap();
    let traj = propagate_two_band(ctx(), &pulse, TwoBandJSource::Direct, &ud).unwrap();
    let state = evaluate_state_cost(traj.final_state(), &du);
    assert_relative_eq!(gate, state, epsilon = 1e-10);
}

#[test]
fn pulse_validation_rejects_bound_violations() {
    let mut pulse = PulseSchedule {
        duration_ms: 0.01,
        v_s_ers: vec![10.0, 10.0],
        v_l_erl: vec![30.0, 30.0],
        a_bohr: 0.0,
        bounds: bounds(),
    };
    assert!(pulse.validate().is_ok());
    pulse.v_s_ers[1] = 60.0;
    assert!(pulse.validate().is_err());
    pulse.v_s_ers.pop();
    assert!(pulse.validate().is_err());
}
