//! Closed-form two-band results: time-optimal constant pulse, quantum speed
//! limit, and the exact transfer trajectory.
//!
//! With the interaction off, the two-band transfer problem reduces to a
//! three-level system over |up down>, |down up>, and the symmetric
//! double-occupancy combination; the time-optimal control is a constant
//! hopping at its maximum value and the fastest transfer takes
//! T = pi / (2 J_max), reaching the target with an overall -1 phase.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Constant-pulse solution at hopping amplitude `amplitude` (angular kHz).
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSolution {
    pub amplitude: f64,
}

impl AnalyticSolution {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "hopping amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Self { amplitude })
    }

    pub fn qsl_duration(&self) -> f64 {
        qsl_duration(self.amplitude).expect("validated amplitude")
    }

    pub fn trajectory(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        analytic_trajectory(self.amplitude, t)
    }
}

/// Minimum SWAP transfer time T = pi / (2 J_max) in ms for J_max in angular
/// kHz.
pub fn qsl_duration(j_max: f64) -> Result<f64> {
    if !(j_max > 0.0) || !j_max.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "J_max must be positive and finite, got {j_max}"
        )));
    }
    Ok(std::f64::consts::PI / (2.0 * j_max))
}

/// Exact constant-pulse trajectory: amplitudes of |up down>, |down up>, and
/// the symmetric double-occupancy state at time t (ms).
pub fn analytic_trajectory(amplitude: f64, t: f64) -> (Complex64, Complex64, Complex64) {
    let at = amplitude * t;
    let x1 = Complex64::new(at.cos().powi(2), 0.0);
    let x2 = Complex64::new(-at.sin().powi(2), 0.0);
    let x3 = Complex64::new(0.0, (2.0 * at).sin() / std::f64::consts::SQRT_2);
    (x1, x2, x3)
}

/// The reduced three-level generator with j_tilde = -sqrt(2) J: the matrix of
/// i d/dt (x1, x2, x3) in the symmetric subspace.
pub fn reduced_three_level_hamiltonian(j: f64) -> DMatrix<f64> {
    let jt = -std::f64::consts::SQRT_2 * j;
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, jt, 0.0, 0.0, jt, jt, jt, 0.0])
}

/// Propagate the reduced three-level system under a constant hopping for
/// time t; reference dynamics for cross-validation.
pub fn propagate_reduced(j: f64, t: f64, steps: usize) -> DVector<Complex64> {
    let h = reduced_three_level_hamiltonian(j);
    let dt = t / steps as f64;
    let u = crate::dynamics::step_propagator_real(&h, dt).expect("3x3 propagator");
    let mut psi = DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ]);
    for _ in 0..steps {
        psi = &u * psi;
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn qsl_matches_reference_value() {
        // J_max = 34.03 angular kHz -> 0.046 ms at printed precision
        let t = qsl_duration(34.03).unwrap();
        assert_relative_eq!(t, 0.04616, epsilon = 5e-6);
        assert_eq!(format!("{t:.3}"), "0.046");
        // inverse proportionality
        assert_relative_eq!(qsl_duration(68.06).unwrap(), t / 2.0, epsilon = 1e-15);
        assert!(qsl_duration(0.0).is_err());
        assert!(qsl_duration(-1.0).is_err());
    }

    #[test]
    fn trajectory_hits_the_marked_points() {
        let a = 34.03;
        let (x1, x2, x3) = analytic_trajectory(a, 0.0);
        assert_eq!((x1.re, x2.re, x3.im), (1.0, 0.0, 0.0));

        let t_qsl = qsl_duration(a).unwrap();
        let (x1, x2, x3) = analytic_trajectory(a, t_qsl / 2.0);
        assert_relative_eq!(x1.re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(x2.re, -0.5, epsilon = 1e-12);
        assert_relative_eq!(x3.im, 1.0 / 2.0f64.sqrt(), epsilon = 1e-12);
        let norm = x1.norm_sqr() + x2.norm_sqr() + x3.norm_sqr();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-12);

        // full transfer with the -1 phase at the speed limit
        let (x1, x2, x3) = analytic_trajectory(a, t_qsl);
        assert!(x1.norm() < 1e-12);
        assert_relative_eq!(x2.re, -1.0, epsilon = 1e-12);
        assert!(x3.norm() < 1e-12);
    }

    #[test]
    fn norm_is_conserved_along_the_trajectory() {
        let a = 21.7;
        for i in 0..50 {
            let t = i as f64 * 0.003;
            let (x1, x2, x3) = analytic_trajectory(a, t);
            let norm = x1.norm_sqr() + x2.norm_sqr() + x3.norm_sqr();
            assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reduced_system_propagation_matches_closed_form() {
        let j = 34.03;
        let t_qsl = qsl_duration(j).unwrap();
        for i in 0..100 {
            let t = t_qsl * (i as f64 + 1.0) / 100.0 * 1.8;
            let psi = propagate_reduced(j, t, 1);
            let (x1, x2, x3) = analytic_trajectory(j, t);
            assert!((psi[0] - x1).norm() < 1e-10);
            assert!((psi[1] - x2).norm() < 1e-10);
            assert!((psi[2] - x3).norm() < 1e-10);
        }
    }

    #[test]
    fn intermediate_state_peaks_at_half_transfer() {
        let a = 34.03;
        let t_qsl = qsl_duration(a).unwrap();
        let peak = analytic_trajectory(a, t_qsl / 2.0).2.norm_sqr();
        assert_relative_eq!(peak, 0.5, epsilon = 1e-12);
        for i in 1..40 {
            let t = t_qsl * i as f64 / 40.0;
            assert!(analytic_trajectory(a, t).2.norm_sqr() <= peak + 1e-12);
        }
    }
}
