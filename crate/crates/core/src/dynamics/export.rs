//! File exports for trajectories: a CSV with per-step amplitudes and a JSON
//! sidecar carrying model metadata, costs, and leakage.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

use super::Trajectory;

/// Write the trajectory as rows of (t_ms, basis_label, re, im, prob).
pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_ms", "basis_label", "re", "im", "prob"])?;
    for (t, state) in traj.times_ms.iter().zip(&traj.states) {
        for (i, amp) in state.amplitudes.iter().enumerate() {
            w.write_record([
                format!("{t:.9}"),
                state.basis.state_label(i),
                format!("{:.12e}", amp.re),
                format!("{:.12e}", amp.im),
                format!("{:.12e}", amp.norm_sqr()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct TrajectorySidecar {
    pub model: String,
    pub n_steps: usize,
    pub dt_ms: f64,
    pub max_leakage: f64,
    pub final_leakage: f64,
    pub costs: serde_json::Map<String, serde_json::Value>,
}

/// Write the JSON sidecar next to a trajectory CSV.
pub fn write_trajectory_sidecar(
    traj: &Trajectory,
    costs: &[(&str, f64)],
    path: &Path,
) -> Result<()> {
    let mut map = serde_json::Map::new();
    for (k, v) in costs {
        map.insert(k.to_string(), serde_json::json!(v));
    }
    let sidecar = TrajectorySidecar {
        model: traj.model.tag(),
        n_steps: traj.times_ms.len().saturating_sub(1),
        dt_ms: if traj.times_ms.len() > 1 {
            traj.times_ms[1] - traj.times_ms[0]
        } else {
            0.0
        },
        max_leakage: traj.max_leakage(),
        final_leakage: *traj.leakage.last().unwrap_or(&0.0),
        costs: map,
    };
    std::fs::write(path, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}
