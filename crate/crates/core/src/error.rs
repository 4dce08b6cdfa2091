//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("plane-wave cutoff f_max = {0} too small; the short lattice couples |df| = 2")]
    CutoffTooSmall(usize),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("degenerate position eigenvalues for level {level} (centers {c0:.6} and {c1:.6})")]
    DegeneratePosition { level: usize, c0: f64, c1: f64 },

    #[error("near-degenerate bands at band {band} (gap {gap:.3e} rad/ms); Hellmann-Feynman derivative invalid")]
    DegenerateBands { band: usize, gap: f64 },

    #[error("real-space grids do not match")]
    GridMismatch,

    #[error("Wannier input not normalized (deviation {0:.3e})")]
    NotNormalized(f64),

    #[error("Hubbard parameters cover {have} levels but the basis needs {need}")]
    MissingLevels { have: usize, need: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("query ({vs:.4}, {vl:.4}) outside spline domain V_s in [{vs_min:.4}, {vs_max:.4}], V_l in [{vl_min:.4}, {vl_max:.4}]")]
    OutOfDomain {
        vs: f64,
        vl: f64,
        vs_min: f64,
        vs_max: f64,
        vl_min: f64,
        vl_max: f64,
    },

    #[error("basis truncation leakage {leakage:.3e} above threshold {threshold:.3e} at step {step}")]
    LeakageExceeded {
        step: usize,
        leakage: f64,
        threshold: f64,
    },

    #[error("empty grid")]
    EmptyGrid,

    #[error("finite-difference step {0:.3e} is below the numerical noise floor")]
    StepBelowNoise(f64),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed table file: {0}")]
    TableFormat(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
