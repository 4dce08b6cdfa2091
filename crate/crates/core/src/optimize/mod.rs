//! Gradient-based pulse optimization (in progress).
