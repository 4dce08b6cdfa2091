//! Noise and leakage studies (in progress).
