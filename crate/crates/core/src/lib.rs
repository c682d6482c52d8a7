//! Numerical laboratory for fractional Schrödinger propagators
//! `exp(i t |D|^alpha)`: spectral grids, frequency decompositions, space-time
//! norms, extremal initial data and scaling-law sweeps.

pub mod decomposition;
pub mod error;
pub mod extremizers;
pub mod harness;
pub mod norms;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
pub use propagator::{DispersionParams, EllipticPhase, Trajectory};
pub use spectral::{Field, GridSpec, Representation};

/// Environment variable holding the largest number of complex samples a
/// single stored field may have.
pub const MEMORY_CAP_ENV: &str = "DISPERSIVE_MEMORY_CAP";
/// Environment variable bounding the worker threads used by sweeps.
pub const WORKERS_ENV: &str = "DISPERSIVE_MAX_WORKERS";

const DEFAULT_MEMORY_CAP: usize = 1 << 24;

/// Sample cap from [`MEMORY_CAP_ENV`], defaulting to `2^24` (256 MiB of
/// complex doubles).
pub fn memory_cap() -> usize {
    std::env::var(MEMORY_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0)
        .unwrap_or(DEFAULT_MEMORY_CAP)
}

/// Worker bound from [`WORKERS_ENV`]; `None` lets the thread pool decide.
pub fn max_workers() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&v: &usize| v > 0)
}
