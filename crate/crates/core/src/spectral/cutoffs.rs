//! Smooth cutoff functions built from `exp(-1/u)` transitions.
//!
//! Every bump here is a product of the smooth step
//! `s(u) = h(u) / (h(u) + h(1-u))`, `h(u) = exp(-c/u)` for `u > 0`, which is
//! `C^inf`, vanishes for `u <= 0`, equals one for `u >= 1` and satisfies
//! `s(u) + s(1-u) = 1`. The parameter `c` is the smoothness scale.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The family of cutoffs every decomposition is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    scale: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

/// Returns the cutoff family with transitions of the given smoothness scale.
pub fn make_cutoffs(smoothness_scale: f64) -> Result<CutoffSpec> {
    if !(smoothness_scale.is_finite() && smoothness_scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "smoothness scale must be positive, got {smoothness_scale}"
        )));
    }
    Ok(CutoffSpec {
        scale: smoothness_scale,
    })
}

impl CutoffSpec {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Smooth step: 0 for `u <= 0`, 1 for `u >= 1`.
    pub fn step(&self, u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            let a = (-self.scale / u).exp();
            let b = (-self.scale / (1.0 - u)).exp();
            a / (a + b)
        }
    }

    /// Annular bump: supported in `1/2 < r < 2`, equal to one on
    /// `2^{-1/2} <= r <= 2^{1/2}`.
    pub fn theta(&self, r: f64) -> f64 {
        let r = r.abs();
        let inner = std::f64::consts::FRAC_1_SQRT_2;
        if r <= 0.5 || r >= 2.0 {
            0.0
        } else if r < inner {
            self.step((r - 0.5) / (inner - 0.5))
        } else if r <= SQRT_2 {
            1.0
        } else {
            1.0 - self.step((r - SQRT_2) / (2.0 - SQRT_2))
        }
    }

    /// Low-frequency cutoff: one on `|r| <= 1`, zero for `|r| >= 2`.
    pub fn chi0(&self, r: f64) -> f64 {
        1.0 - self.step(r.abs() - 1.0)
    }

    /// Dyadic annulus `chi0(r) - chi0(2r)`, supported in `1/2 < |r| < 2`.
    pub fn chi(&self, r: f64) -> f64 {
        self.chi0(r) - self.chi0(2.0 * r)
    }

    /// Littlewood–Paley piece `k`: `chi0` for `k = 0`, `chi(2^-k r)` otherwise.
    pub fn lp_piece(&self, k: u32, r: f64) -> f64 {
        if k == 0 {
            self.chi0(r)
        } else {
            self.chi(r / 2f64.powi(k as i32))
        }
    }

    /// One-dimensional factor of the cube bump: supported in `[-3/5, 3/5]`,
    /// one on `[-2/5, 2/5]`, integer translates sum to one.
    pub fn vartheta_1d(&self, u: f64) -> f64 {
        if u <= 0.0 {
            self.step(5.0 * u + 3.0)
        } else {
            1.0 - self.step(5.0 * u - 2.0)
        }
    }

    /// Tensor-product cube bump on `R^d`.
    pub fn vartheta(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&u| self.vartheta_1d(u)).product()
    }

    /// Radial cutoff for the near-diagonal weights: one for
    /// `|w| <= 8 sqrt(d)`, supported in `|w| < 16 sqrt(d)`.
    pub fn chi0_radial(&self, r: f64, dim: usize) -> f64 {
        let inner = 8.0 * (dim as f64).sqrt();
        1.0 - self.step((r.abs() - inner) / inner)
    }

    /// Canonical mollifier `exp(1 - 1/(1-u^2))` on `(-1, 1)`, normalised to
    /// one at the origin.
    pub fn bump(&self, u: f64) -> f64 {
        let u2 = u * u;
        if u2 >= 1.0 {
            0.0
        } else {
            (self.scale * (1.0 - 1.0 / (1.0 - u2))).exp()
        }
    }
}
