//! Discrete norms on fields and trajectories, and the critical exponents of
//! the smoothing, maximal and Airy estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decomposition::band_project;
use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::spectral::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lp,
    MixedSpacetime,
    Maximal,
    Sobolev,
    Besov,
}

/// Which norm to compute; `p = inf` is allowed, `beta` is only read by the
/// Sobolev and Besov kinds and `q` only by Besov.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub kind: NormKind,
    pub p: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "one")]
    pub q: f64,
}

fn one() -> f64 {
    1.0
}

impl NormSpec {
    pub fn new(kind: NormKind, p: f64, beta: f64, q: f64) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { kind, p, beta, q })
    }

    /// Norm of a single field; errors for the trajectory kinds.
    pub fn of_field(&self, f: &Field) -> Result<f64> {
        match self.kind {
            NormKind::Lp => lp_norm(f, self.p),
            NormKind::Sobolev => sobolev_norm(f, self.p, self.beta),
            NormKind::Besov => besov_norm(f, self.p, self.beta, self.q),
            NormKind::MixedSpacetime | NormKind::Maximal => Err(Error::InvalidParameter(
                "space-time norms need a trajectory".into(),
            )),
        }
    }

    /// Norm of a trajectory; errors for the single-field kinds.
    pub fn of_trajectory(&self, traj: &Trajectory) -> Result<f64> {
        match self.kind {
            NormKind::MixedSpacetime => mixed_spacetime_norm(traj, self.p),
            NormKind::Maximal => maximal_norm(traj, self.p),
            _ => Err(Error::InvalidParameter(
                "fixed-time norms apply to a single field".into(),
            )),
        }
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be at least 1, got {p}"
        )));
    }
    Ok(())
}

/// `sum |v|^p * weight` or the max for `p = inf`, on raw samples.
pub fn lp_sum(samples: &[Complex64], p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else if p == 2.0 {
        samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * weight
    } else {
        samples.iter().map(|z| z.norm().powf(p)).sum::<f64>() * weight
    }
}

/// Riemann-sum `(sum |f(x_n)|^p (2L/N)^d)^(1/p)`; the max for `p = inf`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let phys = f.to_physical()?;
    let s = lp_sum(phys.samples(), p, phys.grid().cell_volume());
    Ok(if p.is_infinite() { s } else { s.powf(1.0 / p) })
}

/// Rectangle-rule weights: each sample owns the part of `interval` closer
/// to it than to its neighbours.
pub fn time_weights(t_samples: &[f64], interval: (f64, f64)) -> Vec<f64> {
    let n = t_samples.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 {
                interval.0
            } else {
                0.5 * (t_samples[i - 1] + t_samples[i])
            };
            let right = if i + 1 == n {
                interval.1
            } else {
                0.5 * (t_samples[i] + t_samples[i + 1])
            };
            right - left
        })
        .collect()
}

/// Combines per-frame `||u(t_i)||_p^p` values (or maxima for `p = inf`) with
/// rectangle-rule weights.
pub fn combine_frames(frame_powers: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        frame_powers.iter().cloned().fold(0.0, f64::max)
    } else {
        let s: f64 = frame_powers.iter().zip(weights).map(|(a, w)| a * w).sum();
        s.powf(1.0 / p)
    }
}

/// `(int_I ||u(t)||_p^p dt)^(1/p)` by the rectangle rule in time.
pub fn mixed_spacetime_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let vol = traj.grid().cell_volume();
    let powers: Vec<f64> = traj
        .frames()
        .iter()
        .map(|f| lp_sum(f.samples(), p, vol))
        .collect();
    let w = time_weights(traj.t_samples(), traj.interval());
    Ok(combine_frames(&powers, &w, p))
}

/// `|| sup_t |u(., t)| ||_p` with the supremum over the sampled frames.
pub fn maximal_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    let mut sup = vec![0.0f64; traj.grid().len()];
    for f in traj.frames() {
        for (s, z) in sup.iter_mut().zip(f.samples()) {
            *s = s.max(z.norm());
        }
    }
    let vol = traj.grid().cell_volume();
    Ok(if p.is_infinite() {
        sup.iter().cloned().fold(0.0, f64::max)
    } else {
        (sup.iter().map(|v| v.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
    })
}

/// Bessel-potential norm `|| F^-1[(1 + |xi|^2)^(beta/2) fhat] ||_p`.
pub fn sobolev_norm(f: &Field, p: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return lp_norm(f, p);
    }
    let weighted = f.apply_symbol(&|xi: &[f64]| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        Complex64::new((1.0 + r2).powf(0.5 * beta), 0.0)
    })?;
    lp_norm(&weighted, p)
}

/// Highest band index whose support meets the lattice of `f`.
pub fn top_band(f: &Field) -> u32 {
    let g = f.grid();
    let reach = g.nyquist() * (g.dim() as f64).sqrt();
    let mut k = 0;
    while 2f64.powi(k as i32) < reach {
        k += 1;
    }
    k
}

/// `(sum_k 2^(k beta q) ||L_k f||_p^q)^(1/q)`, a sup over bands for `q = inf`.
pub fn besov_norm(f: &Field, p: f64, beta: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    let spectrum = f.to_frequency()?;
    let mut acc = 0.0f64;
    for k in 0..=top_band(f) {
        let piece = band_project(&spectrum, k)?;
        let term = 2f64.powf(k as f64 * beta) * lp_norm(&piece, p)?;
        if q.is_infinite() {
            acc = acc.max(term);
        } else {
            acc += term.powf(q);
        }
    }
    Ok(if q.is_infinite() { acc } else { acc.powf(1.0 / q) })
}

/// Parameters of an exponent formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentQuery {
    pub alpha: f64,
    pub dim: usize,
    pub p: f64,
}

impl ExponentQuery {
    pub fn new(alpha: f64, dim: usize, p: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        check_exponent("p", p)?;
        Ok(Self { alpha, dim, p })
    }

    /// Whether `p` lies strictly above the admissibility threshold.
    pub fn is_admissible(&self) -> bool {
        self.p > admissibility_threshold(self.dim)
    }
}

/// Critical space-time smoothing index `alpha (d (1/2 - 1/p) - 1/p)`.
pub fn smoothing_exponent(q: &ExponentQuery) -> f64 {
    let d = q.dim as f64;
    q.alpha * (d * (0.5 - 1.0 / q.p) - 1.0 / q.p)
}

/// Critical maximal-function index `alpha d (1/2 - 1/p)`.
pub fn maximal_exponent(q: &ExponentQuery) -> f64 {
    q.alpha * q.dim as f64 * (0.5 - 1.0 / q.p)
}

/// Necessary maximal-function index `alpha / (2p)`.
pub fn maximal_necessary_exponent(q: &ExponentQuery) -> f64 {
    q.alpha / (2.0 * q.p)
}

/// Space-time regularity index `3(p - 4)/(2p)` of the Airy flow.
pub fn airy_exponent(p: f64) -> f64 {
    3.0 * (p - 4.0) / (2.0 * p)
}

/// Lower end `2 + 4/(d+1)` of the admissible exponent range.
pub fn admissibility_threshold(dim: usize) -> f64 {
    // one rounding, so rational thresholds come out exact
    (2.0 * dim as f64 + 6.0) / (dim as f64 + 1.0)
}
