//! Scaling sweeps over `lambda`, log-log regression and verdicts against the
//! critical exponents.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremizers::{
    smoothing_frame, smoothing_frame_grid, Family, MovingFrame, DECIMATED_POINTS, DEFAULT_EPSILON,
};
use crate::norms::{
    admissibility_threshold, airy_exponent, combine_frames, lp_norm, lp_sum, maximal_exponent,
    maximal_necessary_exponent, smoothing_exponent, sobolev_norm, time_weights, ExponentQuery,
};
use crate::propagator::DispersionParams;
use crate::spectral::{CutoffSpec, Field, GridSpec, Representation};

/// Uniform time samples on `[0, 1]` unless configured otherwise.
pub const DEFAULT_UNIFORM_SAMPLES: usize = 64;
/// Samples in the refined window `1 - 4 lambda^-alpha <= t <= 1`.
pub const FOCUS_WINDOW_SAMPLES: usize = 64;
/// Width of the refined window in units of `lambda^-alpha`.
pub const FOCUS_WINDOW_WIDTH: f64 = 4.0;
/// Geometric samples per octave between the window and the uniform grid.
pub const BRIDGE_PER_OCTAVE: usize = 4;
/// Default slope tolerance.
pub const DEFAULT_TOLERANCE: f64 = 0.1;
/// Time samples per packet ripple in maximal sweeps (see [`packet_time_samples`]).
const PACKET_SAMPLES_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepNorm {
    /// `(int_0^1 ||U_t f||_p^p dt)^(1/p)`.
    MixedSpacetime,
    /// `|| sup_{0 <= t <= 1} |U_t f| ||_p`.
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    /// `exp(i t |D|^alpha)`.
    Fractional,
    /// `u_t + u_xxx = 0`, run on data with spectrum in `xi > 0`.
    Airy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// `lambda^beta ||f||_p`.
    Weighted,
    /// `|| (1 - Delta)^(beta/2) f ||_p`.
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimePolicy {
    pub uniform: usize,
    pub focusing: bool,
}

impl Default for TimePolicy {
    fn default() -> Self {
        Self {
            uniform: DEFAULT_UNIFORM_SAMPLES,
            focusing: true,
        }
    }
}

/// One scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub family: Family,
    pub alpha: f64,
    pub dim: usize,
    pub p: f64,
    pub beta: f64,
    pub lambdas: Vec<f64>,
    pub norm: SweepNorm,
    pub time: TimePolicy,
    pub flow: Flow,
    pub denominator: Denominator,
    pub epsilon: f64,
    /// Physical samples kept per one-dimensional frame.
    pub max_points: usize,
}

impl SweepConfig {
    /// `f_lambda` with the mixed space-time norm and focusing refinement.
    pub fn smoothing(alpha: f64, dim: usize, p: f64, beta: f64, lambdas: Vec<f64>) -> Self {
        Self {
            family: Family::SmoothingFLambda,
            alpha,
            dim,
            p,
            beta,
            lambdas,
            norm: SweepNorm::MixedSpacetime,
            time: TimePolicy::default(),
            flow: Flow::Fractional,
            denominator: Denominator::Weighted,
            epsilon: DEFAULT_EPSILON,
            max_points: DECIMATED_POINTS,
        }
    }

    /// `g_lambda` with the maximal norm.
    pub fn maximal(alpha: f64, dim: usize, p: f64, beta: f64, lambdas: Vec<f64>) -> Self {
        Self {
            family: Family::MaximalGLambda,
            norm: SweepNorm::Maximal,
            time: TimePolicy {
                uniform: DEFAULT_UNIFORM_SAMPLES,
                focusing: false,
            },
            ..Self::smoothing(alpha, dim, p, beta, lambdas)
        }
    }

    /// One-sided `f_lambda` under the Airy flow.
    pub fn airy(p: f64, beta: f64, lambdas: Vec<f64>) -> Self {
        Self {
            flow: Flow::Airy,
            ..Self::smoothing(3.0, 1, p, beta, lambdas)
        }
    }

    pub fn params(&self) -> Result<DispersionParams> {
        DispersionParams::new(self.alpha, self.dim)
    }

    /// Structural checks; `for_verdict` additionally requires `p` above the
    /// admissibility threshold and at least four `lambda` values.
    pub fn validate(&self, for_verdict: bool) -> Result<()> {
        self.params()?;
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be finite and >= 1, got {}", self.p)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidParameter("no lambda values".into()));
        }
        for w in self.lambdas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter(format!(
                    "lambda values must increase, got {:?}",
                    self.lambdas
                )));
            }
        }
        if self.time.uniform < 2 {
            return Err(Error::InvalidParameter("need at least 2 uniform time samples".into()));
        }
        if self.max_points < 8 {
            return Err(Error::InvalidParameter("max_points must be at least 8".into()));
        }
        match (self.family, self.norm) {
            (Family::SmoothingFLambda, SweepNorm::Maximal) => {
                return Err(Error::InvalidParameter(
                    "the maximal norm is only swept for maximal_g_lambda".into(),
                ))
            }
            (Family::MaximalGLambda, _) if self.flow == Flow::Airy => {
                return Err(Error::InvalidParameter("the Airy sweep uses smoothing_f_lambda".into()))
            }
            _ => {}
        }
        if self.flow == Flow::Airy && (self.alpha != 3.0 || self.dim != 1) {
            return Err(Error::InvalidParameter("the Airy flow needs alpha = 3, d = 1".into()));
        }
        if for_verdict {
            if self.lambdas.len() < 4 {
                return Err(Error::InvalidParameter(format!(
                    "a verdict needs at least 4 lambda values, got {}",
                    self.lambdas.len()
                )));
            }
            let threshold = admissibility_threshold(self.dim);
            if self.flow == Flow::Fractional && !(self.p > threshold) {
                return Err(Error::InvalidParameter(format!(
                    "p = {} must exceed {threshold}",
                    self.p
                )));
            }
        }
        Ok(())
    }
}

/// Unweighted measurement at one `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub lambda: f64,
    /// Lattice points per axis of the `t = 0` frame.
    pub points: usize,
    pub half_width: f64,
    pub t_samples: usize,
    pub numerator: f64,
    /// `||f||_p` for the weighted denominator, the Sobolev norm at the
    /// configured `beta` otherwise.
    pub datum_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub points: usize,
    pub half_width: f64,
    pub t_samples: usize,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Measurements of one sweep; denominators for other `beta` follow without
/// recomputing the flow when the denominator is weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeasurements {
    pub config: SweepConfig,
    pub rows: Vec<Measurement>,
}

impl SweepMeasurements {
    pub fn records(&self, beta: f64) -> Result<Vec<SweepRecord>> {
        if self.config.denominator == Denominator::Sobolev && beta != self.config.beta {
            return Err(Error::InvalidParameter(format!(
                "Sobolev denominators were measured at beta = {}, not {beta}",
                self.config.beta
            )));
        }
        self.rows
            .iter()
            .map(|m| {
                let denominator = match self.config.denominator {
                    Denominator::Weighted => m.lambda.powf(beta) * m.datum_norm,
                    Denominator::Sobolev => m.datum_norm,
                };
                let ratio = m.numerator / denominator;
                if !(ratio.is_finite() && ratio > 0.0 && m.numerator > 0.0) {
                    return Err(Error::NonFinite(format!(
                        "ratio {ratio} at lambda = {} (numerator {}, denominator {denominator})",
                        m.lambda, m.numerator
                    )));
                }
                Ok(SweepRecord {
                    lambda: m.lambda,
                    points: m.points,
                    half_width: m.half_width,
                    t_samples: m.t_samples,
                    numerator: m.numerator,
                    denominator,
                    ratio,
                })
            })
            .collect()
    }
}

/// Time samples on `[0, 1]`: `uniform` equispaced points, plus, with
/// `focusing`, [`FOCUS_WINDOW_SAMPLES`] points on
/// `[1 - 4 lambda^-alpha, 1]` and a geometric bridge in `1 - t` from the
/// window edge up to `1/64`.
pub fn focusing_times(lambda: f64, alpha: f64, uniform: usize, focusing: bool) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..uniform)
        .map(|i| i as f64 / (uniform - 1) as f64)
        .collect();
    if focusing {
        let width = (FOCUS_WINDOW_WIDTH * lambda.powf(-alpha)).min(1.0);
        for i in 0..FOCUS_WINDOW_SAMPLES {
            ts.push(1.0 - width + width * i as f64 / (FOCUS_WINDOW_SAMPLES - 1) as f64);
        }
        let ratio = 2f64.powf(1.0 / BRIDGE_PER_OCTAVE as f64);
        let mut gap = width * ratio;
        while gap < 1.0 / 64.0 {
            ts.push(1.0 - gap);
            gap *= ratio;
        }
    }
    ts.retain(|t| (0.0..=1.0).contains(t));
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    ts
}

/// Time samples for the travelling packet: enough that it advances at most
/// `1/16` of its ripple length per step.
pub fn packet_time_samples(lambda: f64, alpha: f64, epsilon: f64, uniform: usize) -> usize {
    let needed = (PACKET_SAMPLES_FACTOR * alpha * epsilon * lambda.powf(alpha / 2.0)).ceil();
    uniform.max(needed as usize)
}

/// Runs `f` on a pool bounded by the worker environment variable, if set.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match crate::max_workers() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn check_memory(cfg: &SweepConfig, params: &DispersionParams) -> Result<()> {
    let cap = crate::memory_cap();
    for &lambda in &cfg.lambdas {
        let required = match cfg.family {
            Family::SmoothingFLambda if cfg.dim == 1 => 0,
            Family::SmoothingFLambda => smoothing_frame_grid(lambda, params, 0.0)?.len(),
            Family::MaximalGLambda => {
                let frame = MovingFrame::new(lambda, *params, cfg.epsilon);
                match frame {
                    Ok(frame) => maximal_buffer_len(&frame),
                    Err(Error::MemoryCap { required, .. }) => required,
                    Err(e) => return Err(e),
                }
            }
        };
        let sobolev = if cfg.denominator == Denominator::Sobolev && cfg.family == Family::SmoothingFLambda {
            smoothing_frame_grid(lambda, params, 0.0)?.len()
        } else {
            0
        };
        let required = required.max(sobolev);
        if required > cap {
            return Err(Error::MemoryCap { lambda, required, cap });
        }
    }
    Ok(())
}

fn maximal_buffer_len(frame: &MovingFrame) -> usize {
    let g = frame.grid();
    let cross = g.len() / g.points();
    let travel = (frame.speed() / g.spacing()).ceil() as usize + 1;
    (g.points() + travel) * cross
}

/// Measures every `lambda` of the sweep.
pub fn measure(cfg: &SweepConfig) -> Result<SweepMeasurements> {
    cfg.validate(false)?;
    let params = cfg.params()?;
    check_memory(cfg, &params)?;
    with_workers(|| {
        let rows = cfg
            .lambdas
            .iter()
            .map(|&lambda| match cfg.family {
                Family::SmoothingFLambda => measure_smoothing(cfg, &params, lambda),
                Family::MaximalGLambda => measure_packet(cfg, &params, lambda),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepMeasurements {
            config: cfg.clone(),
            rows,
        })
    })
}

/// Measures the sweep and forms the ratios at the configured `beta`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    measure(cfg)?.records(cfg.beta)
}

fn measure_smoothing(cfg: &SweepConfig, params: &DispersionParams, lambda: f64) -> Result<Measurement> {
    let ts = focusing_times(lambda, cfg.alpha, cfg.time.uniform, cfg.time.focusing);
    let half_line = cfg.flow == Flow::Airy;
    let p = cfg.p;
    let powers = ts
        .par_iter()
        .map(|&t| {
            let frame = smoothing_frame(lambda, params, t, half_line, cfg.max_points)?;
            let vol = frame.samples.grid().cell_volume();
            Ok(lp_sum(frame.samples.samples(), p, vol))
        })
        .collect::<Result<Vec<f64>>>()?;
    let weights = time_weights(&ts, (0.0, 1.0));
    let numerator = combine_frames(&powers, &weights, p);
    let grid0 = smoothing_frame_grid(lambda, params, 0.0)?;
    let datum_norm = match cfg.denominator {
        Denominator::Weighted => powers[0].powf(1.0 / p),
        Denominator::Sobolev => {
            let cut = CutoffSpec::default();
            let f = Field::from_frequency_fn(grid0, |xi| {
                let a = cut.theta(xi.iter().map(|v| v * v).sum::<f64>().sqrt() / lambda);
                if a == 0.0 || (half_line && xi[0] <= 0.0) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(a, -params.dispersion(xi))
                }
            });
            sobolev_norm(&f, p, cfg.beta)?
        }
    };
    Ok(Measurement {
        lambda,
        points: grid0.points(),
        half_width: grid0.half_width(),
        t_samples: ts.len(),
        numerator,
        datum_norm,
    })
}

fn measure_packet(cfg: &SweepConfig, params: &DispersionParams, lambda: f64) -> Result<Measurement> {
    let frame = MovingFrame::new(lambda, *params, cfg.epsilon)?;
    let nt = packet_time_samples(lambda, cfg.alpha, cfg.epsilon, cfg.time.uniform);
    let ts: Vec<f64> = (0..nt).map(|i| i as f64 / (nt - 1) as f64).collect();
    let grid = *frame.grid();
    let dy = grid.spacing();
    let vol = grid.cell_volume();
    let p = cfg.p;

    let datum = frame.profile(0.0, 0.0)?;
    let datum_norm = match cfg.denominator {
        Denominator::Weighted => lp_norm(&datum, p)?,
        Denominator::Sobolev => {
            // Bessel weight at the true frequency xi = h - lambda e1
            let weighted = datum.apply_symbol(&|h: &[f64]| {
                let r2: f64 = h
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if i == 0 { (v - lambda).powi(2) } else { v * v })
                    .sum();
                Complex64::new((1.0 + r2).powf(0.5 * cfg.beta), 0.0)
            })?;
            lp_norm(&weighted, p)?
        }
    };

    let numerator = match cfg.norm {
        SweepNorm::MixedSpacetime => {
            let powers = ts
                .par_iter()
                .map(|&t| Ok(lp_sum(frame.profile(t, 0.0)?.samples(), p, vol)))
                .collect::<Result<Vec<f64>>>()?;
            combine_frames(&powers, &time_weights(&ts, (0.0, 1.0)), p)
        }
        SweepNorm::Maximal => {
            // sup_t |W(x - t v e1, t)| on the y lattice extended along e1
            let n = grid.points();
            let cross = grid.len() / n;
            let len = maximal_buffer_len(&frame);
            let speed = frame.speed();
            let sup = ts
                .par_iter()
                .try_fold(
                    || vec![0.0f64; len],
                    |mut acc, &t| -> Result<Vec<f64>> {
                        let offset = t * speed;
                        let cells = (offset / dy).floor();
                        let w = frame.profile(t, offset - cells * dy)?;
                        let base = cells as usize * cross;
                        for (i, z) in w.samples().iter().enumerate() {
                            let slot = &mut acc[base + i];
                            *slot = slot.max(z.norm());
                        }
                        Ok(acc)
                    },
                )
                .try_reduce(
                    || vec![0.0f64; len],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x = x.max(y);
                        }
                        Ok(a)
                    },
                )?;
            (sup.iter().map(|v| v.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
        }
    };
    Ok(Measurement {
        lambda,
        points: grid.points(),
        half_width: grid.half_width(),
        t_samples: nt,
        numerator,
        datum_norm,
    })
}

/// Least-squares line through `(ln lambda, ln ratio)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|ln ratio - (slope ln lambda + intercept)|`.
    pub max_residual: f64,
}

/// Ordinary least squares on the log-log points of `records`.
pub fn fit_loglog(records: &[SweepRecord]) -> Result<FitResult> {
    if records.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 records, got {}", records.len())));
    }
    let mut pts = Vec::with_capacity(records.len());
    for r in records {
        if !(r.ratio > 0.0 && r.ratio.is_finite() && r.lambda > 0.0) {
            return Err(Error::Fit(format!(
                "ratio {} at lambda = {} is not positive and finite",
                r.ratio, r.lambda
            )));
        }
        pts.push((r.lambda.ln(), r.ratio.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all lambda values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        max_residual,
    })
}

/// Outcome of a sweep against a predicted slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub slope: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub fit: FitResult,
    pub records: Vec<SweepRecord>,
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(())
}

fn check_exponent_identity(cfg: &SweepConfig) -> Result<ExponentQuery> {
    let q = ExponentQuery::new(cfg.alpha, cfg.dim, cfg.p)?;
    let gap = smoothing_exponent(&q) - (maximal_exponent(&q) - cfg.alpha / cfg.p);
    if gap.abs() > 1e-12 {
        return Err(Error::NonFinite(format!("exponent identity off by {gap}")));
    }
    Ok(q)
}

/// Ratio slope of the smoothing sweep against `beta(p) - beta`.
pub fn verify_sharpness(cfg: &SweepConfig, tolerance: f64) -> Result<Verdict> {
    check_sharpness_config(cfg)?;
    let m = measure(cfg)?;
    verify_sharpness_measured(&m, cfg.beta, tolerance)
}

fn check_sharpness_config(cfg: &SweepConfig) -> Result<()> {
    cfg.validate(true)?;
    if cfg.family != Family::SmoothingFLambda
        || cfg.norm != SweepNorm::MixedSpacetime
        || !cfg.time.focusing
        || cfg.flow != Flow::Fractional
    {
        return Err(Error::InvalidParameter(
            "sharpness needs smoothing_f_lambda, the mixed norm, focusing refinement and the fractional flow".into(),
        ));
    }
    Ok(())
}

/// [`verify_sharpness`] on existing measurements at another `beta`.
pub fn verify_sharpness_measured(m: &SweepMeasurements, beta: f64, tolerance: f64) -> Result<Verdict> {
    check_sharpness_config(&m.config)?;
    check_tolerance(tolerance)?;
    let q = check_exponent_identity(&m.config)?;
    let expected = smoothing_exponent(&q) - beta;
    two_sided(m.records(beta)?, expected, tolerance)
}

fn two_sided(records: Vec<SweepRecord>, expected: f64, tolerance: f64) -> Result<Verdict> {
    let fit = fit_loglog(&records)?;
    Ok(Verdict {
        slope: fit.slope,
        expected,
        tolerance,
        pass: (fit.slope - expected).abs() <= tolerance,
        fit,
        records,
    })
}

fn check_maximal_config(cfg: &SweepConfig) -> Result<()> {
    cfg.validate(true)?;
    if cfg.family != Family::MaximalGLambda || cfg.norm != SweepNorm::Maximal {
        return Err(Error::InvalidParameter(
            "the necessary condition is tested with maximal_g_lambda and the maximal norm".into(),
        ));
    }
    Ok(())
}

/// One-sided test of the lower bound `slope >= alpha/(2p) - beta`: passes
/// iff the slope is at least the prediction minus `tolerance` and, when the
/// prediction exceeds `tolerance`, the slope does too.
pub fn verify_maximal_necessary(cfg: &SweepConfig, tolerance: f64) -> Result<Verdict> {
    check_maximal_config(cfg)?;
    let m = measure(cfg)?;
    verify_maximal_measured(&m, cfg.beta, tolerance)
}

/// [`verify_maximal_necessary`] on existing measurements at another `beta`.
pub fn verify_maximal_measured(m: &SweepMeasurements, beta: f64, tolerance: f64) -> Result<Verdict> {
    check_maximal_config(&m.config)?;
    check_tolerance(tolerance)?;
    let q = check_exponent_identity(&m.config)?;
    let expected = maximal_necessary_exponent(&q) - beta;
    let records = m.records(beta)?;
    let fit = fit_loglog(&records)?;
    let pass = fit.slope >= expected - tolerance && (expected <= tolerance || fit.slope > tolerance);
    Ok(Verdict {
        slope: fit.slope,
        expected,
        tolerance,
        pass,
        fit,
        records,
    })
}

fn check_airy_config(cfg: &SweepConfig) -> Result<()> {
    cfg.validate(true)?;
    if cfg.flow != Flow::Airy || cfg.norm != SweepNorm::MixedSpacetime || cfg.p < 4.0 {
        return Err(Error::InvalidParameter(
            "the Airy check needs the Airy flow, the mixed norm and p >= 4".into(),
        ));
    }
    Ok(())
}

/// Ratio slope of the Airy sweep against `3(p-4)/(2p) - beta`.
pub fn verify_airy(cfg: &SweepConfig, tolerance: f64) -> Result<Verdict> {
    check_airy_config(cfg)?;
    let m = measure(cfg)?;
    verify_airy_measured(&m, cfg.beta, tolerance)
}

/// [`verify_airy`] on existing measurements at another `beta`.
pub fn verify_airy_measured(m: &SweepMeasurements, beta: f64, tolerance: f64) -> Result<Verdict> {
    check_airy_config(&m.config)?;
    check_tolerance(tolerance)?;
    two_sided(m.records(beta)?, airy_exponent(m.config.p) - beta, tolerance)
}

/// `(int_0^1 ||U_t f||_p^p dt)^(1/p) / (lambda^beta ||f||_p)` for a datum with
/// spectrum `theta(|xi|/lambda)` times random complex coefficients, on a
/// periodic box of 1024 points per axis. A spot check of the upper bound on
/// data other than the extremizer; it certifies nothing.
pub fn random_upper_bound_ratio(cfg: &SweepConfig, lambda: f64, seed: u64) -> Result<f64> {
    let params = cfg.params()?;
    let points = 1024;
    let half_width = points as f64 * std::f64::consts::PI / (2.0 * 4.0 * lambda);
    let grid = GridSpec::new(cfg.dim, points, half_width)?;
    if grid.len() > crate::memory_cap() {
        return Err(Error::MemoryCap {
            lambda,
            required: grid.len(),
            cap: crate::memory_cap(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cut = CutoffSpec::default();
    let mut samples = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let xi = grid.frequency_vector(i);
        let a = cut.theta(xi.iter().map(|v| v * v).sum::<f64>().sqrt() / lambda);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        samples.push(z * a);
    }
    let f = Field::new(grid, Representation::Frequency, samples)?;
    let ts: Vec<f64> = (0..cfg.time.uniform)
        .map(|i| i as f64 / (cfg.time.uniform - 1) as f64)
        .collect();
    let vol = grid.cell_volume();
    let powers = ts
        .par_iter()
        .map(|&t| {
            let u = crate::propagator::evolve(&f, t, &params)?.to_physical()?;
            Ok(lp_sum(u.samples(), cfg.p, vol))
        })
        .collect::<Result<Vec<f64>>>()?;
    let numerator = combine_frames(&powers, &time_weights(&ts, (0.0, 1.0)), cfg.p);
    Ok(numerator / (lambda.powf(cfg.beta) * lp_norm(&f, cfg.p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(lambda: f64, ratio: f64) -> SweepRecord {
        SweepRecord {
            lambda,
            points: 8,
            half_width: 1.0,
            t_samples: 1,
            numerator: ratio,
            denominator: 1.0,
            ratio,
        }
    }

    #[test]
    fn exact_power_law() {
        let rs: Vec<_> = [16.0, 32.0, 64.0, 128.0].iter().map(|&l: &f64| record(l, 3.0 * l.powf(0.5))).collect();
        let fit = fit_loglog(&rs).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.max_residual < 1e-12);
        let flat: Vec<_> = [16.0, 32.0, 64.0].iter().map(|&l| record(l, 2.0)).collect();
        assert_eq!(fit_loglog(&flat).unwrap().slope, 0.0);
    }

    #[test]
    fn fit_matches_normal_equations() {
        // independent oracle: solve [[n, Sx], [Sx, Sxx]] [b, a] = [Sy, Sxy] by Cramer's rule
        let data = [(2.0, 3.0), (5.0, 4.0), (11.0, 13.0)];
        let rs: Vec<_> = data.iter().map(|&(l, r)| record(l, r)).collect();
        let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, r) in &data {
            let (x, y) = (f64::ln(l), f64::ln(r));
            n += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let det = n * sxx - sx * sx;
        let a = (n * sxy - sx * sy) / det;
        let b = (sxx * sy - sx * sxy) / det;
        let fit = fit_loglog(&rs).unwrap();
        assert!((fit.slope - a).abs() < 1e-12);
        assert!((fit.intercept - b).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_loglog(&[record(16.0, 1.0)]).is_err());
        assert!(fit_loglog(&[record(16.0, 1.0), record(32.0, 0.0)]).is_err());
        assert!(fit_loglog(&[record(16.0, 1.0), record(16.0, 2.0)]).is_err());
    }

    #[test]
    fn time_grid_resolves_focus() {
        let ts = focusing_times(32.0, 2.0, 64, true);
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        let window = 4.0 / 1024.0;
        assert!(ts.iter().filter(|&&t| t >= 1.0 - window - 1e-15).count() >= 64);
        // bridge leaves no gap wider than one octave below 1/64
        for w in ts.windows(2) {
            let (a, b) = (1.0 - w[1], 1.0 - w[0]);
            if b < 1.0 / 64.0 && a > window {
                assert!(b / a <= 2f64.powf(0.25) + 1e-12);
            }
        }
        assert_eq!(focusing_times(32.0, 2.0, 64, false).len(), 64);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::smoothing(2.0, 1, 6.0, 1.0 / 3.0, vec![16.0]);
        assert!(cfg.validate(false).is_ok());
        assert!(cfg.validate(true).is_err());
        cfg.lambdas = vec![16.0, 32.0, 64.0, 128.0];
        assert!(cfg.validate(true).is_ok());
        cfg.p = 4.0;
        assert!(cfg.validate(true).is_err());
        cfg.lambdas = vec![32.0, 16.0];
        assert!(cfg.validate(false).is_err());
        let mut bad = SweepConfig::smoothing(2.0, 1, 6.0, 0.0, vec![16.0]);
        bad.norm = SweepNorm::Maximal;
        assert!(bad.validate(false).is_err());
        assert!(SweepConfig::airy(4.0, 0.0, vec![16.0, 32.0, 64.0, 128.0]).validate(true).is_ok());
    }

    #[test]
    fn smoke_sweep() {
        let cfg = SweepConfig::smoothing(2.0, 1, 6.0, 1.0 / 3.0, vec![16.0]);
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].ratio.is_finite() && r[0].ratio > 0.0);
        let again = run_sweep(&cfg).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn cached_betas_match_fresh_runs() {
        let cfg = SweepConfig::smoothing(2.0, 1, 6.0, 0.2, vec![16.0, 32.0]);
        let m = measure(&cfg).unwrap();
        let fresh = run_sweep(&cfg).unwrap();
        assert_eq!(m.records(0.2).unwrap(), fresh);
        let other = m.records(0.7).unwrap();
        for (a, b) in other.iter().zip(&fresh) {
            assert!((a.ratio * a.lambda.powf(0.5) - b.ratio).abs() < 1e-12 * b.ratio);
        }
    }

    #[test]
    fn memory_cap_names_smallest_failing_lambda() {
        let cfg = SweepConfig::smoothing(2.0, 3, 6.0, 0.0, vec![8.0, 16.0, 32.0]);
        match measure(&cfg) {
            Err(Error::MemoryCap { lambda, .. }) => assert_eq!(lambda, 8.0),
            other => panic!("{other:?}"),
        }
    }
}
