//! Extremal initial data for the smoothing and maximal estimates, and the
//! pointwise checks that certify them.
//!
//! `f_lambda` has spectrum `theta(|xi|/lambda) exp(-i|xi|^alpha)`: the chirp
//! spreads it over `|x| <~ C(alpha) lambda^(alpha-1)` at `t = 0` and the flow
//! refocuses it at `t = 1`. `g_lambda` has spectrum
//! `chi(lambda^((alpha-2)/2) |xi + lambda e1|)`, a packet travelling at
//! group speed `alpha lambda^(alpha-1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{dispersion_constant, DispersionParams};
use crate::spectral::synth::{stride_for, synthesize_decimated, PositiveHalf, RadialChirp};
use crate::spectral::{CutoffSpec, Field, GridSpec, Representation};

/// Default width `eps` of the packet bump, `chi(u) = bump(u / eps)`.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Ridge extent `c / alpha` in time, with `c = alpha / 100`.
pub const RIDGE_EXTENT: f64 = 0.01;
/// Regression floor for [`FocusingReport::min_modulus_ratio`].
pub const FOCUS_FLOOR: f64 = 0.1;
/// Regression floor for [`RidgeReport::min_ridge_ratio`] at the default
/// `eps`; measured 0.0096042 for alpha in {1.5, 2, 3}, lambda in {16, 32, 64}.
pub const RIDGE_FLOOR: f64 = 0.0095;
/// Largest number of physical samples kept per decimated frame.
pub const DECIMATED_POINTS: usize = 1 << 18;
/// Distance, in units of the focal width `1/lambda`, kept around the spread
/// region of every frame.
pub const FOCUS_MARGIN: f64 = 256.0;
/// Distance, in units of the packet width, kept around the packet.
pub const PACKET_MARGIN: f64 = 256.0;
/// Slack on the group-speed spread radius when sizing frames.
pub const SPREAD_SLACK: f64 = 1.25;
/// Start of the tail window in units of `C(alpha) lambda^(alpha-1)`.
pub const TAIL_RADIUS: f64 = 8.0;

const MIN_LAMBDA: f64 = 8.0;
const QUADRATURE_STEPS: usize = 1 << 14;

/// The two families of test data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SmoothingFLambda,
    MaximalGLambda,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SmoothingFLambda => "smoothing_f_lambda",
            Family::MaximalGLambda => "maximal_g_lambda",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "smoothing_f_lambda" | "f_lambda" => Ok(Family::SmoothingFLambda),
            "maximal_g_lambda" | "g_lambda" => Ok(Family::MaximalGLambda),
            _ => Err(Error::InvalidParameter(format!("unknown extremizer family {s:?}"))),
        }
    }
}

/// One member of a family at frequency scale `lambda`, on a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremizerSpec {
    pub family: Family,
    pub lambda: f64,
    pub params: DispersionParams,
    pub grid: GridSpec,
}

fn spread_radius(lambda: f64, alpha: f64) -> f64 {
    dispersion_constant(alpha) * lambda.powf(alpha - 1.0)
}

/// Radius `eps lambda^((2-alpha)/2)` of the spectral bump of `g_lambda`.
pub fn packet_bandwidth(lambda: f64, alpha: f64, epsilon: f64) -> f64 {
    epsilon * lambda.powf((2.0 - alpha) / 2.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= MIN_LAMBDA) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be at least {MIN_LAMBDA}, got {lambda}"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2], got {epsilon}"
        )));
    }
    Ok(())
}

fn check_cap(lambda: f64, grid: &GridSpec) -> Result<()> {
    let cap = crate::memory_cap();
    if grid.len() > cap {
        return Err(Error::MemoryCap {
            lambda,
            required: grid.len(),
            cap,
        });
    }
    Ok(())
}

impl ExtremizerSpec {
    /// Checks the sizing invariants of the family on a caller-chosen grid.
    pub fn new(family: Family, lambda: f64, params: DispersionParams, grid: GridSpec) -> Result<Self> {
        check_lambda(lambda)?;
        if grid.dim() != params.dim() {
            return Err(Error::Dimension(format!(
                "{}-dimensional grid for {}-dimensional dispersion",
                grid.dim(),
                params.dim()
            )));
        }
        let (min_nyquist, min_half_width) = match family {
            Family::SmoothingFLambda => (
                4.0 * lambda,
                TAIL_RADIUS * spread_radius(lambda, params.alpha()),
            ),
            Family::MaximalGLambda => (2.0 * lambda, 0.0),
        };
        if grid.nyquist() < min_nyquist || grid.half_width() < min_half_width {
            let half_width = grid.half_width().max(min_half_width);
            let points = (4.0 * min_nyquist * half_width / (2.0 * PI)).ceil() as usize;
            return Err(Error::InvalidGrid(format!(
                "{} at lambda = {lambda} needs Nyquist >= {min_nyquist} and L >= {min_half_width}; \
                 use N >= {} with L = {half_width}",
                family.name(),
                points.next_power_of_two()
            )));
        }
        Ok(Self {
            family,
            lambda,
            params,
            grid,
        })
    }

    /// Grid chosen by the sizing policy: for `f_lambda`, Nyquist `>= 4 lambda`
    /// and `L = 16 C(alpha) lambda^(alpha-1)` so the tail window is sampled;
    /// for `g_lambda`, Nyquist `>= 2 lambda` and room for the packet.
    pub fn sized(family: Family, lambda: f64, params: DispersionParams, epsilon: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_epsilon(epsilon)?;
        let d = params.dim();
        let grid = match family {
            Family::SmoothingFLambda => GridSpec::covering(
                d,
                2.0 * TAIL_RADIUS * spread_radius(lambda, params.alpha()),
                4.0 * lambda,
            )?,
            Family::MaximalGLambda => GridSpec::covering(
                d,
                PACKET_MARGIN / packet_bandwidth(lambda, params.alpha(), epsilon),
                2.0 * lambda,
            )?,
        };
        // one-dimensional f_lambda is only ever sampled decimated
        if family == Family::MaximalGLambda || d > 1 {
            check_cap(lambda, &grid)?;
        }
        Self::new(family, lambda, params, grid)
    }

    fn expect(&self, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::InvalidParameter(format!(
                "operation needs {}, spec is {}",
                family.name(),
                self.family.name()
            )));
        }
        Ok(())
    }
}

fn radius(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `int_{R^d} f(|xi|) dxi` for `f` supported in `[lo, hi]`, by composite
/// Simpson in the radius.
fn radial_integral(dim: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let sphere = match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    };
    let n = QUADRATURE_STEPS;
    let h = (hi - lo) / n as f64;
    let g = |r: f64| f(r) * r.powi(dim as i32 - 1);
    let mut s = g(lo) + g(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(lo + i as f64 * h);
    }
    sphere * s * h / 3.0
}

/// `f_lambda` in the frequency representation on `spec.grid`.
pub fn make_smoothing_extremizer(spec: &ExtremizerSpec) -> Result<Field> {
    spec.expect(Family::SmoothingFLambda)?;
    check_cap(spec.lambda, &spec.grid)?;
    let cut = CutoffSpec::default();
    let (lambda, params) = (spec.lambda, spec.params);
    Ok(Field::from_frequency_fn(spec.grid, |xi| {
        let a = cut.theta(radius(xi) / lambda);
        if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(a, -params.dispersion(xi))
        }
    }))
}

/// Grid for the frame `U_t f_lambda`: it holds the spread region
/// `|x| <= C(alpha) lambda^(alpha-1) |1-t|` with slack plus
/// [`FOCUS_MARGIN`] focal widths, at Nyquist `>= 4 lambda`.
pub fn smoothing_frame_grid(lambda: f64, params: &DispersionParams, t: f64) -> Result<GridSpec> {
    let half_width = SPREAD_SLACK * spread_radius(lambda, params.alpha()) * (1.0 - t).abs()
        + FOCUS_MARGIN / lambda;
    GridSpec::covering(params.dim(), half_width, 4.0 * lambda)
}

/// Physical samples of one frame together with the lattice they sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    /// Samples at every stride-th point of `fine`, as a field on the coarse grid.
    pub samples: Field,
    pub fine: GridSpec,
}

/// `U_t f_lambda` on its own frame grid ([`smoothing_frame_grid`]). In one
/// dimension only every stride-th point is synthesised (at most
/// `max_points`); `half_line` keeps only `xi > 0`. Higher dimensions are
/// dense and subject to the memory cap.
pub fn smoothing_frame(
    lambda: f64,
    params: &DispersionParams,
    t: f64,
    half_line: bool,
    max_points: usize,
) -> Result<FrameSample> {
    check_lambda(lambda)?;
    let fine = smoothing_frame_grid(lambda, params, t)?;
    if half_line && params.dim() != 1 {
        return Err(Error::Dimension("half-line spectra are one-dimensional".into()));
    }
    let cut = CutoffSpec::default();
    let samples = if params.dim() == 1 {
        let chirp = RadialChirp {
            amplitude: move |r: f64| cut.theta(r / lambda),
            amplitude_scale: 0.2 * lambda,
            tau: t - 1.0,
            alpha: params.alpha(),
            band: (0.5 * lambda, 2.0 * lambda),
        };
        let stride = stride_for(fine.points(), max_points);
        if half_line {
            synthesize_decimated(&fine, stride, &PositiveHalf(chirp))?
        } else {
            synthesize_decimated(&fine, stride, &chirp)?
        }
    } else {
        check_cap(lambda, &fine)?;
        Field::from_frequency_fn(fine, |xi| {
            let a = cut.theta(radius(xi) / lambda);
            if a == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(a, (t - 1.0) * params.dispersion(xi))
            }
        })
        .dft_inverse()?
    };
    Ok(FrameSample { samples, fine })
}

/// Physical samples of `f_lambda` on `spec.grid`; one-dimensional grids are
/// decimated to at most `max_points` samples.
pub fn sample_smoothing_extremizer(spec: &ExtremizerSpec, max_points: usize) -> Result<Field> {
    spec.expect(Family::SmoothingFLambda)?;
    if spec.grid.dim() == 1 {
        let cut = CutoffSpec::default();
        let lambda = spec.lambda;
        let chirp = RadialChirp {
            amplitude: move |r: f64| cut.theta(r / lambda),
            amplitude_scale: 0.2 * lambda,
            tau: -1.0,
            alpha: spec.params.alpha(),
            band: (0.5 * lambda, 2.0 * lambda),
        };
        synthesize_decimated(&spec.grid, stride_for(spec.grid.points(), max_points), &chirp)
    } else {
        make_smoothing_extremizer(spec)?.to_physical()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `max |f_lambda| / lambda^(d - d alpha/2)`.
    pub peak_ratio: f64,
    /// Same ratio restricted to `|x| >= 8 C(alpha) lambda^(alpha-1)`.
    pub tail_ratio: f64,
    /// Number of samples in the tail window.
    pub tail_samples: usize,
}

/// Compares samples of `f_lambda` (dense or decimated) with its predicted
/// envelope.
pub fn envelope_check(f_lambda: &Field, spec: &ExtremizerSpec) -> Result<EnvelopeReport> {
    spec.expect(Family::SmoothingFLambda)?;
    let phys = f_lambda.to_physical()?;
    let d = spec.params.dim() as f64;
    let scale = spec.lambda.powf(d - d * spec.params.alpha() / 2.0);
    let tail_from = TAIL_RADIUS * spread_radius(spec.lambda, spec.params.alpha());
    let grid = phys.grid();
    let mut peak = 0.0f64;
    let mut tail = 0.0f64;
    let mut tail_samples = 0;
    for (i, z) in phys.samples().iter().enumerate() {
        let m = z.norm();
        peak = peak.max(m);
        if radius(&grid.position(i)) >= tail_from {
            tail = tail.max(m);
            tail_samples += 1;
        }
    }
    Ok(EnvelopeReport {
        peak_ratio: peak / scale,
        tail_ratio: tail / scale,
        tail_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusingReport {
    /// `min |U_t f_lambda(x)| / lambda^d` over the focusing window.
    pub min_modulus_ratio: f64,
    /// `U_1 f_lambda(0) / lambda^d` from the lattice.
    pub focus_ratio: Complex64,
    /// `(2 pi)^-d int theta(|xi|) dxi`.
    pub predicted_focus_ratio: f64,
}

/// Probes per axis of the focusing window, in space and in time.
const FOCUS_PROBES: usize = 9;
const FOCUS_BOX_MARGIN: f64 = 4.0 * FOCUS_MARGIN;

/// Minimum of `|U_t f_lambda(x)| / lambda^d` over `|x| <= (10 lambda)^-1`,
/// `|t - 1| <= (10 lambda^alpha)^-1`, by direct lattice summation on a grid
/// sized for the window.
pub fn focusing_check(spec: &ExtremizerSpec) -> Result<FocusingReport> {
    spec.expect(Family::SmoothingFLambda)?;
    let (lambda, params) = (spec.lambda, spec.params);
    let d = params.dim();
    let dt = 1.0 / (10.0 * lambda.powf(params.alpha()));
    // wide box: the lattice sum at the focus converges like the tail of
    // F^-1[theta] at twice the half width
    let half_width = SPREAD_SLACK * spread_radius(lambda, params.alpha()) * dt
        + FOCUS_BOX_MARGIN / lambda;
    let grid = GridSpec::covering(d, half_width, 4.0 * lambda)?;
    check_cap(lambda, &grid)?;
    let cut = CutoffSpec::default();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..grid.len())
        .filter_map(|i| {
            let xi = grid.frequency_vector(i);
            let a = cut.theta(radius(&xi) / lambda);
            (a != 0.0).then(|| {
                let phase = params.dispersion(&xi);
                (xi, a, phase)
            })
        })
        .collect();
    let norm = (2.0 * grid.half_width()).powi(-(d as i32)) / lambda.powi(d as i32);
    let value = |x: &[f64], t: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, a, phase) in &modes {
            let xx: f64 = xi.iter().zip(x).map(|(u, v)| u * v).sum();
            acc += Complex64::from_polar(*a, xx + (t - 1.0) * phase);
        }
        acc * norm
    };

    let reach = 1.0 / (10.0 * lambda);
    let offsets: Vec<f64> = (0..FOCUS_PROBES)
        .map(|i| -1.0 + 2.0 * i as f64 / (FOCUS_PROBES - 1) as f64)
        .collect();
    let mut points = Vec::new();
    let total = FOCUS_PROBES.pow(d as u32);
    for flat in 0..total {
        let mut rest = flat;
        let mut x = vec![0.0; d];
        for v in x.iter_mut() {
            *v = reach * offsets[rest % FOCUS_PROBES];
            rest /= FOCUS_PROBES;
        }
        if radius(&x) <= reach * (1.0 + 1e-12) {
            points.push(x);
        }
    }
    let probes: Vec<(Vec<f64>, f64)> = points
        .iter()
        .flat_map(|x| offsets.iter().map(move |s| (x.clone(), 1.0 + dt * s)))
        .collect();
    let min = probes
        .par_iter()
        .map(|(x, t)| value(x, *t).norm())
        .reduce(|| f64::INFINITY, f64::min);

    let predicted = radial_integral(d, 0.5, 2.0, |r| cut.theta(r)) / (2.0 * PI).powi(d as i32);
    Ok(FocusingReport {
        min_modulus_ratio: min,
        focus_ratio: value(&vec![0.0; d], 1.0),
        predicted_focus_ratio: predicted,
    })
}

/// `g_lambda` in the frequency representation on `spec.grid`.
pub fn make_maximal_extremizer(spec: &ExtremizerSpec, epsilon: f64) -> Result<Field> {
    spec.expect(Family::MaximalGLambda)?;
    check_epsilon(epsilon)?;
    check_cap(spec.lambda, &spec.grid)?;
    let b = packet_bandwidth(spec.lambda, spec.params.alpha(), epsilon);
    if spec.grid.nyquist() < spec.lambda + 2.0 * b {
        return Err(Error::InvalidGrid(format!(
            "lattice band {} does not cover the packet at -{} with radius {b}",
            spec.grid.nyquist(),
            spec.lambda
        )));
    }
    let cut = CutoffSpec::default();
    let lambda = spec.lambda;
    Ok(Field::from_frequency_fn(spec.grid, |xi| {
        let mut h = xi.to_vec();
        h[0] += lambda;
        Complex64::new(cut.bump(radius(&h) / b), 0.0)
    }))
}

/// `g_lambda` in the frame moving with the packet.
///
/// Writing `xi = h - lambda e1`, `|U_t g_lambda(x)| = |W(x - t v e1, t)|`
/// with `v = alpha lambda^(alpha-1)` and
/// `W(y, t) = F^-1[a(h) exp(i t psi(h))](y)`, where `a(h) = chi(|h| / b)` and
/// `psi(h) = |h - lambda e1|^alpha - lambda^alpha + v h_1` is the dispersion
/// with its constant and linear parts removed.
#[derive(Debug, Clone)]
pub struct MovingFrame {
    lambda: f64,
    params: DispersionParams,
    epsilon: f64,
    grid: GridSpec,
    modes: Vec<(usize, f64, f64, f64)>,
}

impl MovingFrame {
    pub fn new(lambda: f64, params: DispersionParams, epsilon: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_epsilon(epsilon)?;
        let alpha = params.alpha();
        let d = params.dim();
        let b = packet_bandwidth(lambda, alpha, epsilon);
        // largest packet drift over unit time, probed on the support boundary
        let mut drift = 0.0f64;
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                let mut h = vec![0.0; d];
                h[axis] = sign * b;
                drift = drift.max(radius(&psi_gradient(&h, lambda, alpha)));
            }
        }
        let half_width = PACKET_MARGIN / b + SPREAD_SLACK * drift;
        let grid = GridSpec::covering(d, half_width, 4.0 * b)?;
        check_cap(lambda, &grid)?;
        let cut = CutoffSpec::default();
        let modes = (0..grid.len())
            .filter_map(|i| {
                let h = grid.frequency_vector(i);
                let a = cut.bump(radius(&h) / b);
                (a != 0.0).then(|| (i, a, psi(&h, lambda, alpha), h[0]))
            })
            .collect();
        Ok(Self {
            lambda,
            params,
            epsilon,
            grid,
            modes,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn params(&self) -> &DispersionParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Grid of the moving frame (coordinates `y`, frequencies `h`).
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn bandwidth(&self) -> f64 {
        packet_bandwidth(self.lambda, self.params.alpha(), self.epsilon)
    }

    /// Group speed `alpha lambda^(alpha-1)` of the packet along `e1`.
    pub fn speed(&self) -> f64 {
        self.params.alpha() * self.lambda.powf(self.params.alpha() - 1.0)
    }

    /// `W(y_n - shift e1, t)` at every grid point `y_n`; the shift is applied
    /// exactly in frequency.
    pub fn profile(&self, t: f64, shift: f64) -> Result<Field> {
        let mut samples = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for &(i, a, psi, h1) in &self.modes {
            samples[i] = Complex64::from_polar(a, t * psi - h1 * shift);
        }
        Field::new(self.grid, Representation::Frequency, samples)?.dft_inverse()
    }

    /// `W(0, t)` by direct summation.
    pub fn center_value(&self, t: f64) -> Complex64 {
        let acc: Complex64 = self
            .modes
            .iter()
            .map(|&(_, a, psi, _)| Complex64::from_polar(a, t * psi))
            .sum();
        acc * (2.0 * self.grid.half_width()).powi(-(self.grid.dim() as i32))
    }
}

/// `psi(h)` evaluated without cancellation:
/// `lambda^alpha (expm1((alpha/2) ln1p(v)) + alpha h1 / lambda)` with
/// `v = (|h|^2 - 2 lambda h1) / lambda^2`.
fn psi(h: &[f64], lambda: f64, alpha: f64) -> f64 {
    let h2: f64 = h.iter().map(|v| v * v).sum();
    let v = (h2 - 2.0 * lambda * h[0]) / (lambda * lambda);
    lambda.powf(alpha) * ((0.5 * alpha * v.ln_1p()).exp_m1() + alpha * h[0] / lambda)
}

fn psi_gradient(h: &[f64], lambda: f64, alpha: f64) -> Vec<f64> {
    let mut xi = h.to_vec();
    xi[0] -= lambda;
    let r = radius(&xi);
    let mut g: Vec<f64> = xi.iter().map(|v| alpha * r.powf(alpha - 2.0) * v).collect();
    g[0] += alpha * lambda.powf(alpha - 1.0);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgeReport {
    /// `min |U_{t(x)} g_lambda(x)| / lambda^(-d(alpha-2)/2)` along the ridge
    /// `t(x) = x_1 / (alpha lambda^(alpha-1))`, `0 <= x_1 <= c lambda^(alpha-1)`.
    pub min_ridge_ratio: f64,
    /// `g_lambda(0) / lambda^(-d(alpha-2)/2)` from the lattice.
    pub origin_ratio: Complex64,
    /// `(2 pi)^-d int chi(|u|) du`.
    pub predicted_origin_ratio: f64,
}

const RIDGE_SAMPLES: usize = 33;

/// Modulus of the travelling packet along its ridge, sampled at
/// [`RIDGE_SAMPLES`] points of the rectangle's axis.
pub fn ridge_check(spec: &ExtremizerSpec, epsilon: f64) -> Result<RidgeReport> {
    spec.expect(Family::MaximalGLambda)?;
    let frame = MovingFrame::new(spec.lambda, spec.params, epsilon)?;
    let d = spec.params.dim() as f64;
    let scale = spec.lambda.powf(-d * (spec.params.alpha() - 2.0) / 2.0);
    let min = (0..RIDGE_SAMPLES)
        .map(|i| {
            let t = RIDGE_EXTENT * i as f64 / (RIDGE_SAMPLES - 1) as f64;
            frame.center_value(t).norm()
        })
        .fold(f64::INFINITY, f64::min);
    let cut = CutoffSpec::default();
    let predicted = radial_integral(spec.params.dim(), 0.0, epsilon, |r| cut.bump(r / epsilon))
        / (2.0 * PI).powi(spec.params.dim() as i32);
    Ok(RidgeReport {
        min_ridge_ratio: min / scale,
        origin_ratio: frame.center_value(0.0) / scale,
        predicted_origin_ratio: predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::lp_norm;
    use crate::propagator::evolve;

    fn params(alpha: f64) -> DispersionParams {
        DispersionParams::new(alpha, 1).unwrap()
    }

    #[test]
    fn spectrum_of_f_lambda() {
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, 16.0, params(2.0), DEFAULT_EPSILON).unwrap();
        let f = make_smoothing_extremizer(&spec).unwrap();
        let cut = CutoffSpec::default();
        for (i, z) in f.samples().iter().enumerate() {
            let r = spec.grid.frequency(i).abs();
            if r <= 8.0 || r >= 32.0 {
                assert_eq!(z.norm(), 0.0);
            }
            assert!((z.norm() - cut.theta(r / 16.0)).abs() < 1e-15);
        }
        // Plancherel against quadrature of theta^2
        let l2 = lp_norm(&f, 2.0).unwrap().powi(2);
        let expect = radial_integral(1, 8.0, 32.0, |r| cut.theta(r / 16.0).powi(2)) / (2.0 * PI);
        assert!((l2 - expect).abs() < 1e-10 * expect, "{l2} {expect}");
    }

    #[test]
    fn sizing_errors_name_the_grid() {
        let g = GridSpec::new(1, 64, 10.0).unwrap();
        let err = ExtremizerSpec::new(Family::SmoothingFLambda, 16.0, params(2.0), g).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(ref m) if m.contains("N >=")));
        assert!(ExtremizerSpec::sized(Family::SmoothingFLambda, 4.0, params(2.0), 0.05).is_err());
    }

    #[test]
    fn decimated_frames_match_dense_evolution() {
        let lambda = 16.0;
        let p = params(2.0);
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, lambda, p, DEFAULT_EPSILON).unwrap();
        let f = make_smoothing_extremizer(&spec).unwrap();
        let dense = sample_smoothing_extremizer(&spec, usize::MAX).unwrap();
        assert!(dense.max_distance(&f.to_physical().unwrap()).unwrap() < 1e-12);
        for t in [0.5, 0.99] {
            let frame = smoothing_frame(lambda, &p, t, false, 1 << 10).unwrap();
            let reference = Field::from_frequency_fn(frame.fine, |xi| {
                let a = CutoffSpec::default().theta(xi[0].abs() / lambda);
                Complex64::from_polar(a, (t - 1.0) * xi[0] * xi[0])
            })
            .dft_inverse()
            .unwrap();
            let stride = frame.fine.points() / frame.samples.grid().points();
            for (j, z) in frame.samples.samples().iter().enumerate() {
                assert!((z - reference.samples()[j * stride]).norm() < 1e-10);
            }
        }
        // the frame at t agrees with evolving the datum on the big grid
        let big = evolve(&f, 0.75, &p).unwrap().to_physical().unwrap();
        let frame = smoothing_frame(lambda, &p, 0.75, false, usize::MAX).unwrap();
        for (j, z) in frame.samples.samples().iter().enumerate() {
            let x = frame.samples.grid().coordinate(j);
            let n = ((x + big.grid().half_width()) / big.grid().spacing()).round() as usize;
            if (big.grid().coordinate(n) - x).abs() < 1e-9 {
                // frames keep a finite margin past the spread front
                assert!((z - big.samples()[n]).norm() < 1e-6 * big.max_abs());
            }
        }
    }

    #[test]
    fn half_line_frame_matches_airy_flow() {
        let lambda = 8.0;
        let t = 0.9;
        let frame = smoothing_frame(lambda, &params(3.0), t, true, usize::MAX).unwrap();
        let cut = CutoffSpec::default();
        let datum = Field::from_frequency_fn(frame.fine, |xi| {
            if xi[0] <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::from_polar(cut.theta(xi[0] / lambda), -xi[0].powi(3))
        });
        let airy = crate::propagator::airy_evolve(&datum, t).unwrap().to_physical().unwrap();
        assert!(frame.samples.max_distance(&airy).unwrap() < 1e-10 * airy.max_abs());
    }

    #[test]
    fn envelope_of_f_lambda() {
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, 64.0, params(2.0), DEFAULT_EPSILON).unwrap();
        let f = sample_smoothing_extremizer(&spec, DECIMATED_POINTS).unwrap();
        let r = envelope_check(&f, &spec).unwrap();
        assert!(r.tail_samples > 0);
        assert!(r.tail_ratio <= 1e-4, "{r:?}");
        assert!(r.peak_ratio > 0.05 && r.peak_ratio < 1.0, "{r:?}");
    }

    #[test]
    fn focus_value_is_exact() {
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, 32.0, params(2.0), DEFAULT_EPSILON).unwrap();
        let r = focusing_check(&spec).unwrap();
        assert!((r.focus_ratio.re - r.predicted_focus_ratio).abs() < 1e-8);
        assert!(r.focus_ratio.im.abs() < 1e-12);
        assert!(r.min_modulus_ratio >= 0.1 && r.min_modulus_ratio <= r.predicted_focus_ratio + 1e-12);
    }

    #[test]
    fn psi_has_no_linear_part() {
        for alpha in [1.5, 2.0, 3.0] {
            let lambda = 100.0;
            let exact = |h: f64| (h - lambda).abs().powf(alpha) - lambda.powf(alpha) + alpha * lambda.powf(alpha - 1.0) * h;
            for h in [-0.5, 0.1, 0.3] {
                let a = psi(&[h], lambda, alpha);
                assert!((a - exact(h)).abs() < 1e-9 * lambda.powf(alpha), "{alpha} {h}");
            }
            let curvature = alpha * (alpha - 1.0) * lambda.powf(alpha - 2.0) / 2.0;
            let h = 1e-3;
            assert!((psi(&[h], lambda, alpha) / (h * h) - curvature).abs() < 1e-3 * curvature);
        }
        assert!((psi(&[0.2, 0.1], 30.0, 2.0) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn moving_frame_reproduces_dense_packet() {
        let lambda = 16.0;
        let p = params(3.0);
        let spec = ExtremizerSpec::sized(Family::MaximalGLambda, lambda, p, 0.2).unwrap();
        let g = make_maximal_extremizer(&spec, 0.2).unwrap();
        let frame = MovingFrame::new(lambda, p, 0.2).unwrap();
        for t in [0.0, 0.004] {
            let dense = evolve(&g, t, &p).unwrap().to_physical().unwrap();
            let w = frame.profile(t, 0.0).unwrap();
            let shift = t * frame.speed();
            for (n, z) in w.samples().iter().enumerate().step_by(7) {
                let x = w.grid().coordinate(n) + shift;
                let m = crate::propagator::lattice_value_at(&g, &[x], |xi| {
                    Complex64::from_polar(1.0, t * xi[0].abs().powi(3))
                })
                .unwrap();
                assert!((z.norm() - m.norm()).abs() < 1e-8 * w.max_abs(), "t {t} n {n}");
            }
            assert!((lp_norm(&dense, 4.0).unwrap() - lp_norm(&w, 4.0).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn packet_modulus_is_even_and_norms_scale() {
        let p = params(3.0);
        let mut logs = Vec::new();
        for lambda in [16.0, 32.0, 64.0, 128.0] {
            let w = MovingFrame::new(lambda, p, DEFAULT_EPSILON).unwrap().profile(0.0, 0.0).unwrap();
            let n = w.grid().points();
            for j in 1..n / 2 {
                assert!((w.samples()[n / 2 + j].norm() - w.samples()[n / 2 - j].norm()).abs() < 1e-12 * w.max_abs());
            }
            logs.push((f64::ln(lambda), lp_norm(&w, 6.0).unwrap().ln()));
        }
        let slope = (logs[3].1 - logs[0].1) / (logs[3].0 - logs[0].0);
        let expect = 0.5 * (3.0 - 2.0) * (1.0 / 6.0 - 1.0);
        assert!((slope - expect).abs() < 0.1, "{slope} {expect}");
    }

    #[test]
    fn ridge_origin_value() {
        let p = params(3.0);
        let spec = ExtremizerSpec {
            family: Family::MaximalGLambda,
            lambda: 32.0,
            params: p,
            grid: GridSpec::new(1, 8, 1.0).unwrap(),
        };
        let r = ridge_check(&spec, DEFAULT_EPSILON).unwrap();
        assert!((r.origin_ratio.re - r.predicted_origin_ratio).abs() < 1e-10);
        assert!(r.min_ridge_ratio > 0.0 && r.min_ridge_ratio <= r.origin_ratio.norm() + 1e-15);
    }
}
