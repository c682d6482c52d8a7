//! Dispersive evolution `exp(i t |D|^alpha)`, elliptic-phase operators, the
//! Airy flow and the band-limited kernels with their localization diagnostic.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::synth::{stride_for, synthesize_decimated, RadialChirp};
use crate::spectral::{validate_adequacy, CutoffSpec, Field, GridSpec, Representation};

/// Spectral tail (relative to the peak) tolerated in the outer quarter of the
/// lattice band before evolution is refused.
pub const RESOLUTION_TOLERANCE: f64 = 1e-10;

/// Symbol data of `exp(i t |xi|^alpha)` on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionParams {
    alpha: f64,
    dim: usize,
}

impl DispersionParams {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive and different from 1, got {alpha}"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        Ok(Self { alpha, dim })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|xi|^alpha`, with the value 0 at the origin.
    pub fn dispersion(&self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        if r2 == 0.0 {
            0.0
        } else {
            r2.powf(0.5 * self.alpha)
        }
    }

    /// Largest group speed on the unit-scale band `|xi| < 2`.
    pub fn spread_constant(&self) -> f64 {
        dispersion_constant(self.alpha)
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "field is {}-dimensional, dispersion parameters are {}-dimensional",
                grid.dim(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// `C(alpha) = alpha 2^(alpha-1)` for `alpha > 1` and 1 for `alpha < 1`.
pub fn dispersion_constant(alpha: f64) -> f64 {
    if alpha > 1.0 {
        alpha * 2f64.powf(alpha - 1.0)
    } else {
        1.0
    }
}

/// Radius `4 C(alpha) 2^(k(alpha-1))` of the ball holding the band-`k` kernel.
pub fn localization_radius(k: u32, alpha: f64) -> f64 {
    4.0 * dispersion_constant(alpha) * 2f64.powf(k as f64 * (alpha - 1.0))
}

fn unchecked_evolve(f: &Field, t: f64, params: &DispersionParams) -> Result<Field> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    f.apply_symbol(&|xi: &[f64]| Complex64::from_polar(1.0, t * params.dispersion(xi)))
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    Ok(())
}

/// `F^-1[exp(i t |xi|^alpha) fhat]`, in the representation of `f`.
///
/// Refuses fields whose spectrum has not decayed in the outer quarter of the
/// lattice band (see [`Field::ensure_spectrally_resolved`]).
pub fn evolve(f: &Field, t: f64, params: &DispersionParams) -> Result<Field> {
    params.check_grid(f.grid())?;
    check_time(t)?;
    f.ensure_spectrally_resolved(RESOLUTION_TOLERANCE)?;
    unchecked_evolve(f, t, params)
}

/// Frames of a solution sampled at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: GridSpec,
    t_samples: Vec<f64>,
    interval: (f64, f64),
    frames: Vec<Field>,
}

impl Trajectory {
    /// Frames must be physical, share one grid and match `t_samples`, which
    /// must be strictly increasing inside `interval`.
    pub fn new(t_samples: Vec<f64>, interval: (f64, f64), frames: Vec<Field>) -> Result<Self> {
        if t_samples.is_empty() {
            return Err(Error::InvalidParameter("empty time sample list".into()));
        }
        if frames.len() != t_samples.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frames for {} time samples",
                frames.len(),
                t_samples.len()
            )));
        }
        check_samples(&t_samples, interval)?;
        let grid = *frames[0].grid();
        for f in &frames {
            if *f.grid() != grid {
                return Err(Error::InvalidGrid("trajectory frames must share a grid".into()));
            }
            if f.representation() != Representation::Physical {
                return Err(Error::WrongRepresentation {
                    expected: "physical",
                    found: f.representation().name(),
                });
            }
        }
        Ok(Self {
            grid,
            t_samples,
            interval,
            frames,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.t_samples
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    /// Same frames over a different enclosing interval.
    pub fn with_interval(self, interval: (f64, f64)) -> Result<Self> {
        check_samples(&self.t_samples, interval)?;
        Ok(Self { interval, ..self })
    }
}

fn check_samples(t: &[f64], (a, b): (f64, f64)) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidParameter(format!("bad time interval [{a}, {b}]")));
    }
    if t.iter().any(|v| !v.is_finite() || *v < a || *v > b) {
        return Err(Error::InvalidParameter(format!(
            "time samples must lie in [{a}, {b}]"
        )));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time samples must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Default enclosing interval: `[0, 1]` when it holds every sample,
/// otherwise the samples' hull.
pub fn default_interval(t_samples: &[f64]) -> (f64, f64) {
    let lo = t_samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t_samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo >= 0.0 && hi <= 1.0 {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// `evolve` at every sample time; frames are physical.
pub fn evolve_trajectory(
    f: &Field,
    t_samples: &[f64],
    params: &DispersionParams,
) -> Result<Trajectory> {
    if t_samples.is_empty() {
        return Err(Error::InvalidParameter("empty time sample list".into()));
    }
    params.check_grid(f.grid())?;
    for &t in t_samples {
        check_time(t)?;
    }
    f.ensure_spectrally_resolved(RESOLUTION_TOLERANCE)?;
    let spectrum = f.to_frequency()?;
    let frames = t_samples
        .par_iter()
        .map(|&t| unchecked_evolve(&spectrum, t, params)?.dft_inverse())
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(t_samples.to_vec(), default_interval(t_samples), frames)
}

type PhaseFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Phase `phi` with amplitude `chi` supported in the ball `|xi - center| < radius`.
#[derive(Clone)]
pub struct EllipticPhase {
    phase: PhaseFn,
    amplitude: PhaseFn,
    center: Vec<f64>,
    radius: f64,
    hessian_probe: f64,
}

impl std::fmt::Debug for EllipticPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EllipticPhase")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("hessian_probe", &self.hessian_probe)
            .finish()
    }
}

const HESSIAN_PROBES: usize = 100;

impl EllipticPhase {
    /// Builds the phase and probes its Hessian by second differences at 100
    /// points where the amplitude is nonzero.
    pub fn new(
        phase: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        amplitude: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        center: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        if center.is_empty() || center.len() > 3 {
            return Err(Error::Dimension(format!(
                "phase center must have 1 to 3 coordinates, got {}",
                center.len()
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude radius must be positive, got {radius}"
            )));
        }
        let mut ep = Self {
            phase: Arc::new(phase),
            amplitude: Arc::new(amplitude),
            center,
            radius,
            hessian_probe: 0.0,
        };
        ep.hessian_probe = ep.probe_hessian()?;
        if !(ep.hessian_probe > 0.0) {
            return Err(Error::NotElliptic {
                min_eigenvalue: ep.hessian_probe,
            });
        }
        Ok(ep)
    }

    /// `phi(xi) = |xi|^2 / 2` with a smooth bump amplitude on the ball.
    pub fn quadratic(center: Vec<f64>, radius: f64) -> Result<Self> {
        let c = center.clone();
        Self::new(
            |xi| 0.5 * xi.iter().map(|v| v * v).sum::<f64>(),
            move |xi| smooth_ball(xi, &c, radius),
            center,
            radius,
        )
    }

    /// `phi(xi) = |xi|^alpha` with a smooth bump amplitude on the ball.
    pub fn power(alpha: f64, center: Vec<f64>, radius: f64) -> Result<Self> {
        let c = center.clone();
        Self::new(
            move |xi| xi.iter().map(|v| v * v).sum::<f64>().powf(0.5 * alpha),
            move |xi| smooth_ball(xi, &c, radius),
            center,
            radius,
        )
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn phase(&self, xi: &[f64]) -> f64 {
        (self.phase)(xi)
    }

    pub fn amplitude(&self, xi: &[f64]) -> f64 {
        (self.amplitude)(xi)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Smallest sampled eigenvalue of the phase Hessian on the amplitude support.
    pub fn hessian_probe(&self) -> f64 {
        self.hessian_probe
    }

    fn probe_hessian(&self) -> Result<f64> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let h = 1e-3 * self.radius;
        let mut min_eig = f64::INFINITY;
        let mut probes = 0;
        let mut p = vec![0.0; d];
        let mut q = vec![0.0; d];
        for _ in 0..HESSIAN_PROBES * 200 {
            if probes == HESSIAN_PROBES {
                break;
            }
            for (i, v) in p.iter_mut().enumerate() {
                *v = self.center[i] + self.radius * rng.gen_range(-1.0..1.0);
            }
            let r2: f64 = p
                .iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if r2 >= self.radius * self.radius || self.amplitude(&p) == 0.0 {
                continue;
            }
            probes += 1;
            let mut hess = DMatrix::<f64>::zeros(d, d);
            for i in 0..d {
                for j in i..d {
                    let mut acc = 0.0;
                    for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                        q.copy_from_slice(&p);
                        q[i] += si * h;
                        q[j] += sj * h;
                        acc += w * self.phase(&q);
                    }
                    let v = acc / (4.0 * h * h);
                    hess[(i, j)] = v;
                    hess[(j, i)] = v;
                }
            }
            let eig = hess.symmetric_eigenvalues().min();
            min_eig = min_eig.min(eig);
        }
        if probes == 0 {
            return Err(Error::InvalidParameter(
                "amplitude vanishes on its declared support".into(),
            ));
        }
        Ok(min_eig)
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}-dimensional phase applied on a {}-dimensional grid",
                self.dim(),
                grid.dim()
            )));
        }
        let reach = self
            .center
            .iter()
            .map(|c| c.abs() + self.radius)
            .fold(0.0, f64::max);
        if reach > grid.nyquist() {
            return Err(Error::Aliasing(format!(
                "amplitude support reaches {reach}, beyond the lattice band {}",
                grid.nyquist()
            )));
        }
        Ok(())
    }

    fn multiplier(&self, t: f64, xi: &[f64]) -> Complex64 {
        let a = self.amplitude(xi);
        if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(a, t * self.phase(xi))
        }
    }
}

/// Smooth bump `exp(1 - 1/(1 - r^2))` of `r = |xi - center| / radius`.
pub fn smooth_ball(xi: &[f64], center: &[f64], radius: f64) -> f64 {
    let r2: f64 = xi
        .iter()
        .zip(center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / (radius * radius);
    CutoffSpec::default().bump(r2.sqrt())
}

/// `F^-1[chi exp(i t phi) fhat]`, in the representation of `f`.
pub fn elliptic_evolve(f: &Field, t: f64, ep: &EllipticPhase) -> Result<Field> {
    ep.check_grid(f.grid())?;
    check_time(t)?;
    f.apply_symbol(&|xi: &[f64]| ep.multiplier(t, xi))
}

/// Value of `F^-1[chi exp(i t phi) fhat]` at an arbitrary point `x`, by direct
/// summation over the lattice (the trigonometric interpolant of the grid
/// solution).
pub fn elliptic_value_at(f: &Field, t: f64, ep: &EllipticPhase, x: &[f64]) -> Result<Complex64> {
    ep.check_grid(f.grid())?;
    check_time(t)?;
    let spectrum = f.to_frequency()?;
    lattice_value_at(&spectrum, x, |xi| ep.multiplier(t, xi))
}

/// `(2L)^-d sum_m m(xi_m) fhat(xi_m) exp(i x . xi_m)` for a frequency field.
pub fn lattice_value_at(
    spectrum: &Field,
    x: &[f64],
    multiplier: impl Fn(&[f64]) -> Complex64,
) -> Result<Complex64> {
    if spectrum.representation() != Representation::Frequency {
        return Err(Error::WrongRepresentation {
            expected: "frequency",
            found: spectrum.representation().name(),
        });
    }
    let grid = spectrum.grid();
    if x.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "point has {} coordinates on a {}-dimensional grid",
            x.len(),
            grid.dim()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in spectrum.samples().iter().enumerate() {
        if *z == Complex64::new(0.0, 0.0) {
            continue;
        }
        let xi = grid.frequency_vector(i);
        let m = multiplier(&xi);
        let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
        acc += z * m * Complex64::from_polar(1.0, phase);
    }
    Ok(acc * (2.0 * grid.half_width()).powi(-(grid.dim() as i32)))
}

/// Solution of `u_t + u_xxx = 0`: `U_t P+ f + U_{-t} P- f` with the
/// half-line projections blended smoothly over one lattice cell at 0.
pub fn airy_evolve(f: &Field, t: f64) -> Result<Field> {
    if f.grid().dim() != 1 {
        return Err(Error::Dimension(format!(
            "the Airy flow is one-dimensional, got a {}-dimensional field",
            f.grid().dim()
        )));
    }
    check_time(t)?;
    f.ensure_spectrally_resolved(RESOLUTION_TOLERANCE)?;
    let cell = f.grid().frequency_step();
    let cut = CutoffSpec::default();
    f.apply_symbol(&|xi: &[f64]| {
        let positive = cut.step(xi[0] / cell + 0.5);
        let cubed = xi[0].abs().powi(3);
        Complex64::from_polar(positive, t * cubed) + Complex64::from_polar(1.0 - positive, -t * cubed)
    })
}

/// Band-`k` kernel in the variables rescaled by `2^k`:
/// `F^-1[chi(|xi|) exp(i 2^(alpha k) t |xi|^alpha)]`. The kernel in original
/// variables is `2^(k d)` times this field evaluated at `2^k x`.
pub fn band_kernel(grid: &GridSpec, k: u32, t: f64, params: &DispersionParams) -> Result<Field> {
    params.check_grid(grid)?;
    check_time(t)?;
    validate_adequacy(grid, 2.0)?;
    let tau = 2f64.powf(params.alpha() * k as f64) * t;
    let cut = CutoffSpec::default();
    Field::from_frequency_fn(*grid, |xi| {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let a = cut.chi(r);
        if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(a, tau * params.dispersion(xi))
        }
    })
    .dft_inverse()
}

/// Absolute distance (in rescaled units) past the spread front over which the
/// kernel is resolved before periodisation.
const KERNEL_MARGIN: f64 = 256.0;
const KERNEL_SAMPLES: usize = 1 << 20;

/// Fraction of the band-`k` kernel's L1 mass outside the ball of radius
/// [`localization_radius`].
///
/// In one dimension the core mass is measured on a box hugging the spread
/// region `C(alpha) 2^(alpha k) t` and the tail on a box of twice the ball
/// radius, both sampled by decimated synthesis. Higher dimensions use a
/// single dense grid.
pub fn kernel_tail_mass(k: u32, t: f64, params: &DispersionParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "kernel time must lie in [0, 1], got {t}"
        )));
    }
    let alpha = params.alpha();
    let scale = 2f64.powf(alpha * k as f64);
    // ball radius in rescaled variables
    let radius = localization_radius(k, alpha) * 2f64.powi(k as i32);
    let spread = dispersion_constant(alpha) * scale * t;
    if params.dim() == 1 {
        let mass = |half_width: f64, inside: bool| -> Result<f64> {
            let grid = GridSpec::covering(1, half_width, 2.0 * 1.0625)?;
            let stride = stride_for(grid.points(), KERNEL_SAMPLES);
            let cut = CutoffSpec::default();
            let chirp = RadialChirp {
                amplitude: |xi: f64| cut.chi(xi),
                amplitude_scale: 0.5,
                tau: scale * t,
                alpha,
                band: (0.5, 2.0),
            };
            let field = synthesize_decimated(&grid, stride, &chirp)?;
            let g = field.grid();
            let h = g.spacing();
            Ok(field
                .samples()
                .iter()
                .enumerate()
                .filter(|(i, _)| (g.coordinate(*i).abs() <= radius) == inside)
                .map(|(_, z)| z.norm() * h)
                .sum())
        };
        let core = mass(1.25 * spread + KERNEL_MARGIN, true)?;
        let tail = mass(2.0 * radius, false)?;
        return finish_fraction(core, tail);
    }
    let grid = GridSpec::covering(params.dim(), 2.0 * radius, 2.0 * crate::spectral::ADEQUACY_FACTOR)?;
    let cap = crate::memory_cap();
    if grid.len() > cap {
        return Err(Error::Intractable(format!(
            "kernel grid needs {} samples, above the cap of {cap}",
            grid.len()
        )));
    }
    let field = band_kernel(&grid, k, t, params)?;
    let (mut core, mut tail) = (0.0, 0.0);
    let vol = grid.cell_volume();
    for (i, z) in field.samples().iter().enumerate() {
        let r = grid.position(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= radius {
            core += z.norm() * vol;
        } else {
            tail += z.norm() * vol;
        }
    }
    finish_fraction(core, tail)
}

fn finish_fraction(core: f64, tail: f64) -> Result<f64> {
    let total = core + tail;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NonFinite("kernel mass is not positive".into()));
    }
    Ok(tail / total)
}
