//! Decimated synthesis: samples of `F^-1[m]` at every `stride`-th grid point
//! without materialising the full lattice.
//!
//! On a 1-D grid with `N` points, the physical value at `x_{jM}` only depends
//! on the spectrum folded modulo `N/M`:
//!
//! ```text
//! f(x_{jM}) = (2L)^-1 sum_r exp(2 pi i j r / (N/M)) sum_{m = r mod N/M} (-1)^m m(xi_m)
//! ```
//!
//! so memory scales with the output size while work scales with the number of
//! lattice frequencies in the spectral support.

use num_complex::Complex64;
use rustfft::FftDirection;

use super::fft::plan;
use super::field::{Field, Representation};
use super::grid::GridSpec;
use crate::error::{Error, Result};

const CHUNK: usize = 4096;
const RESYNC: usize = 64;
const MAX_KNOT: usize = 512;

/// A one-dimensional spectrum that can be evaluated along lattice runs.
pub trait LatticeSpectrum: Sync {
    /// Writes `m(start + j * step)` into `out[j]`.
    fn fill(&self, start: f64, step: f64, out: &mut [Complex64]);

    /// Signed frequency intervals outside which the spectrum vanishes;
    /// `None` means the whole lattice must be visited.
    fn support(&self) -> Option<Vec<(f64, f64)>> {
        None
    }

    /// Whether `m(-xi) = m(xi)`; even spectra are only evaluated for `xi >= 0`.
    fn is_even(&self) -> bool {
        false
    }
}

/// Wraps a pointwise closure as a [`LatticeSpectrum`].
pub struct PointwiseSpectrum<F> {
    f: F,
    support: Option<Vec<(f64, f64)>>,
}

impl<F: Fn(f64) -> Complex64 + Sync> PointwiseSpectrum<F> {
    pub fn new(f: F) -> Self {
        Self { f, support: None }
    }

    pub fn with_support(f: F, support: Vec<(f64, f64)>) -> Self {
        Self {
            f,
            support: Some(support),
        }
    }
}

impl<F: Fn(f64) -> Complex64 + Sync> LatticeSpectrum for PointwiseSpectrum<F> {
    fn fill(&self, start: f64, step: f64, out: &mut [Complex64]) {
        for (j, z) in out.iter_mut().enumerate() {
            *z = (self.f)(start + j as f64 * step);
        }
    }

    fn support(&self) -> Option<Vec<(f64, f64)>> {
        self.support.clone()
    }
}

/// `amplitude(|xi|) * exp(i tau |xi|^alpha)` on a radial band `lo <= |xi| <= hi`.
///
/// `amplitude_scale` is the frequency length over which the amplitude
/// varies appreciably; when the lattice step is much finer the amplitude is
/// evaluated on sparse knots and linearly interpolated (relative error of
/// order `1e-10`). For `alpha` equal to 2 or 3 the phase is advanced by exact
/// finite difference recurrences, re-anchored every few hundred samples.
pub struct RadialChirp<A> {
    pub amplitude: A,
    pub amplitude_scale: f64,
    pub tau: f64,
    pub alpha: f64,
    pub band: (f64, f64),
}

impl<A: Fn(f64) -> f64 + Sync> RadialChirp<A> {
    fn knot_spacing(&self, step: f64) -> usize {
        let s = (1e-5 * self.amplitude_scale / step.abs()).floor();
        if s.is_finite() && s >= 2.0 {
            (s as usize).min(MAX_KNOT)
        } else {
            1
        }
    }

    /// Fills `out` with amplitudes, interpolating between knots.
    fn fill_amplitude(&self, start: f64, step: f64, out: &mut [f64]) {
        let knot = self.knot_spacing(step);
        if knot == 1 {
            for (j, a) in out.iter_mut().enumerate() {
                *a = (self.amplitude)((start + j as f64 * step).abs());
            }
            return;
        }
        let mut j0 = 0;
        let mut left = (self.amplitude)(start.abs());
        while j0 < out.len() {
            let len = knot.min(out.len() - j0);
            let right = (self.amplitude)((start + (j0 + knot) as f64 * step).abs());
            let slope = (right - left) / knot as f64;
            for (i, a) in out[j0..j0 + len].iter_mut().enumerate() {
                *a = left + slope * i as f64;
            }
            left = right;
            j0 += len;
        }
    }

    /// Phase recurrence along a run of constant sign.
    fn fill_polynomial(&self, start: f64, step: f64, amp: &[f64], out: &mut [Complex64]) {
        let sign = if start + 0.5 * step * out.len() as f64 >= 0.0 {
            1.0
        } else {
            -1.0
        };
        let cubic = self.alpha == 3.0;
        let mut j0 = 0;
        while j0 < out.len() {
            let len = RESYNC.min(out.len() - j0);
            let x0 = start + j0 as f64 * step;
            // p(j) = tau * (sign * (x0 + j step))^alpha
            let (mut z, mut d1, mut d2, d3) = if cubic {
                let s = sign * self.tau;
                let a = s * x0 * x0 * x0;
                let b = 3.0 * s * x0 * x0 * step;
                let c = 3.0 * s * x0 * step * step;
                let d = s * step * step * step;
                (
                    Complex64::from_polar(1.0, a),
                    Complex64::from_polar(1.0, b + c + d),
                    Complex64::from_polar(1.0, 2.0 * c + 6.0 * d),
                    Complex64::from_polar(1.0, 6.0 * d),
                )
            } else {
                let a = self.tau * x0 * x0;
                let b = 2.0 * self.tau * x0 * step;
                let c = self.tau * step * step;
                (
                    Complex64::from_polar(1.0, a),
                    Complex64::from_polar(1.0, b + c),
                    Complex64::from_polar(1.0, 2.0 * c),
                    Complex64::new(1.0, 0.0),
                )
            };
            for (slot, &a) in out[j0..j0 + len].iter_mut().zip(&amp[j0..j0 + len]) {
                *slot = z * a;
                z *= d1;
                d1 *= d2;
                d2 *= d3;
            }
            j0 += len;
        }
    }
}

impl<A: Fn(f64) -> f64 + Sync> LatticeSpectrum for RadialChirp<A> {
    fn fill(&self, start: f64, step: f64, out: &mut [Complex64]) {
        let mut amp = vec![0.0; out.len()];
        self.fill_amplitude(start, step, &mut amp);
        let end = start + step * (out.len().max(1) - 1) as f64;
        let one_signed = start * end > 0.0 || start == 0.0 || end == 0.0;
        if (self.alpha == 2.0 || self.alpha == 3.0) && one_signed {
            self.fill_polynomial(start, step, &amp, out);
        } else {
            for (j, (z, &a)) in out.iter_mut().zip(&amp).enumerate() {
                let xi = start + j as f64 * step;
                *z = if a == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(a, self.tau * xi.abs().powf(self.alpha))
                };
            }
        }
    }

    fn support(&self) -> Option<Vec<(f64, f64)>> {
        let (lo, hi) = self.band;
        if lo <= 0.0 {
            Some(vec![(-hi, hi)])
        } else {
            Some(vec![(-hi, -lo), (lo, hi)])
        }
    }

    fn is_even(&self) -> bool {
        true
    }
}

/// Restriction of a spectrum to `xi >= 0`.
pub struct PositiveHalf<S>(pub S);

impl<S: LatticeSpectrum> LatticeSpectrum for PositiveHalf<S> {
    fn fill(&self, start: f64, step: f64, out: &mut [Complex64]) {
        self.0.fill(start, step, out);
        for (j, z) in out.iter_mut().enumerate() {
            if start + j as f64 * step < 0.0 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn support(&self) -> Option<Vec<(f64, f64)>> {
        let full = self.0.support().unwrap_or_else(|| vec![(f64::NEG_INFINITY, f64::INFINITY)]);
        Some(
            full.into_iter()
                .filter(|&(_, b)| b >= 0.0)
                .map(|(a, b)| (a.max(0.0), b))
                .collect(),
        )
    }
}

/// Smallest power-of-two stride keeping at most `max_points` output samples
/// (never fewer than 8).
pub fn stride_for(points: usize, max_points: usize) -> usize {
    let mut stride = 1;
    while points / stride > max_points.max(8) {
        stride *= 2;
    }
    stride
}

/// Physical samples of `F^-1[spectrum]` on `grid` at every `stride`-th
/// point, returned as a field on the coarse grid `(N/stride, L)`.
///
/// The returned field is a sampling of a function whose spectrum may exceed
/// the coarse lattice; it is meant for norms and pointwise inspection, not
/// for further spectral operations.
pub fn synthesize_decimated(
    grid: &GridSpec,
    stride: usize,
    spectrum: &dyn LatticeSpectrum,
) -> Result<Field> {
    if grid.dim() != 1 {
        return Err(Error::Dimension(
            "decimated synthesis is one-dimensional".into(),
        ));
    }
    if !stride.is_power_of_two() || grid.points() / stride < 8 {
        return Err(Error::InvalidParameter(format!(
            "stride {stride} must be a power of two leaving at least 8 samples of {}",
            grid.points()
        )));
    }
    let n = grid.points() as i64;
    let coarse = grid.points() / stride;
    let step = grid.frequency_step();
    let m_min = -n / 2;
    let m_max = n / 2 - 1;

    let runs: Vec<(i64, i64)> = match spectrum.support() {
        None => vec![(m_min, m_max)],
        Some(intervals) => {
            let mut runs = Vec::new();
            for (a, b) in intervals {
                let lo = (a / step).floor() as i64;
                let hi = (b / step).ceil() as i64;
                if lo < m_min || hi > m_max {
                    return Err(Error::Aliasing(format!(
                        "spectral support [{a}, {b}] exceeds the lattice band {:.6}",
                        grid.nyquist()
                    )));
                }
                runs.push((lo, hi));
            }
            runs
        }
    };

    let even = spectrum.is_even();
    let runs: Vec<(i64, i64)> = if even {
        let mut half: Vec<(i64, i64)> = runs
            .iter()
            .filter(|(_, hi)| *hi >= 0)
            .map(|&(lo, hi)| (lo.max(0), hi))
            .collect();
        half.sort();
        // overlapping halves of a symmetric interval would double count
        let mut merged: Vec<(i64, i64)> = Vec::new();
        for (lo, hi) in half {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged
    } else {
        runs
    };

    let mut acc = vec![Complex64::new(0.0, 0.0); coarse];
    let mut buf = vec![Complex64::new(0.0, 0.0); CHUNK];
    let mask = coarse as i64 - 1;
    for (lo, hi) in runs {
        let mut m = lo;
        while m <= hi {
            let len = ((hi - m + 1) as usize).min(CHUNK);
            // keep every run on one side of the origin for the recurrences
            let len = if m < 0 && m + len as i64 > 0 {
                (-m) as usize
            } else {
                len
            };
            let chunk = &mut buf[..len];
            spectrum.fill(m as f64 * step, step, chunk);
            for (i, z) in chunk.iter().enumerate() {
                let mi = m + i as i64;
                let v = if mi & 1 == 0 { *z } else { -*z };
                acc[(mi & mask) as usize] += v;
                if even && mi > 0 {
                    acc[(-mi & mask) as usize] += v;
                }
            }
            m += len as i64;
        }
    }
    for z in &acc {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("spectrum produced non-finite values".into()));
        }
    }
    plan(coarse, FftDirection::Inverse).process(&mut acc);
    let weight = 1.0 / (2.0 * grid.half_width());
    for z in &mut acc {
        *z *= weight;
    }
    let coarse_grid = GridSpec::new(1, coarse, grid.half_width())?;
    Field::new(coarse_grid, Representation::Physical, acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_full_inverse_on_subsampled_points() {
        let grid = GridSpec::new(1, 1024, 40.0).unwrap();
        let chirp = RadialChirp {
            amplitude: |xi: f64| (-(xi.abs() - 10.0).powi(2) / 4.0).exp(),
            amplitude_scale: 1.0,
            tau: 0.7,
            alpha: 1.5,
            band: (0.0, 30.0),
        };
        let full = Field::from_frequency_fn(grid, |xi| {
            let mut z = [Complex64::new(0.0, 0.0)];
            chirp.fill(xi[0], 1.0, &mut z);
            z[0]
        })
        .dft_inverse()
        .unwrap();
        for stride in [1, 4, 32] {
            let coarse = synthesize_decimated(&grid, stride, &chirp).unwrap();
            for (j, z) in coarse.samples().iter().enumerate() {
                let w = full.samples()[j * stride];
                assert!((z - w).norm() < 1e-12, "stride {stride} j {j}");
            }
        }
    }

    #[test]
    fn even_folding_matches_full_lattice() {
        let grid = GridSpec::new(1, 2048, 300.0).unwrap();
        let amp = |r: f64| crate::spectral::CutoffSpec::default().bump((r - 3.0) / 2.0);
        let chirp = RadialChirp {
            amplitude: amp,
            amplitude_scale: 1e-9,
            tau: 1.3,
            alpha: 3.0,
            band: (0.5, 6.0),
        };
        let full = Field::from_frequency_fn(grid, |xi| {
            let r = xi[0].abs();
            if (0.5..=6.0).contains(&r) {
                Complex64::from_polar(amp(r), 1.3 * r.powi(3))
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .dft_inverse()
        .unwrap();
        let coarse = synthesize_decimated(&grid, 8, &chirp).unwrap();
        for (j, z) in coarse.samples().iter().enumerate() {
            assert!((z - full.samples()[j * 8]).norm() < 1e-12, "j {j} {z} {}", full.samples()[j * 8]);
        }
    }

    #[test]
    fn polynomial_recurrences_match_direct_phase() {
        for alpha in [2.0, 3.0] {
            let chirp = RadialChirp {
                amplitude: |_: f64| 1.0,
                amplitude_scale: 1.0,
                tau: 33.0,
                alpha,
                band: (0.0, 100.0),
            };
            let mut fast = vec![Complex64::new(0.0, 0.0); 2000];
            chirp.fill(-37.3, 0.0131, &mut fast);
            for (j, z) in fast.iter().enumerate() {
                let xi: f64 = -37.3 + j as f64 * 0.0131;
                let expect = Complex64::from_polar(1.0, 33.0 * xi.abs().powf(alpha));
                assert!((z - expect).norm() < 1e-8, "alpha {alpha} j {j}");
            }
        }
    }

    #[test]
    fn positive_half_drops_negative_frequencies() {
        let grid = GridSpec::new(1, 512, 30.0).unwrap();
        let chirp = RadialChirp {
            amplitude: |r: f64| crate::spectral::CutoffSpec::default().bump((r - 4.0) / 2.0),
            amplitude_scale: 1e-9,
            tau: 0.4,
            alpha: 3.0,
            band: (2.0, 6.0),
        };
        let full = Field::from_frequency_fn(grid, |xi| {
            if xi[0] <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut z = [Complex64::new(0.0, 0.0)];
            chirp.fill(xi[0], 1.0, &mut z);
            z[0]
        })
        .dft_inverse()
        .unwrap();
        let coarse = synthesize_decimated(&grid, 4, &PositiveHalf(chirp)).unwrap();
        for (j, z) in coarse.samples().iter().enumerate() {
            assert!((z - full.samples()[j * 4]).norm() < 1e-12);
        }
    }

    #[test]
    fn support_beyond_lattice_is_an_error() {
        let grid = GridSpec::new(1, 64, 10.0).unwrap();
        let s = PointwiseSpectrum::with_support(|_| Complex64::new(1.0, 0.0), vec![(-50.0, 50.0)]);
        assert!(matches!(
            synthesize_decimated(&grid, 1, &s),
            Err(Error::Aliasing(_))
        ));
        assert!(synthesize_decimated(&grid, 16, &PointwiseSpectrum::new(|_| Complex64::new(1.0, 0.0))).is_err());
    }

    #[test]
    fn interpolated_amplitude_is_accurate() {
        let bump = |xi: f64| (-(xi - 3.0).powi(2)).exp();
        let chirp = RadialChirp {
            amplitude: bump,
            amplitude_scale: 1.0,
            tau: 0.0,
            alpha: 2.0,
            band: (0.0, 10.0),
        };
        let step = 1e-8;
        assert!(chirp.knot_spacing(step) > 100);
        let mut out = vec![Complex64::new(0.0, 0.0); 5000];
        chirp.fill(2.9999, step, &mut out);
        for (j, z) in out.iter().enumerate() {
            assert!((z.re - bump(2.9999 + j as f64 * step)).abs() < 1e-10);
        }
    }

    #[test]
    fn stride_selection() {
        assert_eq!(stride_for(1 << 20, 1 << 16), 16);
        assert_eq!(stride_for(1 << 10, 1 << 16), 1);
    }
}
