use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::fft::transform_axes;
use super::grid::GridSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Physical,
    Frequency,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Physical => "physical",
            Representation::Frequency => "frequency",
        }
    }
}

/// Fourier multiplier evaluated at a signed frequency vector.
pub trait Symbol: Sync {
    fn eval(&self, xi: &[f64]) -> Complex64;
}

impl<F> Symbol for F
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    fn eval(&self, xi: &[f64]) -> Complex64 {
        self(xi)
    }
}

/// Sampled complex function on a [`GridSpec`].
///
/// Frequency samples are stored in wrapped FFT order; use
/// [`GridSpec::frequency_vector`] to recover the signed frequency of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    repr: Representation,
    samples: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, repr: Representation, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        Ok(Self {
            grid,
            repr,
            samples,
        })
    }

    pub fn zeros(grid: GridSpec, repr: Representation) -> Self {
        Self {
            grid,
            repr,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f` at every physical grid point.
    pub fn from_physical_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let samples = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self {
            grid,
            repr: Representation::Physical,
            samples,
        }
    }

    /// Samples a spectrum at every lattice frequency.
    pub fn from_frequency_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let samples = (0..grid.len())
            .map(|i| f(&grid.frequency_vector(i)))
            .collect();
        Self {
            grid,
            repr: Representation::Frequency,
            samples,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid,
            repr: self.repr,
            samples: self.samples.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid and representation.
    pub fn zip_with(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        if self.repr != other.repr {
            return Err(Error::WrongRepresentation {
                expected: self.repr.name(),
                found: other.repr.name(),
            });
        }
        Ok(Field {
            grid: self.grid,
            repr: self.repr,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest pointwise difference to `other`.
    pub fn max_distance(&self, other: &Field) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    fn expect(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(Error::WrongRepresentation {
                expected: repr.name(),
                found: self.repr.name(),
            });
        }
        Ok(())
    }

    /// Riemann-sum transform `sum_n f(x_n) exp(-i x_n . xi_m) (2L/N)^d`.
    pub fn dft_forward(&self) -> Result<Field> {
        self.expect(Representation::Physical)?;
        let mut data = self.samples.clone();
        transform_axes(
            &mut data,
            self.grid.dim(),
            self.grid.points(),
            FftDirection::Forward,
        );
        let weight = self.grid.cell_volume();
        apply_phase_and_weight(&self.grid, &mut data, weight);
        Ok(Field {
            grid: self.grid,
            repr: Representation::Frequency,
            samples: data,
        })
    }

    /// Lattice inverse `(2 pi)^-d sum_m fhat(xi_m) exp(i x_n . xi_m) (pi/L)^d`.
    pub fn dft_inverse(&self) -> Result<Field> {
        self.expect(Representation::Frequency)?;
        let mut data = self.samples.clone();
        let weight = (2.0 * self.grid.half_width()).powi(-(self.grid.dim() as i32));
        apply_phase_and_weight(&self.grid, &mut data, 1.0);
        transform_axes(
            &mut data,
            self.grid.dim(),
            self.grid.points(),
            FftDirection::Inverse,
        );
        for z in &mut data {
            *z *= weight;
        }
        Ok(Field {
            grid: self.grid,
            repr: Representation::Physical,
            samples: data,
        })
    }

    pub fn to_frequency(&self) -> Result<Field> {
        match self.repr {
            Representation::Frequency => Ok(self.clone()),
            Representation::Physical => self.dft_forward(),
        }
    }

    pub fn to_physical(&self) -> Result<Field> {
        match self.repr {
            Representation::Physical => Ok(self.clone()),
            Representation::Frequency => self.dft_inverse(),
        }
    }

    /// `m(D) f`, returned in the representation of the input.
    pub fn apply_symbol(&self, symbol: &dyn Symbol) -> Result<Field> {
        let spectrum = self.to_frequency()?;
        let mut samples = spectrum.samples;
        for (i, z) in samples.iter_mut().enumerate() {
            let xi = self.grid.frequency_vector(i);
            let m = symbol.eval(&xi);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFiniteSymbol { xi });
            }
            *z *= m;
        }
        let out = Field {
            grid: self.grid,
            repr: Representation::Frequency,
            samples,
        };
        match self.repr {
            Representation::Frequency => Ok(out),
            Representation::Physical => out.dft_inverse(),
        }
    }

    /// Errors when the spectrum has not decayed in the outer quarter of the
    /// lattice band, i.e. the field is not resolved with a 4x margin.
    pub fn ensure_spectrally_resolved(&self, rel_tol: f64) -> Result<()> {
        let spectrum = self.to_frequency()?;
        let limit = 0.75 * self.grid.nyquist();
        let peak = spectrum.max_abs();
        if peak == 0.0 {
            return Ok(());
        }
        let mut idx = vec![0; self.grid.dim()];
        let mut worst = 0.0f64;
        for (i, z) in spectrum.samples.iter().enumerate() {
            self.grid.unravel(i, &mut idx);
            let outer = idx
                .iter()
                .any(|&k| self.grid.frequency(k).abs() > limit);
            if outer {
                worst = worst.max(z.norm());
            }
        }
        if worst > rel_tol * peak {
            return Err(Error::Aliasing(format!(
                "spectrum reaches {:.3e} of its peak beyond 3/4 of the lattice Nyquist {:.6}; refine the grid",
                worst / peak,
                self.grid.nyquist()
            )));
        }
        Ok(())
    }
}

/// Multiplies slot `k` by `prod_axis (-1)^{m_axis} * weight`, the phase from
/// the grid starting at `-L` rather than 0.
fn apply_phase_and_weight(grid: &GridSpec, data: &mut [Complex64], weight: f64) {
    let mut idx = vec![0; grid.dim()];
    for (i, z) in data.iter_mut().enumerate() {
        grid.unravel(i, &mut idx);
        let parity: i64 = idx.iter().map(|&k| grid.signed_mode(k)).sum();
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *z *= sign * weight;
    }
}
