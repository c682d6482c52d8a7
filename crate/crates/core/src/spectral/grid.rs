use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic sampling of the box `[-L, L)^d`.
///
/// Sample points per axis are `x_n = -L + n * 2L/N` and the dual lattice is
/// `xi_m = (pi/L) m` for `m = -N/2 .. N/2 - 1`. Arrays are row-major with
/// axis 0 varying slowest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    half_width: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self {
            dim,
            points,
            half_width,
        })
    }

    /// Smallest power-of-two grid on `[-L, L)^d` whose largest lattice
    /// frequency is at least `max_frequency`.
    pub fn covering(dim: usize, half_width: f64, max_frequency: f64) -> Result<Self> {
        let needed = (max_frequency * 2.0 * half_width / PI).ceil().max(8.0);
        if !needed.is_finite() || needed > (1u64 << 40) as f64 {
            return Err(Error::InvalidGrid(format!(
                "no representable grid reaches frequency {max_frequency} on half width {half_width}"
            )));
        }
        Self::new(dim, (needed as usize).next_power_of_two(), half_width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical cell width `2L/N`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Cell volume `(2L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency lattice spacing `pi/L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    /// Frequency-lattice cell volume `(pi/L)^d`.
    pub fn frequency_cell_volume(&self) -> f64 {
        self.frequency_step().powi(self.dim as i32)
    }

    /// Largest representable frequency magnitude per axis, `pi N / 2L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_width)
    }

    pub fn coordinate(&self, n: usize) -> f64 {
        -self.half_width + n as f64 * self.spacing()
    }

    /// Signed lattice index of the stored (wrapped) frequency slot `k`.
    pub fn signed_mode(&self, k: usize) -> i64 {
        let n = self.points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Stored slot of the signed lattice index `m`.
    pub fn wrapped_slot(&self, m: i64) -> Option<usize> {
        let n = self.points as i64;
        if m < -n / 2 || m >= n / 2 {
            return None;
        }
        Some(m.rem_euclid(n) as usize)
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.signed_mode(k) as f64 * self.frequency_step()
    }

    /// Per-axis indices of the flat row-major index `flat`.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.dim).rev() {
            out[axis] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    /// Physical position of flat sample `flat`.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        self.unravel(flat, &mut idx);
        idx.iter().map(|&n| self.coordinate(n)).collect()
    }

    /// Signed frequency vector of flat (wrapped) slot `flat`.
    pub fn frequency_vector(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim];
        self.unravel(flat, &mut idx);
        idx.iter().map(|&k| self.frequency(k)).collect()
    }

    /// Errors unless the largest lattice frequency is at least `factor`
    /// times `max_frequency`.
    pub fn ensure_resolves(&self, max_frequency: f64, factor: f64) -> Result<()> {
        let required = factor * max_frequency;
        if self.nyquist() + 1e-12 * required < required {
            return Err(Error::Aliasing(format!(
                "largest lattice frequency {:.6} is below {factor} x {max_frequency} = {required:.6}; \
                 use at least N = {} on half width {}",
                self.nyquist(),
                ((required * 2.0 * self.half_width / PI).ceil() as usize).next_power_of_two(),
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Safety factor between the largest lattice frequency and the largest
/// frequency in a field's support.
pub const ADEQUACY_FACTOR: f64 = 4.0;

/// The standard adequacy rule: lattice Nyquist at least four times the
/// largest frequency present.
pub fn validate_adequacy(grid: &GridSpec, max_frequency: f64) -> Result<()> {
    grid.ensure_resolves(max_frequency, ADEQUACY_FACTOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0, 16, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0).is_err());
        assert!(GridSpec::new(1, 4, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 0.0).is_err());
        assert!(GridSpec::new(1, 16, f64::NAN).is_err());
        assert!(GridSpec::new(3, 8, 2.0).is_ok());
    }

    #[test]
    fn lattice_layout() {
        let g = GridSpec::new(1, 8, 4.0).unwrap();
        assert_eq!(g.coordinate(0), -4.0);
        assert_eq!(g.coordinate(4), 0.0);
        assert_eq!(g.signed_mode(3), 3);
        assert_eq!(g.signed_mode(4), -4);
        assert_eq!(g.signed_mode(7), -1);
        assert_eq!(g.wrapped_slot(-1), Some(7));
        assert_eq!(g.wrapped_slot(4), None);
        assert!((g.nyquist() - PI).abs() < 1e-15);
    }

    #[test]
    fn ravel_roundtrip() {
        let g = GridSpec::new(3, 8, 1.0).unwrap();
        let mut idx = [0; 3];
        for flat in [0, 1, 63, 64, 511] {
            g.unravel(flat, &mut idx);
            assert_eq!(g.ravel(&idx), flat);
        }
    }

    #[test]
    fn covering_reaches_frequency() {
        let g = GridSpec::covering(1, 10.0, 50.0).unwrap();
        assert!(g.nyquist() >= 50.0);
        assert!(g.points().is_power_of_two());
        assert!(validate_adequacy(&g, 50.0).is_err());
        assert!(validate_adequacy(&g, 10.0).is_ok());
    }
}
