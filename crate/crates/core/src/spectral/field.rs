use num_complex::Complex64;

use super::Grid1D;
use crate::error::{Error, Result};

/// Real samples of a function on a [`Grid1D`] at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Grid1D,
    samples: Vec<f64>,
    time: f64,
}

impl WaveField {
    pub fn new(grid: Grid1D, samples: Vec<f64>, time: f64) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !time.is_finite() {
            return Err(Error::InvalidParameter(format!("time = {time}")));
        }
        Ok(Self {
            grid,
            samples,
            time,
        })
    }

    /// Construct without validation; callers guarantee length and finiteness.
    pub(crate) fn from_parts(grid: Grid1D, samples: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(samples.len(), grid.n_points());
        Self {
            grid,
            samples,
            time,
        }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![0.0; grid.n_points()], 0.0)
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self::from_parts(grid, vec![value; grid.n_points()], 0.0)
    }

    /// Samples `f(x_j)`; fails if any sample is non-finite.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, samples, 0.0)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.grid,
            self.samples.iter().map(|&v| f(v)).collect(),
            self.time,
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_parts(
            self.grid,
            self.samples.iter().map(|v| a * v).collect(),
            self.time,
        )
    }

    /// `self + a * other`, keeping `self`'s time stamp.
    pub fn axpy(&self, a: f64, other: &WaveField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_parts(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(u, v)| u + a * v)
                .collect(),
            self.time,
        ))
    }

    pub fn plus(&self, other: &WaveField) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn minus(&self, other: &WaveField) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    /// Sup-norm distance to another field on the same grid.
    pub fn sup_distance(&self, other: &WaveField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// The field `x -> f(-x)`, exact on the grid.
    pub fn mirrored(&self) -> Self {
        let n = self.grid.n_points();
        let samples = (0..n)
            .map(|i| self.samples[self.grid.mirror_index(i)])
            .collect();
        Self::from_parts(self.grid, samples, self.time)
    }

    /// Circular shift by `m` grid cells to the right.
    pub fn shifted_cells(&self, m: isize) -> Self {
        let n = self.grid.n_points() as isize;
        let samples = (0..n)
            .map(|i| self.samples[(i - m).rem_euclid(n) as usize])
            .collect();
        Self::from_parts(self.grid, samples, self.time)
    }
}

/// Fourier coefficients `F(xi_k) = sum_j f(x_j) exp(-i xi_k x_j) dx`, stored
/// in FFT order (see [`Grid1D::mode`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid1D,
    coefficients: Vec<Complex64>,
    time: f64,
}

impl Spectrum {
    pub fn new(grid: Grid1D, coefficients: Vec<Complex64>, time: f64) -> Result<Self> {
        if coefficients.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: coefficients.len(),
            });
        }
        if let Some(index) = coefficients
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            coefficients,
            time,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Coefficient at signed wavenumber index `k`.
    pub fn at_mode(&self, k: i64) -> Complex64 {
        let n = self.grid.n_points() as i64;
        self.coefficients[k.rem_euclid(n) as usize]
    }

    /// Largest deviation from conjugate symmetry, `|F(-k) - conj F(k)|`.
    /// Zero (to round-off) for spectra of real fields; the Nyquist slot is
    /// its own partner.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.grid.n_points();
        (0..n)
            .map(|j| {
                let partner = (n - j) % n;
                (self.coefficients[partner] - self.coefficients[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `(1/length) * sum |F_k|^2`, which equals `dx * sum f_j^2` (Parseval).
    pub fn weighted_energy(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.grid.length()
    }

    /// Discrete L1 norm `(1/length) * sum |F_k|`; bounds the sup-norm of the
    /// field.
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm()).sum::<f64>() / self.grid.length()
    }
}
