use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-length/2, length/2)`.
///
/// Sample `j` sits at `x_j = -length/2 + j*dx`. Mode index `j` of a transform
/// corresponds to the signed integer wavenumber `k = j` for `j < n/2` and
/// `k = j - n` otherwise (standard FFT ordering), so the Nyquist mode is
/// `k = -n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid1D {
    n_points: usize,
    length: f64,
}

#[derive(Deserialize)]
struct RawGrid {
    n_points: usize,
    length: f64,
}

impl TryFrom<RawGrid> for Grid1D {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        Grid1D::new(raw.n_points, raw.length)
    }
}

impl Grid1D {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length = {length} must be positive and finite"
            )));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x_min(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn x_max(&self) -> f64 {
        0.5 * self.length
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min() + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Signed integer wavenumber of FFT slot `j`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n_points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n_points / 2
    }

    /// Largest |k| retained by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n_points / 3) as i64
    }

    /// Mask of modes kept by the 2/3 rule, in FFT order.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = self.dealias_cutoff();
        (0..self.n_points)
            .map(|j| self.mode(j).abs() <= cut)
            .collect()
    }

    /// Largest wavenumber magnitude retained after dealiasing.
    pub fn dealiased_max_wavenumber(&self) -> f64 {
        2.0 * PI * self.dealias_cutoff() as f64 / self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min() && x < self.x_max()
    }

    /// Wraps `x` into the periodic box.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length;
        (x - self.x_min()).rem_euclid(l) + self.x_min()
    }

    /// Index of the grid point nearest to `x` (periodically).
    pub fn nearest_index(&self, x: f64) -> usize {
        let s = (self.wrap(x) - self.x_min()) / self.dx();
        (s.round() as usize) % self.n_points
    }

    /// Index such that `x_j` is the mirror image `-x_i` on the periodic grid.
    pub fn mirror_index(&self, i: usize) -> usize {
        (self.n_points - i) % self.n_points
    }

    pub(crate) fn check_same(&self, other: &Grid1D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid1D::new(8, 1.0).is_err());
        assert!(Grid1D::new(100, 1.0).is_err());
        assert!(Grid1D::new(64, 0.0).is_err());
        assert!(Grid1D::new(64, f64::NAN).is_err());
        assert!(Grid1D::new(16, 2.0).is_ok());
    }

    #[test]
    fn spacing_reconstructs_length() {
        let g = Grid1D::new(1024, 100.0).unwrap();
        assert_eq!(g.dx() * g.n_points() as f64, g.length());
        assert_eq!(g.x(0), -50.0);
    }

    #[test]
    fn wavenumbers_antisymmetric_except_nyquist() {
        let g = Grid1D::new(32, 7.0).unwrap();
        let n = g.n_points();
        for j in 1..n {
            if j == g.nyquist_slot() {
                assert_eq!(g.mode(j), -(n as i64) / 2);
                continue;
            }
            assert_eq!(g.wavenumber(j), -g.wavenumber(n - j));
        }
    }

    #[test]
    fn mirror_maps_x_to_minus_x() {
        let g = Grid1D::new(64, 10.0).unwrap();
        for i in 0..64 {
            let m = g.mirror_index(i);
            assert!((g.wrap(-g.x(i)) - g.x(m)).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_validates() {
        let ok: Grid1D = toml::from_str("n_points = 64\nlength = 3.0").unwrap();
        assert_eq!(ok.n_points(), 64);
        let bad: std::result::Result<Grid1D, _> = toml::from_str("n_points = 60\nlength = 3.0");
        assert!(bad.is_err());
    }
}
