use num_complex::Complex64;

use super::fft::{fft_real, ifft_real};
use super::{Grid1D, Spectrum, WaveField};
use crate::error::{Error, Result};

fn check_finite(f: &WaveField) -> Result<()> {
    match f.samples().iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `(-1)^k` for the mode stored in FFT slot `j` (`k` and `j` share parity).
fn alternating(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_transform(f: &WaveField) -> Result<Spectrum> {
    check_finite(f)?;
    let grid = *f.grid();
    let dx = grid.dx();
    let mut buf = fft_real(f.samples());
    // exp(-i xi_k x_0) = (-1)^k because x_0 = -length/2.
    for (j, z) in buf.iter_mut().enumerate() {
        *z *= dx * alternating(j);
    }
    Spectrum::new(grid, buf, f.time())
}

pub fn inverse_transform(spectrum: &Spectrum) -> Result<WaveField> {
    let grid = *spectrum.grid();
    let inv_dx = 1.0 / grid.dx();
    let buf: Vec<Complex64> = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, z)| z * (inv_dx * alternating(j)))
        .collect();
    WaveField::new(grid, ifft_real(buf), spectrum.time())
}

/// Zero every mode above the 2/3-rule cutoff, in place (FFT order).
pub(crate) fn truncate_modes(grid: &Grid1D, buf: &mut [Complex64]) {
    let cut = grid.dealias_cutoff();
    for (j, z) in buf.iter_mut().enumerate() {
        if grid.mode(j).abs() > cut {
            *z = Complex64::new(0.0, 0.0);
        }
    }
}

/// Multiplier `(i xi)^order` for FFT slot `j`, with the Nyquist slot zeroed
/// for odd orders.
pub(crate) fn derivative_symbol(grid: &Grid1D, j: usize, order: u32) -> Complex64 {
    if order % 2 == 1 && j == grid.nyquist_slot() {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, grid.wavenumber(j)).powu(order)
}

pub(crate) fn derivative_samples(grid: &Grid1D, samples: &[f64], order: u32) -> Vec<f64> {
    if order == 0 {
        return samples.to_vec();
    }
    let mut buf = fft_real(samples);
    for (j, z) in buf.iter_mut().enumerate() {
        *z *= derivative_symbol(grid, j, order);
    }
    ifft_real(buf)
}

/// Spectral derivative of the given order.
pub fn derivative(f: &WaveField, order: u32) -> Result<WaveField> {
    check_finite(f)?;
    if order == 0 {
        return Err(Error::InvalidParameter(
            "derivative order must be positive".into(),
        ));
    }
    Ok(WaveField::from_parts(
        *f.grid(),
        derivative_samples(f.grid(), f.samples(), order),
        f.time(),
    ))
}

pub(crate) fn truncated_samples(grid: &Grid1D, samples: &[f64]) -> Vec<f64> {
    let mut buf = fft_real(samples);
    truncate_modes(grid, &mut buf);
    ifft_real(buf)
}

/// Pointwise product; with `dealias`, inputs and output are truncated to the
/// modes retained by the 2/3 rule.
pub fn product(f: &WaveField, g: &WaveField, dealias: bool) -> Result<WaveField> {
    f.grid().check_same(g.grid())?;
    check_finite(f)?;
    check_finite(g)?;
    let grid = *f.grid();
    let samples = if dealias {
        let a = truncated_samples(&grid, f.samples());
        let b = truncated_samples(&grid, g.samples());
        let p: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        truncated_samples(&grid, &p)
    } else {
        f.samples()
            .iter()
            .zip(g.samples())
            .map(|(x, y)| x * y)
            .collect()
    };
    Ok(WaveField::from_parts(grid, samples, f.time()))
}

/// Rectangle rule `dx * sum f_j`, spectrally accurate for smooth periodic data.
pub fn integrate(f: &WaveField) -> f64 {
    f.grid().dx() * f.samples().iter().sum::<f64>()
}

pub fn norm_l2(f: &WaveField) -> f64 {
    (f.grid().dx() * f.samples().iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn norm_h1(f: &WaveField) -> f64 {
    let fx = derivative_samples(f.grid(), f.samples(), 1);
    let dx = f.grid().dx();
    let s: f64 = f
        .samples()
        .iter()
        .zip(&fx)
        .map(|(v, d)| v * v + d * d)
        .sum();
    (dx * s).sqrt()
}

/// L2 norm over the samples with `x_j >= x_min` (sharp cutoff).
pub fn norm_l2_halfline(f: &WaveField, x_min: f64) -> Result<f64> {
    let grid = f.grid();
    if !(x_min.is_finite() && grid.contains(x_min)) {
        return Err(Error::OutsideDomain {
            x: x_min,
            lo: grid.x_min(),
            hi: grid.x_max(),
        });
    }
    let s: f64 = f
        .samples()
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j) >= x_min)
        .map(|(_, v)| v * v)
        .sum();
    Ok((grid.dx() * s).sqrt())
}

/// Fraction of spectral energy in modes beyond the 2/3 cutoff; a cheap check
/// that a field is resolved well below Nyquist.
pub fn tail_energy_fraction(f: &WaveField) -> f64 {
    let grid = f.grid();
    let buf = fft_real(f.samples());
    let cut = grid.dealias_cutoff();
    let (mut tail, mut total) = (0.0, 0.0);
    for (j, z) in buf.iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if grid.mode(j).abs() > cut {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::new(64, 10.0).unwrap()
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = grid();
        let s = forward_transform(&WaveField::constant(g, 1.0)).unwrap();
        assert!((s.at_mode(0).re - g.length()).abs() < 1e-12);
        for j in 1..g.n_points() {
            assert!(s.coefficients()[j].norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid();
        let l = g.length();
        let f = WaveField::from_fn(g, |x| (2.0 * PI * x / l).cos()).unwrap();
        let s = forward_transform(&f).unwrap();
        for j in 0..g.n_points() {
            let k = g.mode(j);
            let mag = s.coefficients()[j].norm();
            if k.abs() == 1 {
                assert!((mag - l / 2.0).abs() < 1e-12);
            } else {
                assert!(mag < 1e-12, "mode {k}: {mag}");
            }
        }
        assert!(s.conjugate_asymmetry() < 1e-12);
    }

    #[test]
    fn sine_derivative() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = WaveField::from_fn(g, |x| (w * x).sin()).unwrap();
        let d = derivative(&f, 1).unwrap();
        let exact = WaveField::from_fn(g, |x| w * (w * x).cos()).unwrap();
        assert!(d.sup_distance(&exact).unwrap() < 1e-10);
        let c = derivative(&WaveField::constant(g, 3.0), 2).unwrap();
        assert!(c.sup_norm() < 1e-12);
        assert!(derivative(&f, 0).is_err());
    }

    #[test]
    fn sine_squared_closed_form() {
        let g = Grid1D::new(16, 2.0 * PI).unwrap();
        let s = WaveField::from_fn(g, f64::sin).unwrap();
        let p = product(&s, &s, false).unwrap();
        let exact = WaveField::from_fn(g, |x| 0.5 * (1.0 - (2.0 * x).cos())).unwrap();
        assert!(p.sup_distance(&exact).unwrap() < 1e-12);
        let one = WaveField::constant(g, 1.0);
        assert_eq!(product(&s, &one, false).unwrap(), s);
    }

    #[test]
    fn product_rejects_grid_mismatch() {
        let a = WaveField::zeros(grid());
        let b = WaveField::zeros(Grid1D::new(32, 10.0).unwrap());
        assert!(matches!(product(&a, &b, true), Err(Error::GridMismatch)));
    }

    #[test]
    fn halfline_bounds() {
        let g = grid();
        let f = WaveField::constant(g, 1.0);
        assert!(norm_l2_halfline(&f, 5.0).is_err());
        assert!(norm_l2_halfline(&f, -5.1).is_err());
        let full = norm_l2_halfline(&f, -5.0).unwrap();
        assert!((full - norm_l2(&f)).abs() < 1e-14);
        assert_eq!(norm_l2(&WaveField::zeros(g)), 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid();
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(WaveField::new(g, v, 0.0).is_err());
    }
}
