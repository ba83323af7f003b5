//! Seeded, band-limited random perturbations with an exact L2 norm.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::fft::ifft_real;
use crate::spectral::{integrate, norm_l2, Grid1D, WaveField};

/// Default band limit: modes `|k| <= n/8`.
pub fn default_band(grid: &Grid1D) -> usize {
    grid.n_points() / 8
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha = {alpha} must be >= 0")))
    }
}

fn rescale(samples: Vec<f64>, grid: &Grid1D, alpha: f64) -> Result<WaveField> {
    let f = WaveField::new(*grid, samples, 0.0)?;
    let norm = norm_l2(&f);
    if norm == 0.0 {
        return Ok(WaveField::zeros(*grid));
    }
    Ok(f.scaled(alpha / norm))
}

fn gaussian_modes(grid: &Grid1D, band: usize, seed: u64) -> Vec<f64> {
    let n = grid.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(normal(), 0.0);
    for k in 1..=band {
        let z = Complex64::new(normal(), normal());
        buf[k] = z;
        buf[n - k] = z.conj();
    }
    ifft_real(buf)
}

/// Field with independent Gaussian Fourier coefficients on `|k| <= band`,
/// rescaled to L2 norm exactly `alpha`.
pub fn band_limited_noise(grid: &Grid1D, alpha: f64, seed: u64, band: usize) -> Result<WaveField> {
    check_alpha(alpha)?;
    if band == 0 || band >= grid.n_points() / 2 {
        return Err(Error::InvalidParameter(format!(
            "band {band} must lie in 1..{}",
            grid.n_points() / 2
        )));
    }
    rescale(gaussian_modes(grid, band, seed), grid, alpha)
}

/// Band-limited noise confined to `[center - half_width, center + half_width]`
/// by a smooth super-Gaussian window, with zero mean, rescaled to L2 norm
/// `alpha`.
///
/// Zero mean keeps the perturbation from adding a constant shelf, and the
/// window keeps it away from the box edges, where periodic wrap-around would
/// otherwise feed radiation back onto the solitons.
pub fn localized_noise(
    grid: &Grid1D,
    alpha: f64,
    seed: u64,
    band: usize,
    center: f64,
    half_width: f64,
) -> Result<WaveField> {
    check_alpha(alpha)?;
    if !(half_width.is_finite() && half_width > 0.0 && center.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window center {center}, half width {half_width}"
        )));
    }
    let raw = band_limited_noise(grid, 1.0, seed, band)?;
    let window = WaveField::from_fn(*grid, |x| (-((x - center) / half_width).powi(8)).exp())?;
    let z: Vec<f64> = raw
        .samples()
        .iter()
        .zip(window.samples())
        .map(|(a, w)| a * w)
        .collect();
    let mass = integrate(&WaveField::new(*grid, z.clone(), 0.0)?) / integrate(&window);
    let z = z
        .iter()
        .zip(window.samples())
        .map(|(a, w)| a - mass * w)
        .collect();
    rescale(z, grid, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, tail_energy_fraction};

    #[test]
    fn exact_norm_and_band() {
        let g = Grid1D::new(256, 50.0).unwrap();
        let z = band_limited_noise(&g, 0.01, 3, 32).unwrap();
        assert!((norm_l2(&z) - 0.01).abs() < 1e-15);
        let s = forward_transform(&z).unwrap();
        for j in 0..256 {
            if g.mode(j).abs() > 32 {
                assert!(s.coefficients()[j].norm() < 1e-15);
            }
        }
        assert_eq!(z, band_limited_noise(&g, 0.01, 3, 32).unwrap());
        assert_ne!(z, band_limited_noise(&g, 0.01, 4, 32).unwrap());
        assert!(band_limited_noise(&g, -1.0, 3, 32).is_err());
        assert!(band_limited_noise(&g, 1.0, 3, 0).is_err());
    }

    #[test]
    fn localized_is_confined_and_zero_mean() {
        let g = Grid1D::new(1024, 200.0).unwrap();
        let z = localized_noise(&g, 1e-3, 9, 128, 10.0, 20.0).unwrap();
        assert!((norm_l2(&z) - 1e-3).abs() < 1e-15);
        assert!(integrate(&z).abs() < 1e-15);
        for j in 0..1024 {
            if (g.x(j) - 10.0).abs() > 40.0 {
                assert!(z.samples()[j].abs() < 1e-12);
            }
        }
        assert!(tail_energy_fraction(&z) < 1e-20);
        assert_eq!(
            localized_noise(&g, 0.0, 9, 128, 10.0, 20.0).unwrap().sup_norm(),
            0.0
        );
    }
}
