//! Least-squares lines and rank correlation for fitting empirical constants.

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

fn check_samples(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "regression needs >= 2 paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite regression sample".into()));
    }
    Ok(())
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    check_samples(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("regression abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Fit `y = A exp(-gamma x)` by a line through `(x, ln y)`; returns
/// `(gamma, A, fit)`. All `y` must be positive.
pub fn exponential_decay_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, LinearFit)> {
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::InvalidParameter(
            "exponential fit needs positive samples".into(),
        ));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let fit = linear_fit(xs, &logs)?;
    Ok((-fit.slope, fit.intercept.exp(), fit))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        // Ties share the mean rank.
        let rank = 0.5 * (i + j) as f64;
        for &k in &idx[i..=j] {
            r[k] = rank;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_samples(xs, ys)?;
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(linear_fit(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn exponential() {
        let xs = [20.0, 30.0, 40.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * (-0.7 * x).exp()).collect();
        let (g, a, fit) = exponential_decay_fit(&xs, &ys).unwrap();
        assert!((g - 0.7).abs() < 1e-12);
        assert!((a - 3.0).abs() < 1e-9);
        assert!(fit.r_squared > 0.999_999);
        assert!(exponential_decay_fit(&xs, &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn spearman_monotone_and_ties() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&xs, &[9.0, 5.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-14);
        assert!((spearman(&xs, &[1.0, 4.0, 9.0, 16.0]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(spearman(&xs, &[1.0; 4]).unwrap(), 0.0);
    }
}
