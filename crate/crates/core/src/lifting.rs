//! Inversion of the Gardner transform near a shifted Gardner ensemble.
//!
//! Given `u0 = R_0 + z_0` close to a KdV soliton sum, find `v0 = S_0 + w0`
//! with `M_beta[v0] = u0`. Expanding the transform around `S_0` gives
//!
//! ```text
//! L w0 = (R_0 - M_beta[S_0]) + z_0 + (3/2) beta w0^2,
//! L w  = -(3/2) sqrt(2 beta) w_x + (1 - 3 beta S_0) w,
//! ```
//!
//! solved by an outer Picard iteration on the quadratic term, each step
//! inverting `L` with an inner fixed point in Fourier space:
//! `w^ <- (3 beta F[S_0 w] + f^) / (1 - (3/2) i sqrt(2 beta) xi)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{ensemble_cross_term, ensemble_field, ShiftPolicy, SolitonEnsemble};
use crate::spectral::fft::{fft_real, ifft_real};
use crate::spectral::{
    derivative_samples, derivative_symbol, norm_h1, norm_l2, Grid1D, WaveField,
};
use crate::transform::{gardner_drift, gardner_transform};

/// Largest grid accepted by the dense oracle.
pub const DENSE_MAX_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiftConfig {
    pub beta: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    /// L2 residual target of each linear solve; applied relative to `||f||`
    /// when the right-hand side is smaller than one.
    pub inner_tol: f64,
    /// L2 residual target `||M_beta[v0] - u0||`.
    pub outer_tol: f64,
    /// Upper bound on the measured contraction ratio of the inner iteration.
    pub contraction_guard: f64,
    /// Trust radius multiplier: the iterate must stay within
    /// `trust_factor * K0 * (alpha/sqrt(beta) + exp(-gamma0 L))` in H1.
    pub trust_factor: f64,
    /// Largest accepted `||u0 - R_0||`.
    pub alpha_cap: f64,
}

impl Default for LiftConfig {
    fn default() -> Self {
        Self {
            beta: 0.05,
            max_inner_iters: 500,
            max_outer_iters: 100,
            inner_tol: 1e-12,
            outer_tol: 1e-10,
            contraction_guard: 0.9,
            trust_factor: 2.0,
            alpha_cap: 0.1,
        }
    }
}

impl LiftConfig {
    pub fn with_beta(beta: f64) -> Self {
        Self {
            beta,
            ..Self::default()
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!("beta = {} must be >= 0", self.beta)));
        }
        if self.max_inner_iters == 0 || self.max_outer_iters == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        let floor = f64::EPSILON * grid.n_points() as f64;
        for (name, tol) in [("inner_tol", self.inner_tol), ("outer_tol", self.outer_tol)] {
            if !(tol.is_finite() && tol > floor) {
                return Err(Error::Config(format!(
                    "{name} = {tol:e} must exceed eps * n = {floor:e}"
                )));
            }
        }
        if !(self.contraction_guard > 0.0 && self.contraction_guard < 1.0) {
            return Err(Error::Config(format!(
                "contraction_guard = {} must lie in (0, 1)",
                self.contraction_guard
            )));
        }
        if !(self.trust_factor.is_finite() && self.trust_factor > 0.0) {
            return Err(Error::Config("trust_factor must be > 0".into()));
        }
        if !(self.alpha_cap.is_finite() && self.alpha_cap > 0.0) {
            return Err(Error::Config("alpha_cap must be > 0".into()));
        }
        Ok(())
    }
}

/// Solution of `L w = f` with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub w: WaveField,
    pub iterations: usize,
    /// `||L w - f||_{L2}`, recomputed from scratch after the iteration.
    pub residual: f64,
    /// Largest ratio of consecutive increments observed.
    pub contraction_ratio: f64,
    /// `sqrt(beta) ||w||_{H1} / ||f||_{L2}`; the constant `K` in
    /// `||w||_{H1} <= (K / sqrt(beta)) ||f||`.
    pub h1_constant: f64,
}

/// `L w = -(3/2) sqrt(2 beta) w_x + (1 - 3 beta S_0) w`, pointwise.
pub fn apply_linear(w: &WaveField, s0: &WaveField, beta: f64) -> Result<WaveField> {
    w.grid().check_same(s0.grid())?;
    let a = gardner_drift(beta);
    let wx = derivative_samples(w.grid(), w.samples(), 1);
    let out = w
        .samples()
        .iter()
        .zip(s0.samples())
        .zip(&wx)
        .map(|((wi, si), dx)| -a * dx + (1.0 - 3.0 * beta * si) * wi)
        .collect();
    WaveField::new(*w.grid(), out, w.time())
}

fn l2(grid: &Grid1D, v: &[f64]) -> f64 {
    (grid.dx() * v.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

/// Invert `L` by the Fourier fixed point. See [`linear_resolve`] for the
/// plain-field variant.
pub fn linear_resolve_with_stats(
    f: &WaveField,
    s0: &WaveField,
    beta: f64,
    cfg: &LiftConfig,
) -> Result<LinearSolve> {
    let grid = *f.grid();
    grid.check_same(s0.grid())?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be >= 0")));
    }
    let f_norm = norm_l2(f);
    let tol = cfg.inner_tol * f_norm.min(1.0);
    let n = grid.n_points();
    let a = gardner_drift(beta);
    let denom: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0, 0.0) - a * derivative_symbol(&grid, j, 1))
        .collect();
    let f_hat = fft_real(f.samples());
    let s = s0.samples();

    let mut w = vec![0.0; n];
    let mut prev_step = f64::NAN;
    let mut ratio: f64 = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let sw: Vec<f64> = s.iter().zip(&w).map(|(si, wi)| si * wi).collect();
        let mut g = fft_real(&sw);
        for ((gj, fj), dj) in g.iter_mut().zip(&f_hat).zip(&denom) {
            *gj = (3.0 * beta * *gj + fj) / dj;
        }
        let next = ifft_real(g);
        let diff: Vec<f64> = next.iter().zip(&w).map(|(x, y)| x - y).collect();
        let step = l2(&grid, &diff);
        // L w_next - f = 3 beta S_0 (w - w_next), exactly.
        let s_diff: Vec<f64> = s.iter().zip(&diff).map(|(si, d)| 3.0 * beta * si * d).collect();
        let cheap_residual = l2(&grid, &s_diff);
        let w_norm = l2(&grid, &next);
        // Ratios of increments at round-off level carry no information.
        if prev_step.is_finite() && prev_step > 1e-12 * w_norm && step > 1e-12 * w_norm {
            ratio = ratio.max(step / prev_step);
            if ratio >= cfg.contraction_guard {
                return Err(Error::ContractionGuard {
                    ratio,
                    guard: cfg.contraction_guard,
                });
            }
        }
        prev_step = step;
        w = next;
        if cheap_residual <= tol || step == 0.0 {
            break;
        }
        if iterations >= cfg.max_inner_iters {
            return Err(Error::InnerNotConverged {
                iterations,
                residual: cheap_residual,
            });
        }
    }
    let w = WaveField::new(grid, w, f.time())?;
    let residual = norm_l2(&apply_linear(&w, s0, beta)?.minus(f)?);
    let h1_constant = if f_norm > 0.0 {
        beta.sqrt() * norm_h1(&w) / f_norm
    } else {
        0.0
    };
    Ok(LinearSolve {
        w,
        iterations,
        residual,
        contraction_ratio: ratio,
        h1_constant,
    })
}

/// Solve `L w = f` by the Fourier fixed point.
pub fn linear_resolve(
    f: &WaveField,
    s0: &WaveField,
    beta: f64,
    cfg: &LiftConfig,
) -> Result<WaveField> {
    linear_resolve_with_stats(f, s0, beta, cfg).map(|s| s.w)
}

/// Periodic spectral differentiation matrix on `grid`.
pub fn differentiation_matrix(grid: &Grid1D) -> DMatrix<f64> {
    let n = grid.n_points();
    let scale = 2.0 * std::f64::consts::PI / grid.length();
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            return 0.0;
        }
        let d = j as i64 - k as i64;
        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let angle = d as f64 * std::f64::consts::PI / n as f64;
        0.5 * sign * scale / angle.tan()
    })
}

/// Direct collocation solve of `L w = f` by LU factorization; an independent
/// check on [`linear_resolve`] for small grids.
pub fn dense_resolve(f: &WaveField, s0: &WaveField, beta: f64) -> Result<WaveField> {
    let grid = *f.grid();
    grid.check_same(s0.grid())?;
    let n = grid.n_points();
    if n > DENSE_MAX_POINTS {
        return Err(Error::InvalidParameter(format!(
            "dense solve limited to n <= {DENSE_MAX_POINTS}, got {n}"
        )));
    }
    let a = gardner_drift(beta);
    let mut m = differentiation_matrix(&grid) * (-a);
    for (j, s) in s0.samples().iter().enumerate() {
        m[(j, j)] += 1.0 - 3.0 * beta * s;
    }
    let rhs = DVector::from_column_slice(f.samples());
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter("singular collocation matrix".into()))?;
    WaveField::new(grid, sol.iter().copied().collect(), f.time())
}

#[derive(Debug, Clone)]
pub struct LiftResult {
    pub v0: WaveField,
    pub w0: WaveField,
    pub s0: WaveField,
    /// `||M_beta[v0] - u0||_{L2}` from the iteration's own arithmetic.
    pub residual: f64,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    /// `||v0 - S_0||_{H1} = ||w0||_{H1}`.
    pub distance_h1: f64,
    pub converged: bool,
    /// `||u0 - R_0||_{L2}`.
    pub alpha: f64,
    /// Empirical `K0 = sqrt(beta) ||w_1||_{H1} / ||f||` from the first solve.
    pub k0: f64,
    pub trust_radius: f64,
    pub max_contraction: f64,
}

fn lift_residual(
    w: &WaveField,
    s0: &WaveField,
    forcing: &WaveField,
    beta: f64,
) -> Result<f64> {
    let lw = apply_linear(w, s0, beta)?;
    let r: Vec<f64> = lw
        .samples()
        .iter()
        .zip(w.samples())
        .zip(forcing.samples())
        .map(|((l, wi), fi)| l - 1.5 * beta * wi * wi - fi)
        .collect();
    Ok(l2(w.grid(), &r))
}

/// Solve `M_beta[S_0 + w0] = u0` for `w0`, with `S_0` the shifted Gardner
/// ensemble on `ensemble`'s speeds and nominal centers.
pub fn lift(u0: &WaveField, ensemble: &SolitonEnsemble, cfg: &LiftConfig) -> Result<LiftResult> {
    let grid = *u0.grid();
    cfg.validate(&grid)?;
    let beta = cfg.beta;
    if beta <= 0.0 {
        return Err(Error::Config("lifting needs beta > 0".into()));
    }
    let gardner = ensemble.to_gardner(beta, ShiftPolicy::Shifted)?;
    let s0 = ensemble_field(&gardner, &grid)?;
    let r0 = ensemble_field(&ensemble.to_kdv(), &grid)?;
    let z0 = u0.minus(&r0)?;
    let alpha = norm_l2(&z0);
    if alpha > cfg.alpha_cap {
        return Err(Error::InvalidParameter(format!(
            "||u0 - R_0|| = {alpha:.3e} exceeds alpha_cap = {:.3e}",
            cfg.alpha_cap
        )));
    }
    // R_0 - M_beta[S_0] = (3/2) beta sum_{i != j} Q_i Q_j exactly.
    let cross = ensemble_cross_term(&gardner, &grid)?;
    let forcing = z0.axpy(1.5 * beta, &cross)?;
    let f_norm = norm_l2(&forcing);

    let gamma0 = ensemble.gamma0();
    let floor = (-gamma0 * ensemble.min_separation()).exp();
    let mut result = LiftResult {
        v0: s0.clone(),
        w0: WaveField::zeros(grid),
        s0: s0.clone(),
        residual: 0.0,
        inner_iterations: 0,
        outer_iterations: 0,
        distance_h1: 0.0,
        converged: true,
        alpha,
        k0: 0.0,
        trust_radius: 0.0,
        max_contraction: 0.0,
    };
    if f_norm == 0.0 {
        return Ok(result);
    }

    let mut w = WaveField::zeros(grid);
    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_outer_iters {
        let rhs: Vec<f64> = forcing
            .samples()
            .iter()
            .zip(w.samples())
            .map(|(f, wi)| f + 1.5 * beta * wi * wi)
            .collect();
        let rhs = WaveField::new(grid, rhs, 0.0)?;
        let solve = linear_resolve_with_stats(&rhs, &s0, beta, cfg)?;
        result.inner_iterations += solve.iterations;
        result.max_contraction = result.max_contraction.max(solve.contraction_ratio);
        w = solve.w;
        let h1 = norm_h1(&w);
        if iteration == 1 {
            result.k0 = solve.h1_constant;
            result.trust_radius =
                cfg.trust_factor * result.k0 * (alpha / beta.sqrt() + floor);
            // Guard against a radius below the first iterate itself, which
            // happens when the overlap floor is below round-off.
            result.trust_radius = result.trust_radius.max(cfg.trust_factor * h1);
        }
        if h1 > result.trust_radius {
            return Err(Error::OuterDivergence {
                iteration,
                norm: h1,
                radius: result.trust_radius,
            });
        }
        residual = lift_residual(&w, &s0, &forcing, beta)?;
        result.outer_iterations = iteration;
        if residual <= cfg.outer_tol * f_norm.min(1.0) {
            break;
        }
    }
    result.converged = residual <= cfg.outer_tol * f_norm.min(1.0);
    result.residual = residual;
    result.distance_h1 = norm_h1(&w);
    result.v0 = s0.plus(&w)?;
    result.w0 = w;
    Ok(result)
}

/// `||M_beta[v0] - u0||_{L2}` recomputed through the transform module.
pub fn verify_lift(result: &LiftResult, u0: &WaveField, beta: f64) -> Result<f64> {
    Ok(norm_l2(&gardner_transform(&result.v0, beta)?.minus(u0)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::band_limited_noise;
    use crate::profiles::{delta_shift, gardner_soliton, SolitonParams};

    fn two_soliton_s0(grid: &Grid1D, beta: f64) -> WaveField {
        let e = SolitonEnsemble::kdv(&[1.0, 2.0], &[-15.0, 15.0], 30.0)
            .unwrap()
            .to_gardner(beta, ShiftPolicy::Shifted)
            .unwrap();
        ensemble_field(&e, grid).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero_in_one_iteration() {
        let g = Grid1D::new(256, 100.0).unwrap();
        let s0 = two_soliton_s0(&g, 0.05);
        let s = linear_resolve_with_stats(&WaveField::zeros(g), &s0, 0.05, &LiftConfig::default())
            .unwrap();
        assert_eq!(s.iterations, 1);
        assert_eq!(s.w.sup_norm(), 0.0);
    }

    #[test]
    fn beta_zero_is_identity() {
        let g = Grid1D::new(256, 100.0).unwrap();
        let f = band_limited_noise(&g, 0.01, 1, 32).unwrap();
        let s0 = two_soliton_s0(&g, 0.05);
        let w = linear_resolve(&f, &s0, 0.0, &LiftConfig::default()).unwrap();
        assert!(w.sup_distance(&f).unwrap() < 1e-16);
    }

    #[test]
    fn differentiation_matrix_on_sine() {
        let g = Grid1D::new(32, 2.0 * std::f64::consts::PI).unwrap();
        let d = differentiation_matrix(&g);
        let v = DVector::from_iterator(32, g.points().into_iter().map(|x| (2.0 * x).sin()));
        let dv = d * v;
        for (j, x) in g.points().into_iter().enumerate() {
            assert!((dv[j] - 2.0 * (2.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_and_dense_agree() {
        let g = Grid1D::new(256, 100.0).unwrap();
        let s0 = two_soliton_s0(&g, 0.05);
        let f = band_limited_noise(&g, 0.01, 11, 32).unwrap();
        let s = linear_resolve_with_stats(&f, &s0, 0.05, &LiftConfig::default()).unwrap();
        let dense = dense_resolve(&f, &s0, 0.05).unwrap();
        assert!(s.residual < 1e-10);
        assert!(norm_l2(&s.w.minus(&dense).unwrap()) < 1e-9);
        assert!(s.contraction_ratio < 0.5);
    }

    #[test]
    fn guard_trips_when_beta_too_large() {
        let g = Grid1D::new(256, 100.0).unwrap();
        let s0 = two_soliton_s0(&g, 0.1);
        let f = band_limited_noise(&g, 0.01, 2, 32).unwrap();
        let cfg = LiftConfig {
            contraction_guard: 0.3,
            ..LiftConfig::default()
        };
        assert!(matches!(
            linear_resolve(&f, &s0, 0.1, &cfg),
            Err(Error::ContractionGuard { .. })
        ));
    }

    #[test]
    fn single_soliton_lift_is_exact() {
        let g = Grid1D::new(1024, 100.0).unwrap();
        let e = SolitonEnsemble::kdv(&[1.0], &[3.0], 10.0).unwrap();
        let u0 = ensemble_field(&e, &g).unwrap();
        let r = lift(&u0, &e, &LiftConfig::with_beta(0.1)).unwrap();
        assert!(r.converged);
        let d = delta_shift(1.0, 0.1).unwrap();
        let target = gardner_soliton(&SolitonParams::new(1.0, 3.0 - d, 0.1).unwrap(), &g).unwrap();
        assert!(norm_h1(&r.v0.minus(&target).unwrap()) < 1e-8);
        assert!(verify_lift(&r, &u0, 0.1).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_large_perturbation() {
        let g = Grid1D::new(256, 100.0).unwrap();
        let e = SolitonEnsemble::kdv(&[1.0], &[0.0], 10.0).unwrap();
        let u0 = ensemble_field(&e, &g)
            .unwrap()
            .plus(&band_limited_noise(&g, 1.0, 1, 32).unwrap())
            .unwrap();
        assert!(lift(&u0, &e, &LiftConfig::with_beta(0.05)).is_err());
    }
}
