//! Pseudospectral time stepping of `u_t + (u_xx + q u^2 + kappa u^3)_x = 0`
//! (`q = 1`, `kappa = 0` for KdV; `kappa = -beta` for Gardner).
//!
//! The dispersive term is integrated exactly in Fourier space; the flux is
//! dealiased with the 2/3 rule, the cubic part built from two truncated
//! binary products.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::fft::{fft, fft_real, ifft, ifft_real};
use crate::spectral::snapshot::save_snapshot;
use crate::spectral::{derivative_samples, derivative_symbol, truncate_modes, Grid1D, WaveField};

/// Scaled stability limit of classical RK4 on the imaginary axis (2.83),
/// with a small margin.
pub const RK4_IMAGINARY_LIMIT: f64 = 2.8;

/// Coefficients of the flux `q u^2 + kappa u^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeSpec {
    pub quadratic_coeff: f64,
    pub cubic_coeff: f64,
}

impl PdeSpec {
    pub fn kdv() -> Self {
        Self {
            quadratic_coeff: 1.0,
            cubic_coeff: 0.0,
        }
    }

    pub fn gardner(beta: f64) -> Self {
        Self {
            quadratic_coeff: 1.0,
            cubic_coeff: -beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quadratic_coeff.is_finite() && self.cubic_coeff.is_finite()) {
            return Err(Error::InvalidParameter("non-finite PDE coefficient".into()));
        }
        if self.cubic_coeff > 0.0 {
            return Err(Error::InvalidParameter(format!(
                "cubic coefficient {} must be <= 0",
                self.cubic_coeff
            )));
        }
        Ok(())
    }

    /// Mass `(1/2) int u^2`.
    pub fn mass(&self, u: &WaveField) -> f64 {
        0.5 * u.grid().dx() * u.samples().iter().map(|v| v * v).sum::<f64>()
    }

    /// Hamiltonian `(1/2) int u_x^2 - (q/3) int u^3 - (kappa/4) int u^4`.
    pub fn energy(&self, u: &WaveField) -> f64 {
        let ux = derivative_samples(u.grid(), u.samples(), 1);
        let (q, k) = (self.quadratic_coeff, self.cubic_coeff);
        let s: f64 = u
            .samples()
            .iter()
            .zip(&ux)
            .map(|(v, d)| 0.5 * d * d - q / 3.0 * v * v * v - k / 4.0 * v * v * v * v)
            .sum();
        u.grid().dx() * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order exponential time differencing (Cox–Matthews), with
    /// coefficients from contour integrals.
    Etdrk4,
    /// Classical RK4 in the integrating-factor variable.
    IfRk4,
}

/// Damping `sigma(x) = strength * sin^2(pi (x - x_min) / width)` on the
/// leftmost `width` of the box, removing radiation before it wraps around.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingLayer {
    pub width: f64,
    pub strength: f64,
}

impl AbsorbingLayer {
    pub fn profile(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n_points())
            .map(|j| {
                let s = grid.x(j) - grid.x_min();
                if s < self.width {
                    self.strength * (PI * s / self.width).sin().powi(2)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn validate(&self, grid: &Grid1D) -> Result<()> {
        if !(self.width > 0.0 && self.width < grid.length() && self.strength >= 0.0) {
            return Err(Error::Config(format!(
                "absorbing layer width {} / strength {} invalid",
                self.width, self.strength
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    /// Absolute end time; the run starts at the initial field's time stamp.
    pub t_end: f64,
    pub integrator: Integrator,
    pub snapshot_stride: usize,
    /// Relative mass drift tolerated before the run is aborted. Ignored when
    /// an absorbing layer is active, since the layer removes mass by design.
    pub conservation_tol: f64,
    /// Blow-up bound as a multiple of the initial sup-norm.
    pub blowup_factor: f64,
    pub absorbing: Option<AbsorbingLayer>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            integrator: Integrator::Etdrk4,
            snapshot_stride: 100,
            conservation_tol: 1e-6,
            blowup_factor: 10.0,
            absorbing: None,
        }
    }
}

/// Largest stable step for data of sup-norm `sup` on `grid`: the linearized
/// advection `d_x((2 q u + 3 kappa u^2) w)` must stay inside RK4's stability
/// region at the largest retained wavenumber. The dispersive term needs no
/// limit since it is integrated exactly.
pub fn stability_ceiling(
    grid: &Grid1D,
    spec: &PdeSpec,
    sup: f64,
    absorbing: Option<&AbsorbingLayer>,
) -> f64 {
    let speed = 2.0 * spec.quadratic_coeff.abs() * sup + 3.0 * spec.cubic_coeff.abs() * sup * sup;
    let advective = if speed > 0.0 {
        RK4_IMAGINARY_LIMIT / (grid.dealiased_max_wavenumber() * speed)
    } else {
        f64::INFINITY
    };
    let damping = match absorbing {
        Some(layer) if layer.strength > 0.0 => RK4_IMAGINARY_LIMIT / layer.strength,
        _ => f64::INFINITY,
    };
    advective.min(damping)
}

/// Precomputed single-step propagator for one grid, equation and step size.
pub struct Stepper {
    grid: Grid1D,
    spec: PdeSpec,
    dt: f64,
    integrator: Integrator,
    /// `-i xi` (Nyquist zeroed) times the dealiasing mask.
    flux_symbol: Vec<Complex64>,
    damping: Option<Vec<f64>>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

/// Contour points for the ETDRK4 coefficient means.
const CONTOUR_POINTS: usize = 64;

impl Stepper {
    pub fn new(
        grid: Grid1D,
        spec: PdeSpec,
        dt: f64,
        integrator: Integrator,
        absorbing: Option<AbsorbingLayer>,
    ) -> Result<Self> {
        spec.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        if let Some(layer) = &absorbing {
            layer.validate(&grid)?;
        }
        let n = grid.n_points();
        let mask = grid.dealias_mask();
        let flux_symbol = (0..n)
            .map(|j| {
                if mask[j] {
                    -derivative_symbol(&grid, j, 1)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        // Linear part of u_t = -u_xxx: symbol -(i xi)^3 = i xi^3.
        let lin: Vec<Complex64> = (0..n)
            .map(|j| {
                let xi = grid.wavenumber(j);
                Complex64::new(0.0, xi * xi * xi)
            })
            .collect();
        let e = lin.iter().map(|l| (l * dt).exp()).collect();
        let e2 = lin.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
        let (mut q, mut f1, mut f2, mut f3) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        if integrator == Integrator::Etdrk4 {
            let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
                .map(|m| {
                    Complex64::from_polar(1.0, PI * (m as f64 + 0.5) / (CONTOUR_POINTS as f64 / 2.0))
                })
                .collect();
            let inv_m = 1.0 / CONTOUR_POINTS as f64;
            for l in &lin {
                let (mut sq, mut s1, mut s2, mut s3) = (
                    Complex64::default(),
                    Complex64::default(),
                    Complex64::default(),
                    Complex64::default(),
                );
                for r in &roots {
                    let z = l * dt + r;
                    let ez = z.exp();
                    let z3 = z * z * z;
                    sq += ((z * 0.5).exp() - 1.0) / z;
                    s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                    s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                    s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
                }
                q.push(sq * (dt * inv_m));
                f1.push(s1 * (dt * inv_m));
                f2.push(s2 * (dt * inv_m));
                f3.push(s3 * (dt * inv_m));
            }
        }
        Ok(Self {
            grid,
            spec,
            dt,
            integrator,
            flux_symbol,
            damping: absorbing.map(|a| a.profile(&grid)),
            e,
            e2,
            q,
            f1,
            f2,
            f3,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Fourier image of `-d_x(q u^2 + kappa u^3) - sigma u` for the field
    /// with (unnormalized) coefficients `v`.
    fn nonlinear(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut trunc = v.to_vec();
        truncate_modes(&self.grid, &mut trunc);
        let u = ifft_real(trunc);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let mut flux = fft_real(&sq);
        let (qc, kc) = (self.spec.quadratic_coeff, self.spec.cubic_coeff);
        if kc != 0.0 {
            let mut sq_hat = flux.clone();
            truncate_modes(&self.grid, &mut sq_hat);
            let sq_t = ifft_real(sq_hat);
            let cube: Vec<f64> = sq_t.iter().zip(&u).map(|(a, b)| a * b).collect();
            let cube_hat = fft_real(&cube);
            for (f, c) in flux.iter_mut().zip(&cube_hat) {
                *f = qc * *f + kc * c;
            }
        } else if qc != 1.0 {
            for f in flux.iter_mut() {
                *f *= qc;
            }
        }
        for (f, s) in flux.iter_mut().zip(&self.flux_symbol) {
            *f *= s;
        }
        if let Some(sigma) = &self.damping {
            let mut phys: Vec<Complex64> = v.to_vec();
            ifft(&mut phys);
            let mut damp: Vec<Complex64> = phys
                .iter()
                .zip(sigma)
                .map(|(z, s)| Complex64::new(-s * z.re, 0.0))
                .collect();
            fft(&mut damp);
            for (f, d) in flux.iter_mut().zip(&damp) {
                *f += d;
            }
        }
        flux
    }

    /// Advance Fourier coefficients by one step.
    pub(crate) fn advance(&self, v: &[Complex64]) -> Vec<Complex64> {
        match self.integrator {
            Integrator::Etdrk4 => self.advance_etd(v),
            Integrator::IfRk4 => self.advance_if(v),
        }
    }

    fn advance_etd(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let nv = self.nonlinear(v);
        let a: Vec<Complex64> = (0..n).map(|k| self.e2[k] * v[k] + self.q[k] * nv[k]).collect();
        let na = self.nonlinear(&a);
        let b: Vec<Complex64> = (0..n).map(|k| self.e2[k] * v[k] + self.q[k] * na[k]).collect();
        let nb = self.nonlinear(&b);
        let c: Vec<Complex64> = (0..n)
            .map(|k| self.e2[k] * a[k] + self.q[k] * (2.0 * nb[k] - nv[k]))
            .collect();
        let nc = self.nonlinear(&c);
        (0..n)
            .map(|k| {
                self.e[k] * v[k]
                    + nv[k] * self.f1[k]
                    + 2.0 * (na[k] + nb[k]) * self.f2[k]
                    + nc[k] * self.f3[k]
            })
            .collect()
    }

    fn advance_if(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let h = self.dt;
        let k1: Vec<Complex64> = self.nonlinear(v).into_iter().map(|z| z * h).collect();
        let s: Vec<Complex64> = (0..n).map(|k| self.e2[k] * (v[k] + 0.5 * k1[k])).collect();
        let k2: Vec<Complex64> = self.nonlinear(&s).into_iter().map(|z| z * h).collect();
        let s: Vec<Complex64> = (0..n).map(|k| self.e2[k] * v[k] + 0.5 * k2[k]).collect();
        let k3: Vec<Complex64> = self.nonlinear(&s).into_iter().map(|z| z * h).collect();
        let s: Vec<Complex64> = (0..n).map(|k| self.e[k] * v[k] + self.e2[k] * k3[k]).collect();
        let k4: Vec<Complex64> = self.nonlinear(&s).into_iter().map(|z| z * h).collect();
        (0..n)
            .map(|k| {
                self.e[k] * v[k]
                    + (self.e[k] * k1[k] + 2.0 * self.e2[k] * (k2[k] + k3[k]) + k4[k]) / 6.0
            })
            .collect()
    }

    /// One step of the field, returning the new field at `t + dt`.
    pub fn step_field(&self, f: &WaveField) -> Result<WaveField> {
        self.grid_matches(f)?;
        let v = fft_real(f.samples());
        let out = ifft_real(self.advance(&v));
        WaveField::new(self.grid, out, f.time() + self.dt)
    }

    fn grid_matches(&self, f: &WaveField) -> Result<()> {
        self.grid.check_same(f.grid())
    }
}

/// One exponential RK4 step without absorbing layer.
pub fn step(f: &WaveField, spec: &PdeSpec, dt: f64) -> Result<WaveField> {
    let ceiling = stability_ceiling(f.grid(), spec, f.sup_norm(), None);
    if dt > ceiling {
        return Err(Error::StepTooLarge { dt, ceiling });
    }
    Stepper::new(*f.grid(), *spec, dt, Integrator::Etdrk4, None)?.step_field(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub sup_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<WaveField>,
    pub log: Vec<ConservationRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &WaveField {
        self.snapshots.last().expect("trajectory holds the initial field")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    /// Largest relative mass drift over the log.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.log[0].mass;
        self.log
            .iter()
            .map(|r| relative(r.mass, m0))
            .fold(0.0, f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.log[0].energy;
        self.log
            .iter()
            .map(|r| relative(r.energy, e0))
            .fold(0.0, f64::max)
    }

    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "mass", "energy", "sup_norm"])?;
        for r in &self.log {
            w.write_record([
                r.t.to_string(),
                r.mass.to_string(),
                r.energy.to_string(),
                r.sup_norm.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Write `snap_00000.slab`, ... into `dir` (created if missing).
    pub fn write_snapshots(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, s) in self.snapshots.iter().enumerate() {
            save_snapshot(&dir.join(format!("snap_{i:05}.slab")), s)?;
        }
        let index = dir.join("times.csv");
        let mut f = fs::File::create(&index).map_err(|e| Error::io(&index, e))?;
        writeln!(f, "index,t").map_err(|e| Error::io(&index, e))?;
        for (i, s) in self.snapshots.iter().enumerate() {
            writeln!(f, "{i},{}", s.time()).map_err(|e| Error::io(&index, e))?;
        }
        Ok(())
    }
}

fn relative(x: f64, x0: f64) -> f64 {
    if x0 == 0.0 {
        x.abs()
    } else {
        ((x - x0) / x0).abs()
    }
}

fn record(spec: &PdeSpec, u: &WaveField) -> ConservationRecord {
    ConservationRecord {
        t: u.time(),
        mass: spec.mass(u),
        energy: spec.energy(u),
        sup_norm: u.sup_norm(),
    }
}

/// Number of steps from `t0` to `t_end`; the span must be a whole number of
/// steps up to round-off.
fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    let span = t_end - t0;
    if !(span.is_finite() && span >= 0.0) {
        return Err(Error::Config(format!(
            "t_end = {t_end} precedes the initial time {t0}"
        )));
    }
    let steps = (span / dt).round();
    if (steps * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::Config(format!(
            "span {span} is not a whole number of steps dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Integrate from `f0` (at its own time stamp) to `cfg.t_end`.
pub fn evolve(f0: &WaveField, spec: &PdeSpec, cfg: &EvolveConfig) -> Result<Trajectory> {
    spec.validate()?;
    if cfg.snapshot_stride == 0 {
        return Err(Error::Config("snapshot_stride must be positive".into()));
    }
    if !(cfg.blowup_factor > 1.0) {
        return Err(Error::Config("blowup_factor must exceed 1".into()));
    }
    let grid = *f0.grid();
    let sup0 = f0.sup_norm();
    let ceiling = stability_ceiling(&grid, spec, sup0, cfg.absorbing.as_ref());
    if cfg.dt > ceiling {
        return Err(Error::StepTooLarge {
            dt: cfg.dt,
            ceiling,
        });
    }
    let steps = step_count(f0.time(), cfg.t_end, cfg.dt)?;
    let stepper = Stepper::new(grid, *spec, cfg.dt, cfg.integrator, cfg.absorbing)?;
    let bound = cfg.blowup_factor * sup0;
    let check_mass = cfg.absorbing.is_none();

    let t0 = f0.time();
    let first = record(spec, f0);
    let mut traj = Trajectory {
        snapshots: vec![f0.clone()],
        log: vec![first],
    };
    let mut v = fft_real(f0.samples());
    let mut last_good = f0.clone();
    for k in 1..=steps {
        v = stepper.advance(&v);
        if k % cfg.snapshot_stride != 0 && k != steps {
            continue;
        }
        let t = t0 + k as f64 * cfg.dt;
        let samples = ifft_real(v.clone());
        let sup = samples.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !sup.is_finite() || sup > bound {
            return Err(Error::BlowUp {
                time: t,
                sup,
                bound,
                last_good: Box::new(last_good),
            });
        }
        let u = WaveField::new(grid, samples, t)?;
        let rec = record(spec, &u);
        if check_mass {
            let drift = relative(rec.mass, first.mass);
            if drift > cfg.conservation_tol {
                return Err(Error::ConservationBreach {
                    time: t,
                    drift,
                    tol: cfg.conservation_tol,
                    last_good: Box::new(last_good),
                });
            }
        }
        traj.log.push(rec);
        traj.snapshots.push(u.clone());
        last_good = u;
    }
    Ok(traj)
}
