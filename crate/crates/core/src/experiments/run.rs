use std::fs;
use std::path::PathBuf;

use super::report::{Fragment, RunOptions};
use super::scenario::{Scenario, ScenarioKind};
use crate::error::{Error, Result};
use crate::evolve::{evolve, PdeSpec, Trajectory};
use crate::lifting::{lift, verify_lift, LiftConfig};
use crate::modulation::{fit_hirota_phases, least_squares, track, Family, TrackOptions, TrackRecord};
use crate::perturbation::{band_limited_noise, localized_noise};
use crate::profiles::{
    delta_shift, ensemble_field, gardner_soliton, hirota_asymptotic_offsets, kdv_soliton, hirota_n_soliton, profile, rho,
    weinstein_derivative, ShiftPolicy, SolitonParams,
};
use crate::spectral::snapshot::save_snapshot;
use crate::spectral::{norm_l2, Grid1D, WaveField};
use crate::stats::{linear_fit, spearman};
use crate::transform::gardner_transform;

/// Run one scenario. Errors carry the scenario id.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Fragment> {
    run_inner(s, opts).map_err(|e| e.in_scenario(&s.id))
}

fn run_inner(s: &Scenario, opts: &RunOptions) -> Result<Fragment> {
    s.validate()?;
    let out = Output::new(s, opts)?;
    let mut frag = match s.kind {
        ScenarioKind::TransformIdentity => transform_identity(s, &out)?,
        ScenarioKind::LiftingBound => lifting_bound(s, &out)?,
        ScenarioKind::KdvStability | ScenarioKind::GardnerH1Stability | ScenarioKind::AsymptoticHalfline => {
            stability(s, &out)?
        }
        ScenarioKind::NsolitonCollision => collision(s, &out)?,
        ScenarioKind::NegativeTime => negative_time(s, &out)?,
        ScenarioKind::WeinsteinSweep => weinstein(s, &out)?,
        ScenarioKind::Intertwining => intertwining(s, &out)?,
    };
    frag.push("tolerance", s.tolerance());
    frag.artifacts.extend(out.written.into_inner());
    if let Some(dir) = &out.dir {
        let path = dir.join("metrics.csv");
        frag.write_metrics_csv(&path)?;
        frag.artifacts.push(path);
    }
    Ok(frag)
}

/// Artifact sink for one scenario; a no-op without an output directory.
struct Output {
    dir: Option<PathBuf>,
    plot: bool,
    written: std::cell::RefCell<Vec<PathBuf>>,
}

impl Output {
    fn new(s: &Scenario, opts: &RunOptions) -> Result<Self> {
        let dir = match &opts.out_dir {
            Some(root) => {
                let d = root.join(&s.id);
                fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
                Some(d)
            }
            None => None,
        };
        Ok(Self {
            dir,
            plot: opts.emit_plot_data,
            written: Default::default(),
        })
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        let p = self.dir.as_ref()?.join(name);
        self.written.borrow_mut().push(p.clone());
        Some(p)
    }

    fn field(&self, name: &str, f: &WaveField) -> Result<()> {
        if let Some(p) = self.path(&format!("{name}.slab")) {
            save_snapshot(&p, f)?;
        }
        if self.plot {
            let xs = f.grid().points();
            self.xy(name, &xs, f.samples())?;
        }
        Ok(())
    }

    /// Whitespace-separated `x y` columns, written only with plot data on.
    fn xy(&self, name: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
        if !self.plot {
            return Ok(());
        }
        let Some(p) = self.path(&format!("{name}.dat")) else {
            return Ok(());
        };
        let mut text = String::with_capacity(xs.len() * 48);
        for (x, y) in xs.iter().zip(ys) {
            text.push_str(&format!("{x} {y}\n"));
        }
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let Some(p) = self.path(name) else {
            return Ok(());
        };
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush().map_err(|e| Error::io(&p, e))
    }

    fn trajectory(&self, traj: &Trajectory) -> Result<()> {
        if let Some(p) = self.path("conservation.csv") {
            traj.write_log_csv(&p)?;
        }
        self.field("initial", &traj.snapshots[0])?;
        self.field("final", traj.last())
    }

    fn track(&self, rec: &TrackRecord) -> Result<()> {
        if let Some(p) = self.path("track.csv") {
            rec.write_csv(&p)?;
        }
        self.xy("d_frozen", &rec.times, &rec.d_frozen)?;
        self.xy("d_fitted", &rec.times, &rec.d_fitted)
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn sup(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|v| !v.is_nan()).fold(0.0, f64::max)
}

/// Localized zero-mean perturbation of L2 size alpha around the given
/// centers.
fn perturbation(s: &Scenario, grid: &Grid1D, centers: &[f64]) -> Result<WaveField> {
    if s.alpha == 0.0 {
        return Ok(WaveField::zeros(*grid));
    }
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half_width = 0.5 * (hi - lo) + s.perturbation_margin;
    localized_noise(grid, s.alpha, s.seed, s.band(), 0.5 * (lo + hi), half_width)
}

fn transform_identity(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "max_sup_error");
    let grid = s.grid()?;
    let mut rows = Vec::new();
    for &beta in &s.betas {
        for &c in &s.speeds {
            let p = SolitonParams::new(c, 0.0, beta)?;
            let v = if beta > 0.0 { gardner_soliton(&p, &grid)? } else { kdv_soliton(&p, &grid)? };
            let mapped = gardner_transform(&v, beta)?;
            let delta = if beta > 0.0 { delta_shift(c, beta)? } else { 0.0 };
            let target = WaveField::from_fn(grid, |x| profile(c, 0.0, x - delta))?;
            let err = mapped.sup_distance(&target)?;
            let r = rho(c, beta);
            let arg = c.sqrt() * delta;
            let sh = (arg.cosh() - 1.0 / r)
                .abs()
                .max((arg.sinh() - 1.5 * (2.0 * beta * c).sqrt() / r).abs());
            rows.push(vec![c, beta, delta, err, sh]);
        }
    }
    out.csv("identity.csv", &["c", "beta", "delta", "sup_error", "sh_residual"], &rows)?;
    let max_err = sup(rows.iter().map(|r| r[3]));
    let max_sh = sup(rows.iter().map(|r| r[4]));
    frag.push("max_sup_error", max_err);
    frag.push("max_sh_residual", max_sh);
    frag.push("cases", rows.len() as f64);
    frag.pass = max_err < s.tolerance() && max_sh < 1e-12;
    Ok(frag)
}

fn lifting_bound(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "distance_h1");
    let grid = s.grid()?;
    let e = s.ensemble()?;
    let r0 = ensemble_field(&e, &grid)?;
    let z = band_limited_noise(&grid, s.alpha, s.seed, s.band())?;
    let u0 = r0.plus(&z)?;
    let res = lift(&u0, &e, &LiftConfig::with_beta(s.beta))?;
    let check = verify_lift(&res, &u0, s.beta)?;
    out.field("u0", &u0)?;
    out.field("v0", &res.v0)?;
    out.field("w0", &res.w0)?;
    for (name, v) in [
        ("distance_h1", res.distance_h1),
        ("residual", check),
        ("alpha", s.alpha),
        ("beta", s.beta),
        ("separation", s.separation),
        ("gamma0", e.gamma0()),
        ("k0", res.k0),
        ("trust_radius", res.trust_radius),
        ("outer_iterations", res.outer_iterations as f64),
        ("inner_iterations", res.inner_iterations as f64),
        ("max_contraction", res.max_contraction),
        ("converged", flag(res.converged)),
    ] {
        frag.push(name, v);
    }
    frag.pass = res.converged && check <= s.tolerance();
    Ok(frag)
}

/// Evolve a perturbed ensemble forward and track it. KdV solitons, or
/// Gardner solitons for the H1 kind.
fn stability(s: &Scenario, out: &Output) -> Result<Fragment> {
    let primary = match s.kind {
        ScenarioKind::GardnerH1Stability => "sup_d_h1",
        ScenarioKind::AsymptoticHalfline => "halfline_ratio",
        _ => "sup_d_frozen",
    };
    let mut frag = Fragment::new(&s.id, s.kind, primary);
    let grid = s.grid()?;
    let e = s.ensemble()?;
    let (family, spec, e) = if s.kind == ScenarioKind::GardnerH1Stability {
        (
            Family::Gardner { beta: s.beta },
            PdeSpec::gardner(s.beta),
            e.to_gardner(s.beta, ShiftPolicy::Raw)?,
        )
    } else {
        (Family::Kdv, PdeSpec::kdv(), e)
    };
    let centers = s.centers();
    let u0 = ensemble_field(&e, &grid)?
        .plus(&perturbation(s, &grid, &centers)?)?
        .with_time(s.t_start);
    let traj = evolve(&u0, &spec, &s.evolve_config(s.t_end))?;
    out.trajectory(&traj)?;
    let opts = TrackOptions {
        family,
        reference_speeds: s.speeds.clone(),
        halfline_speed: Some(s.speeds[0]),
    };
    let guesses: Vec<(f64, f64)> = s.speeds.iter().copied().zip(centers).collect();
    let rec = track(&traj, &guesses, &opts)?;
    out.track(&rec)?;

    let horizon = s.stability_horizon.unwrap_or(s.t_end) + 1e-9;
    let within = |series: &[f64]| sup(rec.times.iter().zip(series).filter(|(t, _)| **t <= horizon).map(|(_, v)| *v));
    let speed_drift: f64 = rec.final_speeds().iter().zip(&s.speeds).map(|(a, b)| (a - b).abs()).sum();
    frag.push("sup_d_frozen", within(&rec.d_frozen));
    frag.push("sup_d_fitted", within(&rec.d_fitted));
    frag.push("sup_d_h1", within(&rec.d_h1));
    frag.push("d_frozen_initial", rec.d_frozen[0]);
    frag.push("speed_drift", speed_drift);
    frag.push("mass_drift", traj.mass_drift());
    frag.push("energy_drift", traj.energy_drift());
    frag.push("alpha", s.alpha);
    match s.kind {
        ScenarioKind::GardnerH1Stability => {
            let vel = rec.velocities();
            let dev: Vec<f64> = vel
                .iter()
                .zip(&rec.speeds)
                .map(|(v, c)| v.iter().zip(c).map(|(a, b)| (a - b).abs()).sum())
                .collect();
            let sup_dev = within(&dev);
            frag.push("sup_velocity_deviation", sup_dev);
            frag.pass = frag.metric("sup_d_h1").unwrap_or(f64::NAN) <= s.tolerance();
        }
        ScenarioKind::AsymptoticHalfline => {
            let i0 = rec
                .times
                .iter()
                .position(|&t| t >= s.halfline_from - 1e-9)
                .ok_or_else(|| Error::Config("halfline_from lies beyond t_end".into()))?;
            let last = rec.times.len() - 1;
            if last <= i0 {
                return Err(Error::Config("fewer than two snapshots in the half-line window".into()));
            }
            let ratio = rec.d_halfline[last] / rec.d_halfline[i0];
            let rank = spearman(&rec.times[i0..], &rec.d_halfline[i0..])?;
            out.xy("d_halfline", &rec.times, &rec.d_halfline)?;
            frag.push("halfline_ratio", ratio);
            frag.push("halfline_spearman", rank);
            frag.push("halfline_initial", rec.d_halfline[i0]);
            frag.push("halfline_final", rec.d_halfline[last]);
            frag.pass = ratio < s.tolerance() && rank < s.spearman_max;
        }
        _ => frag.pass = frag.metric("sup_d_frozen").unwrap_or(f64::NAN) <= s.tolerance(),
    }
    Ok(frag)
}

/// Perturbed Hirota N-soliton from `t_start` through the collision to
/// `t_end`, measured against the whole N-soliton family at every snapshot.
fn collision(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "sup_family_distance");
    let grid = s.grid()?;
    let phases = s.centers();
    let speeds = &s.speeds;
    let (minus, plus) = hirota_asymptotic_offsets(speeds)?;
    let early: Vec<f64> = (0..speeds.len())
        .map(|j| phases[j] + speeds[j] * s.t_start + minus[j])
        .collect();
    let exact0 = hirota_n_soliton(speeds, &phases, &grid, s.t_start)?;
    let u0 = exact0.plus(&perturbation(s, &grid, &early)?)?.with_time(s.t_start);
    let traj = evolve(&u0, &PdeSpec::kdv(), &s.evolve_config(s.t_end))?;
    out.trajectory(&traj)?;

    let mut y = phases.clone();
    let mut rows = Vec::with_capacity(traj.snapshots.len());
    for u in &traj.snapshots {
        let (fit, d) = fit_hirota_phases(u, speeds, &y)?;
        let mut row = vec![u.time()];
        row.extend(&fit);
        row.push(d);
        rows.push(row);
        y = fit;
    }
    let mut header = vec!["t".to_string()];
    header.extend((1..=speeds.len()).map(|j| format!("y_{j}")));
    header.push("d_family".into());
    out.csv("family.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
    let dist: Vec<f64> = rows.iter().map(|r| *r.last().unwrap()).collect();
    out.xy("d_family", &traj.times(), &dist)?;
    let sup_d = sup(dist.iter().copied());
    frag.push("sup_family_distance", sup_d);
    frag.push("final_family_distance", *dist.last().unwrap());
    frag.push("alpha", s.alpha);

    // Per-soliton positions well before and after the collision; the
    // difference from free motion is the phase shift.
    let late: Vec<f64> = (0..speeds.len())
        .map(|j| phases[j] + speeds[j] * s.t_end + plus[j])
        .collect();
    let fit_at = |u: &WaveField, xs: &[f64]| -> Result<Vec<f64>> {
        let start: Vec<(f64, f64)> = speeds.iter().copied().zip(xs.iter().copied()).collect();
        Ok(least_squares(u, &start, &Family::Kdv, true)?
            .params
            .iter()
            .map(|p| p.1)
            .collect())
    };
    let x_early = fit_at(&traj.snapshots[0], &early)?;
    let x_late = fit_at(traj.last(), &late)?;
    let span = s.t_end - s.t_start;
    let shift_err = sup((0..speeds.len()).map(|j| {
        let moved = grid.wrap(x_late[j] - x_early[j] - speeds[j] * span);
        (moved - (plus[j] - minus[j])).abs()
    }));
    let exact = hirota_n_soliton(speeds, &phases, &grid, s.t_end)?;
    let l2_err = norm_l2(&traj.last().minus(&exact)?);
    frag.push("phase_shift_error", shift_err);
    frag.push("final_l2_error", l2_err);
    for (j, (p, m)) in plus.iter().zip(&minus).enumerate() {
        frag.push(&format!("phase_shift_{}", j + 1), p - m);
    }
    frag.pass = sup_d <= s.tolerance();
    if s.alpha == 0.0 {
        frag.pass &= l2_err < 1e-3 && shift_err < 1e-6;
    }
    Ok(frag)
}

/// Backward run via `w(t, x) = u(-t, -x)`, from `t = 0` back to the first
/// negative time at which two predicted centers come within the separation.
fn negative_time(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "sup_d_frozen");
    let grid = s.grid()?;
    let e = s.ensemble()?;
    let centers = s.centers();
    let speeds = &s.speeds;
    // Adjacent pair j, j+1 reaches distance L at t = -(gap - L)/(c_{j+1} - c_j).
    let interaction = (0..speeds.len().saturating_sub(1))
        .map(|j| -(centers[j + 1] - centers[j] - s.separation) / (speeds[j + 1] - speeds[j]))
        .fold(f64::NEG_INFINITY, f64::max);
    let horizon = if interaction.is_finite() { -interaction } else { s.t_end };
    let steps = (horizon / s.dt + 1e-9).floor();
    if steps < 1.0 {
        return Err(Error::Config(format!(
            "solitons interact at t = {interaction}; initial gaps must exceed the separation"
        )));
    }
    let u0 = ensemble_field(&e, &grid)?.plus(&perturbation(s, &grid, &centers)?)?;
    let w0 = u0.mirrored().with_time(0.0);
    let traj = evolve(&w0, &PdeSpec::kdv(), &s.evolve_config(steps * s.dt))?;
    out.trajectory(&traj)?;
    // In the mirrored frame the order of the solitons is reversed.
    let guesses: Vec<(f64, f64)> = speeds.iter().zip(&centers).rev().map(|(&c, &x)| (c, -x)).collect();
    let opts = TrackOptions {
        family: Family::Kdv,
        reference_speeds: guesses.iter().map(|g| g.0).collect(),
        halfline_speed: None,
    };
    let w_rec = track(&traj, &guesses, &opts)?;
    let rec = TrackRecord {
        times: w_rec.times.iter().map(|t| -t).collect(),
        positions: w_rec.positions.iter().map(|p| p.iter().rev().map(|x| -x).collect()).collect(),
        speeds: w_rec.speeds.iter().map(|c| c.iter().rev().copied().collect()).collect(),
        ..w_rec
    };
    out.track(&rec)?;
    let speed_drift: f64 = rec.final_speeds().iter().zip(speeds).map(|(a, b)| (a - b).abs()).sum();
    frag.push("sup_d_frozen", sup(rec.d_frozen.iter().copied()));
    frag.push("sup_d_fitted", sup(rec.d_fitted.iter().copied()));
    frag.push("interaction_time", interaction);
    frag.push("speed_drift", speed_drift);
    frag.push("alpha", s.alpha);
    frag.pass = frag.metric("sup_d_frozen").unwrap_or(f64::NAN) <= s.tolerance();
    Ok(frag)
}

fn weinstein(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "max_k");
    let mut rows = Vec::new();
    for &c in &s.speeds {
        let reference = 9.0 * c.sqrt();
        for &beta in &s.betas {
            let d = weinstein_derivative(c, beta, s.dc_factor * c)?;
            rows.push(vec![c, beta, d, d - reference]);
        }
    }
    out.csv("weinstein.csv", &["c", "beta", "derivative", "deviation"], &rows)?;
    let k = sup(rows.iter().filter(|r| r[1] > 0.0).map(|r| r[3].abs() / r[1]));
    let zero = rows.iter().filter(|r| r[1] == 0.0).map(|r| r[3].abs()).fold(f64::NAN, f64::max);
    let min_d = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    frag.push("max_k", k);
    frag.push("beta_zero_error", zero);
    frag.push("min_derivative", min_d);
    let positive: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] > 0.0).collect();
    if positive.len() >= 2 {
        let xs: Vec<f64> = positive.iter().map(|r| r[1]).collect();
        let ys: Vec<f64> = positive.iter().map(|r| r[3]).collect();
        let fit = linear_fit(&xs, &ys)?;
        frag.push("deviation_slope", fit.slope);
        frag.push("deviation_r_squared", fit.r_squared);
    }
    frag.pass = min_d > 0.0 && k.is_finite() && (zero.is_nan() || zero < s.tolerance());
    Ok(frag)
}

/// Evolve `v` under Gardner and `u` under KdV from `u0 = M_beta[v0]`, and
/// measure how far `M_beta[v(t)]` drifts from `u(t)`.
fn intertwining(s: &Scenario, out: &Output) -> Result<Fragment> {
    let mut frag = Fragment::new(&s.id, s.kind, "discrepancy");
    let grid = s.grid()?;
    let e = s.ensemble()?.to_gardner(s.beta, ShiftPolicy::Raw)?;
    let v0 = ensemble_field(&e, &grid)?
        .plus(&perturbation(s, &grid, &s.centers())?)?
        .with_time(s.t_start);
    let u0 = gardner_transform(&v0, s.beta)?;
    let cfg = s.evolve_config(s.t_end);
    let v = evolve(&v0, &PdeSpec::gardner(s.beta), &cfg)?;
    let u = evolve(&u0, &PdeSpec::kdv(), &cfg)?;
    let mut rows = Vec::with_capacity(v.snapshots.len());
    for (a, b) in v.snapshots.iter().zip(&u.snapshots) {
        rows.push(vec![a.time(), norm_l2(&gardner_transform(a, s.beta)?.minus(b)?)]);
    }
    out.csv("discrepancy.csv", &["t", "discrepancy"], &rows)?;
    out.field("v_final", v.last())?;
    out.field("u_final", u.last())?;
    let last = rows.last().map_or(f64::NAN, |r| r[1]);
    frag.push("discrepancy", last);
    frag.push("sup_discrepancy", sup(rows.iter().map(|r| r[1])));
    frag.push("gardner_mass_drift", v.mass_drift());
    frag.push("kdv_mass_drift", u.mass_drift());
    frag.pass = last < s.tolerance();
    Ok(frag)
}
