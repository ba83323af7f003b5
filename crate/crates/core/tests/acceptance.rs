//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs without the libtest harness so the lines always reach the output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use soliton_lab::evolve::{evolve, EvolveConfig, PdeSpec};
use soliton_lab::experiments::{run_scenario, run_sweep, Fragment, RunOptions, Scenario, SweepSpec};
use soliton_lab::lifting::{dense_resolve, linear_resolve_with_stats, LiftConfig};
use soliton_lab::perturbation::band_limited_noise;
use soliton_lab::profiles::{ensemble_field, profile, ShiftPolicy, SolitonEnsemble};
use soliton_lab::spectral::{norm_l2, Grid1D, WaveField};
use soliton_lab::stats::linear_fit;
use soliton_lab::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(name: &str) -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::load(&path).expect("golden scenario loads")
}

fn run(s: &Scenario) -> Result<Fragment> {
    run_scenario(s, &RunOptions::default())
}

fn m(f: &Fragment, name: &str) -> f64 {
    f.metric(name).unwrap_or(f64::NAN)
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn transform_identity() -> Result<Outcome> {
    let t0 = Instant::now();
    let f = run(&scenario("transform_identity.toml"))?;
    let (err, sh) = (m(&f, "max_sup_error"), m(&f, "max_sh_residual"));
    let el = t0.elapsed();
    Ok(Outcome {
        pass: err < 1e-9 && sh < 1e-12 && m(&f, "cases") == 9.0 && within(el, 1),
        detail: format!("max sup error {err:.2e} over 9 (c, beta) pairs, SH residual {sh:.2e}, {el:.2?}"),
    })
}

fn resolvent_oracle() -> Result<Outcome> {
    let t0 = Instant::now();
    let mut worst_diff = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    let mut cases = 0;
    for n in [128, 256, 512] {
        let grid = Grid1D::new(n, 100.0)?;
        for beta in [0.02, 0.05] {
            let s0 = ensemble_field(
                &SolitonEnsemble::kdv(&[1.0, 2.0], &[-15.0, 15.0], 30.0)?.to_gardner(beta, ShiftPolicy::Shifted)?,
                &grid,
            )?;
            for seed in 1..=2 {
                let f = band_limited_noise(&grid, 1.0, seed, n / 8)?;
                let fourier = linear_resolve_with_stats(&f, &s0, beta, &LiftConfig::with_beta(beta))?;
                let dense = dense_resolve(&f, &s0, beta)?;
                worst_diff = worst_diff.max(norm_l2(&fourier.w.minus(&dense)?));
                worst_ratio = worst_ratio.max(fourier.contraction_ratio);
                cases += 1;
            }
        }
    }
    let el = t0.elapsed();
    Ok(Outcome {
        pass: worst_diff < 1e-9 && worst_ratio < 0.5 && within(el, 10),
        detail: format!(
            "{cases} instances (n <= 512, beta <= 0.05): max L2 gap {worst_diff:.2e}, max contraction {worst_ratio:.3}, {el:.2?}"
        ),
    })
}

fn sweep(template: &Scenario, axis: &str, values: &[f64]) -> soliton_lab::experiments::SweepReport {
    run_sweep(
        &SweepSpec {
            template: template.clone(),
            axis: axis.into(),
            values: values.to_vec(),
        },
        &RunOptions::default(),
    )
}

fn lifting_bound() -> Result<Outcome> {
    let t0 = Instant::now();
    let base = scenario("lifting_bound.toml");
    let mut reports = Vec::new();
    for beta in [0.02, 0.08] {
        let mut s = base.clone();
        s.beta = beta;
        s.separation = 40.0;
        reports.push((format!("alpha@beta={beta}"), sweep(&s, "alpha", &[1e-4, 3e-4, 1e-3, 3e-3])));
        s.alpha = 0.0;
        reports.push((format!("L@beta={beta}"), sweep(&s, "separation", &[20.0, 30.0, 40.0])));
    }
    let mut s = base.clone();
    s.alpha = 1e-3;
    reports.push(("beta".into(), sweep(&s, "beta", &[0.02, 0.04, 0.06, 0.08])));

    let mut pass = true;
    let mut parts = Vec::new();
    let mut worst_residual = 0.0_f64;
    for (name, r) in &reports {
        for e in &r.entries {
            match &e.fragment {
                Some(f) if m(f, "converged") == 1.0 => {
                    worst_residual = worst_residual.max(m(f, "residual"));
                    pass &= m(f, "residual") <= 1e-8;
                }
                _ => pass = false,
            }
        }
        match &r.regression {
            Some(g) => {
                pass &= g.fit.r_squared > 0.98;
                if let Some(gamma) = g.gamma {
                    pass &= gamma > 0.0;
                    parts.push(format!("{name}: gamma {gamma:.3} R2 {:.4}", g.fit.r_squared));
                } else {
                    parts.push(format!("{name}: slope {:.3e} R2 {:.4}", g.fit.slope, g.fit.r_squared));
                }
            }
            None => {
                pass = false;
                parts.push(format!("{name}: no fit"));
            }
        }
    }
    let el = t0.elapsed();
    Ok(Outcome {
        pass: pass && within(el, 120),
        detail: format!("{}; max lift residual {worst_residual:.2e}, {el:.2?}", parts.join("; ")),
    })
}

fn translate_error(beta: f64, dt: f64) -> Result<(f64, f64, f64)> {
    let grid = Grid1D::new(1024, 100.0)?;
    let u0 = WaveField::from_fn(grid, |x| profile(1.0, beta, x + 5.0))?;
    let exact = WaveField::from_fn(grid, |x| profile(1.0, beta, x - 5.0))?;
    let spec = if beta > 0.0 { PdeSpec::gardner(beta) } else { PdeSpec::kdv() };
    let cfg = EvolveConfig {
        dt,
        t_end: 10.0,
        snapshot_stride: 1000,
        ..EvolveConfig::default()
    };
    let traj = evolve(&u0, &spec, &cfg)?;
    Ok((norm_l2(&traj.last().minus(&exact)?), traj.mass_drift(), traj.energy_drift()))
}

fn solver_accuracy() -> Result<Outcome> {
    let t0 = Instant::now();
    let (kdv_err, kdv_mass, kdv_energy) = translate_error(0.0, 1e-3)?;
    let (g_err, g_mass, _) = translate_error(0.1, 1e-3)?;
    let (coarse, _, _) = translate_error(0.0, 0.02)?;
    let (fine, _, _) = translate_error(0.0, 0.01)?;
    let order = coarse / fine;
    let el = t0.elapsed();
    Ok(Outcome {
        pass: kdv_err < 1e-4
            && g_err < 1e-4
            && kdv_mass < 1e-8
            && g_mass < 1e-8
            && kdv_energy < 1e-6
            && (12.8..=19.2).contains(&order)
            && within(el, 60),
        detail: format!(
            "translate error KdV {kdv_err:.2e}, Gardner {g_err:.2e}; mass drift {:.2e}; KdV energy drift {kdv_energy:.2e}; dt-halving ratio {order:.2}, {el:.2?}",
            kdv_mass.max(g_mass)
        ),
    })
}

fn intertwining() -> Result<Outcome> {
    let t0 = Instant::now();
    let f = run(&scenario("intertwining.toml"))?;
    let d = m(&f, "discrepancy");
    let el = t0.elapsed();
    Ok(Outcome {
        pass: d < 1e-6 && within(el, 60),
        detail: format!("||M[v(5)] - u(5)|| = {d:.2e}, {el:.2?}"),
    })
}

/// Criteria 6 and 7 share the same runs: alpha in {1e-3, 3e-3, 1e-2},
/// seeds 1..=3, t in [0, 80], stability distances over [0, 50].
fn stability_runs() -> Result<(Vec<(u64, f64, Fragment)>, Duration)> {
    let t0 = Instant::now();
    let base = scenario("asymptotic_halfline.toml");
    let mut out = Vec::new();
    for seed in 1..=3 {
        for alpha in [1e-3, 3e-3, 1e-2] {
            let mut s = base.clone();
            s.seed = seed;
            s.alpha = alpha;
            out.push((seed, alpha, run(&s)?));
        }
    }
    Ok((out, t0.elapsed()))
}

fn l2_stability(runs: &[(u64, f64, Fragment)], el: Duration) -> Result<Outcome> {
    let mut slopes = Vec::new();
    let mut pass = true;
    let mut r2_min = 1.0_f64;
    for seed in 1..=3 {
        let pts: Vec<(f64, f64)> = runs
            .iter()
            .filter(|r| r.0 == seed)
            .map(|r| (r.1, m(&r.2, "sup_d_frozen")))
            .collect();
        let fit = linear_fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>())?;
        // The bound's shape: sup distance affine in alpha.
        pass &= fit.r_squared > 0.98;
        r2_min = r2_min.min(fit.r_squared);
        slopes.push(fit.slope);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let spread = slopes.iter().map(|s| (s - mean).abs() / mean).fold(0.0, f64::max);
    pass &= spread <= 0.5;

    // Speed drift: linear in alpha for each seed; K is the envelope slope
    // over all runs (it depends on how each noise realization projects
    // onto the speeds, so it is not expected to agree across seeds).
    let mut k = 0.0_f64;
    let mut drift_r2 = 1.0_f64;
    for seed in 1..=3 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = runs
            .iter()
            .filter(|r| r.0 == seed)
            .map(|r| (r.1, m(&r.2, "speed_drift")))
            .unzip();
        let fit = linear_fit(&xs, &ys)?;
        drift_r2 = drift_r2.min(fit.r_squared);
        pass &= fit.slope > 0.0;
        k = xs.iter().zip(&ys).map(|(x, y)| y / x).fold(k, f64::max);
    }
    pass &= k.is_finite() && drift_r2 > 0.98;
    Ok(Outcome {
        pass: pass && within(el, 300),
        detail: format!(
            "A0 per seed {:.3}/{:.3}/{:.3} (spread {:.1}%, min R2 {r2_min:.4}); speed drift <= K alpha with K {k:.3} (min per-seed R2 {drift_r2:.4}), {el:.2?}",
            slopes[0],
            slopes[1],
            slopes[2],
            100.0 * spread,
        ),
    })
}

fn halfline(runs: &[(u64, f64, Fragment)]) -> Outcome {
    let worst_ratio = runs.iter().map(|r| m(&r.2, "halfline_ratio")).fold(0.0, f64::max);
    let worst_rank = runs.iter().map(|r| m(&r.2, "halfline_spearman")).fold(-1.0, f64::max);
    Outcome {
        pass: worst_ratio < 0.3 && worst_rank < -0.8,
        detail: format!(
            "{} runs: max d_half(80)/d_half(5) {worst_ratio:.3}, max Spearman {worst_rank:.3}",
            runs.len()
        ),
    }
}

fn collision() -> Result<Outcome> {
    let t0 = Instant::now();
    let base = scenario("nsoliton_collision.toml");
    let mut pts = Vec::new();
    let mut pass = true;
    for alpha in [1e-3, 3e-3, 1e-2] {
        let mut s = base.clone();
        s.alpha = alpha;
        s.tolerance = Some(1.0);
        let f = run(&s)?;
        pts.push((alpha, m(&f, "sup_family_distance")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let fit = linear_fit(&xs, &ys)?;
    let ratios: Vec<f64> = pts.iter().map(|(a, d)| d / a).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), r| (l.min(*r), h.max(*r)));
    pass &= fit.r_squared > 0.98 && hi / lo < 1.5;

    let exact = run(&scenario("nsoliton_collision_exact.toml"))?;
    let (l2, shift) = (m(&exact, "final_l2_error"), m(&exact, "phase_shift_error"));
    pass &= l2 < 1e-3 && shift < 1e-6;
    let el = t0.elapsed();
    Ok(Outcome {
        pass: pass && within(el, 180),
        detail: format!(
            "sup family distance / alpha {:.3}/{:.3}/{:.3} (R2 {:.4}); unperturbed L2 error {l2:.2e}, phase shift error {shift:.2e}, {el:.2?}",
            ratios[0], ratios[1], ratios[2], fit.r_squared
        ),
    })
}

fn weinstein() -> Result<Outcome> {
    let t0 = Instant::now();
    let f = run(&scenario("weinstein_sweep.toml"))?;
    let (zero, k, min_d) = (m(&f, "beta_zero_error"), m(&f, "max_k"), m(&f, "min_derivative"));
    let el = t0.elapsed();
    Ok(Outcome {
        pass: zero < 1e-6 && min_d > 0.0 && k.is_finite() && within(el, 5),
        detail: format!("|d(1, 0) - 9| = {zero:.2e}, min derivative {min_d:.4}, fitted K {k:.2} for beta <= 0.1, {el:.2?}"),
    })
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap().flatten() {
        let p = entry.path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn determinism() -> Result<Outcome> {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir()?;
    let names = ["lifting_bound.toml", "intertwining.toml", "kdv_stability.toml", "weinstein_sweep.toml"];
    for round in ["a", "b"] {
        let opts = RunOptions {
            out_dir: Some(tmp.path().join(round)),
            emit_plot_data: false,
        };
        for name in names {
            run_scenario(&scenario(name), &opts)?;
        }
    }
    let a = csv_files(&tmp.path().join("a"));
    let b = csv_files(&tmp.path().join("b"));
    let mut identical = a.len() == b.len() && !a.is_empty();
    for (x, y) in a.iter().zip(&b) {
        identical &= fs::read(x)? == fs::read(y)?;
    }
    let el = t0.elapsed();
    Ok(Outcome {
        pass: identical,
        detail: format!("{} CSV files from {} scenarios compared bytewise across two runs, {el:.2?}", a.len(), names.len()),
    })
}

fn report(n: u32, outcome: Result<Outcome>) -> bool {
    match outcome {
        Ok(o) => {
            println!("criterion {n}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("criterion {n}: FAIL error: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes arguments through; run everything
    // unless asked to list tests.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let mut ok = true;
    ok &= report(1, transform_identity());
    ok &= report(2, resolvent_oracle());
    ok &= report(3, lifting_bound());
    ok &= report(4, solver_accuracy());
    ok &= report(5, intertwining());
    match stability_runs() {
        Ok((runs, el)) => {
            ok &= report(6, l2_stability(&runs, el));
            ok &= report(7, Ok(halfline(&runs)));
        }
        Err(e) => {
            report(6, Err(e));
            println!("criterion 7: FAIL shares the runs of criterion 6");
            ok = false;
        }
    }
    ok &= report(8, collision());
    ok &= report(9, weinstein());
    ok &= report(10, determinism());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
