use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use soliton_lab::evolve::{evolve, AbsorbingLayer, EvolveConfig, Integrator, PdeSpec, Trajectory};
use soliton_lab::experiments::{load_sweep, run_scenario, run_sweep, Fragment, RunOptions, Scenario};
use soliton_lab::lifting::{lift, verify_lift, LiftConfig};
use soliton_lab::modulation::{track, Family, TrackOptions};
use soliton_lab::profiles::{delta_shift, gardner_soliton, kdv_soliton, SolitonEnsemble, SolitonParams};
use soliton_lab::spectral::snapshot::{load_snapshot, save_snapshot};
use soliton_lab::spectral::{Grid1D, WaveField};
use soliton_lab::transform::{gardner_transform, miura_transform};

#[derive(Parser)]
#[command(name = "soliton-lab", version, about = "KdV/Gardner soliton experiments")]
struct Cli {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and snapshot outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "SOLITON_LAB_THREADS")]
    threads: Option<usize>,
    /// Also write `x y` column files for plotting.
    #[arg(long, global = true)]
    emit_plot_data: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a KdV (beta = 0) or Gardner soliton onto a grid.
    Profile(ProfileArgs),
    /// Apply the Gardner (or Miura) transform to a snapshot.
    Transform(TransformArgs),
    /// Invert the Gardner transform near a KdV soliton sum.
    Lift(LiftArgs),
    /// Evolve a snapshot under KdV (beta = 0) or Gardner.
    Evolve(EvolveArgs),
    /// Fit solitons along a directory of snapshots written by `evolve`.
    Track(TrackArgs),
    /// Scenario files.
    Scenario {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Sweep files: a scenario plus `sweep_axis` and `sweep_values`.
    Sweep {
        #[command(subcommand)]
        action: RunAction,
    },
}

#[derive(Subcommand)]
enum RunAction {
    Run { file: PathBuf },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 1024)]
    n_points: usize,
    #[arg(long, default_value_t = 200.0)]
    length: f64,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Output snapshot.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    input: PathBuf,
    #[arg(long)]
    beta: Option<f64>,
    /// Use the Miura map instead of the Gardner transform.
    #[arg(long, conflicts_with = "beta")]
    miura: bool,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Soliton speeds, increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    speeds: Vec<f64>,
    /// Soliton centers, increasing.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    centers: Vec<f64>,
    #[arg(long, default_value_t = 20.0)]
    separation: f64,
}

#[derive(Args)]
struct LiftArgs {
    /// KdV datum near the soliton sum.
    input: PathBuf,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    beta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Etdrk4,
    IfRk4,
}

#[derive(Args)]
struct EvolveArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 100)]
    stride: usize,
    #[arg(long, value_enum, default_value = "etdrk4")]
    integrator: IntegratorArg,
    #[arg(long, default_value_t = 1e-6)]
    conservation_tol: f64,
    /// Width of a damping layer at the left edge; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    absorbing_width: f64,
    #[arg(long, default_value_t = 10.0)]
    absorbing_strength: f64,
}

#[derive(Args)]
struct TrackArgs {
    /// Directory holding `times.csv` and `snap_*.slab`.
    snapshots: PathBuf,
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_xy(path: &Path, f: &WaveField) -> Result<()> {
    let mut text = String::new();
    for (x, y) in f.grid().points().iter().zip(f.samples()) {
        text.push_str(&format!("{x} {y}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn save(cli: &Cli, path: &Path, f: &WaveField) -> Result<()> {
    save_snapshot(path, f)?;
    if cli.emit_plot_data {
        write_xy(&path.with_extension("dat"), f)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_profile(cli: &Cli, a: &ProfileArgs) -> Result<()> {
    let grid = Grid1D::new(a.grid.n_points, a.grid.length)?;
    let p = SolitonParams::new(a.c, a.x0, a.beta)?;
    let f = if a.beta > 0.0 { gardner_soliton(&p, &grid)? } else { kdv_soliton(&p, &grid)? };
    println!("amplitude {}", p.amplitude());
    if a.beta > 0.0 {
        println!("delta {}", delta_shift(a.c, a.beta)?);
    }
    save(cli, &a.output, &f)
}

fn cmd_transform(cli: &Cli, a: &TransformArgs) -> Result<()> {
    let v = load_snapshot(&a.input)?;
    let u = match (a.miura, a.beta) {
        (true, _) => miura_transform(&v)?,
        (false, Some(beta)) => gardner_transform(&v, beta)?,
        (false, None) => bail!("give --beta or --miura"),
    };
    save(cli, &a.output, &u)
}

fn ensemble(a: &EnsembleArgs) -> Result<SolitonEnsemble> {
    Ok(SolitonEnsemble::kdv(&a.speeds, &a.centers, a.separation)?)
}

fn cmd_lift(cli: &Cli, a: &LiftArgs) -> Result<()> {
    let u0 = load_snapshot(&a.input)?;
    let e = ensemble(&a.ensemble)?;
    let res = lift(&u0, &e, &LiftConfig::with_beta(a.beta))?;
    let check = verify_lift(&res, &u0, a.beta)?;
    let dir = out_dir(cli)?;
    save(cli, &dir.join("v0.slab"), &res.v0)?;
    save(cli, &dir.join("w0.slab"), &res.w0)?;
    let path = dir.join("lift.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["distance_h1", "residual", "alpha", "k0", "trust_radius", "outer_iterations", "converged"])?;
    w.write_record([
        res.distance_h1.to_string(),
        check.to_string(),
        res.alpha.to_string(),
        res.k0.to_string(),
        res.trust_radius.to_string(),
        res.outer_iterations.to_string(),
        res.converged.to_string(),
    ])?;
    w.flush()?;
    println!("distance_h1 {} residual {check:e}", res.distance_h1);
    Ok(())
}

fn cmd_evolve(cli: &Cli, a: &EvolveArgs) -> Result<()> {
    let u0 = load_snapshot(&a.input)?;
    let spec = if a.beta > 0.0 { PdeSpec::gardner(a.beta) } else { PdeSpec::kdv() };
    let cfg = EvolveConfig {
        dt: a.dt,
        t_end: a.t_end,
        integrator: match a.integrator {
            IntegratorArg::Etdrk4 => Integrator::Etdrk4,
            IntegratorArg::IfRk4 => Integrator::IfRk4,
        },
        snapshot_stride: a.stride,
        conservation_tol: a.conservation_tol,
        absorbing: (a.absorbing_width > 0.0).then_some(AbsorbingLayer {
            width: a.absorbing_width,
            strength: a.absorbing_strength,
        }),
        ..EvolveConfig::default()
    };
    let traj = evolve(&u0, &spec, &cfg)?;
    let dir = out_dir(cli)?;
    traj.write_snapshots(&dir)?;
    traj.write_log_csv(&dir.join("conservation.csv"))?;
    if cli.emit_plot_data {
        write_xy(&dir.join("final.dat"), traj.last())?;
    }
    println!(
        "{} snapshots in {}; mass drift {:e}, energy drift {:e}",
        traj.snapshots.len(),
        dir.display(),
        traj.mass_drift(),
        traj.energy_drift()
    );
    Ok(())
}

fn read_snapshots(dir: &Path) -> Result<Trajectory> {
    let index = dir.join("times.csv");
    let mut r = csv::Reader::from_path(&index).with_context(|| format!("reading {}", index.display()))?;
    let mut snapshots = Vec::new();
    for row in r.records() {
        let row = row?;
        let i: usize = row.get(0).context("empty row in times.csv")?.parse()?;
        snapshots.push(load_snapshot(dir.join(format!("snap_{i:05}.slab")))?);
    }
    if snapshots.is_empty() {
        bail!("no snapshots listed in {}", index.display());
    }
    Ok(Trajectory {
        snapshots,
        log: Vec::new(),
    })
}

fn cmd_track(cli: &Cli, a: &TrackArgs) -> Result<()> {
    let traj = read_snapshots(&a.snapshots)?;
    let speeds = &a.ensemble.speeds;
    if a.ensemble.centers.len() != speeds.len() {
        bail!("{} centers for {} speeds", a.ensemble.centers.len(), speeds.len());
    }
    let family = if a.beta > 0.0 { Family::Gardner { beta: a.beta } } else { Family::Kdv };
    let opts = TrackOptions {
        family,
        reference_speeds: speeds.clone(),
        halfline_speed: Some(speeds[0]),
    };
    let guesses: Vec<(f64, f64)> = speeds.iter().copied().zip(a.ensemble.centers.iter().copied()).collect();
    let rec = track(&traj, &guesses, &opts)?;
    let path = out_dir(cli)?.join("track.csv");
    rec.write_csv(&path)?;
    println!(
        "tracked {} snapshots; sup d_frozen {:e}; wrote {}",
        rec.times.len(),
        rec.d_frozen.iter().copied().fold(0.0, f64::max),
        path.display()
    );
    Ok(())
}

fn print_fragment(f: &Fragment) {
    println!(
        "{} [{}] {} {} = {:e}",
        f.id,
        f.kind.name(),
        if f.pass { "PASS" } else { "FAIL" },
        f.primary,
        f.primary_value()
    );
    for (name, v) in &f.metrics {
        println!("  {name} = {v:e}");
    }
}

fn run_options(cli: &Cli) -> RunOptions {
    RunOptions {
        out_dir: cli.out_dir.clone(),
        emit_plot_data: cli.emit_plot_data,
    }
}

fn cmd_scenario(cli: &Cli, file: &Path) -> Result<bool> {
    let mut s = Scenario::load(file)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    let f = run_scenario(&s, &run_options(cli))?;
    print_fragment(&f);
    Ok(f.pass)
}

fn cmd_sweep(cli: &Cli, file: &Path) -> Result<bool> {
    let mut spec = load_sweep(file)?;
    if let Some(seed) = cli.seed {
        spec.template.seed = seed;
    }
    let report = run_sweep(&spec, &run_options(cli));
    for e in &report.entries {
        match (&e.fragment, &e.error) {
            (Some(f), _) => print_fragment(f),
            (None, Some(err)) => println!("{} = {}: ERROR {err}", report.axis, e.value),
            (None, None) => {}
        }
    }
    match (&report.regression, &report.regression_note) {
        (Some(r), _) => {
            println!(
                "regression [{}]: slope {:e}, intercept {:e}, R^2 {:.6}",
                r.model, r.fit.slope, r.fit.intercept, r.fit.r_squared
            );
            if let Some(g) = r.gamma {
                println!("  gamma {g:e}");
            }
        }
        (None, Some(note)) => println!("no regression: {note}"),
        (None, None) => {}
    }
    if let Some(dir) = &cli.out_dir {
        for p in report.write(&dir.join(&report.template_id))? {
            println!("wrote {}", p.display());
        }
    }
    Ok(report.all_passed())
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    match &cli.command {
        Command::Profile(a) => cmd_profile(cli, a).map(|_| true),
        Command::Transform(a) => cmd_transform(cli, a).map(|_| true),
        Command::Lift(a) => cmd_lift(cli, a).map(|_| true),
        Command::Evolve(a) => cmd_evolve(cli, a).map(|_| true),
        Command::Track(a) => cmd_track(cli, a).map(|_| true),
        Command::Scenario {
            action: RunAction::Run { file },
        } => cmd_scenario(cli, file),
        Command::Sweep {
            action: RunAction::Run { file },
        } => cmd_sweep(cli, file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        // Ran to completion but missed a tolerance.
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
