//! Command-line driver for the spectral-numerics library.
//!
//! Subcommands wrap the library modules one-to-one and print JSON to
//! stdout; file artifacts (CSV tables, gnuplot `.dat` twins, run
//! manifests) are written next to the configured output stems.  All
//! numbers in JSON output are decimal strings with 17 significant digits,
//! matching the library's reporting convention.
//!
//! Exit codes: `0` success, `2` configuration or domain errors (including
//! command-line parse failures), `3` accuracy-certificate failures and
//! failed self-test gates.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use magspec::dynamics::{events_to_json, integrate_flow, self_intersections, FlowState, ModelField};
use magspec::harness::{
    dirac_gap_value, install_workers, json_number, run_sweep, selftest, write_outputs,
    SweepConfig, SweepQuantity,
};
use magspec::kernels::{model_kernel, radial_kernel, ModelParams};
use magspec::landau::{
    landau_levels, level_count, magnetic_weyl_density, weyl_density_diag, ModelScalars,
};
use magspec::regimes;
use magspec::{Error, Result};

#[derive(Parser)]
#[command(
    name = "magspec",
    version,
    about = "Spectral numerics for a two-dimensional magnetic Schrödinger model",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Landau levels and spectral densities of the constant model
    Levels(LevelsArgs),
    /// Pointwise values of the model spectral-projector kernel
    Kernel(KernelArgs),
    /// Singular pair-energy functional against its non-magnetic reference
    Dirac(DiracArgs),
    /// Classical cyclotron trajectory: drift and self-intersections
    Flow(FlowArgs),
    /// Grid sweep driven by a key=value configuration file
    Sweep(SweepArgs),
    /// Threshold scales and remainder estimates for one (mu, h) pair
    Regimes(RegimesArgs),
    /// Cross-module consistency battery with a CSV report
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct LevelsArgs {
    /// Magnetic coupling mu
    #[arg(long)]
    mu: f64,
    /// Semiclassical parameter h
    #[arg(long)]
    h: f64,
    /// Electric potential value V
    #[arg(long = "V", default_value_t = 1.0)]
    v: f64,
    /// Magnetic intensity factor f
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    /// Metric volume factor sqrt(g)
    #[arg(long = "sqrt-g", default_value_t = 1.0)]
    sqrt_g: f64,
    /// Spectral parameter tau
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
}

#[derive(Args)]
struct KernelArgs {
    /// Magnetic coupling mu
    #[arg(long)]
    mu: f64,
    /// Semiclassical parameter h
    #[arg(long)]
    h: f64,
    /// Model potential value W
    #[arg(long = "W", default_value_t = 1.0)]
    w: f64,
    /// Linear tilt v of the model potential
    #[arg(long, default_value_t = 0.0)]
    v: f64,
    /// First coordinate of x
    #[arg(long, default_value_t = 0.0)]
    x1: f64,
    /// Second coordinate of x
    #[arg(long, default_value_t = 0.0)]
    x2: f64,
    /// First coordinate of y
    #[arg(long, default_value_t = 0.0)]
    y1: f64,
    /// Second coordinate of y
    #[arg(long, default_value_t = 0.0)]
    y2: f64,
}

#[derive(Args)]
struct DiracArgs {
    /// Magnetic coupling mu
    #[arg(long)]
    mu: f64,
    /// Semiclassical parameter h
    #[arg(long)]
    h: f64,
    /// Model potential value W
    #[arg(long = "W", default_value_t = 1.0)]
    w: f64,
    /// Weight-singularity exponent kappa in (0, 2)
    #[arg(long, default_value_t = 0.5)]
    kappa: f64,
    /// Support radius of the localisation pair
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Far-zone Gauss-Legendre order (auto-raised when under-resolving)
    #[arg(long, default_value_t = 32)]
    outer_order: usize,
    /// tanh-sinh order of the singular radial direction
    #[arg(long, default_value_t = 64)]
    radial_order: usize,
    /// Angular Gauss-Legendre order of the polar patch
    #[arg(long, default_value_t = 16)]
    angular_order: usize,
    /// Zone-split cap: gamma = min(split_cap*rho, 8*sqrt(h/mu))
    #[arg(long, default_value_t = 0.25)]
    split_cap: f64,
}

#[derive(Args)]
struct FlowArgs {
    /// Magnetic coupling mu
    #[arg(long)]
    mu: f64,
    /// Potential value at the origin
    #[arg(long, default_value_t = 1.0)]
    v0: f64,
    /// Potential slope along the second axis
    #[arg(long, default_value_t = 0.2)]
    slope: f64,
    /// Completed windings to integrate (default: round(mu/2))
    #[arg(long)]
    windings: Option<usize>,
    /// Integration tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the trajectory CSV here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the self-intersection events JSON here
    #[arg(long)]
    events_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Path of the key=value sweep configuration
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct RegimesArgs {
    /// Magnetic coupling mu
    #[arg(long)]
    mu: f64,
    /// Semiclassical parameter h
    #[arg(long)]
    h: f64,
    /// Perturbation order m (2 or 3)
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Weight-singularity exponent kappa of the remainder estimate
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Time-scale margin exponent delta
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
}

#[derive(Args)]
struct SelftestArgs {
    /// Seed for the randomised checks
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output stem for the CSV report and manifest
    #[arg(long, default_value = "magspec_selftest")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Levels(a) => cmd_levels(&a),
        Command::Kernel(a) => cmd_kernel(&a),
        Command::Dirac(a) => cmd_dirac(&a),
        Command::Flow(a) => cmd_flow(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Regimes(a) => cmd_regimes(&a),
        Command::Selftest(a) => cmd_selftest(&a),
    }
}

fn print_json(doc: &serde_json::Value) -> Result<()> {
    use std::io::Write as _;
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| Error::Config(format!("JSON rendering failed: {e}")))?;
    // A consumer closing the pipe early (e.g. `magspec ... | head`) is not
    // an error worth reporting.
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(Error::from),
    }
}

fn cmd_levels(a: &LevelsArgs) -> Result<i32> {
    let s = ModelScalars::new(a.mu, a.h, a.f, a.v, a.sqrt_g, a.tau)?;
    let n = level_count(&s);
    let levels = if n > 0 {
        landau_levels(&s, n - 1)?
    } else {
        Vec::new()
    };
    print_json(&json!({
        "mu": json_number(s.mu),
        "h": json_number(s.h),
        "f": json_number(s.f),
        "V": json_number(s.v),
        "sqrt_g": json_number(s.sqrt_g),
        "tau": json_number(s.tau),
        "level_count": n.to_string(),
        "magnetic_weyl_density": json_number(magnetic_weyl_density(&s)),
        "weyl_density_diag": json_number(weyl_density_diag(&s)),
        "levels": levels.iter().map(|&l| json_number(l)).collect::<Vec<_>>(),
    }))?;
    Ok(0)
}

fn cmd_kernel(a: &KernelArgs) -> Result<i32> {
    let x = [a.x1, a.x2];
    let y = [a.y1, a.y2];
    let probe = ModelParams::new(a.mu, a.h, a.w, a.v, 1)?;
    let n_max = probe.suggest_n_max(a.x2.abs().max(a.y2.abs()));
    let p = ModelParams::new(a.mu, a.h, a.w, a.v, n_max)?;
    let value = model_kernel(&p, x, y)?;
    let s = (x[0] - y[0]).hypot(x[1] - y[1]);
    let radial = if a.v == 0.0 {
        json_number(radial_kernel(&p, s)?)
    } else {
        serde_json::Value::Null
    };
    print_json(&json!({
        "mu": json_number(a.mu),
        "h": json_number(a.h),
        "W": json_number(a.w),
        "v": json_number(a.v),
        "x": [json_number(x[0]), json_number(x[1])],
        "y": [json_number(y[0]), json_number(y[1])],
        "n_max": n_max.to_string(),
        "value_re": json_number(value.re),
        "value_im": json_number(value.im),
        "modulus": json_number(value.norm()),
        "separation": json_number(s),
        "radial_profile": radial,
    }))?;
    Ok(0)
}

fn cmd_dirac(a: &DiracArgs) -> Result<i32> {
    let mut cfg = SweepConfig::new(
        SweepQuantity::DiracGap,
        vec![a.mu],
        vec![a.h],
        "unused",
    );
    cfg.kappa = a.kappa;
    cfg.w = a.w;
    cfg.cutoff_radius = a.rho;
    cfg.outer_order = a.outer_order;
    cfg.radial_order = a.radial_order;
    cfg.angular_order = a.angular_order;
    cfg.split_cap = a.split_cap;
    cfg.validate()?;
    install_workers()?;
    let row = dirac_gap_value(&cfg, a.mu, a.h)?;
    print_json(&json!({
        "mu": json_number(row.mu),
        "h": json_number(row.h),
        "W": json_number(a.w),
        "kappa": json_number(a.kappa),
        "rho": json_number(a.rho),
        "pair_energy": json_number(row.value_main),
        "weyl_reference": json_number(row.value_reference),
        "gap": json_number(row.gap),
        "rel_gap": json_number(row.rel_gap),
        "remainder_overlay": json_number(row.overlay),
        "note": row.note,
    }))?;
    Ok(0)
}

fn cmd_flow(a: &FlowArgs) -> Result<i32> {
    if !(a.v0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "v0 = {} must be positive for an on-shell launch",
            a.v0
        )));
    }
    let field = ModelField::euclidean_linear(a.mu, a.v0, [0.0, a.slope])?;
    let windings = a
        .windings
        .unwrap_or_else(|| (a.mu / 2.0).round().max(1.0) as usize)
        .max(1);
    let t_total = windings as f64 * 2.0 * std::f64::consts::PI / a.mu;
    let start = FlowState {
        x: [0.0, 0.0],
        xi: [a.v0.sqrt(), 0.0],
        t: 0.0,
    };
    let traj = integrate_flow(&field, &start, t_total, a.tol)?;
    let events = self_intersections(&traj)?;
    if let Some(path) = &a.out {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let file = std::fs::File::create(path)?;
        traj.write_csv(file)?;
    }
    if let Some(path) = &a.events_out {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let doc = serde_json::to_string_pretty(&events_to_json(&events))
            .map_err(|e| Error::Config(format!("JSON rendering failed: {e}")))?;
        std::fs::write(path, doc + "\n")?;
    }
    let dir = traj.drift_direction();
    print_json(&json!({
        "mu": json_number(a.mu),
        "v0": json_number(a.v0),
        "slope": json_number(a.slope),
        "windings": windings.to_string(),
        "states": traj.states.len().to_string(),
        "energy0": json_number(traj.energy0),
        "completed_windings": traj.windings().to_string(),
        "intersections": events.len().to_string(),
        "intersections_per_winding": json_number(events.len() as f64 / windings as f64),
        "drift_direction": [json_number(dir[0]), json_number(dir[1])],
        "trajectory_csv": a.out.as_ref().map(|p| p.display().to_string()),
        "events_json": a.events_out.as_ref().map(|p| p.display().to_string()),
    }))?;
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let cfg = SweepConfig::from_file(&a.config)?;
    let workers = install_workers()?;
    let t0 = Instant::now();
    let outcome = run_sweep(&cfg)?;
    let wall = t0.elapsed().as_secs_f64();
    let paths = write_outputs(&cfg, &outcome, wall)?;
    let failed = outcome.rows.iter().filter(|r| !r.is_ok()).count();
    print_json(&json!({
        "quantity": cfg.quantity.as_str(),
        "rows": outcome.rows.len().to_string(),
        "failed_cells": failed.to_string(),
        "workers": workers.to_string(),
        "wall_time_seconds": json_number(wall),
        "outputs": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    }))?;
    Ok(0)
}

fn regime_name(r: regimes::Regime) -> &'static str {
    match r {
        regimes::Regime::Weak => "weak",
        regimes::Regime::Intermediate => "intermediate",
        regimes::Regime::Strong => "strong",
    }
}

fn branch_name(b: regimes::BoundBranch) -> &'static str {
    match b {
        regimes::BoundBranch::WeakField => "weak_field",
        regimes::BoundBranch::IntermediateField => "intermediate_field",
        regimes::BoundBranch::NotStated => "not_stated",
    }
}

fn cmd_regimes(a: &RegimesArgs) -> Result<i32> {
    let report = regimes::report(a.mu, a.h, a.m, a.kappa, a.delta)?;
    let estimate = regimes::remainder_estimate(a.mu, a.h, a.kappa)?;
    print_json(&json!({
        "mu": json_number(report.mu),
        "h": json_number(report.h),
        "m": report.m.to_string(),
        "kappa": json_number(report.kappa),
        "delta": json_number(report.delta),
        "regime": regime_name(report.regime),
        "t_star": json_number(report.t_star),
        "t2_star": json_number(report.t2_star),
        "t3_star": json_number(report.t3_star),
        "t4_star": json_number(report.t4_star),
        "rho_bar": json_number(report.rho_bar),
        "applicable": branch_name(report.applicable),
        "remainder": {
            "branch": branch_name(estimate.branch),
            "value": estimate.value.map(json_number).unwrap_or(serde_json::Value::Null),
            "weak_field": json_number(estimate.weak_field),
            "intermediate_field": json_number(estimate.intermediate_field),
            "general": json_number(estimate.general),
        },
    }))?;
    Ok(0)
}

fn cmd_selftest(a: &SelftestArgs) -> Result<i32> {
    let workers = install_workers()?;
    let t0 = Instant::now();
    let report = selftest(a.seed)?;
    let wall = t0.elapsed().as_secs_f64();
    if let Some(dir) = a.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let csv_path = a.out.with_extension("csv");
    std::fs::write(&csv_path, report.to_csv())?;
    let manifest_path = a.out.with_extension("manifest.json");
    let manifest = json!({
        "tool": "magspec",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "selftest",
        "seed": a.seed.to_string(),
        "workers": workers.to_string(),
        "wall_time_seconds": json_number(wall),
        "outputs": [csv_path.display().to_string()],
        "report": report.to_json(),
    });
    let rendered = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("JSON rendering failed: {e}")))?;
    std::fs::write(&manifest_path, rendered + "\n")?;
    let mut doc = report.to_json();
    doc["csv"] = json!(csv_path.display().to_string());
    doc["manifest"] = json!(manifest_path.display().to_string());
    print_json(&doc)?;
    Ok(if report.all_passed() { 0 } else { 3 })
}
