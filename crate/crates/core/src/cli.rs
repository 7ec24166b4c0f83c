//! Command-line driver.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure (including a failed limit check).

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::averaging::{AveragingConfig, AveragingTables};
use crate::config::{parse_interval, Mode, RunConfig};
use crate::diagnostics::{check_limit_t0, check_limit_tinf, l2_relative_errors, run_error_sweep, T0Report, TinfReport};
use crate::integrator::{integrate, integrate_with_reset, SolverStats, Trajectory};
use crate::io::{write_error_map, write_manifest, write_trajectory_pair};
use crate::model::{swing_spring_model, whitham_limit_rhs, ResonantQuadraticModel};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Higher-block max-norm treated as the onset of instability.
pub const INSTABILITY_THRESHOLD: f64 = 1e3;

#[derive(Debug, Parser)]
#[command(
    name = "phase-avg",
    version,
    about = "Higher-order phase averaging for oscillatory ODEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand, Clone, Copy)]
pub enum Command {
    /// Exact, p = 0 and higher-order trajectories.
    Simulate,
    /// Relative L2 error maps over a (p, T) grid.
    Sweep,
    /// Small- and large-window limit checks.
    Limits,
    /// Per-component L2 error of one averaged run against the exact run.
    Compare,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Polynomial degree.
    #[arg(long, global = true)]
    pub p: Option<usize>,
    /// Averaging window width (s).
    #[arg(long = "T", global = true)]
    pub window: Option<f64>,
    /// Reset interval (s), or `inf`.
    #[arg(long, global = true, value_parser = parse_interval)]
    pub reset_dt: Option<f64>,
    /// Final time (s).
    #[arg(long, global = true)]
    pub tf: Option<f64>,
    /// Relative solver tolerance.
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Absolute solver tolerance.
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    /// small-T, mid-T or reset-study.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Sweep worker threads, 0 for all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Sets the spring constant so that ω_Z / ω_R equals this value.
    #[arg(long, global = true)]
    pub freq_ratio: Option<f64>,
}

impl Overrides {
    /// Loads the file (or defaults) and applies flags on top.
    pub fn resolve(&self, mode: Mode) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        cfg.mode = mode;
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.p {
            cfg.averaging.p = v;
        }
        if let Some(v) = self.window {
            cfg.averaging.window = v;
        }
        if let Some(v) = self.reset_dt {
            cfg.reset_dt = v;
        }
        if let Some(v) = self.tf {
            cfg.tf = v;
        }
        if let Some(v) = self.rtol {
            cfg.solver.rtol = v;
        }
        if let Some(v) = self.atol {
            cfg.solver.atol = v;
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
        if let Some(v) = self.freq_ratio {
            cfg.model.freq_ratio = Some(v);
        }
        if let Some(name) = &self.preset {
            cfg.sweep.preset = Some(name.parse()?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Command {
    pub fn mode(self) -> Mode {
        match self {
            Command::Simulate => Mode::Simulate,
            Command::Sweep => Mode::Sweep,
            Command::Limits => Mode::Limits,
            Command::Compare => Mode::Compare,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Diagnostics go to stderr, reports to stdout.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = cli.overrides.resolve(cli.command.mode())?;
    match cfg.mode {
        Mode::Simulate => cmd_simulate(&cfg),
        Mode::Sweep => cmd_sweep(&cfg),
        Mode::Limits => cmd_limits(&cfg),
        Mode::Compare => cmd_compare(&cfg),
    }
}

fn setup(cfg: &RunConfig) -> Result<(ResonantQuadraticModel, Vec<Complex64>)> {
    fs::create_dir_all(&cfg.out)?;
    Ok((swing_spring_model(&cfg.params())?, cfg.initial_state()))
}

fn tables_for(model: &ResonantQuadraticModel, p: usize, window: f64) -> Result<AveragingTables> {
    AveragingTables::build_unchecked(AveragingConfig::new(p, window)?, &model.frequencies())
}

#[derive(Debug, Serialize)]
struct RunRecord {
    name: String,
    p: Option<usize>,
    window: Option<f64>,
    status: String,
    failure_time: Option<f64>,
    stats: Option<SolverStats>,
    mass_condition: Option<f64>,
    reset_times: Vec<f64>,
    higher_block_peak: Option<f64>,
    instability_onset: Option<f64>,
}

impl RunRecord {
    fn new(name: &str, p: Option<usize>, window: Option<f64>, outcome: &Result<Trajectory>) -> Self {
        let mut rec = Self {
            name: name.into(),
            p,
            window,
            status: "ok".into(),
            failure_time: None,
            stats: None,
            mass_condition: None,
            reset_times: Vec::new(),
            higher_block_peak: None,
            instability_onset: None,
        };
        match outcome {
            Ok(traj) => {
                rec.stats = Some(traj.stats);
                rec.reset_times = traj.reset_times.clone();
                if p.is_some_and(|p| p > 0) {
                    rec.higher_block_peak = Some(traj.higher_block_peak());
                    rec.instability_onset = traj.first_exceedance(INSTABILITY_THRESHOLD);
                }
            }
            Err(e) => {
                rec.status = e.to_string();
                rec.failure_time = match e {
                    Error::NonFiniteState { t, .. } | Error::StepSizeUnderflow { t, .. } => Some(*t),
                    _ => None,
                };
            }
        }
        rec
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a, R: Serialize> {
    program: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    results: R,
}

fn manifest<R: Serialize>(cfg: &RunConfig, results: R) -> Result<()> {
    let name = match cfg.mode {
        Mode::Simulate => "simulate",
        Mode::Sweep => "sweep",
        Mode::Limits => "limits",
        Mode::Compare => "compare",
    };
    write_manifest(
        &cfg.out.join(format!("{name}_manifest.json")),
        &Manifest {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            results,
        },
    )
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<i32> {
    let (model, y0) = setup(cfg)?;
    let (p, window) = (cfg.averaging.p, cfg.averaging.window);
    let back = |t: f64, v: &[Complex64]| model.back_transform(t, v);

    let exact = integrate(|t, y, dy| model.modulated_rhs(t, y, dy), &y0, cfg.tf, &cfg.solver);
    let base_tables = tables_for(&model, 0, window)?;
    let base = integrate_with_reset(&model, &base_tables, &y0, cfg.tf, cfg.reset_dt, &cfg.solver);
    let tables = tables_for(&model, p, window)?;
    if tables.is_ill_conditioned() {
        eprintln!(
            "warning: mass matrix condition number {:.3e} exceeds the cap at p = {p}, T = {window}",
            tables.mass_condition()
        );
    }
    let higher = integrate_with_reset(&model, &tables, &y0, cfg.tf, cfg.reset_dt, &cfg.solver);

    let runs = [
        ("exact", None, None, &exact),
        ("p0", Some(0), Some(window), &base),
        ("higher_order", Some(p), Some(window), &higher),
    ];
    let mut records = Vec::new();
    let mut failed = false;
    for (name, rp, rw, outcome) in runs {
        let mut rec = RunRecord::new(name, rp, rw, outcome);
        if name == "higher_order" {
            rec.mass_condition = Some(tables.mass_condition());
        }
        match outcome {
            Ok(traj) => {
                write_trajectory_pair(&cfg.out, name, traj, back)?;
                if let Some(onset) = rec.instability_onset {
                    println!("{name}: higher blocks exceed {INSTABILITY_THRESHOLD:e} at t = {onset} s");
                }
                println!("{name}: {} samples, {} steps accepted", traj.len(), traj.stats.accepted);
            }
            Err(e) => {
                println!("{name}: failed: {e}");
                failed = true;
            }
        }
        records.push(rec);
    }
    manifest(cfg, &records)?;
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let (model, y0) = setup(cfg)?;
    let mut summaries = Vec::new();
    for plan in cfg.sweep_plans() {
        let map = run_error_sweep(&model, &y0, &plan.spec)?;
        let path = cfg.out.join(format!("{}.csv", plan.name));
        write_error_map(&path, &map)?;
        let failed = map.cells.iter().filter(|c| c.status.is_failed()).count();
        println!(
            "{}: {} cells ({} failed), reset_dt = {} -> {}",
            plan.name,
            map.cells.len(),
            failed,
            plan.spec.reset_dt,
            path.display()
        );
        summaries.push(serde_json::json!({
            "name": plan.name,
            "file": format!("{}.csv", plan.name),
            "p_values": plan.spec.p_values,
            "T_values": plan.spec.windows,
            "reset_dt": if plan.spec.reset_dt.is_finite() {
                serde_json::json!(plan.spec.reset_dt)
            } else {
                serde_json::json!("inf")
            },
            "components": plan.components,
            "failed_cells": failed,
        }));
    }
    manifest(cfg, &summaries)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct LimitsResult {
    t0: Vec<(T0Report, bool)>,
    tinf: (TinfReport, bool),
}

pub fn cmd_limits(cfg: &RunConfig) -> Result<i32> {
    let params = cfg.params();
    if !params.is_resonant() {
        return Err(Error::RequiresResonance {
            freq_ratio: params.freq_ratio(),
        });
    }
    let (model, y0) = setup(cfg)?;
    let l = &cfg.limits;
    let mut all_pass = true;
    let mut t0 = Vec::new();
    for &p in &l.t0_degrees {
        let r = check_limit_t0(&model, &y0, p, l.t0_window, l.t0_horizon, &cfg.solver)?;
        let pass = r.passes(l.t0_tolerance);
        all_pass &= pass;
        println!(
            "{} small-window p={p} T={}: discrepancy {:.3e} (limit {:.1e}), sensitivity ratio {:.3}",
            verdict(pass),
            r.window,
            r.discrepancy,
            l.t0_tolerance,
            r.ratio
        );
        t0.push((r, pass));
    }
    let r = check_limit_tinf(
        &model,
        &y0,
        l.tinf_degree,
        l.tinf_window,
        l.tinf_horizon,
        &cfg.solver,
        |v, out| {
            let v3 = [v[0], v[1], v[2]];
            // Resonance was checked above.
            if let Ok(d) = whitham_limit_rhs(&v3, &params) {
                out.copy_from_slice(&d);
            }
        },
    )?;
    let pass = r.passes();
    all_pass &= pass;
    println!(
        "{} large-window p={} T={}: discrepancy {:.3e} (limit {:.3e}), higher blocks {:.1e}",
        verdict(pass),
        r.degree,
        r.window,
        r.discrepancy,
        r.threshold,
        r.higher_block_peak
    );
    manifest(cfg, &LimitsResult { t0, tinf: (r, pass) })?;
    Ok(if all_pass { EXIT_OK } else { EXIT_NUMERICAL })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<i32> {
    let (model, y0) = setup(cfg)?;
    let exact = integrate(|t, y, dy| model.modulated_rhs(t, y, dy), &y0, cfg.tf, &cfg.solver)?;
    let tables = tables_for(&model, cfg.averaging.p, cfg.averaging.window)?;
    let averaged = integrate_with_reset(&model, &tables, &y0, cfg.tf, cfg.reset_dt, &cfg.solver)?;
    let errors = l2_relative_errors(&averaged, &exact)?;
    for (name, e) in ["x", "y", "z"].iter().zip(&errors) {
        println!("err_{name} = {e:.6e}");
    }
    manifest(cfg, serde_json::json!({ "errors": errors, "stats": averaged.stats }))?;
    Ok(EXIT_OK)
}
