//! Command-line front end.
//!
//! Subcommands: `run` (one scenario → trajectory/step-trace/metrics files),
//! `compare` (two trajectory CSVs → difference report), `converge`
//! (fixed-step order study), `bench` (all three schemes on one scenario).
//!
//! Exit codes: 0 success, 1 diverged run, 2 configuration error, 3 IO error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::control::PiController;
use crate::dae::{DaeSystem, SystemState};
use crate::error::{Result, SolverError};
use crate::integrate::{simulate, simulate_fixed, SimOptions, SimulationOutput};
use crate::io::case::read_case;
use crate::io::compare::compare_trajectories;
use crate::io::config::{
    load_config, parse_scheme_name, ModelSelector, ScenarioConfig,
};
use crate::io::csv::{
    format_metrics, read_trajectory_csv, write_metrics, write_step_trace_csv,
    write_trajectory_csv,
};
use crate::io::study::{convergence_study, StudyTarget};
use crate::models::multimachine::build_multimachine;
use crate::models::scalar::build_scalar_linear;
use crate::models::smib::{build_smib, SmibParams};

#[derive(Parser)]
#[command(name = "daesim", about = "Semi-explicit index-1 DAE integrator", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ScenarioFlags {
    /// Scenario configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scheme: itm, pc-hold or pc-predict.
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Algebraic consistency threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Initial step size.
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory for trajectory.csv, steps.csv and metrics.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bypass the controller and step at this fixed size.
    #[arg(long)]
    fixed_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario and write its outputs.
    Run(ScenarioFlags),
    /// Compare two trajectory CSV files (candidate resampled onto the
    /// reference grid).
    Compare {
        reference: PathBuf,
        candidate: PathBuf,
    },
    /// Fixed-step convergence study on the scalar linear model.
    Converge {
        /// itm, pc-hold, pc-predict, hold-estimate or extrapolate-estimate.
        #[arg(long, default_value = "itm")]
        target: String,
        /// Comma-separated decreasing step sizes.
        #[arg(long, default_value = "0.02,0.01,0.005,0.0025")]
        h_list: String,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
    },
    /// Run all three schemes on one scenario and print a summary table.
    Bench(ScenarioFlags),
}

fn apply_flags(mut cfg: ScenarioConfig, flags: &ScenarioFlags) -> Result<ScenarioConfig> {
    if let Some(s) = &flags.solver {
        cfg.solver = parse_scheme_name(s)?;
    }
    if let Some(v) = flags.rtol {
        cfg.rtol = v;
    }
    if let Some(v) = flags.atol {
        cfg.atol = v;
    }
    if let Some(v) = flags.epsilon {
        cfg.epsilon = Some(v);
    }
    if let Some(v) = flags.h0 {
        cfg.h0 = v;
    }
    if let Some(v) = flags.h_min {
        cfg.h_min = v;
    }
    if let Some(v) = flags.h_max {
        cfg.h_max = v;
    }
    if let Some(v) = flags.t_end {
        cfg.t_end = v;
    }
    if let Some(dir) = &flags.out {
        cfg.out_dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_scenario(flags: &ScenarioFlags) -> Result<ScenarioConfig> {
    let cfg = match &flags.config {
        Some(path) => load_config(path)?,
        None => ScenarioConfig::default(),
    };
    apply_flags(cfg, flags)
}

fn build_model(cfg: &ScenarioConfig) -> Result<(Box<dyn DaeSystem + Send>, SystemState)> {
    match &cfg.model {
        ModelSelector::Smib => {
            let (sys, st) = build_smib(&SmibParams::default())?;
            Ok((Box::new(sys), st))
        }
        ModelSelector::Scalar { a, b, c, x0 } => {
            let (sys, st) = build_scalar_linear(*a, *b, *c, *x0)?;
            Ok((Box::new(sys), st))
        }
        ModelSelector::Case(path) => {
            let case = read_case(path)?;
            let (sys, st) = build_multimachine(&case)?;
            Ok((Box::new(sys), st))
        }
    }
}

fn execute_scenario(cfg: &ScenarioConfig, fixed_step: Option<f64>) -> Result<SimulationOutput> {
    let (mut sys, state) = build_model(cfg)?;
    match fixed_step {
        Some(h) => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(SolverError::Config(format!(
                    "--fixed-step must be positive, got {h}"
                )));
            }
            simulate_fixed(sys.as_mut(), state, &cfg.scheme(), h, cfg.t_end)
        }
        None => {
            let mut controller: PiController = cfg.controller();
            let opts = SimOptions {
                t_end: cfg.t_end,
                h_init: cfg.h0,
            };
            simulate(sys.as_mut(), state, &cfg.scheme(), &mut controller, &opts)
        }
    }
}

fn write_outputs(out: &SimulationOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| SolverError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    write_trajectory_csv(&out.trajectory, &dir.join("trajectory.csv"))?;
    write_step_trace_csv(&out.metrics, &dir.join("steps.csv"))?;
    write_metrics(&out.metrics, &dir.join("metrics.txt"))?;
    Ok(())
}

fn cmd_run(flags: &ScenarioFlags) -> Result<i32> {
    let cfg = load_scenario(flags)?;
    let out = execute_scenario(&cfg, flags.fixed_step)?;
    let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    write_outputs(&out, &dir)?;
    print!("{}", format_metrics(&out.metrics));
    println!("t_final={:.16e}", out.final_state.t);
    Ok(if out.metrics.diverged.is_some() { 1 } else { 0 })
}

fn cmd_compare(reference: &Path, candidate: &Path) -> Result<i32> {
    let reference = read_trajectory_csv(reference)?;
    let candidate = read_trajectory_csv(candidate)?;
    let report = compare_trajectories(&reference, &candidate)?;
    for (name, l2) in report.variables.iter().zip(&report.l2) {
        println!("l2.{name}={l2:.16e}");
    }
    println!("worst_variable={}", report.worst_variable());
    println!("worst_linf={:.16e}", report.worst_linf());
    println!("max_abs={:.16e}", report.max_abs);
    Ok(0)
}

fn cmd_converge(
    target: &str,
    h_list: &str,
    a: f64,
    b: f64,
    c: f64,
    x0: f64,
    t_end: f64,
) -> Result<i32> {
    let target = match target {
        "hold-estimate" => StudyTarget::HoldEstimate,
        "extrapolate-estimate" => StudyTarget::ExtrapolateEstimate,
        name => StudyTarget::Scheme(parse_scheme_name(name)?),
    };
    let hs: Vec<f64> = h_list
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| SolverError::Config(format!("bad step size '{tok}' in --h-list")))
        })
        .collect::<Result<_>>()?;
    let model = crate::models::scalar::ScalarLinearDae { a, b, c };
    let result = convergence_study(&model, x0, t_end, target, &hs)?;
    for (h, e) in result.hs.iter().zip(&result.errors) {
        println!("h={h:.16e} error={e:.16e}");
    }
    println!("slope={:.6}", result.slope);
    Ok(0)
}

fn cmd_bench(flags: &ScenarioFlags) -> Result<i32> {
    let base = load_scenario(flags)?;
    let variants: Vec<(&str, ScenarioConfig)> = ["itm", "pc-hold", "pc-predict"]
        .iter()
        .map(|name| {
            let mut cfg = base.clone();
            cfg.solver = parse_scheme_name(name).unwrap();
            (*name, cfg)
        })
        .collect();
    let fixed = flags.fixed_step;
    let handles: Vec<_> = variants
        .into_iter()
        .map(|(name, cfg)| {
            std::thread::spawn(move || (name, execute_scenario(&cfg, fixed)))
        })
        .collect();
    println!("solver nonlinear_calls accepted rejected diverged");
    let mut code = 0;
    for handle in handles {
        let (name, result) = handle.join().expect("bench worker panicked");
        let out = result?;
        let m = &out.metrics;
        println!(
            "{name} {} {} {} {}",
            m.nonlinear_calls,
            m.accepted_steps,
            m.rejected_steps,
            m.diverged.map(|d| d.as_str()).unwrap_or("no")
        );
        if let Some(dir) = &base.out_dir {
            write_outputs(&out, &dir.join(name))?;
        }
        if m.diverged.is_some() {
            code = 1;
        }
    }
    Ok(code)
}

fn exit_code_for(err: &SolverError) -> i32 {
    match err {
        SolverError::Io { .. } => 3,
        SolverError::Config(_)
        | SolverError::MalformedCase { .. }
        | SolverError::VariableMismatch(_) => 2,
        // solver-level failures on a configured run
        _ => 1,
    }
}

/// Parses `argv` (including the program name) and runs one command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(flags) => cmd_run(flags),
        Command::Compare {
            reference,
            candidate,
        } => cmd_compare(reference, candidate),
        Command::Converge {
            target,
            h_list,
            a,
            b,
            c,
            x0,
            t_end,
        } => cmd_converge(target, h_list, *a, *b, *c, *x0, *t_end),
        Command::Bench(flags) => cmd_bench(flags),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
