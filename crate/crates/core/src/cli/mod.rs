//! The `sepdyn` experiment runner.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! failure, 4 blow-up detected in a variational run. Failed and blown-up runs
//! still write the partial trajectory.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

pub use config::{compatible, load, Experiment, ExperimentConfig, Integrator, Output, Plan};
pub use run::{execute, RunOutcome, RunStatus, DIAGNOSTICS_FILE, TRAJECTORY_FILE};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Io(String),
    Config(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "sepdyn", version, about = "Separable and unrestricted Schrödinger dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one config file, or every *.json file in a directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replace a config value, e.g. `--override dt=0.01` or `--override initial_state.0.1=0.5`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Worker threads when `--config` is a directory.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Show experiments, integrators and which combinations are valid.
    List {
        #[arg(long)]
        json: bool,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Command::List { json } => {
            if json {
                println!("{}", serde_json::to_string_pretty(&listing_json()).expect("serializable"));
            } else {
                print!("{}", listing_text());
            }
            0
        }
        Command::Run { config, overrides, jobs } => {
            if config.is_dir() {
                run_directory(&config, &overrides, jobs.max(1))
            } else {
                run_one(&config, &overrides)
            }
        }
    }
}

/// Load, validate, execute and report a single config.
pub fn run_one(path: &Path, overrides: &[String]) -> i32 {
    let start = Instant::now();
    let result = load(path, overrides).and_then(|cfg| cfg.plan().map_err(CliError::Config)).and_then(|plan| {
        let out = execute(&plan)?;
        Ok((plan, out))
    });
    match result {
        Ok((plan, out)) => {
            let norms: Vec<String> = out.final_norms.iter().map(|n| format!("{n:.6}")).collect();
            let status = match &out.status {
                RunStatus::Completed => "completed".to_string(),
                RunStatus::BlowUp { step, time } => format!("blow-up at step {step} (t = {time})"),
                RunStatus::SolverFailed { step, time, message } => {
                    format!("solver failed at step {step} (t = {time}): {message}")
                }
            };
            println!(
                "{}: {}/{} {} steps, final norms [{}], {}, {:.3} s",
                path.display(),
                plan.config.experiment.name(),
                plan.config.integrator.name(),
                out.rows - 1,
                norms.join(", "),
                status,
                start.elapsed().as_secs_f64()
            );
            out.status.exit_code()
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            e.exit_code()
        }
    }
}

fn run_directory(dir: &Path, overrides: &[String], jobs: usize) -> i32 {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("{}: {e}", dir.display());
            return 1;
        }
    };
    files.sort();
    if files.is_empty() {
        eprintln!("{}: no *.json configs found", dir.display());
        return 2;
    }
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(files.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(f) = files.get(i) else { break };
                let code = run_one(f, overrides);
                let mut w = worst.lock().expect("not poisoned");
                *w = (*w).max(code);
            });
        }
    });
    worst.into_inner().expect("not poisoned")
}

fn listing_json() -> serde_json::Value {
    let experiments: Vec<_> = Experiment::ALL
        .iter()
        .map(|&e| {
            let mut required = vec![];
            if e == Experiment::Ladder {
                required.push("r_party");
            }
            let optional: &[&str] = match e {
                Experiment::Random5 => &["seed"],
                Experiment::Ladder => &["gellmann_projection"],
                Experiment::Swap => &[],
            };
            json!({
                "name": e.name(),
                "description": e.description(),
                "dims": e.dims(),
                "required_fields": required,
                "optional_fields": optional,
                "integrators": Integrator::ALL.iter().filter(|&&i| compatible(e, i)).map(|i| i.name()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let integrators: Vec<_> = Integrator::ALL
        .iter()
        .map(|&i| {
            json!({
                "name": i.name(),
                "required_fields": i.required_fields(),
                "optional_fields": i.optional_fields(),
            })
        })
        .collect();
    json!({
        "common_fields": ["experiment", "integrator", "dt", "t_final", "out_path"],
        "common_optional_fields": ["initial_state", "outputs"],
        "experiments": experiments,
        "integrators": integrators,
    })
}

fn listing_text() -> String {
    let mut s = String::from("experiment   ");
    for i in Integrator::ALL {
        s += &format!("{:>21}", i.name());
    }
    s.push('\n');
    for e in Experiment::ALL {
        s += &format!("{:<13}", e.name());
        for i in Integrator::ALL {
            s += &format!("{:>21}", if compatible(e, i) { "yes" } else { "-" });
        }
        s.push('\n');
    }
    s += "\nrequired: experiment, integrator, dt, t_final, out_path\n";
    s += "optional: initial_state, outputs\n";
    s += "ladder: r_party (required), gellmann_projection\n";
    s += "random5: seed\n";
    s += "var_restrict_first, var_discretize_first: alpha\n";
    s += "bea_truncation: bea_order (required), bea_scheme, ode_tol\n";
    s
}
