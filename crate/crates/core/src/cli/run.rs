//! Executing a plan and writing `trajectory.csv` / `diagnostics.json`.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::config::{Experiment, Integrator, Output, Plan, DEFAULT_ODE_TOL};
use super::CliError;
use crate::analysis::{overlap_series, purity_series, rate_of_change_nuclear};
use crate::bea::{rk_integrate, ModifiedRhs};
use crate::propagate::{grid, se_evolve, step, SplittingScheme, Trajectory};
use crate::state::{bloch_vector, gellmann_vector, ComponentState, FullState};
use crate::variational::{
    integrate_discretize_then_restrict, integrate_restrict_then_discretize, IntegrationOptions, TrajectoryStatus,
};
use crate::C64;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUp { step: usize, time: f64 },
    SolverFailed { step: usize, time: f64, message: String },
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::SolverFailed { .. } => 3,
            RunStatus::BlowUp { .. } => 4,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            RunStatus::Completed => json!({ "kind": "completed" }),
            RunStatus::BlowUp { step, time } => json!({ "kind": "blow_up", "step": step, "time": time }),
            RunStatus::SolverFailed { step, time, message } => {
                json!({ "kind": "solver_failed", "step": step, "time": time, "message": message })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Rows written to the trajectory file.
    pub rows: usize,
    pub final_norms: Vec<f64>,
}

enum States {
    Full(Vec<FullState>),
    Components(Vec<ComponentState>),
}

struct Record {
    states: States,
    status: RunStatus,
    solver: Value,
}

fn integrate(plan: &Plan) -> Result<Record, CliError> {
    let cfg = &plan.config;
    let (h, s0, dt, steps) = (&plan.hamiltonian, &plan.initial, cfg.dt, plan.steps);
    let solver_err = |e: crate::Error| CliError::Solver(e.to_string());
    Ok(match cfg.integrator {
        Integrator::SeExact => {
            let traj = se_evolve(h, &s0.tensor_product(), dt, steps).map_err(solver_err)?;
            Record {
                states: States::Full(traj.full_states.expect("se_evolve stores states")),
                status: RunStatus::Completed,
                solver: json!({ "method": "eigendecomposition" }),
            }
        }
        Integrator::LieTrotter | Integrator::Strang => {
            let scheme = if cfg.integrator == Integrator::Strang {
                SplittingScheme::Strang
            } else {
                SplittingScheme::LieTrotter
            };
            let mut states = vec![s0.clone()];
            let mut status = RunStatus::Completed;
            for j in 1..=steps {
                match step(scheme, h, &states[j - 1], dt) {
                    Ok(s) => states.push(s),
                    Err(e) => {
                        status = RunStatus::SolverFailed { step: j, time: j as f64 * dt, message: e.to_string() };
                        break;
                    }
                }
            }
            Record {
                states: States::Components(states),
                status,
                solver: json!({ "method": format!("{scheme:?}") }),
            }
        }
        Integrator::VarRestrictFirst | Integrator::VarDiscretizeFirst => {
            let opts = IntegrationOptions::default();
            let traj = if cfg.integrator == Integrator::VarRestrictFirst {
                integrate_restrict_then_discretize(h, plan.alpha, dt, steps, s0, &opts)
            } else {
                integrate_discretize_then_restrict(h, plan.alpha, dt, steps, s0, &opts)
            }
            .map_err(solver_err)?;
            let status = match &traj.status {
                TrajectoryStatus::Completed => RunStatus::Completed,
                TrajectoryStatus::BlowUp { step, time } => RunStatus::BlowUp { step: *step, time: *time },
                TrajectoryStatus::SolverFailed { step, time, message } => RunStatus::SolverFailed {
                    step: *step,
                    time: *time,
                    message: message.clone(),
                },
            };
            let solver = json!({
                "method": "newton",
                "alpha": plan.alpha,
                "newton_iterations_total": traj.iterations.iter().sum::<usize>(),
                "newton_iterations_max": traj.iterations.iter().copied().max().unwrap_or(0),
                "residual_max": traj.residuals.iter().copied().fold(0.0, f64::max),
                "blow_up_factor": opts.blow_up_factor,
            });
            Record {
                states: States::Components(traj.component_states().map_err(solver_err)?),
                status,
                solver,
            }
        }
        Integrator::BeaTruncation => {
            let order = cfg.bea_order.expect("validated");
            let scheme: SplittingScheme = cfg.bea_scheme.map(Into::into).unwrap_or(SplittingScheme::LieTrotter);
            let tol = cfg.ode_tol.unwrap_or(DEFAULT_ODE_TOL);
            let rhs = ModifiedRhs::new(scheme, order, dt).map_err(solver_err)?;
            let times = grid(dt, steps);
            match rk_integrate(&rhs, s0.part(0), s0.part(1), &times, tol) {
                Ok(sol) => Record {
                    states: States::Components(sol.component_states().map_err(solver_err)?),
                    status: RunStatus::Completed,
                    solver: json!({
                        "method": "dopri5",
                        "scheme": format!("{scheme:?}"),
                        "order": order,
                        "tol": tol,
                        "steps": sol.steps,
                        "rejected": sol.rejected,
                    }),
                },
                Err(e) => {
                    let t = match e {
                        crate::Error::StepSizeUnderflow { t, .. } => t,
                        _ => 0.0,
                    };
                    let j = ((t / dt).floor() as usize + 1).min(steps);
                    Record {
                        states: States::Components(vec![s0.clone()]),
                        status: RunStatus::SolverFailed { step: j, time: j as f64 * dt, message: e.to_string() },
                        solver: json!({ "method": "dopri5", "tol": tol }),
                    }
                }
            }
        }
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn norms_of(states: &States) -> Vec<Vec<f64>> {
    match states {
        States::Full(s) => s.iter().map(|p| vec![p.norm()]).collect(),
        States::Components(s) => s.iter().map(ComponentState::norms).collect(),
    }
}

/// Bloch coordinates of subsystem `k`; qutrits use the configured
/// Gell-Mann components.
fn bloch_column(full: &[FullState], k: usize, axis: usize, projection: [usize; 3]) -> Vec<f64> {
    full.iter()
        .map(|psi| {
            let n2 = psi.norm().powi(2);
            let rho = match psi.reduced_density(k) {
                Ok(r) => r.unscale(n2),
                Err(_) => return f64::NAN,
            };
            let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
            match rho.nrows() {
                2 => bloch_vector(&rho).map(|b| b[axis]).unwrap_or(f64::NAN),
                3 => gellmann_vector(&rho).map(|g| g[projection[axis] - 1]).unwrap_or(f64::NAN),
                _ => f64::NAN,
            }
        })
        .collect()
}

fn output_name(o: Output) -> String {
    match o {
        Output::Norm => "norm".into(),
        Output::AbsOverlap => "abs_overlap".into(),
        Output::RateNucl => "rate_nucl".into(),
        Output::Bloch(j, axis) => format!("bloch_{}{}", ["x", "y", "z"][axis], j + 1),
        Output::Purity(j) => format!("purity{}", j + 1),
    }
}

fn diagnostic_columns(plan: &Plan, times: &[f64], full: &[FullState]) -> Result<Vec<Vec<f64>>, CliError> {
    let cfg = &plan.config;
    let mut traj = Trajectory::new(times.to_vec());
    traj.full_states = Some(full.to_vec());
    let n = times.len();
    let mut cols = Vec::with_capacity(plan.outputs.len());
    for &o in &plan.outputs {
        let col = match o {
            Output::Norm => full.iter().map(FullState::norm).collect(),
            Output::AbsOverlap => {
                if n < 2 {
                    vec![1.0; n]
                } else {
                    let se = se_evolve(&plan.hamiltonian, &plan.initial.tensor_product(), cfg.dt, n - 1)
                        .map_err(|e| CliError::Solver(e.to_string()))?;
                    let mut se = se;
                    se.times = times.to_vec();
                    overlap_series(&se, &traj)
                        .map_err(|e| CliError::Solver(e.to_string()))?
                        .iter()
                        .map(|z| z.norm())
                        .collect()
                }
            }
            Output::RateNucl => {
                if n < 3 {
                    vec![f64::NAN; n]
                } else {
                    rate_of_change_nuclear(&traj, cfg.dt).map_err(|e| CliError::Solver(e.to_string()))?
                }
            }
            Output::Bloch(j, axis) => bloch_column(full, j, axis, plan.projection),
            Output::Purity(j) => purity_series(&traj, j).map_err(|e| CliError::Solver(e.to_string()))?,
        };
        cols.push(col);
    }
    Ok(cols)
}

fn write_csv(path: &Path, plan: &Plan, times: &[f64], states: &States, cols: &[Vec<f64>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["t".to_string()];
    match states {
        States::Full(s) => {
            for i in 0..s[0].amplitudes().len() {
                header.push(format!("re_psi_{i}"));
                header.push(format!("im_psi_{i}"));
            }
        }
        States::Components(s) => {
            for (j, part) in s[0].parts().iter().enumerate() {
                for i in 0..part.dim() {
                    header.push(format!("re_a{}_{i}", j + 1));
                    header.push(format!("im_a{}_{i}", j + 1));
                }
            }
        }
    }
    header.extend(plan.outputs.iter().map(|&o| output_name(o)));
    w.write_record(&header).map_err(io)?;
    for (r, &t) in times.iter().enumerate() {
        let mut row = vec![fmt(t)];
        let amps: Vec<C64> = match states {
            States::Full(s) => s[r].as_slice().to_vec(),
            States::Components(s) => s[r].stacked().iter().copied().collect(),
        };
        for z in amps {
            row.push(fmt(z.re));
            row.push(fmt(z.im));
        }
        row.extend(cols.iter().map(|c| fmt(c[r])));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn max_drift(series: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = series.clone();
    let first = match it.next() {
        Some(v) => v,
        None => return 0.0,
    };
    series.map(|v| (v - first).abs()).fold(0.0, f64::max)
}

/// Run a validated plan and write both output files into `out_path`.
pub fn execute(plan: &Plan) -> Result<RunOutcome, CliError> {
    let cfg = &plan.config;
    let record = integrate(plan)?;
    let full: Vec<FullState> = match &record.states {
        States::Full(s) => s.clone(),
        States::Components(s) => s.iter().map(ComponentState::tensor_product).collect(),
    };
    let rows = full.len();
    let times: Vec<f64> = (0..rows).map(|j| j as f64 * cfg.dt).collect();
    let cols = diagnostic_columns(plan, &times, &full)?;

    let norms = norms_of(&record.states);
    let width = norms[0].len();
    let max_dnorm = (0..width)
        .map(|k| max_drift(norms.iter().map(move |n| n[k])))
        .fold(0.0, f64::max);
    let max_dq = match (&record.states, cfg.experiment) {
        (States::Components(s), Experiment::Swap) => {
            let q: Vec<C64> = s.iter().map(|c| c.part(0).inner(c.part(1)).expect("equal dims")).collect();
            Some(q.iter().map(|z| (z - q[0]).norm()).fold(0.0, f64::max))
        }
        _ => None,
    };
    let final_norms = norms.last().cloned().unwrap_or_default();

    let out = &cfg.out_path;
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    write_csv(&out.join(TRAJECTORY_FILE), plan, &times, &record.states, &cols)?;

    let diagnostics = json!({
        "config": cfg,
        "status": record.status.to_json(),
        "summary": {
            "steps_requested": plan.steps,
            "steps_completed": rows - 1,
            "rows": rows,
            "t_end": times.last(),
            "initial_norms": norms[0],
            "final_norms": final_norms,
        },
        "conservation": {
            "max_abs_dnorm": max_dnorm,
            "max_abs_dq": max_dq,
        },
        "solver": record.solver,
    });
    let text = serde_json::to_string_pretty(&diagnostics).expect("serializable") + "\n";
    let path = out.join(DIAGNOSTICS_FILE);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;

    Ok(RunOutcome {
        status: record.status,
        rows,
        final_norms,
    })
}
