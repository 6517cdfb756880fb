//! Run configuration: JSON schema, dot-path overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::hamiltonian::{correlator_hamiltonian, r_party_eta, random_hermitian, swap_hamiltonian, HermitianOperator};
use crate::propagate::SplittingScheme;
use crate::state::{ComponentState, Ket};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Swap,
    Random5,
    Ladder,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::Swap, Experiment::Random5, Experiment::Ladder];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Swap => "swap",
            Experiment::Random5 => "random5",
            Experiment::Ladder => "ladder",
        }
    }

    pub fn dims(self) -> Vec<usize> {
        match self {
            Experiment::Swap => vec![2, 2],
            Experiment::Random5 => vec![2; 5],
            Experiment::Ladder => vec![3; 3],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Swap => "two qubits, exchange (swap) Hamiltonian",
            Experiment::Random5 => "five qubits, random Hermitian Hamiltonian",
            Experiment::Ladder => "three qutrits, r-party ladder-operator correlator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    SeExact,
    LieTrotter,
    Strang,
    VarRestrictFirst,
    VarDiscretizeFirst,
    BeaTruncation,
}

impl Integrator {
    pub const ALL: [Integrator; 6] = [
        Integrator::SeExact,
        Integrator::LieTrotter,
        Integrator::Strang,
        Integrator::VarRestrictFirst,
        Integrator::VarDiscretizeFirst,
        Integrator::BeaTruncation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Integrator::SeExact => "se_exact",
            Integrator::LieTrotter => "lie_trotter",
            Integrator::Strang => "strang",
            Integrator::VarRestrictFirst => "var_restrict_first",
            Integrator::VarDiscretizeFirst => "var_discretize_first",
            Integrator::BeaTruncation => "bea_truncation",
        }
    }

    pub fn is_variational(self) -> bool {
        matches!(self, Integrator::VarRestrictFirst | Integrator::VarDiscretizeFirst)
    }

    /// Fields this integrator needs beyond the common ones.
    pub fn required_fields(self) -> &'static [&'static str] {
        match self {
            Integrator::BeaTruncation => &["bea_order"],
            _ => &[],
        }
    }

    pub fn optional_fields(self) -> &'static [&'static str] {
        match self {
            Integrator::VarRestrictFirst | Integrator::VarDiscretizeFirst => &["alpha"],
            Integrator::BeaTruncation => &["bea_scheme", "ode_tol"],
            _ => &[],
        }
    }
}

pub fn compatible(e: Experiment, i: Integrator) -> bool {
    i != Integrator::BeaTruncation || e == Experiment::Swap
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeaScheme {
    LieTrotter,
    Strang,
}

impl From<BeaScheme> for SplittingScheme {
    fn from(s: BeaScheme) -> Self {
        match s {
            BeaScheme::LieTrotter => SplittingScheme::LieTrotter,
            BeaScheme::Strang => SplittingScheme::Strang,
        }
    }
}

/// A real amplitude or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    fn value(self) -> C64 {
        match self {
            Amplitude::Real(x) => C64::new(x, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_party: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bea_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bea_scheme: Option<BeaScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_tol: Option<f64>,
    /// One amplitude list per subsystem; normalized on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<Vec<Amplitude>>>,
    #[serde(default)]
    pub outputs: Vec<String>,
    /// 1-based Gell-Mann indices used as the three Bloch columns of a qutrit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gellmann_projection: Option<[usize; 3]>,
    pub out_path: PathBuf,
}

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_ODE_TOL: f64 = 1e-12;
pub const DEFAULT_PROJECTION: [usize; 3] = [1, 2, 3];

/// A diagnostic column requested in `outputs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Norm,
    AbsOverlap,
    RateNucl,
    /// Axis 0..3 of subsystem `j` (0-based).
    Bloch(usize, usize),
    Purity(usize),
}

impl Output {
    pub fn parse(name: &str, subsystems: usize) -> Result<Self, String> {
        let index = |rest: &str| -> Result<usize, String> {
            match rest.parse::<usize>() {
                Ok(j) if (1..=subsystems).contains(&j) => Ok(j - 1),
                _ => Err(format!("output '{name}': subsystem index must be in 1..={subsystems}")),
            }
        };
        match name {
            "norm" => return Ok(Output::Norm),
            "abs_overlap" => return Ok(Output::AbsOverlap),
            "rate_nucl" => return Ok(Output::RateNucl),
            _ => {}
        }
        for (axis, prefix) in ["bloch_x", "bloch_y", "bloch_z"].iter().enumerate() {
            if let Some(rest) = name.strip_prefix(prefix) {
                return Ok(Output::Bloch(index(rest)?, axis));
            }
        }
        if let Some(rest) = name.strip_prefix("purity") {
            return Ok(Output::Purity(index(rest)?));
        }
        Err(format!(
            "unknown output '{name}' (expected norm, abs_overlap, rate_nucl, bloch_x<j>, bloch_y<j>, bloch_z<j>, purity<j>)"
        ))
    }
}

/// A validated configuration with everything needed to run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: ExperimentConfig,
    pub hamiltonian: HermitianOperator,
    pub initial: ComponentState,
    pub steps: usize,
    pub outputs: Vec<Output>,
    pub alpha: f64,
    pub projection: [usize; 3],
}

/// Read a config file, apply `key=value` overrides and parse.
pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read config: {e}")))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut value, o).map_err(CliError::Config)?;
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

/// Set a dot-separated path inside a JSON document. Values parse as JSON
/// when possible and fall back to plain strings.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), String> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' is not of the form key=value"))?;
    if key.is_empty() {
        return Err(format!("override '{spec}' has an empty key"));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let segments: Vec<&str> = key.split('.').collect();
    for (n, seg) in segments.iter().enumerate() {
        let last = n + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| format!("override '{key}': '{seg}' is not an array index"))?;
                items
                    .get_mut(i)
                    .ok_or_else(|| format!("override '{key}': index {i} out of range"))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert_with(|| {
                if last {
                    Value::Null
                } else {
                    Value::Object(Default::default())
                }
            }),
            _ => return Err(format!("override '{key}': '{seg}' does not address an object or array")),
        };
    }
    *node = parsed;
    Ok(())
}

fn forbid<T>(field: &Option<T>, name: &str, context: &str) -> Result<(), String> {
    if field.is_some() {
        Err(format!("'{name}' is only valid {context}"))
    } else {
        Ok(())
    }
}

/// `floor(t_final/dt)`, tolerant of representation error in the ratio.
pub fn step_count(dt: f64, t_final: f64) -> usize {
    let r = t_final / dt;
    (r * (1.0 + 1e-12)).floor() as usize
}

impl ExperimentConfig {
    pub fn plan(&self) -> Result<Plan, String> {
        let c = self;
        if !(c.dt.is_finite() && c.dt > 0.0) {
            return Err(format!("dt must be positive, got {}", c.dt));
        }
        if !(c.t_final.is_finite() && c.t_final > 0.0) {
            return Err(format!("t_final must be positive, got {}", c.t_final));
        }
        let steps = step_count(c.dt, c.t_final);
        if steps == 0 {
            return Err(format!("t_final {} is shorter than one step of {}", c.t_final, c.dt));
        }
        if !compatible(c.experiment, c.integrator) {
            return Err(format!(
                "integrator {} is not available for experiment {}",
                c.integrator.name(),
                c.experiment.name()
            ));
        }

        if c.experiment != Experiment::Random5 {
            forbid(&c.seed, "seed", "for experiment random5")?;
        }
        if c.experiment != Experiment::Ladder {
            forbid(&c.r_party, "r_party", "for experiment ladder")?;
            forbid(&c.gellmann_projection, "gellmann_projection", "for experiment ladder")?;
        }
        if !c.integrator.is_variational() {
            forbid(&c.alpha, "alpha", "for variational integrators")?;
        }
        if c.integrator != Integrator::BeaTruncation {
            forbid(&c.bea_order, "bea_order", "for integrator bea_truncation")?;
            forbid(&c.bea_scheme, "bea_scheme", "for integrator bea_truncation")?;
            forbid(&c.ode_tol, "ode_tol", "for integrator bea_truncation")?;
        }

        let alpha = c.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(0.0..=1.0).contains(&alpha) {
            return Err(format!("alpha must lie in [0, 1], got {alpha}"));
        }
        if c.integrator == Integrator::BeaTruncation {
            let order = c.bea_order.ok_or("bea_truncation needs 'bea_order'")?;
            let scheme: SplittingScheme = c.bea_scheme.unwrap_or(BeaScheme::LieTrotter).into();
            crate::bea::ModifiedRhs::new(scheme, order, c.dt).map_err(|e| e.to_string())?;
            let tol = c.ode_tol.unwrap_or(DEFAULT_ODE_TOL);
            if !(tol.is_finite() && tol > 0.0) {
                return Err(format!("ode_tol must be positive, got {tol}"));
            }
        }

        let hamiltonian = match c.experiment {
            Experiment::Swap => swap_hamiltonian(2),
            Experiment::Random5 => random_hermitian(5, c.seed.unwrap_or(DEFAULT_SEED)),
            Experiment::Ladder => {
                let r = c.r_party.ok_or("experiment ladder needs 'r_party' (1, 2 or 3)")?;
                if !(1..=3).contains(&r) {
                    return Err(format!("r_party must be 1, 2 or 3, got {r}"));
                }
                r_party_eta(r).and_then(|eta| correlator_hamiltonian(&eta))
            }
        }
        .map_err(|e| e.to_string())?;

        let projection = c.gellmann_projection.unwrap_or(DEFAULT_PROJECTION);
        if projection.iter().any(|&k| !(1..=8).contains(&k))
            || projection[0] == projection[1]
            || projection[1] == projection[2]
            || projection[0] == projection[2]
        {
            return Err(format!("gellmann_projection needs three distinct indices in 1..=8, got {projection:?}"));
        }

        let dims = c.experiment.dims();
        let initial = match &c.initial_state {
            Some(parts) => initial_from_amplitudes(parts, &dims)?,
            None => default_initial(c.experiment),
        };
        let outputs = c
            .outputs
            .iter()
            .map(|name| Output::parse(name, dims.len()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Plan {
            config: c.clone(),
            hamiltonian,
            initial,
            steps,
            outputs,
            alpha,
            projection,
        })
    }
}

fn initial_from_amplitudes(parts: &[Vec<Amplitude>], dims: &[usize]) -> Result<ComponentState, String> {
    if parts.len() != dims.len() {
        return Err(format!("initial_state has {} subsystems, experiment needs {}", parts.len(), dims.len()));
    }
    let mut kets = Vec::with_capacity(parts.len());
    for (j, (amps, &d)) in parts.iter().zip(dims).enumerate() {
        if amps.len() != d {
            return Err(format!("initial_state[{j}] has {} amplitudes, expected {d}", amps.len()));
        }
        let ket = Ket::new(amps.iter().map(|a| a.value()).collect()).map_err(|e| format!("initial_state[{j}]: {e}"))?;
        let ket = ket.normalized().map_err(|e| format!("initial_state[{j}]: {e}"))?;
        kets.push(ket);
    }
    ComponentState::new(kets).map_err(|e| e.to_string())
}

/// Swap: `|0⟩, (|0⟩+|1⟩)/√2`. Otherwise every factor is the uniform superposition.
pub fn default_initial(e: Experiment) -> ComponentState {
    let uniform = |d: usize| Ket::from_real(&vec![1.0; d]).and_then(|k| k.normalized()).expect("non-zero");
    let parts = match e {
        Experiment::Swap => vec![Ket::basis(2, 0).expect("valid"), uniform(2)],
        Experiment::Random5 => vec![uniform(2); 5],
        Experiment::Ladder => vec![uniform(3); 3],
    };
    ComponentState::new(parts).expect("at least two parts")
}
