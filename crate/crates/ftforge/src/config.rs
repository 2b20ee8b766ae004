//! Run configuration: JSON schema, connectivity presets, and assembly of a
//! core [`TaskSpec`] from the declarative description.

use std::fs;
use std::path::{Path, PathBuf};

use ftforge_core::circuit::{enumerate_actions, ActionRestriction};
use ftforge_core::codes::{builtin_code, ghz_code, make_target, LogicalTarget};
use ftforge_core::{
    Circuit, ConnectivityGraph, GateKind, RewardWeights, StabilizerCode, StateLabel, TaskKind,
    TaskSpec,
};
use serde::{Deserialize, Serialize};

use crate::ppo::PpoConfig;
use crate::CliError;

/// Seed override honored by every command.
pub const SEED_ENV_VAR: &str = "FTFORGE_SEED";

/// Connectivity description: a named preset, an explicit grid, or raw edges.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ConnectivitySpec {
    AllToAll,
    Preset(String),
    Grid { rows: usize, cols: usize },
    Edges { n_qubits: usize, edges: Vec<(usize, usize)> },
}

impl Default for ConnectivitySpec {
    fn default() -> Self {
        ConnectivitySpec::AllToAll
    }
}

/// 16-qubit heavy-hex lattice (ibmq_guadalupe layout).
pub const HEAVY_HEX_16_EDGES: [(usize, usize); 16] = [
    (0, 1),
    (1, 2),
    (1, 4),
    (2, 3),
    (3, 5),
    (4, 7),
    (5, 8),
    (6, 7),
    (7, 10),
    (8, 9),
    (8, 11),
    (10, 12),
    (11, 14),
    (12, 13),
    (12, 15),
    (13, 14),
];

/// 20-qubit lattice with diagonal couplers (IBM Q20 Tokyo layout).
pub const TOKYO_20_EDGES: [(usize, usize); 43] = [
    (0, 1),
    (0, 5),
    (1, 2),
    (1, 6),
    (1, 7),
    (2, 3),
    (2, 6),
    (2, 7),
    (3, 4),
    (3, 8),
    (3, 9),
    (4, 8),
    (4, 9),
    (5, 6),
    (5, 10),
    (5, 11),
    (6, 7),
    (6, 10),
    (6, 11),
    (7, 8),
    (7, 12),
    (7, 13),
    (8, 9),
    (8, 12),
    (8, 13),
    (9, 14),
    (10, 11),
    (10, 15),
    (11, 12),
    (11, 16),
    (11, 17),
    (12, 13),
    (12, 16),
    (12, 17),
    (13, 14),
    (13, 18),
    (13, 19),
    (14, 18),
    (14, 19),
    (15, 16),
    (16, 17),
    (17, 18),
    (18, 19),
];

/// Resolve a connectivity spec to a graph over `n_qubits` qubits. Presets
/// carry their own size, which must be at least `n_qubits`; the generic
/// specs are instantiated at exactly `n_qubits`.
pub fn build_connectivity(
    spec: &ConnectivitySpec,
    n_qubits: usize,
) -> Result<ConnectivityGraph, CliError> {
    let graph = match spec {
        ConnectivitySpec::AllToAll => ConnectivityGraph::all_to_all(n_qubits),
        ConnectivitySpec::Grid { rows, cols } => {
            let g = ConnectivityGraph::grid(*rows, *cols);
            if g.n_qubits() < n_qubits {
                return Err(CliError::Config(format!(
                    "grid {rows}x{cols} has {} qubits, task needs {n_qubits}",
                    g.n_qubits()
                )));
            }
            g
        }
        ConnectivitySpec::Edges { n_qubits: n, edges } => {
            if *n < n_qubits {
                return Err(CliError::Config(format!(
                    "edge list covers {n} qubits, task needs {n_qubits}"
                )));
            }
            ConnectivityGraph::new(*n, edges)?
        }
        ConnectivitySpec::Preset(name) => {
            let g = match name.as_str() {
                "grid_3x3" => ConnectivityGraph::grid(3, 3),
                "line_5" => ConnectivityGraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)])?,
                "heavy_hex_16" => ConnectivityGraph::new(16, &HEAVY_HEX_16_EDGES)?,
                "tokyo_20" => ConnectivityGraph::new(20, &TOKYO_20_EDGES)?,
                other => {
                    return Err(CliError::Config(format!("unknown connectivity preset {other}")))
                }
            };
            if g.n_qubits() < n_qubits {
                return Err(CliError::Config(format!(
                    "preset {name} has {} qubits, task needs {n_qubits}",
                    g.n_qubits()
                )));
            }
            g
        }
    };
    Ok(graph)
}

/// Declarative run description loaded from JSON. Unknown keys are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "lsp", "vcs", or "ift_lsp".
    pub task: String,
    /// Builtin code name, or "ghz<N>" for an N-qubit GHZ target.
    #[serde(default)]
    pub code: Option<String>,
    /// Path to a custom code definition file (alternative to `code`).
    #[serde(default)]
    pub code_path: Option<PathBuf>,
    /// Logical state label: "zero" | "one" | "plus" | "minus" | "plus_i" | "minus_i".
    pub state: String,
    /// Optional replacement logical representative, e.g. "IIZIZZI".
    #[serde(default)]
    pub logical_override: Option<String>,
    /// Gate names drawn from {"H","S","SX","X","CX","CZ"}.
    pub gates: Vec<String>,
    #[serde(default)]
    pub connectivity: ConnectivitySpec,
    /// Flag qubits to start with (VCS/IFT; must be 0 for LSP).
    #[serde(default)]
    pub n_flag: usize,
    /// Upper bound for the flag-escalation driver (defaults to `n_flag`).
    #[serde(default)]
    pub n_flag_max: Option<usize>,
    /// Fixed preparation circuit file (VCS only).
    #[serde(default)]
    pub fixed_prep_path: Option<PathBuf>,
    /// Drop two-qubit gates acting on two data qubits (VCS verification search).
    #[serde(default)]
    pub no_data_data: bool,
    #[serde(default)]
    pub mu_f: Option<f64>,
    #[serde(default)]
    pub mu_d: Option<f64>,
    #[serde(default)]
    pub mu_p: Option<f64>,
    /// Success threshold on 1-d and p; effectively demands exact equality.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Episode length cap L.
    #[serde(default = "default_max_gates")]
    pub max_gates: usize,
    /// Optional per-step gate penalty (0 disables; discounting is the
    /// default circuit-size pressure).
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub ppo: PpoConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

fn default_epsilon() -> f64 {
    0.9999
}

fn default_max_gates() -> usize {
    50
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.gates.is_empty() {
            return Err(CliError::Config(String::from("empty gate set")));
        }
        match self.task.as_str() {
            "lsp" | "vcs" | "ift_lsp" => {}
            other => return Err(CliError::Config(format!("unknown task {other}"))),
        }
        if self.code.is_none() && self.code_path.is_none() {
            return Err(CliError::Config(String::from("one of code / code_path is required")));
        }
        if self.code.is_some() && self.code_path.is_some() {
            return Err(CliError::Config(String::from("code and code_path are exclusive")));
        }
        if !(0.0..=1.0).contains(&self.epsilon) || self.epsilon == 0.0 {
            return Err(CliError::Config(String::from("epsilon must be in (0, 1]")));
        }
        if self.max_gates == 0 {
            return Err(CliError::Config(String::from("max_gates must be >= 1")));
        }
        self.ppo.validate().map_err(CliError::Config)?;
        Ok(())
    }

    pub fn task_kind(&self) -> TaskKind {
        match self.task.as_str() {
            "lsp" => TaskKind::Lsp,
            "vcs" => TaskKind::Vcs,
            _ => TaskKind::IftLsp,
        }
    }

    /// Effective seed: `FTFORGE_SEED` overrides the config value.
    pub fn effective_seed(&self) -> u64 {
        seed_override().unwrap_or(self.seed)
    }

    pub fn resolve_code(&self) -> Result<StabilizerCode, CliError> {
        if let Some(path) = &self.code_path {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            return Ok(StabilizerCode::parse(name, &text)?);
        }
        let name = self.code.as_deref().unwrap();
        resolve_code_name(name)
    }

    pub fn gate_kinds(&self) -> Result<Vec<GateKind>, CliError> {
        self.gates
            .iter()
            .map(|g| GateKind::parse(g).map_err(CliError::from))
            .collect()
    }

    pub fn target(&self) -> Result<LogicalTarget, CliError> {
        let code = self.resolve_code()?;
        let label = StateLabel::parse(&self.state)?;
        let overridden = match &self.logical_override {
            Some(s) => Some(ftforge_core::Pauli::parse(s)?),
            None => None,
        };
        Ok(make_target(&code, label, overridden)?)
    }

    /// Assemble the core task description for a given flag count.
    pub fn task_spec(&self, n_flag: usize) -> Result<TaskSpec, CliError> {
        let kind = self.task_kind();
        if kind == TaskKind::Lsp && n_flag != 0 {
            return Err(CliError::Config(String::from("LSP takes no flag qubits")));
        }
        let target = self.target()?;
        let n_data = target.code.n;
        let n_total = n_data + n_flag;
        let graph = build_connectivity(&self.connectivity, n_total)?;
        let restriction =
            ActionRestriction { no_data_data: self.no_data_data, n_data };
        let action_table = enumerate_actions(&self.gate_kinds()?, &graph, restriction)?;
        let fixed_prep = match &self.fixed_prep_path {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let mut c = Circuit::parse(&text)?;
                if c.n_data != n_data {
                    return Err(CliError::Config(String::from(
                        "fixed prep qubit count does not match the code",
                    )));
                }
                // A data-only prep is padded to include the task's flags.
                c.n_flag = n_flag;
                Some(c)
            }
            None => None,
        };
        let defaults = match kind {
            TaskKind::Lsp => RewardWeights::lsp(),
            TaskKind::Vcs => RewardWeights::vcs_default(n_data),
            TaskKind::IftLsp => RewardWeights::ift_default(n_data),
        };
        let weights = RewardWeights {
            mu_f: self.mu_f.unwrap_or(defaults.mu_f),
            mu_d: self.mu_d.unwrap_or(defaults.mu_d),
            mu_p: self.mu_p.unwrap_or(defaults.mu_p),
        };
        Ok(TaskSpec {
            kind,
            target,
            n_flag,
            fixed_prep,
            action_table,
            weights,
            epsilon: self.epsilon,
            max_gates: self.max_gates,
            lambda: self.lambda,
        })
    }
}

/// Look up a builtin code or a "ghz<N>" pseudo-code by name.
pub fn resolve_code_name(name: &str) -> Result<StabilizerCode, CliError> {
    if let Some(n) = name.strip_prefix("ghz") {
        if let Ok(n) = n.parse::<usize>() {
            return Ok(ghz_code(n)?);
        }
    }
    Ok(builtin_code(name)?)
}

/// Parse `FTFORGE_SEED` if set (invalid values are ignored).
pub fn seed_override() -> Option<u64> {
    std::env::var(SEED_ENV_VAR).ok().and_then(|v| v.parse().ok())
}
