//! The three circuit-discovery environments: logical state preparation
//! (LSP), verification-circuit synthesis (VCS), and integrated
//! fault-tolerant preparation (IFT-LSP).

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::circuit::{ActionTable, Circuit};
use crate::codes::{state_stabilizer_group, LogicalTarget, StabilizerGroup};
use crate::faults::{check_preparation, FaultSet};
use crate::pauli::{jaccard_distance, Pauli};
use crate::tableau::{CanonicalTableau, StabilizerTableau};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TaskKind {
    /// Prepare the logical state; no flags, distance reward only.
    Lsp,
    /// Append a verification circuit to a fixed preparation.
    Vcs,
    /// Discover preparation and verification together from scratch.
    IftLsp,
}

/// Weights for the composite reward `mu_f*df + mu_d*(-dd) + mu_p*dp`.
#[derive(Clone, Copy, Debug)]
pub struct RewardWeights {
    pub mu_f: f64,
    pub mu_d: f64,
    pub mu_p: f64,
}

impl RewardWeights {
    /// VCS defaults: mu_f = n, mu_d = floor(n/2), mu_p = 1.
    pub fn vcs_default(n: usize) -> Self {
        RewardWeights { mu_f: n as f64, mu_d: (n / 2) as f64, mu_p: 1.0 }
    }

    /// IFT-LSP defaults: mu_d = n, mu_f = floor(n/2), mu_p = 1.
    pub fn ift_default(n: usize) -> Self {
        RewardWeights { mu_f: (n / 2) as f64, mu_d: n as f64, mu_p: 1.0 }
    }

    /// LSP uses the plain distance reward.
    pub fn lsp() -> Self {
        RewardWeights { mu_f: 0.0, mu_d: 1.0, mu_p: 0.0 }
    }
}

/// Full task description shared by every environment instance.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub target: LogicalTarget,
    pub n_flag: usize,
    pub fixed_prep: Option<Circuit>,
    pub action_table: ActionTable,
    pub weights: RewardWeights,
    pub epsilon: f64,
    pub max_gates: usize,
    /// Optional per-step penalty (0 by default; the discount factor is the
    /// intended circuit-size pressure).
    pub lambda: f64,
}

/// Immutable per-task data shared across a vectorized batch of environments.
#[derive(Debug)]
struct EnvContext {
    spec: TaskSpec,
    group: StabilizerGroup,
    /// Target data rows padded with I on flags, flattened to bits.
    target_data_vec: Vec<u8>,
    /// `+Z` on each flag, flattened to bits.
    flag_target_vec: Vec<u8>,
    /// Target rows padded to the full register (data target rows then flag
    /// +Z rows), for the energy diagnostic.
    full_target_rows: Vec<Pauli>,
    t: usize,
}

/// Per-step diagnostics surfaced alongside the reward.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo {
    pub d: f64,
    pub f: f64,
    pub p: f64,
    pub success: bool,
}

/// One environment instance. All instances built from the same [`TaskSpec`]
/// share their immutable context.
#[derive(Clone, Debug)]
pub struct Environment {
    ctx: Arc<EnvContext>,
    circuit: Circuit,
    tableau: StabilizerTableau,
    fault_set: FaultSet,
    /// Agent-chosen gates so far (excludes any fixed preparation prefix).
    steps: usize,
    d: f64,
    f: f64,
    p: f64,
    f_exact_one: bool,
}

fn pad_row_bits(row: &Pauli, n_total: usize, out: &mut Vec<u8>) {
    for j in 0..n_total {
        out.push(if j < row.n() { row.x_bit(j) as u8 } else { 0 });
    }
    for j in 0..n_total {
        out.push(if j < row.n() { row.z_bit(j) as u8 } else { 0 });
    }
    out.push((row.phase() == 2) as u8);
}

impl Environment {
    pub fn new(spec: TaskSpec) -> Result<Self> {
        if spec.kind == TaskKind::Lsp && spec.n_flag != 0 {
            return Err(Error::BadTask { msg: String::from("LSP takes no flag qubits") });
        }
        if spec.kind == TaskKind::Vcs && spec.fixed_prep.is_none() {
            return Err(Error::BadTask { msg: String::from("VCS requires a fixed preparation") });
        }
        if !(spec.epsilon > 0.0 && spec.epsilon <= 1.0) {
            return Err(Error::BadTask { msg: String::from("epsilon must be in (0, 1]") });
        }
        if spec.max_gates == 0 {
            return Err(Error::BadTask { msg: String::from("max_gates must be >= 1") });
        }
        let n_data = spec.target.code.n;
        let n_total = n_data + spec.n_flag;
        if let Some(prep) = &spec.fixed_prep {
            if prep.n_data != n_data || prep.n_flag != spec.n_flag {
                return Err(Error::BadTask { msg: String::from("fixed prep register mismatch") });
            }
            // For VCS the prep must already prepare the target noiselessly.
            let (state_ok, _) = check_preparation(prep, &spec.target)?;
            if !state_ok {
                return Err(Error::BadTask {
                    msg: String::from("fixed prep does not prepare the target"),
                });
            }
        }
        let group = state_stabilizer_group(&spec.target)?;
        let target_canon = spec.target.tableau.canonicalize()?;
        let mut target_data_vec = Vec::new();
        let mut full_target_rows = Vec::new();
        for row in target_canon.rows() {
            pad_row_bits(row, n_total, &mut target_data_vec);
        }
        // The energy diagnostic scores the generators as given (not their
        // canonical form), matching the Hamiltonian whose terms they are.
        for row in spec.target.tableau.rows() {
            full_target_rows
                .push(Pauli::from_bits(n_total, row.x_bits(), row.z_bits(), row.phase())?);
        }
        let mut flag_target_vec = Vec::new();
        for fqubit in n_data..n_total {
            let zf = Pauli::single(n_total, fqubit, 'Z')?;
            pad_row_bits(&zf, n_total, &mut flag_target_vec);
            full_target_rows.push(zf);
        }
        let t = spec.target.code.t();
        let ctx = Arc::new(EnvContext {
            spec,
            group,
            target_data_vec,
            flag_target_vec,
            full_target_rows,
            t,
        });
        let mut env = Environment {
            ctx,
            circuit: Circuit::new(n_data, 0),
            tableau: StabilizerTableau::zero_state(1)?,
            fault_set: FaultSet::empty(n_data, 0),
            steps: 0,
            d: 0.0,
            f: 1.0,
            p: 1.0,
            f_exact_one: true,
        };
        env.reset()?;
        Ok(env)
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.ctx.spec
    }

    pub fn n_total(&self) -> usize {
        self.ctx.spec.target.code.n + self.ctx.spec.n_flag
    }

    pub fn obs_len(&self) -> usize {
        let n = self.n_total();
        n * (2 * n + 1)
    }

    pub fn action_count(&self) -> usize {
        self.ctx.spec.action_table.len()
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Re-initialize to the task's starting point and return the observation.
    pub fn reset(&mut self) -> Result<Vec<u8>> {
        let spec = &self.ctx.spec;
        let n_data = spec.target.code.n;
        let n_total = self.n_total();
        self.circuit = match (&spec.fixed_prep, spec.kind) {
            (Some(prep), TaskKind::Vcs) => prep.clone(),
            _ => Circuit { n_data, n_flag: spec.n_flag, gates: Vec::new() },
        };
        self.tableau = StabilizerTableau::zero_state(n_total)?;
        self.fault_set = FaultSet::empty(n_data, spec.n_flag);
        for g in self.circuit.gates.clone() {
            self.tableau.apply_gate(&g)?;
            if spec.kind != TaskKind::Lsp {
                self.fault_set.extend(&g);
            }
        }
        self.steps = 0;
        let canon = self.tableau.canonicalize()?;
        self.refresh_values(&canon);
        Ok(canon.to_binary_vector())
    }

    fn refresh_values(&mut self, canon: &CanonicalTableau) {
        let spec = &self.ctx.spec;
        let n_data = spec.target.code.n;
        self.d = jaccard_distance(
            &canon.rows_binary_vector(0, n_data),
            &self.ctx.target_data_vec,
        );
        if spec.n_flag > 0 {
            self.p = 1.0
                - jaccard_distance(
                    &canon.rows_binary_vector(n_data, canon.rows().len()),
                    &self.ctx.flag_target_vec,
                );
        } else {
            self.p = 1.0;
        }
        if spec.kind == TaskKind::Lsp {
            self.f = 1.0;
            self.f_exact_one = true;
        } else {
            let (num, den) = self.fault_set.f_counts(&self.ctx.group, self.ctx.t);
            self.f = if den == 0 { 1.0 } else { num as f64 / den as f64 };
            self.f_exact_one = num == den;
        }
    }

    pub fn d_value(&self) -> f64 {
        self.d
    }

    pub fn f_value(&self) -> f64 {
        self.f
    }

    pub fn p_value(&self) -> f64 {
        self.p
    }

    pub fn success(&self) -> bool {
        let eps = self.ctx.spec.epsilon;
        match self.ctx.spec.kind {
            TaskKind::Lsp => 1.0 - self.d >= eps,
            TaskKind::Vcs | TaskKind::IftLsp => {
                self.f_exact_one && 1.0 - self.d >= eps && self.p >= eps
            }
        }
    }

    /// Apply one action. Returns (observation, reward, done, info).
    pub fn step(&mut self, action: usize) -> Result<(Vec<u8>, f64, bool, StepInfo)> {
        let gate = *self
            .ctx
            .spec
            .action_table
            .gate(action)
            .ok_or(Error::BadTask { msg: String::from("action index out of range") })?;
        let (d0, f0, p0) = (self.d, self.f, self.p);
        self.circuit.push(gate)?;
        self.tableau.apply_gate(&gate)?;
        if self.ctx.spec.kind != TaskKind::Lsp {
            self.fault_set.extend(&gate);
        }
        self.steps += 1;
        let canon = self.tableau.canonicalize()?;
        self.refresh_values(&canon);
        let w = &self.ctx.spec.weights;
        let reward = match self.ctx.spec.kind {
            TaskKind::Lsp => d0 - self.d,
            TaskKind::Vcs | TaskKind::IftLsp => {
                w.mu_f * (self.f - f0) + w.mu_d * (d0 - self.d) + w.mu_p * (self.p - p0)
            }
        } - self.ctx.spec.lambda;
        let success = self.success();
        let done = success || self.steps >= self.ctx.spec.max_gates;
        let info = StepInfo { d: self.d, f: self.f, p: self.p, success };
        Ok((canon.to_binary_vector(), reward, done, info))
    }

    /// Diagnostic energy score: over the padded target rows, count those the
    /// current state stabilizes with a `+` sign (each contributing -1) and
    /// with a `-` sign (each +1); rows outside the signed group contribute 0.
    pub fn energy(&self) -> Result<i64> {
        let canon = self.tableau.canonicalize()?;
        let n = self.n_total();
        let mut e = 0i64;
        for trow in &self.ctx.full_target_rows {
            // Reduce the row's bits against the canonical (RREF) rows.
            let mut acc = Pauli::identity(n)?;
            for row in canon.rows() {
                // Pivot column of `row` = first set bit in interleaved order.
                let pivot = (0..2 * n)
                    .find(|&c| {
                        if c % 2 == 0 {
                            row.x_bit(c / 2)
                        } else {
                            row.z_bit(c / 2)
                        }
                    })
                    .expect("canonical rows are nonzero");
                let has = if pivot % 2 == 0 {
                    (trow.x_bits() ^ acc.x_bits()) >> (pivot / 2) & 1 == 1
                } else {
                    (trow.z_bits() ^ acc.z_bits()) >> (pivot / 2) & 1 == 1
                };
                if has {
                    acc = acc.multiply(row)?;
                }
            }
            if acc.x_bits() == trow.x_bits() && acc.z_bits() == trow.z_bits() {
                e += if acc.phase() == trow.phase() { -1 } else { 1 };
            }
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{enumerate_actions, ActionRestriction, ConnectivityGraph};
    use crate::codes::{builtin_code, ghz_code, make_target, StateLabel};
    use crate::gate::{Gate, GateKind};

    fn ghz3_spec() -> TaskSpec {
        let code = ghz_code(3).unwrap();
        let target = make_target(&code, StateLabel::Plus, None).unwrap();
        let table = enumerate_actions(
            &[GateKind::H, GateKind::Cx],
            &ConnectivityGraph::all_to_all(3),
            ActionRestriction::default(),
        )
        .unwrap();
        TaskSpec {
            kind: TaskKind::Lsp,
            target,
            n_flag: 0,
            fixed_prep: None,
            action_table: table,
            weights: RewardWeights::lsp(),
            epsilon: 0.9999,
            max_gates: 50,
            lambda: 0.0,
        }
    }

    // GHZ-3 trajectory: every step strictly increases 1 - d, and
    // the energy diagnostic is constant across at least one gate pair.
    #[test]
    fn ghz3_reward_monotone_energy_stalls() {
        let spec = ghz3_spec();
        let mut env = Environment::new(spec).unwrap();
        let seq = [
            Gate::one(GateKind::H, 0),
            Gate::two(GateKind::Cx, 0, 1),
            Gate::two(GateKind::Cx, 0, 2),
        ];
        let mut prev_score = 1.0 - env.d_value();
        let mut energies = alloc::vec![env.energy().unwrap()];
        let mut total_reward = 0.0;
        let d0 = env.d_value();
        for g in seq {
            let action = env.spec().action_table.index_of(&g).unwrap();
            let (_, r, done, info) = env.step(action).unwrap();
            total_reward += r;
            let score = 1.0 - info.d;
            assert!(score > prev_score, "1-d must strictly increase, got {score} <= {prev_score}");
            prev_score = score;
            energies.push(env.energy().unwrap());
            if info.success {
                assert!(done);
            }
        }
        assert!(env.success());
        // Telescoping: cumulative reward = d_0 - d_L = d_0 here.
        assert!((total_reward - d0).abs() < 1e-12);
        assert!((prev_score - 1.0).abs() < 1e-12);
        // Energy stalls across at least one consecutive gate pair.
        assert!(
            energies.windows(2).any(|w| w[0] == w[1]),
            "expected an energy plateau, got {energies:?}"
        );
        // Final energy: all 3 target rows stabilized with +.
        assert_eq!(*energies.last().unwrap(), -3);
    }

    // reset gives the all-zero-state observation; flags start at p = 1.
    #[test]
    fn reset_and_p_value() {
        let code = builtin_code("steane_7_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let table = enumerate_actions(
            &[GateKind::H, GateKind::Cx],
            &ConnectivityGraph::all_to_all(8),
            ActionRestriction::default(),
        )
        .unwrap();
        let spec = TaskSpec {
            kind: TaskKind::IftLsp,
            target,
            n_flag: 1,
            fixed_prep: None,
            action_table: table,
            weights: RewardWeights::ift_default(8),
            epsilon: 0.9999,
            max_gates: 100,
            lambda: 0.0,
        };
        let mut env = Environment::new(spec).unwrap();
        let obs = env.reset().unwrap();
        assert_eq!(obs.len(), 8 * 17);
        assert_eq!(env.p_value(), 1.0);
        assert_eq!(env.f_value(), 1.0); // empty fault set is vacuously 1
        // Entangling a data qubit with the flag drops p below 1.
        let cx = Gate::two(GateKind::Cx, 0, 7);
        let a = env.spec().action_table.index_of(&cx).unwrap();
        let h0 = env.spec().action_table.index_of(&Gate::one(GateKind::H, 0)).unwrap();
        env.step(h0).unwrap();
        let (_, _, _, info) = env.step(a).unwrap();
        assert!(info.p < 1.0, "entangled flag must lower p, got {}", info.p);
    }

    // VCS on the published non-FT preparation: reset builds a fault
    // set with f < 1; appending the published verification reaches success.
    #[test]
    fn vcs_flag_env_reset_and_success() {
        let code = builtin_code("steane_7_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let prep = Circuit::parse(
            "qubits 7 1\nH 1\nH 2\nH 3\nCX 1 0\nCX 3 5\nCX 2 6\nCX 1 4\nCX 2 0\nCX 3 6\nCX 1 5\nCX 6 4\n",
        )
        .unwrap();
        let table = enumerate_actions(
            &[GateKind::Cx],
            &ConnectivityGraph::all_to_all(8),
            ActionRestriction { no_data_data: true, n_data: 7 },
        )
        .unwrap();
        let spec = TaskSpec {
            kind: TaskKind::Vcs,
            target,
            n_flag: 1,
            fixed_prep: Some(prep),
            action_table: table,
            weights: RewardWeights::vcs_default(8),
            epsilon: 0.9999,
            max_gates: 50,
            lambda: 0.0,
        };
        let mut env = Environment::new(spec).unwrap();
        assert!(!env.fault_set.is_empty());
        assert!(env.f_value() < 1.0, "non-FT prep must have f < 1");
        assert_eq!(env.d_value(), 0.0);
        assert!(!env.success());
        // Published verification: CX 0->7, 6->7, 5->7 measures a Z-type check.
        for (c, t) in [(0usize, 7usize), (6, 7), (5, 7)] {
            let a = env.spec().action_table.index_of(&Gate::two(GateKind::Cx, c, t)).unwrap();
            env.step(a).unwrap();
        }
        assert!(env.success(), "d={} f={} p={}", env.d_value(), env.f_value(), env.p_value());
    }

    // cached (d, f, p) equal from-scratch recomputation along a
    // random-walk trajectory.
    #[test]
    fn cached_values_match_recompute() {
        let spec = ghz3_spec();
        let mut env = Environment::new(spec.clone()).unwrap();
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        for step in 0..300 {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (rng_state >> 33) as usize % env.action_count();
            let (_, _, done, info) = env.step(a).unwrap();
            // Recompute d from an independent simulation of the same circuit.
            let canon = env.circuit().simulate().unwrap();
            let d = jaccard_distance(
                &canon.rows_binary_vector(0, 3),
                &env.ctx.target_data_vec,
            );
            assert!((d - info.d).abs() < 1e-15, "step {step}");
            if done {
                env.reset().unwrap();
            }
        }
    }
}
