//! Actor-critic PPO trainer: vectorized environments, generalized advantage
//! estimation, clipped surrogate updates with exact hand-derived gradients,
//! transfer by action-space restriction, and a versioned agent file format.

mod net;

use std::io::{Read as _, Write as _};
use std::path::Path;

use ftforge_core::faults::verify_fault_tolerance;
use ftforge_core::{ActionTable, Circuit, Environment, TaskKind, TaskSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use net::{orthogonal, ForwardCache, MlpGrads, MlpNet, ACTOR_HEAD_GAIN, CRITIC_HEAD_GAIN, HIDDEN_GAIN};

use crate::CliError;

/// Trainer hyperparameters. Defaults follow the reference setup; the rollout
/// length between updates is not pinned by that setup and defaults to 128.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub learning_rate: f64,
    /// Linear learning-rate anneal to zero over `total_timesteps`.
    pub anneal_lr: bool,
    pub n_agents: usize,
    pub n_envs: usize,
    /// Env steps per environment between updates (not a published value).
    pub rollout_len: usize,
    /// Env steps per agent (each of the `n_envs` counts one per step).
    pub total_timesteps: u64,
    pub update_epochs: usize,
    pub n_minibatches: usize,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub vf_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub normalize_advantages: bool,
    /// Hidden width; `None` picks 128, or 256 when the register has more
    /// than 10 qubits.
    pub hidden_size: Option<usize>,
    /// Stop training once a verified circuit with at most this many
    /// agent-chosen gates is found (checked at update-round boundaries so
    /// results do not depend on scheduling).
    pub stop_at_size: Option<usize>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 1e-3,
            anneal_lr: true,
            n_agents: 10,
            n_envs: 16,
            rollout_len: 128,
            total_timesteps: 1_000_000,
            update_epochs: 4,
            n_minibatches: 4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            vf_coef: 0.5,
            entropy_coef: 0.05,
            max_grad_norm: 0.5,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            normalize_advantages: true,
            hidden_size: None,
            stop_at_size: None,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("clip_eps", self.clip_eps),
            ("vf_coef", self.vf_coef),
            ("max_grad_norm", self.max_grad_norm),
            ("adam_eps", self.adam_eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.n_agents == 0 || self.n_envs == 0 || self.rollout_len == 0 {
            return Err(String::from("n_agents, n_envs, rollout_len must be >= 1"));
        }
        if self.update_epochs == 0 || self.n_minibatches == 0 {
            return Err(String::from("update_epochs and n_minibatches must be >= 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0)
        {
            return Err(String::from("gamma and gae_lambda must be in (0, 1]"));
        }
        if self.entropy_coef < 0.0 {
            return Err(String::from("entropy_coef must be >= 0"));
        }
        Ok(())
    }

    /// Hidden width rule: 128, or 256 past 10 physical qubits.
    pub fn hidden_for(&self, n_qubits: usize) -> usize {
        self.hidden_size.unwrap_or(if n_qubits > 10 { 256 } else { 128 })
    }
}

/// Adam optimizer state over one flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(n: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0, beta1, beta2, eps }
    }

    /// One step: `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// One trainable policy/value pair bound to an action table.
#[derive(Clone, Debug)]
pub struct Agent {
    pub actor: MlpNet,
    pub critic: MlpNet,
    pub opt: Adam,
    /// Env steps this agent has consumed (drives the LR anneal).
    pub step: u64,
    pub action_hash: u64,
}

impl Agent {
    pub fn new(obs_dim: usize, n_actions: usize, hidden: usize, cfg: &PpoConfig, action_hash: u64, rng: &mut ChaCha8Rng) -> Self {
        let actor = MlpNet::new(
            [obs_dim, hidden, hidden, n_actions],
            [HIDDEN_GAIN, HIDDEN_GAIN, ACTOR_HEAD_GAIN],
            rng,
        );
        let critic = MlpNet::new(
            [obs_dim, hidden, hidden, 1],
            [HIDDEN_GAIN, HIDDEN_GAIN, CRITIC_HEAD_GAIN],
            rng,
        );
        let n = actor.n_params() + critic.n_params();
        Agent {
            actor,
            critic,
            opt: Adam::new(n, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps),
            step: 0,
            action_hash,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.actor.out_dim()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.actor.n_params() + self.critic.n_params());
        self.actor.write_params(&mut out);
        self.critic.write_params(&mut out);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        self.actor.read_params(&mut it);
        self.critic.read_params(&mut it);
        assert!(it.next().is_none(), "parameter vector too long");
    }

    /// Action probabilities for one observation; masked actions (if any)
    /// get the -inf logit convention, hence probability exactly 0.
    pub fn policy(&self, obs: &[f64], mask: Option<&[bool]>) -> Vec<f64> {
        let x = DMatrix::from_row_slice(1, obs.len(), obs);
        let logits = self.actor.forward(&x).out;
        let mut z: Vec<f64> = logits.row(0).iter().copied().collect();
        if let Some(mask) = mask {
            for (v, &keep) in z.iter_mut().zip(mask) {
                if !keep {
                    *v = f64::NEG_INFINITY;
                }
            }
        }
        softmax(&z)
    }

    /// Critic value for one observation.
    pub fn value(&self, obs: &[f64]) -> f64 {
        let x = DMatrix::from_row_slice(1, obs.len(), obs);
        self.critic.forward(&x).out[(0, 0)]
    }
}

/// Sample an action: (index, log-probability, value estimate).
pub fn act<R: Rng>(agent: &Agent, obs: &[f64], rng: &mut R) -> (usize, f64, f64) {
    let probs = agent.policy(obs, None);
    let a = sample_categorical(&probs, rng);
    (a, probs[a].ln(), agent.value(obs))
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Shannon entropy of a probability vector (nats).
pub fn entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// Generalized advantage estimation for one environment stream.
///
/// `values` has length `T + 1` (bootstrap value last); `dones[t] = true`
/// means the transition at step `t` ended its episode, cutting the
/// recursion. Returns `(advantages, returns)` with `returns = adv + value`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let t_max = rewards.len();
    assert_eq!(values.len(), t_max + 1);
    assert_eq!(dones.len(), t_max);
    let mut adv = vec![0.0; t_max];
    let mut carry = 0.0;
    for t in (0..t_max).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * cont * values[t + 1] - values[t];
        carry = delta + gamma * lambda * cont * carry;
        adv[t] = carry;
    }
    let ret: Vec<f64> = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

/// One flattened rollout batch ready for minibatch updates.
pub struct TrajectoryBuffer {
    pub obs: DMatrix<f64>,
    pub actions: Vec<usize>,
    pub logp: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// Loss diagnostics from one update.
#[derive(Clone, Copy, Debug, Default)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// Loss and exact gradients (flat, actor params then critic params) on one
/// minibatch of the clipped PPO objective.
pub fn minibatch_loss_and_grads(
    agent: &Agent,
    buf: &TrajectoryBuffer,
    idx: &[usize],
    cfg: &PpoConfig,
) -> (LossStats, Vec<f64>) {
    let b = idx.len();
    let obs_dim = buf.obs.ncols();
    let n_actions = agent.n_actions();
    let mut x = DMatrix::zeros(b, obs_dim);
    for (r, &i) in idx.iter().enumerate() {
        x.row_mut(r).copy_from(&buf.obs.row(i));
    }
    let actor_cache = agent.actor.forward(&x);
    let critic_cache = agent.critic.forward(&x);

    let mut d_logits = DMatrix::zeros(b, n_actions);
    let mut policy_loss = 0.0;
    let mut ent_sum = 0.0;
    for (r, &i) in idx.iter().enumerate() {
        let z: Vec<f64> = actor_cache.out.row(r).iter().copied().collect();
        let probs = softmax(&z);
        let a = buf.actions[i];
        let logp_new = probs[a].ln();
        let ratio = (logp_new - buf.logp[i]).exp();
        let adv = buf.advantages[i];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv;
        policy_loss -= unclipped.min(clipped);
        // d(objective)/d(logp_new): the active branch of the min; the
        // clipped branch is locally constant in the parameters.
        let w = if unclipped <= clipped { unclipped } else { 0.0 };
        let h = entropy(&probs);
        ent_sum += h;
        for j in 0..n_actions {
            let one = if j == a { 1.0 } else { 0.0 };
            let pg = -w * (one - probs[j]);
            let eg = if probs[j] > 0.0 { cfg.entropy_coef * probs[j] * (probs[j].ln() + h) } else { 0.0 };
            d_logits[(r, j)] = (pg + eg) / b as f64;
        }
    }
    policy_loss /= b as f64;
    let ent_mean = ent_sum / b as f64;

    let mut d_value = DMatrix::zeros(b, 1);
    let mut value_loss = 0.0;
    for (r, &i) in idx.iter().enumerate() {
        let err = critic_cache.out[(r, 0)] - buf.returns[i];
        value_loss += 0.5 * err * err;
        d_value[(r, 0)] = cfg.vf_coef * err / b as f64;
    }
    value_loss /= b as f64;

    let actor_grads = agent.actor.backward(&x, &actor_cache, &d_logits);
    let critic_grads = agent.critic.backward(&x, &critic_cache, &d_value);
    let mut flat = Vec::with_capacity(agent.actor.n_params() + agent.critic.n_params());
    actor_grads.write_flat(&mut flat);
    critic_grads.write_flat(&mut flat);
    (LossStats { policy_loss, value_loss, entropy: ent_mean }, flat)
}

/// Scale gradients down so the global L2 norm is at most `max_norm`.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// Full PPO update over one buffer: `update_epochs` passes of
/// `n_minibatches` shuffled minibatches each, with gradient-norm clipping
/// and an Adam step at learning rate `lr` per minibatch.
pub fn ppo_update(
    agent: &mut Agent,
    buf: &mut TrajectoryBuffer,
    cfg: &PpoConfig,
    lr: f64,
    rng: &mut ChaCha8Rng,
) -> Result<LossStats, CliError> {
    let batch = buf.actions.len();
    if cfg.normalize_advantages && batch > 1 {
        let mean = buf.advantages.iter().sum::<f64>() / batch as f64;
        let var =
            buf.advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / batch as f64;
        let std = var.sqrt().max(1e-8);
        for a in buf.advantages.iter_mut() {
            *a = (*a - mean) / std;
        }
    }
    let mut indices: Vec<usize> = (0..batch).collect();
    let mb_size = batch.div_ceil(cfg.n_minibatches);
    let mut last = LossStats::default();
    for _ in 0..cfg.update_epochs {
        // Fisher-Yates with the agent's own stream keeps runs reproducible.
        for i in (1..batch).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        for mb in indices.chunks(mb_size) {
            let (stats, mut grads) = minibatch_loss_and_grads(agent, buf, mb, cfg);
            if !(stats.policy_loss.is_finite() && stats.value_loss.is_finite()) {
                return Err(CliError::Train(format!(
                    "non-finite loss: policy={} value={}",
                    stats.policy_loss, stats.value_loss
                )));
            }
            clip_grad_norm(&mut grads, cfg.max_grad_norm);
            let mut params = agent.params_flat();
            agent.opt.step(&mut params, &grads, lr);
            agent.set_params_flat(&params);
            last = stats;
        }
    }
    Ok(last)
}

/// Independent re-check of an emitted circuit: exact canonical-tableau
/// equality for plain state preparation, the full fault-tolerance verifier
/// otherwise. Every circuit the trainer reports as a success passes this.
pub fn oracle_check(spec: &TaskSpec, c: &Circuit) -> bool {
    match spec.kind {
        TaskKind::Lsp => {
            let got = match c.simulate() {
                Ok(t) => t,
                Err(_) => return false,
            };
            let want = match spec.target.tableau.canonicalize() {
                Ok(t) => t,
                Err(_) => return false,
            };
            got.to_binary_vector() == want.to_binary_vector()
        }
        TaskKind::Vcs | TaskKind::IftLsp => verify_fault_tolerance(c, &spec.target)
            .map(|r| r.is_ft())
            .unwrap_or(false),
    }
}

/// One row of the training-log CSV.
#[derive(Clone, Debug)]
pub struct LogRow {
    pub step: u64,
    pub agent: usize,
    pub mean_return: f64,
    pub min_circuit_size: Option<usize>,
    pub success_rate: f64,
}

/// Render the training log in its external CSV format.
pub fn render_log(rows: &[LogRow]) -> String {
    let mut out = String::from("step,agent,mean_return,min_circuit_size,success_rate\n");
    for r in rows {
        let size = r.min_circuit_size.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.step, r.agent, r.mean_return, size, r.success_rate
        ));
    }
    out
}

/// Outcome of a training run.
pub struct TrainResult {
    pub agents: Vec<Agent>,
    /// Best verified circuit per agent with its agent-chosen gate count.
    pub best: Vec<Option<(Circuit, usize)>>,
    pub log: Vec<LogRow>,
    /// Env steps consumed per agent.
    pub steps_per_agent: u64,
    /// True when at least one verified success circuit was emitted.
    pub converged: bool,
}

impl TrainResult {
    /// Smallest verified circuit across agents (by agent-chosen gate count).
    pub fn overall_best(&self) -> Option<&(Circuit, usize)> {
        self.best.iter().flatten().min_by_key(|(_, size)| *size)
    }
}

struct Runner {
    agent: Agent,
    envs: Vec<Environment>,
    obs: Vec<Vec<f64>>,
    ep_return: Vec<f64>,
    rng: ChaCha8Rng,
    best: Option<(Circuit, usize)>,
    prep_len: usize,
}

fn obs_f64(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| b as f64).collect()
}

impl Runner {
    fn new(
        spec: &TaskSpec,
        cfg: &PpoConfig,
        seed: u64,
        agent_idx: usize,
        init: Option<&Agent>,
    ) -> Result<Self, CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(agent_idx as u64);
        let proto = Environment::new(spec.clone())?;
        let obs_dim = proto.obs_len();
        let hidden = cfg.hidden_for(proto.n_total());
        let hash = fnv1a(spec.action_table.serialize().as_bytes());
        let agent = match init {
            Some(a) => {
                if a.actor.in_dim() != obs_dim || a.n_actions() != spec.action_table.len() {
                    return Err(CliError::Config(String::from(
                        "initial agent does not match the task's observation/action dimensions",
                    )));
                }
                if a.action_hash != hash {
                    return Err(CliError::Config(String::from(
                        "initial agent is bound to a different action table",
                    )));
                }
                a.clone()
            }
            None => Agent::new(obs_dim, spec.action_table.len(), hidden, cfg, hash, &mut rng),
        };
        let prep_len = spec.fixed_prep.as_ref().map(|c| c.gates.len()).unwrap_or(0);
        let mut envs = Vec::with_capacity(cfg.n_envs);
        let mut obs = Vec::with_capacity(cfg.n_envs);
        for _ in 0..cfg.n_envs {
            let mut e = proto.clone();
            obs.push(obs_f64(&e.reset()?));
            envs.push(e);
        }
        Ok(Runner {
            agent,
            envs,
            obs,
            ep_return: vec![0.0; cfg.n_envs],
            rng,
            best: None,
            prep_len,
        })
    }

    /// One rollout + PPO update. Returns the log row for this round.
    fn one_update(&mut self, cfg: &PpoConfig, lr: f64, agent_idx: usize) -> Result<LogRow, CliError> {
        let n_envs = cfg.n_envs;
        let t_max = cfg.rollout_len;
        let obs_dim = self.obs[0].len();
        let batch = n_envs * t_max;
        let mut obs_mat = DMatrix::zeros(batch, obs_dim);
        let mut actions = vec![0usize; batch];
        let mut logps = vec![0.0; batch];
        let mut rewards = vec![0.0; batch];
        let mut dones = vec![false; batch];
        let mut values = vec![0.0; batch];
        let mut finished_returns = Vec::new();
        let mut successes = 0u64;
        let mut episodes = 0u64;

        let mut step_x = DMatrix::zeros(n_envs, obs_dim);
        for t in 0..t_max {
            // One batched policy/value forward per timestep across all envs.
            for e in 0..n_envs {
                for (j, &x) in self.obs[e].iter().enumerate() {
                    step_x[(e, j)] = x;
                }
            }
            let logits = self.agent.actor.forward(&step_x).out;
            let step_values = self.agent.critic.forward(&step_x).out;
            for e in 0..n_envs {
                let k = t * n_envs + e;
                let z: Vec<f64> = logits.row(e).iter().copied().collect();
                let probs = softmax(&z);
                let a = sample_categorical(&probs, &mut self.rng);
                let (logp, v) = (probs[a].ln(), step_values[(e, 0)]);
                for (j, &x) in self.obs[e].iter().enumerate() {
                    obs_mat[(k, j)] = x;
                }
                let (next_obs, reward, done, info) = self.envs[e].step(a)?;
                actions[k] = a;
                logps[k] = logp;
                values[k] = v;
                rewards[k] = reward;
                dones[k] = done;
                self.ep_return[e] += reward;
                if done {
                    episodes += 1;
                    finished_returns.push(self.ep_return[e]);
                    self.ep_return[e] = 0.0;
                    if info.success {
                        let circuit = self.envs[e].circuit().clone();
                        if oracle_check(self.envs[e].spec(), &circuit) {
                            successes += 1;
                            let size = circuit.gates.len() - self.prep_len;
                            if self.best.as_ref().map(|(_, s)| size < *s).unwrap_or(true) {
                                self.best = Some((circuit, size));
                            }
                        }
                    }
                    self.obs[e] = obs_f64(&self.envs[e].reset()?);
                } else {
                    self.obs[e] = obs_f64(&next_obs);
                }
            }
        }
        self.agent.step += batch as u64;

        // Bootstrap values, then per-env GAE over the strided buffers.
        for e in 0..n_envs {
            for (j, &x) in self.obs[e].iter().enumerate() {
                step_x[(e, j)] = x;
            }
        }
        let bootstrap = self.agent.critic.forward(&step_x).out;
        let mut advantages = vec![0.0; batch];
        let mut returns = vec![0.0; batch];
        for e in 0..n_envs {
            let mut r = Vec::with_capacity(t_max);
            let mut v = Vec::with_capacity(t_max + 1);
            let mut d = Vec::with_capacity(t_max);
            for t in 0..t_max {
                let k = t * n_envs + e;
                r.push(rewards[k]);
                v.push(values[k]);
                d.push(dones[k]);
            }
            v.push(bootstrap[(e, 0)]);
            let (adv, ret) = gae(&r, &v, &d, cfg.gamma, cfg.gae_lambda);
            for t in 0..t_max {
                let k = t * n_envs + e;
                advantages[k] = adv[t];
                returns[k] = ret[t];
            }
        }

        let mut buf = TrajectoryBuffer { obs: obs_mat, actions, logp: logps, advantages, returns };
        ppo_update(&mut self.agent, &mut buf, cfg, lr, &mut self.rng)?;

        let mean_return = if finished_returns.is_empty() {
            f64::NAN
        } else {
            finished_returns.iter().sum::<f64>() / finished_returns.len() as f64
        };
        Ok(LogRow {
            step: self.agent.step,
            agent: agent_idx,
            mean_return,
            min_circuit_size: self.best.as_ref().map(|(_, s)| *s),
            success_rate: if episodes == 0 { 0.0 } else { successes as f64 / episodes as f64 },
        })
    }
}

/// Learning rate at a given env-step count: linear anneal to zero over
/// `total_timesteps` (a fine-tuned agent continues from its saved counter).
pub fn lr_at(cfg: &PpoConfig, step: u64) -> f64 {
    if cfg.anneal_lr {
        cfg.learning_rate * (1.0 - step as f64 / cfg.total_timesteps as f64).max(0.0)
    } else {
        cfg.learning_rate
    }
}

/// Train `cfg.n_agents` independent agents on `spec`. Agents advance in
/// lockstep rounds of one update each; stop conditions are evaluated at
/// round boundaries only, so the result is identical for any `threads`.
pub fn train(spec: &TaskSpec, cfg: &PpoConfig, seed: u64, threads: usize) -> Result<TrainResult, CliError> {
    train_from(spec, cfg, seed, threads, None)
}

/// [`train`] with an optional warm-start agent (transfer fine-tuning):
/// every trained agent starts from a copy of `init` instead of a fresh
/// initialization, but keeps its own sampling stream.
pub fn train_from(
    spec: &TaskSpec,
    cfg: &PpoConfig,
    seed: u64,
    threads: usize,
    init: Option<&Agent>,
) -> Result<TrainResult, CliError> {
    cfg.validate().map_err(CliError::Config)?;
    let steps_per_update = (cfg.n_envs * cfg.rollout_len) as u64;
    let n_updates = cfg.total_timesteps.div_ceil(steps_per_update);
    let mut runners: Vec<Runner> = (0..cfg.n_agents)
        .map(|i| Runner::new(spec, cfg, seed, i, init))
        .collect::<Result<_, _>>()?;
    let mut log = Vec::new();
    let threads = threads.max(1).min(cfg.n_agents);
    let base_step = init.map(|a| a.step).unwrap_or(0);
    'rounds: for update in 0..n_updates {
        let lr = lr_at(cfg, base_step + update * steps_per_update);
        let rows: Vec<Result<LogRow, CliError>> = if threads <= 1 {
            runners
                .iter_mut()
                .enumerate()
                .map(|(i, r)| r.one_update(cfg, lr, i))
                .collect()
        } else {
            let chunk = cfg.n_agents.div_ceil(threads);
            let mut rows: Vec<Option<Result<LogRow, CliError>>> =
                (0..cfg.n_agents).map(|_| None).collect();
            std::thread::scope(|s| {
                for (slot_chunk, (offset, runner_chunk)) in rows
                    .chunks_mut(chunk)
                    .zip(runners.chunks_mut(chunk).enumerate().map(|(ci, rc)| (ci * chunk, rc)))
                {
                    s.spawn(move || {
                        for (j, r) in runner_chunk.iter_mut().enumerate() {
                            slot_chunk[j] = Some(r.one_update(cfg, lr, offset + j));
                        }
                    });
                }
            });
            rows.into_iter().map(|r| r.expect("worker filled every slot")).collect()
        };
        for row in rows {
            log.push(row?);
        }
        if let Some(limit) = cfg.stop_at_size {
            if runners.iter().any(|r| r.best.as_ref().map(|(_, s)| *s <= limit).unwrap_or(false)) {
                break 'rounds;
            }
        }
    }
    let steps_per_agent = runners.first().map(|r| r.agent.step).unwrap_or(0);
    let best: Vec<_> = runners.iter().map(|r| r.best.clone()).collect();
    let converged = best.iter().any(|b| b.is_some());
    Ok(TrainResult {
        agents: runners.into_iter().map(|r| r.agent).collect(),
        best,
        log,
        steps_per_agent,
        converged,
    })
}

/// Restrict a trained agent to a subset action table: actor-head rows for
/// removed actions are deleted, everything else (including the step counter
/// driving the LR anneal) is copied. Optimizer moments restart from zero.
pub fn transfer_restrict(
    agent: &Agent,
    old_table: &ActionTable,
    new_table: &ActionTable,
) -> Result<Agent, CliError> {
    let mut keep = Vec::with_capacity(new_table.len());
    for g in new_table.gates() {
        match old_table.index_of(g) {
            Some(i) => keep.push(i),
            None => {
                return Err(CliError::Config(format!(
                    "action {g} is not in the source agent's action table"
                )))
            }
        }
    }
    let mut actor = agent.actor.clone();
    let head = &agent.actor.w[2];
    let mut new_head = DMatrix::zeros(keep.len(), head.ncols());
    let mut new_bias = nalgebra::DVector::zeros(keep.len());
    for (r, &i) in keep.iter().enumerate() {
        new_head.row_mut(r).copy_from(&head.row(i));
        new_bias[r] = agent.actor.b[2][i];
    }
    actor.w[2] = new_head;
    actor.b[2] = new_bias;
    let n = actor.n_params() + agent.critic.n_params();
    Ok(Agent {
        actor,
        critic: agent.critic.clone(),
        opt: Adam::new(n, agent.opt.beta1, agent.opt.beta2, agent.opt.eps),
        step: agent.step,
        action_hash: fnv1a(new_table.serialize().as_bytes()),
    })
}

/// FNV-1a 64-bit hash (action-table fingerprint in the agent file).
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

const AGENT_MAGIC: &[u8; 4] = b"FTAG";
const AGENT_VERSION: u32 = 1;

/// Write the agent to a versioned binary file: magic, version, dimensions,
/// step counter, action-table hash and text, trainer config, then all
/// parameters and optimizer moments as little-endian f64.
pub fn save_agent(
    path: &Path,
    agent: &Agent,
    cfg: &PpoConfig,
    table: &ActionTable,
) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    let mut buf = Vec::new();
    buf.extend_from_slice(AGENT_MAGIC);
    buf.extend_from_slice(&AGENT_VERSION.to_le_bytes());
    let dims = [
        agent.actor.in_dim() as u32,
        agent.actor.hidden_dim() as u32,
        agent.actor.out_dim() as u32,
    ];
    for d in dims {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    buf.extend_from_slice(&agent.step.to_le_bytes());
    buf.extend_from_slice(&agent.opt.t.to_le_bytes());
    buf.extend_from_slice(&agent.action_hash.to_le_bytes());
    let cfg_json = serde_json::to_vec(cfg).expect("config serializes");
    buf.extend_from_slice(&(cfg_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&cfg_json);
    let table_text = table.serialize();
    buf.extend_from_slice(&(table_text.len() as u32).to_le_bytes());
    buf.extend_from_slice(table_text.as_bytes());
    let params = agent.params_flat();
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for v in params.iter().chain(&agent.opt.m).chain(&agent.opt.v) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Inverse of [`save_agent`]; returns the agent, its trainer config, and
/// the serialized action table it was trained against.
pub fn load_agent(path: &Path) -> Result<(Agent, PpoConfig, ActionTable), CliError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], CliError> {
        if pos + n > bytes.len() {
            return Err(CliError::AgentFile(String::from("truncated file")));
        }
        let s = &bytes[pos..pos + n];
        pos += n;
        Ok(s)
    };
    if take(4)? != AGENT_MAGIC {
        return Err(CliError::AgentFile(String::from("bad magic bytes")));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != AGENT_VERSION {
        return Err(CliError::AgentFile(format!("unsupported version {version}")));
    }
    let obs_dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let hidden = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let n_actions = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let step = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let opt_t = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let action_hash = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let cfg_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let cfg: PpoConfig = serde_json::from_slice(take(cfg_len)?)
        .map_err(|e| CliError::AgentFile(format!("bad embedded config: {e}")))?;
    let table_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let table_text = std::str::from_utf8(take(table_len)?)
        .map_err(|_| CliError::AgentFile(String::from("non-utf8 action table")))?
        .to_owned();
    if fnv1a(table_text.as_bytes()) != action_hash {
        return Err(CliError::AgentFile(String::from("action-table hash mismatch")));
    }
    let table = parse_action_table(&table_text)?;
    if table.len() != n_actions {
        return Err(CliError::AgentFile(String::from("action count mismatch")));
    }
    let n_params = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let read_f64s = |n: usize, pos: &mut usize| -> Result<Vec<f64>, CliError> {
        if *pos + 8 * n > bytes.len() {
            return Err(CliError::AgentFile(String::from("truncated parameter block")));
        }
        let out = bytes[*pos..*pos + 8 * n]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        *pos += 8 * n;
        Ok(out)
    };
    let params = read_f64s(n_params, &mut pos)?;
    let m = read_f64s(n_params, &mut pos)?;
    let v = read_f64s(n_params, &mut pos)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut agent = Agent::new(obs_dim, n_actions, hidden, &cfg, action_hash, &mut rng);
    if agent.params_flat().len() != n_params {
        return Err(CliError::AgentFile(String::from("parameter count mismatch")));
    }
    agent.set_params_flat(&params);
    agent.opt = Adam { m, v, t: opt_t, beta1: cfg.adam_beta1, beta2: cfg.adam_beta2, eps: cfg.adam_eps };
    agent.step = step;
    Ok((agent, cfg, table))
}

/// Parse the one-gate-per-line action-table text produced by
/// `ActionTable::serialize`.
pub fn parse_action_table(text: &str) -> Result<ActionTable, CliError> {
    let mut gates = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kind = ftforge_core::GateKind::parse(parts.next().unwrap())?;
        let a: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::AgentFile(format!("bad action line: {line}")))?;
        let g = if kind.arity() == 1 {
            ftforge_core::Gate::one(kind, a)
        } else {
            let b: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::AgentFile(format!("bad action line: {line}")))?;
            ftforge_core::Gate::two(kind, a, b)
        };
        gates.push(g);
    }
    Ok(ActionTable::from_gates(gates)?)
}

/// Flag-escalation driver: train at the starting flag count and, while no
/// verified circuit is found, retry with one more flag qubit up to
/// `n_flag_max`. Returns the flag count used together with its result.
pub fn train_escalating(
    run: &crate::config::RunConfig,
    threads: usize,
) -> Result<(usize, TrainResult), CliError> {
    let seed = run.effective_seed();
    let start = if run.task_kind() == TaskKind::Lsp { 0 } else { run.n_flag };
    let max = run.n_flag_max.unwrap_or(start).max(start);
    let mut last = None;
    for n_flag in start..=max {
        let spec = run.task_spec(n_flag)?;
        let result = train(&spec, &run.ppo, seed, threads)?;
        let converged = result.converged;
        last = Some((n_flag, result));
        if converged {
            break;
        }
    }
    Ok(last.expect("at least one flag count attempted"))
}
