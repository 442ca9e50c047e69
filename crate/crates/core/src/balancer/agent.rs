//! Deterministic-policy actor/critic agent over GCN features, with target
//! networks, experience replay, exploration-noise scheduling, and JSON
//! checkpointing.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numgrad::nn::{Adam, Mlp};
use crate::numgrad::{Activation, Tape, Tensor};
use crate::rng::substream;

use super::{normalize_adjacency, ActionVector, BalancerError, GcnStack, StateVector};

fn default_gamma() -> f64 {
    0.95
}
fn default_tau() -> f64 {
    0.01
}
fn default_replay_capacity() -> usize {
    50_000
}
fn default_batch_size() -> usize {
    64
}
fn default_actor_lr() -> f64 {
    1e-4
}
fn default_critic_lr() -> f64 {
    1e-3
}
fn default_gcn_depth() -> usize {
    2
}
fn default_gcn_width() -> usize {
    32
}
fn default_hidden() -> Vec<usize> {
    vec![64]
}
fn default_sigma_start() -> f64 {
    0.3
}
fn default_sigma_end() -> f64 {
    0.02
}
fn default_noise_decay_steps() -> u64 {
    2_000
}

/// Hyperparameters for [`DdpgAgent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdpgConfig {
    /// Discount factor for bootstrapped targets.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Polyak averaging rate for target networks; 1 copies outright.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_replay_capacity")]
    pub replay_capacity: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_actor_lr")]
    pub actor_lr: f64,
    #[serde(default = "default_critic_lr")]
    pub critic_lr: f64,
    #[serde(default = "default_gcn_depth")]
    pub gcn_depth: usize,
    #[serde(default = "default_gcn_width")]
    pub gcn_width: usize,
    #[serde(default = "default_hidden")]
    pub actor_hidden: Vec<usize>,
    #[serde(default = "default_hidden")]
    pub critic_hidden: Vec<usize>,
    /// Exploration-noise standard deviation at step 0 …
    #[serde(default = "default_sigma_start")]
    pub noise_sigma_start: f64,
    /// … decaying linearly to this value …
    #[serde(default = "default_sigma_end")]
    pub noise_sigma_end: f64,
    /// … over this many exploration actions.
    #[serde(default = "default_noise_decay_steps")]
    pub noise_decay_steps: u64,
    /// When true, the bootstrap target evaluates the target actor on the
    /// *current* state instead of the successor state, so the target value
    /// becomes `r + γ·Q'(s', μ'(s))`. Off by default, which gives the
    /// conventional `r + γ·Q'(s', μ'(s'))`.
    #[serde(default)]
    pub target_action_from_current_state: bool,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        DdpgConfig {
            gamma: default_gamma(),
            tau: default_tau(),
            replay_capacity: default_replay_capacity(),
            batch_size: default_batch_size(),
            actor_lr: default_actor_lr(),
            critic_lr: default_critic_lr(),
            gcn_depth: default_gcn_depth(),
            gcn_width: default_gcn_width(),
            actor_hidden: default_hidden(),
            critic_hidden: default_hidden(),
            noise_sigma_start: default_sigma_start(),
            noise_sigma_end: default_sigma_end(),
            noise_decay_steps: default_noise_decay_steps(),
            target_action_from_current_state: false,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), BalancerError> {
        let err = |msg: String| Err(BalancerError::Config(msg));
        if !(0.0..1.0).contains(&self.gamma) {
            return err(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return err(format!("tau must be in (0, 1], got {}", self.tau));
        }
        if self.batch_size == 0 {
            return err("batch_size must be positive".into());
        }
        if self.replay_capacity < self.batch_size {
            return err(format!(
                "replay_capacity {} is smaller than batch_size {}",
                self.replay_capacity, self.batch_size
            ));
        }
        if !(self.actor_lr > 0.0) || !(self.critic_lr > 0.0) {
            return err(format!(
                "learning rates must be positive, got actor {} critic {}",
                self.actor_lr, self.critic_lr
            ));
        }
        if self.gcn_depth == 0 || self.gcn_width == 0 {
            return err(format!(
                "GCN shape must be nonzero, got depth {} width {}",
                self.gcn_depth, self.gcn_width
            ));
        }
        if !(self.noise_sigma_start >= self.noise_sigma_end && self.noise_sigma_end >= 0.0) {
            return err(format!(
                "noise schedule must satisfy start >= end >= 0, got {} -> {}",
                self.noise_sigma_start, self.noise_sigma_end
            ));
        }
        if self.noise_decay_steps == 0 {
            return err("noise_decay_steps must be positive".into());
        }
        Ok(())
    }
}

/// One environment step stored for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: StateVector,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: StateVector,
}

/// Fixed-capacity ring buffer: once full, new entries overwrite the oldest.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    next: usize,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { items: Vec::new(), next: 0, capacity }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    fn sample<'a>(&'a self, batch: usize, rng: &mut ChaCha8Rng) -> Vec<&'a Transition> {
        (0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}

/// Result of one training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainOutcome {
    /// Both networks updated.
    Stepped { critic_loss: f64, actor_objective: f64 },
    /// The replay buffer does not yet hold a full batch; nothing changed.
    SkippedReplayUnderfull { have: usize, need: usize },
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint encoding: {0}")]
    Json(#[from] serde_json::Error),
    #[error("checkpoint rejected: {0}")]
    Invalid(String),
}

/// Serializable RNG position so restored runs continue the exact stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RngState {
    seed: [u8; 32],
    stream: u64,
    word_pos: u128,
}

impl RngState {
    fn capture(rng: &ChaCha8Rng) -> Self {
        RngState { seed: rng.get_seed(), stream: rng.get_stream(), word_pos: rng.get_word_pos() }
    }

    fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    config: DdpgConfig,
    n_nodes: usize,
    horizon: usize,
    a_hat: Tensor,
    gcn: GcnStack,
    gcn_target: GcnStack,
    actor: Mlp,
    actor_target: Mlp,
    critic: Mlp,
    critic_target: Mlp,
    gcn_opt: Adam,
    actor_opt: Adam,
    critic_opt: Adam,
    noise_rng: RngState,
    batch_rng: RngState,
    trained_steps: u64,
    exploration_steps: u64,
}

/// Graph-aware deterministic-policy agent.
///
/// The actor consumes the flattened GCN embedding of the node-feature matrix
/// concatenated with the scaled demand forecast, and emits one logit per
/// node; routing fractions are the softmax of those logits. The critic
/// scores (features, action) pairs. Separate target copies of all three
/// networks (GCN included) provide the bootstrap values and are
/// Polyak-averaged toward the online networks after every training step.
#[derive(Debug, Clone)]
pub struct DdpgAgent {
    config: DdpgConfig,
    n_nodes: usize,
    horizon: usize,
    a_hat: Tensor,
    gcn: GcnStack,
    gcn_target: GcnStack,
    actor: Mlp,
    actor_target: Mlp,
    critic: Mlp,
    critic_target: Mlp,
    gcn_opt: Adam,
    actor_opt: Adam,
    critic_opt: Adam,
    replay: ReplayBuffer,
    noise_rng: ChaCha8Rng,
    batch_rng: ChaCha8Rng,
    trained_steps: u64,
    exploration_steps: u64,
}

impl DdpgAgent {
    pub fn new(
        n_nodes: usize,
        horizon: usize,
        adjacency: &[Vec<u8>],
        config: DdpgConfig,
        seed: u64,
    ) -> Result<Self, BalancerError> {
        config.validate()?;
        if n_nodes == 0 {
            return Err(BalancerError::Config("need at least one node".into()));
        }
        if adjacency.len() != n_nodes {
            return Err(BalancerError::Config(format!(
                "adjacency is {}x{} but the cluster has {n_nodes} nodes",
                adjacency.len(),
                adjacency.first().map_or(0, Vec::len),
            )));
        }
        let a_hat = normalize_adjacency(adjacency)?;
        let gcn = super::seeded_gcn(3, config.gcn_width, config.gcn_depth, seed);
        let feature_dim = n_nodes * config.gcn_width + horizon;

        let mut actor_sizes = vec![feature_dim];
        actor_sizes.extend(&config.actor_hidden);
        actor_sizes.push(n_nodes);
        let mut critic_sizes = vec![feature_dim + n_nodes];
        critic_sizes.extend(&config.critic_hidden);
        critic_sizes.push(1);

        let mut init_rng = substream(seed, "ddpg-init");
        let actor =
            Mlp::new(&actor_sizes, Activation::Relu, Activation::Identity, &mut init_rng);
        let critic =
            Mlp::new(&critic_sizes, Activation::Relu, Activation::Identity, &mut init_rng);

        Ok(DdpgAgent {
            gcn_target: gcn.clone(),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            gcn_opt: Adam::new(config.actor_lr),
            actor_opt: Adam::new(config.actor_lr),
            critic_opt: Adam::new(config.critic_lr),
            replay: ReplayBuffer::new(config.replay_capacity),
            noise_rng: substream(seed, "ddpg-noise"),
            batch_rng: substream(seed, "ddpg-batch"),
            trained_steps: 0,
            exploration_steps: 0,
            config,
            n_nodes,
            horizon,
            a_hat,
            gcn,
            actor,
            critic,
        })
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.config
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn trained_steps(&self) -> u64 {
        self.trained_steps
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn critic_target(&self) -> &Mlp {
        &self.critic_target
    }

    pub fn gcn(&self) -> &GcnStack {
        &self.gcn
    }

    pub fn gcn_target(&self) -> &GcnStack {
        &self.gcn_target
    }

    /// Zeroes the actor (online and target): the policy becomes exactly
    /// uniform over nodes. Useful as an ablation starting point.
    pub fn reset_actor_to_zero(&mut self) {
        for p in self.actor.params_mut() {
            *p = Tensor::zeros(p.rows(), p.cols());
        }
        self.actor_target = self.actor.clone();
    }

    /// Zeroes the critic (online and target): every (state, action) pair
    /// scores 0. Useful for isolating target contributions in tests.
    pub fn reset_critic_to_zero(&mut self) {
        for p in self.critic.params_mut() {
            *p = Tensor::zeros(p.rows(), p.cols());
        }
        self.critic_target = self.critic.clone();
    }

    fn check_state(&self, state: &StateVector) {
        assert_eq!(
            state.node_count(),
            self.n_nodes,
            "state has {} nodes, agent expects {}",
            state.node_count(),
            self.n_nodes
        );
        assert_eq!(
            state.horizon(),
            self.horizon,
            "state forecast has {} entries, agent expects {}",
            state.horizon(),
            self.horizon
        );
    }

    /// Flattened GCN embedding concatenated with the scaled forecast, using
    /// the given stack and adjacency. Row vector of width
    /// `n_nodes * gcn_width + horizon`.
    fn features_with(&self, stack: &GcnStack, state: &StateVector, a_hat: &Tensor) -> Tensor {
        let h = stack.forward(&state.node_features, a_hat);
        let mut data = Vec::with_capacity(h.rows() * h.cols() + state.forecast_scaled.len());
        data.extend_from_slice(h.data());
        data.extend_from_slice(&state.forecast_scaled);
        Tensor::row(&data)
    }

    fn noise_sigma(&self) -> f64 {
        let c = &self.config;
        let frac =
            (self.exploration_steps as f64 / c.noise_decay_steps as f64).min(1.0);
        c.noise_sigma_start + (c.noise_sigma_end - c.noise_sigma_start) * frac
    }

    /// The policy: routing fractions for one state. With `explore` set,
    /// Gaussian noise at the scheduled sigma perturbs the logits before the
    /// softmax, so the output still lies on the simplex.
    pub fn actor_act(&mut self, state: &StateVector, explore: bool) -> ActionVector {
        self.check_state(state);
        let features = self.features_with(&self.gcn, state, &self.a_hat);
        let mut logits = self.actor.forward(&features);
        if explore {
            let sigma = self.noise_sigma();
            for v in logits.data_mut() {
                let draw: f64 = self.noise_rng.sample(StandardNormal);
                *v += sigma * draw;
            }
            self.exploration_steps += 1;
        }
        ActionVector::new(logits.softmax_rows().data().to_vec())
    }

    /// Decentralized inference: every node evaluates the shared policy on
    /// its own rotated view (itself first, then the others in cyclic
    /// order), the resulting fractions are rotated back into global node
    /// order, averaged across nodes, and re-normalized. Returns the
    /// per-node proposals and the fused action.
    pub fn shared_policy_act(&self, state: &StateVector) -> (Vec<ActionVector>, ActionVector) {
        self.check_state(state);
        let n = self.n_nodes;
        let mut per_node = Vec::with_capacity(n);
        let mut fused = vec![0.0; n];
        for k in 0..n {
            let perm: Vec<usize> = (0..n).map(|i| (k + i) % n).collect();
            let mut x = Tensor::zeros(n, 3);
            let mut a_hat = Tensor::zeros(n, n);
            for i in 0..n {
                for c in 0..3 {
                    x.set(i, c, state.node_features.get(perm[i], c));
                }
                for j in 0..n {
                    a_hat.set(i, j, self.a_hat.get(perm[i], perm[j]));
                }
            }
            let rotated = StateVector { node_features: x, ..state.clone() };
            let features = self.features_with(&self.gcn, &rotated, &a_hat);
            let local = self.actor.forward(&features).softmax_rows();
            let mut global = vec![0.0; n];
            for i in 0..n {
                global[perm[i]] = local.get(0, i);
            }
            for (acc, &g) in fused.iter_mut().zip(&global) {
                *acc += g;
            }
            per_node.push(ActionVector::new(global));
        }
        let total: f64 = fused.iter().sum();
        for v in &mut fused {
            *v /= total;
        }
        (per_node, ActionVector::new(fused))
    }

    pub fn push_transition(&mut self, t: Transition) {
        self.check_state(&t.state);
        self.check_state(&t.next_state);
        assert_eq!(t.action.len(), self.n_nodes, "action length mismatch");
        self.replay.push(t);
    }

    /// Bootstrap value for one transition, computed entirely with the
    /// target networks: `r + γ·Q'(s', μ'(·))` where the target actor sees
    /// s' (default) or s (per config).
    fn bootstrap_target(&self, t: &Transition) -> f64 {
        let feat_next = self.features_with(&self.gcn_target, &t.next_state, &self.a_hat);
        let actor_input = if self.config.target_action_from_current_state {
            self.features_with(&self.gcn_target, &t.state, &self.a_hat)
        } else {
            feat_next.clone()
        };
        let action = self.actor_target.forward(&actor_input).softmax_rows();
        let mut row = Vec::with_capacity(feat_next.cols() + self.n_nodes);
        row.extend_from_slice(feat_next.data());
        row.extend_from_slice(action.data());
        let q_next = self.critic_target.forward(&Tensor::row(&row)).scalar();
        t.reward + self.config.gamma * q_next
    }

    /// Assembles the critic's training design for a batch: one input row of
    /// `[features(s), a]` per transition and the matching column of
    /// bootstrap targets. Feature embeddings use the online GCN but enter
    /// the critic step as constants.
    pub fn critic_design(&self, batch: &[&Transition]) -> (Tensor, Tensor) {
        assert!(!batch.is_empty(), "critic TD loss needs a nonempty batch");
        let width = self.n_nodes * self.config.gcn_width + self.horizon + self.n_nodes;
        let mut inputs = Vec::with_capacity(batch.len() * width);
        let mut targets = Vec::with_capacity(batch.len());
        for t in batch {
            self.check_state(&t.state);
            let features = self.features_with(&self.gcn, &t.state, &self.a_hat);
            inputs.extend_from_slice(features.data());
            inputs.extend_from_slice(&t.action);
            targets.push(self.bootstrap_target(t));
        }
        (
            Tensor::from_vec(batch.len(), width, inputs),
            Tensor::from_vec(batch.len(), 1, targets),
        )
    }

    /// Mean squared TD error of the online critic on a batch, against
    /// targets produced by the target networks.
    pub fn critic_td_loss(&self, batch: &[&Transition]) -> f64 {
        let (inputs, targets) = self.critic_design(batch);
        let pred = self.critic.forward(&inputs);
        let n = targets.rows() as f64;
        pred.data()
            .iter()
            .zip(targets.data())
            .map(|(p, y)| (p - y).powi(2))
            .sum::<f64>()
            / n
    }

    /// One training step: a critic descent step on the TD loss (gradients
    /// reach only the critic), an actor/GCN ascent step on the mean critic
    /// score of on-policy actions (critic held constant), then Polyak
    /// updates of all three target networks. Returns the losses, or a skip
    /// signal while the replay buffer is underfull.
    pub fn train_step(&mut self) -> TrainOutcome {
        let need = self.config.batch_size;
        if self.replay.len() < need {
            return TrainOutcome::SkippedReplayUnderfull { have: self.replay.len(), need };
        }
        let batch: Vec<Transition> = {
            let refs = self.replay.sample(need, &mut self.batch_rng);
            refs.into_iter().cloned().collect()
        };
        let refs: Vec<&Transition> = batch.iter().collect();

        // Critic phase: features and stored actions are constants; only the
        // critic's parameters are on the tape as trainables.
        let (inputs, targets) = self.critic_design(&refs);
        let critic_loss = {
            let mut tape = Tape::new();
            let params = self.critic.insert(&mut tape, true);
            let x = tape.constant(&inputs);
            let pred = self.critic.forward_given(&mut tape, &params, x);
            let y = tape.constant(&targets);
            let loss = tape.mse(pred, y);
            let grads = tape.backward(loss);
            let grad_tensors: Vec<Tensor> =
                params.iter().map(|&p| grads.for_param(p)).collect();
            self.critic_opt.step(&mut self.critic.params_mut(), &grad_tensors);
            tape.value(loss).scalar()
        };

        // Actor phase: gradients of the mean critic score flow through the
        // freshly scored actions into the actor and the GCN; the critic's
        // parameters are constants here.
        let actor_objective = {
            let mut tape = Tape::new();
            let gcn_ws = self.gcn.insert(&mut tape, true);
            let actor_ps = self.actor.insert(&mut tape, true);
            let critic_ps = self.critic.insert(&mut tape, false);
            let a_hat = tape.constant(&self.a_hat);
            let mut rows = Vec::with_capacity(batch.len());
            for t in &batch {
                let x = tape.constant(&t.state.node_features);
                let h = self.gcn.forward_given(&mut tape, &gcn_ws, x, a_hat);
                let flat = tape.flatten_row(h);
                let fc = tape.constant(&Tensor::row(&t.state.forecast_scaled));
                rows.push(tape.concat_cols(flat, fc));
            }
            let features = tape.stack_rows(&rows);
            let logits = self.actor.forward_given(&mut tape, &actor_ps, features);
            let actions = tape.softmax_rows(logits);
            let critic_in = tape.concat_cols(features, actions);
            let qs = self.critic.forward_given(&mut tape, &critic_ps, critic_in);
            let mean_q = tape.mean(qs);
            let loss = tape.scale(mean_q, -1.0);
            let grads = tape.backward(loss);

            let gcn_grads: Vec<Tensor> = gcn_ws.iter().map(|&p| grads.for_param(p)).collect();
            self.gcn_opt.step(&mut self.gcn.params_mut(), &gcn_grads);
            let actor_grads: Vec<Tensor> =
                actor_ps.iter().map(|&p| grads.for_param(p)).collect();
            self.actor_opt.step(&mut self.actor.params_mut(), &actor_grads);
            tape.value(mean_q).scalar()
        };

        let tau = self.config.tau;
        self.actor_target.soft_update_from(&self.actor, tau);
        self.critic_target.soft_update_from(&self.critic, tau);
        self.gcn_target.soft_update_from(&self.gcn, tau);
        self.trained_steps += 1;

        TrainOutcome::Stepped { critic_loss, actor_objective }
    }

    pub fn to_checkpoint_json(&self) -> Result<String, CheckpointError> {
        let cp = Checkpoint {
            config: self.config.clone(),
            n_nodes: self.n_nodes,
            horizon: self.horizon,
            a_hat: self.a_hat.clone(),
            gcn: self.gcn.clone(),
            gcn_target: self.gcn_target.clone(),
            actor: self.actor.clone(),
            actor_target: self.actor_target.clone(),
            critic: self.critic.clone(),
            critic_target: self.critic_target.clone(),
            gcn_opt: self.gcn_opt.clone(),
            actor_opt: self.actor_opt.clone(),
            critic_opt: self.critic_opt.clone(),
            noise_rng: RngState::capture(&self.noise_rng),
            batch_rng: RngState::capture(&self.batch_rng),
            trained_steps: self.trained_steps,
            exploration_steps: self.exploration_steps,
        };
        Ok(serde_json::to_string_pretty(&cp)?)
    }

    /// Restores an agent from checkpoint JSON. The replay buffer is not
    /// persisted: training resumes with an empty buffer, while policy
    /// outputs and RNG positions match the saved run exactly.
    pub fn from_checkpoint_json(json: &str) -> Result<Self, CheckpointError> {
        let cp: Checkpoint = serde_json::from_str(json)?;
        cp.config.validate().map_err(|e| CheckpointError::Invalid(e.to_string()))?;
        if cp.a_hat.shape() != (cp.n_nodes, cp.n_nodes) {
            return Err(CheckpointError::Invalid(format!(
                "adjacency shape {:?} does not match {} nodes",
                cp.a_hat.shape(),
                cp.n_nodes
            )));
        }
        Ok(DdpgAgent {
            replay: ReplayBuffer::new(cp.config.replay_capacity),
            noise_rng: cp.noise_rng.restore(),
            batch_rng: cp.batch_rng.restore(),
            config: cp.config,
            n_nodes: cp.n_nodes,
            horizon: cp.horizon,
            a_hat: cp.a_hat,
            gcn: cp.gcn,
            gcn_target: cp.gcn_target,
            actor: cp.actor,
            actor_target: cp.actor_target,
            critic: cp.critic,
            critic_target: cp.critic_target,
            gcn_opt: cp.gcn_opt,
            actor_opt: cp.actor_opt,
            critic_opt: cp.critic_opt,
            trained_steps: cp.trained_steps,
            exploration_steps: cp.exploration_steps,
        })
    }

    pub fn save_checkpoint(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_checkpoint_json()?)?;
        Ok(())
    }

    pub fn load_checkpoint(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_checkpoint_json(&std::fs::read_to_string(path)?)
    }
}
