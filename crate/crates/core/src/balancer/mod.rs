//! Learned load balancing: graph-convolutional feature extraction over the
//! cluster topology, a deterministic-policy agent emitting simplex routing
//! actions, and the reward shaping that ties them to simulator metrics.
//!
//! Submodule [`agent`] holds the actor/critic training machinery; this
//! module holds the pieces that are useful standalone: adjacency
//! normalisation, the GCN stack, state assembly, actions, and rewards.

pub mod agent;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numgrad::{Activation, Tape, TapeTensor, Tensor};
use crate::rng::substream;
use crate::sim::MetricsSample;

pub use agent::{CheckpointError, DdpgAgent, DdpgConfig, ReplayBuffer, TrainOutcome, Transition};

#[derive(Debug, Error)]
pub enum BalancerError {
    #[error("invalid adjacency: {0}")]
    Adjacency(String),
    #[error("invalid balancer configuration: {0}")]
    Config(String),
}

/// Symmetrically normalises an adjacency matrix with self-loops added:
/// entry (i, j) of the result is `(A + I)_ij / sqrt(d_i d_j)` where `d` are
/// the self-loop-augmented degrees.
pub fn normalize_adjacency(a: &[Vec<u8>]) -> Result<Tensor, BalancerError> {
    let n = a.len();
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(BalancerError::Adjacency(format!(
                "row {i} has {} entries for {n} nodes",
                row.len()
            )));
        }
        for (j, &v) in row.iter().enumerate() {
            if v > 1 {
                return Err(BalancerError::Adjacency(format!(
                    "entry ({i}, {j}) is {v}; must be 0 or 1"
                )));
            }
            if a[j][i] != v {
                return Err(BalancerError::Adjacency(format!(
                    "asymmetric at ({i}, {j}): {v} vs {}",
                    a[j][i]
                )));
            }
            if i == j && v != 0 {
                return Err(BalancerError::Adjacency(format!("nonzero diagonal at {i}")));
            }
        }
    }
    let degrees: Vec<f64> = (0..n)
        .map(|i| 1.0 + a[i].iter().map(|&v| v as f64).sum::<f64>())
        .collect();
    let mut out = Tensor::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let tilde = if i == j { 1.0 } else { a[i][j] as f64 };
            if tilde != 0.0 {
                out.set(i, j, tilde / (degrees[i] * degrees[j]).sqrt());
            }
        }
    }
    Ok(out)
}

/// One graph-convolution layer: `H ← σ(Â H W)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnLayer {
    pub weight: Tensor,
    pub activation: Activation,
}

/// A stack of graph-convolution layers sharing one normalised adjacency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnStack {
    pub layers: Vec<GcnLayer>,
}

impl GcnStack {
    /// Xavier-initialised stack: `depth` layers from `in_features` to
    /// `width`.
    pub fn new(
        in_features: usize,
        width: usize,
        depth: usize,
        activation: Activation,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        assert!(depth >= 1, "a GCN stack needs at least one layer");
        let mut layers = Vec::with_capacity(depth);
        let mut dim = in_features;
        for _ in 0..depth {
            let linear = crate::numgrad::nn::Linear::xavier(dim, width, rng);
            layers.push(GcnLayer { weight: linear.weight, activation });
            dim = width;
        }
        GcnStack { layers }
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("stack nonempty").weight.cols()
    }

    /// Plain (untaped) propagation.
    pub fn forward(&self, x: &Tensor, a_hat: &Tensor) -> Tensor {
        let mut h = x.clone();
        for layer in &self.layers {
            h = a_hat.matmul(&h).matmul(&layer.weight).activation(layer.activation);
        }
        h
    }

    /// Records the stack's weights on a tape in layer order.
    pub fn insert(&self, tape: &mut Tape, trainable: bool) -> Vec<TapeTensor> {
        self.layers
            .iter()
            .map(|l| if trainable { tape.param(&l.weight) } else { tape.constant(&l.weight) })
            .collect()
    }

    /// Taped propagation through previously inserted weight handles.
    pub fn forward_given(
        &self,
        tape: &mut Tape,
        weights: &[TapeTensor],
        x: TapeTensor,
        a_hat: TapeTensor,
    ) -> TapeTensor {
        assert_eq!(weights.len(), self.layers.len(), "weight handle count mismatch");
        let mut h = x;
        for (layer, &w) in self.layers.iter().zip(weights) {
            let mixed = tape.matmul(a_hat, h);
            let projected = tape.matmul(mixed, w);
            h = tape.activation(projected, layer.activation);
        }
        h
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().map(|l| &mut l.weight).collect()
    }

    pub fn param_values(&self) -> Vec<Tensor> {
        self.layers.iter().map(|l| l.weight.clone()).collect()
    }

    /// Polyak-averages another stack's weights into this one.
    pub fn soft_update_from(&mut self, source: &GcnStack, tau: f64) {
        assert_eq!(self.layers.len(), source.layers.len());
        for (dst, src) in self.layers.iter_mut().zip(&source.layers) {
            crate::numgrad::nn::soft_update(&mut dst.weight, &src.weight, tau);
        }
    }
}

/// Snapshot-derived agent observation.
///
/// `node_features` is the N×3 matrix of (load, utilization, units) rows,
/// each column scaled by its running maximum; `forecast_scaled` is the
/// demand forecast under its own running maximum. Raw values are kept
/// alongside for reward computation and inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub loads: Vec<f64>,
    pub utilizations: Vec<f64>,
    pub forecast: Vec<f64>,
    pub node_features: Tensor,
    pub forecast_scaled: Vec<f64>,
}

impl StateVector {
    pub fn node_count(&self) -> usize {
        self.loads.len()
    }

    pub fn horizon(&self) -> usize {
        self.forecast.len()
    }

    pub fn is_well_formed(&self) -> bool {
        let n = self.loads.len();
        self.utilizations.len() == n
            && self.node_features.shape() == (n, 3)
            && self.forecast_scaled.len() == self.forecast.len()
            && self.loads.iter().all(|v| v.is_finite())
            && self.utilizations.iter().all(|v| (0.0..=1.0).contains(v))
            && self.forecast.iter().all(|v| v.is_finite())
            && self.node_features.all_finite()
    }
}

/// Assembles [`StateVector`]s from metrics samples, maintaining the running
/// maxima used for feature scaling across a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateBuilder {
    max_load: f64,
    max_utilization: f64,
    max_units: f64,
    max_forecast: f64,
}

impl StateBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the state for one decision point. `forecast` must match the
    /// configured horizon of whoever consumes the state; the builder only
    /// requires it to be nonempty and finite.
    pub fn build(&mut self, sample: &MetricsSample, forecast: &[f64]) -> StateVector {
        let n = sample.loads.len();
        let loads: Vec<f64> = sample.loads.iter().map(|&l| l as f64).collect();
        let units: Vec<f64> = sample.units.iter().map(|&u| u as f64).collect();
        for &l in &loads {
            self.max_load = self.max_load.max(l);
        }
        for &u in &sample.utilization {
            self.max_utilization = self.max_utilization.max(u);
        }
        for &u in &units {
            self.max_units = self.max_units.max(u);
        }
        for &f in forecast {
            self.max_forecast = self.max_forecast.max(f);
        }
        let scale = |v: f64, max: f64| if max > 0.0 { v / max } else { 0.0 };
        let mut features = Tensor::zeros(n, 3);
        for i in 0..n {
            features.set(i, 0, scale(loads[i], self.max_load));
            features.set(i, 1, scale(sample.utilization[i], self.max_utilization));
            features.set(i, 2, scale(units[i], self.max_units));
        }
        StateVector {
            loads,
            utilizations: sample.utilization.clone(),
            forecast: forecast.to_vec(),
            node_features: features,
            forecast_scaled: forecast.iter().map(|&f| scale(f, self.max_forecast)).collect(),
        }
    }
}

/// Routing proportions over nodes; always a probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionVector {
    pub fractions: Vec<f64>,
}

impl ActionVector {
    /// Wraps raw fractions, checking the simplex contract.
    pub fn new(fractions: Vec<f64>) -> Self {
        let action = ActionVector { fractions };
        action.assert_simplex();
        action
    }

    pub fn assert_simplex(&self) {
        assert!(
            self.fractions.iter().all(|&a| a >= 0.0),
            "action has a negative fraction: {:?}",
            self.fractions
        );
        let sum: f64 = self.fractions.iter().sum();
        assert!(
            (sum - 1.0).abs() <= 1e-9,
            "action fractions sum to {sum}, not 1"
        );
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        ActionVector { fractions: vec![1.0 / n as f64; n] }
    }
}

/// Which statistic of per-node utilization enters the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilizationStatistic {
    /// Population standard deviation across nodes — penalises imbalance.
    ImbalanceStddev,
    /// Plain mean utilization.
    Mean,
}

fn default_alpha() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.0
}
fn default_statistic() -> UtilizationStatistic {
    UtilizationStatistic::ImbalanceStddev
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardConfig {
    /// Weight on mean response time.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Weight on the utilization statistic.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_statistic")]
    pub utilization_statistic: UtilizationStatistic,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            alpha: default_alpha(),
            beta: default_beta(),
            utilization_statistic: default_statistic(),
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), BalancerError> {
        if !(self.alpha >= 0.0) || !(self.beta >= 0.0) {
            return Err(BalancerError::Config(format!(
                "reward weights must be nonnegative, got alpha {} beta {}",
                self.alpha, self.beta
            )));
        }
        if self.alpha + self.beta <= 0.0 {
            return Err(BalancerError::Config(
                "at least one reward weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Population standard deviation (divides by N, not N−1).
pub fn population_stddev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// The step reward: the weighted negative of mean response time and the
/// configured utilization statistic. Higher is better; a perfectly balanced,
/// instant-response step scores 0.
pub fn compute_reward(mean_response_time: f64, utilizations: &[f64], cfg: &RewardConfig) -> f64 {
    debug_assert!(mean_response_time >= 0.0, "response time cannot be negative");
    let stat = match cfg.utilization_statistic {
        UtilizationStatistic::ImbalanceStddev => population_stddev(utilizations),
        UtilizationStatistic::Mean => {
            if utilizations.is_empty() {
                0.0
            } else {
                utilizations.iter().sum::<f64>() / utilizations.len() as f64
            }
        }
    };
    -(cfg.alpha * mean_response_time + cfg.beta * stat)
}

/// Deterministically initialised GCN for agent construction.
pub(crate) fn seeded_gcn(
    in_features: usize,
    width: usize,
    depth: usize,
    seed: u64,
) -> GcnStack {
    let mut rng = substream(seed, "gcn-init");
    GcnStack::new(in_features, width, depth, Activation::Relu, &mut rng)
}
