//! Small neural-network building blocks on top of the tape: dense layers,
//! multi-layer perceptrons, Xavier initialisation, Adam, and soft target
//! updates.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tape::{Tape, TapeTensor};
use super::tensor::{Activation, Tensor};

/// Dense layer: `y = x W + b` with `W` of shape in×out and `b` of shape
/// 1×out (broadcast over batch rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Linear {
    /// Xavier–Glorot uniform initialisation over ±sqrt(6 / (fan_in + fan_out)),
    /// bias zero.
    pub fn xavier(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        use rand::Rng;
        let bound = (6.0 / (in_features + out_features) as f64).sqrt();
        let mut data = Vec::with_capacity(in_features * out_features);
        for _ in 0..in_features * out_features {
            data.push(rng.random_range(-bound..bound));
        }
        Linear {
            weight: Tensor::from_vec(in_features, out_features, data),
            bias: Tensor::zeros(1, out_features),
        }
    }

    /// All-zero layer; useful where the first output must be exactly neutral
    /// (for example a uniform softmax before any training).
    pub fn zeros(in_features: usize, out_features: usize) -> Self {
        Linear {
            weight: Tensor::zeros(in_features, out_features),
            bias: Tensor::zeros(1, out_features),
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.rows()
    }

    pub fn out_features(&self) -> usize {
        self.weight.cols()
    }
}

/// Multi-layer perceptron with a shared hidden activation and a separate
/// output activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl Mlp {
    /// Builds an MLP over `sizes` (input, hidden..., output) with Xavier
    /// initialisation.
    pub fn new(
        sizes: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| Linear::xavier(w[0], w[1], rng))
            .collect();
        Mlp { layers, hidden_activation, output_activation }
    }

    /// Like [`Mlp::new`] but every weight and bias starts at zero.
    pub fn zeros(sizes: &[usize], hidden_activation: Activation, output_activation: Activation) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        let layers = sizes.windows(2).map(|w| Linear::zeros(w[0], w[1])).collect();
        Mlp { layers, hidden_activation, output_activation }
    }

    pub fn input_size(&self) -> usize {
        self.layers.first().expect("MLP has layers").in_features()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().expect("MLP has layers").out_features()
    }

    /// Plain forward pass without recording.
    pub fn forward(&self, x: &Tensor) -> Tensor {
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let act = if i == last { self.output_activation } else { self.hidden_activation };
            h = h.matmul(&layer.weight).add(&layer.bias).activation(act);
        }
        h
    }

    /// Records the current parameter values on `tape` in the flat order
    /// `[W0, b0, W1, b1, ...]`, as trainable leaves or constants.
    pub fn insert(&self, tape: &mut Tape, trainable: bool) -> Vec<TapeTensor> {
        let mut handles = Vec::with_capacity(self.layers.len() * 2);
        for layer in &self.layers {
            if trainable {
                handles.push(tape.param(&layer.weight));
                handles.push(tape.param(&layer.bias));
            } else {
                handles.push(tape.constant(&layer.weight));
                handles.push(tape.constant(&layer.bias));
            }
        }
        handles
    }

    /// Forward pass through previously recorded parameter handles (the flat
    /// order produced by [`Mlp::insert`]). The handles may carry values other
    /// than `self`'s — this is what finite-difference checking relies on.
    pub fn forward_given(&self, tape: &mut Tape, params: &[TapeTensor], x: TapeTensor) -> TapeTensor {
        assert_eq!(
            params.len(),
            self.layers.len() * 2,
            "expected {} parameter handles, got {}",
            self.layers.len() * 2,
            params.len()
        );
        let mut h = x;
        let last = self.layers.len() - 1;
        for i in 0..self.layers.len() {
            let act = if i == last { self.output_activation } else { self.hidden_activation };
            let z = tape.matmul(h, params[2 * i]);
            let z = tape.add(z, params[2 * i + 1]);
            h = tape.activation(z, act);
        }
        h
    }

    /// Parameter values in the same flat order as [`Mlp::insert`].
    pub fn param_values(&self) -> Vec<Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.clone(), l.bias.clone()])
            .collect()
    }

    /// Mutable references to the parameters in flat order.
    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    /// Polyak-averages `source` into `self`: θ ← τ·θ_src + (1−τ)·θ.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) {
        assert_eq!(self.layers.len(), source.layers.len(), "mismatched layer counts");
        for (dst, src) in self.layers.iter_mut().zip(&source.layers) {
            soft_update(&mut dst.weight, &src.weight, tau);
            soft_update(&mut dst.bias, &src.bias, tau);
        }
    }
}

/// In-place Polyak average of one tensor: `target ← tau·source + (1−tau)·target`.
pub fn soft_update(target: &mut Tensor, source: &Tensor, tau: f64) {
    assert_eq!(target.shape(), source.shape(), "soft_update shape mismatch");
    for (t, s) in target.data_mut().iter_mut().zip(source.data()) {
        *t = tau * s + (1.0 - tau) * *t;
    }
}

/// Adam optimiser over a flat parameter list. Moment buffers are lazily
/// shaped on the first step and must see the same parameter layout on every
/// subsequent call.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step_count: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected update. `params` and `grads` run in the same flat
    /// order on every call.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient count mismatch");
        if self.first_moment.is_empty() {
            self.first_moment = params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect();
            self.second_moment = self.first_moment.clone();
        }
        assert_eq!(params.len(), self.first_moment.len(), "parameter layout changed");
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, param) in params.iter_mut().enumerate() {
            assert_eq!(param.shape(), grads[i].shape(), "gradient shape mismatch at index {i}");
            let m = self.first_moment[i].data_mut();
            let v = self.second_moment[i].data_mut();
            for (j, g) in grads[i].data().iter().enumerate() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                param.data_mut()[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}
