//! Demand forecasting: a small feedforward net maps a sliding window of W
//! recent aggregate load samples to the next T samples, trained by MSE.
//!
//! A moving-average predictor doubles as the fallback before any model is
//! fitted and as the oracle the trained model is measured against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numgrad::nn::Mlp;
use crate::numgrad::{Activation, Tape, Tensor};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    None,
    /// Divide inputs and targets by the training-set maximum.
    MaxScale,
}

fn default_window() -> usize {
    16
}

fn default_horizon() -> usize {
    4
}

fn default_hidden() -> Vec<usize> {
    vec![32]
}

fn default_learning_rate() -> f64 {
    1e-3
}

fn default_epochs() -> usize {
    200
}

fn default_normalization() -> Normalization {
    Normalization::MaxScale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastConfig {
    /// History samples fed to the model.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Future samples predicted.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_hidden")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            window: default_window(),
            horizon: default_horizon(),
            hidden_sizes: default_hidden(),
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            normalization: default_normalization(),
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        if self.window == 0 {
            return Err(ForecastError::Config("window must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(ForecastError::Config("horizon must be at least 1".into()));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(ForecastError::Config("hidden sizes must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(ForecastError::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("load series has {got} samples; window {window} + horizon {horizon} needs at least {min}")]
    SeriesTooShort { got: usize, window: usize, horizon: usize, min: usize },
    #[error("invalid forecast configuration: {0}")]
    Config(String),
    #[error("invalid load series: {0}")]
    Series(String),
}

/// Aggregate load sampled at a fixed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSeries {
    start_time: f64,
    interval: f64,
    rates: Vec<f64>,
}

impl LoadSeries {
    pub fn new(start_time: f64, interval: f64, rates: Vec<f64>) -> Result<Self, ForecastError> {
        if !(interval > 0.0) {
            return Err(ForecastError::Series(format!(
                "sample interval must be positive, got {interval}"
            )));
        }
        if let Some((i, &r)) = rates.iter().enumerate().find(|(_, r)| !(**r >= 0.0)) {
            return Err(ForecastError::Series(format!(
                "rate at index {i} is {r}; rates must be nonnegative"
            )));
        }
        Ok(LoadSeries { start_time, interval, rates })
    }

    /// Builds a series from explicit (time, rate) pairs, checking constant
    /// spacing.
    pub fn from_samples(samples: &[(f64, f64)]) -> Result<Self, ForecastError> {
        if samples.len() < 2 {
            let rates = samples.iter().map(|s| s.1).collect();
            return Self::new(samples.first().map_or(0.0, |s| s.0), 1.0, rates);
        }
        let interval = samples[1].0 - samples[0].0;
        if !(interval > 0.0) {
            return Err(ForecastError::Series("times must be strictly increasing".into()));
        }
        for (i, pair) in samples.windows(2).enumerate() {
            let gap = pair[1].0 - pair[0].0;
            if (gap - interval).abs() > 1e-6 * interval.max(1.0) {
                return Err(ForecastError::Series(format!(
                    "spacing between samples {i} and {} is {gap}, expected {interval}",
                    i + 1
                )));
            }
        }
        Self::new(samples[0].0, interval, samples.iter().map(|s| s.1).collect())
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }
}

/// Immutable trained forecaster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastModel {
    pub mlp: Mlp,
    /// Denormalisation factor (1.0 when normalization is none).
    pub scale: f64,
    pub window: usize,
    pub horizon: usize,
}

impl ForecastModel {
    /// Predicts the next `horizon` load samples from exactly `window` recent
    /// ones. Outputs are clamped at zero.
    pub fn predict_horizon(&self, recent: &[f64]) -> Vec<f64> {
        assert_eq!(
            recent.len(),
            self.window,
            "predict_horizon expects exactly {} samples, got {}",
            self.window,
            recent.len()
        );
        let scaled: Vec<f64> = recent.iter().map(|r| r / self.scale).collect();
        let out = self.mlp.forward(&Tensor::from_vec(1, self.window, scaled));
        out.data().iter().map(|y| (y * self.scale).max(0.0)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forecast model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// Fit outcome: the model plus the loss trajectory that produced it.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: ForecastModel,
    /// Full-batch MSE measured before each epoch's update, in normalised
    /// units.
    pub epoch_losses: Vec<f64>,
    /// MSE after the final update.
    pub final_loss: f64,
}

/// Builds the (inputs, targets) design matrices of every complete window.
fn design(rates: &[f64], window: usize, horizon: usize, scale: f64) -> (Tensor, Tensor) {
    let rows = rates.len() - window - horizon + 1;
    let mut x = Vec::with_capacity(rows * window);
    let mut y = Vec::with_capacity(rows * horizon);
    for i in 0..rows {
        x.extend(rates[i..i + window].iter().map(|r| r / scale));
        y.extend(rates[i + window..i + window + horizon].iter().map(|r| r / scale));
    }
    (Tensor::from_vec(rows, window, x), Tensor::from_vec(rows, horizon, y))
}

/// Trains a feedforward forecaster on `series` by full-batch MSE descent.
/// Deterministic for a given seed.
pub fn fit_forecaster(
    series: &LoadSeries,
    cfg: &ForecastConfig,
    seed: u64,
) -> Result<FitReport, ForecastError> {
    cfg.validate()?;
    let min = cfg.window + cfg.horizon + 1;
    if series.len() < min {
        return Err(ForecastError::SeriesTooShort {
            got: series.len(),
            window: cfg.window,
            horizon: cfg.horizon,
            min,
        });
    }
    let scale = match cfg.normalization {
        Normalization::None => 1.0,
        Normalization::MaxScale => {
            let max = series.rates().iter().cloned().fold(0.0_f64, f64::max);
            if max > 0.0 {
                max
            } else {
                1.0
            }
        }
    };
    let (inputs, targets) = design(series.rates(), cfg.window, cfg.horizon, scale);

    let mut sizes = vec![cfg.window];
    sizes.extend_from_slice(&cfg.hidden_sizes);
    sizes.push(cfg.horizon);
    let mut rng = substream(seed, "forecast-init");
    let mut mlp = Mlp::new(&sizes, Activation::Tanh, Activation::Identity, &mut rng);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let mut tape = Tape::new();
        let handles = mlp.insert(&mut tape, true);
        let x = tape.constant(&inputs);
        let t = tape.constant(&targets);
        let pred = mlp.forward_given(&mut tape, &handles, x);
        let loss = tape.mse(pred, t);
        epoch_losses.push(tape.value(loss).scalar());
        let grads = tape.backward(loss);
        // Plain full-batch descent: at small learning rates this keeps the
        // loss curve monotone, which adaptive optimisers do not guarantee.
        let flat: Vec<Tensor> = handles.iter().map(|h| grads.for_param(*h)).collect();
        for (param, grad) in mlp.params_mut().into_iter().zip(&flat) {
            for (p, g) in param.data_mut().iter_mut().zip(grad.data()) {
                *p -= cfg.learning_rate * g;
            }
        }
    }
    let final_loss = mlp.forward(&inputs).mse(&targets);
    Ok(FitReport {
        model: ForecastModel { mlp, scale, window: cfg.window, horizon: cfg.horizon },
        epoch_losses,
        final_loss,
    })
}

/// Constant prediction at the window mean; the fallback predictor and the
/// oracle trained models are compared against.
pub fn moving_average_baseline(recent: &[f64], horizon: usize) -> Vec<f64> {
    assert!(!recent.is_empty(), "moving average needs at least one sample");
    let mean = recent.iter().sum::<f64>() / recent.len() as f64;
    vec![mean; horizon]
}
