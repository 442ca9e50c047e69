//! Comparison policies: round-robin and least-connections routing, plus two
//! threshold autoscalers (an HPA-style proportional rule and a simple
//! rule/hysteresis scaler).
//!
//! Everything here is deterministic and RNG-free. Stateful pieces (the
//! round-robin counter, cooldown clocks) are explicit values passed in and
//! returned, so callers own serialization.

use serde::{Deserialize, Serialize};

use crate::sim::{Assigner, Assignment, RoutingView};

/// Modular routing: request k goes to node k mod N.
pub fn round_robin_assign(counter: u64, n: usize) -> (usize, u64) {
    assert!(n >= 1, "round robin needs at least one node");
    ((counter % n as u64) as usize, counter + 1)
}

/// Picks the node with the fewest queued+in-flight requests; ties go to the
/// lowest index.
pub fn least_connections_assign(counts: &[usize]) -> usize {
    assert!(!counts.is_empty(), "least connections needs at least one node");
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c < counts[best] {
            best = i;
        }
    }
    best
}

/// HPA-style proportional autoscaler settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpaConfig {
    /// Desired mean utilization in (0, 1].
    pub target_utilization: f64,
    pub min_replicas: u32,
    pub max_replicas: u32,
    #[serde(default)]
    pub cooldown_s: f64,
}

impl HpaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.target_utilization > 0.0 && self.target_utilization <= 1.0) {
            return Err(format!(
                "target_utilization must be in (0, 1], got {}",
                self.target_utilization
            ));
        }
        if self.min_replicas > self.max_replicas {
            return Err(format!(
                "min_replicas {} exceeds max_replicas {}",
                self.min_replicas, self.max_replicas
            ));
        }
        if !(self.cooldown_s >= 0.0) {
            return Err(format!("cooldown_s must be nonnegative, got {}", self.cooldown_s));
        }
        Ok(())
    }
}

/// Proportional replica rule: `ceil(current × observed / target)`, clamped
/// to the configured range and gated by the cooldown. Returns the new
/// replica count and the updated last-change time.
///
/// The ratio is snapped to the nearest integer when within 1e-9 before
/// ceiling, so float artifacts like 4 × 0.9 / 0.6 = 6.000000000000001 do not
/// round a no-op up to an extra replica.
pub fn hpa_desired_replicas(
    current: u32,
    observed_utilization: f64,
    cfg: &HpaConfig,
    now: f64,
    last_change: Option<f64>,
) -> (u32, Option<f64>) {
    if let Some(t0) = last_change {
        if now - t0 < cfg.cooldown_s {
            return (current, last_change);
        }
    }
    let raw = current as f64 * observed_utilization / cfg.target_utilization;
    let snapped = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() };
    let desired = (snapped.max(0.0) as u32).clamp(cfg.min_replicas, cfg.max_replicas);
    if desired != current {
        (desired, Some(now))
    } else {
        (current, last_change)
    }
}

/// Which measurement a scaling rule watches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbasMetric {
    Utilization,
    QueueLength,
}

/// One threshold rule: a positive delta fires above the upper threshold, a
/// negative delta below the lower one; the band between is hysteresis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbasRule {
    pub metric: RbasMetric,
    pub upper_threshold: f64,
    pub lower_threshold: f64,
    /// Units to add (positive) or remove (negative) when the rule fires.
    pub scale_delta: i32,
    #[serde(default)]
    pub cooldown_s: f64,
}

impl RbasRule {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lower_threshold < self.upper_threshold) {
            return Err(format!(
                "lower_threshold {} must be below upper_threshold {}",
                self.lower_threshold, self.upper_threshold
            ));
        }
        Ok(())
    }
}

/// The default rule pair: +1 unit above 0.8 utilization, −1 below 0.3, each
/// gated by a 30 s cooldown.
pub fn default_rbas_rules() -> Vec<RbasRule> {
    vec![
        RbasRule {
            metric: RbasMetric::Utilization,
            upper_threshold: 0.8,
            lower_threshold: 0.3,
            scale_delta: 1,
            cooldown_s: 30.0,
        },
        RbasRule {
            metric: RbasMetric::Utilization,
            upper_threshold: 0.8,
            lower_threshold: 0.3,
            scale_delta: -1,
            cooldown_s: 30.0,
        },
    ]
}

/// Metric values a rule may watch, sampled once per decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbasObservation {
    pub utilization: f64,
    pub queue_length: f64,
}

impl RbasObservation {
    fn value(&self, metric: RbasMetric) -> f64 {
        match metric {
            RbasMetric::Utilization => self.utilization,
            RbasMetric::QueueLength => self.queue_length,
        }
    }
}

/// Applies the first matching rule in list order. Inside every rule's band
/// the delta is 0; a firing within the matched rule's cooldown window is
/// suppressed. A negative delta never drives the unit count below zero.
/// Returns (delta, updated last-fired time).
pub fn rbas_decide(
    observation: RbasObservation,
    current_units: u32,
    rules: &[RbasRule],
    now: f64,
    last_fired: Option<f64>,
) -> (i32, Option<f64>) {
    for rule in rules {
        let v = observation.value(rule.metric);
        let matches = (rule.scale_delta > 0 && v > rule.upper_threshold)
            || (rule.scale_delta < 0 && v < rule.lower_threshold);
        if !matches {
            continue;
        }
        if let Some(t0) = last_fired {
            if now - t0 < rule.cooldown_s {
                return (0, last_fired);
            }
        }
        let delta = rule.scale_delta.max(-(current_units as i32));
        return (delta, Some(now));
    }
    (0, last_fired)
}

/// Distributes a cluster-total unit count over nodes as evenly as possible;
/// the first `total % n` nodes take the remainder.
pub fn spread_units_evenly(total: u32, n: usize) -> Vec<u32> {
    assert!(n >= 1, "cannot spread units over zero nodes");
    let base = total / n as u32;
    let extra = (total % n as u32) as usize;
    (0..n).map(|i| base + u32::from(i < extra)).collect()
}

/// [`Assigner`] wrapper for round-robin routing.
#[derive(Debug, Default, Clone)]
pub struct RoundRobin {
    counter: u64,
}

impl Assigner for RoundRobin {
    fn assign(&mut self, view: &RoutingView) -> Assignment {
        let (node, counter) = round_robin_assign(self.counter, view.units.len());
        self.counter = counter;
        Assignment::Node(node)
    }
}

/// [`Assigner`] wrapper for least-connections routing.
#[derive(Debug, Default, Clone)]
pub struct LeastConnections;

impl Assigner for LeastConnections {
    fn assign(&mut self, view: &RoutingView) -> Assignment {
        Assignment::Node(least_connections_assign(&view.loads))
    }
}
