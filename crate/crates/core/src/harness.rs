//! Config-driven experiment harness: loads scenario JSON, runs policy
//! bundles against the simulator, trains the learned balancer, compares
//! policies on a shared workload realization, and writes all artifacts
//! (metrics CSV, charts, event logs, manifests, checkpoints).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::balancer::{
    compute_reward, DdpgAgent, DdpgConfig, RewardConfig, StateBuilder, StateVector, TrainOutcome,
    Transition,
};
use crate::baselines::{
    hpa_desired_replicas, rbas_decide, spread_units_evenly, HpaConfig, LeastConnections,
    RbasObservation, RbasRule, RoundRobin,
};
use crate::forecast::{fit_forecaster, moving_average_baseline, ForecastConfig, ForecastModel, LoadSeries};
use crate::gpso::{optimize, FitnessConfig, GpsoConfig, LoadModel};
use crate::report::{
    aggregate_run, emit_csv, emit_svg_chart, ChartMetric, ReportError, RunSummary,
};
use crate::rng::{indexed_substream, substream};
use crate::sim::workload::TraceLoad;
use crate::sim::{
    generate_workload, load_trace, Assigner, Assignment, Cluster, ClusterConfig, EventRecord,
    MetricsSample, Request, RoutingView, SimError, Topology, WorkloadProfile,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad input: config, CLI usage, malformed referenced files. Exit 1.
    #[error("validation error: {0}")]
    Validation(String),
    /// Failure while executing a valid request: I/O, simulator faults. Exit 2.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => HarnessError::Validation(e.to_string()),
            _ => HarnessError::Runtime(e.to_string()),
        }
    }
}

impl From<ReportError> for HarnessError {
    fn from(e: ReportError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

fn io_err(context: &str, e: std::io::Error) -> HarnessError {
    HarnessError::Runtime(format!("{context}: {e}"))
}

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

fn default_schema_version() -> u32 {
    1
}
fn default_sample_interval() -> f64 {
    5.0
}
fn default_autoscale_every() -> usize {
    6
}
fn default_unit_cost() -> f64 {
    1.0
}
fn default_initial_units() -> UnitsSpec {
    UnitsSpec::Uniform(1)
}
fn default_adjacency() -> AdjacencySpec {
    AdjacencySpec::Full
}
fn default_lambda() -> f64 {
    1.0
}
fn default_episodes() -> usize {
    8
}
fn default_steps_per_interval() -> usize {
    1
}
fn default_cost_scale() -> f64 {
    1.0
}

/// Initial units: one number for all nodes, or one per node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitsSpec {
    Uniform(u32),
    PerNode(Vec<u32>),
}

impl UnitsSpec {
    fn expand(&self, n: usize) -> Result<Vec<u32>, HarnessError> {
        match self {
            UnitsSpec::Uniform(u) => Ok(vec![*u; n]),
            UnitsSpec::PerNode(v) => {
                if v.len() != n {
                    return Err(HarnessError::Validation(format!(
                        "cluster.initial_units lists {} nodes but cluster.nodes is {n}",
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Node communication topology, by shape name, inline matrix, or file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencySpec {
    Full,
    Ring,
    Path,
    Star,
    Explicit(Vec<Vec<u8>>),
    /// JSON file holding an N×N 0/1 matrix.
    File { path: String },
}

impl AdjacencySpec {
    fn resolve(&self, base_dir: &Path) -> Result<Topology, HarnessError> {
        Ok(match self {
            AdjacencySpec::Full => Topology::Full,
            AdjacencySpec::Ring => Topology::Ring,
            AdjacencySpec::Path => Topology::Path,
            AdjacencySpec::Star => Topology::Star,
            AdjacencySpec::Explicit(m) => Topology::Explicit(m.clone()),
            AdjacencySpec::File { path } => {
                let full = resolve_path(base_dir, path);
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    HarnessError::Validation(format!(
                        "cluster.topology.file {}: {e}",
                        full.display()
                    ))
                })?;
                let m: Vec<Vec<u8>> = serde_json::from_str(&text).map_err(|e| {
                    HarnessError::Validation(format!(
                        "cluster.topology.file {}: {e}",
                        full.display()
                    ))
                })?;
                Topology::Explicit(m)
            }
        })
    }
}

fn resolve_path(base_dir: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    /// Number of compute nodes.
    pub nodes: usize,
    #[serde(default = "default_initial_units")]
    pub initial_units: UnitsSpec,
    #[serde(default = "crate::sim::default_unit_rate")]
    pub unit_rate: f64,
    #[serde(default)]
    pub min_units: u32,
    #[serde(default = "crate::sim::default_max_units")]
    pub max_units: u32,
    #[serde(default = "crate::sim::default_actuation_delay")]
    pub actuation_delay: f64,
    #[serde(default = "default_adjacency")]
    pub topology: AdjacencySpec,
}

impl ClusterSection {
    fn to_sim_config(&self, base_dir: &Path) -> Result<ClusterConfig, HarnessError> {
        if self.nodes == 0 {
            return Err(HarnessError::Validation("cluster.nodes must be at least 1".into()));
        }
        let cfg = ClusterConfig {
            nodes: self.initial_units.expand(self.nodes)?,
            unit_rate: self.unit_rate,
            min_units: self.min_units,
            max_units: self.max_units,
            actuation_delay: self.actuation_delay,
            topology: self.topology.resolve(base_dir)?,
        };
        cfg.validate()
            .map_err(|e| HarnessError::Validation(format!("cluster: {e}")))?;
        Ok(cfg)
    }
}

/// Workload profile shape without seed/duration, which the scenario owns so
/// that one master seed governs the whole run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: crate::sim::WorkloadKind,
    pub base_rate: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "crate::sim::workload::default_period")]
    pub period: f64,
    #[serde(default)]
    pub burst_rate: f64,
    #[serde(default)]
    pub burst_duration: f64,
    #[serde(default)]
    pub burst_spacing: f64,
    pub cost_distribution: crate::sim::CostDistribution,
}

impl ProfileSpec {
    fn to_profile(&self, duration: f64, seed: u64) -> WorkloadProfile {
        WorkloadProfile {
            kind: self.kind,
            base_rate: self.base_rate,
            amplitude: self.amplitude,
            period: self.period,
            burst_rate: self.burst_rate,
            burst_duration: self.burst_duration,
            burst_spacing: self.burst_spacing,
            cost_distribution: self.cost_distribution.clone(),
            duration,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    pub path: String,
    #[serde(default = "default_cost_scale")]
    pub cost_scale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestsSection {
    pub path: String,
}

/// Where requests come from: a synthetic profile, a raw resource-usage
/// trace CSV, or a canonical requests file (see `trace-convert`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests: Option<RequestsSection>,
}

impl WorkloadSection {
    fn validate(&self) -> Result<(), HarnessError> {
        let sources =
            usize::from(self.profile.is_some()) + usize::from(self.trace.is_some()) + usize::from(self.requests.is_some());
        if sources != 1 {
            return Err(HarnessError::Validation(format!(
                "workload must name exactly one of profile, trace, requests; found {sources}"
            )));
        }
        if let Some(p) = &self.profile {
            // validate via a fully populated profile with placeholder seed
            p.to_profile(1.0, 0)
                .validate()
                .map_err(|e| HarnessError::Validation(format!("workload.profile: {e}")))?;
        }
        if let Some(t) = &self.trace {
            if !(t.cost_scale > 0.0) {
                return Err(HarnessError::Validation(format!(
                    "workload.trace.cost_scale must be positive, got {}",
                    t.cost_scale
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdpgBundle {
    /// Checkpoint to load; omitted means a freshly initialized agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
    /// Keep exploration noise on during the run.
    #[serde(default)]
    pub explore: bool,
    /// Use the decentralized shared-policy fusion instead of central inference.
    #[serde(default)]
    pub decentralized: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalancerChoice {
    RoundRobin,
    LeastConnections,
    Ddpg(DdpgBundle),
}

impl BalancerChoice {
    fn id(&self) -> &'static str {
        match self {
            BalancerChoice::RoundRobin => "round_robin",
            BalancerChoice::LeastConnections => "least_connections",
            BalancerChoice::Ddpg(_) => "ddpg",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbasSection {
    #[serde(default = "crate::baselines::default_rbas_rules")]
    pub rules: Vec<RbasRule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsoSection {
    /// Per-unit cost per node; defaults to 1.0 everywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<Vec<f64>>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoscalerChoice {
    /// Keep the initial allocation for the whole run.
    Static,
    Hpa(HpaConfig),
    Rbas(RbasSection),
    Gpso(GpsoSection),
}

impl AutoscalerChoice {
    fn id(&self) -> &'static str {
        match self {
            AutoscalerChoice::Static => "static",
            AutoscalerChoice::Hpa(_) => "hpa",
            AutoscalerChoice::Rbas(_) => "rbas",
            AutoscalerChoice::Gpso(_) => "gpso",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyBundle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub balancer: BalancerChoice,
    pub autoscaler: AutoscalerChoice,
}

impl PolicyBundle {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}+{}", self.balancer.id(), self.autoscaler.id()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Gradient steps attempted after each sampled interval.
    #[serde(default = "default_steps_per_interval")]
    pub steps_per_interval: usize,
    /// Resume training from this checkpoint instead of a fresh agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume: Option<String>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            episodes: default_episodes(),
            steps_per_interval: default_steps_per_interval(),
            resume: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Simulated seconds per run.
    pub duration: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Autoscaling decisions fire every this many sampling intervals.
    #[serde(default = "default_autoscale_every")]
    pub autoscale_every: usize,
    #[serde(default = "default_unit_cost")]
    pub unit_cost_per_unit_second: f64,
    pub cluster: ClusterSection,
    pub workload: WorkloadSection,
    pub policies: Vec<PolicyBundle>,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub agent: DdpgConfig,
    #[serde(default)]
    pub gpso: GpsoConfig,
    #[serde(default)]
    pub forecast: ForecastConfig,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Validation(msg));
        if self.schema_version != 1 {
            return bad(format!(
                "schema_version {} is not supported (this build understands 1)",
                self.schema_version
            ));
        }
        if !(self.sample_interval > 0.0) {
            return bad(format!(
                "sample_interval must be positive, got {}",
                self.sample_interval
            ));
        }
        if !(self.duration >= self.sample_interval) {
            return bad(format!(
                "duration {} must cover at least one sample_interval {}",
                self.duration, self.sample_interval
            ));
        }
        if self.autoscale_every == 0 {
            return bad("autoscale_every must be at least 1".into());
        }
        if !(self.unit_cost_per_unit_second >= 0.0) {
            return bad(format!(
                "unit_cost_per_unit_second must be nonnegative, got {}",
                self.unit_cost_per_unit_second
            ));
        }
        if self.policies.is_empty() {
            return bad("policies must list at least one bundle".into());
        }
        self.workload.validate()?;
        self.reward
            .validate()
            .map_err(|e| HarnessError::Validation(format!("reward: {e}")))?;
        self.agent
            .validate()
            .map_err(|e| HarnessError::Validation(format!("agent: {e}")))?;
        self.gpso
            .validate()
            .map_err(|e| HarnessError::Validation(format!("gpso: {e}")))?;
        self.forecast
            .validate()
            .map_err(|e| HarnessError::Validation(format!("forecast: {e}")))?;
        for (i, bundle) in self.policies.iter().enumerate() {
            match &bundle.autoscaler {
                AutoscalerChoice::Hpa(h) => h.validate().map_err(|e| {
                    HarnessError::Validation(format!("policies[{i}].autoscaler.hpa: {e}"))
                })?,
                AutoscalerChoice::Rbas(r) => {
                    for (j, rule) in r.rules.iter().enumerate() {
                        rule.validate().map_err(|e| {
                            HarnessError::Validation(format!(
                                "policies[{i}].autoscaler.rbas.rules[{j}]: {e}"
                            ))
                        })?;
                    }
                }
                AutoscalerChoice::Gpso(g) => {
                    if let Some(costs) = &g.costs {
                        if costs.len() != self.cluster.nodes {
                            return bad(format!(
                                "policies[{i}].autoscaler.gpso.costs lists {} nodes but cluster.nodes is {}",
                                costs.len(),
                                self.cluster.nodes
                            ));
                        }
                    }
                    if !(g.lambda >= 0.0) {
                        return bad(format!(
                            "policies[{i}].autoscaler.gpso.lambda must be nonnegative, got {}",
                            g.lambda
                        ));
                    }
                }
                AutoscalerChoice::Static => {}
            }
        }
        if self.training.steps_per_interval == 0 {
            return bad("training.steps_per_interval must be at least 1".into());
        }
        Ok(())
    }

    pub fn intervals(&self) -> usize {
        ((self.duration / self.sample_interval) + 1e-9).floor() as usize
    }
}

/// A parsed config together with where it came from, for resolving
/// relative paths and hashing the exact input.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub base_dir: PathBuf,
    pub config_sha256: String,
}

pub fn load_config(path: &Path) -> Result<LoadedScenario, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Validation(format!("cannot read config {}: {e}", path.display()))
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let p = e.path().to_string();
        let where_ = if p.is_empty() || p == "." { String::new() } else { format!(" at `{p}`") };
        HarnessError::Validation(format!(
            "config {}{}: {}",
            path.display(),
            where_,
            e.inner()
        ))
    })?;
    config.validate()?;
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Ok(LoadedScenario { config, base_dir, config_sha256: sha256_hex(text.as_bytes()) })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("string write cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// Workload realization
// ---------------------------------------------------------------------------

/// Canonical requests file: the output of `trace-convert` and a valid
/// workload source.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestsFile {
    pub schema_version: u32,
    pub requests: Vec<RequestSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSpec {
    pub arrival_time: f64,
    pub cost: f64,
}

fn workload_seed(master: u64, episode: u64) -> u64 {
    indexed_substream(master, "workload-episode", episode).random()
}

/// Materializes the request stream for one run. `episode` perturbs only
/// profile-generated workloads; traces replay identically.
fn realize_workload(
    scenario: &LoadedScenario,
    episode: u64,
) -> Result<Vec<Request>, HarnessError> {
    let cfg = &scenario.config;
    if let Some(p) = &cfg.workload.profile {
        let profile = p.to_profile(cfg.duration, workload_seed(cfg.seed, episode));
        return Ok(generate_workload(&profile));
    }
    if let Some(t) = &cfg.workload.trace {
        let path = resolve_path(&scenario.base_dir, &t.path);
        let TraceLoad { requests, .. } = load_trace(&path, t.cost_scale)
            .map_err(|e| HarnessError::Validation(format!("workload.trace: {e}")))?;
        return Ok(requests);
    }
    if let Some(r) = &cfg.workload.requests {
        let path = resolve_path(&scenario.base_dir, &r.path);
        let text = std::fs::read_to_string(&path).map_err(|e| {
            HarnessError::Validation(format!("workload.requests {}: {e}", path.display()))
        })?;
        let file: RequestsFile = serde_json::from_str(&text).map_err(|e| {
            HarnessError::Validation(format!("workload.requests {}: {e}", path.display()))
        })?;
        if file.schema_version != 1 {
            return Err(HarnessError::Validation(format!(
                "workload.requests {}: schema_version {} unsupported",
                path.display(),
                file.schema_version
            )));
        }
        return Ok(file
            .requests
            .iter()
            .enumerate()
            .map(|(i, r)| Request::new(i as u64, r.arrival_time, r.cost))
            .collect());
    }
    unreachable!("workload.validate() guarantees exactly one source")
}

/// Order-sensitive digest of the arrival sequence, for verifying that
/// compared policies consumed the identical workload realization.
pub fn arrivals_sha256(requests: &[Request]) -> String {
    let mut hasher = Sha256::new();
    for r in requests {
        hasher.update(r.arrival_time.to_bits().to_le_bytes());
        hasher.update(r.cost.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("string write cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// Policy machinery
// ---------------------------------------------------------------------------

enum BalancerState {
    RoundRobin(RoundRobin),
    LeastConnections(LeastConnections),
    Ddpg(Box<DdpgRuntime>),
}

struct DdpgRuntime {
    agent: DdpgAgent,
    builder: StateBuilder,
    fractions: Vec<f64>,
    explore: bool,
    decentralized: bool,
    training: bool,
    prev: Option<(StateVector, Vec<f64>)>,
}

enum AutoscalerState {
    Static,
    Hpa { cfg: HpaConfig, last_change: Option<f64> },
    Rbas { rules: Vec<RbasRule>, last_fired: Option<f64> },
    Gpso { costs: Vec<f64>, lambda: f64, decision: u64 },
}

/// Demand forecaster that warms up on a moving average and switches to a
/// fitted model once enough history exists.
struct ForecastRuntime {
    cfg: ForecastConfig,
    history: Vec<f64>,
    model: Option<ForecastModel>,
    interval: f64,
    seed: u64,
}

impl ForecastRuntime {
    fn new(cfg: ForecastConfig, interval: f64, seed: u64) -> Self {
        ForecastRuntime { cfg, history: Vec::new(), model: None, interval, seed }
    }

    fn observe(&mut self, rate: f64) {
        self.history.push(rate);
    }

    fn min_fit_len(&self) -> usize {
        self.cfg.window + self.cfg.horizon + 1
    }

    fn predict(&mut self) -> Vec<f64> {
        if self.history.is_empty() {
            return vec![0.0; self.cfg.horizon];
        }
        if self.model.is_none() && self.history.len() >= self.min_fit_len() {
            let series = LoadSeries::new(0.0, self.interval, self.history.clone())
                .expect("history rates are nonnegative by construction");
            // A fit failure is impossible here (length checked), but never
            // let the forecaster take down a run: fall back to the average.
            if let Ok(report) = fit_forecaster(&series, &self.cfg, self.seed) {
                self.model = Some(report.model);
            }
        }
        match &self.model {
            Some(m) if self.history.len() >= self.cfg.window => {
                let recent = &self.history[self.history.len() - self.cfg.window..];
                m.predict_horizon(recent)
            }
            _ => moving_average_baseline(&self.history, self.cfg.horizon),
        }
    }
}

struct SpreadAssigner {
    fractions: Vec<f64>,
}

impl Assigner for SpreadAssigner {
    fn assign(&mut self, _view: &RoutingView) -> Assignment {
        Assignment::Spread(self.fractions.clone())
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Everything one simulated run produces.
pub struct RunOutput {
    pub policy: String,
    pub summary: RunSummary,
    pub samples: Vec<MetricsSample>,
    pub events: Vec<EventRecord>,
    pub arrivals_sha256: String,
    /// Mean routing fraction per node over the run (learned balancer only).
    pub mean_fractions: Option<Vec<f64>>,
    /// Rows of `step,critic_loss,actor_objective,reward` produced while
    /// training (empty for evaluation runs).
    pub training_rows: Vec<(u64, f64, f64, f64)>,
    /// Per-interval rewards as scored by the configured reward weights.
    pub rewards: Vec<f64>,
}

pub struct RunRequest<'a> {
    pub scenario: &'a LoadedScenario,
    pub bundle: &'a PolicyBundle,
    /// Pre-built agent to drive a ddpg bundle; freshly constructed (or
    /// loaded from the bundle's checkpoint) when absent.
    pub agent: Option<DdpgAgent>,
    /// Train the agent online during this run.
    pub train: bool,
    pub capture_events: bool,
    /// Workload episode index (0 for plain runs).
    pub episode: u64,
}

fn build_agent(
    scenario: &LoadedScenario,
    bundle: &DdpgBundle,
    sim_cfg: &ClusterConfig,
) -> Result<DdpgAgent, HarnessError> {
    let cfg = &scenario.config;
    if let Some(cp) = &bundle.checkpoint {
        let path = resolve_path(&scenario.base_dir, cp);
        return DdpgAgent::load_checkpoint(&path).map_err(|e| {
            HarnessError::Validation(format!("checkpoint {}: {e}", path.display()))
        });
    }
    let adjacency = sim_cfg
        .topology
        .adjacency(cfg.cluster.nodes)
        .map_err(|e| HarnessError::Validation(e.to_string()))?;
    DdpgAgent::new(
        cfg.cluster.nodes,
        cfg.forecast.horizon,
        &adjacency,
        cfg.agent.clone(),
        cfg.seed,
    )
    .map_err(|e| HarnessError::Validation(format!("agent: {e}")))
}

/// Runs one policy bundle against one workload realization, driving the
/// policy loop: route every arrival, sample metrics each interval, let the
/// balancer re-decide per interval, and let the autoscaler re-plan every
/// `autoscale_every` intervals. Returns the agent alongside the output when
/// one was used.
pub fn run_policy(req: RunRequest<'_>) -> Result<(RunOutput, Option<DdpgAgent>), HarnessError> {
    let cfg = &req.scenario.config;
    let sim_cfg = cfg.cluster.to_sim_config(&req.scenario.base_dir)?;
    let requests = realize_workload(req.scenario, req.episode)?;
    let arrivals = arrivals_sha256(&requests);
    let mean_cost = if requests.is_empty() {
        1.0
    } else {
        requests.iter().map(|r| r.cost).sum::<f64>() / requests.len() as f64
    };

    let mut cluster = Cluster::new(sim_cfg.clone(), requests, cfg.seed)?;
    if req.capture_events {
        cluster.enable_event_log();
    }

    let mut balancer = match &req.bundle.balancer {
        BalancerChoice::RoundRobin => BalancerState::RoundRobin(RoundRobin::default()),
        BalancerChoice::LeastConnections => {
            BalancerState::LeastConnections(LeastConnections)
        }
        BalancerChoice::Ddpg(b) => {
            let agent = match req.agent {
                Some(a) => a,
                None => build_agent(req.scenario, b, &sim_cfg)?,
            };
            let n = cfg.cluster.nodes;
            BalancerState::Ddpg(Box::new(DdpgRuntime {
                agent,
                builder: StateBuilder::new(),
                fractions: vec![1.0 / n as f64; n],
                explore: b.explore || req.train,
                decentralized: b.decentralized,
                training: req.train,
                prev: None,
            }))
        }
    };

    let mut autoscaler = match &req.bundle.autoscaler {
        AutoscalerChoice::Static => AutoscalerState::Static,
        AutoscalerChoice::Hpa(h) => AutoscalerState::Hpa { cfg: h.clone(), last_change: None },
        AutoscalerChoice::Rbas(r) => {
            AutoscalerState::Rbas { rules: r.rules.clone(), last_fired: None }
        }
        AutoscalerChoice::Gpso(g) => AutoscalerState::Gpso {
            costs: g.costs.clone().unwrap_or_else(|| vec![1.0; cfg.cluster.nodes]),
            lambda: g.lambda,
            decision: 0,
        },
    };

    let mut forecaster = ForecastRuntime::new(
        cfg.forecast.clone(),
        cfg.sample_interval,
        substream(cfg.seed, "forecast-fit").random(),
    );

    let intervals = cfg.intervals();
    let mut samples = Vec::with_capacity(intervals);
    let mut rewards = Vec::with_capacity(intervals);
    let mut training_rows = Vec::new();
    let mut fraction_sums = vec![0.0; cfg.cluster.nodes];
    let mut fraction_count = 0u64;
    // routing split averaged since the last scaling decision, so capacity
    // planning sees the split that actually governed recent intervals
    let mut recent_fraction_sums = vec![0.0; cfg.cluster.nodes];
    let mut recent_fraction_count = 0u64;

    for interval_idx in 0..intervals {
        let until = (interval_idx + 1) as f64 * cfg.sample_interval;
        match &mut balancer {
            BalancerState::RoundRobin(rr) => cluster.advance(until, rr)?,
            BalancerState::LeastConnections(lc) => cluster.advance(until, lc)?,
            BalancerState::Ddpg(d) => {
                let mut assigner = SpreadAssigner { fractions: d.fractions.clone() };
                cluster.advance(until, &mut assigner)?;
            }
        }
        let sample = cluster.snapshot();
        forecaster.observe(sample.arrival_rate);
        let reward = compute_reward(mean(&sample.response_times), &sample.utilization, &cfg.reward);
        rewards.push(reward);

        if let BalancerState::Ddpg(d) = &mut balancer {
            let forecast = forecaster.predict();
            let state = d.builder.build(&sample, &forecast);
            if d.training {
                if let Some((prev_state, prev_action)) = d.prev.take() {
                    d.agent.push_transition(Transition {
                        state: prev_state,
                        action: prev_action,
                        reward,
                        next_state: state.clone(),
                    });
                    for _ in 0..cfg.training.steps_per_interval {
                        if let TrainOutcome::Stepped { critic_loss, actor_objective } =
                            d.agent.train_step()
                        {
                            training_rows.push((
                                d.agent.trained_steps(),
                                critic_loss,
                                actor_objective,
                                reward,
                            ));
                        }
                    }
                }
            }
            let action = if d.decentralized && !d.explore {
                d.agent.shared_policy_act(&state).1
            } else {
                d.agent.actor_act(&state, d.explore)
            };
            for (acc, &f) in fraction_sums.iter_mut().zip(&action.fractions) {
                *acc += f;
            }
            fraction_count += 1;
            for (acc, &f) in recent_fraction_sums.iter_mut().zip(&action.fractions) {
                *acc += f;
            }
            recent_fraction_count += 1;
            d.fractions.clone_from(&action.fractions);
            if d.training {
                d.prev = Some((state, action.fractions.clone()));
            }
        }

        let decision_due = (interval_idx + 1) % cfg.autoscale_every == 0;
        if decision_due && interval_idx + 1 < intervals {
            let now = cluster.clock();
            let current_total: u32 = sample.units.iter().sum();
            let observed_util = mean(&sample.utilization);
            match &mut autoscaler {
                AutoscalerState::Static => {}
                AutoscalerState::Hpa { cfg: hpa, last_change } => {
                    let (desired_total, stamped) = hpa_desired_replicas(
                        current_total,
                        observed_util,
                        hpa,
                        now,
                        *last_change,
                    );
                    *last_change = stamped;
                    if desired_total != current_total {
                        let plan = clamp_plan(
                            &spread_units_evenly(desired_total, cfg.cluster.nodes),
                            &sim_cfg,
                        );
                        cluster.apply_allocation(&plan)?;
                    }
                }
                AutoscalerState::Rbas { rules, last_fired } => {
                    let observation = RbasObservation {
                        utilization: observed_util,
                        queue_length: sample.queued as f64,
                    };
                    let (delta, stamped) =
                        rbas_decide(observation, current_total, rules, now, *last_fired);
                    *last_fired = stamped;
                    if delta != 0 {
                        let desired_total = (current_total as i64 + delta as i64).max(0) as u32;
                        let plan = clamp_plan(
                            &spread_units_evenly(desired_total, cfg.cluster.nodes),
                            &sim_cfg,
                        );
                        cluster.apply_allocation(&plan)?;
                    }
                }
                AutoscalerState::Gpso { costs, lambda, decision } => {
                    let forecast = forecaster.predict();
                    let demand_rate = mean(&forecast).max(0.0) * mean_cost;
                    let mut gpso_cfg = cfg.gpso.clone();
                    gpso_cfg.seed =
                        indexed_substream(cfg.seed, "gpso-decision", *decision).random();
                    *decision += 1;
                    // Predicted per-node work follows the balancer's recent
                    // split, so capacity lands where traffic actually goes.
                    let fractions = match &balancer {
                        BalancerState::Ddpg(d) => {
                            if recent_fraction_count > 0 {
                                recent_fraction_sums
                                    .iter()
                                    .map(|s| s / recent_fraction_count as f64)
                                    .collect()
                            } else {
                                d.fractions.clone()
                            }
                        }
                        _ => vec![1.0 / cfg.cluster.nodes as f64; cfg.cluster.nodes],
                    };
                    let unit_rate = sim_cfg.unit_rate;
                    let fit_cfg = FitnessConfig {
                        costs: costs.clone(),
                        lambda: *lambda,
                        load_model: LoadModel::Custom(Box::new(move |plan| {
                            plan.iter()
                                .zip(&fractions)
                                .map(|(&u, f)| {
                                    let share = demand_rate * f;
                                    if u == 0 {
                                        if share > 0.0 { f64::INFINITY } else { 0.0 }
                                    } else {
                                        share / (u as f64 * unit_rate)
                                    }
                                })
                                .collect()
                        })),
                    };
                    let result = optimize(
                        &gpso_cfg,
                        &fit_cfg,
                        sim_cfg.min_units.max(1),
                        sim_cfg.max_units,
                    )
                    .map_err(|e| HarnessError::Runtime(format!("gpso: {e}")))?;
                    if result.best_plan.units() != sample.units.as_slice() {
                        cluster.apply_allocation(result.best_plan.units())?;
                    }
                }
            }
            recent_fraction_sums.fill(0.0);
            recent_fraction_count = 0;
        }
        samples.push(sample);
    }

    let summary = aggregate_run(&req.bundle.label(), &samples, cfg.unit_cost_per_unit_second)?;
    let events = if req.capture_events { cluster.take_event_records() } else { Vec::new() };
    let (mean_fractions, agent_back) = match balancer {
        BalancerState::Ddpg(d) => {
            let means = if fraction_count > 0 {
                Some(fraction_sums.iter().map(|s| s / fraction_count as f64).collect())
            } else {
                None
            };
            (means, Some(d.agent))
        }
        _ => (None, None),
    };
    Ok((
        RunOutput {
            policy: req.bundle.label(),
            summary,
            samples,
            events,
            arrivals_sha256: arrivals,
            mean_fractions,
            training_rows,
            rewards,
        },
        agent_back,
    ))
}

/// Clamps a per-node plan into the cluster's unit bounds.
fn clamp_plan(plan: &[u32], cfg: &ClusterConfig) -> Vec<u32> {
    plan.iter().map(|&u| u.clamp(cfg.min_units, cfg.max_units)).collect()
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub policies: Vec<String>,
    pub arrivals_sha256: Vec<String>,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    scenario: &LoadedScenario,
    policies: &[String],
    arrival_hashes: &[String],
) -> Result<PathBuf, HarnessError> {
    let manifest = Manifest {
        schema_version: 1,
        command: command.to_string(),
        config_sha256: scenario.config_sha256.clone(),
        seed: scenario.config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        policies: policies.to_vec(),
        arrivals_sha256: arrival_hashes.to_vec(),
    };
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| HarnessError::Runtime(format!("manifest encoding: {e}")))?;
    std::fs::write(&path, body).map_err(|e| io_err("writing manifest", e))?;
    Ok(path)
}

fn write_events(dir: &Path, policy: &str, events: &[EventRecord]) -> Result<(), HarnessError> {
    let mut body = String::new();
    for ev in events {
        let line = serde_json::to_string(ev)
            .map_err(|e| HarnessError::Runtime(format!("event encoding: {e}")))?;
        body.push_str(&line);
        body.push('\n');
    }
    let path = dir.join(format!("events-{policy}.jsonl"));
    std::fs::write(&path, body).map_err(|e| io_err("writing event log", e))
}

/// CLI-level options that override or extend the config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed_override: Option<u64>,
    pub out_override: Option<PathBuf>,
    pub event_log: bool,
}

fn effective_scenario(
    loaded: &LoadedScenario,
    opts: &RunOptions,
) -> (LoadedScenario, PathBuf) {
    let mut scenario = loaded.clone();
    if let Some(seed) = opts.seed_override {
        scenario.config.seed = seed;
    }
    let out = opts
        .out_override
        .clone()
        .or_else(|| scenario.config.output_dir.as_ref().map(|d| resolve_path(&scenario.base_dir, d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    (scenario, out)
}

pub struct ScenarioArtifacts {
    pub out_dir: PathBuf,
    pub summary: RunSummary,
    pub metrics_csv: PathBuf,
    pub manifest: PathBuf,
}

/// `simulate`: runs the first policy bundle and writes metrics, summary,
/// manifest, and optionally the event log.
pub fn run_scenario(
    loaded: &LoadedScenario,
    opts: &RunOptions,
) -> Result<ScenarioArtifacts, HarnessError> {
    let (scenario, out_dir) = effective_scenario(loaded, opts);
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err("creating output dir", e))?;
    let bundle = &scenario.config.policies[0];
    let (output, _) = run_policy(RunRequest {
        scenario: &scenario,
        bundle,
        agent: None,
        train: false,
        capture_events: opts.event_log,
        episode: 0,
    })?;
    let metrics_csv = out_dir.join("metrics.csv");
    emit_csv(std::slice::from_ref(&output.summary), &metrics_csv)?;
    let summary_path = out_dir.join("summary.json");
    let body = serde_json::to_string_pretty(&output.summary)
        .map_err(|e| HarnessError::Runtime(format!("summary encoding: {e}")))?;
    std::fs::write(&summary_path, body).map_err(|e| io_err("writing summary", e))?;
    if opts.event_log {
        write_events(&out_dir, &output.policy, &output.events)?;
    }
    let manifest = write_manifest(
        &out_dir,
        "simulate",
        &scenario,
        std::slice::from_ref(&output.policy),
        std::slice::from_ref(&output.arrivals_sha256),
    )?;
    Ok(ScenarioArtifacts { out_dir, summary: output.summary, metrics_csv, manifest })
}

#[derive(Debug)]
pub struct CompareArtifacts {
    pub out_dir: PathBuf,
    pub summaries: Vec<RunSummary>,
    pub comparison_csv: PathBuf,
    pub chart_paths: Vec<PathBuf>,
}

/// Overall per-policy row used in the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: String,
    pub completed: u64,
    pub rejected: u64,
    pub rt_mean: f64,
    pub rt_p95: f64,
    pub util_mean: f64,
    pub util_var: f64,
    pub scale_eff: f64,
    pub cost: f64,
    pub delta_rt_mean_pct: f64,
    pub delta_util_var_pct: f64,
    pub delta_scale_eff_pct: f64,
}

fn pct_delta(value: f64, baseline: f64) -> f64 {
    if baseline != 0.0 {
        (value - baseline) / baseline * 100.0
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn comparison_rows(summaries: &[RunSummary]) -> Vec<ComparisonRow> {
    let base_rt = summaries[0].overall_rt_mean();
    let base_var = summaries[0].mean_utilization_variance();
    let base_eff = summaries[0].overall_scaling_efficiency();
    summaries
        .iter()
        .map(|s| {
            let rt = s.overall_rt_mean();
            let var = s.mean_utilization_variance();
            let eff = s.overall_scaling_efficiency();
            ComparisonRow {
                policy: s.policy.clone(),
                completed: s.completed,
                rejected: s.rejected,
                rt_mean: rt,
                rt_p95: s.overall_rt_p95(),
                util_mean: s.mean_utilization(),
                util_var: var,
                scale_eff: eff,
                cost: s.cost,
                delta_rt_mean_pct: pct_delta(rt, base_rt),
                delta_util_var_pct: pct_delta(var, base_var),
                delta_scale_eff_pct: pct_delta(eff, base_eff),
            }
        })
        .collect()
}

pub fn comparison_csv_string(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "policy,completed,rejected,rt_mean,rt_p95,util_mean,util_var,scale_eff,cost,delta_rt_mean_pct,delta_util_var_pct,delta_scale_eff_pct\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.policy,
            r.completed,
            r.rejected,
            r.rt_mean,
            r.rt_p95,
            r.util_mean,
            r.util_var,
            r.scale_eff,
            r.cost,
            r.delta_rt_mean_pct,
            r.delta_util_var_pct,
            r.delta_scale_eff_pct
        )
        .expect("string write cannot fail");
    }
    out
}

/// `compare`: runs every bundle on the identical workload realization,
/// verifies the arrival hashes agree, and writes the per-interval table,
/// the overall comparison table with deltas against the first bundle, and
/// the three standard charts.
pub fn compare_policies(
    loaded: &LoadedScenario,
    opts: &RunOptions,
) -> Result<CompareArtifacts, HarnessError> {
    let (scenario, out_dir) = effective_scenario(loaded, opts);
    if scenario.config.policies.len() < 2 {
        return Err(HarnessError::Validation(format!(
            "compare needs at least 2 policy bundles, config lists {}",
            scenario.config.policies.len()
        )));
    }
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err("creating output dir", e))?;
    let mut outputs = Vec::with_capacity(scenario.config.policies.len());
    for bundle in &scenario.config.policies {
        let (output, _) = run_policy(RunRequest {
            scenario: &scenario,
            bundle,
            agent: None,
            train: false,
            capture_events: opts.event_log,
            episode: 0,
        })?;
        if opts.event_log {
            write_events(&out_dir, &output.policy, &output.events)?;
        }
        outputs.push(output);
    }
    let first_hash = outputs[0].arrivals_sha256.clone();
    for o in &outputs {
        if o.arrivals_sha256 != first_hash {
            return Err(HarnessError::Runtime(format!(
                "workload realization diverged: {} saw arrival hash {} but {} saw {}",
                outputs[0].policy, first_hash, o.policy, o.arrivals_sha256
            )));
        }
    }
    let summaries: Vec<RunSummary> = outputs.iter().map(|o| o.summary.clone()).collect();
    let metrics_csv = out_dir.join("metrics.csv");
    emit_csv(&summaries, &metrics_csv)?;
    let rows = comparison_rows(&summaries);
    let comparison_csv = out_dir.join("comparison.csv");
    std::fs::write(&comparison_csv, comparison_csv_string(&rows))
        .map_err(|e| io_err("writing comparison table", e))?;
    let mut chart_paths = Vec::new();
    for metric in ChartMetric::ALL {
        let path = out_dir.join(format!("chart_{}.svg", metric.id()));
        emit_svg_chart(&summaries, metric, &path)?;
        chart_paths.push(path);
    }
    let policies: Vec<String> = outputs.iter().map(|o| o.policy.clone()).collect();
    let hashes: Vec<String> = outputs.iter().map(|o| o.arrivals_sha256.clone()).collect();
    write_manifest(&out_dir, "compare", &scenario, &policies, &hashes)?;
    Ok(CompareArtifacts { out_dir, summaries, comparison_csv, chart_paths })
}

pub struct TrainArtifacts {
    pub out_dir: PathBuf,
    pub checkpoint: PathBuf,
    pub training_csv: PathBuf,
    /// Mean per-interval reward of each episode.
    pub episode_rewards: Vec<f64>,
    pub agent: DdpgAgent,
}

fn ddpg_training_bundle(config: &ScenarioConfig) -> PolicyBundle {
    config
        .policies
        .iter()
        .find(|b| matches!(b.balancer, BalancerChoice::Ddpg(_)))
        .cloned()
        .unwrap_or(PolicyBundle {
            name: None,
            balancer: BalancerChoice::Ddpg(DdpgBundle {
                checkpoint: None,
                explore: true,
                decentralized: false,
            }),
            autoscaler: AutoscalerChoice::Static,
        })
}

/// `train`: runs the configured number of training episodes (each a fresh
/// workload realization of the same profile), appends one CSV row per
/// gradient step, and checkpoints the best-mean-reward episode's agent.
pub fn train_command(
    loaded: &LoadedScenario,
    opts: &RunOptions,
) -> Result<TrainArtifacts, HarnessError> {
    let (scenario, out_dir) = effective_scenario(loaded, opts);
    std::fs::create_dir_all(&out_dir).map_err(|e| io_err("creating output dir", e))?;
    let cfg = &scenario.config;
    let bundle = ddpg_training_bundle(cfg);
    let ddpg = match &bundle.balancer {
        BalancerChoice::Ddpg(d) => d.clone(),
        _ => unreachable!("ddpg_training_bundle always returns a ddpg bundle"),
    };
    let sim_cfg = cfg.cluster.to_sim_config(&scenario.base_dir)?;
    let mut agent = if let Some(resume) = &cfg.training.resume {
        let path = resolve_path(&scenario.base_dir, resume);
        DdpgAgent::load_checkpoint(&path).map_err(|e| {
            HarnessError::Validation(format!("training.resume {}: {e}", path.display()))
        })?
    } else {
        build_agent(&scenario, &ddpg, &sim_cfg)?
    };

    let mut csv = String::from("step,critic_loss,actor_objective,reward\n");
    let mut episode_rewards = Vec::with_capacity(cfg.training.episodes);
    let mut best: Option<(f64, String)> = None;
    for episode in 0..cfg.training.episodes {
        let (output, agent_back) = run_policy(RunRequest {
            scenario: &scenario,
            bundle: &bundle,
            agent: Some(agent),
            train: true,
            capture_events: false,
            episode: episode as u64,
        })?;
        agent = agent_back.expect("ddpg bundle always returns its agent");
        for (step, critic_loss, actor_objective, reward) in &output.training_rows {
            writeln!(csv, "{step},{critic_loss:.6},{actor_objective:.6},{reward:.6}")
                .expect("string write cannot fail");
        }
        let mean_reward = mean(&output.rewards);
        episode_rewards.push(mean_reward);
        let is_best = best.as_ref().is_none_or(|(r, _)| mean_reward > *r);
        if is_best {
            let snapshot = agent
                .to_checkpoint_json()
                .map_err(|e| HarnessError::Runtime(format!("checkpoint encoding: {e}")))?;
            best = Some((mean_reward, snapshot));
        }
    }
    let checkpoint_body = match best {
        Some((_, snapshot)) => snapshot,
        None => agent
            .to_checkpoint_json()
            .map_err(|e| HarnessError::Runtime(format!("checkpoint encoding: {e}")))?,
    };
    let checkpoint = out_dir.join("checkpoint.json");
    std::fs::write(&checkpoint, checkpoint_body).map_err(|e| io_err("writing checkpoint", e))?;
    let training_csv = out_dir.join("training.csv");
    std::fs::write(&training_csv, csv).map_err(|e| io_err("writing training table", e))?;
    write_manifest(&out_dir, "train", &scenario, &[bundle.label()], &[])?;
    Ok(TrainArtifacts { out_dir, checkpoint, training_csv, episode_rewards, agent })
}

/// `trace-convert`: reads a raw `timestamp_s,cpu_request,duration_s` trace and
/// writes the canonical requests file. Returns (kept, malformed) counts.
pub fn trace_convert(
    input: &Path,
    output: &Path,
    cost_scale: f64,
) -> Result<(usize, usize), HarnessError> {
    if !(cost_scale > 0.0) {
        return Err(HarnessError::Validation(format!(
            "cost scale must be positive, got {cost_scale}"
        )));
    }
    let TraceLoad { requests, malformed } = load_trace(input, cost_scale)
        .map_err(|e| HarnessError::Validation(format!("trace {}: {e}", input.display())))?;
    let file = RequestsFile {
        schema_version: 1,
        requests: requests
            .iter()
            .map(|r| RequestSpec { arrival_time: r.arrival_time, cost: r.cost })
            .collect(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| HarnessError::Runtime(format!("requests encoding: {e}")))?;
    std::fs::write(output, body).map_err(|e| io_err("writing requests file", e))?;
    Ok((file.requests.len(), malformed.len()))
}
