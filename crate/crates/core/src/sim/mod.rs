//! Deterministic discrete-event simulation of a cluster of inference nodes.
//!
//! Each node owns an integer number of resource units; its service capacity
//! is `units × unit_rate` service-units per second and it serves one request
//! at a time from a FIFO queue. Time advances through an event calendar with
//! a fixed tie-break (finish, then actuation, then arrival, then the sample
//! boundary, then insertion order), so identical inputs replay identically.
//!
//! Resource plans take effect after an actuation delay; a request in flight
//! when its node is rescaled continues with its remaining work served at the
//! new rate. Scaling a node to zero units pauses the request until units
//! come back.

pub mod workload;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use workload::{generate_workload, load_trace, CostDistribution, TraceError, WorkloadKind, WorkloadProfile};

/// One unit of work flowing through the cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub request_id: u64,
    pub arrival_time: f64,
    /// Service units demanded; a node with capacity `c` serves it in
    /// `cost / c` seconds of uninterrupted service.
    pub cost: f64,
    pub assigned_node: Option<usize>,
    pub start_time: Option<f64>,
    pub finish_time: Option<f64>,
}

impl Request {
    pub fn new(request_id: u64, arrival_time: f64, cost: f64) -> Self {
        Request {
            request_id,
            arrival_time,
            cost,
            assigned_node: None,
            start_time: None,
            finish_time: None,
        }
    }

    pub fn response_time(&self) -> Option<f64> {
        self.finish_time.map(|f| f - self.arrival_time)
    }
}

/// How a routing policy answers "where does this request go".
#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    /// Route to one concrete node.
    Node(usize),
    /// Route proportionally: the simulator samples a node from these
    /// weights (after masking nodes with zero units) using its own RNG.
    Spread(Vec<f64>),
}

/// Cluster state visible to a routing policy when a request arrives.
#[derive(Debug, Clone)]
pub struct RoutingView {
    pub clock: f64,
    pub request_id: u64,
    pub cost: f64,
    /// Queue length + in-flight count per node.
    pub loads: Vec<usize>,
    pub units: Vec<u32>,
}

/// Routing policy consulted once per arriving request.
pub trait Assigner {
    fn assign(&mut self, view: &RoutingView) -> Assignment;
}

impl<F: FnMut(&RoutingView) -> Assignment> Assigner for F {
    fn assign(&mut self, view: &RoutingView) -> Assignment {
        self(view)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("policy error: {0}")]
    Policy(String),
    #[error("allocation error: {0}")]
    Allocation(String),
    #[error("invalid cluster configuration: {0}")]
    Config(String),
}

/// Node communication topology used to derive the adjacency matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Every pair of distinct nodes connected.
    Full,
    /// Node i connected to (i±1) mod N.
    Ring,
    /// Chain without wraparound: node i connected to i+1.
    Path,
    /// Node 0 connected to every other node.
    Star,
    /// Explicit 0/1 matrix; must be symmetric with zero diagonal.
    Explicit(Vec<Vec<u8>>),
}

impl Topology {
    /// Materialises the adjacency matrix for `n` nodes.
    pub fn adjacency(&self, n: usize) -> Result<Vec<Vec<u8>>, SimError> {
        let mut a = vec![vec![0u8; n]; n];
        match self {
            Topology::Full => {
                for (i, row) in a.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = u8::from(i != j);
                    }
                }
            }
            Topology::Ring => {
                if n > 1 {
                    for i in 0..n {
                        a[i][(i + 1) % n] = 1;
                        a[(i + 1) % n][i] = 1;
                    }
                }
            }
            Topology::Path => {
                for i in 1..n {
                    a[i - 1][i] = 1;
                    a[i][i - 1] = 1;
                }
            }
            Topology::Star => {
                for i in 1..n {
                    a[0][i] = 1;
                    a[i][0] = 1;
                }
            }
            Topology::Explicit(m) => {
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    return Err(SimError::Config(format!(
                        "explicit adjacency must be {n}x{n}"
                    )));
                }
                for (i, row) in m.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if v > 1 {
                            return Err(SimError::Config("adjacency entries must be 0 or 1".into()));
                        }
                        if m[j][i] != v {
                            return Err(SimError::Config("adjacency must be symmetric".into()));
                        }
                        if i == j && v != 0 {
                            return Err(SimError::Config("adjacency diagonal must be zero".into()));
                        }
                        a[i][j] = v;
                    }
                }
            }
        }
        Ok(a)
    }
}

fn default_topology() -> Topology {
    Topology::Full
}

pub(crate) fn default_actuation_delay() -> f64 {
    10.0
}

pub(crate) fn default_unit_rate() -> f64 {
    1.0
}

fn default_min_units() -> u32 {
    0
}

pub(crate) fn default_max_units() -> u32 {
    32
}

/// Static description of the cluster under simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    /// Initial resource units per node; the vector length fixes N.
    pub nodes: Vec<u32>,
    /// Service units per second contributed by each resource unit.
    #[serde(default = "default_unit_rate")]
    pub unit_rate: f64,
    #[serde(default = "default_min_units")]
    pub min_units: u32,
    #[serde(default = "default_max_units")]
    pub max_units: u32,
    /// Seconds between requesting a resource plan and it taking effect.
    #[serde(default = "default_actuation_delay")]
    pub actuation_delay: f64,
    #[serde(default = "default_topology")]
    pub topology: Topology,
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.nodes.is_empty() {
            return Err(SimError::Config("cluster needs at least one node".into()));
        }
        if !(self.unit_rate > 0.0) {
            return Err(SimError::Config(format!(
                "unit_rate must be positive, got {}",
                self.unit_rate
            )));
        }
        if self.min_units > self.max_units {
            return Err(SimError::Config(format!(
                "min_units {} exceeds max_units {}",
                self.min_units, self.max_units
            )));
        }
        if !(self.actuation_delay >= 0.0) {
            return Err(SimError::Config(format!(
                "actuation_delay must be nonnegative, got {}",
                self.actuation_delay
            )));
        }
        for (i, &u) in self.nodes.iter().enumerate() {
            if u < self.min_units || u > self.max_units {
                return Err(SimError::Config(format!(
                    "node {i} starts with {u} units, outside [{}, {}]",
                    self.min_units, self.max_units
                )));
            }
        }
        self.topology.adjacency(self.nodes.len()).map(|_| ())
    }
}

/// Kind tag on an event-log record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    Start,
    Finish,
    Reject,
    Actuation,
    Sample,
}

/// One line of the structured event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    pub kind: EventKind,
    pub node: Option<usize>,
    pub request_id: Option<u64>,
}

/// Audit entry produced by every `apply_allocation` call.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationAudit {
    pub requested_at: f64,
    pub effective_at: f64,
    pub plan: Vec<u32>,
}

/// Per-interval cluster measurements emitted by [`Cluster::snapshot`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSample {
    pub clock: f64,
    /// Length of the measured interval in seconds.
    pub interval: f64,
    /// Fraction of the interval each node spent serving, in [0, 1].
    pub utilization: Vec<f64>,
    /// Queue length + in-flight count per node at the boundary.
    pub loads: Vec<usize>,
    pub units: Vec<u32>,
    pub in_flight: Vec<usize>,
    /// Arrivals processed during the interval.
    pub arrivals: u64,
    pub arrival_rate: f64,
    /// Response times of requests that finished during the interval.
    pub response_times: Vec<f64>,
    pub submitted: u64,
    pub completed: u64,
    pub queued: u64,
    pub in_service: u64,
    pub rejected: u64,
    /// ∫ units dt over the interval, summed across nodes.
    pub provisioned_unit_seconds: f64,
    /// ∫ units dt restricted to busy time, summed across nodes.
    pub busy_unit_seconds: f64,
}

impl MetricsSample {
    /// Conservation check: every submitted request is accounted for.
    pub fn is_conserved(&self) -> bool {
        self.submitted == self.completed + self.queued + self.in_service + self.rejected
    }
}

#[derive(Debug, Clone)]
struct InService {
    request: usize,
    remaining_work: f64,
}

#[derive(Debug, Clone)]
struct Node {
    units: u32,
    queue: VecDeque<usize>,
    serving: Option<InService>,
    /// Bumped on every rescale; finish events carry the epoch they were
    /// scheduled under and are ignored if it no longer matches.
    epoch: u64,
    acct_clock: f64,
    busy_seconds: f64,
    busy_unit_seconds: f64,
    provisioned_unit_seconds: f64,
}

impl Node {
    fn new(units: u32) -> Self {
        Node {
            units,
            queue: VecDeque::new(),
            serving: None,
            epoch: 0,
            acct_clock: 0.0,
            busy_seconds: 0.0,
            busy_unit_seconds: 0.0,
            provisioned_unit_seconds: 0.0,
        }
    }

    fn capacity(&self, unit_rate: f64) -> f64 {
        self.units as f64 * unit_rate
    }

    fn load(&self) -> usize {
        self.queue.len() + usize::from(self.serving.is_some())
    }

    /// Brings the node's continuous accounting (busy time, unit-seconds,
    /// remaining work) up to `now`. Must run before any capacity change.
    fn accrue(&mut self, now: f64, unit_rate: f64, served_work: &mut f64) {
        let dt = now - self.acct_clock;
        if dt > 0.0 {
            self.provisioned_unit_seconds += self.units as f64 * dt;
            if let Some(serving) = &mut self.serving {
                if self.units > 0 {
                    self.busy_seconds += dt;
                    self.busy_unit_seconds += self.units as f64 * dt;
                    let work = self.units as f64 * unit_rate * dt;
                    serving.remaining_work -= work;
                    *served_work += work;
                }
            }
        }
        self.acct_clock = now;
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Arrival { request: usize },
    Finish { node: usize, epoch: u64 },
    Actuation { plan: Vec<u32> },
    Boundary,
}

impl Payload {
    fn rank(&self) -> u8 {
        match self {
            Payload::Finish { .. } => 0,
            Payload::Actuation { .. } => 1,
            Payload::Arrival { .. } => 2,
            Payload::Boundary => 3,
        }
    }
}

#[derive(Debug)]
struct Event {
    time: f64,
    rank: u8,
    seq: u64,
    payload: Payload,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse so the earliest event wins.
        self.time
            .total_cmp(&other.time)
            .then(self.rank.cmp(&other.rank))
            .then(self.seq.cmp(&other.seq))
            .reverse()
    }
}

/// The running simulation.
#[derive(Debug)]
pub struct Cluster {
    config: ClusterConfig,
    adjacency: Vec<Vec<u8>>,
    nodes: Vec<Node>,
    requests: Vec<Request>,
    calendar: BinaryHeap<Event>,
    clock: f64,
    seq: u64,
    routing_rng: rand_chacha::ChaCha8Rng,
    // lifetime counters
    submitted: u64,
    completed: u64,
    rejected: u64,
    served_work: f64,
    total_cost_completed: f64,
    total_provisioned_unit_seconds: f64,
    total_busy_unit_seconds: f64,
    // interval accumulators, reset at each snapshot
    interval_start: f64,
    interval_arrivals: u64,
    interval_response_times: Vec<f64>,
    audit: Vec<AllocationAudit>,
    event_log: Option<Vec<EventRecord>>,
}

impl Cluster {
    /// Builds a cluster and preloads `requests` as arrival events. Request
    /// ids are rewritten to match their index so the event log and the
    /// request arena always agree.
    pub fn new(config: ClusterConfig, mut requests: Vec<Request>, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        let adjacency = config.topology.adjacency(config.nodes.len())?;
        requests.sort_by(|a, b| a.arrival_time.total_cmp(&b.arrival_time));
        let mut calendar = BinaryHeap::with_capacity(requests.len() + 16);
        let mut seq = 0u64;
        for (idx, req) in requests.iter_mut().enumerate() {
            req.request_id = idx as u64;
            if !(req.cost > 0.0) {
                return Err(SimError::Config(format!(
                    "request {idx} has nonpositive cost {}",
                    req.cost
                )));
            }
            if !(req.arrival_time >= 0.0) {
                return Err(SimError::Config(format!(
                    "request {idx} has negative arrival time {}",
                    req.arrival_time
                )));
            }
            calendar.push(Event {
                time: req.arrival_time,
                rank: 2,
                seq,
                payload: Payload::Arrival { request: idx },
            });
            seq += 1;
        }
        let nodes = config.nodes.iter().map(|&u| Node::new(u)).collect();
        Ok(Cluster {
            adjacency,
            nodes,
            requests,
            calendar,
            clock: 0.0,
            seq,
            routing_rng: crate::rng::substream(seed, "sim-routing"),
            submitted: 0,
            completed: 0,
            rejected: 0,
            served_work: 0.0,
            total_cost_completed: 0.0,
            total_provisioned_unit_seconds: 0.0,
            total_busy_unit_seconds: 0.0,
            interval_start: 0.0,
            interval_arrivals: 0,
            interval_response_times: Vec::new(),
            audit: Vec::new(),
            event_log: None,
            config,
        })
    }

    pub fn enable_event_log(&mut self) {
        if self.event_log.is_none() {
            self.event_log = Some(Vec::new());
        }
    }

    /// Drains accumulated event-log records.
    pub fn take_event_records(&mut self) -> Vec<EventRecord> {
        self.event_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn units(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.units).collect()
    }

    pub fn loads(&self) -> Vec<usize> {
        self.nodes.iter().map(Node::load).collect()
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn audit_log(&self) -> &[AllocationAudit] {
        &self.audit
    }

    /// Total service-units delivered to requests so far.
    pub fn served_work(&self) -> f64 {
        self.served_work
    }

    /// Σ cost over completed requests; equals [`Cluster::served_work`] up to
    /// floating-point accumulation order.
    pub fn completed_cost(&self) -> f64 {
        self.total_cost_completed
    }

    fn log(&mut self, t: f64, kind: EventKind, node: Option<usize>, request_id: Option<u64>) {
        if let Some(log) = &mut self.event_log {
            log.push(EventRecord { t, kind, node, request_id });
        }
    }

    fn push_event(&mut self, time: f64, payload: Payload) {
        let rank = payload.rank();
        let event = Event { time, rank, seq: self.seq, payload };
        self.seq += 1;
        self.calendar.push(event);
    }

    /// Requests a new per-node unit plan; it takes effect after the
    /// configured actuation delay. Always appends an audit entry.
    pub fn apply_allocation(&mut self, plan: &[u32]) -> Result<(), SimError> {
        if plan.len() != self.nodes.len() {
            return Err(SimError::Allocation(format!(
                "plan has {} entries for {} nodes",
                plan.len(),
                self.nodes.len()
            )));
        }
        for (i, &u) in plan.iter().enumerate() {
            if u < self.config.min_units || u > self.config.max_units {
                return Err(SimError::Allocation(format!(
                    "plan allocates {u} units to node {i}, outside [{}, {}]",
                    self.config.min_units, self.config.max_units
                )));
            }
        }
        let effective_at = self.clock + self.config.actuation_delay;
        self.audit.push(AllocationAudit {
            requested_at: self.clock,
            effective_at,
            plan: plan.to_vec(),
        });
        self.push_event(effective_at, Payload::Actuation { plan: plan.to_vec() });
        Ok(())
    }

    /// Advances simulated time to `until`, processing every event due on the
    /// way and consulting `assigner` once per arrival.
    pub fn advance(&mut self, until: f64, assigner: &mut dyn Assigner) -> Result<(), SimError> {
        assert!(
            until >= self.clock,
            "advance target {until} precedes clock {}",
            self.clock
        );
        self.push_event(until, Payload::Boundary);
        loop {
            let event = self.calendar.pop().expect("boundary sentinel guarantees an event");
            self.clock = event.time;
            match event.payload {
                Payload::Boundary => {
                    if event.time == until {
                        return Ok(());
                    }
                    // A stale sentinel from an aborted advance; skip it.
                }
                Payload::Finish { node, epoch } => self.handle_finish(event.time, node, epoch),
                Payload::Actuation { plan } => self.handle_actuation(event.time, &plan),
                Payload::Arrival { request } => {
                    self.handle_arrival(event.time, request, assigner)?;
                }
            }
        }
    }

    fn handle_arrival(
        &mut self,
        t: f64,
        request: usize,
        assigner: &mut dyn Assigner,
    ) -> Result<(), SimError> {
        self.submitted += 1;
        self.interval_arrivals += 1;
        let view = RoutingView {
            clock: t,
            request_id: self.requests[request].request_id,
            cost: self.requests[request].cost,
            loads: self.loads(),
            units: self.units(),
        };
        let n = self.nodes.len();
        let target = match assigner.assign(&view) {
            Assignment::Node(i) => {
                if i >= n {
                    return Err(SimError::Policy(format!(
                        "assigner routed request {} to node {i}, but the cluster has {n} nodes (t = {t})",
                        view.request_id
                    )));
                }
                if self.nodes[i].units == 0 {
                    None
                } else {
                    Some(i)
                }
            }
            Assignment::Spread(weights) => {
                if weights.len() != n {
                    return Err(SimError::Policy(format!(
                        "assigner returned {} weights for {n} nodes (t = {t})",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(SimError::Policy(format!(
                        "assigner returned invalid weights {weights:?} (t = {t})"
                    )));
                }
                self.sample_node(&weights)
            }
        };
        match target {
            None => {
                self.requests[request].assigned_node = None;
                self.rejected += 1;
                self.log(t, EventKind::Reject, None, Some(view.request_id));
            }
            Some(node) => {
                self.requests[request].assigned_node = Some(node);
                self.log(t, EventKind::Arrival, Some(node), Some(view.request_id));
                self.nodes[node].queue.push_back(request);
                self.start_next_if_idle(t, node);
            }
        }
        Ok(())
    }

    /// Categorical draw over `weights` with zero-unit nodes masked out.
    fn sample_node(&mut self, weights: &[f64]) -> Option<usize> {
        use rand::Rng;
        let masked: Vec<f64> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| if self.nodes[i].units > 0 { w } else { 0.0 })
            .collect();
        let total: f64 = masked.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut u = self.routing_rng.random::<f64>() * total;
        let mut last = None;
        for (i, &w) in masked.iter().enumerate() {
            if w > 0.0 {
                last = Some(i);
                u -= w;
                if u <= 0.0 {
                    return Some(i);
                }
            }
        }
        last
    }

    fn start_next_if_idle(&mut self, t: f64, node: usize) {
        if self.nodes[node].serving.is_some() || self.nodes[node].units == 0 {
            return;
        }
        let Some(request) = self.nodes[node].queue.pop_front() else {
            return;
        };
        self.nodes[node].accrue(t, self.config.unit_rate, &mut self.served_work);
        let cost = self.requests[request].cost;
        self.requests[request].start_time = Some(t);
        self.nodes[node].serving = Some(InService { request, remaining_work: cost });
        let capacity = self.nodes[node].capacity(self.config.unit_rate);
        let epoch = self.nodes[node].epoch;
        let request_id = self.requests[request].request_id;
        self.push_event(t + cost / capacity, Payload::Finish { node, epoch });
        self.log(t, EventKind::Start, Some(node), Some(request_id));
    }

    fn handle_finish(&mut self, t: f64, node: usize, epoch: u64) {
        if self.nodes[node].epoch != epoch {
            return; // superseded by a rescale
        }
        self.nodes[node].accrue(t, self.config.unit_rate, &mut self.served_work);
        let serving = self.nodes[node]
            .serving
            .take()
            .expect("a live finish event implies an in-service request");
        // Settle the last ulps of work so served totals track costs exactly.
        self.served_work += serving.remaining_work;
        let req = &mut self.requests[serving.request];
        req.finish_time = Some(t);
        self.completed += 1;
        self.total_cost_completed += req.cost;
        self.interval_response_times.push(t - req.arrival_time);
        let request_id = req.request_id;
        self.log(t, EventKind::Finish, Some(node), Some(request_id));
        self.start_next_if_idle(t, node);
    }

    fn handle_actuation(&mut self, t: f64, plan: &[u32]) {
        self.log(t, EventKind::Actuation, None, None);
        for (i, &new_units) in plan.iter().enumerate() {
            if self.nodes[i].units == new_units {
                continue;
            }
            self.nodes[i].accrue(t, self.config.unit_rate, &mut self.served_work);
            self.nodes[i].units = new_units;
            self.nodes[i].epoch += 1;
            if let Some(serving) = &self.nodes[i].serving {
                if new_units > 0 {
                    let capacity = self.nodes[i].capacity(self.config.unit_rate);
                    let finish_at = t + serving.remaining_work / capacity;
                    let epoch = self.nodes[i].epoch;
                    self.push_event(finish_at, Payload::Finish { node: i, epoch });
                }
                // with zero units the request pauses: no finish event exists
                // until a later actuation restores capacity
            } else if new_units > 0 {
                self.start_next_if_idle(t, i);
            }
        }
    }

    /// Closes the current measurement interval at the clock and returns its
    /// metrics. Also resets the interval accumulators.
    pub fn snapshot(&mut self) -> MetricsSample {
        let t = self.clock;
        for node in &mut self.nodes {
            node.accrue(t, self.config.unit_rate, &mut self.served_work);
        }
        let interval = t - self.interval_start;
        let utilization: Vec<f64> = self
            .nodes
            .iter()
            .map(|n| {
                if interval > 0.0 {
                    (n.busy_seconds / interval).min(1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let provisioned: f64 = self.nodes.iter().map(|n| n.provisioned_unit_seconds).sum();
        let busy: f64 = self.nodes.iter().map(|n| n.busy_unit_seconds).sum();
        self.total_provisioned_unit_seconds += provisioned;
        self.total_busy_unit_seconds += busy;
        let queued: u64 = self.nodes.iter().map(|n| n.queue.len() as u64).sum();
        let in_service: u64 = self.nodes.iter().map(|n| u64::from(n.serving.is_some())).sum();
        let sample = MetricsSample {
            clock: t,
            interval,
            utilization,
            loads: self.loads(),
            units: self.units(),
            in_flight: self.nodes.iter().map(|n| usize::from(n.serving.is_some())).collect(),
            arrivals: self.interval_arrivals,
            arrival_rate: if interval > 0.0 {
                self.interval_arrivals as f64 / interval
            } else {
                0.0
            },
            response_times: std::mem::take(&mut self.interval_response_times),
            submitted: self.submitted,
            completed: self.completed,
            queued,
            in_service,
            rejected: self.rejected,
            provisioned_unit_seconds: provisioned,
            busy_unit_seconds: busy,
        };
        for node in &mut self.nodes {
            node.busy_seconds = 0.0;
            node.busy_unit_seconds = 0.0;
            node.provisioned_unit_seconds = 0.0;
        }
        self.interval_start = t;
        self.interval_arrivals = 0;
        self.log(t, EventKind::Sample, None, None);
        sample
    }

    /// Lifetime totals of (provisioned, busy) unit-seconds across all closed
    /// intervals.
    pub fn lifetime_unit_seconds(&self) -> (f64, f64) {
        (self.total_provisioned_unit_seconds, self.total_busy_unit_seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(nodes: Vec<u32>, delay: f64) -> ClusterConfig {
        ClusterConfig {
            nodes,
            unit_rate: 1.0,
            min_units: 0,
            max_units: 32,
            actuation_delay: delay,
            topology: Topology::Full,
        }
    }

    fn to_node(i: usize) -> impl FnMut(&RoutingView) -> Assignment {
        move |_: &RoutingView| Assignment::Node(i)
    }

    #[test]
    fn empty_calendar_only_moves_clock() {
        let mut cluster = Cluster::new(config(vec![1], 0.0), vec![], 1).unwrap();
        cluster.advance(5.0, &mut to_node(0)).unwrap();
        assert_eq!(cluster.clock(), 5.0);
        let sample = cluster.snapshot();
        assert_eq!(sample.submitted, 0);
        assert_eq!(sample.utilization, vec![0.0]);
    }

    #[test]
    fn service_time_is_cost_over_capacity() {
        // capacity 2 units/s, cost 4 -> finishes at t = 2.
        let mut cfg = config(vec![2], 0.0);
        cfg.unit_rate = 1.0;
        let requests = vec![Request::new(0, 0.0, 4.0)];
        let mut cluster = Cluster::new(cfg, requests, 1).unwrap();
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        let req = &cluster.requests()[0];
        assert_eq!(req.finish_time, Some(2.0));
        assert_eq!(req.response_time(), Some(2.0));
    }

    #[test]
    fn fifo_service_order() {
        let requests = vec![Request::new(0, 0.0, 1.0), Request::new(1, 0.0, 1.0)];
        let mut cluster = Cluster::new(config(vec![1], 0.0), requests, 1).unwrap();
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        let rts: Vec<f64> = cluster.requests().iter().map(|r| r.response_time().unwrap()).collect();
        assert_eq!(rts, vec![1.0, 2.0]);
        let starts: Vec<f64> = cluster.requests().iter().map(|r| r.start_time.unwrap()).collect();
        assert!(starts[0] < starts[1]);
    }

    #[test]
    fn finish_frees_capacity_before_simultaneous_arrival() {
        // First request finishes exactly when the second arrives; the
        // tie-break must free the node first so the second starts instantly.
        let requests = vec![Request::new(0, 0.0, 1.0), Request::new(1, 1.0, 1.0)];
        let mut cluster = Cluster::new(config(vec![1], 0.0), requests, 1).unwrap();
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        assert_eq!(cluster.requests()[1].start_time, Some(1.0));
        assert_eq!(cluster.requests()[1].response_time(), Some(1.0));
    }

    #[test]
    fn rescale_mid_request_halves_remaining_time() {
        // cost 2 at capacity 1: at t = 1 one unit-second remains; doubling
        // units makes it finish at 1.5 instead of 2.
        let requests = vec![Request::new(0, 0.0, 2.0)];
        let mut cluster = Cluster::new(config(vec![1], 1.0), requests, 1).unwrap();
        cluster.apply_allocation(&[2]).unwrap(); // effective at t = 1
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        assert_eq!(cluster.requests()[0].finish_time, Some(1.5));
    }

    #[test]
    fn noop_allocation_leaves_state_but_records_audit() {
        let requests = vec![Request::new(0, 0.0, 2.0)];
        let mut cluster = Cluster::new(config(vec![1], 1.0), requests, 1).unwrap();
        cluster.apply_allocation(&[1]).unwrap();
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        assert_eq!(cluster.requests()[0].finish_time, Some(2.0));
        assert_eq!(cluster.audit_log().len(), 1);
        assert_eq!(cluster.audit_log()[0].plan, vec![1]);
        assert_eq!(cluster.audit_log()[0].effective_at, 1.0);
    }

    #[test]
    fn zero_unit_node_rejects_arrivals() {
        let requests = vec![Request::new(0, 1.0, 1.0)];
        let mut cluster = Cluster::new(config(vec![0], 0.0), requests, 1).unwrap();
        cluster.advance(5.0, &mut to_node(0)).unwrap();
        let sample = cluster.snapshot();
        assert_eq!(sample.rejected, 1);
        assert_eq!(sample.completed, 0);
        assert!(sample.is_conserved());
        assert_eq!(cluster.requests()[0].assigned_node, None);
    }

    #[test]
    fn scale_to_zero_pauses_in_flight_work() {
        // cost 3 at capacity 1; at t = 1 the node drops to 0 units, at t = 3
        // it returns to 1 unit. The request needs 2 more unit-seconds after
        // the pause: finish at t = 5.
        let requests = vec![Request::new(0, 0.0, 3.0)];
        let mut cluster = Cluster::new(config(vec![1], 1.0), requests, 1).unwrap();
        cluster.apply_allocation(&[0]).unwrap(); // effective t = 1
        cluster.advance(2.0, &mut to_node(0)).unwrap();
        cluster.apply_allocation(&[1]).unwrap(); // effective t = 3
        cluster.advance(10.0, &mut to_node(0)).unwrap();
        assert_eq!(cluster.requests()[0].finish_time, Some(5.0));
    }

    #[test]
    fn out_of_range_assignment_halts_with_diagnostic() {
        let requests = vec![Request::new(0, 0.0, 1.0)];
        let mut cluster = Cluster::new(config(vec![1, 1], 0.0), requests, 1).unwrap();
        let err = cluster.advance(5.0, &mut to_node(7)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("node 7"), "unhelpful diagnostic: {msg}");
        assert!(msg.contains("2 nodes"), "unhelpful diagnostic: {msg}");
    }

    #[test]
    fn allocation_bounds_are_enforced() {
        let mut cfg = config(vec![1], 0.0);
        cfg.max_units = 4;
        let mut cluster = Cluster::new(cfg, vec![], 1).unwrap();
        let err = cluster.apply_allocation(&[9]).unwrap_err();
        assert!(err.to_string().contains("outside"));
        let err = cluster.apply_allocation(&[1, 1]).unwrap_err();
        assert!(err.to_string().contains("1 nodes"));
    }

    #[test]
    fn utilization_reflects_busy_fraction() {
        // busy 0.3 s of a 1 s interval -> U = 0.3.
        let requests = vec![Request::new(0, 0.0, 0.3)];
        let mut cluster = Cluster::new(config(vec![1], 0.0), requests, 1).unwrap();
        cluster.advance(1.0, &mut to_node(0)).unwrap();
        let sample = cluster.snapshot();
        assert!((sample.utilization[0] - 0.3).abs() < 1e-12);
        // saturated second interval
        let more = vec![Request::new(0, 1.0, 5.0)];
        let mut cluster = Cluster::new(config(vec![1], 0.0), more, 1).unwrap();
        cluster.advance(1.0, &mut to_node(0)).unwrap();
        cluster.snapshot();
        cluster.advance(2.0, &mut to_node(0)).unwrap();
        let sample = cluster.snapshot();
        assert_eq!(sample.utilization[0], 1.0);
    }

    #[test]
    fn unit_seconds_track_provisioning_and_busy_time() {
        let requests = vec![Request::new(0, 0.0, 2.0)];
        let mut cluster = Cluster::new(config(vec![2, 1], 0.0), requests, 1).unwrap();
        cluster.advance(4.0, &mut to_node(0)).unwrap();
        let sample = cluster.snapshot();
        // node 0: 2 units x 4 s, node 1: 1 unit x 4 s
        assert!((sample.provisioned_unit_seconds - 12.0).abs() < 1e-12);
        // request of cost 2 runs 1 s on a 2-unit node
        assert!((sample.busy_unit_seconds - 2.0).abs() < 1e-12);
    }

    #[test]
    fn event_log_replays_identically() {
        let run = || {
            let profile = WorkloadProfile {
                kind: WorkloadKind::SteadyPoisson,
                base_rate: 5.0,
                amplitude: 0.0,
                period: 60.0,
                burst_rate: 0.0,
                burst_duration: 0.0,
                burst_spacing: 0.0,
                cost_distribution: CostDistribution::Uniform { min: 0.1, max: 0.5 },
                duration: 30.0,
                seed: 77,
            };
            let requests = generate_workload(&profile);
            let mut cluster = Cluster::new(config(vec![1, 2, 1], 2.0), requests, 9).unwrap();
            cluster.enable_event_log();
            let mut spread = |v: &RoutingView| {
                Assignment::Spread(vec![1.0; v.units.len()])
            };
            for k in 1..=6 {
                if k == 3 {
                    cluster.apply_allocation(&[2, 1, 2]).unwrap();
                }
                cluster.advance(k as f64 * 5.0, &mut spread).unwrap();
                cluster.snapshot();
            }
            cluster.take_event_records()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn served_work_matches_completed_cost() {
        let profile = WorkloadProfile {
            kind: WorkloadKind::SteadyPoisson,
            base_rate: 8.0,
            amplitude: 0.0,
            period: 60.0,
            burst_rate: 0.0,
            burst_duration: 0.0,
            burst_spacing: 0.0,
            cost_distribution: CostDistribution::Uniform { min: 0.2, max: 1.0 },
            duration: 40.0,
            seed: 5,
        };
        let requests = generate_workload(&profile);
        let mut cluster = Cluster::new(config(vec![2, 2], 1.0), requests, 3).unwrap();
        let mut spread = |v: &RoutingView| Assignment::Spread(vec![1.0; v.units.len()]);
        cluster.apply_allocation(&[3, 1]).unwrap();
        cluster.advance(20.0, &mut spread).unwrap();
        cluster.apply_allocation(&[1, 3]).unwrap();
        cluster.advance(60.0, &mut spread).unwrap();
        let sample = cluster.snapshot();
        assert!(sample.completed > 0);
        let served = cluster.served_work();
        let cost = cluster.completed_cost();
        // in-flight work at the horizon keeps served >= completed cost
        assert!(served >= cost - 1e-9);
        // a drained cluster matches exactly (mod accumulation order)
        let mut drained = Cluster::new(config(vec![2], 0.0), vec![
            Request::new(0, 0.0, 1.5),
            Request::new(1, 0.2, 0.7),
        ], 3).unwrap();
        drained.advance(30.0, &mut to_node(0)).unwrap();
        assert!((drained.served_work() - drained.completed_cost()).abs() < 1e-9);
    }

    #[test]
    fn adjacency_topologies() {
        let full = Topology::Full.adjacency(3).unwrap();
        assert_eq!(full, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let ring = Topology::Ring.adjacency(4).unwrap();
        assert_eq!(ring[0], vec![0, 1, 0, 1]);
        let star = Topology::Star.adjacency(3).unwrap();
        assert_eq!(star[1], vec![1, 0, 0]);
        let path = Topology::Path.adjacency(3).unwrap();
        assert_eq!(path, vec![vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]]);
        let bad = Topology::Explicit(vec![vec![0, 1], vec![0, 0]]).adjacency(2);
        assert!(bad.is_err());
        // two-node ring: single edge, still symmetric 0/1
        let two = Topology::Ring.adjacency(2).unwrap();
        assert_eq!(two, vec![vec![0, 1], vec![1, 0]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn conservation_holds_under_random_traffic_and_scaling(
            seed in 0u64..10_000,
            node_units in proptest::collection::vec(0u32..4, 1..5),
            rate in 0.5f64..12.0,
            rescale_step in 1usize..5,
        ) {
            let profile = WorkloadProfile {
                kind: WorkloadKind::SteadyPoisson,
                base_rate: rate,
                amplitude: 0.0,
                period: 60.0,
                burst_rate: 0.0,
                burst_duration: 0.0,
                burst_spacing: 0.0,
                cost_distribution: CostDistribution::Uniform { min: 0.1, max: 2.0 },
                duration: 25.0,
                seed,
            };
            let requests = generate_workload(&profile);
            let n = node_units.len();
            let mut cluster = Cluster::new(config(node_units, 2.0), requests, seed ^ 0xabcdef).unwrap();
            let mut rng = crate::rng::substream(seed, "conservation-plans");
            let mut spread = |v: &RoutingView| Assignment::Spread(vec![1.0; v.units.len()]);
            for k in 1..=10usize {
                if k % rescale_step == 0 {
                    use rand::Rng;
                    let plan: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
                    cluster.apply_allocation(&plan).unwrap();
                }
                cluster.advance(k as f64 * 2.5, &mut spread).unwrap();
                let sample = cluster.snapshot();
                prop_assert!(sample.is_conserved(),
                    "submitted {} != completed {} + queued {} + in_service {} + rejected {}",
                    sample.submitted, sample.completed, sample.queued, sample.in_service, sample.rejected);
                for &u in &sample.utilization {
                    prop_assert!((0.0..=1.0).contains(&u));
                }
            }
        }

        #[test]
        fn per_node_service_follows_arrival_order(
            seed in 0u64..10_000,
            rate in 1.0f64..10.0,
        ) {
            let profile = WorkloadProfile {
                kind: WorkloadKind::SteadyPoisson,
                base_rate: rate,
                amplitude: 0.0,
                period: 60.0,
                burst_rate: 0.0,
                burst_duration: 0.0,
                burst_spacing: 0.0,
                cost_distribution: CostDistribution::Constant(0.4),
                duration: 20.0,
                seed,
            };
            let requests = generate_workload(&profile);
            let mut cluster = Cluster::new(config(vec![1, 1], 0.0), requests, seed).unwrap();
            let mut spread = |v: &RoutingView| Assignment::Spread(vec![1.0; v.units.len()]);
            cluster.advance(100.0, &mut spread).unwrap();
            for node in 0..2 {
                let mut started: Vec<(f64, f64)> = cluster
                    .requests()
                    .iter()
                    .filter(|r| r.assigned_node == Some(node) && r.start_time.is_some())
                    .map(|r| (r.start_time.unwrap(), r.arrival_time))
                    .collect();
                started.sort_by(|a, b| a.0.total_cmp(&b.0));
                for pair in started.windows(2) {
                    prop_assert!(pair[0].1 <= pair[1].1, "service order violated arrival order");
                }
            }
            for r in cluster.requests() {
                if let (Some(s), Some(f)) = (r.start_time, r.finish_time) {
                    prop_assert!(f >= s && s >= r.arrival_time);
                }
            }
        }
    }
}
