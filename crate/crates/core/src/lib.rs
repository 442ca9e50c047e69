//! scalesim — deterministic discrete-event simulation of a cloud AI-inference
//! cluster, plus the policies that drive it.
//!
//! The crate is organized around a single event-driven cluster model
//! ([`sim`]) that serves a request stream, and a set of interchangeable
//! policies that decide where requests go and how much capacity each node
//! holds:
//!
//! * [`balancer`] — a GCN feature extractor feeding a DDPG actor-critic that
//!   emits simplex-constrained allocation fractions, trained against the
//!   simulator with replay and target networks.
//! * [`gpso`] — a genetic-algorithm phase that seeds a particle swarm,
//!   minimizing a cost-plus-peak-load objective to produce resource plans.
//! * [`forecast`] — a small feedforward demand forecaster (plus a
//!   moving-average fallback) whose horizon feeds both the agent state and
//!   the autoscaler.
//! * [`baselines`] — round robin, least connections, HPA-style threshold
//!   scaling, and rule-based scaling for comparison runs.
//!
//! [`numgrad`] supplies the dense-matrix math and reverse-mode autodiff the
//! learned components share. [`report`] aggregates runs into CSV tables and
//! SVG charts, and [`harness`] wires everything into config-driven scenario,
//! training, and comparison commands (exposed by the `scalesim` binary).
//!
//! Every run is a pure function of its config and seed: all randomness flows
//! from one seed through named sub-streams ([`rng`]), and identical inputs
//! produce byte-identical artifacts.

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN, which the rewrite clippy suggests would
// silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Matrix and swarm code indexes several parallel arrays per iteration;
// zipped-iterator rewrites obscure the positional math.
#![allow(clippy::needless_range_loop)]

pub mod balancer;
pub mod baselines;
pub mod forecast;
pub mod gpso;
pub mod harness;
pub mod numgrad;
pub mod report;
pub mod rng;
pub mod sim;
