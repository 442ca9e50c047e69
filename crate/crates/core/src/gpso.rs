//! Hybrid genetic-algorithm → particle-swarm optimiser for integer resource
//! plans.
//!
//! Stage one evolves a population of candidate plans with elitism, roulette
//! selection, single-point crossover, and per-gene mutation. Stage two seeds
//! a particle swarm with the best chromosomes and refines them in continuous
//! space, decoding positions back to integer plans by clamp-then-round. The
//! best plan ever evaluated (across both phases) is returned together with a
//! monotone best-fitness trace.
//!
//! Fitness is `Σ costs[i]·units[i] + lambda · max_i load(units)[i]`, lower
//! is better; infeasible plans score +∞.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{indexed_substream, substream};

/// Per-node integer resource assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationPlan(pub Vec<u32>);

impl AllocationPlan {
    pub fn units(&self) -> &[u32] {
        &self.0
    }

    pub fn within_bounds(&self, min_units: u32, max_units: u32) -> bool {
        self.0.iter().all(|&u| (min_units..=max_units).contains(&u))
    }
}

/// Predicted per-node load as a function of the plan.
pub enum LoadModel {
    /// Demand splits proportionally to allocated units, then normalises by
    /// node capacity: every powered node sees `demand / (Σ units × rate)`.
    /// All units zero with positive demand is infeasible.
    Proportional { total_demand: f64, unit_rate: f64 },
    /// Arbitrary pluggable model (for example the simulator itself).
    Custom(LoadFn),
}

/// Pluggable per-node load model: plan in, predicted per-node loads out.
pub type LoadFn = Box<dyn Fn(&[u32]) -> Vec<f64> + Send + Sync>;

impl fmt::Debug for LoadModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadModel::Proportional { total_demand, unit_rate } => f
                .debug_struct("Proportional")
                .field("total_demand", total_demand)
                .field("unit_rate", unit_rate)
                .finish(),
            LoadModel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl LoadModel {
    pub fn loads(&self, plan: &[u32]) -> Vec<f64> {
        match self {
            LoadModel::Proportional { total_demand, unit_rate } => {
                let total_units: u32 = plan.iter().sum();
                if *total_demand <= 0.0 {
                    vec![0.0; plan.len()]
                } else if total_units == 0 {
                    vec![f64::INFINITY; plan.len()]
                } else {
                    let shared = total_demand / (total_units as f64 * unit_rate);
                    plan.iter().map(|&u| if u > 0 { shared } else { 0.0 }).collect()
                }
            }
            LoadModel::Custom(f) => f(plan),
        }
    }
}

/// Weights of the scalarised objective.
#[derive(Debug)]
pub struct FitnessConfig {
    /// Per-unit cost of powering each node; all positive.
    pub costs: Vec<f64>,
    /// Weight on the congestion term (max predicted load).
    pub lambda: f64,
    pub load_model: LoadModel,
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<(), GpsoError> {
        if self.costs.is_empty() {
            return Err(GpsoError::Config("costs must name at least one node".into()));
        }
        if let Some((i, &c)) = self.costs.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
            return Err(GpsoError::Config(format!("cost for node {i} is {c}; must be positive")));
        }
        if !(self.lambda >= 0.0) {
            return Err(GpsoError::Config(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Evaluates a plan: weighted unit cost plus `lambda` times the worst
/// predicted node load. Pure; +∞ marks infeasibility (a node holding zero
/// units while the load model still assigns it demand).
pub fn fitness(plan: &[u32], cfg: &FitnessConfig) -> f64 {
    assert_eq!(plan.len(), cfg.costs.len(), "plan and costs disagree on node count");
    let loads = cfg.load_model.loads(plan);
    assert_eq!(loads.len(), plan.len(), "load model returned wrong arity");
    for (i, &units) in plan.iter().enumerate() {
        if units == 0 && loads[i] > 0.0 {
            return f64::INFINITY;
        }
    }
    let cost: f64 = plan.iter().zip(&cfg.costs).map(|(&u, c)| u as f64 * c).sum();
    let worst = loads.iter().cloned().fold(0.0_f64, f64::max);
    cost + cfg.lambda * worst
}

fn default_population() -> usize {
    40
}
fn default_generations() -> usize {
    30
}
fn default_crossover() -> f64 {
    0.9
}
fn default_mutation() -> f64 {
    0.05
}
fn default_elitism() -> usize {
    2
}
fn default_swarm() -> usize {
    20
}
fn default_iterations() -> usize {
    50
}
fn default_inertia() -> f64 {
    0.72
}
fn default_accel() -> f64 {
    1.49
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpsoConfig {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub ga_generations: usize,
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    #[serde(default = "default_mutation")]
    pub mutation_rate: f64,
    #[serde(default = "default_elitism")]
    pub elitism_count: usize,
    #[serde(default = "default_swarm")]
    pub swarm_size: usize,
    #[serde(default = "default_iterations")]
    pub pso_iterations: usize,
    #[serde(default = "default_inertia")]
    pub inertia: f64,
    #[serde(default = "default_accel")]
    pub c1: f64,
    #[serde(default = "default_accel")]
    pub c2: f64,
    /// Componentwise velocity cap; omitted means half the unit range.
    #[serde(default)]
    pub v_max: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for GpsoConfig {
    fn default() -> Self {
        GpsoConfig {
            population_size: default_population(),
            ga_generations: default_generations(),
            crossover_rate: default_crossover(),
            mutation_rate: default_mutation(),
            elitism_count: default_elitism(),
            swarm_size: default_swarm(),
            pso_iterations: default_iterations(),
            inertia: default_inertia(),
            c1: default_accel(),
            c2: default_accel(),
            v_max: None,
            seed: 0,
        }
    }
}

impl GpsoConfig {
    pub fn validate(&self) -> Result<(), GpsoError> {
        if self.population_size < 2 {
            return Err(GpsoError::Config("population_size must be at least 2".into()));
        }
        if self.swarm_size < 2 {
            return Err(GpsoError::Config("swarm_size must be at least 2".into()));
        }
        if self.swarm_size > self.population_size {
            return Err(GpsoError::Config(format!(
                "swarm_size {} exceeds population_size {}",
                self.swarm_size, self.population_size
            )));
        }
        if self.elitism_count == 0 || self.elitism_count > self.population_size {
            return Err(GpsoError::Config(format!(
                "elitism_count {} must be in [1, population_size]",
                self.elitism_count
            )));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(GpsoError::Config(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        for (name, v) in [("inertia", self.inertia), ("c1", self.c1), ("c2", self.c2)] {
            if !(v >= 0.0) {
                return Err(GpsoError::Config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) {
                return Err(GpsoError::Config(format!("v_max must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn effective_v_max(&self, min_units: u32, max_units: u32) -> f64 {
        self.v_max
            .unwrap_or_else(|| ((max_units - min_units) as f64 / 2.0).max(0.5))
    }
}

#[derive(Debug, Error)]
pub enum GpsoError {
    #[error("invalid optimizer configuration: {0}")]
    Config(String),
}

/// Candidate plan with its cached objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<u32>,
    pub fitness: f64,
}

impl Chromosome {
    fn new(genes: Vec<u32>, cfg: &FitnessConfig) -> Self {
        let fitness = fitness(&genes, cfg);
        Chromosome { genes, fitness }
    }
}

/// Continuous-space candidate used in the swarm phase. `rng` is the
/// particle's private stream so updates stay deterministic regardless of
/// evaluation order.
#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest: Vec<f64>,
    pub pbest_fitness: f64,
    rng: ChaCha8Rng,
}

/// Decodes a continuous position to an integer plan: clamp to bounds, then
/// round half-up.
pub fn decode(position: &[f64], min_units: u32, max_units: u32) -> Vec<u32> {
    position
        .iter()
        .map(|&x| x.clamp(min_units as f64, max_units as f64).round() as u32)
        .collect()
}

/// One point of the optimisation trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub phase: Phase,
    pub best_fitness: f64,
    pub best_plan: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Ga,
    Pso,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Ga => "ga",
            Phase::Pso => "pso",
        })
    }
}

/// Renders a trace as CSV (`iteration,phase,best_fitness,best_plan` with the
/// plan space-separated).
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iteration,phase,best_fitness,best_plan\n");
    for p in trace {
        let plan = p
            .best_plan
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&format!("{},{},{},{}\n", p.iteration, p.phase, p.best_fitness, plan));
    }
    out
}

/// Optimisation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsoResult {
    pub best_plan: AllocationPlan,
    pub best_fitness: f64,
    pub trace: Vec<TracePoint>,
}

fn sorted_indices_by_fitness(population: &[Chromosome]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| {
        population[a]
            .fitness
            .total_cmp(&population[b].fitness)
            .then(a.cmp(&b))
    });
    idx
}

/// Roulette draw for a minimisation problem: weight = (worst − f) + ε over
/// the finite fitnesses; infeasible chromosomes get weight 0. Falls back to
/// uniform if nothing is feasible.
fn roulette(population: &[Chromosome], rng: &mut ChaCha8Rng) -> usize {
    const EPS: f64 = 1e-9;
    let worst = population
        .iter()
        .map(|c| c.fitness)
        .filter(|f| f.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = if worst.is_finite() {
        population
            .iter()
            .map(|c| if c.fitness.is_finite() { worst - c.fitness + EPS } else { 0.0 })
            .collect()
    } else {
        vec![1.0; population.len()]
    };
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            u -= w;
            if u <= 0.0 {
                return i;
            }
        }
    }
    last
}

/// Splices two parents at a uniform cut point (genes before the cut from
/// one parent, the rest from the other). A single-gene plan has no interior
/// cut, so parents pass through unchanged.
fn crossover(a: &[u32], b: &[u32], rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<u32>) {
    let n = a.len();
    if n < 2 {
        return (a.to_vec(), b.to_vec());
    }
    let cut = rng.random_range(1..n);
    let mut child_a = a[..cut].to_vec();
    child_a.extend_from_slice(&b[cut..]);
    let mut child_b = b[..cut].to_vec();
    child_b.extend_from_slice(&a[cut..]);
    (child_a, child_b)
}

fn mutate(genes: &mut [u32], rate: f64, min_units: u32, max_units: u32, rng: &mut ChaCha8Rng) {
    for g in genes.iter_mut() {
        if rng.random::<f64>() < rate {
            *g = rng.random_range(min_units..=max_units);
        }
    }
}

/// Produces the next GA population: elites survive verbatim, the rest are
/// bred by roulette selection, single-point crossover, and per-gene
/// mutation.
pub fn ga_generation(
    population: &[Chromosome],
    cfg: &GpsoConfig,
    fit_cfg: &FitnessConfig,
    min_units: u32,
    max_units: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<Chromosome> {
    assert!(population.len() >= 2, "GA needs a population of at least 2");
    let order = sorted_indices_by_fitness(population);
    let mut next: Vec<Chromosome> = order
        .iter()
        .take(cfg.elitism_count.min(population.len()))
        .map(|&i| population[i].clone())
        .collect();
    while next.len() < population.len() {
        let pa = &population[roulette(population, rng)];
        let pb = &population[roulette(population, rng)];
        let (mut ca, mut cb) = if rng.random::<f64>() < cfg.crossover_rate {
            crossover(&pa.genes, &pb.genes, rng)
        } else {
            (pa.genes.clone(), pb.genes.clone())
        };
        mutate(&mut ca, cfg.mutation_rate, min_units, max_units, rng);
        mutate(&mut cb, cfg.mutation_rate, min_units, max_units, rng);
        next.push(Chromosome::new(ca, fit_cfg));
        if next.len() < population.len() {
            next.push(Chromosome::new(cb, fit_cfg));
        }
    }
    next
}

/// Carries the best chromosomes over as particles. Velocities start small
/// (uniform in ±v_max/10) from each particle's own stream.
pub fn seed_swarm(
    population: &[Chromosome],
    cfg: &GpsoConfig,
    min_units: u32,
    max_units: u32,
) -> Vec<Particle> {
    assert!(
        cfg.swarm_size <= population.len(),
        "swarm_size {} exceeds population {}",
        cfg.swarm_size,
        population.len()
    );
    let v_max = cfg.effective_v_max(min_units, max_units);
    let order = sorted_indices_by_fitness(population);
    order
        .iter()
        .take(cfg.swarm_size)
        .enumerate()
        .map(|(k, &i)| {
            let chrom = &population[i];
            let position: Vec<f64> = chrom.genes.iter().map(|&u| u as f64).collect();
            let mut rng = indexed_substream(cfg.seed, "pso-particle", k as u64);
            let velocity: Vec<f64> = position
                .iter()
                .map(|_| rng.random_range(-v_max / 10.0..v_max / 10.0))
                .collect();
            Particle {
                pbest: position.clone(),
                pbest_fitness: chrom.fitness,
                position,
                velocity,
                rng,
            }
        })
        .collect()
}

/// Index of the best pbest in the swarm.
fn gbest_index(swarm: &[Particle]) -> usize {
    sorted_indices_by_fitness(
        &swarm
            .iter()
            .map(|p| Chromosome { genes: vec![], fitness: p.pbest_fitness })
            .collect::<Vec<_>>(),
    )[0]
}

/// One synchronous swarm sweep with explicit per-particle random draws;
/// `pso_step` supplies real ones, tests may pin them.
fn pso_step_with_draws(
    swarm: &mut [Particle],
    cfg: &GpsoConfig,
    fit_cfg: &FitnessConfig,
    min_units: u32,
    max_units: u32,
    draws: &[(f64, f64)],
) {
    assert!(!swarm.is_empty(), "swarm must be nonempty");
    assert_eq!(draws.len(), swarm.len());
    let v_max = cfg.effective_v_max(min_units, max_units);
    let gbest = swarm[gbest_index(swarm)].pbest.clone();
    for (particle, &(r1, r2)) in swarm.iter_mut().zip(draws) {
        for d in 0..particle.position.len() {
            let v = cfg.inertia * particle.velocity[d]
                + cfg.c1 * r1 * (particle.pbest[d] - particle.position[d])
                + cfg.c2 * r2 * (gbest[d] - particle.position[d]);
            particle.velocity[d] = v.clamp(-v_max, v_max);
            particle.position[d] += particle.velocity[d];
        }
        let plan = decode(&particle.position, min_units, max_units);
        let f = fitness(&plan, fit_cfg);
        if f < particle.pbest_fitness {
            particle.pbest_fitness = f;
            particle.pbest = particle.position.clone();
        }
    }
}

/// One synchronous swarm sweep: every particle sees the same global best
/// (from before the sweep), draws one (r1, r2) pair from its own stream, and
/// moves under velocity clamping.
pub fn pso_step(
    swarm: &mut [Particle],
    cfg: &GpsoConfig,
    fit_cfg: &FitnessConfig,
    min_units: u32,
    max_units: u32,
) {
    let draws: Vec<(f64, f64)> = swarm
        .iter_mut()
        .map(|p| (p.rng.random::<f64>(), p.rng.random::<f64>()))
        .collect();
    pso_step_with_draws(swarm, cfg, fit_cfg, min_units, max_units, &draws);
}

/// Full pipeline: GA exploration, swarm seeding, PSO refinement. The
/// returned trace has one point per completed phase iteration and its
/// best_fitness column never increases.
pub fn optimize(
    cfg: &GpsoConfig,
    fit_cfg: &FitnessConfig,
    min_units: u32,
    max_units: u32,
) -> Result<GpsoResult, GpsoError> {
    cfg.validate()?;
    fit_cfg.validate()?;
    if min_units > max_units {
        return Err(GpsoError::Config(format!(
            "min_units {min_units} exceeds max_units {max_units}"
        )));
    }
    let n = fit_cfg.costs.len();
    let mut rng = substream(cfg.seed, "ga");
    let mut population: Vec<Chromosome> = (0..cfg.population_size)
        .map(|_| {
            let genes: Vec<u32> = (0..n).map(|_| rng.random_range(min_units..=max_units)).collect();
            Chromosome::new(genes, fit_cfg)
        })
        .collect();

    let mut best: Option<(Vec<u32>, f64)> = None;
    let mut trace = Vec::with_capacity(cfg.ga_generations + cfg.pso_iterations + 1);
    let note_best = |candidates: &mut dyn Iterator<Item = (&[u32], f64)>,
                         best: &mut Option<(Vec<u32>, f64)>| {
        for (genes, f) in candidates {
            let improved = match best {
                None => true,
                Some((_, bf)) => f < *bf,
            };
            if improved {
                *best = Some((genes.to_vec(), f));
            }
        }
    };

    note_best(
        &mut population.iter().map(|c| (c.genes.as_slice(), c.fitness)),
        &mut best,
    );
    let record = |trace: &mut Vec<TracePoint>, iteration, phase, best: &Option<(Vec<u32>, f64)>| {
        let (plan, f) = best.clone().expect("population is nonempty");
        trace.push(TracePoint { iteration, phase, best_fitness: f, best_plan: plan });
    };
    record(&mut trace, 0, Phase::Ga, &best);

    for g in 1..=cfg.ga_generations {
        population = ga_generation(&population, cfg, fit_cfg, min_units, max_units, &mut rng);
        note_best(
            &mut population.iter().map(|c| (c.genes.as_slice(), c.fitness)),
            &mut best,
        );
        record(&mut trace, g, Phase::Ga, &best);
    }

    let mut swarm = seed_swarm(&population, cfg, min_units, max_units);
    for it in 1..=cfg.pso_iterations {
        pso_step(&mut swarm, cfg, fit_cfg, min_units, max_units);
        for p in &swarm {
            let plan = decode(&p.pbest, min_units, max_units);
            let f = p.pbest_fitness;
            note_best(&mut std::iter::once((plan.as_slice(), f)), &mut best);
        }
        record(&mut trace, it, Phase::Pso, &best);
    }

    let (plan, f) = best.expect("nonempty search");
    Ok(GpsoResult { best_plan: AllocationPlan(plan), best_fitness: f, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fixed_loads(loads: Vec<f64>) -> LoadModel {
        LoadModel::Custom(Box::new(move |_| loads.clone()))
    }

    #[test]
    fn fitness_single_linear_term() {
        let cfg = FitnessConfig {
            costs: vec![2.0],
            lambda: 0.0,
            load_model: LoadModel::Proportional { total_demand: 0.0, unit_rate: 1.0 },
        };
        assert_eq!(fitness(&[3], &cfg), 6.0);
        // pure function: identical on re-evaluation
        assert_eq!(fitness(&[3], &cfg), fitness(&[3], &cfg));
    }

    #[test]
    fn fitness_weighted_max_load() {
        let cfg = FitnessConfig {
            costs: vec![1.0, 1.0],
            lambda: 1.0,
            load_model: fixed_loads(vec![0.5, 0.8]),
        };
        assert!((fitness(&[2, 3], &cfg) - 5.8).abs() < 1e-12);
    }

    #[test]
    fn all_zero_plan_with_demand_is_infeasible() {
        let cfg = FitnessConfig {
            costs: vec![1.0, 1.0],
            lambda: 1.0,
            load_model: LoadModel::Proportional { total_demand: 10.0, unit_rate: 1.0 },
        };
        assert_eq!(fitness(&[0, 0], &cfg), f64::INFINITY);
        // a powered subset carries the demand instead
        assert!(fitness(&[0, 2], &cfg).is_finite());
    }

    #[test]
    fn proportional_demand_splits_by_capacity() {
        let model = LoadModel::Proportional { total_demand: 12.0, unit_rate: 2.0 };
        assert_eq!(model.loads(&[1, 2, 0]), vec![2.0, 2.0, 0.0]);
        assert_eq!(model.loads(&[0, 0]), vec![f64::INFINITY, f64::INFINITY]);
        assert_eq!(
            LoadModel::Proportional { total_demand: 0.0, unit_rate: 2.0 }.loads(&[0, 1]),
            vec![0.0, 0.0]
        );
    }

    fn demandless(n: usize) -> FitnessConfig {
        FitnessConfig {
            costs: vec![1.0; n],
            lambda: 0.0,
            load_model: LoadModel::Proportional { total_demand: 0.0, unit_rate: 1.0 },
        }
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let mut rng = substream(1, "xover");
        let genes = vec![3, 1, 4, 1, 5];
        for _ in 0..10 {
            let (a, b) = crossover(&genes, &genes, &mut rng);
            assert_eq!(a, genes);
            assert_eq!(b, genes);
        }
    }

    #[test]
    fn disabled_operators_preserve_population() {
        let fit_cfg = demandless(3);
        let cfg = GpsoConfig {
            population_size: 4,
            elitism_count: 4,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            ..GpsoConfig::default()
        };
        let population: Vec<Chromosome> = [[1, 2, 3], [0, 0, 1], [4, 4, 4], [2, 0, 2]]
            .iter()
            .map(|g| Chromosome::new(g.to_vec(), &fit_cfg))
            .collect();
        let mut rng = substream(2, "ga-test");
        let next = ga_generation(&population, &cfg, &fit_cfg, 0, 4, &mut rng);
        let mut before: Vec<Vec<u32>> = population.iter().map(|c| c.genes.clone()).collect();
        let mut after: Vec<Vec<u32>> = next.iter().map(|c| c.genes.clone()).collect();
        before.sort();
        after.sort();
        assert_eq!(before, after);
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let fit_cfg = FitnessConfig {
            costs: vec![1.0, 2.0],
            lambda: 3.0,
            load_model: LoadModel::Proportional { total_demand: 6.0, unit_rate: 1.0 },
        };
        let cfg = GpsoConfig { population_size: 4, elitism_count: 1, ..GpsoConfig::default() };
        let population: Vec<Chromosome> = [[1, 1], [3, 0], [0, 2], [2, 2]]
            .iter()
            .map(|g| Chromosome::new(g.to_vec(), &fit_cfg))
            .collect();
        let run = || {
            let mut rng = substream(99, "ga-fixture");
            ga_generation(&population, &cfg, &fit_cfg, 0, 3, &mut rng)
                .iter()
                .map(|c| c.genes.clone())
                .collect::<Vec<_>>()
        };
        let first = run();
        assert_eq!(first, run());
        assert_eq!(first.len(), 4);
        for genes in &first {
            assert!(genes.iter().all(|&g| g <= 3));
        }
    }

    #[test]
    fn swarm_seeding_carries_best_plans() {
        let fit_cfg = demandless(2);
        let cfg = GpsoConfig {
            population_size: 4,
            swarm_size: 4,
            seed: 5,
            ..GpsoConfig::default()
        };
        let population: Vec<Chromosome> = [[4, 4], [0, 1], [2, 2], [1, 0]]
            .iter()
            .map(|g| Chromosome::new(g.to_vec(), &fit_cfg))
            .collect();
        let swarm = seed_swarm(&population, &cfg, 0, 4);
        assert_eq!(swarm.len(), 4);
        // cost-only: [0,1] and [1,0] tie at 1, ordered by index; gbest is one of them
        let g = gbest_index(&swarm);
        assert_eq!(swarm[g].pbest_fitness, 1.0);
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        assert!(positions.contains(&vec![0.0, 1.0]));
        assert!(positions.contains(&vec![4.0, 4.0]));
        // velocities reproducible and bounded
        let again = seed_swarm(&population, &cfg, 0, 4);
        for (a, b) in swarm.iter().zip(&again) {
            assert_eq!(a.velocity, b.velocity);
            let v_max = cfg.effective_v_max(0, 4);
            assert!(a.velocity.iter().all(|v| v.abs() <= v_max / 10.0));
        }
    }

    fn still_swarm(fit_cfg: &FitnessConfig, positions: &[Vec<f64>]) -> Vec<Particle> {
        positions
            .iter()
            .enumerate()
            .map(|(k, p)| Particle {
                position: p.clone(),
                velocity: vec![0.0; p.len()],
                pbest: p.clone(),
                pbest_fitness: fitness(&decode(p, 0, 10), fit_cfg),
                rng: indexed_substream(0, "test-particle", k as u64),
            })
            .collect()
    }

    #[test]
    fn zero_coefficients_freeze_the_swarm() {
        let fit_cfg = demandless(2);
        let cfg = GpsoConfig { inertia: 0.0, c1: 0.0, c2: 0.0, ..GpsoConfig::default() };
        let mut swarm = still_swarm(&fit_cfg, &[vec![1.0, 2.0], vec![3.0, 4.0]]);
        pso_step(&mut swarm, &cfg, &fit_cfg, 0, 10);
        assert_eq!(swarm[0].position, vec![1.0, 2.0]);
        assert_eq!(swarm[0].velocity, vec![0.0, 0.0]);
        assert_eq!(swarm[1].position, vec![3.0, 4.0]);
    }

    #[test]
    fn pure_inertia_translates_position() {
        let fit_cfg = demandless(2);
        let cfg = GpsoConfig { inertia: 1.0, c1: 0.0, c2: 0.0, v_max: Some(10.0), ..GpsoConfig::default() };
        let mut swarm = still_swarm(&fit_cfg, &[vec![0.0, 0.0]]);
        swarm[0].velocity = vec![1.0, -1.0];
        pso_step(&mut swarm, &cfg, &fit_cfg, 0, 10);
        assert_eq!(swarm[0].position, vec![1.0, -1.0]);
    }

    #[test]
    fn pinned_r1_matches_hand_update() {
        // w=0, c1=1, r1=1, c2=0, pbest - x = [2] -> v' = [2], x' = x + [2]
        let fit_cfg = demandless(1);
        let cfg = GpsoConfig { inertia: 0.0, c1: 1.0, c2: 0.0, v_max: Some(10.0), ..GpsoConfig::default() };
        let mut swarm = still_swarm(&fit_cfg, &[vec![1.0]]);
        swarm[0].pbest = vec![3.0];
        pso_step_with_draws(&mut swarm, &cfg, &fit_cfg, 0, 10, &[(1.0, 0.0)]);
        assert_eq!(swarm[0].velocity, vec![2.0]);
        assert_eq!(swarm[0].position, vec![3.0]);
    }

    #[test]
    fn velocity_decay_is_bitwise_exact() {
        // With c1 = c2 = 0 each sweep multiplies v by the inertia exactly.
        let fit_cfg = demandless(3);
        let cfg = GpsoConfig { inertia: 0.9, c1: 0.0, c2: 0.0, v_max: Some(1e9), ..GpsoConfig::default() };
        let mut swarm = still_swarm(&fit_cfg, &[vec![0.0, 5.0, -2.0]]);
        swarm[0].velocity = vec![1.0, -0.125, 3.5];
        let mut expected = swarm[0].velocity.clone();
        for _ in 0..20 {
            pso_step(&mut swarm, &cfg, &fit_cfg, 0, 10);
            for e in &mut expected {
                *e *= 0.9;
            }
            assert_eq!(swarm[0].velocity, expected);
        }
    }

    #[test]
    fn decode_clamps_then_rounds_half_up() {
        assert_eq!(decode(&[-3.0, 2.5, 7.9, 4.49], 1, 6), vec![1, 3, 6, 4]);
    }

    #[test]
    fn singleton_space_returns_only_plan() {
        let fit_cfg = FitnessConfig {
            costs: vec![2.5],
            lambda: 0.0,
            load_model: LoadModel::Proportional { total_demand: 0.0, unit_rate: 1.0 },
        };
        let cfg = GpsoConfig {
            population_size: 4,
            swarm_size: 2,
            ga_generations: 2,
            pso_iterations: 2,
            ..GpsoConfig::default()
        };
        let result = optimize(&cfg, &fit_cfg, 1, 1).unwrap();
        assert_eq!(result.best_plan, AllocationPlan(vec![1]));
        assert_eq!(result.best_fitness, 2.5);
    }

    #[test]
    fn cost_only_objective_settles_at_minimum_units() {
        let fit_cfg = FitnessConfig {
            costs: vec![1.0, 2.0, 0.5],
            lambda: 0.0,
            load_model: LoadModel::Proportional { total_demand: 50.0, unit_rate: 1.0 },
        };
        let cfg = GpsoConfig { seed: 3, ..GpsoConfig::default() };
        let result = optimize(&cfg, &fit_cfg, 1, 5).unwrap();
        assert_eq!(result.best_plan, AllocationPlan(vec![1, 1, 1]));
    }

    fn brute_force(fit_cfg: &FitnessConfig, min: u32, max: u32, n: usize) -> f64 {
        fn rec(plan: &mut Vec<u32>, n: usize, min: u32, max: u32, cfg: &FitnessConfig, best: &mut f64) {
            if plan.len() == n {
                let f = fitness(plan, cfg);
                if f < *best {
                    *best = f;
                }
                return;
            }
            for u in min..=max {
                plan.push(u);
                rec(plan, n, min, max, cfg, best);
                plan.pop();
            }
        }
        let mut best = f64::INFINITY;
        rec(&mut Vec::new(), n, min, max, fit_cfg, &mut best);
        best
    }

    #[test]
    fn matches_exhaustive_optimum_across_seeds() {
        // 125-plan space; the optimizer must hit the global optimum in at
        // least 95 of 100 seeds.
        let fit_cfg = FitnessConfig {
            costs: vec![1.0, 1.3, 1.7],
            lambda: 8.0,
            load_model: LoadModel::Proportional { total_demand: 9.0, unit_rate: 1.0 },
        };
        let target = brute_force(&fit_cfg, 1, 5, 3);
        let mut hits = 0;
        for seed in 0..100 {
            let cfg = GpsoConfig { seed, ..GpsoConfig::default() };
            let result = optimize(&cfg, &fit_cfg, 1, 5).unwrap();
            if (result.best_fitness - target).abs() <= 1e-9 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "optimum found in only {hits}/100 seeds");
    }

    #[test]
    fn trace_csv_layout() {
        let trace = vec![
            TracePoint { iteration: 0, phase: Phase::Ga, best_fitness: 3.5, best_plan: vec![1, 2] },
            TracePoint { iteration: 1, phase: Phase::Pso, best_fitness: 3.0, best_plan: vec![1, 1] },
        ];
        let csv = trace_csv(&trace);
        assert_eq!(
            csv,
            "iteration,phase,best_fitness,best_plan\n0,ga,3.5,1 2\n1,pso,3,1 1\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn best_trace_is_monotone_and_plan_feasible(
            seed in 0u64..5_000,
            n in 1usize..5,
            demand in 0.0f64..30.0,
            lambda in 0.0f64..20.0,
            max_units in 1u32..6,
        ) {
            let fit_cfg = FitnessConfig {
                costs: (0..n).map(|i| 1.0 + i as f64 * 0.4).collect(),
                lambda,
                load_model: LoadModel::Proportional { total_demand: demand, unit_rate: 1.0 },
            };
            let cfg = GpsoConfig {
                population_size: 12,
                ga_generations: 8,
                swarm_size: 6,
                pso_iterations: 10,
                seed,
                ..GpsoConfig::default()
            };
            let result = optimize(&cfg, &fit_cfg, 0, max_units).unwrap();
            for pair in result.trace.windows(2) {
                prop_assert!(pair[1].best_fitness <= pair[0].best_fitness);
            }
            prop_assert!(result.best_plan.within_bounds(0, max_units));
            // bounds [0, max>=1] always contain a feasible plan
            prop_assert!(result.best_fitness.is_finite());
            let rerun = optimize(&cfg, &fit_cfg, 0, max_units).unwrap();
            prop_assert_eq!(result, rerun);
        }
    }
}
