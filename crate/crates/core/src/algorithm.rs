//! The PSPSO main loop and a naive restart-PSO baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mechanisms::{
    detect_and_deactivate, diversity_step, diversity_triggered, perturb, remove_overlaps,
    AlgoConfig, PopulationState,
};
use crate::problem::{Benchmark, ConfigError, EvalError, Objective, UndefinedMetric};
use crate::swarm::{pso_step, speciate, Particle, PsoParams, Subswarm};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("evaluation failed: {0}")]
    Eval(EvalError),
    #[error(transparent)]
    Metric(#[from] UndefinedMetric),
}

/// Mechanism invocations within one iteration, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SwarmUpdate,
    OverlapRemoval,
    Perturbation,
    ConvergenceDetection,
    Diversity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub offline_error: f64,
    /// Per-evaluation errors; empty unless the benchmark kept a trace.
    pub error_trace: Vec<f64>,
    pub evaluations_used: u64,
    /// Active subswarms at the end of each completed iteration.
    pub swarm_count_trace: Vec<usize>,
}

/// Budget exhaustion is how a run ends; anything else is a real failure.
fn ended(result: Result<(), EvalError>) -> Result<bool, RunError> {
    match result {
        Ok(()) => Ok(false),
        Err(EvalError::BudgetExhausted { .. }) => Ok(true),
        Err(e) => Err(RunError::Eval(e)),
    }
}

/// `n * s` random particles, each evaluated once, speciated into swarms.
pub fn initialize<O, R>(
    cfg: &AlgoConfig,
    objective: &mut O,
    rng: &mut R,
) -> Result<PopulationState, EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let mut pop = Vec::with_capacity(cfg.population_size());
    for _ in 0..cfg.population_size() {
        pop.push(Particle::random(objective, rng)?);
    }
    Ok(PopulationState::new(
        speciate(pop, cfg.swarm_size).expect("validated swarm size"),
    ))
}

/// One pass of the main loop: update active swarms, remove overlaps,
/// perturb one swarm, deactivate converged swarms and, if too few
/// particles remain active, run the diversity mechanism.
pub fn pspso_iteration<O, R>(
    state: &mut PopulationState,
    cfg: &AlgoConfig,
    params: &PsoParams,
    objective: &mut O,
    rng: &mut R,
    observe: &mut dyn FnMut(Phase),
) -> Result<(), EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    observe(Phase::SwarmUpdate);
    for swarm in state.swarms.iter_mut().filter(|s| s.active) {
        pso_step(swarm, params, objective, rng)?;
    }

    observe(Phase::OverlapRemoval);
    remove_overlaps(state);

    observe(Phase::Perturbation);
    perturb(state, cfg, params, objective, rng)?;

    observe(Phase::ConvergenceDetection);
    detect_and_deactivate(state, cfg, objective.space().dims());

    if diversity_triggered(state, cfg) {
        observe(Phase::Diversity);
        diversity_step(state, cfg, objective, rng)?;
    }
    Ok(())
}

fn finish(bench: &mut Benchmark, swarm_count_trace: Vec<usize>) -> Result<RunResult, RunError> {
    Ok(RunResult {
        offline_error: bench.offline_error()?,
        error_trace: bench.tracker_mut().take_trace().unwrap_or_default(),
        evaluations_used: bench.evals_done(),
        swarm_count_trace,
    })
}

/// Runs PSPSO against `bench` until its evaluation budget is spent.
pub fn run_pspso(
    cfg: &AlgoConfig,
    params: &PsoParams,
    bench: &mut Benchmark,
    seed: u64,
) -> Result<RunResult, RunError> {
    run_pspso_observed(cfg, params, bench, seed, &mut |_| {})
}

pub fn run_pspso_observed(
    cfg: &AlgoConfig,
    params: &PsoParams,
    bench: &mut Benchmark,
    seed: u64,
    observe: &mut dyn FnMut(Phase),
) -> Result<RunResult, RunError> {
    cfg.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut swarm_counts = Vec::new();

    // the optimizer only ever sees the `Objective` view of the benchmark
    let objective: &mut dyn Objective = bench;
    let mut state = match initialize(cfg, objective, &mut rng) {
        Ok(state) => state,
        Err(e) => {
            ended(Err(e))?;
            return finish(bench, swarm_counts);
        }
    };
    loop {
        let step = pspso_iteration(&mut state, cfg, params, objective, &mut rng, observe);
        if ended(step)? {
            break;
        }
        swarm_counts.push(state.active_swarms());
    }
    finish(bench, swarm_counts)
}

/// Single global swarm that re-randomises the whole population every
/// `restart_every` of its own evaluations. It never learns about changes.
pub fn run_restart_baseline(
    cfg: &AlgoConfig,
    params: &PsoParams,
    restart_every: u64,
    bench: &mut Benchmark,
    seed: u64,
) -> Result<RunResult, RunError> {
    cfg.validate()?;
    params.validate()?;
    if restart_every == 0 {
        return Err(ConfigError::Algorithm("restart interval must be positive".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counter = CountingObjective {
        inner: bench,
        evals: 0,
    };
    let mut swarm_counts = Vec::new();

    let outcome: Result<(), EvalError> = (|| {
        let mut since_restart = 0;
        let mut swarm = random_swarm(cfg.population_size(), &mut counter, &mut rng)?;
        loop {
            if counter.evals - since_restart >= restart_every {
                since_restart = counter.evals;
                swarm = random_swarm(cfg.population_size(), &mut counter, &mut rng)?;
            }
            pso_step(&mut swarm, params, &mut counter, &mut rng)?;
            swarm_counts.push(1);
        }
    })();
    ended(outcome)?;
    finish(bench, swarm_counts)
}

fn random_swarm<O, R>(size: usize, objective: &mut O, rng: &mut R) -> Result<Subswarm, EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let mut members = Vec::with_capacity(size);
    for _ in 0..size {
        members.push(Particle::random(objective, rng)?);
    }
    Ok(Subswarm::new(members))
}

struct CountingObjective<'a> {
    inner: &'a mut Benchmark,
    evals: u64,
}

impl Objective for CountingObjective<'_> {
    fn space(&self) -> &crate::problem::SearchSpace {
        self.inner.space()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        let f = self.inner.evaluate(x)?;
        self.evals += 1;
        Ok(f)
    }
}
