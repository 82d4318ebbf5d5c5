//! Population management around the subswarms: overlap removal, random
//! perturbation, convergence deactivation and the diversity mechanism.

use rand::Rng;

use crate::problem::{euclidean, ConfigError, EvalError, Objective};
use crate::swarm::{convergence_radius, pso_step, speciate, Particle, PsoParams, Subswarm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConfig {
    /// Initial number of subswarms.
    pub swarm_count: usize,
    /// Particles per subswarm.
    pub swarm_size: usize,
    /// Diversity mechanism fires when the active fraction drops below this.
    pub diversity_threshold: f64,
    /// Perturbation factor; noise range is `p * (Ub - Lb)`.
    pub perturbation: f64,
    /// Convergence radius per dimension; the threshold is `factor * D`.
    pub convergence_factor: f64,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            swarm_count: 10,
            swarm_size: 7,
            diversity_threshold: 0.7,
            perturbation: 0.025,
            convergence_factor: 0.01,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.swarm_count == 0 || self.swarm_size == 0 {
            return Err(ConfigError::Algorithm(format!(
                "swarm count ({}) and swarm size ({}) must be positive",
                self.swarm_count, self.swarm_size
            )));
        }
        if !(0.0..=1.0).contains(&self.diversity_threshold) {
            return Err(ConfigError::Algorithm(format!(
                "diversity threshold must lie in [0, 1], got {}",
                self.diversity_threshold
            )));
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return Err(ConfigError::Algorithm(format!(
                "perturbation factor must be finite and non-negative, got {}",
                self.perturbation
            )));
        }
        if !(self.convergence_factor.is_finite() && self.convergence_factor > 0.0) {
            return Err(ConfigError::Algorithm(format!(
                "convergence factor must be positive, got {}",
                self.convergence_factor
            )));
        }
        Ok(())
    }

    /// Target population size `n * s`.
    pub fn population_size(&self) -> usize {
        self.swarm_count * self.swarm_size
    }

    pub fn convergence_threshold(&self, dims: usize) -> f64 {
        self.convergence_factor * dims as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopulationState {
    pub swarms: Vec<Subswarm>,
}

impl PopulationState {
    pub fn new(swarms: Vec<Subswarm>) -> Self {
        Self { swarms }
    }

    pub fn n_active(&self) -> usize {
        self.swarms
            .iter()
            .filter(|s| s.active)
            .map(Subswarm::len)
            .sum()
    }

    pub fn n_total(&self) -> usize {
        self.swarms.iter().map(Subswarm::len).sum()
    }

    pub fn active_swarms(&self) -> usize {
        self.swarms.iter().filter(|s| s.active).count()
    }

    /// Highest gbest fitness over every swarm, active or not.
    pub fn best_fitness(&self) -> Option<f64> {
        self.swarms.iter().map(|s| s.gbest_fit).reduce(f64::max)
    }
}

/// Whether the gbests of `a` and `b` lie strictly inside both frozen radii.
pub fn detect_overlap(a: &Subswarm, b: &Subswarm) -> bool {
    let d = euclidean(&a.gbest_pos, &b.gbest_pos);
    d < a.initial_radius() && d < b.initial_radius()
}

/// Single pass over index-ordered pairs; the worse swarm of an overlapping
/// pair is dropped at once (ties drop the later one). Returns the number of
/// swarms removed.
pub fn remove_overlaps(state: &mut PopulationState) -> usize {
    let k = state.swarms.len();
    let mut removed = vec![false; k];
    for i in 0..k {
        for j in (i + 1)..k {
            if removed[i] {
                break;
            }
            if removed[j] || !detect_overlap(&state.swarms[i], &state.swarms[j]) {
                continue;
            }
            if state.swarms[i].gbest_fit < state.swarms[j].gbest_fit {
                removed[i] = true;
            } else {
                removed[j] = true;
            }
        }
    }
    let mut flags = removed.iter();
    state.swarms.retain(|_| !flags.next().unwrap());
    removed.iter().filter(|&&r| r).count()
}

/// Adds independent `U(-range, range)^D` noise to every member velocity.
pub fn add_velocity_noise<R: Rng + ?Sized>(swarm: &mut Subswarm, range: f64, rng: &mut R) {
    if range <= 0.0 {
        return;
    }
    for particle in &mut swarm.members {
        for v in &mut particle.velocity {
            *v += rng.random_range(-range..=range);
        }
    }
}

/// Picks one swarm uniformly from all swarms and kicks its velocities. A
/// deactivated pick also takes one PSO step so the kick has an effect.
/// Returns the index of the chosen swarm, or `None` if there are no swarms.
pub fn perturb<O, R>(
    state: &mut PopulationState,
    cfg: &AlgoConfig,
    params: &PsoParams,
    objective: &mut O,
    rng: &mut R,
) -> Result<Option<usize>, EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if state.swarms.is_empty() {
        return Ok(None);
    }
    let chosen = rng.random_range(0..state.swarms.len());
    let range = cfg.perturbation * objective.space().width();
    let swarm = &mut state.swarms[chosen];
    add_velocity_noise(swarm, range, rng);
    if !swarm.active {
        pso_step(swarm, params, objective, rng)?;
    }
    Ok(Some(chosen))
}

/// Deactivates every active swarm whose convergence radius is below
/// `factor * dims`, except swarms holding the population-wide best gbest.
/// Returns the number of swarms deactivated.
pub fn detect_and_deactivate(state: &mut PopulationState, cfg: &AlgoConfig, dims: usize) -> usize {
    let Some(best) = state.best_fitness() else {
        return 0;
    };
    let threshold = cfg.convergence_threshold(dims);
    let mut count = 0;
    for swarm in state.swarms.iter_mut().filter(|s| s.active) {
        if swarm.gbest_fit < best && convergence_radius(swarm) < threshold {
            swarm.active = false;
            count += 1;
        }
    }
    count
}

/// `n_active / (n * s) < alpha`.
pub fn diversity_triggered(state: &PopulationState, cfg: &AlgoConfig) -> bool {
    (state.n_active() as f64) / (cfg.population_size() as f64) < cfg.diversity_threshold
}

/// Drops deactivated swarms (keeping each one's best particle, at rest),
/// tops the pool back up to `n * s` with fresh random particles and
/// re-speciates everything.
pub fn diversity_step<O, R>(
    state: &mut PopulationState,
    cfg: &AlgoConfig,
    objective: &mut O,
    rng: &mut R,
) -> Result<(), EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let mut archive = Vec::new();
    let mut pool = Vec::with_capacity(cfg.population_size());
    for swarm in state.swarms.drain(..) {
        if swarm.active {
            pool.extend(swarm.members);
        } else if let Some(best) = swarm.best_member() {
            let mut kept = best.clone();
            kept.velocity.iter_mut().for_each(|v| *v = 0.0);
            archive.push(kept);
        }
    }
    pool.append(&mut archive);

    while pool.len() < cfg.population_size() {
        match Particle::random(objective, rng) {
            Ok(p) => pool.push(p),
            Err(e) => {
                // keep what we have so the state stays usable
                state.swarms = speciate(pool, cfg.swarm_size).expect("validated swarm size");
                return Err(e);
            }
        }
    }
    state.swarms = speciate(pool, cfg.swarm_size).expect("validated swarm size");
    Ok(())
}
