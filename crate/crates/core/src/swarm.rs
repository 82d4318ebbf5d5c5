//! Particles, subswarms, the PSO update and speciation-based niching.

use std::cmp::Ordering;

use rand::Rng;

use crate::problem::{euclidean, ConfigError, EvalError, Objective, SearchSpace};

/// How the inertia weight enters the velocity update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityForm {
    /// `v <- w*v + c1*r1*(p - x) + c2*r2*(g - x)`
    Inertia,
    /// `v <- w*(v + c1*r1*(p - x) + c2*r2*(g - x))`. With the default
    /// coefficients this is the stable variant: effective acceleration
    /// `0.6 * 2.83 ~= 1.7`. The plain inertia form with `c1 + c2 = 5.66`
    /// has diverging second moments and never settles.
    #[default]
    Constricted,
}

impl VelocityForm {
    pub fn name(&self) -> &'static str {
        match self {
            VelocityForm::Inertia => "inertia",
            VelocityForm::Constricted => "constricted",
        }
    }
}

impl std::str::FromStr for VelocityForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inertia" => Ok(VelocityForm::Inertia),
            "constricted" => Ok(VelocityForm::Constricted),
            other => Err(format!(
                "unknown velocity form {other:?} (expected inertia or constricted)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub form: VelocityForm,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.6,
            cognitive: 2.83,
            social: 2.83,
            form: VelocityForm::default(),
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if [self.inertia, self.cognitive, self.social]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(ConfigError::Algorithm(format!(
                "non-finite PSO coefficients {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pbest_pos: Vec<f64>,
    pub pbest_fit: f64,
}

impl Particle {
    /// A particle at rest whose memory is its starting point.
    pub fn at_rest(position: Vec<f64>, fitness: f64) -> Self {
        Self {
            velocity: vec![0.0; position.len()],
            pbest_pos: position.clone(),
            position,
            pbest_fit: fitness,
        }
    }

    /// Uniform random particle, evaluated once to seed its memory.
    pub fn random<O, R>(objective: &mut O, rng: &mut R) -> Result<Self, EvalError>
    where
        O: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        let position = objective.space().sample(rng);
        let fitness = objective.evaluate(&position)?;
        Ok(Self::at_rest(position, fitness))
    }
}

/// One species: a private swarm with its own global best.
#[derive(Debug, Clone, PartialEq)]
pub struct Subswarm {
    pub members: Vec<Particle>,
    pub gbest_pos: Vec<f64>,
    pub gbest_fit: f64,
    initial_radius: f64,
    pub active: bool,
}

impl Subswarm {
    /// Forms a swarm from `members`, freezing the mean distance of member
    /// positions from their centroid as the swarm's initial radius.
    pub fn new(members: Vec<Particle>) -> Self {
        assert!(!members.is_empty(), "a subswarm needs at least one member");
        let positions: Vec<&[f64]> = members.iter().map(|p| p.position.as_slice()).collect();
        let initial_radius = mean_distance_to_centroid(&positions);
        let mut swarm = Self {
            gbest_pos: members[0].pbest_pos.clone(),
            gbest_fit: members[0].pbest_fit,
            members,
            initial_radius,
            active: true,
        };
        swarm.refresh_gbest();
        swarm
    }

    /// Overrides the frozen radius. Only meant for constructing fixtures.
    pub fn with_initial_radius(mut self, radius: f64) -> Self {
        self.initial_radius = radius;
        self
    }

    pub fn initial_radius(&self) -> f64 {
        self.initial_radius
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sets gbest to the best member memory; first member wins ties.
    pub fn refresh_gbest(&mut self) {
        if let Some(best) = self.best_member() {
            let (fit, pos) = (best.pbest_fit, best.pbest_pos.clone());
            self.gbest_fit = fit;
            self.gbest_pos = pos;
        }
    }

    pub fn best_member(&self) -> Option<&Particle> {
        self.members
            .iter()
            .reduce(|a, b| if b.pbest_fit > a.pbest_fit { b } else { a })
    }
}

fn centroid(points: &[&[f64]]) -> Vec<f64> {
    let dims = points[0].len();
    let mut c = vec![0.0; dims];
    for p in points {
        for (ck, pk) in c.iter_mut().zip(p.iter()) {
            *ck += pk;
        }
    }
    let n = points.len() as f64;
    c.iter_mut().for_each(|ck| *ck /= n);
    c
}

fn mean_distance_to_centroid(points: &[&[f64]]) -> f64 {
    let c = centroid(points);
    points.iter().map(|p| euclidean(p, &c)).sum::<f64>() / points.len() as f64
}

/// Mean distance of member personal bests from their centroid.
pub fn convergence_radius(swarm: &Subswarm) -> f64 {
    let pbests: Vec<&[f64]> = swarm
        .members
        .iter()
        .map(|p| p.pbest_pos.as_slice())
        .collect();
    mean_distance_to_centroid(&pbests)
}

/// Partitions `population` into species of `species_size`.
///
/// Particles are ranked by personal-best fitness (ties keep input order). The
/// fittest remaining particle becomes a head and takes the `species_size - 1`
/// remaining particles nearest to its personal best; repeat until the list is
/// empty. The last species may be short.
pub fn speciate(
    population: Vec<Particle>,
    species_size: usize,
) -> Result<Vec<Subswarm>, ConfigError> {
    if species_size == 0 {
        return Err(ConfigError::Algorithm(
            "species size must be at least 1".into(),
        ));
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        population[b]
            .pbest_fit
            .partial_cmp(&population[a].pbest_fit)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut slots: Vec<Option<Particle>> = population.into_iter().map(Some).collect();
    let mut ranked = order;
    let mut swarms = Vec::with_capacity(ranked.len().div_ceil(species_size));

    while !ranked.is_empty() {
        let head = ranked.remove(0);
        let head_pos = slots[head].as_ref().unwrap().pbest_pos.clone();
        let mut by_distance: Vec<(f64, usize, usize)> = ranked
            .iter()
            .enumerate()
            .map(|(rank, &idx)| {
                let d = euclidean(&slots[idx].as_ref().unwrap().pbest_pos, &head_pos);
                (d, idx, rank)
            })
            .collect();
        by_distance.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        by_distance.truncate(species_size - 1);

        let mut taken_ranks: Vec<usize> = by_distance.iter().map(|t| t.2).collect();
        taken_ranks.sort_unstable_by(|a, b| b.cmp(a));
        for r in taken_ranks {
            ranked.remove(r);
        }

        let mut members = Vec::with_capacity(species_size);
        members.push(slots[head].take().unwrap());
        members.extend(by_distance.iter().map(|t| slots[t.1].take().unwrap()));
        swarms.push(Subswarm::new(members));
    }
    Ok(swarms)
}

/// Velocity and position update for one particle with the random factors
/// supplied by the caller. Clamped dimensions lose their velocity.
pub fn move_particle(
    particle: &mut Particle,
    gbest: &[f64],
    params: &PsoParams,
    space: &SearchSpace,
    r1: f64,
    r2: f64,
) {
    let PsoParams {
        inertia,
        cognitive,
        social,
        form,
    } = *params;
    let Particle {
        position,
        velocity,
        pbest_pos,
        ..
    } = particle;
    for (((x, vel), &p), &g) in position
        .iter_mut()
        .zip(velocity.iter_mut())
        .zip(pbest_pos.iter())
        .zip(gbest)
    {
        let pull = cognitive * r1 * (p - *x) + social * r2 * (g - *x);
        let v = match form {
            VelocityForm::Inertia => inertia * *vel + pull,
            VelocityForm::Constricted => inertia * (*vel + pull),
        };
        let moved = *x + v;
        let clamped = space.clamp(moved);
        *x = clamped;
        // NaN compares unequal, so a non-finite move also lands here
        *vel = if clamped == moved { v } else { 0.0 };
    }
}

/// One synchronous PSO iteration over every member of `swarm`, using the
/// swarm's gbest from before the step. Member memories and the gbest are
/// refreshed from the evaluations; the gbest is refreshed even if the budget
/// runs out part-way.
pub fn pso_step<O, R>(
    swarm: &mut Subswarm,
    params: &PsoParams,
    objective: &mut O,
    rng: &mut R,
) -> Result<(), EvalError>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let space = *objective.space();
    let gbest = swarm.gbest_pos.clone();
    let mut outcome = Ok(());
    for particle in &mut swarm.members {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        move_particle(particle, &gbest, params, &space, r1, r2);
        match objective.evaluate(&particle.position) {
            Ok(f) => {
                if f > particle.pbest_fit {
                    particle.pbest_fit = f;
                    particle.pbest_pos.clone_from(&particle.position);
                }
            }
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    swarm.refresh_gbest();
    outcome
}
