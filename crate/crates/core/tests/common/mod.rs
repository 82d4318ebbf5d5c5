//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use pspso::problem::{
    Benchmark, ChangeSchedule, DynamicLandscape, EvalError, LandscapeParams, Objective, SearchSpace,
};
use rand::Rng;

/// Pairs `(a_i, b_j)` with `a_i > b_j`, ties counting one half.
pub fn brute_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Two-sided permutation p-value: every way of choosing which pooled values
/// form the first sample, scored by brute-force U.
pub fn permutation_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (na, n) = (a.len(), pooled.len());
    let mean = (a.len() * b.len()) as f64 / 2.0;
    let observed = (brute_u(a, b) - mean).abs();
    let (mut hits, mut total) = (0usize, 0usize);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (k, &v) in pooled.iter().enumerate() {
            if mask & (1 << k) != 0 {
                x.push(v);
            } else {
                y.push(v);
            }
        }
        total += 1;
        if (brute_u(&x, &y) - mean).abs() >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// One evaluation as seen from outside the benchmark.
#[derive(Debug, Clone, Copy)]
pub struct LoggedEval {
    pub env: u64,
    pub optimum: f64,
    pub fitness: f64,
}

/// Wraps a benchmark and records, for every evaluation, the environment and
/// optimum in force plus the returned fitness.
pub struct LoggingObjective<'a> {
    pub bench: &'a mut Benchmark,
    pub log: Vec<LoggedEval>,
}

impl<'a> LoggingObjective<'a> {
    pub fn new(bench: &'a mut Benchmark) -> Self {
        Self {
            bench,
            log: Vec::new(),
        }
    }
}

impl Objective for LoggingObjective<'_> {
    fn space(&self) -> &SearchSpace {
        self.bench.space()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        let env = self.bench.landscape().env_index();
        let optimum = self.bench.landscape().current_optimum().1;
        let fitness = self.bench.evaluate(x)?;
        self.log.push(LoggedEval {
            env,
            optimum,
            fitness,
        });
        Ok(fitness)
    }
}

/// Offline error recomputed from scratch: within each environment, track the
/// running best and average `optimum - best` over every evaluation.
pub fn naive_offline_error(log: &[LoggedEval]) -> f64 {
    let mut total = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut env = None;
    for e in log {
        if env != Some(e.env) {
            env = Some(e.env);
            best = f64::NEG_INFINITY;
        }
        best = best.max(e.fitness);
        total += e.optimum - best;
    }
    total / log.len() as f64
}

/// Small random landscape for exhaustive checks.
pub fn micro_params<R: Rng>(rng: &mut R) -> LandscapeParams {
    LandscapeParams {
        space: SearchSpace::new(rng.random_range(1..=4), -10.0, 10.0).unwrap(),
        num_peaks: rng.random_range(1..=4),
        height_range: (30.0, 70.0),
        width_range: (1.0, 12.0),
        schedule: ChangeSchedule {
            change_frequency: rng.random_range(1..=10),
            shift_severity: rng.random_range(0.0..3.0),
            height_severity: rng.random_range(0.0..10.0),
            width_severity: rng.random_range(0.0..2.0),
            num_environments: rng.random_range(1..=5),
        },
    }
}

pub fn micro_benchmark<R: Rng>(rng: &mut R) -> Benchmark {
    let params = micro_params(rng);
    Benchmark::new(DynamicLandscape::new(params, rng.random()).unwrap())
}

pub fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .collect()
}
