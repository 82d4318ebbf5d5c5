//! Dynamic objective: a conical moving-peaks landscape that changes every
//! `change_frequency` evaluations, plus the offline-error bookkeeping that
//! sits on the benchmark side of the evaluation boundary.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use thiserror::Error;

/// Failure modes of a single fitness evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("position {position:?} lies outside the search space [{lower}, {upper}]^{dims}")]
    OutOfBounds {
        position: Vec<f64>,
        lower: f64,
        upper: f64,
        dims: usize,
    },
    #[error("evaluation budget of {budget} evaluations is exhausted")]
    BudgetExhausted { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid search space: {0}")]
    SearchSpace(String),
    #[error("invalid landscape: {0}")]
    Landscape(String),
    #[error("invalid change schedule: {0}")]
    Schedule(String),
    #[error("invalid algorithm parameters: {0}")]
    Algorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("offline error is undefined before the first evaluation")]
pub struct UndefinedMetric;

/// A uniform box `[lower, upper]^dims`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpace {
    dims: usize,
    lower: f64,
    upper: f64,
}

impl SearchSpace {
    pub fn new(dims: usize, lower: f64, upper: f64) -> Result<Self, ConfigError> {
        if dims == 0 {
            return Err(ConfigError::SearchSpace(
                "dimension must be at least 1".into(),
            ));
        }
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(ConfigError::SearchSpace(format!(
                "bounds must be finite with lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { dims, lower, upper })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `Ub - Lb`.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims && x.iter().all(|&v| v >= self.lower && v <= self.upper)
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dims)
            .map(|_| rng.random_range(self.lower..=self.upper))
            .collect()
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// One cone of the landscape: `height - width * ||x - center||`.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub center: Vec<f64>,
    pub height: f64,
    pub width: f64,
}

impl Peak {
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.height - self.width * euclidean(x, &self.center)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeSchedule {
    /// Evaluations per environment.
    pub change_frequency: u64,
    pub shift_severity: f64,
    pub height_severity: f64,
    pub width_severity: f64,
    pub num_environments: u64,
}

impl ChangeSchedule {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.change_frequency == 0 {
            return Err(ConfigError::Schedule(
                "change frequency must be positive".into(),
            ));
        }
        if self.num_environments == 0 {
            return Err(ConfigError::Schedule(
                "number of environments must be positive".into(),
            ));
        }
        for (name, v) in [
            ("shift severity", self.shift_severity),
            ("height severity", self.height_severity),
            ("width severity", self.width_severity),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::Schedule(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Total evaluation budget `T * change_frequency`.
    pub fn budget(&self) -> u64 {
        self.num_environments * self.change_frequency
    }

    /// Environment (1-based) that the `evals_done`-th evaluation was made in.
    pub fn environment_of(&self, evals_done: u64) -> u64 {
        if evals_done == 0 {
            1
        } else {
            1 + (evals_done - 1) / self.change_frequency
        }
    }
}

/// Everything needed to build a landscape apart from the dynamics seed.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeParams {
    pub space: SearchSpace,
    pub num_peaks: usize,
    pub height_range: (f64, f64),
    pub width_range: (f64, f64),
    pub schedule: ChangeSchedule,
}

impl LandscapeParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.schedule.validate()?;
        if self.num_peaks == 0 {
            return Err(ConfigError::Landscape(
                "at least one peak is required".into(),
            ));
        }
        let (hmin, hmax) = self.height_range;
        if !(hmin.is_finite() && hmax.is_finite() && hmin <= hmax) {
            return Err(ConfigError::Landscape(format!(
                "height range [{hmin}, {hmax}] is not a valid interval"
            )));
        }
        let (wmin, wmax) = self.width_range;
        if !(wmin.is_finite() && wmax.is_finite() && wmin > 0.0 && wmin <= wmax) {
            return Err(ConfigError::Landscape(format!(
                "width range [{wmin}, {wmax}] must be a positive interval"
            )));
        }
        Ok(())
    }
}

/// A max-of-cones field whose peaks drift on a fixed evaluation schedule.
///
/// Peak initialisation and drift draw from a private RNG seeded by the
/// dynamics seed, so two optimizers evaluated against landscapes with the
/// same seed face exactly the same sequence of environments.
#[derive(Debug, Clone)]
pub struct DynamicLandscape {
    params: LandscapeParams,
    peaks: Vec<Peak>,
    evals_done: u64,
    env_index: u64,
    rng: ChaCha8Rng,
}

impl DynamicLandscape {
    pub fn new(params: LandscapeParams, dynamics_seed: u64) -> Result<Self, ConfigError> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(dynamics_seed);
        let (hmin, hmax) = params.height_range;
        let (wmin, wmax) = params.width_range;
        let peaks = (0..params.num_peaks)
            .map(|_| Peak {
                center: params.space.sample(&mut rng),
                height: rng.random_range(hmin..=hmax),
                width: rng.random_range(wmin..=wmax),
            })
            .collect();
        Ok(Self {
            params,
            peaks,
            evals_done: 0,
            env_index: 1,
            rng,
        })
    }

    /// Builds a landscape around explicit peaks. The peaks must already
    /// satisfy the bounds in `params`.
    pub fn with_peaks(
        params: LandscapeParams,
        peaks: Vec<Peak>,
        dynamics_seed: u64,
    ) -> Result<Self, ConfigError> {
        params.validate()?;
        if peaks.len() != params.num_peaks {
            return Err(ConfigError::Landscape(format!(
                "expected {} peaks, got {}",
                params.num_peaks,
                peaks.len()
            )));
        }
        for p in &peaks {
            if !params.space.contains(&p.center) || p.width.is_nan() || p.width <= 0.0 {
                return Err(ConfigError::Landscape(format!("invalid peak {p:?}")));
            }
        }
        Ok(Self {
            params,
            peaks,
            evals_done: 0,
            env_index: 1,
            rng: ChaCha8Rng::seed_from_u64(dynamics_seed),
        })
    }

    pub fn space(&self) -> &SearchSpace {
        &self.params.space
    }

    pub fn params(&self) -> &LandscapeParams {
        &self.params
    }

    pub fn schedule(&self) -> &ChangeSchedule {
        &self.params.schedule
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn evals_done(&self) -> u64 {
        self.evals_done
    }

    pub fn env_index(&self) -> u64 {
        self.env_index
    }

    /// Landscape value at `x` in the current environment, without touching
    /// any counter.
    pub fn fitness_at(&self, x: &[f64]) -> f64 {
        self.peaks
            .iter()
            .map(|p| p.value_at(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Apex of the highest peak. Every cone is maximised at its own centre
    /// and the field is a pointwise max, so this is the global optimum.
    pub fn current_optimum(&self) -> (Vec<f64>, f64) {
        let best = self
            .peaks
            .iter()
            .reduce(|a, b| if b.height > a.height { b } else { a })
            .expect("landscape has at least one peak");
        (best.center.clone(), best.height)
    }

    /// Moves to the next environment: every centre shifts by exactly
    /// `shift_severity` along a random direction (then clamped), heights and
    /// widths take clamped Gaussian steps.
    pub fn advance_environment(&mut self) {
        assert!(
            self.env_index < self.params.schedule.num_environments,
            "advance_environment called in the final environment"
        );
        let ChangeSchedule {
            shift_severity,
            height_severity,
            width_severity,
            ..
        } = self.params.schedule;
        let space = self.params.space;
        let (hmin, hmax) = self.params.height_range;
        let (wmin, wmax) = self.params.width_range;
        let height_step = Normal::new(0.0, height_severity).expect("validated severity");
        let width_step = Normal::new(0.0, width_severity).expect("validated severity");

        for peak in &mut self.peaks {
            let direction = random_unit_vector(space.dims(), &mut self.rng);
            for (c, u) in peak.center.iter_mut().zip(&direction) {
                *c = space.clamp(*c + shift_severity * u);
            }
            peak.height = (peak.height + height_step.sample(&mut self.rng)).clamp(hmin, hmax);
            peak.width = (peak.width + width_step.sample(&mut self.rng)).clamp(wmin, wmax);
        }
        self.env_index += 1;
    }
}

/// Uniform direction on the unit sphere via normalised Gaussian draws.
pub(crate) fn random_unit_vector<R: Rng + ?Sized>(dims: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dims).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Running offline error: the mean, over every evaluation, of the gap between
/// the current environment's optimum and the best fitness seen so far in
/// that environment.
#[derive(Debug, Clone)]
pub struct OfflineErrorTracker {
    sum: f64,
    count: u64,
    current_env_best: Option<f64>,
    current_optimum: f64,
    trace: Option<Vec<f64>>,
}

impl OfflineErrorTracker {
    pub fn new(optimum_value: f64) -> Self {
        Self {
            sum: 0.0,
            count: 0,
            current_env_best: None,
            current_optimum: optimum_value,
            trace: None,
        }
    }

    /// Also keep every per-evaluation error.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    /// Registers an evaluation and returns the error charged for it.
    pub fn record(&mut self, fitness: f64) -> f64 {
        let best = match self.current_env_best {
            Some(b) if b >= fitness => b,
            _ => fitness,
        };
        self.current_env_best = Some(best);
        let error = self.current_optimum - best;
        debug_assert!(error >= 0.0, "negative error {error}");
        self.sum += error;
        self.count += 1;
        if let Some(trace) = &mut self.trace {
            trace.push(error);
        }
        error
    }

    /// Change hook: forget the best-found value and adopt the new optimum.
    pub fn start_environment(&mut self, optimum_value: f64) {
        self.current_env_best = None;
        self.current_optimum = optimum_value;
    }

    pub fn current_env_best(&self) -> Option<f64> {
        self.current_env_best
    }

    pub fn current_optimum(&self) -> f64 {
        self.current_optimum
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn trace(&self) -> Option<&[f64]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<f64>> {
        self.trace.take()
    }

    pub fn offline_error(&self) -> Result<f64, UndefinedMetric> {
        if self.count == 0 {
            Err(UndefinedMetric)
        } else {
            Ok(self.sum / self.count as f64)
        }
    }
}

/// The optimizer's entire view of a problem: its bounds and a fitness oracle.
/// Nothing about environment changes crosses this boundary.
pub trait Objective {
    fn space(&self) -> &SearchSpace;
    fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError>;
}

/// Snapshot of one environment's peaks, for the history dump.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentRecord {
    pub env_index: u64,
    pub peaks: Vec<Peak>,
}

impl fmt::Display for EnvironmentRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, peak) in self.peaks.iter().enumerate() {
            write!(f, "{},{}", self.env_index, id)?;
            for c in &peak.center {
                write!(f, ",{c}")?;
            }
            writeln!(f, ",{},{}", peak.height, peak.width)?;
        }
        Ok(())
    }
}

/// A landscape wired to its offline-error tracker and evaluation budget.
#[derive(Debug, Clone)]
pub struct Benchmark {
    landscape: DynamicLandscape,
    tracker: OfflineErrorTracker,
    history: Option<Vec<EnvironmentRecord>>,
}

impl Benchmark {
    pub fn new(landscape: DynamicLandscape) -> Self {
        let (_, optimum) = landscape.current_optimum();
        Self {
            landscape,
            tracker: OfflineErrorTracker::new(optimum),
            history: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.tracker = self.tracker.with_trace();
        self
    }

    /// Also record every environment's peaks for [`Benchmark::write_history`].
    pub fn with_history(mut self) -> Self {
        self.history = Some(vec![self.snapshot()]);
        self
    }

    fn snapshot(&self) -> EnvironmentRecord {
        EnvironmentRecord {
            env_index: self.landscape.env_index(),
            peaks: self.landscape.peaks().to_vec(),
        }
    }

    pub fn landscape(&self) -> &DynamicLandscape {
        &self.landscape
    }

    pub fn tracker(&self) -> &OfflineErrorTracker {
        &self.tracker
    }

    pub fn tracker_mut(&mut self) -> &mut OfflineErrorTracker {
        &mut self.tracker
    }

    pub fn budget(&self) -> u64 {
        self.landscape.schedule().budget()
    }

    pub fn evals_done(&self) -> u64 {
        self.landscape.evals_done
    }

    pub fn offline_error(&self) -> Result<f64, UndefinedMetric> {
        self.tracker.offline_error()
    }

    pub fn history(&self) -> Option<&[EnvironmentRecord]> {
        self.history.as_deref()
    }

    /// Writes `env_index,peak_id,center...,height,width` lines.
    pub fn write_history<W: Write>(&self, mut out: W) -> io::Result<()> {
        for record in self.history.iter().flatten() {
            write!(out, "{record}")?;
        }
        Ok(())
    }

    fn advance(&mut self) {
        self.landscape.advance_environment();
        let (_, optimum) = self.landscape.current_optimum();
        self.tracker.start_environment(optimum);
        let snap = self.history.is_some().then(|| self.snapshot());
        if let (Some(history), Some(snap)) = (&mut self.history, snap) {
            history.push(snap);
        }
    }
}

impl Objective for Benchmark {
    fn space(&self) -> &SearchSpace {
        self.landscape.space()
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        let budget = self.budget();
        if self.landscape.evals_done >= budget {
            return Err(EvalError::BudgetExhausted { budget });
        }
        let space = self.landscape.space();
        if !space.contains(x) {
            return Err(EvalError::OutOfBounds {
                position: x.to_vec(),
                lower: space.lower(),
                upper: space.upper(),
                dims: space.dims(),
            });
        }
        let fitness = self.landscape.fitness_at(x);
        self.landscape.evals_done += 1;
        self.tracker.record(fitness);

        let schedule = self.landscape.schedule();
        if self
            .landscape
            .evals_done
            .is_multiple_of(schedule.change_frequency)
            && self.landscape.env_index < schedule.num_environments
        {
            self.advance();
        }
        Ok(fitness)
    }
}

/// Adapts a closure into an [`Objective`] with an optional evaluation cap.
/// Handy for static test functions.
pub struct FnObjective<F> {
    space: SearchSpace,
    f: F,
    budget: Option<u64>,
    evals: u64,
}

impl<F: FnMut(&[f64]) -> f64> FnObjective<F> {
    pub fn new(space: SearchSpace, f: F) -> Self {
        Self {
            space,
            f,
            budget: None,
            evals: 0,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn evals(&self) -> u64 {
        self.evals
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for FnObjective<F> {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        if let Some(budget) = self.budget {
            if self.evals >= budget {
                return Err(EvalError::BudgetExhausted { budget });
            }
        }
        if !self.space.contains(x) {
            return Err(EvalError::OutOfBounds {
                position: x.to_vec(),
                lower: self.space.lower(),
                upper: self.space.upper(),
                dims: self.space.dims(),
            });
        }
        self.evals += 1;
        Ok((self.f)(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(freq: u64, envs: u64, shift: f64, hs: f64, ws: f64) -> ChangeSchedule {
        ChangeSchedule {
            change_frequency: freq,
            shift_severity: shift,
            height_severity: hs,
            width_severity: ws,
            num_environments: envs,
        }
    }

    fn params(dims: usize, peaks: usize, sched: ChangeSchedule) -> LandscapeParams {
        LandscapeParams {
            space: SearchSpace::new(dims, -100.0, 100.0).unwrap(),
            num_peaks: peaks,
            height_range: (30.0, 70.0),
            width_range: (1.0, 12.0),
            schedule: sched,
        }
    }

    fn fixed(dims: usize, peaks: Vec<Peak>, sched: ChangeSchedule) -> DynamicLandscape {
        let mut p = params(dims, peaks.len(), sched);
        p.width_range = (0.5, 12.0);
        DynamicLandscape::with_peaks(p, peaks, 7).unwrap()
    }

    #[test]
    fn apex_has_peak_height() {
        let land = fixed(
            3,
            vec![Peak {
                center: vec![0.0; 3],
                height: 50.0,
                width: 1.0,
            }],
            schedule(10, 1, 0.0, 0.0, 0.0),
        );
        assert_eq!(land.fitness_at(&[0.0; 3]), 50.0);
    }

    #[test]
    fn single_cone_slope() {
        let land = fixed(
            1,
            vec![Peak {
                center: vec![0.0],
                height: 50.0,
                width: 2.0,
            }],
            schedule(10, 1, 0.0, 0.0, 0.0),
        );
        assert_eq!(land.fitness_at(&[3.0]), 44.0);
    }

    #[test]
    fn two_cones_take_max() {
        let land = fixed(
            1,
            vec![
                Peak {
                    center: vec![0.0],
                    height: 50.0,
                    width: 1.0,
                },
                Peak {
                    center: vec![10.0],
                    height: 60.0,
                    width: 5.0,
                },
            ],
            schedule(10, 1, 0.0, 0.0, 0.0),
        );
        // 50 - 4 = 46 versus 60 - 30 = 30
        assert_eq!(land.fitness_at(&[4.0]), 46.0);
    }

    #[test]
    fn optimum_is_highest_apex() {
        let peaks = [30.0, 70.0, 50.0]
            .iter()
            .enumerate()
            .map(|(i, &h)| Peak {
                center: vec![i as f64 * 10.0, 0.0],
                height: h,
                width: 2.0,
            })
            .collect();
        let land = fixed(2, peaks, schedule(10, 1, 0.0, 0.0, 0.0));
        let (pos, value) = land.current_optimum();
        assert_eq!(pos, vec![10.0, 0.0]);
        assert_eq!(value, 70.0);
        assert_eq!(land.fitness_at(&pos), value);
    }

    #[test]
    fn zero_severity_change_is_identity() {
        let mut land =
            DynamicLandscape::new(params(4, 6, schedule(5, 3, 0.0, 0.0, 0.0)), 11).unwrap();
        let before = land.peaks().to_vec();
        land.advance_environment();
        assert_eq!(land.peaks(), &before[..]);
        assert_eq!(land.env_index(), 2);
    }

    #[test]
    fn unit_shift_moves_every_centre_by_one() {
        let peaks = (0..8)
            .map(|i| Peak {
                center: vec![i as f64; 5],
                height: 50.0,
                width: 3.0,
            })
            .collect();
        let mut land = fixed(5, peaks, schedule(5, 3, 1.0, 0.0, 0.0));
        let before = land.peaks().to_vec();
        land.advance_environment();
        for (a, b) in before.iter().zip(land.peaks()) {
            assert!((euclidean(&a.center, &b.center) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dynamics_are_seed_deterministic() {
        let p = params(5, 10, schedule(5, 10, 1.0, 7.0, 1.0));
        let mut a = DynamicLandscape::new(p.clone(), 99).unwrap();
        let mut b = DynamicLandscape::new(p, 99).unwrap();
        for _ in 0..5 {
            a.advance_environment();
            b.advance_environment();
            assert_eq!(a.peaks(), b.peaks());
        }
    }

    #[test]
    fn heights_and_widths_stay_in_range() {
        let p = params(2, 20, schedule(5, 200, 30.0, 20.0, 5.0));
        let mut land = DynamicLandscape::new(p, 3).unwrap();
        for _ in 0..150 {
            land.advance_environment();
            for peak in land.peaks() {
                assert!((30.0..=70.0).contains(&peak.height));
                assert!((1.0..=12.0).contains(&peak.width));
                assert!(land.space().contains(&peak.center));
            }
        }
    }

    #[test]
    fn environment_changes_every_frequency_evaluations() {
        let land = DynamicLandscape::new(params(2, 3, schedule(4, 3, 1.0, 7.0, 1.0)), 5).unwrap();
        let mut bench = Benchmark::new(land);
        let x = [0.0, 0.0];
        for k in 1..=12u64 {
            assert_eq!(
                bench.landscape().env_index(),
                bench.landscape().schedule().environment_of(k)
            );
            bench.evaluate(&x).unwrap();
        }
        assert_eq!(bench.landscape().env_index(), 3);
        assert_eq!(
            bench.evaluate(&x),
            Err(EvalError::BudgetExhausted { budget: 12 })
        );
        assert_eq!(bench.tracker().count(), 12);
    }

    #[test]
    fn out_of_bounds_is_rejected_without_consuming_budget() {
        let land = DynamicLandscape::new(params(2, 3, schedule(4, 3, 1.0, 7.0, 1.0)), 5).unwrap();
        let mut bench = Benchmark::new(land);
        assert!(matches!(
            bench.evaluate(&[0.0, 100.5]),
            Err(EvalError::OutOfBounds { .. })
        ));
        assert!(matches!(
            bench.evaluate(&[0.0]),
            Err(EvalError::OutOfBounds { .. })
        ));
        assert_eq!(bench.evals_done(), 0);
    }

    #[test]
    fn offline_error_single_environment() {
        let mut t = OfflineErrorTracker::new(10.0);
        t.record(8.0);
        t.record(9.0);
        assert_eq!(t.offline_error().unwrap(), 1.5);
    }

    #[test]
    fn offline_error_resets_at_change() {
        let mut t = OfflineErrorTracker::new(10.0);
        t.record(10.0);
        t.start_environment(20.0);
        assert_eq!(t.current_env_best(), None);
        t.record(15.0);
        assert_eq!(t.offline_error().unwrap(), 2.5);
    }

    #[test]
    fn offline_error_keeps_best_so_far() {
        let mut t = OfflineErrorTracker::new(10.0).with_trace();
        for f in [3.0, 7.0, 5.0, 6.0] {
            t.record(f);
        }
        assert_eq!(t.trace().unwrap(), &[7.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn offline_error_undefined_without_evaluations() {
        assert_eq!(
            OfflineErrorTracker::new(1.0).offline_error(),
            Err(UndefinedMetric)
        );
    }

    #[test]
    fn evaluating_the_optimum_first_gives_zero_error() {
        let land = DynamicLandscape::new(params(3, 5, schedule(3, 4, 2.0, 7.0, 1.0)), 21).unwrap();
        let mut bench = Benchmark::new(land);
        while bench.evals_done() < bench.budget() {
            let (opt, _) = bench.landscape().current_optimum();
            bench.evaluate(&opt).unwrap();
            let x = bench
                .space()
                .sample(&mut ChaCha8Rng::seed_from_u64(bench.evals_done()));
            for _ in 0..2 {
                bench.evaluate(&x).unwrap();
            }
        }
        assert_eq!(bench.offline_error().unwrap(), 0.0);
    }

    #[test]
    fn history_dump_lists_every_environment() {
        let land = DynamicLandscape::new(params(2, 2, schedule(1, 3, 1.0, 7.0, 1.0)), 5).unwrap();
        let mut bench = Benchmark::new(land).with_history();
        for _ in 0..3 {
            bench.evaluate(&[0.0, 0.0]).unwrap();
        }
        let mut buf = Vec::new();
        bench.write_history(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[0].starts_with("1,0,"));
        assert!(lines[5].starts_with("3,1,"));
        let fields: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields.len(), 2 + 2 + 2);
        assert_eq!(
            fields[2..4],
            bench.history().unwrap()[1].peaks[0].center[..]
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SearchSpace::new(0, 0.0, 1.0).is_err());
        assert!(SearchSpace::new(2, 1.0, 1.0).is_err());
        assert!(DynamicLandscape::new(params(2, 0, schedule(1, 1, 0.0, 0.0, 0.0)), 0).is_err());
        assert!(DynamicLandscape::new(params(2, 1, schedule(0, 1, 0.0, 0.0, 0.0)), 0).is_err());
        assert!(DynamicLandscape::new(params(2, 1, schedule(1, 1, -1.0, 0.0, 0.0)), 0).is_err());
    }
}
