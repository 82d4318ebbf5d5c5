//! Experiment configuration: scenario defaults, a sectioned TOML file and
//! `key=value` overrides, resolved into one fully explicit document.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::scenario::resolve_scenario;
use super::HarnessError;
use crate::mechanisms::AlgoConfig;
use crate::problem::{ChangeSchedule, LandscapeParams, SearchSpace};
use crate::swarm::{PsoParams, VelocityForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    Pspso,
    RestartBaseline,
}

impl AlgoKind {
    pub fn name(&self) -> &'static str {
        match self {
            AlgoKind::Pspso => "pspso",
            AlgoKind::RestartBaseline => "restart-baseline",
        }
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgoKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pspso" => Ok(AlgoKind::Pspso),
            "restart-baseline" | "restart" | "baseline" => Ok(AlgoKind::RestartBaseline),
            other => Err(format!(
                "unknown algorithm {other:?} (expected pspso or restart-baseline)"
            )),
        }
    }
}

fn as_name<S: Serializer>(kind: &AlgoKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(kind.name())
}

fn form_name<S: Serializer>(form: &VelocityForm, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(form.name())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSection {
    pub scenario: String,
    pub peaks: usize,
    pub change_frequency: u64,
    pub dims: usize,
    pub shift_severity: f64,
    pub height_severity: f64,
    pub width_severity: f64,
    pub environments: u64,
    pub lower: f64,
    pub upper: f64,
    pub min_height: f64,
    pub max_height: f64,
    pub min_width: f64,
    pub max_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgoSection {
    #[serde(serialize_with = "as_name")]
    pub name: AlgoKind,
    pub swarm_count: usize,
    pub swarm_size: usize,
    pub diversity_threshold: f64,
    pub perturbation: f64,
    pub convergence_factor: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    #[serde(serialize_with = "form_name")]
    pub velocity_form: VelocityForm,
    pub restart_every: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSection {
    pub runs: usize,
    pub seed: u64,
    pub jobs: usize,
    /// Fill the wall_time_ms column. Off by default so reruns produce
    /// byte-identical rows.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    pub algo: AlgoSection,
    pub run: RunSection,
}

pub const DEFAULT_RUNS: usize = 31;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ENVIRONMENTS: u64 = 100;
pub const DEFAULT_RESTART_EVERY: u64 = 5000;

/// Short names accepted wherever a key is expected.
const ALIASES: &[(&str, &str)] = &[
    ("n", "algo.swarm_count"),
    ("s", "algo.swarm_size"),
    ("alpha", "algo.diversity_threshold"),
    ("p", "algo.perturbation"),
    ("w", "algo.inertia"),
    ("c1", "algo.cognitive"),
    ("c2", "algo.social"),
    ("algo", "algo.name"),
    ("scenario", "problem.scenario"),
    ("T", "problem.environments"),
    ("runs", "run.runs"),
    ("seed", "run.seed"),
    ("jobs", "run.jobs"),
];

/// Full `section.field` name for `key`. Aliases also work inside their own
/// section, so `algo.p` means `algo.perturbation`.
pub fn canonical_key(key: &str) -> &str {
    let lookup = |k: &str| {
        ALIASES
            .iter()
            .find(|(alias, _)| *alias == k)
            .map(|(_, full)| *full)
    };
    if let Some(full) = lookup(key) {
        return full;
    }
    if let Some((section, field)) = key.split_once('.') {
        if let Some(full) = lookup(field) {
            if full.split_once('.').map(|(s, _)| s) == Some(section) {
                return full;
            }
        }
    }
    key
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| HarnessError::Usage(format!("invalid value {value:?} for {key}: {e}")))
}

impl ExperimentConfig {
    /// Scenario row plus default algorithm and landscape settings.
    pub fn for_scenario(name: &str) -> Result<Self, HarnessError> {
        let sc = resolve_scenario(name)?;
        let algo = AlgoConfig::default();
        let pso = PsoParams::default();
        Ok(Self {
            problem: ProblemSection {
                scenario: sc.name.to_string(),
                peaks: sc.peaks,
                change_frequency: sc.change_frequency,
                dims: sc.dims,
                shift_severity: sc.shift_severity,
                height_severity: 7.0,
                width_severity: 1.0,
                environments: DEFAULT_ENVIRONMENTS,
                lower: -100.0,
                upper: 100.0,
                min_height: 30.0,
                max_height: 70.0,
                min_width: 1.0,
                max_width: 12.0,
            },
            algo: AlgoSection {
                name: AlgoKind::Pspso,
                swarm_count: algo.swarm_count,
                swarm_size: algo.swarm_size,
                diversity_threshold: algo.diversity_threshold,
                perturbation: algo.perturbation,
                convergence_factor: algo.convergence_factor,
                inertia: pso.inertia,
                cognitive: pso.cognitive,
                social: pso.social,
                velocity_form: pso.form,
                restart_every: DEFAULT_RESTART_EVERY,
            },
            run: RunSection {
                runs: DEFAULT_RUNS,
                seed: DEFAULT_SEED,
                jobs: 1,
                timing: false,
            },
        })
    }

    /// Sets one field by `section.field` name or alias. Setting the scenario
    /// replaces the four scenario-table fields and nothing else.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let key = canonical_key(key.trim());
        let v = value.trim();
        let p = &mut self.problem;
        let a = &mut self.algo;
        let r = &mut self.run;
        match key {
            "problem.scenario" => {
                let sc = resolve_scenario(v)?;
                p.scenario = sc.name.to_string();
                p.peaks = sc.peaks;
                p.change_frequency = sc.change_frequency;
                p.dims = sc.dims;
                p.shift_severity = sc.shift_severity;
            }
            "problem.peaks" => p.peaks = parse(key, v)?,
            "problem.change_frequency" => p.change_frequency = parse(key, v)?,
            "problem.dims" => p.dims = parse(key, v)?,
            "problem.shift_severity" => p.shift_severity = parse(key, v)?,
            "problem.height_severity" => p.height_severity = parse(key, v)?,
            "problem.width_severity" => p.width_severity = parse(key, v)?,
            "problem.environments" => p.environments = parse(key, v)?,
            "problem.lower" => p.lower = parse(key, v)?,
            "problem.upper" => p.upper = parse(key, v)?,
            "problem.min_height" => p.min_height = parse(key, v)?,
            "problem.max_height" => p.max_height = parse(key, v)?,
            "problem.min_width" => p.min_width = parse(key, v)?,
            "problem.max_width" => p.max_width = parse(key, v)?,
            "algo.name" => a.name = parse(key, v)?,
            "algo.swarm_count" => a.swarm_count = parse(key, v)?,
            "algo.swarm_size" => a.swarm_size = parse(key, v)?,
            "algo.diversity_threshold" => a.diversity_threshold = parse(key, v)?,
            "algo.perturbation" => a.perturbation = parse(key, v)?,
            "algo.convergence_factor" => a.convergence_factor = parse(key, v)?,
            "algo.inertia" => a.inertia = parse(key, v)?,
            "algo.cognitive" => a.cognitive = parse(key, v)?,
            "algo.social" => a.social = parse(key, v)?,
            "algo.velocity_form" => a.velocity_form = parse(key, v)?,
            "algo.restart_every" => a.restart_every = parse(key, v)?,
            "run.runs" => r.runs = parse(key, v)?,
            "run.seed" => r.seed = parse(key, v)?,
            "run.jobs" => r.jobs = parse(key, v)?,
            "run.timing" => r.timing = parse(key, v)?,
            other => {
                return Err(HarnessError::Usage(format!(
                    "unknown configuration key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Flattens a sectioned TOML document into `(section.key, value)` pairs,
    /// scenario first so explicit problem fields can override it.
    pub fn file_entries(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| HarnessError::Usage(format!("malformed configuration file: {e}")))?;
        let mut entries = Vec::new();
        for (section, body) in &table {
            let toml::Value::Table(body) = body else {
                return Err(HarnessError::Usage(format!(
                    "top-level key {section:?} must be a [section]"
                )));
            };
            for (key, value) in body {
                let text = match value {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => f.to_string(),
                    toml::Value::Boolean(b) => b.to_string(),
                    other => {
                        return Err(HarnessError::Usage(format!(
                            "unsupported value {other} for {section}.{key}"
                        )))
                    }
                };
                entries.push((format!("{section}.{key}"), text));
            }
        }
        entries.sort_by_key(|(k, _)| k != "problem.scenario");
        Ok(entries)
    }

    /// File entries, then `overrides` in order, on top of the scenario
    /// defaults. A scenario named in `overrides` wins over one in the file.
    pub fn resolve(
        file: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self, HarnessError> {
        let mut entries = match file {
            Some(text) => Self::file_entries(text)?,
            None => Vec::new(),
        };
        entries.extend(overrides.iter().cloned());
        Self::from_entries(&entries)
    }

    /// Applies `entries` in order over the defaults of the last scenario
    /// named among them (F1 if none).
    pub fn from_entries(entries: &[(String, String)]) -> Result<Self, HarnessError> {
        let scenario = entries
            .iter()
            .rev()
            .find(|(k, _)| canonical_key(k) == "problem.scenario")
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| "F1".to_string());
        let mut cfg = Self::for_scenario(&scenario)?;
        for (k, v) in entries {
            if canonical_key(k) != "problem.scenario" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn landscape_params(&self) -> Result<LandscapeParams, HarnessError> {
        let p = &self.problem;
        Ok(LandscapeParams {
            space: SearchSpace::new(p.dims, p.lower, p.upper)?,
            num_peaks: p.peaks,
            height_range: (p.min_height, p.max_height),
            width_range: (p.min_width, p.max_width),
            schedule: ChangeSchedule {
                change_frequency: p.change_frequency,
                shift_severity: p.shift_severity,
                height_severity: p.height_severity,
                width_severity: p.width_severity,
                num_environments: p.environments,
            },
        })
    }

    pub fn algo_config(&self) -> AlgoConfig {
        AlgoConfig {
            swarm_count: self.algo.swarm_count,
            swarm_size: self.algo.swarm_size,
            diversity_threshold: self.algo.diversity_threshold,
            perturbation: self.algo.perturbation,
            convergence_factor: self.algo.convergence_factor,
        }
    }

    pub fn pso_params(&self) -> PsoParams {
        PsoParams {
            inertia: self.algo.inertia,
            cognitive: self.algo.cognitive,
            social: self.algo.social,
            form: self.algo.velocity_form,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.landscape_params()?.validate()?;
        self.algo_config().validate()?;
        self.pso_params().validate()?;
        if self.algo.restart_every == 0 {
            return Err(HarnessError::Usage(
                "algo.restart_every must be positive".into(),
            ));
        }
        if self.run.runs == 0 {
            return Err(HarnessError::Usage("run.runs must be positive".into()));
        }
        if self.run.jobs == 0 {
            return Err(HarnessError::Usage("run.jobs must be positive".into()));
        }
        Ok(())
    }
}
