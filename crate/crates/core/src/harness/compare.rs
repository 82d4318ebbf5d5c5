//! Rank-sum comparison of two result files.

use std::fmt;
use std::path::Path;

use super::HarnessError;
use crate::stats::{mann_whitney_u, summarize, SampleSummary};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// A data row read back from a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub algo: String,
    pub seed: u64,
    pub offline_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleInfo {
    pub scenario: String,
    pub algo: String,
    pub summary: SampleSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: SampleInfo,
    pub b: SampleInfo,
    pub u: f64,
    pub p: f64,
}

impl Comparison {
    pub fn significant(&self) -> bool {
        self.p < SIGNIFICANCE_LEVEL
    }

    pub fn verdict(&self) -> &'static str {
        if self.significant() {
            "significant"
        } else {
            "no significant difference"
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (tag, s) in [("a", &self.a), ("b", &self.b)] {
            writeln!(
                f,
                "{tag}: scenario={} algo={} n={} mean={} std_error={}",
                s.scenario, s.algo, s.summary.n, s.summary.mean, s.summary.std_error
            )?;
        }
        writeln!(f, "U={} p={}", self.u, self.p)?;
        write!(f, "verdict: {}", self.verdict())?;
        if self.significant() {
            let lower = if self.a.summary.mean < self.b.summary.mean {
                "a"
            } else {
                "b"
            };
            write!(f, " ({lower} has the lower mean offline error)")?;
        }
        Ok(())
    }
}

/// Data rows of a results CSV; `#` rows (summaries, partial markers) are skipped.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let bad = |msg: String| HarnessError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name:?}")))
    };
    let (c_scenario, c_algo, c_seed, c_err) = (
        col("scenario")?,
        col("algo")?,
        col("seed")?,
        col("offline_error")?,
    );
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |c: usize| {
            rec.get(c)
                .ok_or_else(|| bad(format!("row {} is short", i + 1)))
        };
        rows.push(ResultRow {
            scenario: field(c_scenario)?.to_string(),
            algo: field(c_algo)?.to_string(),
            seed: field(c_seed)?
                .parse()
                .map_err(|e| bad(format!("row {}: bad seed: {e}", i + 1)))?,
            offline_error: field(c_err)?
                .parse()
                .map_err(|e| bad(format!("row {}: bad offline_error: {e}", i + 1)))?,
        });
    }
    Ok(rows)
}

/// Rows for one (scenario, algo) group. With `algo` unset the file must
/// hold exactly one group.
fn select(
    rows: Vec<ResultRow>,
    algo: Option<&str>,
    origin: &str,
) -> Result<Vec<ResultRow>, HarnessError> {
    let rows: Vec<ResultRow> = match algo {
        Some(a) => rows.into_iter().filter(|r| r.algo == a).collect(),
        None => rows,
    };
    let mut groups: Vec<(String, String)> = rows
        .iter()
        .map(|r| (r.scenario.clone(), r.algo.clone()))
        .collect();
    groups.sort();
    groups.dedup();
    match groups.len() {
        0 => Err(HarnessError::Usage(format!(
            "{origin}: no matching data rows"
        ))),
        1 => Ok(rows),
        _ => {
            let names: Vec<String> = groups.iter().map(|(s, a)| format!("{s}/{a}")).collect();
            Err(HarnessError::Usage(format!(
                "{origin}: holds several result groups ({}); pick one by algo label",
                names.join(", ")
            )))
        }
    }
}

fn sample_info(rows: &[ResultRow], origin: &str) -> Result<(SampleInfo, Vec<f64>), HarnessError> {
    let values: Vec<f64> = rows.iter().map(|r| r.offline_error).collect();
    if values.len() < 2 {
        return Err(HarnessError::Usage(format!(
            "{origin}: needs at least 2 runs, found {}",
            values.len()
        )));
    }
    let summary = summarize(&values).expect("non-empty");
    Ok((
        SampleInfo {
            scenario: rows[0].scenario.clone(),
            algo: rows[0].algo.clone(),
            summary,
        },
        values,
    ))
}

/// Compares two single-group row sets. Both must cover the same scenario.
pub fn compare_samples(a: &[ResultRow], b: &[ResultRow]) -> Result<Comparison, HarnessError> {
    let (info_a, va) = sample_info(a, "a")?;
    let (info_b, vb) = sample_info(b, "b")?;
    if info_a.scenario != info_b.scenario {
        return Err(HarnessError::Usage(format!(
            "scenario mismatch: {} vs {}",
            info_a.scenario, info_b.scenario
        )));
    }
    let mw = mann_whitney_u(&va, &vb).expect("non-empty samples");
    Ok(Comparison {
        a: info_a,
        b: info_b,
        u: mw.u,
        p: mw.p_two_sided,
    })
}

pub fn compare_files(
    a: &Path,
    b: &Path,
    algo_a: Option<&str>,
    algo_b: Option<&str>,
) -> Result<Comparison, HarnessError> {
    let rows_a = select(read_results(a)?, algo_a, &a.display().to_string())?;
    let rows_b = select(read_results(b)?, algo_b, &b.display().to_string())?;
    compare_samples(&rows_a, &rows_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(scenario: &str, algo: &str, values: &[f64]) -> Vec<ResultRow> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ResultRow {
                scenario: scenario.into(),
                algo: algo.into(),
                seed: i as u64,
                offline_error: v,
            })
            .collect()
    }

    #[test]
    fn same_sample_is_not_significant() {
        let a = rows("F1", "pspso", &[3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0]);
        let c = compare_samples(&a, &a).unwrap();
        assert!(c.p > 0.99);
        assert_eq!(c.verdict(), "no significant difference");
    }

    #[test]
    fn disjoint_samples_are_significant() {
        let a = rows("F1", "x", &[1.0; 31]);
        let b = rows("F1", "y", &[100.0; 31]);
        let c = compare_samples(&a, &b).unwrap();
        assert!(c.p < 0.001);
        assert_eq!(c.verdict(), "significant");
        assert!(c
            .to_string()
            .contains("(a has the lower mean offline error)"));
    }

    #[test]
    fn usage_errors() {
        let a = rows("F1", "x", &[1.0, 2.0]);
        assert!(matches!(
            compare_samples(&a, &rows("F2", "x", &[1.0, 2.0])),
            Err(HarnessError::Usage(_))
        ));
        assert!(matches!(
            compare_samples(&a, &rows("F1", "x", &[1.0])),
            Err(HarnessError::Usage(_))
        ));
        let mixed: Vec<ResultRow> = a
            .iter()
            .cloned()
            .chain(rows("F1", "y", &[1.0, 2.0]))
            .collect();
        assert!(select(mixed.clone(), None, "m").is_err());
        assert_eq!(select(mixed, Some("y"), "m").unwrap().len(), 2);
    }
}
