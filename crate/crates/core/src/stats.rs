//! Sample summaries and the two-sided Mann-Whitney U test.

use std::cmp::Ordering;

use statrs::function::erf::erfc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero when `n == 1`.
    pub std_error: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Result<SampleSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    Ok(SampleSummary { mean, std_error, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample: pairs `(a_i, b_j)` with `a_i > b_j`,
    /// ties counting one half.
    pub u: f64,
    pub p_two_sided: f64,
}

/// Samples at or below this size get an exact p-value by enumerating every
/// split of the pooled ranks; larger ones use the normal approximation.
pub const EXACT_MAX_SIZE: usize = 8;

/// Two-sided Mann-Whitney U test of `a` against `b`.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    let ranked = rank(a, b)?;
    let p = if a.len() <= EXACT_MAX_SIZE && b.len() <= EXACT_MAX_SIZE {
        exact_p(&ranked, a.len())
    } else {
        normal_p(ranked.u, a.len(), b.len(), ranked.tie_term)
    };
    Ok(MannWhitney {
        u: ranked.u,
        p_two_sided: p,
    })
}

/// Same test but always with the normal approximation: tie-corrected
/// variance and a 0.5 continuity correction.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    let ranked = rank(a, b)?;
    let p = normal_p(ranked.u, a.len(), b.len(), ranked.tie_term);
    Ok(MannWhitney {
        u: ranked.u,
        p_two_sided: p,
    })
}

struct Ranked {
    u: f64,
    /// Sum of `t^3 - t` over tie groups.
    tie_term: f64,
    /// Average rank of every pooled value, in pooled order.
    ranks: Vec<f64>,
}

fn rank(a: &[f64], b: &[f64]) -> Result<Ranked, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&x, &y| pooled[x].partial_cmp(&pooled[y]).unwrap_or(Ordering::Equal));

    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let na = a.len() as f64;
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    Ok(Ranked {
        u: rank_sum_a - na * (na + 1.0) / 2.0,
        tie_term,
        ranks,
    })
}

fn normal_p(u: f64, na: usize, nb: usize, tie_term: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    let n = na + nb;
    let mean = na * nb / 2.0;
    let var = if n > 1.0 {
        na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
    } else {
        0.0
    };
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Share of all `C(n, na)` relabellings of the pooled ranks whose U is at
/// least as far from its mean as the observed one. Ties are handled by the
/// shared average ranks.
fn exact_p(ranked: &Ranked, na: usize) -> f64 {
    let n = ranked.ranks.len();
    let nb = n - na;
    let mean = (na * nb) as f64 / 2.0;
    let offset = (na * (na + 1)) as f64 / 2.0;
    let observed = (ranked.u - mean).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let rank_sum: f64 = (0..n)
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| ranked.ranks[k])
            .sum();
        total += 1;
        if (rank_sum - offset - mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    (extreme as f64 / total as f64).clamp(0.0, 1.0)
}
