//! Two-sample Kolmogorov–Smirnov test with an asymptotic or a permutation
//! p-value.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KsMethod {
    Asymptotic,
    Permutation { resamples: usize, seed: u64 },
}

impl KsMethod {
    pub fn permutation(seed: u64) -> Self {
        KsMethod::Permutation {
            resamples: DEFAULT_RESAMPLES,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub method: KsMethod,
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Numerator of the supremum ECDF gap, scaled by `n1 * n2` so it stays an
/// integer: `max_x |c1(x) * n2 - c2(x) * n1|`.
fn scaled_gap_sorted(a: &[f64], b: &[f64]) -> u64 {
    let (n1, n2) = (a.len() as u64, b.len() as u64);
    let (mut i, mut j, mut best) = (0usize, 0usize, 0u64);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as u64 * n2).abs_diff(j as u64 * n1));
    }
    best
}

/// Supremum distance between the two empirical CDFs, evaluated at every
/// point of the merged sample.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample(if a.is_empty() { "first" } else { "second" }.into()));
    }
    let num = scaled_gap_sorted(&sorted(a), &sorted(b));
    Ok(num as f64 / (a.len() as f64 * b.len() as f64))
}

/// Kolmogorov distribution tail `Q(λ) = 2 Σ_{j≥1} (-1)^{j-1} exp(-2 j² λ²)`.
///
/// The series is cut once a term drops below 1e-12. If it has not settled
/// after 100 terms (λ below about 0.04) the tail is 1 to working precision.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 2.0;
    let a = -2.0 * lambda * lambda;
    for j in 1..=100u32 {
        let term = sign * (a * f64::from(j * j)).exp();
        sum += term;
        if term.abs() < 1e-12 {
            return sum.clamp(f64::MIN_POSITIVE, 1.0);
        }
        sign = -sign;
    }
    1.0
}

/// Asymptotic p-value for statistic `d` with sample sizes `n1`, `n2`.
pub fn asymptotic_p_value(d: f64, n1: usize, n2: usize) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let root = ne.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

fn permutation_p_value(a: &[f64], b: &[f64], observed: u64, resamples: usize, seed: u64) -> f64 {
    let (n1, n2) = (a.len() as u64, b.len() as u64);
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    // A gap can only be read off at the last element of a run of ties.
    let run_end: Vec<bool> = (0..pooled.len())
        .map(|i| i + 1 == pooled.len() || pooled[i].0 != pooled[i + 1].0)
        .collect();
    let mut labels: Vec<bool> = pooled.iter().map(|p| p.1).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = 0usize;
    for _ in 0..resamples {
        labels.shuffle(&mut rng);
        let (mut c1, mut c2, mut best) = (0u64, 0u64, 0u64);
        for (&first, &end) in labels.iter().zip(&run_end) {
            if first {
                c1 += 1;
            } else {
                c2 += 1;
            }
            if end {
                best = best.max((c1 * n2).abs_diff(c2 * n1));
            }
        }
        if best >= observed {
            exceed += 1;
        }
    }
    (1 + exceed) as f64 / (resamples + 1) as f64
}

pub fn ks_two_sample(a: &[f64], b: &[f64], method: KsMethod) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample(if a.is_empty() { "first" } else { "second" }.into()));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let num = scaled_gap_sorted(&sa, &sb);
    let statistic = num as f64 / (a.len() as f64 * b.len() as f64);
    let p_value = match method {
        KsMethod::Asymptotic => asymptotic_p_value(statistic, a.len(), b.len()),
        KsMethod::Permutation { resamples, seed } => {
            if resamples == 0 {
                return Err(Error::InvalidConfig("permutation count must be positive".into()));
            }
            if num == 0 {
                1.0
            } else {
                permutation_p_value(&sa, &sb, num, resamples, seed)
            }
        }
    };
    Ok(KsResult {
        statistic,
        p_value,
        n1: a.len(),
        n2: b.len(),
        method,
    })
}
