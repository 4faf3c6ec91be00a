//! Cosine similarity between documents and the comparison of observed
//! attack pairs against every possible adversary/target pairing.

mod ks;

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::{CampaignManifest, Role};
use crate::error::{Error, Result};
use crate::stats;
use crate::vectorizer::{SparseVector, TfIdfMatrix};

pub use ks::{asymptotic_p_value, kolmogorov_q, ks_statistic, ks_two_sample, KsMethod, KsResult, DEFAULT_RESAMPLES};

/// `a·b / (|a||b|)`, or `None` when either vector is all zero.
pub fn cosine_checked(a: &SparseVector, b: &SparseVector) -> Option<f64> {
    cosine_with_norms(a, b, a.norm_sq(), b.norm_sq())
}

/// Cosine similarity; an all-zero operand yields 0.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    cosine_checked(a, b).unwrap_or(0.0)
}

fn cosine_with_norms(a: &SparseVector, b: &SparseVector, na: f64, nb: f64) -> Option<f64> {
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((a.dot(b) / (na * nb).sqrt()).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilaritySample {
    pub label: String,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub n: usize,
    pub median: Option<f64>,
    pub sem: Option<f64>,
    /// Pairs involving an all-zero feature vector, scored as 0.
    pub zero_vector_pairs: usize,
}

impl SimilaritySample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self::with_zero_pairs(label, values, 0)
    }

    fn with_zero_pairs(label: impl Into<String>, values: Vec<f64>, zero_vector_pairs: usize) -> Self {
        SimilaritySample {
            label: label.into(),
            n: values.len(),
            median: stats::median(&values),
            sem: stats::sem(&values),
            values,
            zero_vector_pairs,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted `(x, F(x))` steps of the empirical CDF, one per distinct value.
    pub fn ecdf(&self) -> Vec<(f64, f64)> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, x) in v.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == *x => last.1 = f,
                _ => out.push((*x, f)),
            }
        }
        out
    }
}

/// Whether repeated emails along one edge weight the observed sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Unique,
    ByCount,
}

/// Cosine similarity for every adversary × target pair present in the
/// matrix, stored in (adversary, target) manifest order.
#[derive(Debug, Clone)]
pub struct PairSimilarities {
    adversaries: Vec<String>,
    targets: Vec<String>,
    values: Vec<f64>,
    zero: Vec<bool>,
    adversary_pos: HashMap<String, usize>,
    target_pos: HashMap<String, usize>,
    edges: Vec<(usize, usize, u32)>,
    skipped_edges: usize,
}

impl PairSimilarities {
    pub fn compute(matrix: &TfIdfMatrix, manifest: &CampaignManifest) -> Result<Self> {
        let side = |role: Role| -> Result<Vec<(String, &SparseVector)>> {
            let docs: Vec<_> = manifest
                .with_role(role)
                .filter_map(|d| matrix.row(&d.id).ok().map(|r| (d.id.clone(), r)))
                .collect();
            if docs.is_empty() {
                return Err(Error::EmptyRole(role));
            }
            Ok(docs)
        };
        let adv = side(Role::Adversary)?;
        let tgt = side(Role::Target)?;
        let tgt_norms: Vec<f64> = tgt.iter().map(|(_, r)| r.norm_sq()).collect();

        let mut values = Vec::with_capacity(adv.len() * tgt.len());
        let mut zero = Vec::with_capacity(adv.len() * tgt.len());
        for (_, a) in &adv {
            let na = a.norm_sq();
            for ((_, t), &nt) in tgt.iter().zip(&tgt_norms) {
                let c = cosine_with_norms(a, t, na, nt);
                zero.push(c.is_none());
                values.push(c.unwrap_or(0.0));
            }
        }

        let adversaries: Vec<String> = adv.into_iter().map(|(id, _)| id).collect();
        let targets: Vec<String> = tgt.into_iter().map(|(id, _)| id).collect();
        let adversary_pos: HashMap<String, usize> =
            adversaries.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let target_pos: HashMap<String, usize> = targets.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();

        let mut edges = Vec::new();
        let mut skipped_edges = 0;
        for e in manifest.edges() {
            match (adversary_pos.get(&e.adversary), target_pos.get(&e.target)) {
                (Some(&a), Some(&t)) => edges.push((a, t, e.count)),
                _ => skipped_edges += 1,
            }
        }

        Ok(PairSimilarities {
            adversaries,
            targets,
            values,
            zero,
            adversary_pos,
            target_pos,
            edges,
            skipped_edges,
        })
    }

    fn at(&self, a: usize, t: usize) -> f64 {
        self.values[a * self.targets.len() + t]
    }

    pub fn get(&self, adversary: &str, target: &str) -> Option<f64> {
        Some(self.at(*self.adversary_pos.get(adversary)?, *self.target_pos.get(target)?))
    }

    pub fn n_adversaries(&self) -> usize {
        self.adversaries.len()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    /// Edges dropped because an endpoint has no row in the matrix.
    pub fn skipped_edges(&self) -> usize {
        self.skipped_edges
    }

    pub fn all_pairs(&self) -> SimilaritySample {
        let zeros = self.zero.iter().filter(|z| **z).count();
        SimilaritySample::with_zero_pairs("all-pairs", self.values.clone(), zeros)
    }

    pub fn observed(&self, weighting: Weighting) -> Result<SimilaritySample> {
        if self.edges.is_empty() {
            return Err(Error::NoUsableEdges);
        }
        let mut values = Vec::with_capacity(self.edges.len());
        let mut zeros = 0;
        for &(a, t, count) in &self.edges {
            let reps = match weighting {
                Weighting::Unique => 1,
                Weighting::ByCount => count as usize,
            };
            let v = self.at(a, t);
            zeros += usize::from(self.zero[a * self.targets.len() + t]) * reps;
            values.extend(std::iter::repeat_n(v, reps));
        }
        Ok(SimilaritySample::with_zero_pairs("observed", values, zeros))
    }

    /// Observed-edge similarities restricted to recipients with exactly one
    /// attacker, and to attackers with exactly one recipient. Degrees count
    /// unique usable edges.
    pub fn singletons(&self) -> (SimilaritySample, SimilaritySample) {
        let mut in_deg = vec![0usize; self.targets.len()];
        let mut out_deg = vec![0usize; self.adversaries.len()];
        for &(a, t, _) in &self.edges {
            out_deg[a] += 1;
            in_deg[t] += 1;
        }
        let pick = |keep: &dyn Fn(usize, usize) -> bool| -> Vec<f64> {
            self.edges
                .iter()
                .filter(|&&(a, t, _)| keep(a, t))
                .map(|&(a, t, _)| self.at(a, t))
                .collect()
        };
        (
            SimilaritySample::new("single-attacker recipients", pick(&|_, t| in_deg[t] == 1)),
            SimilaritySample::new("single-recipient attackers", pick(&|a, _| out_deg[a] == 1)),
        )
    }
}

pub fn all_pairs(matrix: &TfIdfMatrix, manifest: &CampaignManifest) -> Result<SimilaritySample> {
    Ok(PairSimilarities::compute(matrix, manifest)?.all_pairs())
}

pub fn observed_pairs(matrix: &TfIdfMatrix, manifest: &CampaignManifest) -> Result<SimilaritySample> {
    PairSimilarities::compute(matrix, manifest)?.observed(Weighting::Unique)
}

pub fn singleton_stats(
    matrix: &TfIdfMatrix,
    manifest: &CampaignManifest,
) -> Result<(SimilaritySample, SimilaritySample)> {
    Ok(PairSimilarities::compute(matrix, manifest)?.singletons())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub median_obs: f64,
    pub median_all: f64,
    pub sem_obs: f64,
    pub sem_all: f64,
    /// `(median_obs - median_all) / (sem_obs + sem_all)`.
    pub separation: f64,
}

impl SeparationReport {
    pub fn from_summary(median_obs: f64, sem_obs: f64, median_all: f64, sem_all: f64) -> Self {
        let diff = median_obs - median_all;
        let spread = sem_obs + sem_all;
        let separation = if spread > 0.0 {
            diff / spread
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        SeparationReport {
            median_obs,
            median_all,
            sem_obs,
            sem_all,
            separation,
        }
    }
}

/// How far the observed median sits above the all-pairs median, in units of
/// the summed standard errors.
pub fn separation(obs: &SimilaritySample, all: &SimilaritySample) -> Result<SeparationReport> {
    let summary = |s: &SimilaritySample| match (s.median, s.sem) {
        (Some(m), Some(e)) => Ok((m, e)),
        _ => Err(Error::DegenerateSample {
            label: s.label.clone(),
            n: s.n,
            required: 2,
        }),
    };
    let (mo, so) = summary(obs)?;
    let (ma, sa) = summary(all)?;
    Ok(SeparationReport::from_summary(mo, so, ma, sa))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width bins spanning `[min, max]`; the last bin is closed. A
/// constant sample collapses to one bin.
pub fn histogram(sample: &SimilaritySample, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".into()));
    }
    if sample.is_empty() {
        return Err(Error::EmptySample(sample.label.clone()));
    }
    let lo = sample.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sample.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(vec![HistogramBin {
            low: lo,
            high: hi,
            count: sample.n,
        }]);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &sample.values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok((0..bins)
        .map(|b| HistogramBin {
            low: lo + b as f64 * width,
            high: if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width },
            count: counts[b],
        })
        .collect())
}
