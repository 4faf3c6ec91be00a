//! Demographic tabulation and the end-to-end campaign characterization.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{CampaignManifest, Role, StopWords};
use crate::error::{Error, Result};
use crate::lsa::{self, ComponentTerms, GroupClusterStat, GroupMode, ProjectedDoc, Solver, SvdOptions};
use crate::similarity::{
    self, HistogramBin, KsMethod, KsResult, PairSimilarities, SeparationReport, SimilaritySample, Weighting,
};
use crate::vectorizer;

/// Separation values from a published case study, kept as context for the
/// reported separation: a low-reconnaissance campaign and a same-career
/// benchmark comparison.
pub const REFERENCE_CAMPAIGN_SEPARATION: f64 = 6.75;
pub const REFERENCE_BENCHMARK_SEPARATION: f64 = 28.2;

pub const UNKNOWN_VALUE: &str = "unknown";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemographicRow {
    pub value: String,
    pub email_count: u64,
    pub unique_target_count: usize,
    pub percent: f64,
    /// Emails per group member, when group sizes were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_capita: Option<f64>,
}

/// Emails received per value of a target metadata field. Targets without
/// the field fall under `"unknown"`. Rows are ordered by decreasing email
/// count, then by value.
pub fn demographics(
    manifest: &CampaignManifest,
    field: &str,
    group_sizes: Option<&BTreeMap<String, usize>>,
) -> Result<Vec<DemographicRow>> {
    if manifest.edges().is_empty() {
        return Err(Error::NoUsableEdges);
    }
    let mut emails: BTreeMap<&str, u64> = BTreeMap::new();
    let mut targets: BTreeMap<&str, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for e in manifest.edges() {
        let value = manifest
            .document(&e.target)
            .and_then(|d| d.metadata.get(field))
            .map(String::as_str)
            .unwrap_or(UNKNOWN_VALUE);
        *emails.entry(value).or_default() += u64::from(e.count);
        targets.entry(value).or_default().insert(e.target.as_str());
    }
    let total = manifest.total_emails() as f64;
    let mut rows: Vec<DemographicRow> = emails
        .into_iter()
        .map(|(value, count)| DemographicRow {
            value: value.to_owned(),
            email_count: count,
            unique_target_count: targets[value].len(),
            percent: 100.0 * count as f64 / total,
            per_capita: group_sizes
                .and_then(|g| g.get(value))
                .filter(|&&n| n > 0)
                .map(|&n| count as f64 / n as f64),
        })
        .collect();
    rows.sort_by(|a, b| b.email_count.cmp(&a.email_count).then_with(|| a.value.cmp(&b.value)));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerdictThresholds {
    /// p below this reads as targeted.
    pub targeted_below: f64,
    /// p at or above this reads as random spam.
    pub random_at_or_above: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds {
            targeted_below: 0.01,
            random_at_or_above: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Targeted,
    Indeterminate,
    ConsistentWithRandomSpam,
}

pub fn verdict(p_value: f64, thresholds: &VerdictThresholds) -> Verdict {
    if p_value < thresholds.targeted_below {
        Verdict::Targeted
    } else if p_value < thresholds.random_at_or_above {
        Verdict::Indeterminate
    } else {
        Verdict::ConsistentWithRandomSpam
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub ngram_max: usize,
    /// Where the stop list came from, echoed into the report.
    pub stop_words_source: String,
    #[serde(skip)]
    pub stop_words: StopWords,
    pub min_df: usize,
    pub ks_method: KsMethod,
    pub weighting: Weighting,
    pub histogram_bins: usize,
    /// Truncation rank; `None` picks [`lsa::default_rank`].
    pub k: Option<usize>,
    pub svd: SvdOptions,
    /// Components for which top terms and group statistics are reported.
    pub components: Vec<usize>,
    pub projection: (usize, usize),
    pub top_terms: usize,
    pub top_groups: usize,
    pub demographic_fields: Vec<String>,
    pub thresholds: VerdictThresholds,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            ngram_max: 3,
            stop_words_source: "builtin".into(),
            stop_words: StopWords::builtin(),
            min_df: 1,
            ks_method: KsMethod::Asymptotic,
            weighting: Weighting::Unique,
            histogram_bins: 30,
            k: None,
            svd: SvdOptions::default(),
            components: vec![0, 1, 2],
            projection: (0, 1),
            top_terms: 15,
            top_groups: 12,
            demographic_fields: vec!["group".into()],
            thresholds: VerdictThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub documents: usize,
    pub adversaries: usize,
    pub targets: usize,
    pub edges: usize,
    pub emails: u64,
    pub empty_documents: Vec<String>,
    pub vocabulary_size: usize,
    pub stored_entries: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilaritySection {
    pub all_pairs: SimilaritySample,
    pub observed: SimilaritySample,
    pub skipped_edges: usize,
    pub separation: Option<SeparationReport>,
    pub ks: KsResult,
    pub single_attacker_recipients: SimilaritySample,
    pub single_recipient_attackers: SimilaritySample,
    pub histogram_all_pairs: Vec<HistogramBin>,
    pub histogram_observed: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupTable {
    pub component: usize,
    pub mode: GroupMode,
    pub significant: usize,
    pub groups: Vec<GroupClusterStat>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsaSection {
    pub k: usize,
    pub solver: Solver,
    pub iterations: usize,
    pub singular_values: Vec<f64>,
    pub component_terms: Vec<ComponentTerms>,
    pub group_tables: Vec<GroupTable>,
    pub projection: Vec<ProjectedDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemographicTable {
    pub field: String,
    pub rows: Vec<DemographicRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceSeparations {
    pub note: &'static str,
    pub low_reconnaissance_campaign: f64,
    pub same_career_benchmark: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSection {
    pub verdict: Verdict,
    pub p_value: f64,
    pub thresholds: VerdictThresholds,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignReport {
    pub config: ReportConfig,
    pub corpus: CorpusSummary,
    pub similarity: SimilaritySection,
    pub lsa: LsaSection,
    pub demographics: Vec<DemographicTable>,
    pub verdict: VerdictSection,
    pub reference_separations: ReferenceSeparations,
}

impl CampaignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every stage on one manifest. Any stage failure aborts the whole
/// report, tagged with the stage name.
pub fn characterize(manifest: &CampaignManifest, config: &ReportConfig) -> Result<CampaignReport> {
    if manifest.edges().is_empty() {
        return Err(Error::NoUsableEdges.in_stage("similarity"));
    }
    let streams = manifest
        .ngram_streams(config.ngram_max, &config.stop_words)
        .map_err(|e| e.in_stage("corpus"))?;
    let matrix =
        vectorizer::fit_transform_with_min_df(&streams, config.min_df).map_err(|e| e.in_stage("vectorizer"))?;

    let similarity = similarity_section(&matrix, manifest, config).map_err(|e| e.in_stage("similarity"))?;
    let lsa = lsa_section(&matrix, manifest, config).map_err(|e| e.in_stage("lsa"))?;
    let demographics = config
        .demographic_fields
        .iter()
        .map(|f| {
            Ok(DemographicTable {
                field: f.clone(),
                rows: demographics(manifest, f, None)?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("demographics"))?;

    let p_value = similarity.ks.p_value;
    Ok(CampaignReport {
        config: config.clone(),
        corpus: CorpusSummary {
            documents: manifest.documents().len(),
            adversaries: manifest.with_role(Role::Adversary).count(),
            targets: manifest.with_role(Role::Target).count(),
            edges: manifest.edges().len(),
            emails: manifest.total_emails(),
            empty_documents: manifest.empty_documents().into_iter().map(str::to_owned).collect(),
            vocabulary_size: matrix.n_terms(),
            stored_entries: matrix.nnz(),
        },
        similarity,
        lsa,
        demographics,
        verdict: VerdictSection {
            verdict: verdict(p_value, &config.thresholds),
            p_value,
            thresholds: config.thresholds,
        },
        reference_separations: ReferenceSeparations {
            note: "literature reference values for context, not a calibrated scale",
            low_reconnaissance_campaign: REFERENCE_CAMPAIGN_SEPARATION,
            same_career_benchmark: REFERENCE_BENCHMARK_SEPARATION,
        },
    })
}

pub fn similarity_section(
    matrix: &vectorizer::TfIdfMatrix,
    manifest: &CampaignManifest,
    config: &ReportConfig,
) -> Result<SimilaritySection> {
    let pairs = PairSimilarities::compute(matrix, manifest)?;
    let all_pairs = pairs.all_pairs();
    let observed = pairs.observed(config.weighting)?;
    let ks = similarity::ks_two_sample(&observed.values, &all_pairs.values, config.ks_method)?;
    // A single observed edge has no standard error; report the rest anyway.
    let separation = similarity::separation(&observed, &all_pairs).ok();
    let (single_attacker_recipients, single_recipient_attackers) = pairs.singletons();
    Ok(SimilaritySection {
        histogram_all_pairs: similarity::histogram(&all_pairs, config.histogram_bins)?,
        histogram_observed: similarity::histogram(&observed, config.histogram_bins)?,
        skipped_edges: pairs.skipped_edges(),
        all_pairs,
        observed,
        separation,
        ks,
        single_attacker_recipients,
        single_recipient_attackers,
    })
}

pub fn lsa_section(
    matrix: &vectorizer::TfIdfMatrix,
    manifest: &CampaignManifest,
    config: &ReportConfig,
) -> Result<LsaSection> {
    let k = config
        .k
        .unwrap_or_else(|| lsa::default_rank(matrix.n_docs(), matrix.n_terms()));
    let model = lsa::truncated_svd(matrix, k, &config.svd)?;
    let mut component_terms = Vec::new();
    let mut group_tables = Vec::new();
    for &c in config.components.iter().filter(|&&c| c < k) {
        component_terms.push(lsa::component_terms(&model, c, config.top_terms)?);
        for mode in [GroupMode::PhishersOfTarget, GroupMode::TargetsOfPhisher] {
            let groups = lsa::group_cluster_stats(&model, manifest, c, mode, config.top_groups)?;
            group_tables.push(GroupTable {
                component: c,
                mode,
                significant: groups.iter().filter(|g| g.offset_significant).count(),
                groups,
            });
        }
    }
    let projection = lsa::project(&model, manifest, config.projection)?;
    Ok(LsaSection {
        k,
        solver: model.solver,
        iterations: model.iterations,
        singular_values: model.singular_values,
        component_terms,
        group_tables,
        projection,
    })
}
