//! Latent Semantic Analysis: truncated SVD of the tf-idf matrix, document
//! coordinates on the leading components, and the per-group offset
//! statistics used to look for attacker clusters.

pub mod svd;

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::corpus::{CampaignManifest, Role};
use crate::error::{Error, Result};
use crate::stats;
use crate::vectorizer::TfIdfMatrix;

pub use svd::{truncated_svd_rows, Solver, SvdFactors, SvdOptions};

/// Default truncation rank: 100, capped one below the short side.
pub fn default_rank(n_docs: usize, n_terms: usize) -> usize {
    100.min(n_docs.min(n_terms).saturating_sub(1)).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsaModel {
    pub k: usize,
    pub singular_values: Vec<f64>,
    /// N×k; row i is document i's coordinates, `(UΣ)_i`.
    pub doc_coords: DMatrix<f64>,
    /// N×k left singular vectors.
    pub doc_vectors: DMatrix<f64>,
    /// M×k right singular vectors; column j weights the grams of component j.
    pub term_weights: DMatrix<f64>,
    pub doc_ids: Vec<String>,
    pub grams: Vec<String>,
    pub solver: Solver,
    pub iterations: usize,
}

pub fn truncated_svd(matrix: &TfIdfMatrix, k: usize, options: &SvdOptions) -> Result<LsaModel> {
    let f = truncated_svd_rows(matrix.rows(), matrix.n_terms(), k, options)?;
    let mut doc_coords = f.u.clone();
    for (j, s) in f.singular_values.iter().enumerate() {
        doc_coords.column_mut(j).scale_mut(*s);
    }
    Ok(LsaModel {
        k,
        singular_values: f.singular_values,
        doc_coords,
        doc_vectors: f.u,
        term_weights: f.v,
        doc_ids: matrix.doc_ids().to_vec(),
        grams: matrix.vocabulary().grams().to_vec(),
        solver: f.solver,
        iterations: f.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedTerm {
    pub gram: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentTerms {
    pub component: usize,
    /// Most positive first.
    pub positive: Vec<WeightedTerm>,
    /// Most negative first.
    pub negative: Vec<WeightedTerm>,
}

impl LsaModel {
    fn check(&self, index: usize) -> Result<()> {
        if index >= self.k {
            return Err(Error::ComponentOutOfRange { index, k: self.k });
        }
        Ok(())
    }

    pub fn coord(&self, doc: usize, component: usize) -> f64 {
        self.doc_coords[(doc, component)]
    }

    fn positions(&self) -> HashMap<&str, usize> {
        self.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect()
    }
}

/// The `top_n` highest- and lowest-weighted grams of one component.
pub fn component_terms(model: &LsaModel, component: usize, top_n: usize) -> Result<ComponentTerms> {
    model.check(component)?;
    let col = model.term_weights.column(component);
    let mut order: Vec<usize> = (0..col.len()).collect();
    order.sort_by(|&a, &b| {
        col[b]
            .total_cmp(&col[a])
            .then_with(|| model.grams[a].cmp(&model.grams[b]))
    });
    let term = |i: usize| WeightedTerm {
        gram: model.grams[i].clone(),
        weight: col[i],
    };
    let positive = order.iter().take(top_n).map(|&i| term(i)).collect();
    order.sort_by(|&a, &b| {
        col[a]
            .total_cmp(&col[b])
            .then_with(|| model.grams[a].cmp(&model.grams[b]))
    });
    let negative = order.iter().take(top_n).map(|&i| term(i)).collect();
    Ok(ComponentTerms {
        component,
        positive,
        negative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedDoc {
    pub doc_id: String,
    pub role: Option<Role>,
    pub x: f64,
    pub y: f64,
}

/// 2-D scatter coordinates of every document on components `(j1, j2)`.
pub fn project(model: &LsaModel, manifest: &CampaignManifest, components: (usize, usize)) -> Result<Vec<ProjectedDoc>> {
    model.check(components.0)?;
    model.check(components.1)?;
    Ok(model
        .doc_ids
        .iter()
        .enumerate()
        .map(|(i, id)| ProjectedDoc {
            doc_id: id.clone(),
            role: manifest.role_of(id),
            x: model.coord(i, components.0),
            y: model.coord(i, components.1),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupMode {
    /// One group per heavily attacked target: the adversaries that wrote to it.
    PhishersOfTarget,
    /// One group per prolific adversary: the targets it wrote to.
    TargetsOfPhisher,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupClusterStat {
    /// Id of the node whose neighbours form the group.
    pub group_label: String,
    pub component: usize,
    pub group_size: usize,
    pub group_median: f64,
    /// Absent for single-member groups.
    pub group_sem: Option<f64>,
    pub population_median: f64,
    pub population_sem: f64,
    pub offset_significant: bool,
}

/// Median and standard error of one component's coordinate for the
/// neighbour groups of the `top_g` highest-degree nodes, compared against
/// the whole population of the neighbours' role.
pub fn group_cluster_stats(
    model: &LsaModel,
    manifest: &CampaignManifest,
    component: usize,
    mode: GroupMode,
    top_g: usize,
) -> Result<Vec<GroupClusterStat>> {
    model.check(component)?;
    if top_g == 0 {
        return Err(Error::InvalidConfig("top_g must be at least 1".into()));
    }
    let (hub_role, member_role) = match mode {
        GroupMode::PhishersOfTarget => (Role::Target, Role::Adversary),
        GroupMode::TargetsOfPhisher => (Role::Adversary, Role::Target),
    };
    let pos = model.positions();

    let population: Vec<f64> = manifest
        .with_role(member_role)
        .filter_map(|d| pos.get(d.id.as_str()).map(|&i| model.coord(i, component)))
        .collect();
    if population.is_empty() {
        return Err(Error::EmptyRole(member_role));
    }

    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for e in manifest.edges() {
        let (hub, member) = match mode {
            GroupMode::PhishersOfTarget => (e.target.as_str(), e.adversary.as_str()),
            GroupMode::TargetsOfPhisher => (e.adversary.as_str(), e.target.as_str()),
        };
        if let (Some(_), Some(&m)) = (pos.get(hub), pos.get(member)) {
            groups.entry(hub).or_default().push(m);
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptyRole(hub_role));
    }
    let mut hubs: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
    hubs.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));

    let population_median = stats::median(&population).expect("nonempty population");
    let population_sem = stats::sem(&population).unwrap_or(0.0);
    Ok(hubs
        .into_iter()
        .take(top_g)
        .map(|(hub, members)| {
            let values: Vec<f64> = members.iter().map(|&m| model.coord(m, component)).collect();
            let group_median = stats::median(&values).expect("groups have members");
            let group_sem = stats::sem(&values);
            let margin = group_sem.unwrap_or(0.0) + population_sem;
            GroupClusterStat {
                group_label: hub.to_owned(),
                component,
                group_size: values.len(),
                group_median,
                group_sem,
                population_median,
                population_sem,
                offset_significant: (group_median - population_median).abs() > margin,
            }
        })
        .collect())
}
