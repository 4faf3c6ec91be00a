//! Seeded synthetic campaigns with a controllable targeting strength.
//!
//! Every document has a dominant topic. Each token is drawn from that
//! topic's vocabulary with probability 0.8 and from a shared vocabulary
//! otherwise, with Zipf(1.1) ranks inside either vocabulary. An email picks
//! a same-topic recipient with probability θ and a uniformly random one
//! otherwise.

use std::collections::HashMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::{CampaignManifest, Document, Edge, Role};
use crate::error::{Error, Result};

pub const TOPIC_SHARE: f64 = 0.8;
pub const ZIPF_EXPONENT: f64 = 1.1;
pub const CATEGORIES: [&str; 3] = ["postdoc", "manager", "software_engineer"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_topics: usize,
    pub vocab_per_topic: usize,
    pub shared_vocab: usize,
    pub n_adversaries: usize,
    pub n_targets: usize,
    /// Tokens per document.
    pub doc_length: usize,
    pub targeting_strength: f64,
    pub emails_per_adversary: usize,
    /// When set, this many emails are spread as evenly as possible across
    /// adversaries instead of `emails_per_adversary` each.
    #[serde(default)]
    pub total_emails: Option<usize>,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// A campaign of the size studied in practice: 58 adversaries, 100
    /// targets, 252 unique attack pairs.
    fn default() -> Self {
        SynthConfig {
            n_topics: 5,
            vocab_per_topic: 400,
            shared_vocab: 300,
            n_adversaries: 58,
            n_targets: 100,
            doc_length: 120,
            targeting_strength: 0.5,
            emails_per_adversary: 4,
            total_emails: Some(252),
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.targeting_strength) {
            return Err(Error::InvalidConfig(format!(
                "targeting strength {} outside [0, 1]",
                self.targeting_strength
            )));
        }
        let counts = [
            ("n_topics", self.n_topics),
            ("vocab_per_topic", self.vocab_per_topic),
            ("shared_vocab", self.shared_vocab),
            ("n_adversaries", self.n_adversaries),
            ("n_targets", self.n_targets),
            ("doc_length", self.doc_length),
            ("emails_per_adversary", self.emails_per_adversary),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn emails_for(&self, adversary: usize) -> usize {
        match self.total_emails {
            Some(total) => total / self.n_adversaries + usize::from(adversary < total % self.n_adversaries),
            None => self.emails_per_adversary,
        }
    }
}

/// Topic of the i-th document of a role; topics are assigned round-robin.
pub fn topic_of(index: usize, n_topics: usize) -> usize {
    index % n_topics
}

pub fn adversary_id(i: usize) -> String {
    format!("adv-{i:03}")
}

pub fn target_id(i: usize) -> String {
    format!("tgt-{i:03}")
}

struct TextSampler {
    topic_rank: Zipf<f64>,
    shared_rank: Zipf<f64>,
    doc_length: usize,
}

impl TextSampler {
    fn new(cfg: &SynthConfig) -> Result<Self> {
        let zipf =
            |n: usize| Zipf::new(n as f64, ZIPF_EXPONENT).map_err(|e| Error::InvalidConfig(format!("zipf: {e}")));
        Ok(TextSampler {
            topic_rank: zipf(cfg.vocab_per_topic)?,
            shared_rank: zipf(cfg.shared_vocab)?,
            doc_length: cfg.doc_length,
        })
    }

    fn document(&self, topic: usize, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::with_capacity(self.doc_length * 8);
        for i in 0..self.doc_length {
            if i > 0 {
                out.push(if i % 12 == 0 { '\n' } else { ' ' });
            }
            if rng.random_bool(TOPIC_SHARE) {
                let r = self.topic_rank.sample(rng) as usize;
                out.push_str(&format!("topic{topic}w{r}"));
            } else {
                let r = self.shared_rank.sample(rng) as usize;
                out.push_str(&format!("common{r}"));
            }
        }
        out
    }
}

fn documents(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Document>> {
    let sampler = TextSampler::new(cfg)?;
    let mut docs = Vec::with_capacity(cfg.n_adversaries + cfg.n_targets);
    for i in 0..cfg.n_adversaries {
        let t = topic_of(i, cfg.n_topics);
        docs.push(
            Document::new(adversary_id(i), Role::Adversary, sampler.document(t, rng)).with_meta("topic", t.to_string()),
        );
    }
    for i in 0..cfg.n_targets {
        let t = topic_of(i, cfg.n_topics);
        docs.push(
            Document::new(target_id(i), Role::Target, sampler.document(t, rng))
                .with_meta("topic", t.to_string())
                .with_meta("group", format!("G{t}")),
        );
    }
    Ok(docs)
}

/// Unique (adversary, target) pairs with multiplicity, in first-seen order.
#[derive(Default)]
struct EdgeSet {
    order: Vec<(usize, usize)>,
    counts: HashMap<(usize, usize), u32>,
}

impl EdgeSet {
    fn add(&mut self, a: usize, t: usize) {
        let c = self.counts.entry((a, t)).or_insert(0);
        if *c == 0 {
            self.order.push((a, t));
        }
        *c += 1;
    }

    fn contains(&self, a: usize, t: usize) -> bool {
        self.counts.contains_key(&(a, t))
    }

    fn into_edges(self) -> Vec<Edge> {
        self.order
            .iter()
            .map(|&(a, t)| Edge::new(adversary_id(a), target_id(t), self.counts[&(a, t)]))
            .collect()
    }
}

fn topical_edges(cfg: &SynthConfig, rng: &mut ChaCha8Rng, edges: &mut EdgeSet) -> Result<()> {
    let by_topic: Vec<Vec<usize>> = (0..cfg.n_topics)
        .map(|t| (0..cfg.n_targets).filter(|&j| topic_of(j, cfg.n_topics) == t).collect())
        .collect();
    let everyone: Vec<usize> = (0..cfg.n_targets).collect();

    for a in 0..cfg.n_adversaries {
        let emails = cfg.emails_for(a);
        let own = &by_topic[topic_of(a, cfg.n_topics)];
        if emails > cfg.n_targets {
            return Err(Error::InvalidConfig(format!(
                "adversary {a} needs {emails} distinct recipients but only {} targets exist",
                cfg.n_targets
            )));
        }
        if cfg.targeting_strength > 0.0 && emails > own.len() {
            return Err(Error::InvalidConfig(format!(
                "adversary {a} needs up to {emails} same-topic recipients but its topic has {}",
                own.len()
            )));
        }
        let mut sent = 0;
        while sent < emails {
            let pool = if rng.random_bool(cfg.targeting_strength) {
                own
            } else {
                &everyone
            };
            let fresh: Vec<usize> = pool.iter().copied().filter(|&t| !edges.contains(a, t)).collect();
            // A uniform draw can land on an exhausted topic; redraw the pool.
            if let Some(&t) = fresh.choose(rng) {
                edges.add(a, t);
                sent += 1;
            }
        }
    }
    Ok(())
}

/// A campaign whose attack edges follow `config.targeting_strength`.
pub fn generate(config: &SynthConfig) -> Result<CampaignManifest> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let docs = documents(config, &mut rng)?;
    let mut edges = EdgeSet::default();
    topical_edges(config, &mut rng, &mut edges)?;
    CampaignManifest::new(docs, edges.into_edges())
}

/// Attack structure layered on top of a [`generate`] campaign: tight
/// same-topic attacker groups aimed at individual recipients, plus a few
/// high-volume adversaries mailing at random.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationPlan {
    /// Topic that the attacker groups and their recipients share.
    pub focal_topic: usize,
    /// Number of recipients each attacked by a dedicated group.
    pub focal_targets: usize,
    /// Adversaries in each recipient's group.
    pub attackers_per_focal: usize,
    /// Adversaries outside the focal topic that mail at random.
    pub spammers: usize,
    pub emails_per_spammer: usize,
}

impl Default for CoordinationPlan {
    fn default() -> Self {
        CoordinationPlan {
            focal_topic: 0,
            focal_targets: 12,
            attackers_per_focal: 9,
            spammers: 12,
            emails_per_spammer: 15,
        }
    }
}

pub fn generate_coordinated(config: &SynthConfig, plan: &CoordinationPlan) -> Result<CampaignManifest> {
    config.validate()?;
    if plan.focal_topic >= config.n_topics {
        return Err(Error::InvalidConfig(format!(
            "focal topic {} does not exist",
            plan.focal_topic
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let docs = documents(config, &mut rng)?;
    let mut edges = EdgeSet::default();
    topical_edges(config, &mut rng, &mut edges)?;

    let focal_attackers: Vec<usize> = (0..config.n_adversaries)
        .filter(|&a| topic_of(a, config.n_topics) == plan.focal_topic)
        .collect();
    let focal_targets: Vec<usize> = (0..config.n_targets)
        .filter(|&t| topic_of(t, config.n_topics) == plan.focal_topic)
        .take(plan.focal_targets)
        .collect();
    if focal_targets.len() < plan.focal_targets || focal_attackers.len() < plan.attackers_per_focal {
        return Err(Error::InvalidConfig(format!(
            "focal topic has {} targets and {} adversaries; plan needs {} and {}",
            focal_targets.len(),
            focal_attackers.len(),
            plan.focal_targets,
            plan.attackers_per_focal
        )));
    }
    for &t in &focal_targets {
        for &a in focal_attackers.choose_multiple(&mut rng, plan.attackers_per_focal) {
            edges.add(a, t);
        }
    }

    let others: Vec<usize> = (0..config.n_adversaries)
        .rev()
        .filter(|&a| topic_of(a, config.n_topics) != plan.focal_topic)
        .take(plan.spammers)
        .collect();
    if others.len() < plan.spammers || plan.emails_per_spammer > config.n_targets {
        return Err(Error::InvalidConfig(
            "not enough adversaries or targets for the spammers".into(),
        ));
    }
    let everyone: Vec<usize> = (0..config.n_targets).collect();
    for &a in &others {
        for &t in everyone.choose_multiple(&mut rng, plan.emails_per_spammer) {
            edges.add(a, t);
        }
    }
    CampaignManifest::new(docs, edges.into_edges())
}

/// An edge-free corpus of `docs_per_category` documents in each of three
/// career categories, labelled through the `category` and `topic`
/// metadata keys.
pub fn benchmark_corpus(config: &SynthConfig, docs_per_category: usize) -> Result<CampaignManifest> {
    config.validate()?;
    if config.n_topics != CATEGORIES.len() {
        return Err(Error::InvalidConfig(format!(
            "benchmark corpus needs 3 topics, got {}",
            config.n_topics
        )));
    }
    if docs_per_category == 0 {
        return Err(Error::InvalidConfig("docs_per_category must be at least 1".into()));
    }
    let sampler = TextSampler::new(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut docs = Vec::with_capacity(3 * docs_per_category);
    for i in 0..3 * docs_per_category {
        let t = topic_of(i, 3);
        docs.push(
            Document::new(format!("cv-{i:03}"), Role::Target, sampler.document(t, &mut rng))
                .with_meta("topic", t.to_string())
                .with_meta("category", CATEGORIES[t]),
        );
    }
    CampaignManifest::new(docs, vec![])
}
