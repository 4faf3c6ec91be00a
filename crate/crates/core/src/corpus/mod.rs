//! Documents, the attack-pairing manifest, and the text pipeline that turns
//! document text into stop-word-filtered n-gram streams.

mod manifest;
mod text;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, save_manifest};
pub use text::{extract_ngrams, tokenize, NGramStream, StopWords, MAX_NGRAM_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Adversary,
    Target,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Adversary => "adversary",
            Role::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub role: Role,
    pub text: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, role: Role, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            role,
            text: text.into(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }
}

/// A directed attack edge. `count` is the number of emails sent along it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub adversary: String,
    pub target: String,
    pub count: u32,
}

impl Edge {
    pub fn new(adversary: impl Into<String>, target: impl Into<String>, count: u32) -> Self {
        Edge {
            adversary: adversary.into(),
            target: target.into(),
            count,
        }
    }
}

/// Validated document registry plus attack edges.
///
/// Construction checks that ids are unique and nonempty, that every edge
/// points from an adversary document to a target document, that counts are
/// positive, and that no (adversary, target) pair appears twice.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignManifest {
    documents: Vec<Document>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
}

impl CampaignManifest {
    pub fn new(documents: Vec<Document>, edges: Vec<Edge>) -> Result<Self> {
        let mut index = HashMap::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            let location = format!("documents[{i}]");
            if doc.id.is_empty() {
                return Err(Error::Malformed {
                    location,
                    message: "document id is empty".into(),
                });
            }
            if index.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateDocument {
                    location,
                    id: doc.id.clone(),
                });
            }
        }

        let mut seen = HashMap::with_capacity(edges.len());
        for (j, edge) in edges.iter().enumerate() {
            let location = format!("edges[{j}]");
            for (id, expected) in [(&edge.adversary, Role::Adversary), (&edge.target, Role::Target)] {
                let Some(&i) = index.get(id) else {
                    return Err(Error::UnknownReference {
                        location,
                        id: id.clone(),
                    });
                };
                let actual = documents[i].role;
                if actual != expected {
                    return Err(Error::RoleMismatch {
                        location,
                        id: id.clone(),
                        expected,
                        actual,
                    });
                }
            }
            if edge.count == 0 {
                return Err(Error::ZeroCount { location });
            }
            if seen
                .insert((edge.adversary.as_str(), edge.target.as_str()), j)
                .is_some()
            {
                return Err(Error::DuplicateEdge {
                    location,
                    adversary: edge.adversary.clone(),
                    target: edge.target.clone(),
                });
            }
        }

        Ok(CampaignManifest {
            documents,
            edges,
            index,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn role_of(&self, id: &str) -> Option<Role> {
        self.document(id).map(|d| d.role)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(move |d| d.role == role)
    }

    pub fn total_emails(&self) -> u64 {
        self.edges.iter().map(|e| u64::from(e.count)).sum()
    }

    /// Ids of documents whose text is empty. Such documents load fine but
    /// contribute an all-zero feature vector.
    pub fn empty_documents(&self) -> Vec<&str> {
        self.documents
            .iter()
            .filter(|d| d.text.trim().is_empty())
            .map(|d| d.id.as_str())
            .collect()
    }

    /// Number of unique edges incident to each document, keyed by id.
    pub fn degrees(&self) -> HashMap<&str, usize> {
        let mut out: HashMap<&str, usize> = HashMap::new();
        for e in &self.edges {
            *out.entry(e.adversary.as_str()).or_default() += 1;
            *out.entry(e.target.as_str()).or_default() += 1;
        }
        out
    }

    /// Converts every document into an n-gram stream, in manifest order.
    pub fn ngram_streams(&self, n_max: usize, stop_words: &StopWords) -> Result<Vec<NGramStream>> {
        self.documents
            .iter()
            .map(|d| extract_ngrams(&d.id, &tokenize(&d.text), n_max, stop_words))
            .collect()
    }
}
