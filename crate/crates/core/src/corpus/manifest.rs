use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CampaignManifest, Document, Edge, Role};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    documents: Vec<RawDocument>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    id: String,
    role: Role,
    path: PathBuf,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    adversary: String,
    target: String,
    #[serde(default = "one")]
    count: u32,
}

fn one() -> u32 {
    1
}

/// Reads a manifest JSON file and every document text it references.
/// Document paths are resolved relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<CampaignManifest> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: RawManifest = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut documents = Vec::with_capacity(parsed.documents.len());
    for (i, d) in parsed.documents.into_iter().enumerate() {
        let text_path = base.join(&d.path);
        let text = fs::read_to_string(&text_path).map_err(|source| Error::DocumentText {
            location: format!("documents[{i}] ({})", d.id),
            path: text_path.clone(),
            source,
        })?;
        documents.push(Document {
            id: d.id,
            role: d.role,
            text,
            metadata: d.metadata,
        });
    }
    let edges = parsed
        .edges
        .into_iter()
        .map(|e| Edge {
            adversary: e.adversary,
            target: e.target,
            count: e.count,
        })
        .collect();
    CampaignManifest::new(documents, edges)
}

fn file_stem_for(index: usize, id: &str) -> String {
    let safe: String = id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:04}_{safe}.txt")
}

/// Writes `manifest.json` plus one text file per document under `docs/`.
/// Returns the path of the manifest file.
pub fn save_manifest(manifest: &CampaignManifest, dir: &Path) -> Result<PathBuf> {
    let docs_dir = dir.join("docs");
    fs::create_dir_all(&docs_dir).map_err(|e| Error::io(&docs_dir, e))?;

    let mut documents = Vec::with_capacity(manifest.documents().len());
    for (i, d) in manifest.documents().iter().enumerate() {
        let rel = PathBuf::from("docs").join(file_stem_for(i, &d.id));
        let full = dir.join(&rel);
        fs::write(&full, &d.text).map_err(|e| Error::io(&full, e))?;
        documents.push(RawDocument {
            id: d.id.clone(),
            role: d.role,
            path: rel,
            metadata: d.metadata.clone(),
        });
    }
    let raw = RawManifest {
        documents,
        edges: manifest
            .edges()
            .iter()
            .map(|e| RawEdge {
                adversary: e.adversary.clone(),
                target: e.target.clone(),
                count: e.count,
            })
            .collect(),
    };
    let out = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&raw).expect("manifest serializes");
    fs::write(&out, json + "\n").map_err(|e| Error::io(&out, e))?;
    Ok(out)
}
