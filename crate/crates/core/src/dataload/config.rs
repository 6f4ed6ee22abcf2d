use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use crate::vocab::{obo, rdfs};

/// Load instructions for one ontology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyConfig {
    pub id: String,
    pub title: String,
    /// File path (absolute after loading) or URL.
    pub source: String,
    pub base_iris: Vec<String>,
    pub preferred_prefix: String,
    pub label_properties: Vec<String>,
    pub synonym_properties: Vec<String>,
    pub definition_properties: Vec<String>,
    pub hierarchical_properties: Vec<String>,
    pub default_language: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    id: Option<String>,
    title: Option<String>,
    source: Option<String>,
    base_iris: Option<Vec<String>>,
    preferred_prefix: Option<String>,
    label_properties: Option<Vec<String>>,
    synonym_properties: Option<Vec<String>>,
    definition_properties: Option<Vec<String>>,
    hierarchical_properties: Option<Vec<String>>,
    default_language: Option<String>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("ontology '{id}': {message}")]
    Invalid { id: String, message: String },
    #[error("duplicate ontology id '{0}'")]
    DuplicateId(String),
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn is_url(source: &str) -> bool {
    source.contains("://") || source.starts_with("file:")
}

/// Parses a config document. Relative file sources resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<Vec<OntologyConfig>, ConfigError> {
    let doc: Json = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    let entries = doc
        .get("ontologies")
        .and_then(Json::as_array)
        .ok_or_else(|| ConfigError::Malformed("missing \"ontologies\" array".into()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for (n, entry) in entries.iter().enumerate() {
        let label = entry
            .get("id")
            .and_then(Json::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("#{n}"));
        let raw: RawConfig = serde_json::from_value(entry.clone()).map_err(|e| ConfigError::Invalid {
            id: label.clone(),
            message: e.to_string(),
        })?;
        let invalid = |message: &str| ConfigError::Invalid {
            id: label.clone(),
            message: message.to_string(),
        };
        let id = raw.id.ok_or_else(|| invalid("missing id"))?;
        if !valid_id(&id) {
            return Err(invalid("id must match [a-z0-9_]+"));
        }
        if !seen.insert(id.clone()) {
            return Err(ConfigError::DuplicateId(id));
        }
        let source = raw.source.filter(|s| !s.trim().is_empty()).ok_or_else(|| invalid("missing source"))?;
        let source = match base_dir {
            Some(dir) if !is_url(&source) && Path::new(&source).is_relative() => {
                dir.join(&source).to_string_lossy().into_owned()
            }
            _ => source,
        };
        let base_iris = raw.base_iris.unwrap_or_default();
        if base_iris.is_empty() || base_iris.iter().any(|b| b.is_empty()) {
            return Err(invalid("base_iris must be a non-empty list of IRI prefixes"));
        }
        let default_language = raw
            .default_language
            .map(|l| l.to_ascii_lowercase())
            .unwrap_or_else(|| "en".to_string());
        if default_language.is_empty() {
            return Err(invalid("default_language must not be empty"));
        }
        out.push(OntologyConfig {
            title: raw.title.unwrap_or_else(|| id.clone()),
            preferred_prefix: raw.preferred_prefix.unwrap_or_else(|| id.to_ascii_uppercase()),
            source,
            base_iris,
            label_properties: raw.label_properties.unwrap_or_else(|| vec![rdfs::LABEL.to_string()]),
            synonym_properties: raw
                .synonym_properties
                .unwrap_or_else(|| vec![obo::HAS_EXACT_SYNONYM.to_string()]),
            definition_properties: raw
                .definition_properties
                .unwrap_or_else(|| vec![obo::DEFINITION.to_string(), rdfs::COMMENT.to_string()]),
            hierarchical_properties: raw
                .hierarchical_properties
                .unwrap_or_else(|| vec![obo::PART_OF.to_string()]),
            default_language,
            id,
        });
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<OntologyConfig>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let dir: Option<PathBuf> = path.parent().map(|p| {
        if p.as_os_str().is_empty() {
            PathBuf::from(".")
        } else {
            p.to_path_buf()
        }
    });
    let dir = dir.map(|d| std::fs::canonicalize(&d).unwrap_or(d));
    parse_config(&text, dir.as_deref())
}

/// The config whose base IRIs contain the longest prefix of `iri`; ties go to
/// the lexicographically smallest id.
pub fn assign_defining_ontology(iri: &str, configs: &[OntologyConfig]) -> Option<String> {
    configs
        .iter()
        .flat_map(|c| c.base_iris.iter().map(move |b| (b, c)))
        .filter(|(b, _)| iri.starts_with(b.as_str()))
        .max_by(|(b1, c1), (b2, c2)| b1.len().cmp(&b2.len()).then_with(|| c2.id.cmp(&c1.id)))
        .map(|(_, c)| c.id.clone())
}
