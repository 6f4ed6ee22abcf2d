//! Registry-driven CURIE compression, expansion and outbound links.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub prefix: String,
    pub uri_pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolver_template: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed registry: {0}")]
    Malformed(String),
    #[error("duplicate registry prefix '{0}'")]
    DuplicatePrefix(String),
    #[error("uri_pattern of '{prefix}' must contain exactly one $1")]
    MissingPlaceholder { prefix: String },
    #[error("uri_pattern of '{prefix}' has an empty stem")]
    EmptyStem { prefix: String },
    #[error("prefixes '{first}' and '{second}' share the uri stem {stem}")]
    AmbiguousStem { first: String, second: String, stem: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Curie {
    /// Canonical lowercase prefix.
    pub prefix: String,
    pub local_id: String,
}

impl Curie {
    pub fn new(prefix: &str, local_id: &str) -> Self {
        Curie {
            prefix: prefix.to_ascii_lowercase(),
            local_id: local_id.to_string(),
        }
    }

    /// Splits `PREFIX:local`. Rejects URLs and empty parts.
    pub fn parse(s: &str) -> Option<Curie> {
        let (prefix, local) = s.trim().split_once(':')?;
        if prefix.is_empty()
            || local.is_empty()
            || local.starts_with("//")
            || !prefix.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
            || local.chars().any(char::is_whitespace)
        {
            return None;
        }
        Some(Curie::new(prefix, local))
    }
}

impl fmt::Display for Curie {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix.to_ascii_uppercase(), self.local_id)
    }
}

#[derive(Debug, Clone)]
struct Stem {
    stem: String,
    suffix: String,
    entry: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: Vec<RegistryEntry>,
    by_prefix: HashMap<String, usize>,
    /// Longest stem first.
    stems: Vec<Stem>,
}

/// An xref with its parsed CURIE and resolver link, when available.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XrefLink {
    pub raw: String,
    pub curie: Option<String>,
    pub url: Option<String>,
}

impl Registry {
    pub fn new(entries: Vec<RegistryEntry>) -> Result<Self, RegistryError> {
        let mut entries = entries;
        for e in &mut entries {
            e.prefix = e.prefix.to_ascii_lowercase();
        }
        let mut by_prefix = HashMap::new();
        let mut stems = Vec::new();
        let mut stem_owner: HashMap<(String, String), usize> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            for p in std::iter::once(&e.prefix).chain(&e.synonyms) {
                if by_prefix.insert(p.to_ascii_lowercase(), i).is_some() {
                    return Err(RegistryError::DuplicatePrefix(p.to_ascii_lowercase()));
                }
            }
            if e.uri_pattern.matches("$1").count() != 1 {
                return Err(RegistryError::MissingPlaceholder {
                    prefix: e.prefix.clone(),
                });
            }
            let (stem, suffix) = e.uri_pattern.split_once("$1").expect("checked above");
            if stem.is_empty() {
                return Err(RegistryError::EmptyStem {
                    prefix: e.prefix.clone(),
                });
            }
            if let Some(&other) = stem_owner.get(&(stem.to_string(), suffix.to_string())) {
                return Err(RegistryError::AmbiguousStem {
                    first: entries[other].prefix.clone(),
                    second: e.prefix.clone(),
                    stem: stem.to_string(),
                });
            }
            stem_owner.insert((stem.to_string(), suffix.to_string()), i);
            stems.push(Stem {
                stem: stem.to_string(),
                suffix: suffix.to_string(),
                entry: i,
            });
        }
        stems.sort_by(|a, b| {
            (b.stem.len() + b.suffix.len())
                .cmp(&(a.stem.len() + a.suffix.len()))
                .then_with(|| a.stem.cmp(&b.stem))
                .then_with(|| a.suffix.cmp(&b.suffix))
        });
        Ok(Registry {
            entries,
            by_prefix,
            stems,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let entries: Vec<RegistryEntry> =
            serde_json::from_str(text).map_err(|e| RegistryError::Malformed(e.to_string()))?;
        Registry::new(entries)
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("registry entries serialize")
    }

    pub fn entry(&self, prefix: &str) -> Option<&RegistryEntry> {
        self.by_prefix.get(&prefix.to_ascii_lowercase()).map(|&i| &self.entries[i])
    }

    /// Longest matching stem wins; the remainder becomes the local id.
    pub fn compress(&self, iri: &str) -> Option<Curie> {
        for s in &self.stems {
            if let Some(rest) = iri.strip_prefix(s.stem.as_str()) {
                if let Some(local) = rest.strip_suffix(s.suffix.as_str()) {
                    if !local.is_empty() {
                        return Some(Curie::new(&self.entries[s.entry].prefix, local));
                    }
                }
            }
        }
        None
    }

    pub fn expand(&self, curie: &Curie) -> Option<String> {
        let entry = self.entry(&curie.prefix)?;
        Some(entry.uri_pattern.replacen("$1", &curie.local_id, 1))
    }

    /// Expands `PREFIX:local`, returning None for anything unparseable or unknown.
    pub fn expand_str(&self, curie: &str) -> Option<String> {
        self.expand(&Curie::parse(curie)?)
    }

    /// CURIE with the canonical (primary) prefix of its registry entry.
    pub fn normalize(&self, curie: &Curie) -> Option<Curie> {
        let entry = self.entry(&curie.prefix)?;
        Some(Curie::new(&entry.prefix, &curie.local_id))
    }

    pub fn external_link(&self, curie: &Curie) -> Option<String> {
        let template = self.entry(&curie.prefix)?.resolver_template.as_ref()?;
        Some(template.replacen("$1", &curie.local_id, 1))
    }

    pub fn link_xrefs<'a>(&self, xrefs: impl IntoIterator<Item = &'a str>) -> Vec<XrefLink> {
        xrefs
            .into_iter()
            .map(|raw| {
                let curie = Curie::parse(raw).and_then(|c| self.normalize(&c));
                XrefLink {
                    raw: raw.to_string(),
                    url: curie.as_ref().and_then(|c| self.external_link(c)),
                    curie: curie.map(|c| c.to_string()),
                }
            })
            .collect()
    }

    /// CURIE display form for `iri`, or the IRI itself.
    pub fn curie_or_iri(&self, iri: &str) -> String {
        self.compress(iri).map(|c| c.to_string()).unwrap_or_else(|| iri.to_string())
    }
}

pub fn load_registry(path: &Path) -> Result<Registry, RegistryError> {
    let text = std::fs::read_to_string(path).map_err(|source| RegistryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Registry::from_json(&text)
}

/// Converts a registry export into entries.
///
/// Accepts either an array of entries (passed through) or the public
/// registry's object export keyed by prefix, reading `uri_format` as the
/// resolver, and `rdf_uri_format` or the OBO PURL pattern (for OBO Foundry
/// prefixes) as the IRI pattern. Entries whose prefix, synonym or stem
/// collides with an earlier one (in prefix order) are dropped.
pub fn convert_registry_export(json: &Json) -> Result<Vec<RegistryEntry>, RegistryError> {
    let candidates: Vec<RegistryEntry> = match json {
        Json::Array(_) => serde_json::from_value(json.clone()).map_err(|e| RegistryError::Malformed(e.to_string()))?,
        Json::Object(map) => {
            let sorted: BTreeMap<&String, &Json> = map.iter().collect();
            let mut out = Vec::new();
            for (key, record) in sorted {
                if record.get("deprecated").and_then(Json::as_bool) == Some(true) {
                    continue;
                }
                let text = |k: &str| record.get(k).and_then(Json::as_str).map(str::to_string);
                let obo_prefix = record
                    .get("obofoundry")
                    .and_then(|o| o.get("preferredPrefix").or_else(|| o.get("prefix")))
                    .and_then(Json::as_str)
                    .map(str::to_string);
                let uri_format = text("uri_format");
                let pattern = text("rdf_uri_format")
                    .or_else(|| {
                        obo_prefix
                            .as_ref()
                            .map(|p| format!("http://purl.obolibrary.org/obo/{}_$1", p.to_ascii_uppercase()))
                    })
                    .or_else(|| uri_format.clone());
                let Some(uri_pattern) = pattern else { continue };
                let synonyms = record
                    .get("synonyms")
                    .and_then(Json::as_array)
                    .map(|a| a.iter().filter_map(Json::as_str).map(str::to_ascii_lowercase).collect())
                    .unwrap_or_default();
                out.push(RegistryEntry {
                    prefix: key.to_ascii_lowercase(),
                    uri_pattern,
                    resolver_template: uri_format,
                    synonyms,
                });
            }
            out
        }
        _ => return Err(RegistryError::Malformed("expected an array or an object".into())),
    };
    let mut kept: Vec<RegistryEntry> = Vec::new();
    for mut entry in candidates {
        if entry.uri_pattern.matches("$1").count() != 1 || entry.uri_pattern.starts_with("$1") {
            continue;
        }
        entry.prefix = entry.prefix.to_ascii_lowercase();
        let taken: Vec<String> = kept
            .iter()
            .flat_map(|e| std::iter::once(e.prefix.clone()).chain(e.synonyms.iter().cloned()))
            .collect();
        if taken.contains(&entry.prefix) {
            continue;
        }
        entry.synonyms.retain(|s| *s != entry.prefix && !taken.contains(s));
        entry.synonyms.sort();
        entry.synonyms.dedup();
        if kept.iter().any(|e| e.uri_pattern == entry.uri_pattern) {
            continue;
        }
        kept.push(entry);
    }
    Ok(kept)
}
