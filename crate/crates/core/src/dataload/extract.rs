use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OntologyConfig;
use crate::linker::Registry;
use crate::lossless::{LosslessMap, LosslessValue};
use crate::owl::is_logical_predicate;
use crate::vocab::{owl, rdf, rdfs, xsd};

/// Language tag to values.
pub type LangMap = BTreeMap<String, Vec<String>>;

/// Queryable fields, derived from an entity's lossless value alone.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryableFields {
    pub labels: LangMap,
    pub synonyms: LangMap,
    pub definitions: LangMap,
    pub is_obsolete: bool,
    pub direct_parents: Vec<String>,
    pub short_form: String,
    /// Stringified values of every annotation property, keyed by CURIE or IRI.
    pub annotation_fields: BTreeMap<String, Vec<String>>,
}

impl QueryableFields {
    pub fn languages(&self) -> impl Iterator<Item = &String> {
        self.labels.keys().chain(self.synonyms.keys()).chain(self.definitions.keys())
    }

    /// Lexicographically first label in the chosen language.
    pub fn label(&self, requested: Option<&str>, default_language: &str) -> Option<&str> {
        let lang = choose_language(&self.labels, requested, default_language)?;
        self.labels[lang].iter().min().map(String::as_str)
    }
}

/// Language fallback: requested, then the default, then the first tag.
pub fn choose_language<'m>(map: &'m LangMap, requested: Option<&str>, default_language: &str) -> Option<&'m str> {
    requested
        .and_then(|r| map.get_key_value(r))
        .or_else(|| map.get_key_value(default_language))
        .or_else(|| map.iter().next())
        .map(|(k, _)| k.as_str())
}

/// Text after the last '#' or '/'.
pub fn short_form(iri: &str) -> String {
    match iri.rfind(['#', '/']) {
        Some(i) if i + 1 < iri.len() => iri[i + 1..].to_string(),
        _ => iri.to_string(),
    }
}

fn bucket(root: &LosslessMap, properties: &[String], default_language: &str) -> LangMap {
    let mut out = LangMap::new();
    for p in properties {
        for v in root.get(p).into_iter().flatten() {
            let (text, lang) = match v.bare() {
                LosslessValue::String(s) => (s, default_language),
                LosslessValue::Lang { value, lang } => (value, lang.as_str()),
                LosslessValue::Typed { value, .. } => (value, default_language),
                _ => continue,
            };
            let values = out.entry(lang.to_string()).or_default();
            if !values.contains(text) {
                values.push(text.clone());
            }
        }
    }
    out
}

fn is_true(v: &LosslessValue) -> bool {
    match v.bare() {
        LosslessValue::String(s) => s.trim() == "true",
        LosslessValue::Typed { value, datatype } if datatype == xsd::BOOLEAN => {
            matches!(value.trim(), "true" | "1")
        }
        _ => false,
    }
}

/// Display string of a value for the dynamic fields.
pub fn stringify(v: &LosslessValue) -> String {
    match v.bare() {
        LosslessValue::String(s) => s.clone(),
        LosslessValue::Lang { value, .. } | LosslessValue::Typed { value, .. } => value.clone(),
        LosslessValue::Iri(i) => i.clone(),
        other => other.canonical_string(),
    }
}

pub fn extract(iri: &str, lossless: &LosslessValue, config: &OntologyConfig, registry: &Registry) -> QueryableFields {
    let empty = LosslessMap::new();
    let root = lossless.as_map().unwrap_or(&empty);
    let lang = config.default_language.as_str();
    let mut direct_parents: Vec<String> = root
        .get(rdfs::SUB_CLASS_OF)
        .into_iter()
        .flatten()
        .filter_map(LosslessValue::as_iri)
        .filter(|p| *p != owl::THING)
        .map(str::to_string)
        .collect();
    direct_parents.sort();
    direct_parents.dedup();
    let mut annotation_fields = BTreeMap::new();
    for (predicate, values) in root {
        if predicate.starts_with('@') || predicate == rdf::TYPE || is_logical_predicate(predicate) {
            continue;
        }
        annotation_fields.insert(registry.curie_or_iri(predicate), values.iter().map(stringify).collect());
    }
    QueryableFields {
        labels: bucket(root, &config.label_properties, lang),
        synonyms: bucket(root, &config.synonym_properties, lang),
        definitions: bucket(root, &config.definition_properties, lang),
        is_obsolete: root.get(owl::DEPRECATED).into_iter().flatten().any(is_true),
        direct_parents,
        short_form: short_form(iri),
        annotation_fields,
    }
}
