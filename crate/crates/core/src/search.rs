//! Tiered full-text index over extracted fields.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataload::{choose_language, LangMap};
use crate::owl::EntityKind;

const MAGIC: &[u8; 8] = b"OLSINDEX";
const VERSION: u32 = 1;

pub const MAX_PAGE_SIZE: usize = 500;
pub const DEFAULT_LANGUAGE: &str = "en";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDocument {
    pub iri: String,
    pub ontology_id: String,
    pub curie: Option<String>,
    pub kind: EntityKind,
    pub short_form: String,
    pub labels: LangMap,
    pub synonyms: LangMap,
    pub definitions: LangMap,
    pub is_obsolete: bool,
    /// The loading ontology is the defining one.
    pub is_defining_ontology: bool,
    pub default_language: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotation_fields: BTreeMap<String, Vec<String>>,
}

impl SearchDocument {
    /// Lexicographically first label in the chosen language.
    pub fn label(&self, lang: &str) -> Option<&str> {
        let l = choose_language(&self.labels, Some(lang), &self.default_language)?;
        self.labels[l].iter().min().map(String::as_str)
    }

    fn values<'a>(&'a self, map: &'a LangMap, lang: &str) -> &'a [String] {
        choose_language(map, Some(lang), &self.default_language)
            .map(|l| map[l].as_slice())
            .unwrap_or(&[])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Label,
    Synonym,
    Definition,
}

/// Ranking tiers, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    ExactLabel = 1,
    ExactSynonym = 2,
    LabelPrefix = 3,
    LabelTokens = 4,
    DefinitionTokens = 5,
    Identifier = 6,
}

impl Tier {
    pub fn is_exact(self) -> bool {
        matches!(self, Tier::ExactLabel | Tier::ExactSynonym | Tier::Identifier)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchQuery {
    pub q: String,
    pub ontology: Option<String>,
    pub lang: Option<String>,
    pub exact: bool,
    pub include_obsolete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub iri: String,
    pub ontology_id: String,
    pub curie: Option<String>,
    pub kind: EntityKind,
    pub label: Option<String>,
    pub tier: u8,
    pub is_obsolete: bool,
    pub is_defining_ontology: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub label: String,
    pub iri: String,
    pub ontology_id: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("query must not be empty")]
    EmptyQuery,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("corrupt index segment: {0}")]
    Corrupt(String),
}

/// Lowercases and splits on characters other than letters, digits, ':' and
/// '_'. Tokens containing ':' also emit their non-empty parts.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for token in lower.split(|c: char| !(c.is_alphanumeric() || c == ':' || c == '_')) {
        if token.is_empty() {
            continue;
        }
        out.push(token.to_string());
        if token.contains(':') {
            out.extend(token.split(':').filter(|p| !p.is_empty()).map(str::to_string));
        }
    }
    out
}

fn normalize(q: &str) -> String {
    q.trim().to_lowercase()
}

/// Full ordering key of a hit: tier, obsolete last, defining first, shorter
/// label, IRI, ontology.
pub type RankKey = (u8, bool, bool, usize, String, String);

#[derive(Debug, Clone, Default)]
pub struct SearchIndex {
    docs: Vec<SearchDocument>,
    /// token -> (field, language) -> doc ids
    postings: HashMap<String, BTreeMap<(Field, String), Vec<u32>>>,
    /// lowercased full label or synonym -> doc ids
    exact: HashMap<String, Vec<u32>>,
    /// (lowercased label, language, doc), sorted
    prefixes: Vec<(String, String, u32)>,
    /// lowercased CURIE, short form and IRI -> doc ids
    identifiers: HashMap<String, Vec<u32>>,
}

fn push_unique(v: &mut Vec<u32>, id: u32) {
    if v.last() != Some(&id) {
        v.push(id);
    }
}

impl SearchIndex {
    pub fn build(docs: Vec<SearchDocument>) -> Self {
        let mut idx = SearchIndex {
            docs,
            ..Default::default()
        };
        for (i, d) in idx.docs.iter().enumerate() {
            let id = i as u32;
            for (field, map) in [(Field::Label, &d.labels), (Field::Synonym, &d.synonyms), (Field::Definition, &d.definitions)] {
                for (lang, values) in map {
                    for v in values {
                        for t in tokenize(v) {
                            let list = idx.postings.entry(t).or_default().entry((field, lang.clone())).or_default();
                            push_unique(list, id);
                        }
                        if field != Field::Definition {
                            push_unique(idx.exact.entry(normalize(v)).or_default(), id);
                        }
                        if field == Field::Label {
                            idx.prefixes.push((normalize(v), lang.clone(), id));
                        }
                    }
                }
            }
            let mut ids = vec![d.iri.to_lowercase(), d.short_form.to_lowercase()];
            ids.extend(d.curie.as_deref().map(str::to_lowercase));
            ids.sort();
            ids.dedup();
            for key in ids {
                push_unique(idx.identifiers.entry(key).or_default(), id);
            }
        }
        idx.prefixes.sort();
        idx.prefixes.dedup();
        idx
    }

    pub fn documents(&self) -> &[SearchDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Doc ids with a posting for `token` in any field or language.
    pub fn postings(&self, token: &str) -> BTreeSet<u32> {
        self.postings
            .get(token)
            .into_iter()
            .flat_map(|m| m.values().flatten().copied())
            .collect()
    }

    /// Postings list for one (field, language, token).
    pub fn postings_for(&self, field: Field, lang: &str, token: &str) -> &[u32] {
        self.postings
            .get(token)
            .and_then(|m| m.get(&(field, lang.to_string())))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn prefix_range(&self, prefix: &str) -> &[(String, String, u32)] {
        let start = self.prefixes.partition_point(|(l, _, _)| l.as_str() < prefix);
        let len = self.prefixes[start..].partition_point(|(l, _, _)| l.starts_with(prefix));
        &self.prefixes[start..start + len]
    }

    fn candidates(&self, q: &str, tokens: &[String]) -> BTreeSet<u32> {
        let mut out: BTreeSet<u32> = BTreeSet::new();
        out.extend(self.exact.get(q).into_iter().flatten());
        out.extend(self.identifiers.get(q).into_iter().flatten());
        out.extend(self.prefix_range(q).iter().map(|(_, _, d)| *d));
        let mut sets = tokens.iter().map(|t| self.postings(t));
        if let Some(first) = sets.next() {
            let all = sets.fold(first, |acc, s| acc.intersection(&s).copied().collect());
            out.extend(all);
        }
        out
    }

    /// Best tier of a document for a normalized query, or `None`.
    pub fn tier(doc: &SearchDocument, q: &str, tokens: &HashSet<String>, lang: &str) -> Option<Tier> {
        let labels = doc.values(&doc.labels, lang);
        let synonyms = doc.values(&doc.synonyms, lang);
        let lower = |v: &String| normalize(v);
        if labels.iter().map(lower).any(|l| l == q) {
            return Some(Tier::ExactLabel);
        }
        if synonyms.iter().map(lower).any(|s| s == q) {
            return Some(Tier::ExactSynonym);
        }
        if labels.iter().map(lower).any(|l| l.starts_with(q)) {
            return Some(Tier::LabelPrefix);
        }
        let covers = |values: &mut dyn Iterator<Item = &String>| {
            let have: HashSet<String> = values.flat_map(|v| tokenize(v)).collect();
            !tokens.is_empty() && tokens.iter().all(|t| have.contains(t))
        };
        if covers(&mut labels.iter().chain(synonyms)) {
            return Some(Tier::LabelTokens);
        }
        if covers(&mut doc.values(&doc.definitions, lang).iter()) {
            return Some(Tier::DefinitionTokens);
        }
        let ids = [Some(doc.iri.as_str()), Some(doc.short_form.as_str()), doc.curie.as_deref()];
        if ids.into_iter().flatten().any(|i| i.to_lowercase() == q) {
            return Some(Tier::Identifier);
        }
        None
    }

    pub fn rank_key(doc: &SearchDocument, tier: Tier, lang: &str) -> RankKey {
        (
            tier as u8,
            doc.is_obsolete,
            !doc.is_defining_ontology,
            doc.label(lang).map(|l| l.chars().count()).unwrap_or(usize::MAX),
            doc.iri.clone(),
            doc.ontology_id.clone(),
        )
    }

    /// Every matching hit in rank order.
    pub fn search_all(&self, query: &SearchQuery) -> Result<Vec<SearchHit>, SearchError> {
        let q = normalize(&query.q);
        if q.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let lang = query.lang.as_deref().unwrap_or(DEFAULT_LANGUAGE);
        let tokens = tokenize(&q);
        let token_set: HashSet<String> = tokens.iter().cloned().collect();
        let mut ranked: Vec<(RankKey, u32)> = Vec::new();
        for id in self.candidates(&q, &tokens) {
            let doc = &self.docs[id as usize];
            if query.ontology.as_deref().is_some_and(|o| o != doc.ontology_id) {
                continue;
            }
            if doc.is_obsolete && !query.include_obsolete {
                continue;
            }
            let Some(tier) = Self::tier(doc, &q, &token_set, lang) else { continue };
            if query.exact && !tier.is_exact() {
                continue;
            }
            ranked.push((Self::rank_key(doc, tier, lang), id));
        }
        ranked.sort();
        Ok(ranked
            .into_iter()
            .map(|(key, id)| {
                let doc = &self.docs[id as usize];
                SearchHit {
                    iri: doc.iri.clone(),
                    ontology_id: doc.ontology_id.clone(),
                    curie: doc.curie.clone(),
                    kind: doc.kind,
                    label: doc.label(lang).map(str::to_string),
                    tier: key.0,
                    is_obsolete: doc.is_obsolete,
                    is_defining_ontology: doc.is_defining_ontology,
                }
            })
            .collect())
    }

    /// One page of hits plus the total count.
    pub fn search(&self, query: &SearchQuery, page: usize, size: usize) -> Result<(usize, Vec<SearchHit>), SearchError> {
        check_size(size)?;
        let all = self.search_all(query)?;
        let total = all.len();
        let hits = all.into_iter().skip(page.saturating_mul(size)).take(size).collect();
        Ok((total, hits))
    }

    /// Non-obsolete labels in the chosen language starting with `prefix`.
    pub fn suggest(&self, prefix: &str, ontology: Option<&str>, lang: Option<&str>, limit: usize) -> Result<Vec<Suggestion>, SearchError> {
        let p = normalize(prefix);
        if p.is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let lang = lang.unwrap_or(DEFAULT_LANGUAGE);
        let mut out: Vec<Suggestion> = Vec::new();
        let mut seen = HashSet::new();
        for (_, label_lang, id) in self.prefix_range(&p) {
            let doc = &self.docs[*id as usize];
            if doc.is_obsolete || ontology.is_some_and(|o| o != doc.ontology_id) {
                continue;
            }
            if choose_language(&doc.labels, Some(lang), &doc.default_language) != Some(label_lang.as_str()) {
                continue;
            }
            for label in &doc.labels[label_lang] {
                if normalize(label).starts_with(&p) && seen.insert((label.clone(), *id)) {
                    out.push(Suggestion {
                        label: label.clone(),
                        iri: doc.iri.clone(),
                        ontology_id: doc.ontology_id.clone(),
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            (a.label.chars().count(), &a.label, &a.iri, &a.ontology_id).cmp(&(b.label.chars().count(), &b.label, &b.iri, &b.ontology_id))
        });
        out.truncate(limit);
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        serde_json::to_writer(&mut out, &self.docs).expect("documents serialize");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SearchError> {
        if bytes.len() < 12 || &bytes[..8] != MAGIC {
            return Err(SearchError::Corrupt("bad magic".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(SearchError::Corrupt(format!("unsupported version {version}")));
        }
        let docs: Vec<SearchDocument> = serde_json::from_slice(&bytes[12..]).map_err(|e| SearchError::Corrupt(e.to_string()))?;
        Ok(Self::build(docs))
    }
}

pub fn check_size(size: usize) -> Result<(), SearchError> {
    if size == 0 || size > MAX_PAGE_SIZE {
        return Err(SearchError::InvalidParameter(format!("size must be between 1 and {MAX_PAGE_SIZE}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(iri: &str, label: &str) -> SearchDocument {
        SearchDocument {
            iri: iri.into(),
            ontology_id: "t".into(),
            curie: None,
            kind: EntityKind::Class,
            short_form: crate::dataload::short_form(iri),
            labels: LangMap::from([("en".to_string(), vec![label.to_string()])]),
            synonyms: LangMap::new(),
            definitions: LangMap::new(),
            is_obsolete: false,
            is_defining_ontology: true,
            default_language: "en".into(),
            annotation_fields: BTreeMap::new(),
        }
    }

    fn q(text: &str) -> SearchQuery {
        SearchQuery {
            q: text.into(),
            ..Default::default()
        }
    }

    fn lungs() -> SearchIndex {
        SearchIndex::build(vec![
            doc("http://x/3", "left lung"),
            doc("http://x/2", "lung epithelium"),
            doc("http://x/1", "lung"),
        ])
    }

    #[test]
    fn tokenizer_rules() {
        assert_eq!(tokenize("Extrapulmonary tuberculosis"), ["extrapulmonary", "tuberculosis"]);
        assert_eq!(tokenize("MONDO:0000368"), ["mondo:0000368", "mondo", "0000368"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("part-of (BFO_0000050)"), ["part", "of", "bfo_0000050"]);
    }

    #[test]
    fn lung_ordering() {
        let hits = lungs().search_all(&q("lung")).unwrap();
        let labels: Vec<_> = hits.iter().map(|h| h.label.as_deref().unwrap()).collect();
        assert_eq!(labels, ["lung", "lung epithelium", "left lung"]);
        assert_eq!(hits.iter().map(|h| h.tier).collect::<Vec<_>>(), [1, 3, 4]);
        let exact = lungs()
            .search_all(&SearchQuery {
                exact: true,
                ..q("lung")
            })
            .unwrap();
        assert_eq!(exact.len(), 1);
    }

    #[test]
    fn postings_and_empty_corpus() {
        let idx = lungs();
        assert_eq!(idx.postings_for(Field::Label, "en", "lung").len(), 3);
        assert_eq!(idx.prefix_range("lu").len(), 2);
        let empty = SearchIndex::build(vec![]);
        assert_eq!(empty.search(&q("lung"), 0, 20).unwrap(), (0, vec![]));
        assert_eq!(empty.search(&q("  "), 0, 20), Err(SearchError::EmptyQuery));
        assert!(empty.search(&q("a"), 0, 0).is_err());
        assert!(empty.search(&q("a"), 0, 501).is_err());
    }

    #[test]
    fn identifier_tier_and_obsolete_filter() {
        let mut d = doc("http://purl.obolibrary.org/obo/MONDO_0000368", "extrapulmonary tuberculosis");
        d.curie = Some("MONDO:0000368".into());
        let mut old = doc("http://x/old", "lung");
        old.is_obsolete = true;
        let idx = SearchIndex::build(vec![d, old, doc("http://x/1", "lung")]);
        let hits = idx.search_all(&q("MONDO:0000368")).unwrap();
        assert_eq!(hits[0].tier, Tier::Identifier as u8);
        assert_eq!(idx.search_all(&q("lung")).unwrap().len(), 1);
        let all = idx
            .search_all(&SearchQuery {
                include_obsolete: true,
                ..q("lung")
            })
            .unwrap();
        assert_eq!(all.iter().map(|h| h.iri.as_str()).collect::<Vec<_>>(), ["http://x/1", "http://x/old"]);
        assert_eq!(idx.search_all(&q("zzz-not-present")).unwrap(), vec![]);
    }

    #[test]
    fn language_fallback() {
        let idx = lungs();
        let hits = idx
            .search_all(&SearchQuery {
                lang: Some("de".into()),
                ..q("lung")
            })
            .unwrap();
        assert_eq!(hits[0].tier, 1);
    }

    #[test]
    fn suggestions() {
        let idx = lungs();
        let s: Vec<_> = idx.suggest("lu", None, None, 10).unwrap().into_iter().map(|s| s.label).collect();
        assert_eq!(s, ["lung", "lung epithelium"]);
        assert!(idx.suggest("q", None, None, 10).unwrap().is_empty());
        assert_eq!(idx.suggest("LU", None, None, 1).unwrap().len(), 1);
        assert_eq!(idx.suggest("", None, None, 1), Err(SearchError::EmptyQuery));
    }

    #[test]
    fn segment_round_trip() {
        let idx = lungs();
        let back = SearchIndex::from_bytes(&idx.to_bytes()).unwrap();
        assert_eq!(back.documents(), idx.documents());
        assert!(SearchIndex::from_bytes(b"OLSINDEX").is_err());
    }
}
