//! Linear-scan scorer implementing the ranking tiers directly.

use std::collections::{BTreeMap, BTreeSet};

use ols_core::search::SearchDocument;

/// Character-by-character tokenizer written independently of the index.
pub fn tokens(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut current = String::new();
    let flush = |current: &mut String, out: &mut BTreeSet<String>| {
        if !current.is_empty() {
            for part in current.split(':') {
                if !part.is_empty() {
                    out.insert(part.to_string());
                }
            }
            out.insert(std::mem::take(current));
        }
    };
    for c in text.chars() {
        if c.is_alphanumeric() || c == ':' || c == '_' {
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current, &mut out);
        }
    }
    flush(&mut current, &mut out);
    out
}

fn pick<'a>(map: &'a BTreeMap<String, Vec<String>>, lang: &str, default: &str) -> Vec<&'a String> {
    let key = if map.contains_key(lang) {
        Some(lang)
    } else if map.contains_key(default) {
        Some(default)
    } else {
        map.keys().next().map(String::as_str)
    };
    key.map(|k| map[k].iter().collect()).unwrap_or_default()
}

pub fn tier(doc: &SearchDocument, query: &str, lang: &str) -> Option<u8> {
    let q = query.trim().to_lowercase();
    let labels: Vec<String> = pick(&doc.labels, lang, &doc.default_language).into_iter().map(|s| s.trim().to_lowercase()).collect();
    let synonyms: Vec<String> = pick(&doc.synonyms, lang, &doc.default_language).into_iter().map(|s| s.trim().to_lowercase()).collect();
    let definitions = pick(&doc.definitions, lang, &doc.default_language);
    let qt = tokens(&q);
    let mut tiers = Vec::new();
    if labels.contains(&q) {
        tiers.push(1);
    }
    if synonyms.contains(&q) {
        tiers.push(2);
    }
    if labels.iter().any(|l| l.starts_with(&q)) {
        tiers.push(3);
    }
    let label_tokens: BTreeSet<String> = labels.iter().chain(&synonyms).flat_map(|s| tokens(s)).collect();
    if !qt.is_empty() && qt.is_subset(&label_tokens) {
        tiers.push(4);
    }
    let def_tokens: BTreeSet<String> = definitions.iter().flat_map(|s| tokens(s)).collect();
    if !qt.is_empty() && qt.is_subset(&def_tokens) {
        tiers.push(5);
    }
    let ids = [Some(&doc.iri), Some(&doc.short_form), doc.curie.as_ref()];
    if ids.into_iter().flatten().any(|i| i.to_lowercase() == q) {
        tiers.push(6);
    }
    tiers.into_iter().min()
}

/// (iri, ontology_id, tier) for every matching document, best first.
pub fn brute_force_search(
    docs: &[SearchDocument],
    query: &str,
    ontology: Option<&str>,
    lang: &str,
    exact: bool,
    include_obsolete: bool,
) -> Vec<(String, String, u8)> {
    let mut scored = Vec::new();
    for d in docs {
        if ontology.is_some_and(|o| o != d.ontology_id) || (d.is_obsolete && !include_obsolete) {
            continue;
        }
        let Some(t) = tier(d, query, lang) else { continue };
        if exact && ![1, 2, 6].contains(&t) {
            continue;
        }
        let label_len = pick(&d.labels, lang, &d.default_language)
            .into_iter()
            .min()
            .map(|l| l.chars().count())
            .unwrap_or(usize::MAX);
        scored.push((
            (t, d.is_obsolete, !d.is_defining_ontology, label_len, d.iri.clone(), d.ontology_id.clone()),
            (d.iri.clone(), d.ontology_id.clone(), t),
        ));
    }
    scored.sort();
    scored.into_iter().map(|(_, hit)| hit).collect()
}

/// Labels starting with `prefix`, linear scan.
pub fn brute_force_suggest(docs: &[SearchDocument], prefix: &str, lang: &str, limit: usize) -> Vec<(String, String, String)> {
    let p = prefix.trim().to_lowercase();
    let mut out = BTreeSet::new();
    for d in docs.iter().filter(|d| !d.is_obsolete) {
        for l in pick(&d.labels, lang, &d.default_language) {
            if l.trim().to_lowercase().starts_with(&p) {
                out.insert((l.chars().count(), l.clone(), d.iri.clone(), d.ontology_id.clone()));
            }
        }
    }
    out.into_iter().take(limit).map(|(_, l, i, o)| (l, i, o)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer() {
        let t = tokens("MONDO:0000368 lung-Lobe");
        assert_eq!(
            t.into_iter().collect::<Vec<_>>(),
            ["0000368", "lobe", "lung", "mondo", "mondo:0000368"]
        );
    }
}
