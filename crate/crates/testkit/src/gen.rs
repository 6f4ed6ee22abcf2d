//! Seeded generators.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ols_core::owl::EntityKind;
use ols_core::search::SearchDocument;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random DAG over `n` nodes as (child, parent) pairs. Node order is
/// shuffled so ids carry no topological hint.
pub fn random_dag(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        for j in 0..i {
            if rng.gen_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    edges
}

/// A random directed graph that may contain cycles and self-loops.
pub fn random_digraph(rng: &mut impl Rng, n: usize, edges: usize) -> Vec<(usize, usize)> {
    (0..edges).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect()
}

const WORDS: &[&str] = &[
    "lung", "left", "right", "lobe", "heart", "valve", "cell", "epithelium", "tuberculosis", "disease", "acid",
    "chronic", "pulmonary", "bone", "marrow", "Lunge", "poumon", "Herz", "coeur", "organ", "tissue", "upper",
    "lower", "membrane", "MONDO:0000368", "part_of",
];
const LANGS: &[&str] = &["en", "de", "fr"];
const ONTOLOGIES: &[&str] = &["efo", "mondo", "uberon"];

fn phrase(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *WORDS.choose(rng).expect("words")).collect::<Vec<_>>().join(" ")
}

fn lang_map(rng: &mut impl Rng, max: usize) -> BTreeMap<String, Vec<String>> {
    let mut m: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for _ in 0..rng.gen_range(0..=max) {
        let lang = LANGS.choose(rng).expect("langs").to_string();
        let v = phrase(rng);
        let values = m.entry(lang).or_default();
        if !values.contains(&v) {
            values.push(v);
        }
    }
    m
}

/// Search documents with deliberately colliding vocabulary.
pub fn search_corpus(seed: u64, n: usize) -> Vec<SearchDocument> {
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let ontology = ONTOLOGIES.choose(&mut rng).expect("ontologies").to_string();
            // some IRIs repeat across ontologies, as imports do
            let num = if rng.gen_bool(0.1) { i / 2 } else { i };
            let iri = format!("http://purl.obolibrary.org/obo/GEN_{num:07}");
            let mut labels = lang_map(&mut rng, 3);
            if labels.is_empty() && rng.gen_bool(0.8) {
                labels.insert("en".into(), vec![phrase(&mut rng)]);
            }
            SearchDocument {
                curie: Some(format!("GEN:{num:07}")),
                short_form: format!("GEN_{num:07}"),
                iri,
                ontology_id: ontology,
                kind: EntityKind::Class,
                labels,
                synonyms: lang_map(&mut rng, 2),
                definitions: lang_map(&mut rng, 1),
                is_obsolete: rng.gen_bool(0.1),
                is_defining_ontology: rng.gen_bool(0.7),
                default_language: "en".into(),
                annotation_fields: BTreeMap::new(),
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RandomQuery {
    pub q: String,
    pub lang: String,
    pub ontology: Option<String>,
    pub exact: bool,
    pub include_obsolete: bool,
}

/// Queries drawn from corpus labels, label prefixes, words, identifiers and
/// absent strings.
pub fn search_queries(seed: u64, docs: &[SearchDocument], n: usize) -> Vec<RandomQuery> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let d = docs.choose(&mut rng).expect("non-empty corpus");
            let any_label = d.labels.values().flatten().next().cloned().unwrap_or_else(|| "lung".into());
            let q = match rng.gen_range(0..7) {
                0 => any_label,
                1 => any_label.chars().take(rng.gen_range(1..=any_label.chars().count().max(1))).collect(),
                2 => WORDS.choose(&mut rng).expect("words").to_string(),
                3 => phrase(&mut rng),
                4 => d.curie.clone().expect("curie"),
                5 => d.short_form.to_lowercase(),
                _ => "zzz-not-present".into(),
            };
            RandomQuery {
                q,
                lang: LANGS.choose(&mut rng).expect("langs").to_string(),
                ontology: rng.gen_bool(0.2).then(|| ONTOLOGIES.choose(&mut rng).expect("o").to_string()),
                exact: rng.gen_bool(0.15),
                include_obsolete: rng.gen_bool(0.3),
            }
        })
        .collect()
}

/// A Turtle ontology with `n` classes: labels, synonyms, definitions, one
/// named parent each and occasional part-of restrictions.
pub fn synthetic_ontology(n: usize, seed: u64) -> String {
    let mut rng = rng(seed);
    let mut out = String::with_capacity(n * 400);
    out.push_str(
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
         @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
         @prefix oio: <http://www.geneontology.org/formats/oboInOwl#> .\n\
         @prefix obo: <http://purl.obolibrary.org/obo/> .\n\
         @prefix syn: <http://example.org/syn/SYN_> .\n\
         <http://example.org/syn.owl> a owl:Ontology .\n\
         obo:BFO_0000050 a owl:ObjectProperty ; rdfs:label \"part of\"@en .\n",
    );
    for i in 0..n {
        let label = format!("{} {} {i}", WORDS[rng.gen_range(0..WORDS.len())], WORDS[rng.gen_range(0..WORDS.len())]);
        let _ = write!(
            out,
            "syn:{i:07} a owl:Class ;\n  rdfs:label \"{label}\"@en ;\n  oio:hasExactSynonym \"synonym {i}\" ;\n  \
             obo:IAO_0000115 \"Definition of synthetic class number {i}.\"@en"
        );
        if i > 0 {
            let _ = write!(out, " ;\n  rdfs:subClassOf syn:{:07}", rng.gen_range(0..i));
        }
        if i > 1 && rng.gen_bool(0.2) {
            let _ = write!(
                out,
                " ;\n  rdfs:subClassOf [ a owl:Restriction ; owl:onProperty obo:BFO_0000050 ; owl:someValuesFrom syn:{:07} ]",
                rng.gen_range(0..i)
            );
        }
        if rng.gen_bool(0.1) {
            let _ = write!(out, " ;\n  rdfs:label \"Klasse {i}\"@de");
        }
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(search_corpus(7, 20), search_corpus(7, 20));
        assert_eq!(synthetic_ontology(10, 1), synthetic_ontology(10, 1));
        let mut a = rng(3);
        let mut b = rng(3);
        assert_eq!(random_dag(&mut a, 30, 0.1), random_dag(&mut b, 30, 0.1));
    }
}
