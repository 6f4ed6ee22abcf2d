//! Randomized invariants checked against the testkit oracles.

use std::collections::BTreeSet;

use ols_core::graph::{GraphEdge, NodeInput, OntologyGraph, DEFAULT_CAP, SUBCLASS_OF};
use ols_core::linker::{Registry, RegistryEntry};
use ols_core::lossless::{decode, encode};
use ols_core::owl;
use ols_core::rdf::{Format, RdfParser};
use ols_core::search::{SearchIndex, SearchQuery};
use ols_testkit::gen::{random_dag, random_digraph, rng, search_corpus, search_queries};
use ols_testkit::graph::ancestor_sets;
use ols_testkit::search::{brute_force_search, brute_force_suggest};
use ols_testkit::{corpus_registry, isomorphic};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn name(i: usize) -> String {
    format!("http://x/n{i:03}")
}

fn graph_of(n: usize, edges: &[(usize, usize)]) -> OntologyGraph {
    let nodes = (0..n)
        .map(|i| NodeInput {
            iri: name(i),
            label: Some(format!("node {i}")),
            is_class: true,
            ..Default::default()
        })
        .collect();
    let edges: Vec<GraphEdge> = edges
        .iter()
        .map(|&(a, b)| GraphEdge {
            source: name(a),
            relation: SUBCLASS_OF.into(),
            target: name(b),
        })
        .collect();
    OntologyGraph::build("t", &[], nodes, &edges)
}

fn iri_set(nodes: &[ols_core::graph::GraphNode]) -> BTreeSet<String> {
    nodes.iter().map(|n| n.iri.clone()).collect()
}

#[test]
fn ancestors_match_the_closure_oracle_on_random_dags() {
    let mut r = rng(20240611);
    for _ in 0..50 {
        let n = r.gen_range(2..=100);
        let density = r.gen_range(0.01..0.12);
        let edges = random_dag(&mut r, n, density);
        let g = graph_of(n, &edges);
        let f = g.subclass_filter();
        let oracle = ancestor_sets(n, &edges);
        let mut desc: Vec<BTreeSet<String>> = Vec::new();
        for x in 0..n {
            let anc = g.ancestors(&name(x), &f, DEFAULT_CAP).unwrap();
            assert!(!anc.truncated);
            assert_eq!(anc.nodes.len(), iri_set(&anc.nodes).len(), "duplicates");
            let expected: BTreeSet<String> = oracle[x].iter().map(|&y| name(y)).collect();
            assert_eq!(iri_set(&anc.nodes), expected);
            let parents = iri_set(&g.parents(&name(x), &f).unwrap());
            assert!(parents.is_subset(&expected));
            desc.push(iri_set(&g.descendants(&name(x), &f, DEFAULT_CAP).unwrap().nodes));
        }
        for x in 0..n {
            for y in 0..n {
                let y_anc_of_x = oracle[x].contains(&y);
                assert_eq!(y_anc_of_x, desc[y].contains(&name(x)), "duality {x} {y}");
            }
        }
        for root in g.roots(&f, false) {
            assert!(g.ancestors(&root.iri, &f, DEFAULT_CAP).unwrap().nodes.is_empty());
        }
    }
}

#[test]
fn cyclic_graphs_terminate_without_duplicates() {
    let mut r = rng(7);
    for _ in 0..30 {
        let n = r.gen_range(1..40);
        let edges = random_digraph(&mut r, n, n * 2);
        let g = graph_of(n, &edges);
        let f = g.subclass_filter();
        let oracle = ancestor_sets(n, &edges);
        for x in 0..n {
            let anc = g.ancestors(&name(x), &f, DEFAULT_CAP).unwrap().nodes;
            assert_eq!(anc.len(), iri_set(&anc).len());
            assert!(!iri_set(&anc).contains(&name(x)));
            assert_eq!(iri_set(&anc), oracle[x].iter().map(|&y| name(y)).collect());
        }
    }
}

#[test]
fn bfs_levels_are_sorted_by_iri() {
    // a -> {c, b}, b -> d, c -> e : level 1 = [b, c], level 2 = [d, e]
    let g = graph_of(5, &[(0, 2), (0, 1), (1, 3), (2, 4)]);
    let anc: Vec<_> = g
        .ancestors(&name(0), &g.subclass_filter(), DEFAULT_CAP)
        .unwrap()
        .nodes
        .into_iter()
        .map(|n| n.iri)
        .collect();
    assert_eq!(anc, [name(1), name(2), name(3), name(4)]);
}

#[test]
fn search_matches_the_brute_force_scorer() {
    let docs = search_corpus(42, 200);
    let index = SearchIndex::build(docs.clone());
    let queries = search_queries(43, &docs, 100);
    let mut non_empty = 0;
    for q in &queries {
        let query = SearchQuery {
            q: q.q.clone(),
            ontology: q.ontology.clone(),
            lang: Some(q.lang.clone()),
            exact: q.exact,
            include_obsolete: q.include_obsolete,
        };
        let got: Vec<(String, String, u8)> = index
            .search_all(&query)
            .unwrap()
            .into_iter()
            .map(|h| (h.iri, h.ontology_id, h.tier))
            .collect();
        let expected = brute_force_search(&docs, &q.q, q.ontology.as_deref(), &q.lang, q.exact, q.include_obsolete);
        assert_eq!(got, expected, "query {q:?}");
        if !got.is_empty() {
            non_empty += 1;
        }
        // paging concatenates back to the full list
        let mut paged = Vec::new();
        for page in 0.. {
            let (total, hits) = index.search(&query, page, 7).unwrap();
            assert_eq!(total, got.len());
            if hits.is_empty() {
                break;
            }
            paged.extend(hits.into_iter().map(|h| (h.iri, h.ontology_id, h.tier)));
        }
        assert_eq!(paged, got);
    }
    assert!(non_empty > 50, "queries too sparse: {non_empty}");
}

#[test]
fn exact_labels_outrank_token_matches() {
    let docs = search_corpus(5, 200);
    let index = SearchIndex::build(docs);
    for word in ["lung", "heart", "left lung", "acid"] {
        let hits = index
            .search_all(&SearchQuery {
                q: word.into(),
                include_obsolete: true,
                ..Default::default()
            })
            .unwrap();
        let first_token_only = hits.iter().position(|h| h.tier >= 4).unwrap_or(hits.len());
        assert!(hits[first_token_only..].iter().all(|h| h.tier >= 4));
        assert!(hits[..first_token_only].iter().all(|h| h.tier < 4));
    }
}

#[test]
fn suggestions_match_a_linear_scan() {
    let docs = search_corpus(11, 200);
    let index = SearchIndex::build(docs.clone());
    for prefix in ["l", "lu", "lung ", "he", "MON", "z", "poumon", "Lunge"] {
        for lang in ["en", "de", "fr"] {
            let got: Vec<_> = index
                .suggest(prefix, None, Some(lang), 15)
                .unwrap()
                .into_iter()
                .map(|s| (s.label, s.iri, s.ontology_id))
                .collect();
            assert_eq!(got, brute_force_suggest(&docs, prefix, lang, 15), "{prefix} {lang}");
        }
    }
}

#[test]
fn search_is_deterministic_across_document_order() {
    let mut docs = search_corpus(9, 200);
    let a = SearchIndex::build(docs.clone());
    docs.shuffle(&mut rng(1));
    let b = SearchIndex::build(docs);
    for q in ["lung", "tuberculosis chronic", "GEN:0000010", "cell"] {
        let query = SearchQuery {
            q: q.into(),
            ..Default::default()
        };
        assert_eq!(a.search_all(&query).unwrap(), b.search_all(&query).unwrap());
    }
}

#[test]
fn curie_round_trips_on_the_fixture_registry() {
    let registry = corpus_registry();
    let iris = [
        "http://purl.obolibrary.org/obo/MONDO_0000368",
        "http://purl.obolibrary.org/obo/UBERON_0002048",
        "http://purl.obolibrary.org/obo/CHEBI_16236",
        "http://www.ebi.ac.uk/efo/EFO_0000408",
        "http://purl.obolibrary.org/obo/RO_0002211",
        "http://purl.obolibrary.org/obo/BFO_0000050",
        "http://www.geneontology.org/formats/oboInOwl#hasDbXref",
    ];
    let mut entries = registry.entries().to_vec();
    for iri in iris {
        let c = registry.compress(iri).unwrap();
        assert_eq!(registry.expand(&c).as_deref(), Some(iri));
        assert_eq!(registry.compress(&registry.expand(&c).unwrap()), Some(c));
    }
    let mut r = rng(3);
    for _ in 0..20 {
        entries.shuffle(&mut r);
        let shuffled = Registry::new(entries.clone()).unwrap();
        for iri in iris {
            assert_eq!(shuffled.compress(iri), registry.compress(iri));
        }
    }
}

proptest! {
    #[test]
    fn compress_is_order_invariant_with_nested_stems(local in "[A-Za-z0-9_]{1,8}", seed in any::<u64>()) {
        let mut perm: Vec<usize> = (0..4).collect();
        perm.shuffle(&mut rng(seed));
        let base = [
            ("obo", "http://purl.obolibrary.org/obo/$1"),
            ("go", "http://purl.obolibrary.org/obo/GO_$1"),
            ("gox", "http://purl.obolibrary.org/obo/GO_X$1"),
            ("ex", "http://example.org/$1#frag"),
        ];
        let entries: Vec<RegistryEntry> = perm
            .iter()
            .map(|&i| RegistryEntry {
                prefix: base[i].0.into(),
                uri_pattern: base[i].1.into(),
                resolver_template: None,
                synonyms: vec![],
            })
            .collect();
        let reg = Registry::new(entries).unwrap();
        for iri in [
            format!("http://purl.obolibrary.org/obo/GO_{local}"),
            format!("http://purl.obolibrary.org/obo/GO_X{local}"),
            format!("http://purl.obolibrary.org/obo/{local}"),
            format!("http://example.org/{local}#frag"),
        ] {
            let c = reg.compress(&iri).unwrap();
            prop_assert_eq!(reg.expand(&c), Some(iri.clone()));
            // the longest stem owns the IRI
            let longest = base
                .iter()
                .filter(|(_, p)| {
                    let (stem, suffix) = p.split_once("$1").unwrap();
                    iri.starts_with(stem) && iri.ends_with(suffix) && iri.len() > stem.len() + suffix.len()
                })
                .max_by_key(|(_, p)| p.len())
                .unwrap();
            prop_assert_eq!(c.prefix.as_str(), longest.0);
        }
    }
}

// OWL-shaped Turtle documents exercising restrictions, lists, reification,
// disjointness blocks, shared and cyclic blank nodes, and malformed input.
fn owl_statement() -> impl Strategy<Value = String> {
    let c = || (0..6u8).prop_map(|i| format!("ex:c{i}"));
    let p = || (0..3u8).prop_map(|i| format!("ex:p{i}"));
    prop_oneof![
        c().prop_map(|a| format!("{a} a owl:Class .")),
        (c(), c()).prop_map(|(a, b)| format!("{a} rdfs:subClassOf {b} .")),
        (c(), p(), c()).prop_map(|(a, p, b)| format!(
            "{a} rdfs:subClassOf [ a owl:Restriction ; owl:onProperty {p} ; owl:someValuesFrom {b} ] ."
        )),
        (c(), c(), p(), c()).prop_map(|(a, b, p, d)| format!(
            "{a} owl:equivalentClass [ a owl:Class ; owl:intersectionOf ( {b} [ a owl:Restriction ; owl:onProperty {p} ; owl:allValuesFrom {d} ] ) ] ."
        )),
        (c(), "[a-z]{1,4}").prop_map(|(a, l)| format!("{a} rdfs:label \"{l}\"@en .")),
        (c(), "[a-z]{1,4}", "[a-z]{1,3}").prop_map(|(a, l, s)| format!(
            "{a} rdfs:label \"{l}\"@en . [ a owl:Axiom ; owl:annotatedSource {a} ; owl:annotatedProperty rdfs:label ; owl:annotatedTarget \"{l}\"@en ; ex:source \"{s}\" ] ."
        )),
        (p(), p(), p()).prop_map(|(a, b, d)| format!("{a} a owl:ObjectProperty ; owl:propertyChainAxiom ( {b} {d} ) .")),
        (c(), c()).prop_map(|(a, b)| format!("[ a owl:AllDisjointClasses ; owl:members ( {a} {b} ) ] .")),
        (c(), c()).prop_map(|(a, b)| format!("{a} owl:disjointWith {b} .")),
        (c(), "[a-z]{1,3}").prop_map(|(a, v)| format!("{a} ex:note [ ex:q \"{v}\" ; ex:r [ ex:s ex:c0 ] ] .")),
        (c(), c()).prop_map(|(a, b)| format!("{a} ex:rel _:shared . {b} ex:rel _:shared . _:shared ex:v \"1\" .")),
        c().prop_map(|a| format!("{a} ex:loop _:x . _:x ex:n _:y . _:y ex:n _:x .")),
        (c(), c()).prop_map(|(a, b)| format!("{a} rdfs:subClassOf [ a owl:Restriction ; owl:someValuesFrom {b} ] .")),
        c().prop_map(|a| format!("{a} owl:deprecated true .")),
        Just("_:orphan ex:p ex:c1 .".to_string()),
        Just("<http://x/ont> a owl:Ontology ; rdfs:label \"o\" .".to_string()),
        c().prop_map(|a| format!("{a} a owl:NamedIndividual , ex:c1 .")),
        c().prop_map(|a| format!("{a} ex:list ( \"a\" ( ex:c1 ) [ ex:z 1 ] ) .")),
    ]
}

fn owl_document() -> impl Strategy<Value = String> {
    proptest::collection::vec(owl_statement(), 0..12).prop_map(|s| {
        format!(
            "@prefix ex: <http://x/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .\n\
             @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n{}",
            s.join("\n")
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn lossless_round_trip_and_accounting(doc in owl_document()) {
        let triples = RdfParser::new(Format::Turtle).parse(doc.as_bytes()).unwrap();
        let assembly = owl::assemble(&triples);
        prop_assert_eq!(assembly.consumed() + assembly.dangling.len(), triples.len());
        for e in assembly.header.iter().chain(&assembly.entities) {
            let value = encode(&e.iri, &e.triples);
            let back = decode(&e.iri, &value).unwrap();
            prop_assert!(isomorphic(&back, &e.triples), "{}\n{}\n{:?}", e.iri, doc, value);
            prop_assert_eq!(encode(&e.iri, &e.triples).to_json().to_string(), value.to_json().to_string());
        }
    }

    #[test]
    fn encoding_ignores_triple_order(doc in owl_document(), seed in any::<u64>()) {
        let triples = RdfParser::new(Format::Turtle).parse(doc.as_bytes()).unwrap();
        let mut shuffled = triples.clone();
        shuffled.shuffle(&mut rng(seed));
        let (a, b) = (owl::assemble(&triples), owl::assemble(&shuffled));
        prop_assert_eq!(a.entities.len(), b.entities.len());
        for (x, y) in a.entities.iter().zip(&b.entities) {
            prop_assert_eq!(&x.iri, &y.iri);
            prop_assert_eq!(
                encode(&x.iri, &x.triples).to_json().to_string(),
                encode(&y.iri, &y.triples).to_json().to_string()
            );
        }
    }
}
