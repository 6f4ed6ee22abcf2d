//! Acceptance suite. Each test checks one criterion end to end and prints a
//! single `PASS`/`FAIL` line; run with `--nocapture` to see them together.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use http_body_util::BodyExt;
use ols_core::dataload::{import_closure, parse_config, run_dataload, DataloadOptions, FileFetcher, LoadStatus};
use ols_core::dataset::Dataset;
use ols_core::graph::{GraphEdge, NodeInput, OntologyGraph, DEFAULT_CAP, SUBCLASS_OF};
use ols_core::linker::Registry;
use ols_core::lossless::{decode, encode};
use ols_core::owl;
use ols_core::rdf::Term;
use ols_core::search::{SearchIndex, SearchQuery};
use ols_core::vocab::owl as owl_ns;
use ols_server::{encode_iri, router, AppState, DEFAULT_PAGE_SIZE};
use ols_testkit::gen::{random_dag, random_digraph, rng, search_corpus, search_queries, synthetic_ontology};
use ols_testkit::graph::ancestor_sets;
use ols_testkit::search::brute_force_search;
use ols_testkit::{corpus_configs, corpus_registry, isomorphic, load_corpus};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;
use tower::ServiceExt;

const OBO: &str = "http://purl.obolibrary.org/obo/";

type Outcome = Result<String, String>;

/// Prints the verdict line and fails the test on `Err`.
fn report(name: &str, outcome: Outcome) {
    match outcome {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(why) => {
            println!("FAIL  {name}: {why}");
            panic!("{name}: {why}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// The fixture corpus, loaded once and served from memory.
fn state() -> &'static Arc<AppState> {
    static STATE: OnceLock<(tempfile::TempDir, Arc<AppState>)> = OnceLock::new();
    &STATE
        .get_or_init(|| {
            let dir = tempfile::tempdir().unwrap();
            load_corpus(dir.path());
            let state = AppState::new(Some(Dataset::open(dir.path()).unwrap()), DEFAULT_PAGE_SIZE);
            (dir, state)
        })
        .1
}

fn dataset() -> Arc<Dataset> {
    state().current().expect("fixture dataset is loaded")
}

fn app() -> Router {
    router(state().clone())
}

async fn get_from(app: Router, uri: &str) -> (u16, Value) {
    let res = app.oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = res.status().as_u16();
    let body = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

async fn get(uri: &str) -> Result<Value, String> {
    match get_from(app(), uri).await {
        (200, v) => Ok(v),
        (s, v) => Err(format!("GET {uri} -> {s} {v}")),
    }
}

fn v2(ontology: &str, kind: &str, iri: &str) -> String {
    format!("/api/v2/ontologies/{ontology}/{kind}/{}", encode_iri(iri))
}

fn labels(items: &Value) -> Vec<String> {
    items.as_array().map(|a| a.iter().filter_map(|i| i["label"].as_str().map(str::to_string)).collect()).unwrap_or_default()
}

#[test]
fn c01_losslessness_sweep() {
    let outcome = (|| -> Outcome {
        let start = Instant::now();
        let (mut entities, mut parsed) = (0, 0);
        for config in corpus_configs() {
            let closure = import_closure(&config.source, &FileFetcher).map_err(|e| e.to_string())?;
            let triples: Vec<_> = closure.documents.into_iter().flat_map(|d| d.triples).collect();
            let assembly = owl::assemble(&triples);
            ensure!(assembly.dangling.is_empty(), "{}: {} dangling triples", config.id, assembly.dangling.len());
            ensure!(
                assembly.consumed() + assembly.dangling.len() == triples.len(),
                "{}: consumed {} + dangling {} != parsed {}",
                config.id,
                assembly.consumed(),
                assembly.dangling.len(),
                triples.len()
            );
            for e in assembly.header.iter().chain(&assembly.entities) {
                let back = decode(&e.iri, &encode(&e.iri, &e.triples)).map_err(|err| format!("{}: {err}", e.iri))?;
                ensure!(isomorphic(&back, &e.triples), "{} in {} does not round-trip", e.iri, config.id);
                entities += 1;
            }
            parsed += triples.len();
        }
        let elapsed = start.elapsed();
        ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
        Ok(format!("{entities} entities, {parsed} triples, all accounted for, {elapsed:.2?}"))
    })();
    report("losslessness sweep", outcome);
}

#[tokio::test]
async fn c02_owl2_features_in_the_api_view() {
    let outcome = async {
        let mondo = get(&v2("efo", "classes", &format!("{OBO}MONDO_0000368"))).await?;
        let disjoint: Vec<&Value> = mondo["axioms"].as_array().unwrap().iter().filter(|a| a["type"] == "disjoint_with").collect();
        ensure!(disjoint.len() == 1, "{} disjoint_with axioms", disjoint.len());
        let partner = format!("{OBO}MONDO_0006052");
        ensure!(disjoint[0]["expression"]["iri"] == partner.as_str(), "partner is {}", disjoint[0]["expression"]);

        let ro = get(&v2("efo", "properties", &format!("{OBO}RO_0002211"))).await?;
        let chains: Vec<&Value> = ro["axioms"].as_array().unwrap().iter().filter(|a| a["type"] == "property_chain").collect();
        ensure!(chains.len() == 1, "{} property chains", chains.len());
        let links = chains[0]["chain"]["properties"].as_array().ok_or("chain has no property list")?;
        ensure!(links.len() == 2 && links[0] == links[1], "chain {}", chains[0]["chain"]);
        Ok(format!("disjoint_with -> MONDO:0006052; chain \"{}\"", chains[0]["rendered"].as_str().unwrap_or("")))
    }
    .await;
    report("OWL2 feature checks", outcome);
}

#[tokio::test]
async fn c03_reified_axiom_annotation() {
    let outcome = async {
        let lung_iri = format!("{OBO}UBERON_0002048");
        let lung = get(&v2("uberon", "classes", &lung_iri)).await?;
        let notes: Vec<&Value> = lung["reified_annotations"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["property"].as_str().unwrap_or("").ends_with("homology_notes"))
            .collect();
        ensure!(notes.len() == 1, "{} homology notes", notes.len());
        let xrefs = notes[0]["xrefs"].as_array().ok_or("no xrefs")?;
        ensure!(xrefs.len() == 1, "{} xrefs", xrefs.len());

        let ds = dataset();
        let record = ds.ontology("uberon").and_then(|d| d.record(&lung_iri)).ok_or("lung missing")?;
        let back = decode(&lung_iri, &record.lossless).map_err(|e| e.to_string())?;
        let axiom_nodes: Vec<_> = back.iter().filter(|t| t.object == Term::Iri(owl_ns::AXIOM.into())).map(|t| &t.subject).collect();
        ensure!(axiom_nodes.len() == 1, "{} owl:Axiom nodes after decode", axiom_nodes.len());
        let block: Vec<_> = back.iter().filter(|t| &t.subject == axiom_nodes[0]).collect();
        let has = |p: &str| block.iter().any(|t| t.predicate == p);
        ensure!(
            has(owl_ns::ANNOTATED_SOURCE) && has(owl_ns::ANNOTATED_PROPERTY) && has(owl_ns::ANNOTATED_TARGET),
            "owl:Axiom block incomplete: {block:?}"
        );
        Ok(format!("1 xref ({}); owl:Axiom block of {} triples rebuilt", xrefs[0]["curie"], block.len()))
    }
    .await;
    report("reification", outcome);
}

#[tokio::test]
async fn c04_languages() {
    let outcome = async {
        let detail = get("/api/v2/ontologies/uberon").await?;
        ensure!(detail["languages"] == serde_json::json!(["de", "en", "fr"]), "languages {}", detail["languages"]);
        let lung = v2("uberon", "classes", &format!("{OBO}UBERON_0002048"));
        let de = get(&format!("{lung}?lang=de")).await?;
        ensure!(de["label"] == "Lunge", "lang=de label {}", de["label"]);
        let xx = get(&format!("{lung}?lang=xx")).await?;
        ensure!(xx["label"] == "lung" && xx["language"] == "en", "lang=xx gave {} ({})", xx["label"], xx["language"]);
        Ok("{de, en, fr}; de -> Lunge; xx -> lung (en)".into())
    }
    .await;
    report("i18n", outcome);
}

#[tokio::test]
async fn c05_defining_ontology_tags() {
    let outcome = async {
        let chem = format!("{OBO}CHEBI_24431");
        let view = get(&v2("efo", "classes", &chem)).await?;
        ensure!(view["defining_ontology"] == "chebi", "class view says {}", view["defining_ontology"]);
        let children = get(&format!("{}/children", v2("efo", "classes", "http://www.ebi.ac.uk/efo/EFO_0000001"))).await?;
        let tagged: Vec<&Value> = children["items"].as_array().unwrap().iter().filter(|i| i["iri"] == chem.as_str()).collect();
        ensure!(tagged.len() == 1, "CHEBI term appears {} times among children", tagged.len());
        ensure!(tagged[0]["defining_ontology"] == "chebi", "children listing says {}", tagged[0]["defining_ontology"]);
        Ok("CHEBI:24431 tagged chebi in view and children".into())
    }
    .await;
    report("defining ontology", outcome);
}

#[tokio::test]
async fn c06_search_oracle_and_ordering() {
    let outcome = async {
        let docs = search_corpus(42, 200);
        let index = SearchIndex::build(docs.clone());
        let queries = search_queries(43, &docs, 100);
        for q in &queries {
            let query = SearchQuery {
                q: q.q.clone(),
                ontology: q.ontology.clone(),
                lang: Some(q.lang.clone()),
                exact: q.exact,
                include_obsolete: q.include_obsolete,
            };
            let got: Vec<_> = index
                .search_all(&query)
                .map_err(|e| e.to_string())?
                .into_iter()
                .map(|h| (h.iri, h.ontology_id, h.tier))
                .collect();
            let expected = brute_force_search(&docs, &q.q, q.ontology.as_deref(), &q.lang, q.exact, q.include_obsolete);
            ensure!(got == expected, "query {q:?} diverges from the oracle");
        }
        let hits = get("/api/v2/search?q=lung&ontology=uberon").await?;
        let order = labels(&hits["items"]);
        ensure!(order == ["lung", "lung epithelium", "left lung"], "lung ordering {order:?}");
        Ok(format!("{} queries over {} docs match; lung ordering {order:?}", queries.len(), docs.len()))
    }
    .await;
    report("search determinism + oracle", outcome);
}

fn graph_of(n: usize, edges: &[(usize, usize)]) -> OntologyGraph {
    let name = |i: usize| format!("http://x/n{i:03}");
    let nodes = (0..n)
        .map(|i| NodeInput {
            iri: name(i),
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

fn index_set(nodes: &[ols_core::graph::GraphNode]) -> BTreeSet<usize> {
    nodes.iter().map(|n| n.iri["http://x/n".len()..].parse().unwrap()).collect()
}

#[test]
fn c07_graph_oracle() {
    let outcome = (|| -> Outcome {
        let mut r = rng(20240611);
        let mut pairs = 0;
        for dag in 0..50 {
            let n = r.gen_range(2..=100);
            let density = r.gen_range(0.01..0.12);
            let edges = random_dag(&mut r, n, density);
            let g = graph_of(n, &edges);
            let f = g.subclass_filter();
            let oracle = ancestor_sets(n, &edges);
            let name = |i: usize| format!("http://x/n{i:03}");
            let mut desc = Vec::with_capacity(n);
            for (x, expected) in oracle.iter().enumerate() {
                let anc = g.ancestors(&name(x), &f, DEFAULT_CAP).map_err(|e| e.to_string())?;
                let got = index_set(&anc.nodes);
                ensure!(got.len() == anc.nodes.len(), "dag {dag}: duplicate ancestors of {x}");
                ensure!(got == expected.iter().copied().collect(), "dag {dag}: ancestors of {x} differ");
                desc.push(index_set(&g.descendants(&name(x), &f, DEFAULT_CAP).map_err(|e| e.to_string())?.nodes));
            }
            for x in 0..n {
                for (y, d) in desc.iter().enumerate() {
                    ensure!(oracle[x].contains(&y) == d.contains(&x), "dag {dag}: duality fails for ({x}, {y})");
                    pairs += 1;
                }
            }
        }
        let mut r = rng(7);
        for _ in 0..30 {
            let n = r.gen_range(1..40);
            let g = graph_of(n, &random_digraph(&mut r, n, n * 2));
            let f = g.subclass_filter();
            for x in 0..n {
                let name = format!("http://x/n{x:03}");
                g.ancestors(&name, &f, DEFAULT_CAP).map_err(|e| e.to_string())?;
                g.descendants(&name, &f, DEFAULT_CAP).map_err(|e| e.to_string())?;
            }
        }
        Ok(format!("50 DAGs match the closure oracle, duality over {pairs} pairs, 30 cyclic graphs terminate"))
    })();
    report("graph oracle", outcome);
}

#[tokio::test]
async fn c08_v1_v2_coherence() {
    let outcome = async {
        let ds = dataset();
        let mut checked = 0;
        for (id, data) in &ds.ontologies {
            for r in data.records() {
                let v2 = get(&v2(id, "entities", &r.iri)).await?;
                let v1 = get(&format!("/api/ontologies/{id}/terms/{}", encode_iri(&r.iri))).await?;
                ensure!(v1["iri"] == v2["iri"], "{}: iri {} vs {}", r.iri, v1["iri"], v2["iri"]);
                ensure!(v1["obo_id"] == v2["curie"], "{}: curie {} vs {}", r.iri, v1["obo_id"], v2["curie"]);
                ensure!(v1["is_obsolete"] == v2["is_obsolete"], "{}: obsolete flag differs", r.iri);
                let first = v2["labels"].get(0).cloned().unwrap_or(Value::Null);
                ensure!(v1["label"] == first, "{}: v1 label {} vs first v2 label {}", r.iri, v1["label"], first);
                checked += 1;
            }
        }
        Ok(format!("{checked} entities agree"))
    }
    .await;
    report("view coherence", outcome);
}

/// Loads a synthetic ontology of `n` classes; returns (dataload time, time to first answered query).
async fn synthetic_run(n: usize) -> Result<(Duration, Duration), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let source = dir.path().join("syn.ttl");
    std::fs::write(&source, synthetic_ontology(n, 11)).map_err(|e| e.to_string())?;
    let config = serde_json::json!({"ontologies": [{
        "id": "syn", "source": source, "preferred_prefix": "SYN", "base_iris": ["http://example.org/syn/SYN_"],
    }]});
    let configs = parse_config(&config.to_string(), None).map_err(|e| e.to_string())?;
    let registry = Registry::default();
    let options = DataloadOptions {
        workers: 4,
        fetcher: &FileFetcher,
        registry: &registry,
    };
    let out = dir.path().join("data");
    let start = Instant::now();
    let manifest = run_dataload(&configs, &out, &options).map_err(|e| e.to_string())?;
    let load = start.elapsed();
    let report = manifest.ontology("syn").ok_or("no report")?;
    ensure!(report.status == LoadStatus::Success, "load failed: {:?}", report.error);
    ensure!(report.counts.classes >= n, "only {} classes", report.counts.classes);

    let start = Instant::now();
    let state = AppState::new(Some(Dataset::open(&out).map_err(|e| e.to_string())?), DEFAULT_PAGE_SIZE);
    let (status, body) = get_from(router(state), "/api/v2/search?q=lung").await;
    let first = start.elapsed();
    ensure!(status == 200 && body["total_elements"].as_u64().unwrap_or(0) > 0, "first query -> {status} {body}");
    Ok((load, first))
}

#[tokio::test]
async fn c09_performance_budget() {
    let outcome = async {
        let (small, _) = synthetic_run(5_000).await?;
        let (large, first) = synthetic_run(50_000).await?;
        let ratio = large.as_secs_f64() / small.as_secs_f64();
        let detail = format!(
            "5k load {small:.2?}, 50k load {large:.2?} ({ratio:.1}x for 10x data), first query {first:.2?}, {} core(s)",
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        );
        ensure!(large < Duration::from_secs(60), "50k load over 60 s; {detail}");
        ensure!(first < Duration::from_secs(2), "first query over 2 s; {detail}");
        ensure!(ratio <= 30.0, "scaling worse than 3x linear; {detail}");
        Ok(detail)
    }
    .await;
    report("performance budget", outcome);
}

#[test]
fn c10_curie_round_trip() {
    let outcome = (|| -> Outcome {
        let registry = corpus_registry();
        let mut iris = BTreeSet::new();
        let ds = dataset();
        for data in ds.ontologies.values() {
            for r in data.records() {
                if registry.compress(&r.iri).is_some() {
                    iris.insert(r.iri.clone());
                }
            }
        }
        ensure!(iris.len() >= 20, "only {} registry-stemmed IRIs", iris.len());
        for iri in &iris {
            let c = registry.compress(iri).unwrap();
            ensure!(registry.expand(&c).as_deref() == Some(iri.as_str()), "{iri} -> {c} does not expand back");
        }
        let mut entries = registry.entries().to_vec();
        let mut r = rng(3);
        for _ in 0..20 {
            entries.shuffle(&mut r);
            let shuffled = Registry::new(entries.clone()).map_err(|e| e.to_string())?;
            for iri in &iris {
                ensure!(shuffled.compress(iri) == registry.compress(iri), "{iri} compresses differently after shuffling");
            }
        }
        Ok(format!("{} IRIs round-trip; 20 registry orders agree", iris.len()))
    })();
    report("CURIE round-trip", outcome);
}
