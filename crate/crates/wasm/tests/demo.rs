use ols_core::dataset::Dataset;
use ols_core::owl::EntityKind;
use ols_wasm::{entity, load_fixture, load_turtle, search, summary};

#[test]
fn bundled_corpus_matches_a_disk_load() {
    let dir = tempfile::tempdir().unwrap();
    ols_testkit::load_corpus(dir.path());
    let disk = Dataset::open(dir.path()).unwrap();
    let mem = load_fixture();
    assert_eq!(mem.ontologies.len(), 3);
    // header records differ only in how relative owl:imports resolved
    let entities = |d: &Dataset, id: &str| {
        d.ontology(id).unwrap().records().iter().filter(|r| r.kind != EntityKind::Ontology).cloned().collect::<Vec<_>>()
    };
    for id in disk.ontologies.keys() {
        assert_eq!(entities(&disk, id), entities(&mem, id), "{id}");
    }
    let s = summary(&mem);
    let uberon = s["ontologies"].as_array().unwrap().iter().find(|o| o["id"] == "uberon").unwrap();
    assert_eq!(uberon["languages"], serde_json::json!(["de", "en", "fr"]));
}

#[test]
fn search_and_entity_views() {
    let ds = load_fixture();
    let hits = search(&ds, "lung", None, false).unwrap();
    let labels: Vec<&str> = hits["hits"].as_array().unwrap().iter().map(|h| h["label"].as_str().unwrap()).collect();
    assert_eq!(&labels[..3], ["lung", "lung epithelium", "left lung"]);
    assert!(search(&ds, " ", None, false).is_err());

    let lung = entity(&ds, "uberon", "http://purl.obolibrary.org/obo/UBERON_0002048", Some("de")).unwrap();
    assert_eq!(lung["label"], "Lunge");
    let axioms: Vec<&str> = lung["axioms"].as_array().unwrap().iter().map(|a| a["text"].as_str().unwrap()).collect();
    assert_eq!(axioms, ["Organ", "Teil von some Atmungssystem"]);
    assert_eq!(lung["parents"].as_array().unwrap().len(), 2);
    assert_eq!(lung["reified"].as_array().unwrap().len(), 1);
    assert!(entity(&ds, "uberon", "http://nowhere/x", None).is_err());
}

#[test]
fn pasted_turtle_loads() {
    let ttl = r#"@prefix : <http://example.org/> .
        @prefix owl: <http://www.w3.org/2002/07/owl#> .
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        :A a owl:Class ; rdfs:label "alpha" .
        :B a owl:Class ; rdfs:label "beta" ; rdfs:subClassOf :A ."#;
    let ds = load_turtle("mine", "EX", "http://example.org/", ttl).unwrap();
    let b = entity(&ds, "mine", "http://example.org/B", None).unwrap();
    assert_eq!(b["curie"], "EX:B");
    assert_eq!(b["parents"][0]["label"], "alpha");
    assert!(load_turtle("bad", "EX", "http://example.org/", "this is not turtle").is_err());
}
