//! Browser demo over an in-memory dataset. Three operations are exported:
//! load ontologies (the bundled fixture corpus or pasted Turtle), search
//! them, and view one entity with its axioms, parents and children.
//!
//! Everything returns JSON text so the page needs no bindings beyond strings.

use std::collections::HashMap;

use ols_core::dataload::{
    self, file_url_to_path, parse_config, DatasetManifest, FetchError, Fetcher, LoadStatus, MANIFEST_FORMAT,
};
use ols_core::dataset::Dataset;
use ols_core::linker::Registry;
use ols_core::owl::render;
use ols_core::search::SearchQuery;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

const CORPUS: [(&str, &str); 6] = [
    ("efo.ttl", include_str!("../../../fixtures/corpus/efo.ttl")),
    ("mondo_slim.ttl", include_str!("../../../fixtures/corpus/mondo_slim.ttl")),
    ("ro_slim.ttl", include_str!("../../../fixtures/corpus/ro_slim.ttl")),
    ("chebi_slim.ttl", include_str!("../../../fixtures/corpus/chebi_slim.ttl")),
    ("uberon.owl", include_str!("../../../fixtures/corpus/uberon.owl")),
    ("config.json", include_str!("../../../fixtures/corpus/config.json")),
];
const REGISTRY: &str = include_str!("../../../fixtures/corpus/registry.json");

/// Serves documents from memory by file name.
struct MemoryFetcher(HashMap<String, Vec<u8>>);

impl Fetcher for MemoryFetcher {
    fn fetch(&self, location: &str) -> Result<Vec<u8>, FetchError> {
        let path = file_url_to_path(location).map(|p| p.to_string_lossy().into_owned()).unwrap_or_else(|| location.to_string());
        let name = path.rsplit('/').next().unwrap_or(&path);
        self.0.get(name).cloned().ok_or_else(|| FetchError::NotFound {
            location: location.to_string(),
        })
    }
}

/// Loads `config` (JSON text) against in-memory documents.
pub fn load(config: &str, documents: HashMap<String, Vec<u8>>, registry: Registry) -> Result<Dataset, String> {
    let configs = parse_config(config, Some(std::path::Path::new("/docs"))).map_err(|e| e.to_string())?;
    let fetcher = MemoryFetcher(documents);
    let loaded: Vec<_> = configs
        .iter()
        .map(|c| dataload::load_ontology_untimed(c, &configs, &fetcher, &registry))
        .collect();
    if let Some(failed) = loaded.iter().find(|l| l.report.status == LoadStatus::Failed) {
        return Err(format!("{}: {}", failed.report.id, failed.report.error.as_deref().unwrap_or("load failed")));
    }
    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT,
        version: "in-memory".into(),
        ontologies: loaded.iter().map(|l| l.report.clone()).collect(),
    };
    Ok(Dataset::from_loaded(manifest, loaded, registry))
}

pub fn load_fixture() -> Dataset {
    let docs = CORPUS.iter().map(|(n, t)| (n.to_string(), t.as_bytes().to_vec())).collect();
    let registry = Registry::from_json(REGISTRY).expect("bundled registry parses");
    load(CORPUS[5].1, docs, registry).expect("bundled corpus loads")
}

/// A single pasted Turtle document as ontology `id`.
pub fn load_turtle(id: &str, prefix: &str, base_iri: &str, turtle: &str) -> Result<Dataset, String> {
    let config = json!({
        "ontologies": [{
            "id": id,
            "title": id,
            "source": format!("{id}.ttl"),
            "preferred_prefix": prefix,
            "base_iris": [base_iri],
        }]
    });
    let docs = HashMap::from([(format!("{id}.ttl"), turtle.as_bytes().to_vec())]);
    load(&config.to_string(), docs, Registry::default())
}

#[derive(Serialize)]
struct Neighbour {
    iri: String,
    label: Option<String>,
    defining_ontology: Option<String>,
}

#[derive(Serialize)]
struct AxiomLine {
    heading: &'static str,
    text: String,
}

pub fn summary(ds: &Dataset) -> serde_json::Value {
    let ontologies: Vec<_> = ds
        .manifest
        .ontologies
        .iter()
        .map(|o| json!({"id": o.id, "title": o.config.title, "languages": o.languages, "counts": o.counts, "warnings": o.warnings}))
        .collect();
    json!({ "ontologies": ontologies })
}

pub fn search(ds: &Dataset, q: &str, lang: Option<&str>, exact: bool) -> Result<serde_json::Value, String> {
    let query = SearchQuery {
        q: q.to_string(),
        lang: lang.map(str::to_string),
        exact,
        ..Default::default()
    };
    let (total, hits) = ds.index.search(&query, 0, 50).map_err(|e| e.to_string())?;
    Ok(json!({ "total": total, "hits": hits }))
}

pub fn entity(ds: &Dataset, ontology: &str, iri: &str, lang: Option<&str>) -> Result<serde_json::Value, String> {
    let data = ds.ontology(ontology).ok_or_else(|| format!("unknown ontology '{ontology}'"))?;
    let r = data.record(iri).ok_or_else(|| format!("'{iri}' is not in '{ontology}'"))?;
    let default = data.config().default_language.as_str();
    let name = |i: &str| {
        ds.describe(i, ontology)
            .and_then(|d| d.extracted.label(lang, default).map(str::to_string))
            .unwrap_or_else(|| ds.registry.curie_or_iri(i))
    };
    let axioms: Vec<AxiomLine> = r
        .axioms
        .iter()
        .map(|a| {
            let (heading, text) = render::axiom(&a.axiom, &name);
            AxiomLine { heading, text }
        })
        .collect();
    let f = data.graph.all_filter();
    let neighbours = |nodes: Result<Vec<ols_core::graph::GraphNode>, _>| -> Vec<Neighbour> {
        nodes
            .unwrap_or_default()
            .into_iter()
            .map(|n| Neighbour {
                label: Some(name(&n.iri)),
                iri: n.iri,
                defining_ontology: n.defining_ontology,
            })
            .collect()
    };
    let reified: Vec<_> = r
        .reified
        .iter()
        .map(|ra| json!({"property": name(&ra.annotated_property), "target": ra.annotated_target, "payload": ra.payload}))
        .collect();
    Ok(json!({
        "iri": r.iri,
        "curie": r.curie,
        "ontology_id": r.ontology_id,
        "kind": r.kind,
        "defining_ontology": r.defining_ontology,
        "label": r.extracted.label(lang, default),
        "languages": data.report.languages,
        "synonyms": r.extracted.synonyms,
        "definitions": r.extracted.definitions,
        "is_obsolete": r.extracted.is_obsolete,
        "axioms": axioms,
        "reified": reified,
        "parents": neighbours(data.graph.parents(iri, &f)),
        "children": neighbours(data.graph.children(iri, &f)),
    }))
}

/// Handle held by the page.
#[wasm_bindgen]
pub struct Demo {
    dataset: Dataset,
}

#[wasm_bindgen]
impl Demo {
    /// The bundled three-ontology corpus.
    #[wasm_bindgen(js_name = withFixture)]
    pub fn with_fixture() -> Demo {
        Demo { dataset: load_fixture() }
    }

    #[wasm_bindgen(js_name = fromTurtle)]
    pub fn from_turtle(id: &str, prefix: &str, base_iri: &str, turtle: &str) -> Result<Demo, JsError> {
        load_turtle(id, prefix, base_iri, turtle)
            .map(|dataset| Demo { dataset })
            .map_err(|e| JsError::new(&e))
    }

    pub fn summary(&self) -> String {
        summary(&self.dataset).to_string()
    }

    pub fn search(&self, q: &str, lang: Option<String>, exact: bool) -> Result<String, JsError> {
        search(&self.dataset, q, lang.as_deref(), exact)
            .map(|v| v.to_string())
            .map_err(|e| JsError::new(&e))
    }

    pub fn entity(&self, ontology: &str, iri: &str, lang: Option<String>) -> Result<String, JsError> {
        entity(&self.dataset, ontology, iri, lang.as_deref())
            .map(|v| v.to_string())
            .map_err(|e| JsError::new(&e))
    }
}
