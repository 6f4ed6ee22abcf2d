//! ETL: config, fetch, import closure, interpretation, extraction and the
//! on-disk dataset.

mod config;
mod extract;
mod fetch;

use std::collections::BTreeMap;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{assign_defining_ontology, load_config, parse_config, ConfigError, OntologyConfig};
pub use extract::{choose_language, extract, short_form, stringify, LangMap, QueryableFields};
pub use fetch::{
    default_cache_dir, file_url_to_path, import_closure, is_http, path_to_file_url, CachingFetcher, ClosureError,
    FetchError, Fetcher, FileFetcher, ImportClosure, SourceDocument, CACHE_DIR_ENV,
};

use crate::graph::{GraphEdge, NodeInput, OntologyGraph, SUBCLASS_OF};
use crate::linker::Registry;
use crate::lossless::{self, LosslessValue};
use crate::owl::{self, Axiom, ClassExpression, EntityKind, LogicalAxiom, OwlEntity, PropertyExpression, ReifiedAnnotation};
use crate::rdf::{self, Triple};
use crate::search::{SearchDocument, SearchIndex};
use crate::vocab::owl as owl_ns;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const GRAPH_FILE: &str = "graph.bin";
pub const DANGLING_FILE: &str = "dangling.nt";
pub const INDEX_DIR: &str = "index";
pub const INDEX_FILE: &str = "segment.bin";
pub const REGISTRY_FILE: &str = "registry.json";
pub const MANIFEST_FORMAT: u32 = 1;

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

/// A hierarchy edge leaving the record's entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordEdge {
    pub relation: String,
    pub target: String,
}

/// The stored unit: one entity as loaded by one ontology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub ontology_id: String,
    pub iri: String,
    pub curie: Option<String>,
    pub kind: EntityKind,
    pub defining_ontology: Option<String>,
    pub imported: bool,
    pub lossless: LosslessValue,
    pub extracted: QueryableFields,
    pub axioms: Vec<Axiom>,
    pub reified: Vec<ReifiedAnnotation>,
    pub edges: Vec<RecordEdge>,
}

impl EntityRecord {
    pub fn to_search_document(&self, config: &OntologyConfig) -> SearchDocument {
        SearchDocument {
            iri: self.iri.clone(),
            ontology_id: self.ontology_id.clone(),
            curie: self.curie.clone(),
            kind: self.kind,
            short_form: self.extracted.short_form.clone(),
            labels: self.extracted.labels.clone(),
            synonyms: self.extracted.synonyms.clone(),
            definitions: self.extracted.definitions.clone(),
            is_obsolete: self.extracted.is_obsolete,
            is_defining_ontology: !self.imported,
            default_language: config.default_language.clone(),
            annotation_fields: self.extracted.annotation_fields.clone(),
        }
    }

    pub fn graph_node(&self, config: &OntologyConfig) -> NodeInput {
        NodeInput {
            iri: self.iri.clone(),
            label: self.extracted.label(None, &config.default_language).map(str::to_string),
            is_obsolete: self.extracted.is_obsolete,
            defining_ontology: self.defining_ontology.clone(),
            is_class: self.kind == EntityKind::Class,
        }
    }
}

/// Hierarchy edges: named superclasses (owl:Thing aside) and existential
/// restrictions over a configured hierarchical property.
pub fn hierarchy_edges(axioms: &[Axiom], hierarchical: &[String]) -> Vec<RecordEdge> {
    let mut out = Vec::new();
    for a in axioms {
        let LogicalAxiom::SubClassOf { expression } = &a.axiom else { continue };
        match expression {
            ClassExpression::Named { iri } if iri != owl_ns::THING => out.push(RecordEdge {
                relation: SUBCLASS_OF.to_string(),
                target: iri.clone(),
            }),
            ClassExpression::SomeValuesFrom {
                property: PropertyExpression::Named { iri: p },
                filler,
            } => {
                if let ClassExpression::Named { iri: target } = filler.as_ref() {
                    if hierarchical.contains(p) {
                        out.push(RecordEdge {
                            relation: p.clone(),
                            target: target.clone(),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    out.sort();
    out.dedup();
    out
}

/// CURIE from the registry, else from the loader's own base IRIs.
pub fn curie_for(iri: &str, config: &OntologyConfig, registry: &Registry) -> Option<String> {
    if let Some(c) = registry.compress(iri) {
        return Some(c.to_string());
    }
    config
        .base_iris
        .iter()
        .filter(|b| iri.len() > b.len() && iri.starts_with(b.as_str()))
        .max_by_key(|b| b.len())
        .map(|b| format!("{}:{}", config.preferred_prefix, &iri[b.len()..]))
}

pub fn build_record(
    entity: &OwlEntity,
    config: &OntologyConfig,
    configs: &[OntologyConfig],
    registry: &Registry,
) -> EntityRecord {
    let lossless = lossless::encode(&entity.iri, &entity.triples);
    let extracted = extract(&entity.iri, &lossless, config, registry);
    let defining_ontology = assign_defining_ontology(&entity.iri, configs);
    let imported = defining_ontology.as_deref().is_some_and(|d| d != config.id);
    let edges = if entity.kind == EntityKind::Class {
        hierarchy_edges(&entity.logical_axioms, &config.hierarchical_properties)
    } else {
        Vec::new()
    };
    EntityRecord {
        ontology_id: config.id.clone(),
        iri: entity.iri.clone(),
        curie: curie_for(&entity.iri, config, registry),
        kind: entity.kind,
        defining_ontology,
        imported,
        lossless,
        extracted,
        axioms: entity.logical_axioms.clone(),
        reified: entity.reified.clone(),
        edges,
    }
}

pub fn build_graph(config: &OntologyConfig, records: &[EntityRecord]) -> OntologyGraph {
    let nodes = records.iter().map(|r| r.graph_node(config)).collect();
    let edges: Vec<GraphEdge> = records
        .iter()
        .flat_map(|r| {
            r.edges.iter().map(|e| GraphEdge {
                source: r.iri.clone(),
                relation: e.relation.clone(),
                target: e.target.clone(),
            })
        })
        .collect();
    OntologyGraph::build(&config.id, &config.hierarchical_properties, nodes, &edges)
}

/// One record per line, in record order.
pub fn records_to_jsonl(records: &[EntityRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    out
}

pub fn records_from_jsonl(bytes: &[u8]) -> Result<Vec<EntityRecord>, serde_json::Error> {
    bytes
        .split(|b| *b == b'\n')
        .filter(|l| !l.is_empty())
        .map(serde_json::from_slice)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadStatus {
    Success,
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadCounts {
    pub entities: usize,
    pub classes: usize,
    pub properties: usize,
    pub individuals: usize,
    pub languages: usize,
    pub parsed_triples: usize,
    pub dangling: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyReport {
    pub id: String,
    pub config: OntologyConfig,
    pub status: LoadStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub ontology_iri: Option<String>,
    pub documents: Vec<String>,
    pub languages: Vec<String>,
    pub counts: LoadCounts,
    pub warnings: Vec<String>,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: u32,
    /// SHA-256 over every loaded ontology's record file; see [`dataset_version`].
    pub version: String,
    pub ontologies: Vec<OntologyReport>,
}

impl DatasetManifest {
    pub fn ontology(&self, id: &str) -> Option<&OntologyReport> {
        self.ontologies.iter().find(|o| o.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &OntologyReport> {
        self.ontologies.iter().filter(|o| o.status == LoadStatus::Failed)
    }
}

#[derive(Debug, Error)]
pub enum DataloadError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DataloadError + '_ {
    move |source| DataloadError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub struct DataloadOptions<'a> {
    pub workers: usize,
    pub fetcher: &'a dyn Fetcher,
    pub registry: &'a Registry,
}

/// Result of loading one ontology in memory.
pub struct LoadedOntology {
    pub report: OntologyReport,
    pub records: Vec<EntityRecord>,
    pub dangling: Vec<Triple>,
}

/// Fetch, interpret and extract one ontology. Never panics on bad input;
/// fatal problems come back as a failed report.
pub fn load_ontology(
    config: &OntologyConfig,
    configs: &[OntologyConfig],
    fetcher: &dyn Fetcher,
    registry: &Registry,
) -> LoadedOntology {
    let started = Instant::now();
    let mut loaded = load_ontology_untimed(config, configs, fetcher, registry);
    loaded.report.duration_ms = started.elapsed().as_millis() as u64;
    loaded
}

/// [`load_ontology`] without the wall clock, for targets that have none.
pub fn load_ontology_untimed(
    config: &OntologyConfig,
    configs: &[OntologyConfig],
    fetcher: &dyn Fetcher,
    registry: &Registry,
) -> LoadedOntology {
    let mut report = OntologyReport {
        id: config.id.clone(),
        config: config.clone(),
        status: LoadStatus::Success,
        error: None,
        ontology_iri: None,
        documents: Vec::new(),
        languages: Vec::new(),
        counts: LoadCounts::default(),
        warnings: Vec::new(),
        duration_ms: 0,
    };
    let closure = match import_closure(&config.source, fetcher) {
        Ok(c) => c,
        Err(e) => {
            report.status = LoadStatus::Failed;
            report.error = Some(e.to_string());
            return LoadedOntology {
                report,
                records: Vec::new(),
                dangling: Vec::new(),
            };
        }
    };
    report.documents = closure.documents.iter().map(|d| d.location.clone()).collect();
    report.warnings = closure.warnings;
    let triples: Vec<Triple> = closure.documents.into_iter().flat_map(|d| d.triples).collect();
    let assembly = owl::assemble(&triples);
    drop(triples);
    report.warnings.extend(assembly.errors.iter().map(|e| e.to_string()));
    report.ontology_iri = assembly.header.as_ref().map(|h| h.iri.clone());

    let mut records: Vec<EntityRecord> = assembly
        .header
        .iter()
        .chain(&assembly.entities)
        .map(|e| build_record(e, config, configs, registry))
        .collect();
    records.sort_by(|a, b| a.iri.cmp(&b.iri));

    let mut languages = owl::collect_languages(assembly.header.iter().chain(&assembly.entities));
    for r in &records {
        languages.extend(r.extracted.languages().cloned());
    }
    report.languages = languages.into_iter().collect();
    let counts = &mut report.counts;
    counts.entities = assembly.entities.len();
    for e in &assembly.entities {
        match e.kind {
            EntityKind::Class => counts.classes += 1,
            EntityKind::Individual => counts.individuals += 1,
            k if k.is_property() => counts.properties += 1,
            _ => {}
        }
    }
    counts.languages = report.languages.len();
    counts.parsed_triples = assembly.parsed;
    counts.dangling = assembly.dangling.len();
    counts.warnings = report.warnings.len();
    LoadedOntology {
        report,
        records,
        dangling: assembly.dangling,
    }
}

fn write_ontology(out_dir: &Path, loaded: &LoadedOntology) -> Result<Vec<u8>, DataloadError> {
    let dir = out_dir.join(&loaded.report.id);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let records = records_to_jsonl(&loaded.records);
    let path = dir.join(RECORDS_FILE);
    write_atomic(&path, &records).map_err(io_err(&path))?;
    let graph = build_graph(&loaded.report.config, &loaded.records);
    let path = dir.join(GRAPH_FILE);
    write_atomic(&path, &graph.to_bytes()).map_err(io_err(&path))?;
    let path = dir.join(DANGLING_FILE);
    write_atomic(&path, rdf::to_ntriples(&loaded.dangling).as_bytes()).map_err(io_err(&path))?;
    Ok(records)
}

/// SHA-256 over `(ontology id, record file)` pairs, which must come in id order.
pub fn dataset_version<'a>(record_files: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut hasher = Sha256::new();
    for (id, bytes) in record_files {
        hasher.update(id.as_bytes());
        hasher.update([0]);
        hasher.update(bytes);
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads every configured ontology into `out_dir` using up to
/// `options.workers` threads. A failing ontology is reported in the manifest
/// and does not affect the others. The manifest is written last.
pub fn run_dataload(
    configs: &[OntologyConfig],
    out_dir: &Path,
    options: &DataloadOptions<'_>,
) -> Result<DatasetManifest, DataloadError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<(LoadedOntology, Vec<u8>), DataloadError>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    let workers = options.workers.clamp(1, configs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(config) = configs.get(i) else { break };
                log::info!("loading {}", config.id);
                let loaded = load_ontology(config, configs, options.fetcher, options.registry);
                let result = match loaded.report.status {
                    LoadStatus::Success => write_ontology(out_dir, &loaded).map(|bytes| (loaded, bytes)),
                    LoadStatus::Failed => {
                        log::warn!("{}: {}", config.id, loaded.report.error.as_deref().unwrap_or(""));
                        Ok((loaded, Vec::new()))
                    }
                };
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });

    let mut reports = Vec::new();
    let mut record_files = BTreeMap::new();
    let mut documents = Vec::new();
    for (config, slot) in configs.iter().zip(slots) {
        let (loaded, bytes) = slot.into_inner().expect("slot lock").expect("every config is processed")?;
        if loaded.report.status == LoadStatus::Success {
            record_files.insert(config.id.clone(), bytes);
            documents.extend(
                loaded
                    .records
                    .iter()
                    .filter(|r| r.kind != EntityKind::Ontology)
                    .map(|r| r.to_search_document(config)),
            );
        }
        reports.push(loaded.report);
    }
    reports.sort_by(|a, b| a.id.cmp(&b.id));

    let index_dir = out_dir.join(INDEX_DIR);
    std::fs::create_dir_all(&index_dir).map_err(io_err(&index_dir))?;
    let path = index_dir.join(INDEX_FILE);
    write_atomic(&path, &SearchIndex::build(documents).to_bytes()).map_err(io_err(&path))?;
    let path = out_dir.join(REGISTRY_FILE);
    write_atomic(&path, options.registry.to_json().as_bytes()).map_err(io_err(&path))?;

    let manifest = DatasetManifest {
        format: MANIFEST_FORMAT,
        version: dataset_version(record_files.iter().map(|(id, b)| (id.as_str(), b.as_slice()))),
        ontologies: reports,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&path, &json).map_err(io_err(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(id: &str, source: &str, base: &str) -> OntologyConfig {
        parse_config(
            &serde_json::json!({"ontologies":[{"id":id,"source":source,"base_iris":[base]}]}).to_string(),
            None,
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn empty_config_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let registry = Registry::default();
        let opts = DataloadOptions {
            workers: 2,
            fetcher: &FileFetcher,
            registry: &registry,
        };
        let m = run_dataload(&[], dir.path(), &opts).unwrap();
        assert!(m.ontologies.is_empty());
        assert!(dir.path().join(MANIFEST_FILE).exists());
    }

    #[test]
    fn failures_are_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.ttl");
        std::fs::write(
            &src,
            "<http://x/a> a <http://www.w3.org/2002/07/owl#Class> ; <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/b> .",
        )
        .unwrap();
        let configs = [
            config("a", src.to_str().unwrap(), "http://x/"),
            config("b", dir.path().join("missing.ttl").to_str().unwrap(), "http://y/"),
        ];
        let registry = Registry::default();
        let opts = DataloadOptions {
            workers: 2,
            fetcher: &FileFetcher,
            registry: &registry,
        };
        let out = dir.path().join("out");
        let m = run_dataload(&configs, &out, &opts).unwrap();
        assert_eq!(m.ontology("a").unwrap().status, LoadStatus::Success);
        assert_eq!(m.ontology("b").unwrap().status, LoadStatus::Failed);
        let a = m.ontology("a").unwrap();
        // b is only an edge target, so it is a graph stub rather than a record
        assert_eq!(a.counts.classes, 1);
        let records = records_from_jsonl(&std::fs::read(out.join("a").join(RECORDS_FILE)).unwrap()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].edges, [RecordEdge { relation: SUBCLASS_OF.into(), target: "http://x/b".into() }]);
        assert_eq!(records[0].curie.as_deref(), Some("A:a"));

        let again = run_dataload(&configs, &dir.path().join("out2"), &opts).unwrap();
        assert_eq!(again.version, m.version);
        assert_eq!(
            std::fs::read(out.join("a").join(RECORDS_FILE)).unwrap(),
            std::fs::read(dir.path().join("out2").join("a").join(RECORDS_FILE)).unwrap()
        );
    }

    #[test]
    fn edges_follow_configured_relations() {
        let part_of = crate::vocab::obo::PART_OF.to_string();
        let ax = |e: ClassExpression| Axiom {
            axiom: LogicalAxiom::SubClassOf { expression: e },
            source_triples: 1,
            annotations: vec![],
        };
        let some = |p: &str, c: &str| ClassExpression::SomeValuesFrom {
            property: PropertyExpression::named(p),
            filler: Box::new(ClassExpression::named(c)),
        };
        let axioms = [
            ax(ClassExpression::named("http://x/b")),
            ax(ClassExpression::named(owl_ns::THING)),
            ax(some(&part_of, "http://x/lung")),
            ax(some("http://x/q", "http://x/y")),
        ];
        let edges = hierarchy_edges(&axioms, std::slice::from_ref(&part_of));
        assert_eq!(edges.len(), 2);
        assert!(edges.contains(&RecordEdge {
            relation: part_of,
            target: "http://x/lung".into()
        }));
    }
}
