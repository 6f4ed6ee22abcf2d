//! Read side of a dataset directory.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

use crate::dataload::{
    self, dataset_version, records_from_jsonl, DatasetManifest, EntityRecord, LoadStatus, LoadedOntology, OntologyConfig, OntologyReport,
    DANGLING_FILE, GRAPH_FILE, INDEX_DIR, INDEX_FILE, MANIFEST_FILE, RECORDS_FILE, REGISTRY_FILE,
};
use crate::graph::{GraphError, OntologyGraph};
use crate::linker::{Registry, RegistryError};
use crate::rdf::{self, Format, Resource, Term, Triple};
use crate::search::{SearchError, SearchIndex};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

fn read(path: &Path) -> Result<Vec<u8>, DatasetError> {
    std::fs::read(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn malformed(path: &Path, e: impl ToString) -> DatasetError {
    DatasetError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Records of one ontology plus an IRI lookup.
struct Records {
    list: Vec<EntityRecord>,
    by_iri: HashMap<String, usize>,
}

impl Records {
    fn new(list: Vec<EntityRecord>) -> Self {
        let by_iri = list.iter().enumerate().map(|(i, r)| (r.iri.clone(), i)).collect();
        Records { list, by_iri }
    }
}

/// Record file bytes awaiting their first use. They were checked against
/// the manifest version when the dataset was opened.
struct PendingRecords {
    path: PathBuf,
    bytes: Vec<u8>,
}

/// One successfully loaded ontology.
pub struct OntologyData {
    pub report: OntologyReport,
    pub graph: OntologyGraph,
    pub dangling: Vec<Triple>,
    records: OnceLock<Records>,
    pending: Mutex<Option<PendingRecords>>,
}

impl OntologyData {
    pub fn new(report: OntologyReport, records: Vec<EntityRecord>, graph: OntologyGraph, dangling: Vec<Triple>) -> Self {
        OntologyData {
            report,
            graph,
            dangling,
            records: OnceLock::from(Records::new(records)),
            pending: Mutex::new(None),
        }
    }

    /// Parses `bytes` (a record file) on first access instead of now.
    fn deferred(report: OntologyReport, path: PathBuf, bytes: Vec<u8>, graph: OntologyGraph, dangling: Vec<Triple>) -> Self {
        OntologyData {
            report,
            graph,
            dangling,
            records: OnceLock::new(),
            pending: Mutex::new(Some(PendingRecords { path, bytes })),
        }
    }

    fn loaded(&self) -> &Records {
        self.records.get_or_init(|| {
            let pending = self.pending.lock().unwrap_or_else(|e| e.into_inner()).take();
            let PendingRecords { path, bytes } = pending.expect("pending records are taken once");
            let list = records_from_jsonl(&bytes)
                .unwrap_or_else(|e| panic!("{}: verified record file does not parse: {e}", path.display()));
            Records::new(list)
        })
    }

    pub fn records(&self) -> &[EntityRecord] {
        &self.loaded().list
    }

    pub fn config(&self) -> &OntologyConfig {
        &self.report.config
    }

    pub fn record(&self, iri: &str) -> Option<&EntityRecord> {
        let r = self.loaded();
        r.by_iri.get(iri).map(|&i| &r.list[i])
    }

    /// Dangling triples that mention `iri` as subject or object.
    pub fn dangling_for(&self, iri: &str) -> Vec<&Triple> {
        self.dangling
            .iter()
            .filter(|t| matches!(&t.subject, Resource::Iri(s) if s == iri) || matches!(&t.object, Term::Iri(o) if o == iri))
            .collect()
    }
}

/// An immutable dataset. Search works as soon as it is opened; entity
/// records are parsed on first use, or up front via [`Dataset::warm`].
pub struct Dataset {
    pub dir: Option<PathBuf>,
    pub manifest: DatasetManifest,
    pub ontologies: BTreeMap<String, OntologyData>,
    pub index: SearchIndex,
    pub registry: Registry,
    /// IRI to the ids of ontologies holding a record for it.
    owners: OnceLock<HashMap<String, Vec<String>>>,
}

impl Dataset {
    pub fn from_parts(
        dir: Option<PathBuf>,
        manifest: DatasetManifest,
        ontologies: Vec<OntologyData>,
        index: SearchIndex,
        registry: Registry,
    ) -> Self {
        Dataset {
            dir,
            manifest,
            ontologies: ontologies.into_iter().map(|o| (o.report.id.clone(), o)).collect(),
            index,
            registry,
            owners: OnceLock::new(),
        }
    }

    /// Builds a dataset from in-memory load results.
    pub fn from_loaded(manifest: DatasetManifest, loaded: Vec<LoadedOntology>, registry: Registry) -> Self {
        let mut docs = Vec::new();
        let mut ontologies = Vec::new();
        for l in loaded.into_iter().filter(|l| l.report.status == LoadStatus::Success) {
            let config = &l.report.config;
            docs.extend(
                l.records
                    .iter()
                    .filter(|r| r.kind != crate::owl::EntityKind::Ontology)
                    .map(|r| r.to_search_document(config)),
            );
            let graph = dataload::build_graph(config, &l.records);
            ontologies.push(OntologyData::new(l.report, l.records, graph, l.dangling));
        }
        Self::from_parts(None, manifest, ontologies, SearchIndex::build(docs), registry)
    }

    /// Parses every deferred record file now.
    pub fn warm(&self) {
        self.owner_map();
    }

    pub fn open(dir: &Path) -> Result<Self, DatasetError> {
        let path = dir.join(MANIFEST_FILE);
        let manifest: DatasetManifest = serde_json::from_slice(&read(&path)?).map_err(|e| malformed(&path, e))?;
        let path = dir.join(REGISTRY_FILE);
        let registry = match std::fs::read_to_string(&path) {
            Ok(text) => Registry::from_json(&text).map_err(|e: RegistryError| malformed(&path, e))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Registry::default(),
            Err(source) => return Err(DatasetError::Io { path, source }),
        };
        let mut ontologies = Vec::new();
        let mut record_files = BTreeMap::new();
        for report in manifest.ontologies.iter().filter(|o| o.status == LoadStatus::Success) {
            let sub = dir.join(&report.id);
            let path = sub.join(RECORDS_FILE);
            record_files.insert(report.id.as_str(), (read(&path)?, path));
        }
        let version = dataset_version(record_files.iter().map(|(id, (bytes, _))| (*id, bytes.as_slice())));
        if version != manifest.version {
            let path = dir.join(MANIFEST_FILE);
            return Err(malformed(&path, "record files do not match the manifest version"));
        }
        for report in manifest.ontologies.iter().filter(|o| o.status == LoadStatus::Success) {
            let sub = dir.join(&report.id);
            let (bytes, records_path) = record_files.remove(report.id.as_str()).expect("read above");
            let path = sub.join(GRAPH_FILE);
            let graph = OntologyGraph::from_bytes(&read(&path)?).map_err(|e: GraphError| malformed(&path, e))?;
            let path = sub.join(DANGLING_FILE);
            let dangling = rdf::parse(&read(&path)?, Format::NTriples, "").map_err(|e| malformed(&path, e))?;
            ontologies.push(OntologyData::deferred(report.clone(), records_path, bytes, graph, dangling));
        }
        let path = dir.join(INDEX_DIR).join(INDEX_FILE);
        let index = SearchIndex::from_bytes(&read(&path)?).map_err(|e: SearchError| malformed(&path, e))?;
        Ok(Self::from_parts(Some(dir.to_path_buf()), manifest, ontologies, index, registry))
    }

    pub fn version(&self) -> &str {
        &self.manifest.version
    }

    pub fn ontology(&self, id: &str) -> Option<&OntologyData> {
        self.ontologies.get(id)
    }

    pub fn record(&self, ontology_id: &str, iri: &str) -> Option<&EntityRecord> {
        self.ontology(ontology_id)?.record(iri)
    }

    fn owner_map(&self) -> &HashMap<String, Vec<String>> {
        self.owners.get_or_init(|| {
            let mut owners: HashMap<String, Vec<String>> = HashMap::new();
            for (id, o) in &self.ontologies {
                for r in o.records() {
                    owners.entry(r.iri.clone()).or_default().push(id.clone());
                }
            }
            owners
        })
    }

    /// Ontologies holding a record for `iri`, id-sorted.
    pub fn owners(&self, iri: &str) -> &[String] {
        self.owner_map().get(iri).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Best record to describe `iri` from the perspective of `context`: the
    /// context ontology's copy, then the defining ontology's, then any.
    pub fn describe(&self, iri: &str, context: &str) -> Option<&EntityRecord> {
        if let Some(r) = self.record(context, iri) {
            return Some(r);
        }
        let owners = self.owners(iri);
        let first = owners.first()?;
        let defining = owners.iter().find_map(|o| {
            let r = self.record(o, iri)?;
            (r.defining_ontology.as_deref() == Some(o.as_str())).then_some(r)
        });
        defining.or_else(|| self.record(first, iri))
    }
}
