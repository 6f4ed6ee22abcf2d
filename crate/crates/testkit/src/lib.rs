//! Oracles that recompute results the slow, obvious way, plus seeded
//! generators for randomized fixtures. Nothing here shares code with the
//! implementations it checks beyond the plain data types.

pub mod gen;
pub mod graph;
pub mod iso;
pub mod search;

pub use iso::isomorphic;

use std::path::{Path, PathBuf};

use ols_core::dataload::{load_config, run_dataload, DataloadOptions, DatasetManifest, FileFetcher, OntologyConfig};
use ols_core::linker::{load_registry, Registry};

/// The checked-in fixture corpus.
pub fn corpus_dir() -> PathBuf {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus");
    std::fs::canonicalize(&dir).unwrap_or(dir)
}

pub fn corpus_configs() -> Vec<OntologyConfig> {
    load_config(&corpus_dir().join("config.json")).expect("fixture config loads")
}

pub fn corpus_registry() -> Registry {
    load_registry(&corpus_dir().join("registry.json")).expect("fixture registry loads")
}

/// Loads the fixture corpus into `out`.
pub fn load_corpus(out: &Path) -> DatasetManifest {
    let registry = corpus_registry();
    let options = DataloadOptions {
        workers: 2,
        fetcher: &FileFetcher,
        registry: &registry,
    };
    run_dataload(&corpus_configs(), out, &options).expect("fixture dataload")
}
