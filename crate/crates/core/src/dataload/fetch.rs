use std::collections::{HashSet, VecDeque};
use std::path::{Path, PathBuf};

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{detect_format, Format, ParseError, RdfParser, Term, Triple};
use crate::vocab::{owl, rdf};

/// Environment variable overriding the download cache directory.
pub const CACHE_DIR_ENV: &str = "OLS_CACHE_DIR";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("{location}: not found")]
    NotFound { location: String },
    #[error("{location}: {message}")]
    Failed { location: String, message: String },
    #[error("{location}: offline and not in the cache")]
    Offline { location: String },
}

/// Resolves a source location (path, `file:` URL or `http(s):` URL) to bytes.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, location: &str) -> Result<Vec<u8>, FetchError>;
}

pub fn is_http(location: &str) -> bool {
    location.starts_with("http://") || location.starts_with("https://")
}

const PATH_ESCAPES: &AsciiSet = &CONTROLS.add(b' ').add(b'"').add(b'#').add(b'%').add(b'<').add(b'>').add(b'?').add(b'`').add(b'{').add(b'}');

/// `file://` URL for an absolute or relative path.
pub fn path_to_file_url(path: &Path) -> String {
    let abs = if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(path)).unwrap_or_else(|_| path.to_path_buf())
    };
    let text = abs.to_string_lossy().replace('\\', "/");
    let text = if text.starts_with('/') { text } else { format!("/{text}") };
    format!("file://{}", utf8_percent_encode(&text, PATH_ESCAPES))
}

/// Filesystem path of a `file:` URL.
pub fn file_url_to_path(url: &str) -> Option<PathBuf> {
    let rest = url.strip_prefix("file://").or_else(|| url.strip_prefix("file:"))?;
    let rest = rest.strip_prefix("localhost").unwrap_or(rest);
    Some(PathBuf::from(percent_decode_str(rest).decode_utf8_lossy().into_owned()))
}

/// Reads plain paths and `file:` URLs; refuses network locations.
#[derive(Debug, Clone, Copy, Default)]
pub struct FileFetcher;

impl Fetcher for FileFetcher {
    fn fetch(&self, location: &str) -> Result<Vec<u8>, FetchError> {
        if is_http(location) {
            return Err(FetchError::Offline {
                location: location.to_string(),
            });
        }
        let path = file_url_to_path(location).unwrap_or_else(|| PathBuf::from(location));
        std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => FetchError::NotFound {
                location: location.to_string(),
            },
            _ => FetchError::Failed {
                location: location.to_string(),
                message: e.to_string(),
            },
        })
    }
}

/// Serves local files directly and network locations through an on-disk
/// cache keyed by the SHA-256 of the URL. Without a network fetcher only
/// cached copies are served.
pub struct CachingFetcher {
    cache_dir: PathBuf,
    network: Option<Box<dyn Fetcher>>,
}

impl CachingFetcher {
    pub fn new(cache_dir: impl Into<PathBuf>, network: Option<Box<dyn Fetcher>>) -> Self {
        CachingFetcher {
            cache_dir: cache_dir.into(),
            network,
        }
    }

    pub fn cache_path(&self, url: &str) -> PathBuf {
        let digest = Sha256::digest(url.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.cache_dir.join(hex)
    }
}

/// `$OLS_CACHE_DIR`, else `$HOME/.cache/ols`, else `.ols-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("ols"),
        None => PathBuf::from(".ols-cache"),
    }
}

impl Fetcher for CachingFetcher {
    fn fetch(&self, location: &str) -> Result<Vec<u8>, FetchError> {
        if !is_http(location) {
            return FileFetcher.fetch(location);
        }
        let cached = self.cache_path(location);
        if let Ok(bytes) = std::fs::read(&cached) {
            return Ok(bytes);
        }
        let network = self.network.as_ref().ok_or_else(|| FetchError::Offline {
            location: location.to_string(),
        })?;
        let bytes = network.fetch(location)?;
        if std::fs::create_dir_all(&self.cache_dir).is_ok() {
            if let Err(e) = super::write_atomic(&cached, &bytes) {
                log::warn!("cannot cache {location}: {e}");
            }
        }
        Ok(bytes)
    }
}

/// One parsed document of an import closure.
#[derive(Debug, Clone)]
pub struct SourceDocument {
    pub location: String,
    pub format: Format,
    pub triples: Vec<Triple>,
}

#[derive(Debug, Clone, Default)]
pub struct ImportClosure {
    pub documents: Vec<SourceDocument>,
    pub warnings: Vec<String>,
}

impl ImportClosure {
    pub fn locations(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.location.as_str()).collect()
    }
}

#[derive(Debug, Error)]
pub enum ClosureError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("{location}: {error}")]
    Parse { location: String, error: ParseError },
}

fn base_for(location: &str) -> String {
    if is_http(location) || location.starts_with("file:") {
        location.to_string()
    } else {
        path_to_file_url(Path::new(location))
    }
}

fn parse_document(location: &str, bytes: &[u8], ordinal: usize) -> Result<SourceDocument, ParseError> {
    let format = detect_format(location, bytes);
    let triples = RdfParser::new(format)
        .with_base_iri(base_for(location))
        .with_document_ordinal(ordinal)
        .parse(bytes)?;
    Ok(SourceDocument {
        location: location.to_string(),
        format,
        triples,
    })
}

/// Breadth-first walk of `owl:imports` from `root`. Each IRI is fetched once;
/// failing imports become warnings.
pub fn import_closure(root: &str, fetcher: &dyn Fetcher) -> Result<ImportClosure, ClosureError> {
    let mut closure = ImportClosure::default();
    let mut visited: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<String> = VecDeque::new();
    visited.insert(root.to_string());
    visited.insert(base_for(root));
    queue.push_back(root.to_string());
    while let Some(location) = queue.pop_front() {
        let is_root = closure.documents.is_empty() && location == root;
        let bytes = match fetcher.fetch(&location) {
            Ok(b) => b,
            Err(e) if is_root => return Err(e.into()),
            Err(e) => {
                closure.warnings.push(format!("import {e}"));
                continue;
            }
        };
        let doc = match parse_document(&location, &bytes, closure.documents.len()) {
            Ok(d) => d,
            Err(error) if is_root => return Err(ClosureError::Parse { location, error }),
            Err(error) => {
                closure.warnings.push(format!("import {location}: {error}"));
                continue;
            }
        };
        let mut headers: HashSet<&str> = HashSet::new();
        for t in &doc.triples {
            if t.predicate == rdf::TYPE && t.object.as_iri() == Some(owl::ONTOLOGY) {
                if let Some(s) = t.subject.as_iri() {
                    headers.insert(s);
                }
            }
        }
        for t in &doc.triples {
            if t.predicate == owl::VERSION_IRI && t.subject.as_iri().is_some_and(|s| headers.contains(s)) {
                if let Term::Iri(v) = &t.object {
                    visited.insert(v.clone());
                }
            }
        }
        visited.extend(headers.iter().map(|h| h.to_string()));
        for t in &doc.triples {
            if t.predicate != owl::IMPORTS {
                continue;
            }
            if let Term::Iri(target) = &t.object {
                if visited.insert(target.clone()) {
                    queue.push_back(target.clone());
                }
            }
        }
        closure.documents.push(doc);
    }
    Ok(closure)
}
