//! Read-only HTTP API over a loaded dataset.
//!
//! Handlers read an immutable [`Dataset`] snapshot; [`AppState::swap`]
//! replaces it atomically while in-flight requests finish on the old one.

mod error;
mod openapi;
pub mod params;
mod routes;
pub mod views;

use std::future::Future;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::http::Method;
use axum::routing::get;
use axum::{middleware, Router};
use ols_core::dataset::{Dataset, DatasetError};
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
pub use params::{decode_iri, encode_iri};

pub const DEFAULT_PAGE_SIZE: usize = 20;

pub struct AppState {
    snapshot: RwLock<Option<Arc<Dataset>>>,
    pub default_page_size: usize,
}

impl AppState {
    pub fn new(dataset: Option<Dataset>, default_page_size: usize) -> Arc<Self> {
        Arc::new(AppState {
            snapshot: RwLock::new(dataset.map(Arc::new)),
            default_page_size,
        })
    }

    pub fn current(&self) -> Option<Arc<Dataset>> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Installs a new snapshot and returns the previous one.
    pub fn swap(&self, dataset: Dataset) -> Option<Arc<Dataset>> {
        let mut slot = self.snapshot.write().unwrap_or_else(|e| e.into_inner());
        slot.replace(Arc::new(dataset))
    }

    /// Opens `dir`, parses its records and swaps it in; returns the new
    /// version. A failed open leaves the current snapshot serving.
    pub fn reload(&self, dir: &Path) -> Result<String, DatasetError> {
        let ds = Dataset::open(dir)?;
        ds.warm();
        let version = ds.version().to_string();
        self.swap(ds);
        Ok(version)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods([Method::GET, Method::HEAD, Method::OPTIONS]);
    Router::new()
        .route("/health", get(routes::health))
        .route("/api/docs", get(openapi::docs))
        .route("/api/v2/ontologies", get(routes::list_ontologies))
        .route("/api/v2/ontologies/{id}", get(routes::ontology_detail))
        .route("/api/v2/ontologies/{id}/roots", get(routes::roots))
        .route("/api/v2/ontologies/{id}/{kind}/{iri}", get(routes::entity))
        .route("/api/v2/ontologies/{id}/{kind}/{iri}/{rel}", get(routes::hierarchy))
        .route("/api/v2/search", get(routes::search))
        .route("/api/v2/suggest", get(routes::suggest))
        .route("/api/ontologies/{id}/terms", get(routes::v1_terms))
        .route("/api/ontologies/{id}/terms/{iri}", get(routes::v1_term))
        .route("/api/ontologies/{id}/terms/{iri}/{rel}", get(routes::v1_related))
        .fallback(error::no_route)
        .method_not_allowed_fallback(error::method_not_allowed)
        .layer(middleware::from_fn(error::attach_path))
        .layer(cors)
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
