use std::sync::Arc;

use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ols_core::dataload::EntityRecord;
use ols_core::dataset::{Dataset, OntologyData};
use ols_core::graph::{GraphError, RelationFilter, DEFAULT_CAP};
use ols_core::owl::EntityKind;
use ols_core::search::{SearchError, SearchQuery};
use serde_json::json;

use crate::params::{Page, Params, Segments};
use crate::views::{self, NodeSummary, OntologySummary, V1_RELATIONS};
use crate::{ApiError, AppState};

type ApiResult = Result<Response, ApiError>;

const HIERARCHY: [&str; 4] = ["parents", "children", "ancestors", "descendants"];
const DEFAULT_SUGGEST_LIMIT: usize = 10;
const MAX_SUGGEST_LIMIT: usize = 100;

fn dataset(state: &AppState) -> Result<Arc<Dataset>, ApiError> {
    state.current().ok_or_else(ApiError::unavailable)
}

fn ontology<'d>(ds: &'d Dataset, id: &str) -> Result<&'d OntologyData, ApiError> {
    ds.ontology(id).ok_or_else(|| ApiError::not_found(format!("unknown ontology '{id}'")))
}

fn kind_matches(segment: &str, kind: EntityKind) -> Result<bool, ApiError> {
    Ok(match segment {
        "classes" => kind == EntityKind::Class,
        "properties" => kind.is_property(),
        "individuals" => kind == EntityKind::Individual,
        "entities" => true,
        other => return Err(ApiError::not_found(format!("unknown entity type '{other}'"))),
    })
}

fn graph_error(e: GraphError) -> ApiError {
    match e {
        GraphError::NotFound(iri) => ApiError::not_found(format!("'{iri}' is not in the hierarchy")),
        GraphError::UnknownRelation(r) => ApiError::bad_request(format!("unknown relation '{r}'")),
        other => ApiError::new(axum::http::StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

fn search_error(e: SearchError) -> ApiError {
    match e {
        SearchError::EmptyQuery | SearchError::InvalidParameter(_) => ApiError::bad_request(e.to_string()),
        SearchError::Corrupt(_) => ApiError::new(axum::http::StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

/// The `relations` parameter: configured property IRIs, CURIEs of them,
/// `subclass_of`, or `all`. Absent means subclass edges only.
fn relation_filter(ds: &Dataset, data: &OntologyData, params: &Params) -> Result<RelationFilter, ApiError> {
    let names = params.list("relations").map(|names| {
        names
            .into_iter()
            .map(|n| {
                if n == "all" || data.graph.relations().contains(&n) {
                    n
                } else {
                    ds.registry.expand_str(&n).filter(|iri| data.graph.relations().contains(iri)).unwrap_or(n)
                }
            })
            .collect::<Vec<_>>()
    });
    data.graph.filter(names.as_deref()).map_err(graph_error)
}

fn record_in<'d>(data: &'d OntologyData, kind: &str, iri: &str) -> Result<&'d EntityRecord, ApiError> {
    let missing = || ApiError::not_found(format!("'{iri}' is not an entity of this type in '{}'", data.report.id));
    let r = data.record(iri).ok_or_else(missing)?;
    if !kind_matches(kind, r.kind)? {
        return Err(missing());
    }
    Ok(r)
}

pub async fn health(State(state): State<Arc<AppState>>) -> ApiResult {
    let ds = dataset(&state)?;
    Ok(Json(json!({
        "status": "ok",
        "version": ds.version(),
        "ontologies": ds.ontologies.len(),
    }))
    .into_response())
}

pub async fn list_ontologies(State(state): State<Arc<AppState>>, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let (page, size) = params.paging(state.default_page_size)?;
    let all: Vec<OntologySummary> = ds.manifest.ontologies.iter().map(OntologySummary::new).collect();
    Ok(Json(Page::slice(all, page, size)).into_response())
}

pub async fn ontology_detail(State(state): State<Arc<AppState>>, seg: Segments) -> ApiResult {
    let ds = dataset(&state)?;
    let id = seg.plain(3)?;
    let report = ds
        .manifest
        .ontology(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown ontology '{id}'")))?;
    Ok(Json(json!({
        "summary": OntologySummary::new(report),
        "config": report.config,
        "counts": report.counts,
        "documents": report.documents,
        "warnings": report.warnings,
        "error": report.error,
        "duration_ms": report.duration_ms,
        "languages": report.languages,
    }))
    .into_response())
}

pub async fn roots(State(state): State<Arc<AppState>>, seg: Segments, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(3)?)?;
    let filter = relation_filter(&ds, data, &params)?;
    let (page, size) = params.paging(state.default_page_size)?;
    let lang = params.get("lang");
    let nodes = data.graph.roots(&filter, params.flag("includeObsolete")?);
    let items: Vec<NodeSummary> = nodes.into_iter().map(|n| views::node_summary(&ds, n, lang)).collect();
    Ok(Json(Page::slice(items, page, size)).into_response())
}

pub async fn entity(State(state): State<Arc<AppState>>, seg: Segments, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(3)?)?;
    kind_matches(seg.raw(4), EntityKind::Class)?;
    let iri = seg.iri(5)?;
    let r = record_in(data, seg.raw(4), &iri)?;
    Ok(Json(views::v2_view(&ds, data, r, params.get("lang"))).into_response())
}

pub async fn hierarchy(State(state): State<Arc<AppState>>, seg: Segments, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(3)?)?;
    let kind = seg.raw(4);
    kind_matches(kind, EntityKind::Class)?;
    let rel = seg.raw(6);
    if !HIERARCHY.contains(&rel) {
        return Err(ApiError::not_found(format!("unknown listing '{rel}'")));
    }
    let iri = seg.iri(5)?;
    // Stub nodes (referenced but undeclared) stay navigable.
    if data.record(&iri).is_some() {
        record_in(data, kind, &iri)?;
    } else if !data.graph.contains(&iri) {
        return Err(ApiError::not_found(format!("'{iri}' is not in '{}'", data.report.id)));
    }
    let filter = relation_filter(&ds, data, &params)?;
    let (page, size) = params.paging(state.default_page_size)?;
    let lang = params.get("lang");
    let g = &data.graph;
    let (nodes, truncated) = match rel {
        "parents" => (g.parents(&iri, &filter).map_err(graph_error)?, None),
        "children" => (g.children(&iri, &filter).map_err(graph_error)?, None),
        "ancestors" => {
            let t = g.ancestors(&iri, &filter, DEFAULT_CAP).map_err(graph_error)?;
            (t.nodes, Some(t.truncated))
        }
        _ => {
            let t = g.descendants(&iri, &filter, DEFAULT_CAP).map_err(graph_error)?;
            (t.nodes, Some(t.truncated))
        }
    };
    let mut out = Page::slice(nodes, page, size).map(|n| views::node_summary(&ds, n, lang));
    out.truncated = truncated;
    Ok(Json(out).into_response())
}

pub async fn search(State(state): State<Arc<AppState>>, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let q = params.get("q").ok_or_else(|| ApiError::bad_request("missing required parameter 'q'"))?;
    let (page, size) = params.paging(state.default_page_size)?;
    let query = SearchQuery {
        q: q.to_string(),
        ontology: params.get("ontology").map(str::to_string),
        lang: params.get("lang").map(str::to_string),
        exact: params.flag("exact")?,
        include_obsolete: params.flag("includeObsolete")?,
    };
    let (total, hits) = ds.index.search(&query, page, size).map_err(search_error)?;
    Ok(Json(Page::of(hits, total, page, size)).into_response())
}

pub async fn suggest(State(state): State<Arc<AppState>>, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let q = params.get("q").ok_or_else(|| ApiError::bad_request("missing required parameter 'q'"))?;
    let limit = params.number("limit")?.unwrap_or(DEFAULT_SUGGEST_LIMIT);
    if limit == 0 || limit > MAX_SUGGEST_LIMIT {
        return Err(ApiError::bad_request(format!("limit must be between 1 and {MAX_SUGGEST_LIMIT}")));
    }
    let suggestions = ds
        .index
        .suggest(q, params.get("ontology"), params.get("lang"), limit)
        .map_err(search_error)?;
    Ok(Json(json!({ "q": q, "suggestions": suggestions })).into_response())
}

pub async fn v1_terms(State(state): State<Arc<AppState>>, seg: Segments, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(2)?)?;
    if let Some(iri) = params.get("iri") {
        let r = data.record(iri).ok_or_else(|| ApiError::not_found(format!("'{iri}' is not in '{}'", data.report.id)))?;
        return Ok(Json(views::v1_view(data, r)).into_response());
    }
    let (page, size) = params.paging(state.default_page_size)?;
    let terms: Vec<&EntityRecord> = data.records().iter().filter(|r| r.kind == EntityKind::Class).collect();
    Ok(Json(Page::slice(terms, page, size).map(|r| views::v1_view(data, r))).into_response())
}

pub async fn v1_term(State(state): State<Arc<AppState>>, seg: Segments) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(2)?)?;
    let iri = seg.iri(4)?;
    let r = data.record(&iri).ok_or_else(|| ApiError::not_found(format!("'{iri}' is not in '{}'", data.report.id)))?;
    Ok(Json(views::v1_view(data, r)).into_response())
}

pub async fn v1_related(State(state): State<Arc<AppState>>, seg: Segments, params: Params) -> ApiResult {
    let ds = dataset(&state)?;
    let data = ontology(&ds, &seg.plain(2)?)?;
    let rel = seg.raw(5);
    if !V1_RELATIONS.contains(&rel) {
        return Err(ApiError::not_found(format!("unknown listing '{rel}'")));
    }
    let iri = seg.iri(4)?;
    let (page, size) = params.paging(state.default_page_size)?;
    let g = &data.graph;
    let f = g.subclass_filter();
    let nodes = match rel {
        "parents" => g.parents(&iri, &f),
        "children" => g.children(&iri, &f),
        "ancestors" => g.ancestors(&iri, &f, DEFAULT_CAP).map(|t| t.nodes),
        _ => g.descendants(&iri, &f, DEFAULT_CAP).map(|t| t.nodes),
    }
    .map_err(graph_error)?;
    let out = Page::slice(nodes, page, size).map(|n| match data.record(&n.iri) {
        Some(r) => views::v1_view(data, r),
        None => views::v1_stub(data, n),
    });
    Ok(Json(out).into_response())
}
