use axum::Json;
use serde_json::{json, Value};

fn param(name: &str, location: &str, required: bool, description: &str) -> Value {
    json!({
        "name": name,
        "in": location,
        "required": required,
        "schema": { "type": "string" },
        "description": description,
    })
}

fn paging() -> Vec<Value> {
    vec![
        param("page", "query", false, "0-based page number"),
        param("size", "query", false, "page size, 1..500, default 20"),
    ]
}

fn op(summary: &str, params: Vec<Value>) -> Value {
    json!({
        "get": {
            "summary": summary,
            "parameters": params,
            "responses": {
                "200": { "description": "OK" },
                "400": { "description": "invalid parameter", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Problem" } } } },
                "404": { "description": "not found", "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Problem" } } } },
            }
        }
    })
}

fn with(mut base: Vec<Value>, extra: Vec<Value>) -> Vec<Value> {
    base.extend(extra);
    base
}

pub fn document() -> Value {
    let id = || param("id", "path", true, "ontology id (lowercase)");
    let iri = || param("iri", "path", true, "entity IRI, URL-encoded twice, e.g. http%253A%252F%252Fpurl.obolibrary.org%252Fobo%252FUBERON_0002048");
    let kind = || param("kind", "path", true, "classes, properties, individuals or entities");
    let lang = || param("lang", "query", false, "language tag; falls back to the ontology default");
    let relations = || param("relations", "query", false, "comma-separated hierarchical property IRIs or CURIEs, subclass_of, or all");
    json!({
        "openapi": "3.0.3",
        "info": { "title": "Ontology lookup API", "version": env!("CARGO_PKG_VERSION") },
        "paths": {
            "/health": op("service status and dataset version; 503 when no dataset is loaded", vec![]),
            "/api/v2/ontologies": op("ontology summaries, id-sorted", paging()),
            "/api/v2/ontologies/{id}": op("configuration, load statistics and languages of one ontology", vec![id()]),
            "/api/v2/ontologies/{id}/roots": op("top-level classes", with(paging(), vec![id(), relations(), lang(), param("includeObsolete", "query", false, "true or false")])),
            "/api/v2/ontologies/{id}/{kind}/{iri}": op("entity view with rendered axioms, reified annotations and linked entities", vec![id(), kind(), iri(), lang()]),
            "/api/v2/ontologies/{id}/{kind}/{iri}/{rel}": op(
                "hierarchy listing; rel is parents, children, ancestors or descendants",
                with(paging(), vec![id(), kind(), iri(), param("rel", "path", true, "listing"), relations(), lang()]),
            ),
            "/api/v2/search": op("tiered full-text search", with(paging(), vec![
                param("q", "query", true, "query text"),
                param("ontology", "query", false, "restrict to one ontology"),
                lang(),
                param("exact", "query", false, "exact label, synonym or identifier matches only"),
                param("includeObsolete", "query", false, "include obsolete entities"),
            ])),
            "/api/v2/suggest": op("label autocompletion", vec![
                param("q", "query", true, "label prefix"),
                param("ontology", "query", false, "restrict to one ontology"),
                lang(),
                param("limit", "query", false, "1..100, default 10"),
            ]),
            "/api/ontologies/{id}/terms": op("flat term view by ?iri=, or a page of terms", with(paging(), vec![id(), param("iri", "query", false, "entity IRI")])),
            "/api/ontologies/{id}/terms/{iri}": op("flat term view", vec![id(), iri()]),
            "/api/ontologies/{id}/terms/{iri}/{rel}": op("flat parents, children, ancestors or descendants", with(paging(), vec![id(), iri(), param("rel", "path", true, "listing")])),
        },
        "components": {
            "schemas": {
                "Problem": {
                    "type": "object",
                    "properties": {
                        "status": { "type": "integer" },
                        "error": { "type": "string" },
                        "message": { "type": "string" },
                        "path": { "type": "string" },
                    }
                }
            }
        }
    })
}

pub async fn docs() -> Json<Value> {
    Json(document())
}
