//! Query-string and path-segment parsing with problem-shaped errors.

use std::collections::BTreeMap;

use axum::extract::FromRequestParts;
use axum::http::request::Parts;
use ols_core::search::MAX_PAGE_SIZE;
use percent_encoding::percent_decode_str;
use serde::Serialize;

use crate::ApiError;

/// Query parameters; the first occurrence of a key wins.
#[derive(Debug, Default)]
pub struct Params(BTreeMap<String, String>);

impl<S: Send + Sync> FromRequestParts<S> for Params {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, ApiError> {
        let pairs: Vec<(String, String)> = serde_urlencoded::from_str(parts.uri.query().unwrap_or(""))
            .map_err(|e| ApiError::bad_request(format!("malformed query string: {e}")))?;
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            map.entry(k).or_insert(v);
        }
        Ok(Params(map))
    }
}

impl Params {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn flag(&self, key: &str) -> Result<bool, ApiError> {
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(ApiError::bad_request(format!("{key} must be true or false, got '{v}'"))),
        }
    }

    pub fn number(&self, key: &str) -> Result<Option<usize>, ApiError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| ApiError::bad_request(format!("{key} must be a non-negative integer"))))
            .transpose()
    }

    /// `(page, size)`; size must lie in 1..=500.
    pub fn paging(&self, default_size: usize) -> Result<(usize, usize), ApiError> {
        let page = self.number("page")?.unwrap_or(0);
        let size = match self.0.get("size") {
            Some(_) => self.number("size")?.unwrap_or(0),
            None => default_size,
        };
        if size == 0 || size > MAX_PAGE_SIZE {
            return Err(ApiError::bad_request(format!("size must be between 1 and {MAX_PAGE_SIZE}")));
        }
        Ok((page, size))
    }

    /// Comma-separated list.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect())
    }
}

/// The request path split on `/`, still percent-encoded. The router decodes
/// captures once, which would lose the outer layer of an IRI segment.
#[derive(Debug)]
pub struct Segments(Vec<String>);

impl<S: Send + Sync> FromRequestParts<S> for Segments {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, ApiError> {
        Ok(Segments(parts.uri.path().split('/').skip(1).map(str::to_string).collect()))
    }
}

impl Segments {
    pub fn raw(&self, i: usize) -> &str {
        self.0.get(i).map(String::as_str).unwrap_or("")
    }

    /// Plain (singly encoded) segment such as an ontology id.
    pub fn plain(&self, i: usize) -> Result<String, ApiError> {
        decode_once(self.raw(i))
    }

    pub fn iri(&self, i: usize) -> Result<String, ApiError> {
        decode_iri(self.raw(i))
    }
}

fn decode_once(s: &str) -> Result<String, ApiError> {
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'%' && !(i + 2 < bytes.len() && bytes[i + 1].is_ascii_hexdigit() && bytes[i + 2].is_ascii_hexdigit()) {
            return Err(ApiError::bad_request(format!("malformed percent-encoding in '{s}'")));
        }
    }
    percent_decode_str(s)
        .decode_utf8()
        .map(|c| c.into_owned())
        .map_err(|_| ApiError::bad_request(format!("'{s}' does not decode to UTF-8")))
}

/// Decodes a double-URL-encoded IRI path segment. The router hands over the
/// raw segment, so both layers are undone here.
pub fn decode_iri(raw: &str) -> Result<String, ApiError> {
    let iri = decode_once(&decode_once(raw)?)?;
    if !iri.contains(':') || iri.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(ApiError::bad_request(format!("'{iri}' is not an absolute IRI")));
    }
    Ok(iri)
}

/// Inverse of [`decode_iri`].
pub fn encode_iri(iri: &str) -> String {
    let once = percent_encoding::utf8_percent_encode(iri, percent_encoding::NON_ALPHANUMERIC).to_string();
    percent_encoding::utf8_percent_encode(&once, percent_encoding::NON_ALPHANUMERIC).to_string()
}

#[derive(Debug, Serialize)]
pub struct Page<T> {
    pub page: usize,
    pub size: usize,
    pub total_elements: usize,
    pub total_pages: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    pub items: Vec<T>,
}

impl<T> Page<T> {
    pub fn slice(all: Vec<T>, page: usize, size: usize) -> Self {
        let total = all.len();
        let items = all.into_iter().skip(page.saturating_mul(size)).take(size).collect();
        Self::of(items, total, page, size)
    }

    pub fn of(items: Vec<T>, total: usize, page: usize, size: usize) -> Self {
        Page {
            page,
            size,
            total_elements: total,
            total_pages: total.div_ceil(size),
            truncated: None,
            items,
        }
    }

    pub fn map<U>(self, f: impl FnMut(T) -> U) -> Page<U> {
        Page {
            page: self.page,
            size: self.size,
            total_elements: self.total_elements,
            total_pages: self.total_pages,
            truncated: self.truncated,
            items: self.items.into_iter().map(f).collect(),
        }
    }
}
