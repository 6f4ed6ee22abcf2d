//! RDF front end: a uniform triple model plus Turtle, N-Triples and RDF/XML readers.
//!
//! Every reader produces [`Triple`]s with absolute IRIs and blank-node ids that are
//! namespaced by a per-document ordinal, so the triples of several documents in
//! one import closure can be concatenated without aliasing.

mod iri;
mod ntriples;
mod rdfxml;
mod turtle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab;

pub use iri::resolve_iri;
pub use ntriples::{to_ntriples, write_ntriples_line};

/// Subject position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Resource {
    Iri(String),
    Blank(String),
}

impl Resource {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Resource::Iri(iri) => Some(iri),
            Resource::Blank(_) => None,
        }
    }

    pub fn as_blank(&self) -> Option<&str> {
        match self {
            Resource::Blank(id) => Some(id),
            Resource::Iri(_) => None,
        }
    }
}

/// An RDF literal. `language` is only set when `datatype` is `rdf:langString`
/// and is always lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub datatype: String,
    pub language: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::xsd::STRING.to_string(),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, tag: &str) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::rdf::LANG_STRING.to_string(),
            language: Some(tag.to_ascii_lowercase()),
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        Literal {
            lexical: lexical.into(),
            datatype,
            language: None,
        }
    }
}

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&str> {
        match self {
            Term::Blank(id) => Some(id),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }
}

impl From<Resource> for Term {
    fn from(r: Resource) -> Self {
        match r {
            Resource::Iri(i) => Term::Iri(i),
            Resource::Blank(b) => Term::Blank(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Resource,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Resource, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut line = String::new();
        write_ntriples_line(self, &mut line);
        f.write_str(line.trim_end())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Turtle,
    RdfXml,
    NTriples,
}

/// Picks a serialization from the file extension, falling back to sniffing
/// the leading bytes and finally to Turtle.
pub fn detect_format(filename: &str, leading_bytes: &[u8]) -> Format {
    let name = filename.rsplit(['/', '\\']).next().unwrap_or(filename);
    let name = name.split(['?', '#']).next().unwrap_or(name);
    if let Some((_, ext)) = name.rsplit_once('.') {
        match ext.to_ascii_lowercase().as_str() {
            "ttl" => return Format::Turtle,
            "nt" => return Format::NTriples,
            "owl" | "rdf" | "xml" => return Format::RdfXml,
            _ => {}
        }
    }
    let text = String::from_utf8_lossy(&leading_bytes[..leading_bytes.len().min(1024)]);
    let trimmed = text.trim_start_matches('\u{feff}').trim_start();
    if trimmed.starts_with("<?xml") || trimmed.starts_with("<rdf:RDF") {
        Format::RdfXml
    } else {
        Format::Turtle
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("RDF/XML error at {path}: {message}")]
    RdfXml { path: String, message: String },
    #[error("unsupported RDF/XML construct {construct} at {path}")]
    Unsupported { construct: String, path: String },
}

/// Configured reader for one document.
#[derive(Debug, Clone)]
pub struct RdfParser {
    format: Format,
    base_iri: Option<String>,
    document: usize,
}

impl RdfParser {
    pub fn new(format: Format) -> Self {
        RdfParser {
            format,
            base_iri: None,
            document: 0,
        }
    }

    pub fn with_base_iri(mut self, base: impl Into<String>) -> Self {
        self.base_iri = Some(base.into());
        self
    }

    /// Ordinal of the document within a load; prefixes every blank-node id.
    pub fn with_document_ordinal(mut self, ordinal: usize) -> Self {
        self.document = ordinal;
        self
    }

    pub fn parse(&self, input: &[u8]) -> Result<Vec<Triple>, ParseError> {
        let mut out = Vec::new();
        self.parse_with(input, |t| out.push(t))?;
        Ok(out)
    }

    pub fn parse_with<F: FnMut(Triple)>(&self, input: &[u8], sink: F) -> Result<(), ParseError> {
        let blanks = BlankNamer::new(self.document);
        match self.format {
            Format::Turtle => turtle::parse(input, self.base_iri.as_deref(), blanks, false, sink),
            Format::NTriples => turtle::parse(input, None, blanks, true, sink),
            Format::RdfXml => rdfxml::parse(input, self.base_iri.as_deref(), blanks, sink),
        }
    }
}

/// Parses a whole document with document ordinal 0.
pub fn parse(input: &[u8], format: Format, base_iri: &str) -> Result<Vec<Triple>, ParseError> {
    RdfParser::new(format).with_base_iri(base_iri).parse(input)
}

/// Issues document-scoped blank-node ids.
#[derive(Debug)]
pub(crate) struct BlankNamer {
    document: usize,
    generated: usize,
}

impl BlankNamer {
    pub(crate) fn new(document: usize) -> Self {
        BlankNamer {
            document,
            generated: 0,
        }
    }

    pub(crate) fn labeled(&self, label: &str) -> String {
        format!("d{}x{}", self.document, label)
    }

    pub(crate) fn fresh(&mut self) -> String {
        self.generated += 1;
        format!("d{}g{}", self.document, self.generated)
    }
}

/// Line and column (1-based, columns in characters) of a byte offset.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_by_extension() {
        assert_eq!(detect_format("efo.ttl", b""), Format::Turtle);
        assert_eq!(detect_format("mondo.owl", b"<?xml version"), Format::RdfXml);
        assert_eq!(detect_format("x.nt", b""), Format::NTriples);
        assert_eq!(detect_format("http://x/a.rdf?v=1", b""), Format::RdfXml);
    }

    #[test]
    fn detect_by_sniffing() {
        assert_eq!(detect_format("data.bin", b"@prefix o: <http://x/> ."), Format::Turtle);
        assert_eq!(detect_format("data", b"  <rdf:RDF xmlns:rdf=\"...\">"), Format::RdfXml);
        assert_eq!(detect_format("data", b"<?xml version=\"1.0\"?>"), Format::RdfXml);
        assert_eq!(detect_format("", b""), Format::Turtle);
    }

    #[test]
    fn language_tags_are_lowercased() {
        assert_eq!(Literal::lang("x", "EN-gb").language.as_deref(), Some("en-gb"));
    }

    #[test]
    fn line_col_counts_chars() {
        assert_eq!(line_col("ab\ncé d", 7), (2, 4));
        assert_eq!(line_col("", 0), (1, 1));
    }
}
