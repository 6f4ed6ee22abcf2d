use oxiri::Iri;

/// Resolves `reference` against `base` (RFC 3987). Without a base the
/// reference must already be absolute.
pub fn resolve_iri(base: Option<&str>, reference: &str) -> Result<String, String> {
    match base {
        Some(base) => {
            let base = Iri::parse(base).map_err(|e| format!("invalid base IRI <{base}>: {e}"))?;
            base.resolve(reference)
                .map(|iri| iri.into_inner())
                .map_err(|e| format!("invalid IRI <{reference}>: {e}"))
        }
        None => Iri::parse(reference)
            .map(|iri| iri.into_inner().to_string())
            .map_err(|e| format!("relative or invalid IRI <{reference}> with no base: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_relative_references() {
        let base = Some("http://example.org/onto/efo.ttl");
        assert_eq!(resolve_iri(base, "chebi.ttl").unwrap(), "http://example.org/onto/chebi.ttl");
        assert_eq!(resolve_iri(base, "#x").unwrap(), "http://example.org/onto/efo.ttl#x");
        assert_eq!(resolve_iri(base, "../a").unwrap(), "http://example.org/a");
        assert_eq!(resolve_iri(base, "urn:x:y").unwrap(), "urn:x:y");
    }

    #[test]
    fn rejects_relative_without_base() {
        assert!(resolve_iri(None, "foo").is_err());
        assert_eq!(resolve_iri(None, "http://x/y").unwrap(), "http://x/y");
    }
}
