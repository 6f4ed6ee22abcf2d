use std::fmt::Write;

use super::{Resource, Term, Triple};
use crate::vocab;

fn escape_into(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn iri_into(out: &mut String, iri: &str) {
    out.push('<');
    for c in iri.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

fn blank_into(out: &mut String, id: &str) {
    out.push_str("_:");
    out.push_str(id);
}

/// Appends one N-Triples line (with trailing newline) for `triple`.
pub fn write_ntriples_line(triple: &Triple, out: &mut String) {
    match &triple.subject {
        Resource::Iri(i) => iri_into(out, i),
        Resource::Blank(b) => blank_into(out, b),
    }
    out.push(' ');
    iri_into(out, &triple.predicate);
    out.push(' ');
    match &triple.object {
        Term::Iri(i) => iri_into(out, i),
        Term::Blank(b) => blank_into(out, b),
        Term::Literal(lit) => {
            out.push('"');
            escape_into(out, &lit.lexical);
            out.push('"');
            if let Some(lang) = &lit.language {
                out.push('@');
                out.push_str(lang);
            } else if lit.datatype != vocab::xsd::STRING {
                out.push_str("^^");
                iri_into(out, &lit.datatype);
            }
        }
    }
    out.push_str(" .\n");
}

/// Serializes triples as an N-Triples document, one triple per line, in input order.
pub fn to_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        write_ntriples_line(t, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Format, Literal, RdfParser};

    #[test]
    fn round_trips_escapes() {
        let t = Triple::new(
            Resource::Blank("d0g1".into()),
            "http://x/p",
            Term::Literal(Literal::string("a \"q\"\n\\ \u{1} é")),
        );
        let doc = to_ntriples([&t]);
        let back = RdfParser::new(Format::NTriples).parse(doc.as_bytes()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].object, t.object);
    }

    #[test]
    fn plain_and_tagged_literals() {
        let mut s = String::new();
        write_ntriples_line(
            &Triple::new(Resource::Iri("http://x/a".into()), "http://x/p", Term::Literal(Literal::lang("Lunge", "de"))),
            &mut s,
        );
        assert_eq!(s, "<http://x/a> <http://x/p> \"Lunge\"@de .\n");
    }
}
