//! Turtle and N-Triples parsing cross-checked against an independent parser.

use ols_core::rdf::{self, Format, Literal, RdfParser, Resource, Term, Triple};
use ols_testkit::{corpus_dir, isomorphic};
use proptest::prelude::*;

fn from_ox(t: oxrdf::Triple) -> Triple {
    let subject = match t.subject {
        oxrdf::Subject::NamedNode(n) => Resource::Iri(n.into_string()),
        oxrdf::Subject::BlankNode(b) => Resource::Blank(b.into_string()),
        #[allow(unreachable_patterns)]
        other => panic!("unexpected subject {other}"),
    };
    let object = match t.object {
        oxrdf::Term::NamedNode(n) => Term::Iri(n.into_string()),
        oxrdf::Term::BlankNode(b) => Term::Blank(b.into_string()),
        oxrdf::Term::Literal(l) => {
            let (value, datatype, language) = l.destruct();
            Term::Literal(match language {
                Some(tag) => Literal::lang(value, &tag.to_ascii_lowercase()),
                None => Literal::typed(value, datatype.map(|d| d.into_string()).unwrap_or_else(|| rdf_string())),
            })
        }
        #[allow(unreachable_patterns)]
        other => panic!("unexpected object {other}"),
    };
    Triple::new(subject, t.predicate.into_string(), object)
}

fn rdf_string() -> String {
    ols_core::vocab::xsd::STRING.to_string()
}

fn oracle_turtle(text: &str, base: &str) -> Vec<Triple> {
    oxttl::TurtleParser::new()
        .with_base_iri(base)
        .unwrap()
        .for_slice(text.as_bytes())
        .map(|t| from_ox(t.expect("oracle parses")))
        .collect()
}

fn ours(text: &str, base: &str) -> Vec<Triple> {
    RdfParser::new(Format::Turtle).with_base_iri(base).parse(text.as_bytes()).expect("parses")
}

#[test]
fn fixture_turtle_matches_the_oracle() {
    for name in ["efo.ttl", "mondo_slim.ttl", "ro_slim.ttl", "chebi_slim.ttl"] {
        let text = std::fs::read_to_string(corpus_dir().join(name)).unwrap();
        let base = format!("file:///fixtures/{name}");
        let (a, b) = (ours(&text, &base), oracle_turtle(&text, &base));
        assert_eq!(a.len(), b.len(), "{name}");
        assert!(isomorphic(&a, &b), "{name}");
    }
}

#[test]
fn single_triple_and_collection_examples() {
    let one = "@prefix o: <http://x/> . o:a <http://www.w3.org/2000/01/rdf-schema#subClassOf> o:b .";
    assert_eq!(ours(one, "http://base/").len(), 1);
    assert!(isomorphic(&ours(one, "http://base/"), &oracle_turtle(one, "http://base/")));
    let chain = "@prefix o: <http://x/> . o:p <http://www.w3.org/2002/07/owl#propertyChainAxiom> ( o:q o:q ) .";
    let triples = ours(chain, "http://base/");
    assert_eq!(triples.len(), 5);
    assert!(isomorphic(&triples, &oracle_turtle(chain, "http://base/")));
    assert!(ours("", "http://base/").is_empty());
}

// Turtle text generator: nested blank-node property lists, collections,
// escaped and tagged literals, relative IRIs.
fn literal() -> impl Strategy<Value = String> {
    let text = proptest::collection::vec(
        prop_oneof![Just('a'), Just('Z'), Just(' '), Just('"'), Just('\\'), Just('\n'), Just('é'), Just('→'), Just('\'')],
        0..8,
    )
    .prop_map(|cs| {
        let mut s = String::new();
        for c in cs {
            match c {
                '"' => s.push_str("\\\""),
                '\\' => s.push_str("\\\\"),
                '\n' => s.push_str("\\n"),
                c => s.push(c),
            }
        }
        s
    });
    (text, 0..4usize).prop_map(|(t, kind)| match kind {
        0 => format!("\"{t}\""),
        1 => format!("\"{t}\"@en-GB"),
        2 => format!("\"{t}\"^^xsd:token"),
        _ => format!("'''{}'''", t.replace('\'', "x")),
    })
}

fn iri() -> impl Strategy<Value = String> {
    prop_oneof![
        (0..5u8).prop_map(|i| format!("ex:n{i}")),
        (0..3u8).prop_map(|i| format!("<rel/{i}>")),
        (0..3u8).prop_map(|i| format!("<http://other.org/x#{i}>")),
        Just("a".to_string()).prop_map(|_| "ex:n0".to_string()),
    ]
}

fn object() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![iri(), literal(), (0..3u8).prop_map(|i| format!("_:b{i}")), Just("42".to_string()), Just("true".to_string())];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 0..4).prop_map(|items| format!("( {} )", items.join(" "))),
            proptest::collection::vec((iri(), inner), 1..3).prop_map(|pairs| {
                let body: Vec<String> = pairs.into_iter().map(|(p, o)| format!("{p} {o}")).collect();
                format!("[ {} ]", body.join(" ; "))
            }),
        ]
    })
}

fn document() -> impl Strategy<Value = String> {
    let subject = prop_oneof![iri(), (0..3u8).prop_map(|i| format!("_:b{i}"))];
    let statement = (subject, iri(), proptest::collection::vec(object(), 1..3))
        .prop_map(|(s, p, os)| format!("{s} {p} {} .", os.join(" , ")));
    proptest::collection::vec(statement, 0..6).prop_map(|stmts| {
        format!(
            "@prefix ex: <http://example.org/> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n{}\n",
            stmts.join("\n")
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_turtle_matches_the_oracle(doc in document()) {
        let a = ours(&doc, "http://base.org/dir/doc.ttl");
        let b = oracle_turtle(&doc, "http://base.org/dir/doc.ttl");
        prop_assert!(isomorphic(&a, &b), "{}\nours: {:?}\noracle: {:?}", doc, a, b);
        prop_assert!(a.iter().all(|t| !t.predicate.is_empty() && !t.predicate.starts_with("rel/")));
    }

    #[test]
    fn ntriples_round_trip_is_isomorphic(doc in document()) {
        let a = ours(&doc, "http://base.org/doc.ttl");
        let nt = rdf::to_ntriples(&a);
        let back = RdfParser::new(Format::NTriples).with_document_ordinal(3).parse(nt.as_bytes()).unwrap();
        prop_assert!(isomorphic(&a, &back));
        let again = ours(&doc, "http://base.org/doc.ttl");
        prop_assert!(isomorphic(&a, &again));
    }

    #[test]
    fn collections_expand_to_two_n_plus_one(n in 0usize..12) {
        let items: Vec<String> = (0..n).map(|i| format!("ex:i{i}")).collect();
        let doc = format!("@prefix ex: <http://example.org/> . ex:s ex:p ( {} ) .", items.join(" "));
        let triples = ours(&doc, "http://base/");
        // the empty list is rdf:nil itself
        let expected = if n == 0 { 1 } else { 2 * n + 1 };
        prop_assert_eq!(triples.len(), expected);
    }
}
