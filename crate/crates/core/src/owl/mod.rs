//! OWL2 interpretation of a triple set: entities, class and property
//! expressions, disjointness, property chains and reified annotations.

mod assemble;
mod expr;
mod model;
pub mod render;

pub use assemble::{
    assemble, collect_languages, collect_reified, interpret_disjointness, interpret_property_chain,
    is_logical_predicate, kind_of, Assembly,
};
pub use expr::{resolve_class_expression, ExpressionError, Resolver, TripleIndex};
pub use model::{
    AnnotationMap, AnnotationValue, Axiom, CardinalityKind, Characteristic, ClassExpression, EntityKind,
    LogicalAxiom, OwlEntity, PropertyExpression, ReifiedAnnotation, Value,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Format, Literal, RdfParser, Resource, Triple};
    use crate::vocab::{obo, owl, rdf, rdfs};

    const P: &str = "@prefix : <http://x/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .
        @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
        @prefix obo: <http://purl.obolibrary.org/obo/> .
        @prefix oio: <http://www.geneontology.org/formats/oboInOwl#> .\n";

    fn parse(src: &str) -> Vec<Triple> {
        RdfParser::new(Format::Turtle).parse(format!("{P}{src}").as_bytes()).unwrap()
    }

    fn x(local: &str) -> String {
        format!("http://x/{local}")
    }

    #[test]
    fn minimal_declaration() {
        let a = assemble(&parse(":a a owl:Class ."));
        assert_eq!(a.entities.len(), 1);
        assert_eq!(a.entities[0].iri, x("a"));
        assert_eq!(a.entities[0].kind, EntityKind::Class);
        assert!(a.dangling.is_empty());
        assert!(a.entities[0].logical_axioms.is_empty());
    }

    #[test]
    fn rdfs_class_schemas() {
        let a = assemble(&parse(":Person a rdfs:Class . :Student rdfs:subClassOf :Person ."));
        assert_eq!(a.entities.len(), 2);
        assert!(a.entities.iter().all(|e| e.kind == EntityKind::Class));
        let student = a.entity(&x("Student")).unwrap();
        assert_eq!(
            student.logical_axioms[0].axiom,
            LogicalAxiom::SubClassOf {
                expression: ClassExpression::named(x("Person"))
            }
        );
    }

    #[test]
    fn lone_untyped_subject_becomes_class_stub() {
        let a = assemble(&parse(":x :p \"v\" ."));
        assert_eq!(a.entities.len(), 1);
        assert_eq!(a.entities[0].kind, EntityKind::Class);
        assert_eq!(a.entities[0].annotations[&x("p")].len(), 1);
    }

    #[test]
    fn kind_precedence_and_punning() {
        let a = assemble(&parse(
            ":p a owl:AnnotationProperty , owl:ObjectProperty , owl:TransitiveProperty .
             :c a owl:Class , owl:NamedIndividual .
             :i a owl:NamedIndividual , :c .
             :o a owl:Ontology .",
        ));
        let p = a.entity(&x("p")).unwrap();
        assert_eq!(p.kind, EntityKind::ObjectProperty);
        assert_eq!(
            p.annotations[rdf::TYPE][0].value,
            Value::IriRef {
                iri: owl::ANNOTATION_PROPERTY.into()
            }
        );
        assert!(p.logical_axioms.iter().any(|a| a.axiom
            == LogicalAxiom::Characteristic {
                characteristic: Characteristic::Transitive
            }));
        let c = a.entity(&x("c")).unwrap();
        assert_eq!(c.kind, EntityKind::Class);
        assert_eq!(c.annotations[rdf::TYPE].len(), 1);
        let i = a.entity(&x("i")).unwrap();
        assert_eq!(i.kind, EntityKind::Individual);
        assert_eq!(
            i.logical_axioms[0].axiom,
            LogicalAxiom::TypeAssertion {
                expression: ClassExpression::named(x("c"))
            }
        );
        assert_eq!(a.header.as_ref().unwrap().iri, x("o"));
    }

    #[test]
    fn disjoint_with_named_partner() {
        let triples = parse("obo:MONDO_0000368 owl:disjointWith obo:MONDO_0006052 .");
        let axioms = interpret_disjointness(&triples);
        assert_eq!(axioms.len(), 1);
        assert_eq!(axioms[0].0, "http://purl.obolibrary.org/obo/MONDO_0000368");
        assert_eq!(
            axioms[0].1.axiom,
            LogicalAxiom::DisjointWith {
                expression: ClassExpression::named("http://purl.obolibrary.org/obo/MONDO_0006052")
            }
        );
        assert!(interpret_disjointness(&parse(":a a owl:Class .")).is_empty());
    }

    #[test]
    fn all_disjoint_classes_attach_to_every_member() {
        let triples = parse(
            ":a a owl:Class . :b a owl:Class . :c a owl:Class .
             [] a owl:AllDisjointClasses ; owl:members ( :a :b :c ) .",
        );
        let axioms = interpret_disjointness(&triples);
        let subjects: Vec<&str> = axioms.iter().map(|(s, _)| s.as_str()).collect();
        assert_eq!(subjects, [x("a"), x("b"), x("c")]);
        let members = vec![
            ClassExpression::named(x("a")),
            ClassExpression::named(x("b")),
            ClassExpression::named(x("c")),
        ];
        assert!(axioms
            .iter()
            .all(|(_, a)| a.axiom == LogicalAxiom::AllDisjointClasses { members: members.clone() }));
        let a = assemble(&triples);
        assert!(a.dangling.is_empty());
        assert_eq!(a.consumed(), triples.len());
    }

    #[test]
    fn property_chain_order_is_preserved() {
        let (axioms, errors) = interpret_property_chain(&parse(
            "obo:RO_0002211 owl:propertyChainAxiom ( obo:RO_0002578 obo:RO_0002578 ) .",
        ));
        assert!(errors.is_empty());
        let LogicalAxiom::PropertyChain {
            chain: PropertyExpression::Chain { properties },
        } = &axioms[0].1.axiom
        else {
            panic!("expected a chain")
        };
        assert_eq!(properties.len(), 2);
        assert_eq!(properties[0], properties[1]);
        assert_eq!(axioms[0].1.source_triples, 5);
    }

    #[test]
    fn degenerate_chain_is_dropped_to_dangling() {
        let triples = parse(":r a owl:ObjectProperty ; owl:propertyChainAxiom ( :p ) .");
        let a = assemble(&triples);
        assert_eq!(a.errors.len(), 1);
        assert!(a.entity(&x("r")).unwrap().logical_axioms.is_empty());
        assert_eq!(a.dangling.len(), 3);
        assert_eq!(a.consumed() + a.dangling.len(), a.parsed);
    }

    #[test]
    fn reified_annotation_on_homology_note() {
        let triples = parse(
            "obo:UBERON_0002048 a owl:Class ; :homology_notes \"derived from the swim bladder\"@en .
             [] a owl:Axiom ; owl:annotatedSource obo:UBERON_0002048 ;
                owl:annotatedProperty :homology_notes ;
                owl:annotatedTarget \"derived from the swim bladder\"@en ;
                oio:hasDbXref \"ISBN:0199566682\" .",
        );
        let reified = collect_reified(&triples);
        assert_eq!(reified.len(), 1);
        assert!(reified[0].attached);
        assert_eq!(reified[0].payload[obo::HAS_DB_XREF].len(), 1);
        let a = assemble(&triples);
        assert!(a.dangling.is_empty());
        let lung = a.entity("http://purl.obolibrary.org/obo/UBERON_0002048").unwrap();
        let note = &lung.annotations[&x("homology_notes")][0];
        assert_eq!(note.axiom_annotations.len(), 1);
        assert_eq!(
            note.axiom_annotations[0][obo::HAS_DB_XREF][0].value,
            Value::Literal(Literal::string("ISBN:0199566682"))
        );
        assert_eq!(lung.consumed, triples.len());
        assert!(collect_reified(&parse(":a a owl:Class .")).is_empty());
    }

    #[test]
    fn two_reifications_of_one_assertion() {
        let triples = parse(
            ":a rdfs:label \"x\" .
             [] a owl:Axiom ; owl:annotatedSource :a ; owl:annotatedProperty rdfs:label ; owl:annotatedTarget \"x\" ; rdfs:comment \"z\" .
             [] a owl:Axiom ; owl:annotatedSource :a ; owl:annotatedProperty rdfs:label ; owl:annotatedTarget \"x\" ; rdfs:comment \"b\" .",
        );
        let reified = collect_reified(&triples);
        assert_eq!(reified.len(), 2);
        assert!(reified.iter().all(|r| r.attached));
        let a = assemble(&triples);
        let label = &a.entity(&x("a")).unwrap().annotations[rdfs::LABEL][0];
        let comments: Vec<_> = label
            .axiom_annotations
            .iter()
            .map(|m| m[rdfs::COMMENT][0].value.as_literal().unwrap().lexical.clone())
            .collect();
        assert_eq!(comments, ["b", "z"]);
    }

    #[test]
    fn reification_on_anonymous_superclass() {
        let triples = parse(
            ":lobe rdfs:subClassOf [ a owl:Restriction ; owl:onProperty obo:BFO_0000050 ; owl:someValuesFrom :lung ] .
             [] a owl:Axiom ; owl:annotatedSource :lobe ; owl:annotatedProperty rdfs:subClassOf ;
                owl:annotatedTarget [ a owl:Restriction ; owl:onProperty obo:BFO_0000050 ; owl:someValuesFrom :lung ] ;
                oio:hasDbXref \"PMID:1\" .",
        );
        let a = assemble(&triples);
        let lobe = a.entity(&x("lobe")).unwrap();
        assert_eq!(lobe.logical_axioms.len(), 1);
        assert_eq!(lobe.logical_axioms[0].annotations.len(), 1);
        assert!(a.dangling.is_empty());
    }

    #[test]
    fn orphan_axiom_block_without_target_is_dangling() {
        let triples = parse(
            ":a rdfs:label \"x\" .
             [] a owl:Axiom ; owl:annotatedSource :a ; owl:annotatedProperty rdfs:label ; rdfs:comment \"z\" .",
        );
        let a = assemble(&triples);
        assert_eq!(a.dangling.len(), 4);
        assert_eq!(a.consumed() + a.dangling.len(), triples.len());
    }

    #[test]
    fn languages_are_collected_lowercased() {
        let a = assemble(&parse(
            ":lung rdfs:label \"lung\"@en , \"Lunge\"@de , \"poumon\"@fr , \"LUNG\"@EN .",
        ));
        let langs: Vec<String> = collect_languages(&a.entities).into_iter().collect();
        assert_eq!(langs, ["de", "en", "fr"]);
        let none = assemble(&parse(":a rdfs:label \"plain\" ."));
        assert!(collect_languages(&none.entities).is_empty());
    }

    #[test]
    fn accounting_with_duplicates_and_shared_blank_nodes() {
        let mut triples = parse(
            ":a rdfs:subClassOf _:r . :b rdfs:subClassOf _:r .
             _:r owl:onProperty :p ; owl:someValuesFrom :c .
             _:free :q :a .",
        );
        triples.push(triples[0].clone());
        let a = assemble(&triples);
        assert_eq!(a.consumed() + a.dangling.len(), triples.len());
        assert_eq!(a.dangling.len(), 1);
        assert_eq!(a.dangling[0].subject, Resource::Blank("d0xfree".into()));
        assert_eq!(a.entity(&x("a")).unwrap().consumed, 4);
    }

    #[test]
    fn grouping_matches_subject_oracle() {
        let triples = parse(
            ":a rdfs:label \"a\" ; :k \"1\" , \"2\" . :b rdfs:label \"b\" ; rdfs:subClassOf :a .
             :c :k :a .",
        );
        let a = assemble(&triples);
        let mut oracle: std::collections::BTreeMap<String, std::collections::BTreeMap<String, usize>> =
            Default::default();
        for t in &triples {
            if let Resource::Iri(s) = &t.subject {
                let entry = oracle.entry(s.clone()).or_default();
                if !is_logical_predicate(&t.predicate) && t.predicate != rdf::TYPE {
                    *entry.entry(t.predicate.clone()).or_default() += 1;
                }
            }
        }
        assert_eq!(a.entities.len(), oracle.len());
        for e in &a.entities {
            let counts: std::collections::BTreeMap<String, usize> =
                e.annotations.iter().map(|(k, v)| (k.clone(), v.len())).collect();
            let expected: std::collections::BTreeMap<String, usize> =
                oracle[&e.iri].iter().map(|(k, v)| (k.clone(), *v)).collect();
            assert_eq!(counts, expected, "{}", e.iri);
        }
    }
}
