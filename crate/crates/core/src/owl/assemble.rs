use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::expr::{ExpressionError, Resolver, TripleIndex};
use super::model::{
    AnnotationMap, AnnotationValue, Axiom, Characteristic, EntityKind, LogicalAxiom, OwlEntity, ReifiedAnnotation,
    Value,
};
use crate::rdf::{Resource, Term, Triple};
use crate::vocab::{self, owl, rdf, rdfs};

/// Output of [`assemble`].
#[derive(Debug, Clone, Default)]
pub struct Assembly {
    /// Entities sorted by IRI, excluding the header.
    pub entities: Vec<OwlEntity>,
    pub header: Option<OwlEntity>,
    /// Triples attributable to no entity, in input order.
    pub dangling: Vec<Triple>,
    pub errors: Vec<ExpressionError>,
    /// Number of input triples, counting duplicates.
    pub parsed: usize,
}

impl Assembly {
    pub fn consumed(&self) -> usize {
        self.entities.iter().chain(self.header.as_ref()).map(|e| e.consumed).sum()
    }

    pub fn entity(&self, iri: &str) -> Option<&OwlEntity> {
        match self.entities.binary_search_by(|e| e.iri.as_str().cmp(iri)) {
            Ok(i) => Some(&self.entities[i]),
            Err(_) => self.header.as_ref().filter(|h| h.iri == iri),
        }
    }
}

const OBJECT_PROPERTY_TYPES: [&str; 7] = [
    owl::OBJECT_PROPERTY,
    owl::TRANSITIVE_PROPERTY,
    owl::SYMMETRIC_PROPERTY,
    owl::ASYMMETRIC_PROPERTY,
    owl::REFLEXIVE_PROPERTY,
    owl::IRREFLEXIVE_PROPERTY,
    owl::INVERSE_FUNCTIONAL_PROPERTY,
];

fn characteristic(type_iri: &str) -> Option<Characteristic> {
    Some(match type_iri {
        owl::TRANSITIVE_PROPERTY => Characteristic::Transitive,
        owl::SYMMETRIC_PROPERTY => Characteristic::Symmetric,
        owl::ASYMMETRIC_PROPERTY => Characteristic::Asymmetric,
        owl::REFLEXIVE_PROPERTY => Characteristic::Reflexive,
        owl::IRREFLEXIVE_PROPERTY => Characteristic::Irreflexive,
        owl::FUNCTIONAL_PROPERTY => Characteristic::Functional,
        owl::INVERSE_FUNCTIONAL_PROPERTY => Characteristic::InverseFunctional,
        _ => return None,
    })
}

fn is_vocabulary(iri: &str) -> bool {
    iri.starts_with(vocab::OWL) || iri.starts_with(vocab::RDF) || iri.starts_with(vocab::RDFS)
}

/// Kind from a set of `rdf:type` objects, by fixed precedence.
pub fn kind_of<'t>(types: impl IntoIterator<Item = &'t Term>) -> EntityKind {
    let types: Vec<&Term> = types.into_iter().collect();
    let has = |iri: &str| types.iter().any(|t| t.as_iri() == Some(iri));
    if has(owl::ONTOLOGY) {
        EntityKind::Ontology
    } else if OBJECT_PROPERTY_TYPES.iter().any(|t| has(t)) {
        EntityKind::ObjectProperty
    } else if has(owl::DATATYPE_PROPERTY) {
        EntityKind::DatatypeProperty
    } else if has(owl::ANNOTATION_PROPERTY) || has(rdf::PROPERTY) {
        EntityKind::AnnotationProperty
    } else if has(owl::FUNCTIONAL_PROPERTY) {
        EntityKind::ObjectProperty
    } else if has(owl::CLASS) || has(rdfs::CLASS) {
        EntityKind::Class
    } else if has(owl::NAMED_INDIVIDUAL)
        || types.iter().any(|t| match t {
            Term::Iri(i) => !is_vocabulary(i),
            Term::Blank(_) => true,
            Term::Literal(_) => false,
        })
    {
        EntityKind::Individual
    } else {
        EntityKind::Class
    }
}

/// Whether an `rdf:type` object is absorbed by the entity's kind (declaration
/// or characteristic) rather than kept as a plain annotation.
fn type_is_declaration(kind: EntityKind, type_iri: &str) -> bool {
    match kind {
        EntityKind::Ontology => type_iri == owl::ONTOLOGY,
        EntityKind::ObjectProperty => OBJECT_PROPERTY_TYPES.contains(&type_iri) || type_iri == owl::FUNCTIONAL_PROPERTY,
        EntityKind::DatatypeProperty => type_iri == owl::DATATYPE_PROPERTY || type_iri == owl::FUNCTIONAL_PROPERTY,
        EntityKind::AnnotationProperty => type_iri == owl::ANNOTATION_PROPERTY || type_iri == rdf::PROPERTY,
        EntityKind::Class => type_iri == owl::CLASS || type_iri == rdfs::CLASS,
        EntityKind::Individual => type_iri == owl::NAMED_INDIVIDUAL || !is_vocabulary(type_iri),
    }
}

/// Predicates read as logical axioms rather than annotations.
pub fn is_logical_predicate(predicate: &str) -> bool {
    matches!(
        predicate,
        rdfs::SUB_CLASS_OF
            | owl::EQUIVALENT_CLASS
            | owl::DISJOINT_WITH
            | rdfs::SUB_PROPERTY_OF
            | owl::PROPERTY_CHAIN_AXIOM
            | owl::INVERSE_OF
            | rdfs::DOMAIN
            | rdfs::RANGE
            | owl::SAME_AS
            | owl::DIFFERENT_FROM
    )
}

enum Reading {
    Axiom(LogicalAxiom),
    /// Declaration type absorbed by the kind.
    Declaration,
    Annotation,
}

fn interpret_triple(resolver: &mut Resolver, kind: EntityKind, t: &Triple) -> Result<Reading, ExpressionError> {
    let iri_object = |t: &Triple| {
        t.object.as_iri().map(str::to_string).ok_or_else(|| ExpressionError {
            node: t.object.as_blank().unwrap_or("").to_string(),
            message: format!("<{}> expects an IRI object", t.predicate),
        })
    };
    let axiom = match t.predicate.as_str() {
        rdf::TYPE => {
            return Ok(match &t.object {
                Term::Iri(type_iri) if type_is_declaration(kind, type_iri) => {
                    if kind == EntityKind::Individual && !is_vocabulary(type_iri) {
                        Reading::Axiom(LogicalAxiom::TypeAssertion {
                            expression: resolver.class(&t.object)?,
                        })
                    } else if let Some(c) = characteristic(type_iri).filter(|_| kind.is_property()) {
                        Reading::Axiom(LogicalAxiom::Characteristic { characteristic: c })
                    } else {
                        Reading::Declaration
                    }
                }
                Term::Blank(_) if kind == EntityKind::Individual => Reading::Axiom(LogicalAxiom::TypeAssertion {
                    expression: resolver.class(&t.object)?,
                }),
                _ => Reading::Annotation,
            })
        }
        rdfs::SUB_CLASS_OF => LogicalAxiom::SubClassOf {
            expression: resolver.class(&t.object)?,
        },
        owl::EQUIVALENT_CLASS => LogicalAxiom::EquivalentClass {
            expression: resolver.class(&t.object)?,
        },
        owl::DISJOINT_WITH => LogicalAxiom::DisjointWith {
            expression: resolver.class(&t.object)?,
        },
        rdfs::SUB_PROPERTY_OF => LogicalAxiom::SubPropertyOf {
            property: resolver.property(&t.object)?,
        },
        owl::PROPERTY_CHAIN_AXIOM => LogicalAxiom::PropertyChain {
            chain: resolver.chain(&t.object)?,
        },
        owl::INVERSE_OF => LogicalAxiom::InverseOf { iri: iri_object(t)? },
        rdfs::DOMAIN => LogicalAxiom::Domain {
            expression: resolver.class(&t.object)?,
        },
        rdfs::RANGE => LogicalAxiom::Range {
            expression: resolver.class(&t.object)?,
        },
        owl::SAME_AS => LogicalAxiom::SameAs { iri: iri_object(t)? },
        owl::DIFFERENT_FROM => LogicalAxiom::DifferentFrom { iri: iri_object(t)? },
        _ => return Ok(Reading::Annotation),
    };
    Ok(Reading::Axiom(axiom))
}

struct Ownership<'a> {
    index: &'a TripleIndex<'a>,
    blank_owner: HashMap<&'a str, usize>,
}

impl<'a> Ownership<'a> {
    /// Claims `start` and every blank node reachable from it that has no owner yet.
    fn claim(&mut self, start: &'a str, owner: usize) {
        let mut stack = vec![start];
        while let Some(b) = stack.pop() {
            if self.blank_owner.contains_key(b) {
                continue;
            }
            self.blank_owner.insert(b, owner);
            for t in self.index.of_blank(b) {
                if let Term::Blank(next) = &t.object {
                    stack.push(next);
                }
            }
        }
    }
}

/// Every `owl:Axiom` / `owl:Annotation` node with all three structural
/// predicates, as (node, source, property, target).
fn reifier_nodes<'a>(index: &TripleIndex<'a>) -> Vec<(&'a str, &'a Term, &'a str, &'a Term, &'a str)> {
    let mut out = Vec::new();
    let mut subjects: Vec<&Resource> = index.subjects().collect();
    subjects.sort();
    for s in subjects {
        let Resource::Blank(b) = s else { continue };
        let types = index.objects(b, rdf::TYPE);
        let kind = if types.iter().any(|t| t.as_iri() == Some(owl::AXIOM)) {
            owl::AXIOM
        } else if types.iter().any(|t| t.as_iri() == Some(owl::ANNOTATION)) {
            owl::ANNOTATION
        } else {
            continue;
        };
        let source = index.objects(b, owl::ANNOTATED_SOURCE);
        let property = index.objects(b, owl::ANNOTATED_PROPERTY);
        let target = index.objects(b, owl::ANNOTATED_TARGET);
        if let ([source], [Term::Iri(property)], [target]) = (source.as_slice(), property.as_slice(), target.as_slice())
        {
            out.push((b.as_str(), *source, property.as_str(), *target, kind));
        }
    }
    out
}

fn term_value(index: &TripleIndex, term: &Term) -> Value {
    match term {
        Term::Iri(iri) => Value::IriRef { iri: iri.clone() },
        Term::Literal(l) => Value::Literal(l.clone()),
        Term::Blank(_) => Value::Anonymous {
            value: index.shape(term),
        },
    }
}

fn payload_json(m: &AnnotationMap) -> String {
    serde_json::to_string(m).expect("annotation maps serialize")
}

/// Payload map of a reifier node: every non-structural predicate, with nested
/// `owl:Annotation` blocks folded onto their values.
fn payload(index: &TripleIndex, node: &str, nested: &HashMap<&str, Vec<(&str, &Term, &str)>>) -> AnnotationMap {
    let mut map = AnnotationMap::new();
    for t in index.of_blank(node) {
        if matches!(
            t.predicate.as_str(),
            rdf::TYPE | owl::ANNOTATED_SOURCE | owl::ANNOTATED_PROPERTY | owl::ANNOTATED_TARGET
        ) {
            continue;
        }
        let value = term_value(index, &t.object);
        let mut av = AnnotationValue::plain(value.clone());
        for (inner, target, property) in nested.get(node).map(Vec::as_slice).unwrap_or(&[]) {
            if *property == t.predicate && term_value(index, target) == value {
                av.axiom_annotations.push(payload(index, inner, nested));
            }
        }
        av.axiom_annotations.sort_by_key(payload_json);
        map.entry(t.predicate.clone()).or_default().push(av);
    }
    map
}

/// Every well-formed `owl:Axiom` block with an IRI source, as a reified
/// annotation. `attached` tells whether the annotated assertion exists.
pub fn collect_reified(triples: &[Triple]) -> Vec<ReifiedAnnotation> {
    collect_reified_indexed(&TripleIndex::new(triples))
}

fn collect_reified_indexed(index: &TripleIndex) -> Vec<ReifiedAnnotation> {
    let nodes = reifier_nodes(index);
    let mut nested: HashMap<&str, Vec<(&str, &Term, &str)>> = HashMap::new();
    for (node, source, property, target, kind) in &nodes {
        if let (Term::Blank(s), true) = (source, *kind == owl::ANNOTATION) {
            nested.entry(s.as_str()).or_default().push((node, target, property));
        }
    }
    let mut out = Vec::new();
    for (node, source, property, target, kind) in &nodes {
        let Term::Iri(subject) = source else { continue };
        if *kind != owl::AXIOM {
            continue;
        }
        let target_value = term_value(index, target);
        let attached = index
            .positions(&Resource::Iri(subject.clone()))
            .iter()
            .map(|&i| &index.triples()[i])
            .any(|t| t.predicate == *property && term_value(index, &t.object) == target_value);
        out.push(ReifiedAnnotation {
            annotated_subject: subject.clone(),
            annotated_property: property.to_string(),
            annotated_target: AnnotationValue::plain(target_value),
            payload: payload(index, node, &nested),
            attached,
        });
    }
    out.sort_by_key(|r| {
        (
            r.annotated_subject.clone(),
            r.annotated_property.clone(),
            serde_json::to_string(&r.annotated_target).unwrap_or_default(),
            payload_json(&r.payload),
        )
    });
    out
}

/// Interprets a triple set drawn from one import closure.
pub fn assemble(triples: &[Triple]) -> Assembly {
    let index = TripleIndex::new(triples);
    let mut entity_iris: Vec<&str> = Vec::new();
    let mut first_seen: HashMap<&str, usize> = HashMap::new();
    for (i, t) in triples.iter().enumerate() {
        if let Resource::Iri(s) = &t.subject {
            first_seen.entry(s).or_insert_with(|| {
                entity_iris.push(s);
                i
            });
        }
    }
    entity_iris.sort_unstable();
    let entity_pos: HashMap<&str, usize> = entity_iris.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let kinds: Vec<EntityKind> = entity_iris
        .iter()
        .map(|e| kind_of(index.positions(&Resource::Iri(e.to_string())).iter().filter_map(|&i| {
            let t = &triples[i];
            (t.predicate == rdf::TYPE).then_some(&t.object)
        })))
        .collect();

    let mut owner: Vec<Option<usize>> = vec![None; triples.len()];
    let mut ownership = Ownership {
        index: &index,
        blank_owner: HashMap::new(),
    };
    let mut errors = Vec::new();
    // (entity, axiom, originating triple position)
    let mut axioms: Vec<Vec<(Axiom, Option<usize>)>> = vec![Vec::new(); entity_iris.len()];
    let mut annotation_positions: Vec<Vec<usize>> = vec![Vec::new(); entity_iris.len()];

    for (e, iri) in entity_iris.iter().enumerate() {
        let subject = Resource::Iri(iri.to_string());
        let mut claimed_by_valid = Vec::new();
        for &i in index.positions(&subject) {
            let t = &triples[i];
            let mut resolver = Resolver::new(&index);
            match interpret_triple(&mut resolver, kinds[e], t) {
                Ok(reading) => {
                    owner[i] = Some(e);
                    match reading {
                        Reading::Axiom(axiom) => {
                            let source_triples = 1 + resolver.consumed_triples();
                            axioms[e].push((
                                Axiom {
                                    axiom,
                                    source_triples,
                                    annotations: Vec::new(),
                                },
                                Some(i),
                            ));
                        }
                        Reading::Declaration => {}
                        Reading::Annotation => annotation_positions[e].push(i),
                    }
                    if let Term::Blank(b) = &t.object {
                        claimed_by_valid.push(b.as_str());
                    }
                }
                Err(err) => errors.push(err),
            }
        }
        for b in claimed_by_valid {
            ownership.claim(b, e);
        }
    }

    // owned structures rooted at unclaimed blank nodes
    let mut roots: Vec<&str> = index
        .subjects()
        .filter_map(Resource::as_blank)
        .filter(|b| !ownership.blank_owner.contains_key(b))
        .collect();
    roots.sort_unstable();
    for &b in &roots {
        if ownership.blank_owner.contains_key(b) {
            continue;
        }
        let types = index.objects(b, rdf::TYPE);
        let has_type = |iri: &str| types.iter().any(|t| t.as_iri() == Some(iri));
        if has_type(owl::ALL_DISJOINT_CLASSES) {
            let members = index.objects(b, owl::MEMBERS);
            let [members_head] = members.as_slice() else { continue };
            let mut resolver = Resolver::new(&index);
            let resolved = resolver.list(members_head).and_then(|items| {
                items.into_iter().map(|m| resolver.class(m)).collect::<Result<Vec<_>, _>>()
            });
            let members = match resolved {
                Ok(m) => m,
                Err(err) => {
                    errors.push(err);
                    continue;
                }
            };
            let mut member_entities: Vec<usize> =
                members.iter().filter_map(|m| m.iri()).filter_map(|i| entity_pos.get(i).copied()).collect();
            member_entities.sort_unstable();
            member_entities.dedup();
            let Some(&first) = member_entities.first() else { continue };
            ownership.claim(b, first);
            let source_triples = index.of_blank(b).count() + resolver.consumed_triples();
            for m in member_entities {
                axioms[m].push((
                    Axiom {
                        axiom: LogicalAxiom::AllDisjointClasses {
                            members: members.clone(),
                        },
                        source_triples,
                        annotations: Vec::new(),
                    },
                    None,
                ));
            }
        } else if has_type(owl::ALL_DIFFERENT) || has_type(owl::ALL_DISJOINT_PROPERTIES) {
            let mut resolver = Resolver::new(&index);
            let heads: Vec<&Term> = index
                .objects(b, owl::MEMBERS)
                .into_iter()
                .chain(index.objects(b, owl::DISTINCT_MEMBERS))
                .collect();
            let owner_entity = heads
                .iter()
                .filter_map(|h| resolver.list(h).ok())
                .flatten()
                .filter_map(|m| m.as_iri())
                .filter_map(|i| entity_pos.get(i).copied())
                .min();
            if let Some(e) = owner_entity {
                ownership.claim(b, e);
            }
        } else if has_type(owl::NEGATIVE_PROPERTY_ASSERTION) {
            let source = index.objects(b, owl::SOURCE_INDIVIDUAL);
            if let [Term::Iri(s)] = source.as_slice() {
                if let Some(&e) = entity_pos.get(s.as_str()) {
                    ownership.claim(b, e);
                }
            }
        }
    }

    // reifications follow their source, possibly through other reifiers
    let reifiers = reifier_nodes(&index);
    loop {
        let mut changed = false;
        for (node, source, _, _, _) in &reifiers {
            if ownership.blank_owner.contains_key(node) {
                continue;
            }
            let source_owner = match source {
                Term::Iri(s) => entity_pos.get(s.as_str()).copied(),
                Term::Blank(s) => ownership.blank_owner.get(s.as_str()).copied(),
                Term::Literal(_) => None,
            };
            if let Some(e) = source_owner {
                ownership.claim(node, e);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    for (i, t) in triples.iter().enumerate() {
        if let Resource::Blank(b) = &t.subject {
            owner[i] = ownership.blank_owner.get(b.as_str()).copied();
        }
    }

    let reified = collect_reified_indexed(&index);
    let mut reified_by_subject: BTreeMap<&str, Vec<&ReifiedAnnotation>> = BTreeMap::new();
    for r in &reified {
        reified_by_subject.entry(&r.annotated_subject).or_default().push(r);
    }

    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); entity_iris.len()];
    let mut dangling = Vec::new();
    for (i, o) in owner.iter().enumerate() {
        match o {
            Some(e) => owned[*e].push(i),
            None => dangling.push(triples[i].clone()),
        }
    }

    let mut entities = Vec::with_capacity(entity_iris.len());
    for (e, iri) in entity_iris.iter().enumerate() {
        let mine = reified_by_subject.get(iri).map(Vec::as_slice).unwrap_or(&[]);
        let attach = |predicate: &str, value: &Value| -> Vec<AnnotationMap> {
            let mut payloads: Vec<AnnotationMap> = mine
                .iter()
                .filter(|r| r.annotated_property == predicate && r.annotated_target.value == *value)
                .map(|r| r.payload.clone())
                .collect();
            payloads.sort_by_key(payload_json);
            payloads
        };

        let mut annotations = AnnotationMap::new();
        for &i in &annotation_positions[e] {
            let t = &triples[i];
            let value = term_value(&index, &t.object);
            let axiom_annotations = attach(&t.predicate, &value);
            let values = annotations.entry(t.predicate.clone()).or_default();
            let av = AnnotationValue {
                value,
                axiom_annotations,
            };
            if !values.contains(&av) {
                values.push(av);
            }
        }

        let mut logical_axioms = Vec::new();
        let mut seen_axioms = HashSet::new();
        for (mut axiom, origin) in std::mem::take(&mut axioms[e]) {
            if let Some(i) = origin {
                let t = &triples[i];
                axiom.annotations = attach(&t.predicate, &term_value(&index, &t.object));
            }
            let key = serde_json::to_string(&axiom).expect("axioms serialize");
            if seen_axioms.insert(key) {
                logical_axioms.push(axiom);
            }
        }

        let mut distinct = BTreeSet::new();
        let mut entity_triples = Vec::new();
        for &i in &owned[e] {
            if distinct.insert(&triples[i]) {
                entity_triples.push(triples[i].clone());
            }
        }

        entities.push(OwlEntity {
            iri: iri.to_string(),
            kind: kinds[e],
            annotations,
            logical_axioms,
            reified: mine.iter().map(|r| (*r).clone()).collect(),
            triples: entity_triples,
            consumed: owned[e].len(),
        });
    }

    let header_pos = entities
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EntityKind::Ontology)
        .min_by_key(|(_, e)| first_seen[e.iri.as_str()])
        .map(|(i, _)| i);
    let header = header_pos.map(|i| entities.remove(i));

    Assembly {
        entities,
        header,
        dangling,
        errors,
        parsed: triples.len(),
    }
}

/// Disjointness axioms per subject: pairwise `owl:disjointWith` and
/// `owl:AllDisjointClasses` blocks (attached to every member).
pub fn interpret_disjointness(triples: &[Triple]) -> Vec<(String, Axiom)> {
    axioms_matching(triples, |a| {
        matches!(a, LogicalAxiom::DisjointWith { .. } | LogicalAxiom::AllDisjointClasses { .. })
    })
    .0
}

/// Property chain axioms per subject property, plus errors for malformed chains.
pub fn interpret_property_chain(triples: &[Triple]) -> (Vec<(String, Axiom)>, Vec<ExpressionError>) {
    axioms_matching(triples, |a| matches!(a, LogicalAxiom::PropertyChain { .. }))
}

fn axioms_matching(
    triples: &[Triple],
    keep: impl Fn(&LogicalAxiom) -> bool,
) -> (Vec<(String, Axiom)>, Vec<ExpressionError>) {
    let assembly = assemble(triples);
    let mut out = Vec::new();
    for e in assembly.entities.iter().chain(assembly.header.as_ref()) {
        for a in &e.logical_axioms {
            if keep(&a.axiom) {
                out.push((e.iri.clone(), a.clone()));
            }
        }
    }
    (out, assembly.errors)
}

/// Sorted, lowercased language tags over all literal annotation values.
pub fn collect_languages<'e>(entities: impl IntoIterator<Item = &'e OwlEntity>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in entities {
        for values in e.annotations.values() {
            for v in values {
                if let Value::Literal(l) = &v.value {
                    if let Some(lang) = &l.language {
                        out.insert(lang.to_ascii_lowercase());
                    }
                }
            }
        }
    }
    out
}
