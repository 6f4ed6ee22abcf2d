use std::collections::HashMap;

use thiserror::Error;

use super::model::{AnnotationValue, CardinalityKind, ClassExpression, PropertyExpression};
use crate::lossless;
use crate::rdf::{Resource, Term, Triple};
use crate::vocab::{owl, rdf};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("blank node _:{node}: {message}")]
pub struct ExpressionError {
    pub node: String,
    pub message: String,
}

impl ExpressionError {
    fn new(node: &str, message: impl Into<String>) -> Self {
        ExpressionError {
            node: node.to_string(),
            message: message.into(),
        }
    }
}

/// Read-only subject index over a triple slice.
#[derive(Debug)]
pub struct TripleIndex<'a> {
    triples: &'a [Triple],
    by_subject: HashMap<&'a Resource, Vec<usize>>,
}

impl<'a> TripleIndex<'a> {
    pub fn new(triples: &'a [Triple]) -> Self {
        let mut by_subject: HashMap<&Resource, Vec<usize>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_subject.entry(&t.subject).or_default().push(i);
        }
        TripleIndex { triples, by_subject }
    }

    pub fn triples(&self) -> &'a [Triple] {
        self.triples
    }

    /// Positions of the triples with `subject`, in input order.
    pub fn positions(&self, subject: &Resource) -> &[usize] {
        self.by_subject.get(subject).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn of_blank(&self, id: &str) -> impl Iterator<Item = &'a Triple> + '_ {
        self.positions(&Resource::Blank(id.to_string()))
            .iter()
            .map(move |&i| &self.triples[i])
    }

    pub fn subjects(&self) -> impl Iterator<Item = &'a Resource> + '_ {
        self.by_subject.keys().copied()
    }

    pub fn objects(&self, blank: &str, predicate: &str) -> Vec<&'a Term> {
        self.of_blank(blank)
            .filter(|t| t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }

    /// Structural encoding of a term, used to compare anonymous expressions.
    pub fn shape(&self, term: &Term) -> lossless::LosslessValue {
        let mut closure = Vec::new();
        if let Term::Blank(b) = term {
            let mut stack = vec![b.as_str()];
            let mut seen = std::collections::HashSet::new();
            while let Some(n) = stack.pop() {
                if !seen.insert(n) {
                    continue;
                }
                for t in self.of_blank(n) {
                    closure.push(t);
                    if let Term::Blank(next) = &t.object {
                        stack.push(next);
                    }
                }
            }
        }
        lossless::shape_of(&closure, term)
    }
}

/// Resolves one expression tree, tracking the blank nodes it consumes.
pub struct Resolver<'i, 'a> {
    index: &'i TripleIndex<'a>,
    path: Vec<String>,
    /// Blank nodes visited, in visiting order.
    pub consumed: Vec<String>,
}

impl<'i, 'a> Resolver<'i, 'a> {
    pub fn new(index: &'i TripleIndex<'a>) -> Self {
        Resolver {
            index,
            path: Vec::new(),
            consumed: Vec::new(),
        }
    }

    /// Number of triples owned by the consumed blank nodes.
    pub fn consumed_triples(&self) -> usize {
        self.consumed.iter().map(|b| self.index.of_blank(b).count()).sum()
    }

    fn enter(&mut self, node: &str) -> Result<(), ExpressionError> {
        if self.path.iter().any(|p| p == node) {
            return Err(ExpressionError::new(node, "cycle among expression blank nodes"));
        }
        self.path.push(node.to_string());
        if !self.consumed.iter().any(|c| c == node) {
            self.consumed.push(node.to_string());
        }
        Ok(())
    }

    fn single(&self, node: &str, predicate: &str) -> Result<Option<&'a Term>, ExpressionError> {
        let values = self.index.objects(node, predicate);
        match values.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(one)),
            _ => Err(ExpressionError::new(node, format!("more than one <{predicate}>"))),
        }
    }

    /// Walks an RDF list starting at `head`.
    pub fn list(&mut self, head: &Term) -> Result<Vec<&'a Term>, ExpressionError> {
        let mut items = Vec::new();
        let mut current = head;
        let mut entered = 0;
        loop {
            match current {
                Term::Iri(i) if i == rdf::NIL => break,
                Term::Blank(b) => {
                    self.enter(b)?;
                    entered += 1;
                    let first = self
                        .single(b, rdf::FIRST)?
                        .ok_or_else(|| ExpressionError::new(b, "list node without rdf:first"))?;
                    let rest = self
                        .single(b, rdf::REST)?
                        .ok_or_else(|| ExpressionError::new(b, "list node without rdf:rest"))?;
                    if self.index.of_blank(b).count() != 2 {
                        return Err(ExpressionError::new(b, "list node with extra triples"));
                    }
                    items.push(first);
                    current = rest;
                }
                other => {
                    return Err(ExpressionError::new(
                        "",
                        format!("list terminated by {other:?} instead of rdf:nil"),
                    ))
                }
            }
        }
        for _ in 0..entered {
            self.path.pop();
        }
        Ok(items)
    }

    pub fn property(&mut self, term: &Term) -> Result<PropertyExpression, ExpressionError> {
        match term {
            Term::Iri(i) => Ok(PropertyExpression::named(i.clone())),
            Term::Blank(b) => {
                self.enter(b)?;
                let inverse = self.single(b, owl::INVERSE_OF)?;
                let result = match inverse {
                    Some(Term::Iri(i)) if self.index.of_blank(b).count() == 1 => {
                        Ok(PropertyExpression::InverseOf { iri: i.clone() })
                    }
                    _ => Err(ExpressionError::new(b, "unrecognized property expression")),
                };
                self.path.pop();
                result
            }
            Term::Literal(_) => Err(ExpressionError::new("", "literal in property position")),
        }
    }

    /// A property chain: a list of at least two property expressions.
    pub fn chain(&mut self, head: &Term) -> Result<PropertyExpression, ExpressionError> {
        let items = self.list(head)?;
        if items.len() < 2 {
            return Err(ExpressionError::new(
                head.as_blank().unwrap_or(""),
                format!("property chain of length {}", items.len()),
            ));
        }
        let properties = items
            .into_iter()
            .map(|t| self.property(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PropertyExpression::Chain { properties })
    }

    pub fn class(&mut self, term: &Term) -> Result<ClassExpression, ExpressionError> {
        let b = match term {
            Term::Iri(i) => return Ok(ClassExpression::named(i.clone())),
            Term::Blank(b) => b.as_str(),
            Term::Literal(_) => return Err(ExpressionError::new("", "literal in class position")),
        };
        self.enter(b)?;
        let result = self.class_node(b);
        self.path.pop();
        result
    }

    fn class_node(&mut self, b: &str) -> Result<ClassExpression, ExpressionError> {
        let on_property = self.single(b, owl::ON_PROPERTY)?;
        if let Some(p) = on_property {
            let property = self.property(p)?;
            return self.restriction(b, property);
        }
        let typed_restriction = self
            .index
            .objects(b, rdf::TYPE)
            .iter()
            .any(|t| t.as_iri() == Some(owl::RESTRICTION));
        if typed_restriction {
            return Err(ExpressionError::new(b, "restriction without owl:onProperty"));
        }
        if let Some(list) = self.single(b, owl::INTERSECTION_OF)? {
            let operands = self.class_list(list)?;
            return Ok(ClassExpression::Intersection { operands });
        }
        if let Some(list) = self.single(b, owl::UNION_OF)? {
            let operands = self.class_list(list)?;
            return Ok(ClassExpression::Union { operands });
        }
        if let Some(inner) = self.single(b, owl::COMPLEMENT_OF)? {
            let operand = Box::new(self.class(inner)?);
            return Ok(ClassExpression::Complement { operand });
        }
        if let Some(list) = self.single(b, owl::ONE_OF)? {
            let items = self.list(list)?;
            let individuals = items
                .into_iter()
                .map(|t| {
                    t.as_iri()
                        .map(str::to_string)
                        .ok_or_else(|| ExpressionError::new(b, "owl:oneOf member is not an IRI"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(ClassExpression::OneOf { individuals });
        }
        Err(ExpressionError::new(b, "unrecognized class expression"))
    }

    fn class_list(&mut self, head: &Term) -> Result<Vec<ClassExpression>, ExpressionError> {
        let items = self.list(head)?;
        items.into_iter().map(|t| self.class(t)).collect()
    }

    fn restriction(&mut self, b: &str, property: PropertyExpression) -> Result<ClassExpression, ExpressionError> {
        if let Some(filler) = self.single(b, owl::SOME_VALUES_FROM)? {
            let filler = Box::new(self.class(filler)?);
            return Ok(ClassExpression::SomeValuesFrom { property, filler });
        }
        if let Some(filler) = self.single(b, owl::ALL_VALUES_FROM)? {
            let filler = Box::new(self.class(filler)?);
            return Ok(ClassExpression::AllValuesFrom { property, filler });
        }
        if let Some(value) = self.single(b, owl::HAS_VALUE)? {
            if matches!(value, Term::Blank(_)) {
                return Err(ExpressionError::new(b, "anonymous owl:hasValue"));
            }
            let value = AnnotationValue::from_term(value, |_| unreachable!());
            return Ok(ClassExpression::HasValue { property, value });
        }
        let cardinalities = [
            (owl::MIN_CARDINALITY, CardinalityKind::Min, false),
            (owl::MAX_CARDINALITY, CardinalityKind::Max, false),
            (owl::CARDINALITY, CardinalityKind::Exact, false),
            (owl::MIN_QUALIFIED_CARDINALITY, CardinalityKind::Min, true),
            (owl::MAX_QUALIFIED_CARDINALITY, CardinalityKind::Max, true),
            (owl::QUALIFIED_CARDINALITY, CardinalityKind::Exact, true),
        ];
        for (predicate, kind, qualified) in cardinalities {
            let Some(n) = self.single(b, predicate)? else { continue };
            let n = n
                .as_literal()
                .and_then(|l| l.lexical.trim().parse::<u64>().ok())
                .ok_or_else(|| ExpressionError::new(b, "cardinality is not a non-negative integer"))?;
            let filler = if qualified {
                let on = match self.single(b, owl::ON_CLASS)? {
                    Some(c) => Some(c),
                    None => self.single(b, owl::ON_DATA_RANGE)?,
                };
                let on = on.ok_or_else(|| ExpressionError::new(b, "qualified cardinality without owl:onClass"))?;
                Some(Box::new(self.class(on)?))
            } else {
                None
            };
            return Ok(ClassExpression::Cardinality {
                cardinality: kind,
                n,
                property,
                filler,
            });
        }
        Err(ExpressionError::new(b, "restriction without a filler"))
    }
}

/// Resolves `node` into a class expression.
pub fn resolve_class_expression(node: &Term, index: &TripleIndex) -> Result<ClassExpression, ExpressionError> {
    Resolver::new(index).class(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Format, RdfParser};

    const P: &str = "@prefix : <http://x/> . @prefix owl: <http://www.w3.org/2002/07/owl#> .
                     @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";

    fn parse(src: &str) -> Vec<Triple> {
        RdfParser::new(Format::Turtle).parse(format!("{P}{src}").as_bytes()).unwrap()
    }

    fn object_of(triples: &[Triple], predicate: &str) -> Term {
        triples.iter().find(|t| t.predicate == predicate).unwrap().object.clone()
    }

    #[test]
    fn named_is_identity() {
        let idx = TripleIndex::new(&[]);
        assert_eq!(
            resolve_class_expression(&Term::Iri("http://x/Lung".into()), &idx).unwrap(),
            ClassExpression::named("http://x/Lung")
        );
    }

    #[test]
    fn existential_restriction() {
        let t = parse(":lobe rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :part_of ; owl:someValuesFrom :Lung ] .");
        let idx = TripleIndex::new(&t);
        let e = resolve_class_expression(&object_of(&t, crate::vocab::rdfs::SUB_CLASS_OF), &idx).unwrap();
        assert_eq!(
            e,
            ClassExpression::SomeValuesFrom {
                property: PropertyExpression::named("http://x/part_of"),
                filler: Box::new(ClassExpression::named("http://x/Lung")),
            }
        );
    }

    #[test]
    fn intersection_with_nested_restriction() {
        let t = parse(":c owl:equivalentClass [ owl:intersectionOf ( :A [ owl:onProperty :p ; owl:someValuesFrom :B ] ) ] .");
        let idx = TripleIndex::new(&t);
        let e = resolve_class_expression(&object_of(&t, owl::EQUIVALENT_CLASS), &idx).unwrap();
        assert_eq!(
            e,
            ClassExpression::Intersection {
                operands: vec![
                    ClassExpression::named("http://x/A"),
                    ClassExpression::SomeValuesFrom {
                        property: PropertyExpression::named("http://x/p"),
                        filler: Box::new(ClassExpression::named("http://x/B")),
                    }
                ]
            }
        );
    }

    #[test]
    fn qualified_cardinality_and_inverse() {
        let t = parse(
            ":c rdfs:subClassOf [ owl:onProperty [ owl:inverseOf :p ] ;
                 owl:minQualifiedCardinality \"2\"^^<http://www.w3.org/2001/XMLSchema#nonNegativeInteger> ; owl:onClass :D ] .",
        );
        let idx = TripleIndex::new(&t);
        let e = resolve_class_expression(&object_of(&t, crate::vocab::rdfs::SUB_CLASS_OF), &idx).unwrap();
        assert_eq!(
            e,
            ClassExpression::Cardinality {
                cardinality: CardinalityKind::Min,
                n: 2,
                property: PropertyExpression::InverseOf { iri: "http://x/p".into() },
                filler: Some(Box::new(ClassExpression::named("http://x/D"))),
            }
        );
    }

    #[test]
    fn missing_on_property_names_the_node() {
        let t = parse(":c rdfs:subClassOf _:r . _:r a owl:Restriction ; owl:someValuesFrom :B .");
        let idx = TripleIndex::new(&t);
        let err = resolve_class_expression(&Term::Blank("d0xr".into()), &idx).unwrap_err();
        assert_eq!(err.node, "d0xr");
        assert!(err.to_string().contains("onProperty"));
    }

    #[test]
    fn cycles_are_errors() {
        let t = parse("_:a owl:complementOf _:b . _:b owl:complementOf _:a .");
        let idx = TripleIndex::new(&t);
        let err = resolve_class_expression(&Term::Blank("d0xa".into()), &idx).unwrap_err();
        assert!(err.message.contains("cycle"));
    }

    #[test]
    fn chains_need_two_links() {
        let t = parse(":r owl:propertyChainAxiom ( :p ) . :s owl:propertyChainAxiom ( :p :q :r ) .");
        let idx = TripleIndex::new(&t);
        let heads: Vec<Term> = t
            .iter()
            .filter(|x| x.predicate == owl::PROPERTY_CHAIN_AXIOM)
            .map(|x| x.object.clone())
            .collect();
        assert!(Resolver::new(&idx).chain(&heads[0]).is_err());
        let chain = Resolver::new(&idx).chain(&heads[1]).unwrap();
        let PropertyExpression::Chain { properties } = chain else { panic!() };
        let iris: Vec<_> = properties.iter().map(|p| p.iri().unwrap()).collect();
        assert_eq!(iris, ["http://x/p", "http://x/q", "http://x/r"]);
    }
}
