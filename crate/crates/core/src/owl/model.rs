use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lossless::LosslessValue;
use crate::rdf::{Literal, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    Ontology,
    ObjectProperty,
    DatatypeProperty,
    AnnotationProperty,
    Class,
    Individual,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Ontology => "ontology",
            EntityKind::ObjectProperty => "object-property",
            EntityKind::DatatypeProperty => "datatype-property",
            EntityKind::AnnotationProperty => "annotation-property",
            EntityKind::Class => "class",
            EntityKind::Individual => "individual",
        }
    }

    pub fn is_property(self) -> bool {
        matches!(
            self,
            EntityKind::ObjectProperty | EntityKind::DatatypeProperty | EntityKind::AnnotationProperty
        )
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ontology" => EntityKind::Ontology,
            "object-property" => EntityKind::ObjectProperty,
            "datatype-property" => EntityKind::DatatypeProperty,
            "annotation-property" => EntityKind::AnnotationProperty,
            "class" => EntityKind::Class,
            "individual" => EntityKind::Individual,
            _ => return None,
        })
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Annotation multimap: property IRI to values.
pub type AnnotationMap = BTreeMap<String, Vec<AnnotationValue>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Value {
    Literal(Literal),
    IriRef { iri: String },
    Anonymous { value: LosslessValue },
}

impl Value {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Value::IriRef { iri } => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Value::Literal(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationValue {
    #[serde(flatten)]
    pub value: Value,
    /// One payload per `owl:Axiom` block reifying this assertion.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axiom_annotations: Vec<AnnotationMap>,
}

impl AnnotationValue {
    pub fn plain(value: Value) -> Self {
        AnnotationValue {
            value,
            axiom_annotations: Vec::new(),
        }
    }

    pub fn from_term(term: &Term, anonymous: impl FnOnce(&str) -> LosslessValue) -> Self {
        AnnotationValue::plain(match term {
            Term::Iri(iri) => Value::IriRef { iri: iri.clone() },
            Term::Literal(l) => Value::Literal(l.clone()),
            Term::Blank(b) => Value::Anonymous { value: anonymous(b) },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PropertyExpression {
    Named { iri: String },
    InverseOf { iri: String },
    Chain { properties: Vec<PropertyExpression> },
}

impl PropertyExpression {
    pub fn named(iri: impl Into<String>) -> Self {
        PropertyExpression::Named { iri: iri.into() }
    }

    pub fn iri(&self) -> Option<&str> {
        match self {
            PropertyExpression::Named { iri } => Some(iri),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardinalityKind {
    Min,
    Max,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassExpression {
    Named {
        iri: String,
    },
    SomeValuesFrom {
        property: PropertyExpression,
        filler: Box<ClassExpression>,
    },
    AllValuesFrom {
        property: PropertyExpression,
        filler: Box<ClassExpression>,
    },
    HasValue {
        property: PropertyExpression,
        value: AnnotationValue,
    },
    Intersection {
        operands: Vec<ClassExpression>,
    },
    Union {
        operands: Vec<ClassExpression>,
    },
    Complement {
        operand: Box<ClassExpression>,
    },
    OneOf {
        individuals: Vec<String>,
    },
    Cardinality {
        cardinality: CardinalityKind,
        n: u64,
        property: PropertyExpression,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        filler: Option<Box<ClassExpression>>,
    },
}

impl ClassExpression {
    pub fn named(iri: impl Into<String>) -> Self {
        ClassExpression::Named { iri: iri.into() }
    }

    pub fn iri(&self) -> Option<&str> {
        match self {
            ClassExpression::Named { iri } => Some(iri),
            _ => None,
        }
    }

    /// Every IRI mentioned anywhere in the expression.
    pub fn collect_iris(&self, out: &mut Vec<String>) {
        match self {
            ClassExpression::Named { iri } => out.push(iri.clone()),
            ClassExpression::SomeValuesFrom { property, filler } | ClassExpression::AllValuesFrom { property, filler } => {
                property.collect_iris(out);
                filler.collect_iris(out);
            }
            ClassExpression::HasValue { property, value } => {
                property.collect_iris(out);
                if let Value::IriRef { iri } = &value.value {
                    out.push(iri.clone());
                }
            }
            ClassExpression::Intersection { operands } | ClassExpression::Union { operands } => {
                operands.iter().for_each(|o| o.collect_iris(out))
            }
            ClassExpression::Complement { operand } => operand.collect_iris(out),
            ClassExpression::OneOf { individuals } => out.extend(individuals.iter().cloned()),
            ClassExpression::Cardinality { property, filler, .. } => {
                property.collect_iris(out);
                if let Some(f) = filler {
                    f.collect_iris(out);
                }
            }
        }
    }
}

impl PropertyExpression {
    pub fn collect_iris(&self, out: &mut Vec<String>) {
        match self {
            PropertyExpression::Named { iri } | PropertyExpression::InverseOf { iri } => out.push(iri.clone()),
            PropertyExpression::Chain { properties } => properties.iter().for_each(|p| p.collect_iris(out)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Characteristic {
    Transitive,
    Symmetric,
    Asymmetric,
    Reflexive,
    Irreflexive,
    Functional,
    InverseFunctional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogicalAxiom {
    SubClassOf { expression: ClassExpression },
    EquivalentClass { expression: ClassExpression },
    DisjointWith { expression: ClassExpression },
    SubPropertyOf { property: PropertyExpression },
    PropertyChain { chain: PropertyExpression },
    InverseOf { iri: String },
    Domain { expression: ClassExpression },
    Range { expression: ClassExpression },
    Characteristic { characteristic: Characteristic },
    TypeAssertion { expression: ClassExpression },
    SameAs { iri: String },
    DifferentFrom { iri: String },
    AllDisjointClasses { members: Vec<ClassExpression> },
}

impl LogicalAxiom {
    pub fn collect_iris(&self, out: &mut Vec<String>) {
        match self {
            LogicalAxiom::SubClassOf { expression }
            | LogicalAxiom::EquivalentClass { expression }
            | LogicalAxiom::DisjointWith { expression }
            | LogicalAxiom::Domain { expression }
            | LogicalAxiom::Range { expression }
            | LogicalAxiom::TypeAssertion { expression } => expression.collect_iris(out),
            LogicalAxiom::SubPropertyOf { property } => property.collect_iris(out),
            LogicalAxiom::PropertyChain { chain } => chain.collect_iris(out),
            LogicalAxiom::InverseOf { iri } | LogicalAxiom::SameAs { iri } | LogicalAxiom::DifferentFrom { iri } => {
                out.push(iri.clone())
            }
            LogicalAxiom::Characteristic { .. } => {}
            LogicalAxiom::AllDisjointClasses { members } => members.iter().for_each(|m| m.collect_iris(out)),
        }
    }
}

/// A logical axiom plus its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    #[serde(flatten)]
    pub axiom: LogicalAxiom,
    /// Number of source triples the axiom was read from.
    pub source_triples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<AnnotationMap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReifiedAnnotation {
    pub annotated_subject: String,
    pub annotated_property: String,
    pub annotated_target: AnnotationValue,
    pub payload: AnnotationMap,
    /// Whether a matching assertion exists on the source entity.
    pub attached: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwlEntity {
    pub iri: String,
    pub kind: EntityKind,
    pub annotations: AnnotationMap,
    pub logical_axioms: Vec<Axiom>,
    pub reified: Vec<ReifiedAnnotation>,
    /// Distinct source triples consumed into this entity.
    pub triples: Vec<Triple>,
    /// Number of input triples consumed, counting duplicates.
    pub consumed: usize,
}
