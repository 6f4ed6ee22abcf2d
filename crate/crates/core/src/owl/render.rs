//! Manchester-style surface rendering of axioms ("some", "and", "∘").

use super::model::{CardinalityKind, Characteristic, ClassExpression, LogicalAxiom, PropertyExpression, Value};

fn needs_parens(e: &ClassExpression) -> bool {
    !matches!(e, ClassExpression::Named { .. } | ClassExpression::OneOf { .. })
}

fn nested(e: &ClassExpression, label: &dyn Fn(&str) -> String) -> String {
    let s = class_expression(e, label);
    if needs_parens(e) {
        format!("({s})")
    } else {
        s
    }
}

pub fn property_expression(p: &PropertyExpression, label: &dyn Fn(&str) -> String) -> String {
    match p {
        PropertyExpression::Named { iri } => label(iri),
        PropertyExpression::InverseOf { iri } => format!("inverse ({})", label(iri)),
        PropertyExpression::Chain { properties } => properties
            .iter()
            .map(|p| property_expression(p, label))
            .collect::<Vec<_>>()
            .join(" ∘ "),
    }
}

fn value(v: &Value, label: &dyn Fn(&str) -> String) -> String {
    match v {
        Value::IriRef { iri } => label(iri),
        Value::Literal(l) => format!("\"{}\"", l.lexical),
        Value::Anonymous { value } => value.canonical_string(),
    }
}

pub fn class_expression(e: &ClassExpression, label: &dyn Fn(&str) -> String) -> String {
    match e {
        ClassExpression::Named { iri } => label(iri),
        ClassExpression::SomeValuesFrom { property, filler } => {
            format!("{} some {}", property_expression(property, label), nested(filler, label))
        }
        ClassExpression::AllValuesFrom { property, filler } => {
            format!("{} only {}", property_expression(property, label), nested(filler, label))
        }
        ClassExpression::HasValue { property, value: v } => {
            format!("{} value {}", property_expression(property, label), value(&v.value, label))
        }
        ClassExpression::Intersection { operands } => {
            operands.iter().map(|o| nested(o, label)).collect::<Vec<_>>().join(" and ")
        }
        ClassExpression::Union { operands } => operands.iter().map(|o| nested(o, label)).collect::<Vec<_>>().join(" or "),
        ClassExpression::Complement { operand } => format!("not {}", nested(operand, label)),
        ClassExpression::OneOf { individuals } => {
            format!("{{{}}}", individuals.iter().map(|i| label(i)).collect::<Vec<_>>().join(", "))
        }
        ClassExpression::Cardinality {
            cardinality,
            n,
            property,
            filler,
        } => {
            let word = match cardinality {
                CardinalityKind::Min => "min",
                CardinalityKind::Max => "max",
                CardinalityKind::Exact => "exactly",
            };
            let mut s = format!("{} {word} {n}", property_expression(property, label));
            if let Some(f) = filler {
                s.push(' ');
                s.push_str(&nested(f, label));
            }
            s
        }
    }
}

fn characteristic(c: Characteristic) -> &'static str {
    match c {
        Characteristic::Transitive => "transitive",
        Characteristic::Symmetric => "symmetric",
        Characteristic::Asymmetric => "asymmetric",
        Characteristic::Reflexive => "reflexive",
        Characteristic::Irreflexive => "irreflexive",
        Characteristic::Functional => "functional",
        Characteristic::InverseFunctional => "inverse functional",
    }
}

/// (heading, rendered body) for one axiom.
pub fn axiom(a: &LogicalAxiom, label: &dyn Fn(&str) -> String) -> (&'static str, String) {
    match a {
        LogicalAxiom::SubClassOf { expression } => ("subclass of", class_expression(expression, label)),
        LogicalAxiom::EquivalentClass { expression } => ("equivalent to", class_expression(expression, label)),
        LogicalAxiom::DisjointWith { expression } => ("disjoint with", class_expression(expression, label)),
        LogicalAxiom::SubPropertyOf { property } => ("subproperty of", property_expression(property, label)),
        LogicalAxiom::PropertyChain { chain } => ("property chain", property_expression(chain, label)),
        LogicalAxiom::InverseOf { iri } => ("inverse of", label(iri)),
        LogicalAxiom::Domain { expression } => ("domain", class_expression(expression, label)),
        LogicalAxiom::Range { expression } => ("range", class_expression(expression, label)),
        LogicalAxiom::Characteristic { characteristic: c } => ("characteristic", characteristic(*c).to_string()),
        LogicalAxiom::TypeAssertion { expression } => ("type", class_expression(expression, label)),
        LogicalAxiom::SameAs { iri } => ("same as", label(iri)),
        LogicalAxiom::DifferentFrom { iri } => ("different from", label(iri)),
        LogicalAxiom::AllDisjointClasses { members } => (
            "all disjoint classes",
            members.iter().map(|m| nested(m, label)).collect::<Vec<_>>().join(", "),
        ),
    }
}
