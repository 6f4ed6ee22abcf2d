//! Response shapes. Both entity views are projections of one stored record.

use std::collections::{BTreeMap, BTreeSet};

use ols_core::dataload::{choose_language, EntityRecord, OntologyReport};
use ols_core::dataset::{Dataset, OntologyData};
use ols_core::graph::GraphNode;
use ols_core::linker::XrefLink;
use ols_core::lossless::{LosslessMap, LosslessValue};
use ols_core::owl::{render, AnnotationMap, AnnotationValue, Axiom, EntityKind, Value};
use ols_core::rdf::{Resource, Term};
use ols_core::vocab;
use serde::Serialize;

use crate::params::encode_iri;

#[derive(Debug, Serialize)]
pub struct OntologySummary {
    pub id: String,
    pub title: String,
    pub ontology_iri: Option<String>,
    pub status: String,
    pub default_language: String,
    pub languages: Vec<String>,
    pub classes: usize,
    pub properties: usize,
    pub individuals: usize,
    pub entities: usize,
}

impl OntologySummary {
    pub fn new(r: &OntologyReport) -> Self {
        OntologySummary {
            id: r.id.clone(),
            title: r.config.title.clone(),
            ontology_iri: r.ontology_iri.clone(),
            status: serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
            default_language: r.config.default_language.clone(),
            languages: r.languages.clone(),
            classes: r.counts.classes,
            properties: r.counts.properties,
            individuals: r.counts.individuals,
            entities: r.counts.entities,
        }
    }
}

/// One node of a hierarchy listing.
#[derive(Debug, Serialize)]
pub struct NodeSummary {
    pub iri: String,
    pub curie: Option<String>,
    pub label: Option<String>,
    pub ontology_id: String,
    pub defining_ontology: Option<String>,
    /// The defining ontology differs from the one being browsed.
    pub imported: bool,
    pub is_obsolete: bool,
    pub has_children: bool,
}

pub fn node_summary(ds: &Dataset, node: GraphNode, lang: Option<&str>) -> NodeSummary {
    let record = ds.describe(&node.iri, &node.ontology_id);
    let label = record.and_then(|r| record_label(ds, r, lang)).or(node.label);
    let curie = record.and_then(|r| r.curie.clone()).or_else(|| ds.registry.compress(&node.iri).map(|c| c.to_string()));
    NodeSummary {
        imported: node.defining_ontology.as_deref().is_some_and(|d| d != node.ontology_id),
        iri: node.iri,
        curie,
        label,
        ontology_id: node.ontology_id,
        defining_ontology: node.defining_ontology,
        is_obsolete: node.is_obsolete,
        has_children: node.has_children,
    }
}

fn default_language<'d>(ds: &'d Dataset, ontology_id: &str) -> &'d str {
    ds.ontology(ontology_id).map(|o| o.config().default_language.as_str()).unwrap_or("en")
}

pub fn record_label(ds: &Dataset, r: &EntityRecord, lang: Option<&str>) -> Option<String> {
    r.extracted.label(lang, default_language(ds, &r.ontology_id)).map(str::to_string)
}

fn values_in(map: &BTreeMap<String, Vec<String>>, lang: Option<&str>, default: &str) -> Vec<String> {
    let mut v = choose_language(map, lang, default).map(|l| map[l].clone()).unwrap_or_default();
    v.sort();
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkedEntity {
    pub label: Option<String>,
    pub curie: Option<String>,
    pub defining_ontology: Option<String>,
    /// Ontology whose copy described the entity; its entity endpoint resolves.
    pub ontology_id: String,
    pub kind: EntityKind,
}

#[derive(Debug, Serialize)]
pub struct AxiomView {
    pub heading: &'static str,
    pub rendered: String,
    #[serde(flatten)]
    pub axiom: Axiom,
}

#[derive(Debug, Serialize)]
pub struct ReifiedView {
    pub property: String,
    pub target: AnnotationValue,
    pub payload: AnnotationMap,
    pub attached: bool,
    pub xrefs: Vec<XrefLink>,
}

#[derive(Debug, Serialize)]
pub struct V2EntityView {
    pub iri: String,
    pub curie: Option<String>,
    pub ontology_id: String,
    pub kind: EntityKind,
    pub imported: bool,
    pub defining_ontology: Option<String>,
    pub is_obsolete: bool,
    pub short_form: String,
    pub has_children: bool,
    /// Language the label was taken from.
    pub language: Option<String>,
    pub languages: Vec<String>,
    pub label: Option<String>,
    pub labels: Vec<String>,
    pub synonyms: Vec<String>,
    pub definitions: Vec<String>,
    pub annotations: BTreeMap<String, Vec<String>>,
    pub xrefs: Vec<XrefLink>,
    pub axioms: Vec<AxiomView>,
    pub reified_annotations: Vec<ReifiedView>,
    /// Triples about this IRI that no entity of the ontology owned.
    pub dangling: Vec<String>,
    pub lossless: serde_json::Value,
    pub linked_entities: BTreeMap<String, LinkedEntity>,
}

fn literal_strings<'a>(values: impl IntoIterator<Item = &'a AnnotationValue>) -> Vec<&'a str> {
    values.into_iter().filter_map(|v| v.value.as_literal()).map(|l| l.lexical.as_str()).collect()
}

fn lossless_xrefs(map: &LosslessMap) -> Vec<String> {
    let mut out: Vec<String> = map
        .get(vocab::obo::HAS_DB_XREF)
        .into_iter()
        .flatten()
        .filter_map(|v| v.bare().as_literal().map(|l| l.lexical))
        .collect();
    out.sort();
    out
}

fn collect_value(v: &LosslessValue, out: &mut BTreeSet<String>) {
    match v {
        LosslessValue::Iri(i) => {
            out.insert(i.clone());
        }
        LosslessValue::Typed { datatype, .. } => {
            out.insert(datatype.clone());
        }
        LosslessValue::List(items) => items.iter().for_each(|i| collect_value(i, out)),
        LosslessValue::Map(m) => collect_map(m, out),
        LosslessValue::Annotated { value, annotations } => {
            collect_value(value, out);
            annotations.iter().for_each(|m| collect_map(m, out));
        }
        LosslessValue::String(_) | LosslessValue::Lang { .. } | LosslessValue::Ref(_) => {}
    }
}

fn collect_map(m: &LosslessMap, out: &mut BTreeSet<String>) {
    for (k, values) in m {
        if !k.starts_with('@') {
            out.insert(k.clone());
        }
        values.iter().for_each(|v| collect_value(v, out));
    }
}

fn collect_annotations(m: &AnnotationMap, out: &mut BTreeSet<String>) {
    for (k, values) in m {
        out.insert(k.clone());
        for v in values {
            collect_annotation_value(v, out);
        }
    }
}

fn collect_annotation_value(v: &AnnotationValue, out: &mut BTreeSet<String>) {
    match &v.value {
        Value::IriRef { iri } => {
            out.insert(iri.clone());
        }
        Value::Anonymous { value } => collect_value(value, out),
        Value::Literal(_) => {}
    }
    v.axiom_annotations.iter().for_each(|m| collect_annotations(m, out));
}

/// Every IRI that the dataset can describe, keyed for label lookup.
pub fn linked_entities(
    ds: &Dataset,
    context: &str,
    iris: impl IntoIterator<Item = String>,
    lang: Option<&str>,
) -> BTreeMap<String, LinkedEntity> {
    iris.into_iter()
        .filter_map(|iri| {
            let r = ds.describe(&iri, context)?;
            let linked = LinkedEntity {
                label: record_label(ds, r, lang),
                curie: r.curie.clone(),
                defining_ontology: r.defining_ontology.clone(),
                ontology_id: r.ontology_id.clone(),
                kind: r.kind,
            };
            Some((iri, linked))
        })
        .collect()
}

pub fn v2_view(ds: &Dataset, data: &OntologyData, r: &EntityRecord, lang: Option<&str>) -> V2EntityView {
    let default = data.config().default_language.as_str();
    let x = &r.extracted;
    let dangling = data.dangling_for(&r.iri);

    let mut iris = BTreeSet::new();
    if let Some(m) = r.lossless.as_map() {
        collect_map(m, &mut iris);
    }
    for a in &r.axioms {
        let mut v = Vec::new();
        a.axiom.collect_iris(&mut v);
        iris.extend(v);
        a.annotations.iter().for_each(|m| collect_annotations(m, &mut iris));
    }
    for ra in &r.reified {
        iris.insert(ra.annotated_property.clone());
        collect_annotation_value(&ra.annotated_target, &mut iris);
        collect_annotations(&ra.payload, &mut iris);
    }
    for t in &dangling {
        if let Resource::Iri(s) = &t.subject {
            iris.insert(s.clone());
        }
        iris.insert(t.predicate.clone());
        if let Term::Iri(o) = &t.object {
            iris.insert(o.clone());
        }
    }
    iris.remove(&r.iri);
    let linked = linked_entities(ds, &r.ontology_id, iris, lang);

    let name = |iri: &str| -> String {
        linked
            .get(iri)
            .and_then(|l| l.label.clone())
            .unwrap_or_else(|| ds.registry.curie_or_iri(iri))
    };
    let axioms = r
        .axioms
        .iter()
        .map(|a| {
            let (heading, rendered) = render::axiom(&a.axiom, &name);
            AxiomView {
                heading,
                rendered,
                axiom: a.clone(),
            }
        })
        .collect();
    let reified_annotations = r
        .reified
        .iter()
        .map(|ra| {
            let raw = literal_strings(ra.payload.get(vocab::obo::HAS_DB_XREF).into_iter().flatten());
            ReifiedView {
                property: ra.annotated_property.clone(),
                target: ra.annotated_target.clone(),
                payload: ra.payload.clone(),
                attached: ra.attached,
                xrefs: ds.registry.link_xrefs(raw),
            }
        })
        .collect();
    let xrefs = r.lossless.as_map().map(lossless_xrefs).unwrap_or_default();
    let languages: BTreeSet<String> = x.languages().cloned().collect();
    let language = choose_language(&x.labels, lang, default).map(str::to_string);

    V2EntityView {
        iri: r.iri.clone(),
        curie: r.curie.clone(),
        ontology_id: r.ontology_id.clone(),
        kind: r.kind,
        imported: r.imported,
        defining_ontology: r.defining_ontology.clone(),
        is_obsolete: x.is_obsolete,
        short_form: x.short_form.clone(),
        has_children: has_children(data, &r.iri),
        language,
        languages: languages.into_iter().collect(),
        label: x.label(lang, default).map(str::to_string),
        labels: values_in(&x.labels, lang, default),
        synonyms: values_in(&x.synonyms, lang, default),
        definitions: values_in(&x.definitions, lang, default),
        annotations: x.annotation_fields.clone(),
        xrefs: ds.registry.link_xrefs(xrefs.iter().map(String::as_str)),
        axioms,
        reified_annotations,
        dangling: dangling.iter().map(|t| t.to_string()).collect(),
        lossless: r.lossless.to_json(),
        linked_entities: linked,
    }
}

fn has_children(data: &OntologyData, iri: &str) -> bool {
    let f = data.graph.subclass_filter();
    data.graph.children(iri, &f).map(|c| !c.is_empty()).unwrap_or(false)
}

#[derive(Debug, Serialize)]
pub struct Link {
    pub href: String,
}

/// Flat, single-label view in the older API's shape.
#[derive(Debug, Serialize)]
pub struct V1TermView {
    pub iri: String,
    pub label: Option<String>,
    pub description: Vec<String>,
    pub synonyms: Vec<String>,
    pub obo_id: Option<String>,
    pub short_form: String,
    pub ontology_name: String,
    pub ontology_prefix: String,
    pub is_obsolete: bool,
    pub is_defining_ontology: bool,
    pub has_children: bool,
    pub is_root: bool,
    #[serde(rename = "_links")]
    pub links: BTreeMap<&'static str, Link>,
}

pub const V1_RELATIONS: [&str; 4] = ["parents", "children", "ancestors", "descendants"];

pub fn v1_links(ontology_id: &str, iri: &str) -> BTreeMap<&'static str, Link> {
    let base = format!("/api/ontologies/{ontology_id}/terms/{}", encode_iri(iri));
    let mut links: BTreeMap<&'static str, Link> =
        V1_RELATIONS.iter().map(|rel| (*rel, Link { href: format!("{base}/{rel}") })).collect();
    links.insert("self", Link { href: base });
    links
}

pub fn v1_view(data: &OntologyData, r: &EntityRecord) -> V1TermView {
    let default = data.config().default_language.as_str();
    let x = &r.extracted;
    let f = data.graph.subclass_filter();
    let is_root = data.graph.parents(&r.iri, &f).map(|p| p.is_empty()).unwrap_or(true);
    V1TermView {
        iri: r.iri.clone(),
        label: x.label(None, default).map(str::to_string),
        description: values_in(&x.definitions, None, default),
        synonyms: values_in(&x.synonyms, None, default),
        obo_id: r.curie.clone(),
        short_form: x.short_form.clone(),
        ontology_name: r.ontology_id.clone(),
        ontology_prefix: data.config().preferred_prefix.clone(),
        is_obsolete: x.is_obsolete,
        is_defining_ontology: !r.imported,
        has_children: has_children(data, &r.iri),
        is_root,
        links: v1_links(&r.ontology_id, &r.iri),
    }
}

/// A graph node without a stored record, such as an undeclared superclass.
pub fn v1_stub(data: &OntologyData, node: GraphNode) -> V1TermView {
    V1TermView {
        label: node.label,
        description: Vec::new(),
        synonyms: Vec::new(),
        obo_id: None,
        short_form: ols_core::dataload::short_form(&node.iri),
        ontology_name: node.ontology_id.clone(),
        ontology_prefix: data.config().preferred_prefix.clone(),
        is_obsolete: node.is_obsolete,
        is_defining_ontology: node.defining_ontology.as_deref() == Some(node.ontology_id.as_str()),
        has_children: node.has_children,
        is_root: false,
        links: v1_links(&node.ontology_id, &node.iri),
        iri: node.iri,
    }
}
