//! Canonical, lossless tree encoding of the triples an entity owns.
//!
//! The encoding is a map from predicate IRI to a sorted list of values. Blank
//! nodes referenced exactly once are inlined as nested maps, well-formed RDF
//! lists become `List`s, and `owl:Axiom` / `owl:Annotation` reification blocks
//! are folded onto the value they annotate. Blank nodes that are shared or sit
//! on a cycle get deterministic local ids (`n1`, `n2`, ...) and live in the
//! reserved `@nodes` entry of the root map; owned blank-node structures that
//! nothing points at (for example an `owl:AllDisjointClasses` block or an
//! orphan reification) are kept under `@detached`.
//!
//! [`decode`] is the inverse: it rebuilds a triple set that is isomorphic to
//! the encoded one.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::rdf::{Literal, Resource, Term, Triple};
use crate::vocab;

pub type LosslessMap = BTreeMap<String, Vec<LosslessValue>>;

/// Reserved key holding shared or cyclic blank nodes of an entity document.
pub const NODES_KEY: &str = "@nodes";
/// Reserved key holding owned blank-node structures with no incoming reference.
pub const DETACHED_KEY: &str = "@detached";
/// Reserved key carrying a shared node's local id inside its `@nodes` entry.
pub const NODE_ID_KEY: &str = "@node";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LosslessValue {
    /// An `xsd:string` literal.
    String(String),
    Iri(String),
    Typed { value: String, datatype: String },
    Lang { value: String, lang: String },
    List(Vec<LosslessValue>),
    /// An inlined blank node.
    Map(LosslessMap),
    /// A reference to a shared blank node in `@nodes`.
    Ref(String),
    /// A value that carries reified annotation payloads.
    Annotated {
        value: Box<LosslessValue>,
        annotations: Vec<LosslessMap>,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LosslessError {
    #[error("malformed lossless value: {0}")]
    Malformed(String),
    #[error("reference to unknown node '{0}'")]
    UnknownNode(String),
}

impl LosslessValue {
    pub fn from_literal(lit: &Literal) -> Self {
        match &lit.language {
            Some(lang) => LosslessValue::Lang {
                value: lit.lexical.clone(),
                lang: lang.clone(),
            },
            None if lit.datatype == vocab::xsd::STRING => LosslessValue::String(lit.lexical.clone()),
            None => LosslessValue::Typed {
                value: lit.lexical.clone(),
                datatype: lit.datatype.clone(),
            },
        }
    }

    /// The value with any reified annotations stripped.
    pub fn bare(&self) -> &LosslessValue {
        match self {
            LosslessValue::Annotated { value, .. } => value.bare(),
            other => other,
        }
    }

    pub fn annotations(&self) -> &[LosslessMap] {
        match self {
            LosslessValue::Annotated { annotations, .. } => annotations,
            _ => &[],
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self.bare() {
            LosslessValue::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&LosslessMap> {
        match self.bare() {
            LosslessValue::Map(m) => Some(m),
            _ => None,
        }
    }

    /// Literal form, if this is a literal.
    pub fn as_literal(&self) -> Option<Literal> {
        match self.bare() {
            LosslessValue::String(s) => Some(Literal::string(s.clone())),
            LosslessValue::Lang { value, lang } => Some(Literal::lang(value.clone(), lang)),
            LosslessValue::Typed { value, datatype } => Some(Literal::typed(value.clone(), datatype.clone())),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            LosslessValue::String(s) => Json::String(s.clone()),
            LosslessValue::Annotated { value, annotations } => {
                let mut obj = match value.to_json() {
                    Json::String(s) => {
                        let mut m = BTreeMap::new();
                        m.insert("@value".to_string(), Json::String(s));
                        m
                    }
                    Json::Object(m) => m.into_iter().collect(),
                    other => unreachable!("values encode as strings or objects, got {other}"),
                };
                obj.insert(
                    "@annotations".to_string(),
                    Json::Array(annotations.iter().map(map_to_json).collect()),
                );
                ordered_object(obj)
            }
            other => {
                let mut m = BTreeMap::new();
                match other {
                    LosslessValue::Iri(i) => {
                        m.insert("@iri".to_string(), Json::String(i.clone()));
                    }
                    LosslessValue::Typed { value, datatype } => {
                        m.insert("@value".to_string(), Json::String(value.clone()));
                        m.insert("@datatype".to_string(), Json::String(datatype.clone()));
                    }
                    LosslessValue::Lang { value, lang } => {
                        m.insert("@value".to_string(), Json::String(value.clone()));
                        m.insert("@lang".to_string(), Json::String(lang.clone()));
                    }
                    LosslessValue::List(items) => {
                        m.insert(
                            "@list".to_string(),
                            Json::Array(items.iter().map(LosslessValue::to_json).collect()),
                        );
                    }
                    LosslessValue::Ref(id) => {
                        m.insert("@ref".to_string(), Json::String(id.clone()));
                    }
                    LosslessValue::Map(map) => return map_to_json(map),
                    LosslessValue::String(_) | LosslessValue::Annotated { .. } => unreachable!(),
                }
                ordered_object(m)
            }
        }
    }

    pub fn from_json(json: &Json) -> Result<Self, LosslessError> {
        let malformed = |what: &str| LosslessError::Malformed(what.to_string());
        let obj = match json {
            Json::String(s) => return Ok(LosslessValue::String(s.clone())),
            Json::Object(obj) => obj,
            _ => return Err(malformed("value must be a string or an object")),
        };
        let annotations = match obj.get("@annotations") {
            Some(Json::Array(items)) => items
                .iter()
                .map(map_from_json)
                .collect::<Result<Vec<_>, _>>()?,
            Some(_) => return Err(malformed("@annotations must be an array")),
            None => Vec::new(),
        };
        let str_field = |key: &str| -> Result<Option<String>, LosslessError> {
            match obj.get(key) {
                Some(Json::String(s)) => Ok(Some(s.clone())),
                Some(_) => Err(LosslessError::Malformed(format!("{key} must be a string"))),
                None => Ok(None),
            }
        };
        let inner = if let Some(iri) = str_field("@iri")? {
            LosslessValue::Iri(iri)
        } else if let Some(id) = str_field("@ref")? {
            LosslessValue::Ref(id)
        } else if let Some(value) = str_field("@value")? {
            match (str_field("@datatype")?, str_field("@lang")?) {
                (Some(datatype), None) => LosslessValue::Typed { value, datatype },
                (None, Some(lang)) => LosslessValue::Lang { value, lang },
                (None, None) => LosslessValue::String(value),
                (Some(_), Some(_)) => return Err(malformed("literal with both datatype and language")),
            }
        } else if let Some(list) = obj.get("@list") {
            match list {
                Json::Array(items) => LosslessValue::List(
                    items.iter().map(LosslessValue::from_json).collect::<Result<_, _>>()?,
                ),
                _ => return Err(malformed("@list must be an array")),
            }
        } else {
            let mut stripped = obj.clone();
            stripped.remove("@annotations");
            LosslessValue::Map(map_from_json(&Json::Object(stripped))?)
        };
        Ok(if annotations.is_empty() {
            inner
        } else {
            LosslessValue::Annotated {
                value: Box::new(inner),
                annotations,
            }
        })
    }

    /// Compact canonical JSON text; the sort key for multi-valued properties.
    pub fn canonical_string(&self) -> String {
        self.to_json().to_string()
    }
}

fn ordered_object(entries: BTreeMap<String, Json>) -> Json {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k, v);
    }
    Json::Object(map)
}

pub fn map_to_json(map: &LosslessMap) -> Json {
    let mut out = Map::new();
    for (k, values) in map {
        out.insert(k.clone(), Json::Array(values.iter().map(LosslessValue::to_json).collect()));
    }
    Json::Object(out)
}

pub fn map_from_json(json: &Json) -> Result<LosslessMap, LosslessError> {
    let obj = json
        .as_object()
        .ok_or_else(|| LosslessError::Malformed("expected an object".into()))?;
    let mut map = LosslessMap::new();
    for (k, v) in obj {
        let values = v
            .as_array()
            .ok_or_else(|| LosslessError::Malformed(format!("values of {k} must be an array")))?;
        map.insert(
            k.clone(),
            values.iter().map(LosslessValue::from_json).collect::<Result<_, _>>()?,
        );
    }
    Ok(map)
}

impl Serialize for LosslessValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LosslessValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = Json::deserialize(deserializer)?;
        LosslessValue::from_json(&json).map_err(D::Error::custom)
    }
}

impl fmt::Display for LosslessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

fn is_reserved(key: &str) -> bool {
    key.starts_with('@')
}

/// Sorts (by canonical form) and dedupes the values of every key. Inlined
/// blank structures are distinct nodes even when they look alike, so only
/// ground values collapse.
fn canonicalize(map: &mut LosslessMap) {
    for values in map.values_mut() {
        let mut keyed: Vec<(String, LosslessValue)> =
            values.drain(..).map(|v| (v.canonical_string(), v)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0 && !matches!(a.1.bare(), LosslessValue::List(_) | LosslessValue::Map(_)));
        values.extend(keyed.into_iter().map(|(_, v)| v));
    }
}

// ---------------------------------------------------------------------------
// Encoding

struct Reifier<'t> {
    node: &'t str,
    kind: &'t str,
    source: &'t Term,
    property: &'t str,
    target: &'t Term,
}

struct Encoder<'t> {
    by_subject: HashMap<&'t Resource, Vec<&'t Triple>>,
    shared: HashSet<&'t str>,
    list_nodes: HashSet<&'t str>,
    attached: HashMap<&'t str, Reifier<'t>>,
    /// attached reifiers keyed by (source node, property)
    attachments: HashMap<(Term, &'t str), Vec<&'t str>>,
    visited: HashSet<&'t str>,
}

fn subject_term(r: &Resource) -> Term {
    Term::from(r.clone())
}

impl<'t> Encoder<'t> {
    fn triples_of(&self, node: &Resource) -> &[&'t Triple] {
        self.by_subject.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    fn blank_triples(&self, id: &str) -> &[&'t Triple] {
        self.triples_of(&Resource::Blank(id.to_string()))
    }

    /// Encodes a term in value position.
    fn value(&mut self, term: &'t Term) -> LosslessValue {
        match term {
            Term::Iri(i) => LosslessValue::Iri(i.clone()),
            Term::Literal(lit) => LosslessValue::from_literal(lit),
            Term::Blank(id) => {
                if self.shared.contains(id.as_str()) {
                    return LosslessValue::Ref(id.clone());
                }
                if self.list_nodes.contains(id.as_str()) {
                    return self.list(id);
                }
                self.visited.insert(id.as_str());
                LosslessValue::Map(self.node(&Resource::Blank(id.clone()), false))
            }
        }
    }

    fn list(&mut self, head: &'t str) -> LosslessValue {
        let mut items = Vec::new();
        let mut current = head;
        loop {
            self.visited.insert(current);
            let triples = self.blank_triples(current).to_vec();
            let first = triples.iter().find(|t| t.predicate == vocab::rdf::FIRST).expect("list node");
            let rest = triples.iter().find(|t| t.predicate == vocab::rdf::REST).expect("list node");
            items.push(self.value(&first.object));
            match &rest.object {
                Term::Blank(next) => current = next,
                _ => break,
            }
        }
        LosslessValue::List(items)
    }

    /// Encodes the outgoing triples of `subject`. Reifier payloads skip the
    /// four structural triples.
    fn node(&mut self, subject: &Resource, is_payload: bool) -> LosslessMap {
        let mut map = LosslessMap::new();
        let triples = self.triples_of(subject).to_vec();
        for t in triples {
            if is_payload
                && (t.predicate == vocab::owl::ANNOTATED_SOURCE
                    || t.predicate == vocab::owl::ANNOTATED_PROPERTY
                    || t.predicate == vocab::owl::ANNOTATED_TARGET
                    || t.predicate == vocab::rdf::TYPE)
            {
                continue;
            }
            let mut value = self.value(&t.object);
            let key = (subject_term(subject), t.predicate.as_str());
            if let Some(reifiers) = self.attachments.get(&key).cloned() {
                let mut payloads = Vec::new();
                for r in reifiers {
                    let target = self.attached[r].target;
                    if !self.matches_target(target, &t.object, &value) {
                        continue;
                    }
                    self.visited.insert(r);
                    self.mark_target_copy(target, &t.object);
                    let mut payload = self.node(&Resource::Blank(r.to_string()), true);
                    canonicalize(&mut payload);
                    payloads.push(payload);
                }
                if !payloads.is_empty() {
                    payloads.sort_by_key(|p| map_to_json(p).to_string());
                    value = LosslessValue::Annotated {
                        value: Box::new(value),
                        annotations: payloads,
                    };
                }
            }
            map.entry(t.predicate.clone()).or_default().push(value);
        }
        map
    }

    fn matches_target(&self, target: &Term, object: &Term, encoded: &LosslessValue) -> bool {
        match (target, object) {
            (Term::Blank(a), Term::Blank(b)) if a == b => true,
            (Term::Blank(a), _) if !self.shared.contains(a.as_str()) => {
                shape(&self.by_subject, target, &self.shared, &self.list_nodes) == *encoded.bare()
            }
            _ => target == object,
        }
    }

    fn mark_target_copy(&mut self, target: &'t Term, object: &Term) {
        if let Term::Blank(id) = target {
            if Some(id.as_str()) == object.as_blank() || self.shared.contains(id.as_str()) {
                return;
            }
            let mut stack = vec![id.as_str()];
            while let Some(n) = stack.pop() {
                if !self.visited.insert(n) {
                    continue;
                }
                for t in self.blank_triples(n) {
                    if let Term::Blank(next) = &t.object {
                        if !self.shared.contains(next.as_str()) {
                            stack.push(next);
                        }
                    }
                }
            }
        }
    }
}

/// Structural encoding of a term without reification folding; used to match
/// reification targets that are copies of anonymous expressions.
fn shape<'t>(
    by_subject: &HashMap<&'t Resource, Vec<&'t Triple>>,
    term: &Term,
    shared: &HashSet<&str>,
    lists: &HashSet<&str>,
) -> LosslessValue {
    fn go<'t>(
        by_subject: &HashMap<&'t Resource, Vec<&'t Triple>>,
        term: &Term,
        shared: &HashSet<&str>,
        lists: &HashSet<&str>,
        path: &mut Vec<String>,
    ) -> LosslessValue {
        match term {
            Term::Iri(i) => LosslessValue::Iri(i.clone()),
            Term::Literal(l) => LosslessValue::from_literal(l),
            Term::Blank(id) => {
                if shared.contains(id.as_str()) || path.contains(id) {
                    return LosslessValue::Ref(id.clone());
                }
                path.push(id.clone());
                let key = Resource::Blank(id.clone());
                let triples = by_subject.get(&key).map(Vec::as_slice).unwrap_or(&[]);
                let out = if lists.contains(id.as_str()) {
                    let mut items = Vec::new();
                    let mut node = id.clone();
                    loop {
                        let ts = by_subject
                            .get(&Resource::Blank(node.clone()))
                            .map(Vec::as_slice)
                            .unwrap_or(&[]);
                        let first = ts.iter().find(|t| t.predicate == vocab::rdf::FIRST);
                        let rest = ts.iter().find(|t| t.predicate == vocab::rdf::REST);
                        if let Some(first) = first {
                            items.push(go(by_subject, &first.object, shared, lists, path));
                        }
                        match rest.map(|t| &t.object) {
                            Some(Term::Blank(next)) if !path.contains(next) => node = next.clone(),
                            _ => break,
                        }
                    }
                    LosslessValue::List(items)
                } else {
                    let mut map = LosslessMap::new();
                    for t in triples {
                        map.entry(t.predicate.clone())
                            .or_default()
                            .push(go(by_subject, &t.object, shared, lists, path));
                    }
                    canonicalize(&mut map);
                    LosslessValue::Map(map)
                };
                path.pop();
                out
            }
        }
    }
    go(by_subject, term, shared, lists, &mut Vec::new())
}

/// Structural encoding of a blank-node subtree within a triple set. Two
/// anonymous expressions with equal shapes are copies of each other.
pub fn shape_of(triples: &[&Triple], term: &Term) -> LosslessValue {
    let mut by_subject: HashMap<&Resource, Vec<&Triple>> = HashMap::new();
    for t in triples {
        by_subject.entry(&t.subject).or_default().push(t);
    }
    shape(&by_subject, term, &HashSet::new(), &HashSet::new())
}

/// Blank nodes on a cycle of blank-node-to-blank-node edges (Tarjan SCC).
fn cyclic_nodes<'t>(edges: &HashMap<&'t str, Vec<&'t str>>) -> HashSet<&'t str> {
    struct State<'t> {
        index: HashMap<&'t str, usize>,
        low: HashMap<&'t str, usize>,
        on_stack: HashSet<&'t str>,
        stack: Vec<&'t str>,
        next: usize,
        out: HashSet<&'t str>,
    }
    let mut st = State {
        index: HashMap::new(),
        low: HashMap::new(),
        on_stack: HashSet::new(),
        stack: Vec::new(),
        next: 0,
        out: HashSet::new(),
    };
    let mut nodes: Vec<&str> = edges.keys().copied().collect();
    nodes.sort_unstable();
    for start in nodes {
        if st.index.contains_key(start) {
            continue;
        }
        // iterative Tarjan: (node, next child position)
        let mut call: Vec<(&str, usize)> = vec![(start, 0)];
        st.index.insert(start, st.next);
        st.low.insert(start, st.next);
        st.next += 1;
        st.stack.push(start);
        st.on_stack.insert(start);
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let children = edges.get(v).map(Vec::as_slice).unwrap_or(&[]);
            if *pos < children.len() {
                let w = children[*pos];
                *pos += 1;
                if !st.index.contains_key(w) {
                    st.index.insert(w, st.next);
                    st.low.insert(w, st.next);
                    st.next += 1;
                    st.stack.push(w);
                    st.on_stack.insert(w);
                    call.push((w, 0));
                } else if st.on_stack.contains(w) {
                    let lw = st.index[w];
                    let lv = st.low.get_mut(v).unwrap();
                    *lv = (*lv).min(lw);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let lv = st.low[v];
                    let lp = st.low.get_mut(parent).unwrap();
                    *lp = (*lp).min(lv);
                }
                if st.low[v] == st.index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = st.stack.pop().unwrap();
                        st.on_stack.remove(w);
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let self_loop = edges.get(v).is_some_and(|c| c.contains(&v));
                    if component.len() > 1 || self_loop {
                        st.out.extend(component);
                    }
                }
            }
        }
    }
    st.out
}

/// Encodes the triples owned by the entity `root` as a canonical lossless map.
///
/// `triples` must be exactly the entity's owned triples: those with the
/// entity as subject plus every triple of the blank nodes it owns.
pub fn encode(root: &str, triples: &[Triple]) -> LosslessValue {
    let root_res = Resource::Iri(root.to_string());
    let mut by_subject: HashMap<&Resource, Vec<&Triple>> = HashMap::new();
    let mut seen: HashSet<&Triple> = HashSet::new();
    for t in triples {
        if seen.insert(t) {
            by_subject.entry(&t.subject).or_default().push(t);
        }
    }
    let unique: Vec<&Triple> = {
        let mut v: Vec<&Triple> = seen.iter().copied().collect();
        v.sort();
        v
    };

    // reification candidates
    let mut candidates: HashMap<&str, Reifier> = HashMap::new();
    for (subject, ts) in &by_subject {
        let Resource::Blank(id) = subject else { continue };
        let types: Vec<&Term> = ts.iter().filter(|t| t.predicate == vocab::rdf::TYPE).map(|t| &t.object).collect();
        let one = |p: &str| {
            let found: Vec<&Term> = ts.iter().filter(|t| t.predicate == p).map(|t| &t.object).collect();
            if found.len() == 1 {
                Some(found[0])
            } else {
                None
            }
        };
        let kind = match types.as_slice() {
            [Term::Iri(k)] if k == vocab::owl::AXIOM || k == vocab::owl::ANNOTATION => k.as_str(),
            _ => continue,
        };
        let (Some(source), Some(Term::Iri(property)), Some(target)) = (
            one(vocab::owl::ANNOTATED_SOURCE),
            one(vocab::owl::ANNOTATED_PROPERTY),
            one(vocab::owl::ANNOTATED_TARGET),
        ) else {
            continue;
        };
        if matches!(source, Term::Literal(_)) {
            continue;
        }
        candidates.insert(
            id,
            Reifier {
                node: id,
                kind,
                source,
                property,
                target,
            },
        );
    }

    // incoming references to blank nodes
    let mut refs: HashMap<&str, Vec<&Triple>> = HashMap::new();
    for t in &unique {
        if let Term::Blank(b) = &t.object {
            refs.entry(b).or_default().push(t);
        }
    }

    // attachment: greatest fixpoint over the candidates
    let mut attached: HashSet<&str> = candidates.keys().copied().collect();
    loop {
        let mut removed = false;
        let current: Vec<&str> = attached.iter().copied().collect();
        for r in current {
            let c = &candidates[r];
            let source_ok = match c.source {
                Term::Iri(i) => i == root && c.kind == vocab::owl::AXIOM,
                Term::Blank(b) => attached.contains(b.as_str()) && c.kind == vocab::owl::ANNOTATION,
                Term::Literal(_) => false,
            };
            let incoming_ok = refs.get(r).map_or(true, |ts| {
                ts.iter().all(|t| {
                    t.predicate == vocab::owl::ANNOTATED_SOURCE
                        && t.subject.as_blank().is_some_and(|s| attached.contains(s))
                })
            });
            let subject = match c.source {
                Term::Iri(i) => Resource::Iri(i.clone()),
                Term::Blank(b) => Resource::Blank(b.clone()),
                Term::Literal(_) => unreachable!(),
            };
            let has_assertion = by_subject.get(&subject).is_some_and(|ts| {
                ts.iter().any(|t| {
                    t.predicate == c.property
                        && (t.object == *c.target
                            || (matches!(c.target, Term::Blank(_))
                                && matches!(t.object, Term::Blank(_))
                                && shape(&by_subject, c.target, &HashSet::new(), &HashSet::new())
                                    == shape(&by_subject, &t.object, &HashSet::new(), &HashSet::new())))
                })
            });
            if !(source_ok && incoming_ok && has_assertion) {
                attached.remove(r);
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }

    // in-degree excluding the structural triples of attached reifiers
    let is_structural = |t: &Triple| {
        t.subject.as_blank().is_some_and(|s| attached.contains(s))
            && matches!(
                t.predicate.as_str(),
                vocab::owl::ANNOTATED_SOURCE | vocab::owl::ANNOTATED_TARGET
            )
    };
    let mut indegree: HashMap<&str, usize> = HashMap::new();
    let mut edges: HashMap<&str, Vec<&str>> = HashMap::new();
    for t in &unique {
        if let Term::Blank(b) = &t.object {
            if let Resource::Blank(s) = &t.subject {
                edges.entry(s).or_default().push(b);
            }
            if !is_structural(t) {
                *indegree.entry(b).or_default() += 1;
            }
        }
    }
    // an annotatedTarget that is the very node of the assertion counts as a second reference
    for r in &attached {
        if let Term::Blank(b) = candidates[r].target {
            let c = &candidates[r];
            let subject = match c.source {
                Term::Iri(i) => Resource::Iri(i.clone()),
                Term::Blank(s) => Resource::Blank(s.clone()),
                Term::Literal(_) => unreachable!(),
            };
            let same_node = by_subject
                .get(&subject)
                .is_some_and(|ts| ts.iter().any(|t| t.predicate == c.property && t.object.as_blank() == Some(b)));
            if same_node {
                *indegree.entry(b).or_default() += 1;
            }
        }
    }
    let mut shared: HashSet<&str> = indegree.iter().filter(|(_, &n)| n > 1).map(|(b, _)| *b).collect();
    shared.extend(cyclic_nodes(&edges));

    // well-formed lists: every node has exactly first + rest, inner nodes referenced once
    let mut list_nodes: HashSet<&str> = HashSet::new();
    let mut inner_list: HashSet<&str> = HashSet::new();
    for t in &unique {
        if t.predicate != vocab::rdf::FIRST {
            continue;
        }
        let Resource::Blank(head) = &t.subject else { continue };
        if shared.contains(head.as_str()) {
            continue;
        }
        let mut node: &str = head;
        let mut chain = Vec::new();
        let ok = loop {
            let Some(ts) = by_subject.get(&Resource::Blank(node.to_string())) else { break false };
            let firsts = ts.iter().filter(|t| t.predicate == vocab::rdf::FIRST).count();
            let rests: Vec<&&Triple> = ts.iter().filter(|t| t.predicate == vocab::rdf::REST).collect();
            if ts.len() != 2 || firsts != 1 || rests.len() != 1 || shared.contains(node) || chain.contains(&node) {
                break false;
            }
            if candidates.contains_key(node) {
                break false;
            }
            chain.push(node);
            match &rests[0].object {
                Term::Iri(i) if i == vocab::rdf::NIL => break true,
                Term::Blank(next) if indegree.get(next.as_str()) == Some(&1) => node = next,
                _ => break false,
            }
        };
        if ok {
            inner_list.extend(chain.iter().skip(1).copied());
            list_nodes.insert(head);
        }
    }
    list_nodes.retain(|n| !inner_list.contains(n));

    let mut attachments: HashMap<(Term, &str), Vec<&str>> = HashMap::new();
    let mut attached_sorted: Vec<&str> = attached.iter().copied().collect();
    attached_sorted.sort_unstable();
    for r in &attached_sorted {
        let c = &candidates[r];
        attachments
            .entry((c.source.clone(), c.property))
            .or_default()
            .push(c.node);
    }

    let attached_map: HashMap<&str, Reifier> = candidates
        .into_iter()
        .filter(|(k, _)| attached.contains(k))
        .collect();

    let mut enc = Encoder {
        by_subject,
        shared,
        list_nodes,
        attached: attached_map,
        attachments,
        visited: HashSet::new(),
    };

    let mut root_map = enc.node(&root_res, false);
    canonicalize(&mut root_map);

    // owned structures with no incoming reference
    let mut detached_roots: Vec<&str> = enc
        .by_subject
        .keys()
        .filter_map(|r| r.as_blank())
        .filter(|b| indegree.get(b).copied().unwrap_or(0) == 0 && !enc.attached.contains_key(b))
        .collect();
    detached_roots.sort_unstable();
    let mut detached = Vec::new();
    for b in detached_roots {
        if enc.visited.contains(b) || enc.shared.contains(b) {
            continue;
        }
        enc.visited.insert(b);
        let mut m = enc.node(&Resource::Blank(b.to_string()), false);
        canonicalize(&mut m);
        detached.push(LosslessValue::Map(m));
    }

    // shared nodes, plus anything still unreached (cycles without an entry point)
    let mut nodes: BTreeMap<String, LosslessMap> = BTreeMap::new();
    loop {
        let mut pending: Vec<&str> = enc
            .by_subject
            .keys()
            .filter_map(|r| r.as_blank())
            .filter(|b| !enc.visited.contains(b))
            .collect();
        pending.sort_unstable();
        let Some(&next) = pending.first() else { break };
        enc.visited.insert(next);
        enc.shared.insert(next);
        let mut m = enc.node(&Resource::Blank(next.to_string()), false);
        canonicalize(&mut m);
        nodes.insert(next.to_string(), m);
    }
    // shared nodes that own no triples still need an entry
    let mut referenced = BTreeSet::new();
    collect_refs_map(&root_map, &mut referenced);
    for d in &detached {
        collect_refs(d, &mut referenced);
    }
    for m in nodes.values() {
        collect_refs_map(m, &mut referenced);
    }
    for r in referenced {
        nodes.entry(r).or_default();
    }

    detached.sort_by_key(|d| d.canonical_string());
    finish(root_map, detached, nodes)
}

fn collect_refs(v: &LosslessValue, out: &mut BTreeSet<String>) {
    match v {
        LosslessValue::Ref(id) => {
            out.insert(id.clone());
        }
        LosslessValue::List(items) => items.iter().for_each(|i| collect_refs(i, out)),
        LosslessValue::Map(m) => collect_refs_map(m, out),
        LosslessValue::Annotated { value, annotations } => {
            collect_refs(value, out);
            annotations.iter().for_each(|m| collect_refs_map(m, out));
        }
        _ => {}
    }
}

fn collect_refs_map(m: &LosslessMap, out: &mut BTreeSet<String>) {
    m.values().flatten().for_each(|v| collect_refs(v, out));
}

/// Renames raw blank-node ids to `n1, n2, ...` in traversal order and assembles the root.
fn finish(
    mut root: LosslessMap,
    mut detached: Vec<LosslessValue>,
    mut nodes: BTreeMap<String, LosslessMap>,
) -> LosslessValue {
    if nodes.is_empty() {
        if !detached.is_empty() {
            root.insert(DETACHED_KEY.to_string(), detached);
        }
        return LosslessValue::Map(root);
    }
    let mut names: HashMap<String, String> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    fn visit(v: &mut LosslessValue, names: &mut HashMap<String, String>, order: &mut Vec<String>) {
        match v {
            LosslessValue::Ref(id) => {
                let next = names.len() + 1;
                let name = names.entry(id.clone()).or_insert_with(|| {
                    order.push(id.clone());
                    format!("n{next}")
                });
                *id = name.clone();
            }
            LosslessValue::List(items) => items.iter_mut().for_each(|i| visit(i, names, order)),
            LosslessValue::Map(m) => visit_map(m, names, order),
            LosslessValue::Annotated { value, annotations } => {
                visit(value, names, order);
                annotations.iter_mut().for_each(|m| visit_map(m, names, order));
            }
            _ => {}
        }
    }
    fn visit_map(m: &mut LosslessMap, names: &mut HashMap<String, String>, order: &mut Vec<String>) {
        for values in m.values_mut() {
            values.iter_mut().for_each(|v| visit(v, names, order));
        }
    }
    visit_map(&mut root, &mut names, &mut order);
    for d in &mut detached {
        visit(d, &mut names, &mut order);
    }
    // nodes reachable only from other nodes, then unreachable ones by raw id
    let mut out_nodes: Vec<(String, LosslessMap)> = Vec::new();
    let mut i = 0;
    loop {
        if i >= order.len() {
            let remaining: Vec<String> = nodes.keys().cloned().collect();
            match remaining.first() {
                Some(raw) => {
                    let next = names.len() + 1;
                    names.insert(raw.clone(), format!("n{next}"));
                    order.push(raw.clone());
                }
                None => break,
            }
        }
        let raw = order[i].clone();
        i += 1;
        if let Some(mut m) = nodes.remove(&raw) {
            visit_map(&mut m, &mut names, &mut order);
            out_nodes.push((names[&raw].clone(), m));
        }
    }
    let node_values: Vec<LosslessValue> = out_nodes
        .into_iter()
        .map(|(name, mut m)| {
            m.insert(NODE_ID_KEY.to_string(), vec![LosslessValue::String(name)]);
            LosslessValue::Map(m)
        })
        .collect();
    root.insert(NODES_KEY.to_string(), node_values);
    if !detached.is_empty() {
        root.insert(DETACHED_KEY.to_string(), detached);
    }
    LosslessValue::Map(root)
}

// ---------------------------------------------------------------------------
// Decoding

struct Decoder {
    out: Vec<Triple>,
    fresh: usize,
    nodes: HashMap<String, String>,
}

impl Decoder {
    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("r{}", self.fresh)
    }

    fn value(&mut self, v: &LosslessValue) -> Result<Term, LosslessError> {
        Ok(match v {
            LosslessValue::String(s) => Term::Literal(Literal::string(s.clone())),
            LosslessValue::Iri(i) => Term::Iri(i.clone()),
            LosslessValue::Typed { value, datatype } => {
                Term::Literal(Literal::typed(value.clone(), datatype.clone()))
            }
            LosslessValue::Lang { value, lang } => Term::Literal(Literal::lang(value.clone(), lang)),
            LosslessValue::Ref(id) => Term::Blank(
                self.nodes
                    .get(id)
                    .cloned()
                    .ok_or_else(|| LosslessError::UnknownNode(id.clone()))?,
            ),
            LosslessValue::List(items) => {
                if items.is_empty() {
                    return Ok(Term::Iri(vocab::rdf::NIL.to_string()));
                }
                let ids: Vec<String> = items.iter().map(|_| self.fresh()).collect();
                for (i, item) in items.iter().enumerate() {
                    let obj = self.value(item)?;
                    let node = Resource::Blank(ids[i].clone());
                    self.out.push(Triple::new(node.clone(), vocab::rdf::FIRST, obj));
                    let rest = ids
                        .get(i + 1)
                        .map(|n| Term::Blank(n.clone()))
                        .unwrap_or_else(|| Term::Iri(vocab::rdf::NIL.to_string()));
                    self.out.push(Triple::new(node, vocab::rdf::REST, rest));
                }
                Term::Blank(ids[0].clone())
            }
            LosslessValue::Map(m) => {
                let id = self.fresh();
                self.map(&Resource::Blank(id.clone()), m, false)?;
                Term::Blank(id)
            }
            LosslessValue::Annotated { .. } => {
                return Err(LosslessError::Malformed("nested annotated value".into()))
            }
        })
    }

    fn map(&mut self, subject: &Resource, m: &LosslessMap, in_payload: bool) -> Result<(), LosslessError> {
        for (predicate, values) in m {
            if is_reserved(predicate) {
                if subject.as_iri().is_some() || predicate == NODE_ID_KEY {
                    continue;
                }
                return Err(LosslessError::Malformed(format!("reserved key {predicate} in a nested node")));
            }
            for v in values {
                let (inner, annotations) = match v {
                    LosslessValue::Annotated { value, annotations } => (value.as_ref(), annotations.as_slice()),
                    other => (other, &[][..]),
                };
                let object = self.value(inner)?;
                self.out.push(Triple::new(subject.clone(), predicate.clone(), object.clone()));
                for payload in annotations {
                    let reifier = Resource::Blank(self.fresh());
                    let kind = if in_payload { vocab::owl::ANNOTATION } else { vocab::owl::AXIOM };
                    // anonymous targets are written as a separate copy of the expression
                    let target = match inner {
                        LosslessValue::Map(_) | LosslessValue::List(_) => self.value(inner)?,
                        _ => object.clone(),
                    };
                    self.out.push(Triple::new(reifier.clone(), vocab::rdf::TYPE, Term::Iri(kind.into())));
                    self.out.push(Triple::new(
                        reifier.clone(),
                        vocab::owl::ANNOTATED_SOURCE,
                        subject_term(subject),
                    ));
                    self.out.push(Triple::new(
                        reifier.clone(),
                        vocab::owl::ANNOTATED_PROPERTY,
                        Term::Iri(predicate.clone()),
                    ));
                    self.out.push(Triple::new(reifier.clone(), vocab::owl::ANNOTATED_TARGET, target));
                    self.map(&reifier, payload, true)?;
                }
            }
        }
        Ok(())
    }
}

/// Rebuilds the triples encoded by [`encode`] for entity `root`.
pub fn decode(root: &str, value: &LosslessValue) -> Result<Vec<Triple>, LosslessError> {
    let LosslessValue::Map(map) = value else {
        return Err(LosslessError::Malformed("entity document must be a map".into()));
    };
    let mut dec = Decoder {
        out: Vec::new(),
        fresh: 0,
        nodes: HashMap::new(),
    };
    let node_entries = map.get(NODES_KEY).map(Vec::as_slice).unwrap_or(&[]);
    let mut node_maps = Vec::new();
    for entry in node_entries {
        let m = entry
            .as_map()
            .ok_or_else(|| LosslessError::Malformed("@nodes entries must be maps".into()))?;
        let id = match m.get(NODE_ID_KEY).map(Vec::as_slice) {
            Some([LosslessValue::String(id)]) => id.clone(),
            _ => return Err(LosslessError::Malformed("@nodes entry without @node id".into())),
        };
        let blank = dec.fresh();
        dec.nodes.insert(id, blank.clone());
        node_maps.push((blank, m));
    }
    dec.map(&Resource::Iri(root.to_string()), map, false)?;
    for (blank, m) in node_maps {
        dec.map(&Resource::Blank(blank), m, false)?;
    }
    for d in map.get(DETACHED_KEY).map(Vec::as_slice).unwrap_or(&[]) {
        let m = d
            .as_map()
            .ok_or_else(|| LosslessError::Malformed("@detached entries must be maps".into()))?;
        let blank = Resource::Blank(dec.fresh());
        dec.map(&blank, m, false)?;
    }
    Ok(dec.out)
}
