//! RDF/XML reader for the subset used by published OWL ontologies.
//!
//! The document is first read into a small element tree (namespaces and DTD
//! entities resolved), then interpreted with the node/property element
//! grammar. `rdf:parseType="Literal"` and property-element reification
//! (`rdf:ID` on a property element) are rejected with [`ParseError::Unsupported`].

use std::collections::HashMap;

use quick_xml::events::Event;
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;

use super::{resolve_iri, BlankNamer, Literal, ParseError, Resource, Term, Triple};
use crate::vocab;

const XML_LANG: &[u8] = b"xml:lang";
const XML_BASE: &[u8] = b"xml:base";

#[derive(Debug, Default)]
struct Element {
    iri: String,
    qname: String,
    attrs: Vec<Attr>,
    lang: Option<String>,
    base: Option<String>,
    children: Vec<Element>,
    text: String,
}

#[derive(Debug)]
struct Attr {
    iri: String,
    value: String,
}

impl Element {
    fn attr(&self, local: &str) -> Option<&str> {
        let iri = format!("{}{local}", vocab::RDF);
        self.attrs.iter().find(|a| a.iri == iri).map(|a| a.value.as_str())
    }
}

pub(super) fn parse<F: FnMut(Triple)>(
    input: &[u8],
    base: Option<&str>,
    blanks: BlankNamer,
    sink: F,
) -> Result<(), ParseError> {
    let root = match read_tree(input)? {
        Some(root) => root,
        None => return Ok(()),
    };
    let mut interp = Interpreter { blanks, sink };
    let ctx = Scope {
        base: base.map(str::to_string),
        lang: None,
    };
    let rdf_root = format!("{}RDF", vocab::RDF);
    if root.iri == rdf_root {
        let ctx = ctx.enter(&root, &root.qname)?;
        for (i, child) in root.children.iter().enumerate() {
            let path = format!("{}/{}[{}]", root.qname, child.qname, i + 1);
            interp.node_element(child, &ctx, &path)?;
        }
    } else {
        let path = root.qname.clone();
        interp.node_element(&root, &ctx, &path)?;
    }
    Ok(())
}

fn xml_error(path: &str, message: impl Into<String>) -> ParseError {
    ParseError::RdfXml {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Extracts `<!ENTITY name "value">` declarations from a DOCTYPE body.
fn parse_entities(doctype: &str, entities: &mut HashMap<String, String>) {
    let mut rest = doctype;
    while let Some(idx) = rest.find("<!ENTITY") {
        rest = &rest[idx + "<!ENTITY".len()..];
        let trimmed = rest.trim_start();
        let name_end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let name = &trimmed[..name_end];
        let after = trimmed[name_end..].trim_start();
        let quote = match after.chars().next() {
            Some(q @ ('"' | '\'')) => q,
            _ => continue,
        };
        if let Some(end) = after[1..].find(quote) {
            let raw = &after[1..1 + end];
            let value = expand_entities(raw, entities);
            entities.insert(name.to_string(), value);
        }
    }
}

fn expand_entities(raw: &str, entities: &HashMap<String, String>) -> String {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp + 1..];
        match tail.find(';') {
            Some(semi) if entities.contains_key(&tail[..semi]) => {
                out.push_str(&entities[&tail[..semi]]);
                rest = &tail[semi + 1..];
            }
            _ => {
                out.push('&');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

fn resolve_predefined(name: &str) -> Option<&'static str> {
    match name {
        "lt" => Some("<"),
        "gt" => Some(">"),
        "amp" => Some("&"),
        "apos" => Some("'"),
        "quot" => Some("\""),
        _ => None,
    }
}

fn read_tree(input: &[u8]) -> Result<Option<Element>, ParseError> {
    let mut reader = NsReader::from_reader(input);
    reader.config_mut().expand_empty_elements = true;
    let mut entities: HashMap<String, String> = HashMap::new();
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    let mut buf = Vec::new();

    let path_of = |stack: &[Element]| {
        let names: Vec<&str> = stack.iter().map(|e| e.qname.as_str()).collect();
        if names.is_empty() {
            "/".to_string()
        } else {
            names.join("/")
        }
    };

    loop {
        let position = reader.buffer_position();
        let (ns, event) = match reader.read_resolved_event_into(&mut buf) {
            Ok(ev) => ev,
            Err(e) => {
                return Err(xml_error(
                    &path_of(&stack),
                    format!("malformed XML near byte {position}: {e}"),
                ))
            }
        };
        match event {
            Event::DocType(text) => {
                let body = String::from_utf8_lossy(text.as_ref()).into_owned();
                parse_entities(&body, &mut entities);
            }
            Event::Start(start) => {
                let qname = String::from_utf8_lossy(start.name().as_ref()).into_owned();
                let iri = match ns {
                    ResolveResult::Bound(namespace) => format!(
                        "{}{}",
                        String::from_utf8_lossy(namespace.as_ref()),
                        String::from_utf8_lossy(start.local_name().as_ref())
                    ),
                    // reported when the element is interpreted; literal content may hold such names
                    _ => String::new(),
                };
                let mut element = Element {
                    iri,
                    qname,
                    ..Default::default()
                };
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| xml_error(&path_of(&stack), e.to_string()))?;
                    let key = attr.key.as_ref();
                    let value = attr
                        .decode_and_unescape_value_with(reader.decoder(), |name| {
                            resolve_predefined(name).or_else(|| entities.get(name).map(String::as_str))
                        })
                        .map_err(|e| xml_error(&path_of(&stack), e.to_string()))?
                        .into_owned();
                    if key == XML_LANG {
                        element.lang = Some(value);
                        continue;
                    }
                    if key == XML_BASE {
                        element.base = Some(value);
                        continue;
                    }
                    if key == b"xmlns" || key.starts_with(b"xmlns:") || key.starts_with(b"xml:") {
                        continue;
                    }
                    let (resolved, local) = reader.resolve_attribute(attr.key);
                    let local = String::from_utf8_lossy(local.as_ref()).into_owned();
                    let iri = match resolved {
                        ResolveResult::Bound(namespace) => {
                            format!("{}{}", String::from_utf8_lossy(namespace.as_ref()), local)
                        }
                        // bare syntax attributes are read as their rdf: forms
                        _ if matches!(
                            local.as_str(),
                            "about" | "resource" | "ID" | "nodeID" | "datatype" | "parseType"
                        ) =>
                        {
                            format!("{}{}", vocab::RDF, local)
                        }
                        _ => continue,
                    };
                    element.attrs.push(Attr { iri, value });
                }
                stack.push(element);
            }
            Event::End(_) => {
                let element = stack.pop().expect("reader checks element nesting");
                match stack.last_mut() {
                    Some(parent) => parent.children.push(element),
                    None => root = Some(element),
                }
            }
            Event::Text(text) => {
                let value = text
                    .unescape_with(|name| {
                        resolve_predefined(name).or_else(|| entities.get(name).map(String::as_str))
                    })
                    .map_err(|e| xml_error(&path_of(&stack), e.to_string()))?;
                if let Some(current) = stack.last_mut() {
                    current.text.push_str(&value);
                }
            }
            Event::CData(data) => {
                if let Some(current) = stack.last_mut() {
                    current.text.push_str(&String::from_utf8_lossy(data.as_ref()));
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(xml_error(&path_of(&stack), "unexpected end of document"));
    }
    Ok(root)
}

#[derive(Debug, Clone)]
struct Scope {
    base: Option<String>,
    lang: Option<String>,
}

impl Scope {
    fn enter(&self, el: &Element, path: &str) -> Result<Scope, ParseError> {
        let mut next = self.clone();
        if let Some(base) = &el.base {
            let resolved = resolve_iri(self.base.as_deref(), base).map_err(|m| xml_error(path, m))?;
            // xml:base never carries a fragment into resolution
            next.base = Some(resolved.split('#').next().unwrap_or_default().to_string());
        }
        if let Some(lang) = &el.lang {
            next.lang = if lang.is_empty() {
                None
            } else {
                Some(lang.to_ascii_lowercase())
            };
        }
        Ok(next)
    }

    fn resolve(&self, reference: &str, path: &str) -> Result<String, ParseError> {
        resolve_iri(self.base.as_deref(), reference).map_err(|m| xml_error(path, m))
    }

    fn literal(&self, text: &str) -> Literal {
        match &self.lang {
            Some(tag) => Literal::lang(text, tag),
            None => Literal::string(text),
        }
    }
}

struct Interpreter<F> {
    blanks: BlankNamer,
    sink: F,
}

fn rdf(local: &str) -> String {
    format!("{}{local}", vocab::RDF)
}

fn is_syntax_attr(iri: &str) -> bool {
    iri.strip_prefix(vocab::RDF).is_some_and(|local| {
        matches!(local, "about" | "ID" | "nodeID" | "resource" | "datatype" | "parseType")
    })
}

impl<F: FnMut(Triple)> Interpreter<F> {
    fn emit(&mut self, subject: Resource, predicate: String, object: Term) {
        (self.sink)(Triple {
            subject,
            predicate,
            object,
        });
    }

    fn node_element(&mut self, el: &Element, outer: &Scope, path: &str) -> Result<Resource, ParseError> {
        if el.iri.is_empty() {
            return Err(xml_error(path, "element name is not in a namespace"));
        }
        let scope = outer.enter(el, path)?;
        let subject = if let Some(about) = el.attr("about") {
            Resource::Iri(scope.resolve(about, path)?)
        } else if let Some(id) = el.attr("ID") {
            Resource::Iri(scope.resolve(&format!("#{id}"), path)?)
        } else if let Some(node_id) = el.attr("nodeID") {
            Resource::Blank(self.blanks.labeled(node_id))
        } else {
            Resource::Blank(self.blanks.fresh())
        };
        if el.iri != rdf("Description") {
            if el.iri == rdf("li") || el.iri == rdf("RDF") {
                return Err(xml_error(path, format!("{} is not allowed as a node element", el.qname)));
            }
            self.emit(subject.clone(), vocab::rdf::TYPE.to_string(), Term::Iri(el.iri.clone()));
        }
        self.property_attributes(&subject, el, &scope, path)?;
        if !el.text.trim().is_empty() {
            return Err(xml_error(path, "unexpected text content in a node element"));
        }
        let mut li = 0;
        for (i, child) in el.children.iter().enumerate() {
            let child_path = format!("{path}/{}[{}]", child.qname, i + 1);
            self.property_element(child, &subject, &scope, &child_path, &mut li)?;
        }
        Ok(subject)
    }

    fn property_attributes(
        &mut self,
        subject: &Resource,
        el: &Element,
        scope: &Scope,
        path: &str,
    ) -> Result<(), ParseError> {
        for attr in &el.attrs {
            if is_syntax_attr(&attr.iri) {
                continue;
            }
            if attr.iri == vocab::rdf::TYPE {
                let iri = scope.resolve(&attr.value, path)?;
                self.emit(subject.clone(), attr.iri.clone(), Term::Iri(iri));
            } else {
                self.emit(subject.clone(), attr.iri.clone(), Term::Literal(scope.literal(&attr.value)));
            }
        }
        Ok(())
    }

    fn property_element(
        &mut self,
        el: &Element,
        subject: &Resource,
        outer: &Scope,
        path: &str,
        li: &mut usize,
    ) -> Result<(), ParseError> {
        let scope = outer.enter(el, path)?;
        let predicate = if el.iri == rdf("li") {
            *li += 1;
            rdf(&format!("_{li}"))
        } else {
            el.iri.clone()
        };
        if el.attr("ID").is_some() {
            return Err(ParseError::Unsupported {
                construct: "rdf:ID on a property element (reification)".into(),
                path: path.to_string(),
            });
        }
        match el.attr("parseType") {
            Some("Resource") => {
                let node = Resource::Blank(self.blanks.fresh());
                self.emit(subject.clone(), predicate, Term::from(node.clone()));
                let mut inner_li = 0;
                for (i, child) in el.children.iter().enumerate() {
                    let child_path = format!("{path}/{}[{}]", child.qname, i + 1);
                    self.property_element(child, &node, &scope, &child_path, &mut inner_li)?;
                }
                return Ok(());
            }
            Some("Collection") => {
                let mut items = Vec::new();
                for (i, child) in el.children.iter().enumerate() {
                    let child_path = format!("{path}/{}[{}]", child.qname, i + 1);
                    items.push(self.node_element(child, &scope, &child_path)?);
                }
                let head = self.list(items);
                self.emit(subject.clone(), predicate, head);
                return Ok(());
            }
            Some(other) => {
                return Err(ParseError::Unsupported {
                    construct: format!("rdf:parseType=\"{other}\""),
                    path: path.to_string(),
                })
            }
            None => {}
        }
        if el.iri.is_empty() {
            return Err(xml_error(path, "element name is not in a namespace"));
        }
        if !el.children.is_empty() {
            if el.children.len() > 1 {
                return Err(xml_error(path, "property element has more than one node element"));
            }
            if !el.text.trim().is_empty() {
                return Err(xml_error(path, "mixed content in a property element"));
            }
            let child = &el.children[0];
            let child_path = format!("{path}/{}[1]", child.qname);
            let object = self.node_element(child, &scope, &child_path)?;
            self.emit(subject.clone(), predicate, Term::from(object));
            return Ok(());
        }
        let has_property_attrs = el.attrs.iter().any(|a| !is_syntax_attr(&a.iri));
        let object = if let Some(resource) = el.attr("resource") {
            Some(Resource::Iri(scope.resolve(resource, path)?))
        } else if let Some(node_id) = el.attr("nodeID") {
            Some(Resource::Blank(self.blanks.labeled(node_id)))
        } else if has_property_attrs {
            Some(Resource::Blank(self.blanks.fresh()))
        } else {
            None
        };
        match object {
            Some(object) => {
                self.emit(subject.clone(), predicate, Term::from(object.clone()));
                self.property_attributes(&object, el, &scope, path)?;
            }
            None => {
                let literal = match el.attr("datatype") {
                    Some(dt) => Literal::typed(el.text.clone(), scope.resolve(dt, path)?),
                    None => scope.literal(&el.text),
                };
                self.emit(subject.clone(), predicate, Term::Literal(literal));
            }
        }
        Ok(())
    }

    fn list(&mut self, items: Vec<Resource>) -> Term {
        if items.is_empty() {
            return Term::Iri(vocab::rdf::NIL.to_string());
        }
        let nodes: Vec<String> = items.iter().map(|_| self.blanks.fresh()).collect();
        for (i, item) in items.into_iter().enumerate() {
            let node = Resource::Blank(nodes[i].clone());
            self.emit(node.clone(), vocab::rdf::FIRST.to_string(), Term::from(item));
            let rest = match nodes.get(i + 1) {
                Some(next) => Term::Blank(next.clone()),
                None => Term::Iri(vocab::rdf::NIL.to_string()),
            };
            self.emit(node, vocab::rdf::REST.to_string(), rest);
        }
        Term::Blank(nodes[0].clone())
    }
}
