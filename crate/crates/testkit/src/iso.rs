//! RDF graph isomorphism by blank-node bijection search.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use ols_core::rdf::{Resource, Term, Triple};

fn blanks(triples: &BTreeSet<Triple>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for t in triples {
        if let Resource::Blank(b) = &t.subject {
            out.insert(b.clone());
        }
        if let Term::Blank(b) = &t.object {
            out.insert(b.clone());
        }
    }
    out
}

fn is_ground(t: &Triple) -> bool {
    !matches!(t.subject, Resource::Blank(_)) && !matches!(t.object, Term::Blank(_))
}

/// Colour refinement: start from each blank node's ground neighbourhood and
/// fold in neighbour colours until the partition stops changing.
fn colours(triples: &BTreeSet<Triple>, nodes: &BTreeSet<String>) -> HashMap<String, String> {
    let mut colour: HashMap<String, String> = nodes.iter().map(|n| (n.clone(), String::new())).collect();
    for _ in 0..=nodes.len().min(8) {
        let mut next: HashMap<String, String> = HashMap::new();
        for n in nodes {
            let mut sig: Vec<String> = Vec::new();
            for t in triples {
                if matches!(&t.subject, Resource::Blank(b) if b == n) {
                    let o = match &t.object {
                        Term::Blank(b) => format!("_{}", colour[b]),
                        other => format!("{other:?}"),
                    };
                    sig.push(format!("out {} {o}", t.predicate));
                }
                if matches!(&t.object, Term::Blank(b) if b == n) {
                    let s = match &t.subject {
                        Resource::Blank(b) => format!("_{}", colour[b]),
                        other => format!("{other:?}"),
                    };
                    sig.push(format!("in {} {s}", t.predicate));
                }
            }
            sig.sort();
            next.insert(n.clone(), format!("{:x}", fnv(&sig.join("|"))));
        }
        let classes = |c: &HashMap<String, String>| c.values().collect::<BTreeSet<_>>().len();
        let stable = classes(&next) == classes(&colour);
        colour = next;
        if stable {
            break;
        }
    }
    colour
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn map_triple(t: &Triple, m: &HashMap<String, String>) -> Option<Triple> {
    let subject = match &t.subject {
        Resource::Blank(b) => Resource::Blank(m.get(b)?.clone()),
        s => s.clone(),
    };
    let object = match &t.object {
        Term::Blank(b) => Term::Blank(m.get(b)?.clone()),
        o => o.clone(),
    };
    Some(Triple {
        subject,
        predicate: t.predicate.clone(),
        object,
    })
}

/// True when the two triple sets are equal up to a renaming of blank nodes.
/// Duplicates are ignored.
pub fn isomorphic(a: &[Triple], b: &[Triple]) -> bool {
    let a: BTreeSet<Triple> = a.iter().cloned().collect();
    let b: BTreeSet<Triple> = b.iter().cloned().collect();
    if a.len() != b.len() {
        return false;
    }
    let ground_a: BTreeSet<&Triple> = a.iter().filter(|t| is_ground(t)).collect();
    let ground_b: BTreeSet<&Triple> = b.iter().filter(|t| is_ground(t)).collect();
    if ground_a != ground_b {
        return false;
    }
    let (na, nb) = (blanks(&a), blanks(&b));
    if na.len() != nb.len() {
        return false;
    }
    let (ca, cb) = (colours(&a, &na), colours(&b, &nb));
    let mut by_colour: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for n in &nb {
        by_colour.entry(&cb[n]).or_default().push(n);
    }
    let mut count_a: BTreeMap<&String, usize> = BTreeMap::new();
    for n in &na {
        *count_a.entry(&ca[n]).or_default() += 1;
    }
    if count_a.len() != by_colour.len() || count_a.iter().any(|(c, k)| by_colour.get(c).map(Vec::len) != Some(*k)) {
        return false;
    }
    let mut order: Vec<&String> = na.iter().collect();
    order.sort_by_key(|n| (by_colour[&ca[*n]].len(), (*n).clone()));
    let blank_triples: Vec<&Triple> = a.iter().filter(|t| !is_ground(t)).collect();
    let mut mapping = HashMap::new();
    let mut used = BTreeSet::new();
    search(0, &order, &ca, &by_colour, &blank_triples, &b, &mut mapping, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    i: usize,
    order: &[&String],
    ca: &HashMap<String, String>,
    by_colour: &BTreeMap<&String, Vec<&String>>,
    triples: &[&Triple],
    b: &BTreeSet<Triple>,
    mapping: &mut HashMap<String, String>,
    used: &mut BTreeSet<String>,
) -> bool {
    if i == order.len() {
        return triples.iter().all(|t| map_triple(t, mapping).is_some_and(|m| b.contains(&m)));
    }
    let n = order[i];
    for &candidate in &by_colour[&ca[n]] {
        if used.contains(candidate) {
            continue;
        }
        mapping.insert(n.clone(), candidate.clone());
        used.insert(candidate.clone());
        // every triple whose blank nodes are all mapped must already hold
        let consistent = triples
            .iter()
            .filter_map(|t| map_triple(t, mapping))
            .all(|m| b.contains(&m));
        if consistent && search(i + 1, order, ca, by_colour, triples, b, mapping, used) {
            return true;
        }
        mapping.remove(n);
        used.remove(candidate);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        let subject = match s.strip_prefix("_:") {
            Some(b) => Resource::Blank(b.into()),
            None => Resource::Iri(s.into()),
        };
        let object = match o.strip_prefix("_:") {
            Some(b) => Term::Blank(b.into()),
            None => Term::Iri(o.into()),
        };
        Triple::new(subject, p, object)
    }

    #[test]
    fn renaming_is_isomorphic() {
        let a = [t("x", "p", "_:a"), t("_:a", "q", "_:b"), t("_:b", "r", "y")];
        let b = [t("x", "p", "_:z"), t("_:z", "q", "_:w"), t("_:w", "r", "y")];
        assert!(isomorphic(&a, &b));
        let c = [t("x", "p", "_:z"), t("_:z", "q", "_:w"), t("_:w", "r", "other")];
        assert!(!isomorphic(&a, &c));
    }

    #[test]
    fn symmetric_structures_need_search() {
        let a = [t("_:a", "p", "_:b"), t("_:b", "p", "_:a"), t("_:c", "p", "_:d"), t("_:d", "p", "_:c")];
        let b = [t("_:1", "p", "_:2"), t("_:2", "p", "_:1"), t("_:3", "p", "_:4"), t("_:4", "p", "_:3")];
        assert!(isomorphic(&a, &b));
        let cycle4 = [t("_:1", "p", "_:2"), t("_:2", "p", "_:3"), t("_:3", "p", "_:4"), t("_:4", "p", "_:1")];
        assert!(!isomorphic(&a, &cycle4));
    }

    #[test]
    fn ground_mismatch_and_sizes() {
        assert!(isomorphic(&[], &[]));
        assert!(!isomorphic(&[t("a", "p", "b")], &[t("a", "p", "c")]));
        assert!(!isomorphic(&[t("a", "p", "_:x")], &[t("a", "p", "_:x"), t("a", "p", "_:y")]));
    }
}
