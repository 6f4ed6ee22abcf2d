// Expects the wasm-bindgen output (target "web") in ./pkg.
import init, { Demo } from "./pkg/ols_wasm.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function text(tag, content, cls) {
  const el = document.createElement(tag);
  el.textContent = content;
  if (cls) el.className = cls;
  return el;
}

function showError(where, e) {
  where.replaceChildren(text("p", String(e.message ?? e), "error"));
}

function useDataset(d) {
  demo = d;
  const summary = JSON.parse(demo.summary());
  const langs = new Set();
  $("summary").replaceChildren(
    ...summary.ontologies.map((o) => {
      o.languages.forEach((l) => langs.add(l));
      return text("p", `${o.id}: ${o.counts.classes} classes, ${o.counts.properties} properties, languages ${o.languages.join(", ")}`);
    }),
  );
  $("lang").replaceChildren(text("option", "default"), ...[...langs].sort().map((l) => text("option", l)));
  $("lang").options[0].value = "";
  $("hits").replaceChildren();
  $("entity").replaceChildren();
  runSearch();
}

function runSearch() {
  const q = $("q").value.trim();
  if (!demo || !q) {
    $("hits").replaceChildren();
    return;
  }
  try {
    const res = JSON.parse(demo.search(q, $("lang").value || undefined, $("exact").checked));
    $("hits").replaceChildren(
      ...res.hits.map((h) => {
        const li = text("li", h.label ?? h.iri);
        li.append(text("span", h.ontology_id, "tag"), text("span", ` T${h.tier} ${h.curie ?? ""}`, "tier"));
        li.onclick = () => showEntity(h.ontology_id, h.iri);
        return li;
      }),
    );
  } catch (e) {
    showError($("hits"), e);
  }
}

function neighbourList(title, items, ontology) {
  const dd = document.createElement("dd");
  if (!items.length) dd.textContent = "none";
  for (const n of items) {
    const a = text("a", n.label ?? n.iri);
    a.href = "#";
    a.onclick = (ev) => {
      ev.preventDefault();
      showEntity(ontology, n.iri);
    };
    dd.append(a);
    if (n.defining_ontology && n.defining_ontology !== ontology) dd.append(text("span", n.defining_ontology.toUpperCase(), "tag"));
    dd.append(" ");
  }
  return [text("dt", title), dd];
}

function showEntity(ontology, iri) {
  const box = $("entity");
  try {
    const e = JSON.parse(demo.entity(ontology, iri, $("lang").value || undefined));
    const dl = document.createElement("dl");
    dl.append(text("dt", "IRI"), text("dd", e.iri));
    if (e.curie) dl.append(text("dt", "CURIE"), text("dd", e.curie));
    for (const [lang, defs] of Object.entries(e.definitions)) dl.append(text("dt", `definition (${lang})`), text("dd", defs.join("; ")));
    for (const [lang, syns] of Object.entries(e.synonyms)) dl.append(text("dt", `synonyms (${lang})`), text("dd", syns.join(", ")));
    for (const a of e.axioms) dl.append(text("dt", a.heading), text("dd", a.text));
    for (const r of e.reified) {
      const value = (v) => v.lexical ?? v.iri ?? JSON.stringify(v);
      const notes = Object.values(r.payload).flat().map(value);
      dl.append(text("dt", r.property), text("dd", `${value(r.target)} [${notes.join("; ")}]`));
    }
    dl.append(...neighbourList("parents", e.parents, ontology), ...neighbourList("children", e.children, ontology));
    const heading = text("h2", e.label ?? e.iri);
    if (e.defining_ontology && e.defining_ontology !== ontology) heading.append(text("span", e.defining_ontology.toUpperCase(), "tag"));
    if (e.is_obsolete) heading.append(text("span", "obsolete", "tag"));
    box.replaceChildren(heading, dl);
  } catch (err) {
    showError(box, err);
  }
}

await init();
$("status").textContent = "Ready.";
$("use-fixture").onclick = () => useDataset(Demo.withFixture());
$("load-ttl").onclick = () => {
  try {
    useDataset(Demo.fromTurtle($("ttl-id").value, $("ttl-prefix").value, $("ttl-base").value, $("ttl").value));
  } catch (e) {
    showError($("summary"), e);
  }
};
let timer = null;
$("q").oninput = () => {
  clearTimeout(timer);
  timer = setTimeout(runSearch, 150);
};
$("lang").onchange = runSearch;
$("exact").onchange = runSearch;
useDataset(Demo.withFixture());
