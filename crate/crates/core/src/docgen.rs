//! Library documentation: template inventory, call hierarchy and
//! parameter tables, with descriptions from a sidecar file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Library, term_text};
use crate::typecheck::dependency_graph;
use crate::workflow::{Workflow, suggest_order};
use crate::workflow::resolve_name;

/// Whether each library template is user-facing: called from no other
/// template's body. Self-calls do not count.
pub fn classify_user_facing(lib: &Library) -> BTreeMap<String, bool> {
    let called: BTreeSet<String> =
        dependency_graph(lib).into_iter().filter(|(caller, callee)| caller != callee).map(|(_, callee)| callee).collect();
    lib.templates.keys().map(|iri| (iri.clone(), !called.contains(iri))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyFormat {
    Text,
    Dot,
}

fn quote_dot(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Call hierarchy as sorted `caller -> callee` lines or a dot digraph.
pub fn render_hierarchy(lib: &Library, format: HierarchyFormat) -> String {
    let prefixes = lib.effective_prefixes();
    let edges: BTreeSet<(String, String)> = dependency_graph(lib)
        .into_iter()
        .map(|(a, b)| (prefixes.display_iri(&a), prefixes.display_iri(&b)))
        .collect();
    let mut out = String::new();
    match format {
        HierarchyFormat::Text => {
            let _ = writeln!(out, "# call hierarchy: {} edge(s)", edges.len());
            for (a, b) in &edges {
                let _ = writeln!(out, "{a} -> {b}");
            }
        }
        HierarchyFormat::Dot => {
            let mut nodes: BTreeSet<String> = lib.templates.keys().map(|iri| prefixes.display_iri(iri)).collect();
            nodes.extend(edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
            out.push_str("digraph templates {\n");
            for n in &nodes {
                let _ = writeln!(out, "    {};", quote_dot(n));
            }
            for (a, b) in &edges {
                let _ = writeln!(out, "    {} -> {};", quote_dot(a), quote_dot(b));
            }
            out.push_str("}\n");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub ptype: String,
    pub optional: bool,
    pub default: Option<String>,
    pub description: Option<String>,
    pub example: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateDoc {
    pub iri: String,
    pub user_facing: bool,
    pub parameters: Vec<ParamDoc>,
    pub description: String,
    pub limitations: String,
    pub changelog: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DocError {
    #[error("invalid documentation file: {0}")]
    Toml(String),
    #[error("documentation key '{0}': {1}")]
    Key(String, String),
    #[error("documentation for {template} describes unknown parameter ?{param}")]
    UnknownParam { template: String, param: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarEntry {
    #[serde(default)]
    description: String,
    #[serde(default)]
    limitations: String,
    #[serde(default)]
    changelog: Vec<String>,
    #[serde(default)]
    params: BTreeMap<String, SidecarParam>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarParam {
    description: Option<String>,
    example: Option<String>,
}

/// Signature-derived documentation with empty descriptions.
pub fn signature_doc(lib: &Library, iri: &str) -> Option<TemplateDoc> {
    let t = lib.templates.get(iri)?;
    let prefixes = lib.effective_prefixes();
    let user_facing = classify_user_facing(lib)[iri];
    Some(TemplateDoc {
        iri: iri.to_string(),
        user_facing,
        parameters: t
            .parameters
            .iter()
            .map(|p| ParamDoc {
                name: p.name.clone(),
                ptype: p.ptype.display(&prefixes),
                optional: p.optional,
                default: p.default.as_ref().map(|d| term_text(d, &prefixes)),
                description: None,
                example: None,
            })
            .collect(),
        description: String::new(),
        limitations: String::new(),
        changelog: Vec::new(),
    })
}

/// Reads a TOML sidecar keyed by template name (prefixed or full IRI).
pub fn load_docs(text: &str, lib: &Library) -> Result<BTreeMap<String, TemplateDoc>, DocError> {
    let file: BTreeMap<String, SidecarEntry> = toml::from_str(text).map_err(|e| DocError::Toml(e.to_string()))?;
    let prefixes = lib.effective_prefixes();
    let mut docs = BTreeMap::new();
    for (key, entry) in file {
        let iri = resolve_name(&key, &prefixes).map_err(|m| DocError::Key(key.clone(), m))?;
        let mut doc =
            signature_doc(lib, &iri).ok_or_else(|| DocError::Key(key.clone(), "not a template of the library".into()))?;
        for name in entry.params.keys() {
            if !doc.parameters.iter().any(|p| &p.name == name) {
                return Err(DocError::UnknownParam { template: key.clone(), param: name.clone() });
            }
        }
        for p in &mut doc.parameters {
            if let Some(sp) = entry.params.get(&p.name) {
                p.description = sp.description.clone();
                p.example = sp.example.clone();
            }
        }
        doc.description = entry.description;
        doc.limitations = entry.limitations;
        doc.changelog = entry.changelog;
        docs.insert(iri, doc);
    }
    Ok(docs)
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn param_table(out: &mut String, doc: &TemplateDoc) {
    if doc.parameters.is_empty() {
        out.push_str("No parameters.\n\n");
        return;
    }
    out.push_str("| Parameter | Type | Optional | Default | Example | Description |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for p in &doc.parameters {
        let _ = writeln!(
            out,
            "| ?{} | {} | {} | {} | {} | {} |",
            cell(&p.name),
            cell(&p.ptype),
            if p.optional { "yes" } else { "no" },
            cell(p.default.as_deref().unwrap_or("")),
            cell(p.example.as_deref().unwrap_or("")),
            cell(p.description.as_deref().unwrap_or(""))
        );
    }
    out.push('\n');
}

/// Markdown documentation of the whole library.
pub fn render_library_doc(lib: &Library, docs: &BTreeMap<String, TemplateDoc>, workflows: &[Workflow]) -> String {
    let prefixes = lib.effective_prefixes();
    let user_facing = classify_user_facing(lib);
    let mut ordered: Vec<&String> = lib.templates.keys().collect();
    ordered.sort_by_key(|iri| (!user_facing[*iri], *iri));

    let mut out = String::from("# Template library\n\n## Templates\n\n");
    if ordered.is_empty() {
        out.push_str("No templates.\n\n");
    } else {
        out.push_str("| Template | User-facing | Parameters |\n|---|---|---|\n");
        for iri in &ordered {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                cell(&prefixes.display_iri(iri)),
                if user_facing[*iri] { "yes" } else { "no" },
                lib.templates[*iri].arity()
            );
        }
        out.push('\n');
    }

    out.push_str("## Call hierarchy\n\n```text\n");
    out.push_str(&render_hierarchy(lib, HierarchyFormat::Text));
    out.push_str("```\n\n## Template reference\n\n");
    for iri in &ordered {
        let _ = writeln!(out, "### {}\n", prefixes.display_iri(iri));
        match docs.get(*iri) {
            Some(doc) => {
                if !doc.description.is_empty() {
                    let _ = writeln!(out, "{}\n", doc.description.trim());
                }
                if !doc.limitations.is_empty() {
                    let _ = writeln!(out, "Limitations: {}\n", doc.limitations.trim());
                }
                param_table(&mut out, doc);
                if !doc.changelog.is_empty() {
                    out.push_str("Changes:\n\n");
                    for c in &doc.changelog {
                        let _ = writeln!(out, "- {c}");
                    }
                    out.push('\n');
                }
            }
            None => {
                out.push_str("_undocumented_\n\n");
                if let Some(doc) = signature_doc(lib, iri) {
                    param_table(&mut out, &doc);
                }
            }
        }
    }

    out.push_str("## Workflows\n\n");
    if workflows.is_empty() {
        out.push_str("None defined.\n");
    }
    for wf in workflows {
        let _ = writeln!(out, "### {}\n", wf.name);
        let order = suggest_order(wf).unwrap_or_else(|_| wf.steps.iter().map(|s| s.id.clone()).collect());
        for (n, id) in order.iter().enumerate() {
            let Some(step) = wf.step(id) else { continue };
            let _ = write!(out, "{}. `{}`: {}", n + 1, step.id, prefixes.display_iri(&step.template));
            if !step.after.is_empty() {
                let _ = write!(out, " (after {})", step.after.join(", "));
            }
            out.push('\n');
            for (param, b) in &step.bindings {
                let _ = writeln!(out, "    - ?{param} = `{}`", b.text(&prefixes));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_library;

    const PIZZA: &str = include_str!("../../../fixtures/pizza.stottr");
    const DOCS: &str = include_str!("../../../fixtures/pizza.docs.toml");

    #[test]
    fn pizza_user_facing() {
        let lib = parse_library(PIZZA).unwrap();
        let c = classify_user_facing(&lib);
        assert!(c["http://tpl.ex.org/pizza/Pizza"]);
        assert!(!c["http://tpl.ex.org/axiom/SubClassOf"]);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn independent_templates_are_user_facing() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .\nex:A[?x] :: { } .\nex:B[?x] .").unwrap();
        assert!(classify_user_facing(&lib).values().all(|&b| b));
    }

    #[test]
    fn text_hierarchy() {
        let lib = parse_library(PIZZA).unwrap();
        let text = render_hierarchy(&lib, HierarchyFormat::Text);
        let lines: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(lines, ["ax:SubClassOf -> ottr:Triple", "pz:Pizza -> ax:SubClassOf", "pz:Pizza -> ottr:Triple"]);
        assert_eq!(render_hierarchy(&Library::default(), HierarchyFormat::Text).lines().count(), 1);
    }

    #[test]
    fn dot_hierarchy() {
        let lib = parse_library(PIZZA).unwrap();
        let dot = render_hierarchy(&lib, HierarchyFormat::Dot);
        assert!(dot.starts_with("digraph templates {\n") && dot.ends_with("}\n"));
        assert_eq!(dot.lines().filter(|l| l.contains("->")).count(), 3);
        assert_eq!(dot.lines().filter(|l| l.ends_with(';') && !l.contains("->")).count(), 3);
        assert_eq!(render_hierarchy(&Library::default(), HierarchyFormat::Dot), "digraph templates {\n}\n");
    }

    #[test]
    fn documentation_coverage() {
        let lib = parse_library(PIZZA).unwrap();
        let mut docs = load_docs(DOCS, &lib).unwrap();
        assert_eq!(docs.len(), 2);
        let full = render_library_doc(&lib, &docs, &[]);
        assert_eq!(full.matches("undocumented").count(), 0);
        assert!(full.contains("None defined."));
        assert!(full.find("| pz:Pizza |").unwrap() < full.find("| ax:SubClassOf |").unwrap());

        docs.remove("http://tpl.ex.org/axiom/SubClassOf");
        let partial = render_library_doc(&lib, &docs, &[]);
        assert_eq!(partial.matches("undocumented").count(), 1);
        assert!(partial.contains("IRI of the pizza class"));
        assert_eq!(partial, render_library_doc(&lib, &docs, &[]));
    }

    #[test]
    fn sidecar_errors() {
        let lib = parse_library(PIZZA).unwrap();
        assert!(matches!(load_docs("[\"pz:Nope\"]\n", &lib), Err(DocError::Key(..))));
        assert!(matches!(
            load_docs("[\"pz:Pizza\".params.colour]\ndescription = \"x\"\n", &lib),
            Err(DocError::UnknownParam { .. })
        ));
    }
}
