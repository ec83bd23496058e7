use std::fmt::Write as _;

use super::ast::{Instance, Library, ParamType, Parameter, TemplateDefinition};
use crate::model::{PrefixMap, Term, escape_string};
use crate::vocab::XSD_STRING;

/// A term in template syntax, compacting IRIs with `prefixes`.
pub fn term_text(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => prefixes.display_iri(iri),
        Term::Literal(lit) => {
            let mut s = format!("\"{}\"", escape_string(&lit.lexical));
            if let Some(tag) = &lit.lang {
                s.push('@');
                s.push_str(tag);
            } else if lit.datatype != XSD_STRING {
                s.push_str("^^");
                s.push_str(&prefixes.display_iri(&lit.datatype));
            }
            s
        }
        Term::List(items) => {
            let inner: Vec<String> = items.iter().map(|t| term_text(t, prefixes)).collect();
            format!("({})", inner.join(", "))
        }
        other => other.to_string(),
    }
}

pub fn instance_text(inst: &Instance, prefixes: &PrefixMap) -> String {
    let mut s = String::new();
    if let Some(mode) = inst.mode {
        let _ = write!(s, "{} | ", mode.keyword());
    }
    s.push_str(&prefixes.display_iri(&inst.template));
    s.push('(');
    for (i, arg) in inst.arguments.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        if arg.expand {
            s.push_str("++");
        }
        s.push_str(&term_text(&arg.term, prefixes));
    }
    s.push(')');
    s
}

fn parameter_text(p: &Parameter, prefixes: &PrefixMap) -> String {
    let mut s = String::new();
    if p.optional {
        s.push('?');
    }
    if p.nonblank {
        s.push('!');
    }
    if p.ptype != ParamType::Top {
        s.push_str(&p.ptype.display(prefixes));
        s.push(' ');
    } else if p.optional || p.nonblank {
        s.push(' ');
    }
    s.push('?');
    s.push_str(&p.name);
    if let Some(d) = &p.default {
        s.push_str(" = ");
        s.push_str(&term_text(d, prefixes));
    }
    s
}

pub fn template_text(t: &TemplateDefinition, prefixes: &PrefixMap) -> String {
    let params: Vec<String> = t.parameters.iter().map(|p| parameter_text(p, prefixes)).collect();
    let mut s = format!("{}[{}]", prefixes.display_iri(&t.iri), params.join(", "));
    match &t.body {
        None => s.push_str(" ."),
        Some(body) if body.is_empty() => s.push_str(" :: { } ."),
        Some(body) => {
            s.push_str(" :: {\n");
            for (i, inst) in body.iter().enumerate() {
                let sep = if i + 1 < body.len() { "," } else { "" };
                let _ = writeln!(s, "    {}{sep}", instance_text(inst, prefixes));
            }
            s.push_str("} .");
        }
    }
    s
}

/// Deterministic library text: prefixes sorted by label, templates by IRI.
pub fn serialize_library(lib: &Library) -> String {
    let prefixes = lib.effective_prefixes();
    let mut out = String::new();
    for (label, ns) in lib.prefixes.iter() {
        let _ = writeln!(out, "@prefix {label}: <{ns}> .");
    }
    for t in lib.templates.values() {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&template_text(t, &prefixes));
        out.push('\n');
    }
    out
}

/// One instance per line.
pub fn serialize_instances(instances: &[Instance], prefixes: &PrefixMap) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&instance_text(inst, prefixes));
        out.push_str(" .\n");
    }
    out
}
