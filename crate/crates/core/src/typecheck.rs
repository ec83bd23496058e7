//! Static checks over a template library: references, arity, argument
//! types, defaults, modifiers and acyclicity of template dependencies.
//!
//! The type lattice is deliberately small. `Top` sits above everything,
//! `ottr:IRI` accepts IRIs, a literal type accepts literals of exactly that
//! datatype (`rdfs:Literal` accepts any literal) and `List<T>` accepts lists
//! whose members all check against `T`. There is no numeric promotion.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::model::{PrefixMap, Term};
use crate::syntax::{Instance, Library, ParamType, Parameter, TemplateDefinition, body_variables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagnosticCode {
    UnknownTemplate,
    Arity,
    Type,
    Cycle,
    DupParam,
    DefaultType,
    NoneNonOptional,
    BlankNonBlank,
    UnusedParam,
    WfUnknownTemplate,
    WfUnboundParam,
    WfBadRef,
    WfOrder,
    WfCycle,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::UnknownTemplate => "E_UNKNOWN_TEMPLATE",
            DiagnosticCode::Arity => "E_ARITY",
            DiagnosticCode::Type => "E_TYPE",
            DiagnosticCode::Cycle => "E_CYCLE",
            DiagnosticCode::DupParam => "E_DUP_PARAM",
            DiagnosticCode::DefaultType => "E_DEFAULT_TYPE",
            DiagnosticCode::NoneNonOptional => "E_NONE_NONOPTIONAL",
            DiagnosticCode::BlankNonBlank => "E_BLANK_NONBLANK",
            DiagnosticCode::UnusedParam => "W_UNUSED_PARAM",
            DiagnosticCode::WfUnknownTemplate => "E_WF_UNKNOWN_TEMPLATE",
            DiagnosticCode::WfUnboundParam => "E_WF_UNBOUND_PARAM",
            DiagnosticCode::WfBadRef => "E_WF_BAD_REF",
            DiagnosticCode::WfOrder => "E_WF_ORDER",
            DiagnosticCode::WfCycle => "E_WF_CYCLE",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::UnusedParam => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl Serialize for DiagnosticCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub template: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, template: Option<&str>, message: impl Into<String>) -> Self {
        Diagnostic { severity: code.severity(), code, template: template.map(str::to_string), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `severity code template: message`, with the template name compacted.
    pub fn render(&self, prefixes: &PrefixMap) -> String {
        let template = self.template.as_deref().map(|t| prefixes.display_iri(t)).unwrap_or_else(|| "-".into());
        format!("{} {} {}: {}", self.severity, self.code.as_str(), template, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&PrefixMap::new()))
    }
}

pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.template, a.code.as_str(), &a.message).cmp(&(&b.template, b.code.as_str(), &b.message))
    });
}

/// Whether a value declared with type `declared` may flow into `required`.
pub fn type_compatible(declared: &ParamType, required: &ParamType) -> bool {
    match (declared, required) {
        (_, ParamType::Top) => true,
        (ParamType::Literal(_), r) if r.is_literal_top() => true,
        (ParamType::List(d), ParamType::List(r)) => type_compatible(d, r),
        (d, r) => d == r,
    }
}

/// Whether the ground term `term` checks against `ptype`. `none` always checks.
pub fn term_accepts(ptype: &ParamType, term: &Term) -> bool {
    match (ptype, term) {
        (_, Term::None) => true,
        (ParamType::Top, _) => true,
        (ParamType::Iri, Term::Iri(_)) => true,
        (ParamType::Literal(dt), Term::Literal(lit)) => ptype.is_literal_top() || lit.datatype == *dt,
        (ParamType::List(inner), Term::List(items)) => items.iter().all(|t| term_accepts(inner, t)),
        _ => false,
    }
}

/// Type check of a possibly non-ground term whose variables are typed by `scope`.
fn check_term(term: &Term, required: &ParamType, scope: &BTreeMap<&str, &Parameter>) -> Result<(), String> {
    match term {
        Term::Variable(v) => match scope.get(v.as_str()) {
            Some(p) if type_compatible(&p.ptype, required) => Ok(()),
            Some(p) => Err(format!("?{v} has type {} but {} is required", p.ptype, required)),
            None => Err(format!("?{v} is not a parameter")),
        },
        Term::List(items) => match required {
            ParamType::Top => Ok(()),
            ParamType::List(inner) => items.iter().try_for_each(|t| check_term(t, inner, scope)),
            _ => Err(format!("a list is not accepted by {required}")),
        },
        ground if term_accepts(required, ground) => Ok(()),
        other => Err(format!("{other} is {} and not accepted by {required}", other.kind())),
    }
}

fn element_type(term: &Term, scope: &BTreeMap<&str, &Parameter>) -> Option<ParamType> {
    match term {
        Term::Variable(v) => match &scope.get(v.as_str())?.ptype {
            ParamType::List(inner) => Some((**inner).clone()),
            _ => None,
        },
        _ => None,
    }
}

/// Checks one instance against its callee's signature.
///
/// `enclosing` is the template whose body holds the instance; its
/// parameters type the variables. Diagnostics are attributed to the
/// enclosing template, or to the callee for top-level instances.
pub fn check_instance(inst: &Instance, enclosing: Option<&TemplateDefinition>, lib: &Library) -> Vec<Diagnostic> {
    let owner = enclosing.map(|t| t.iri.as_str()).unwrap_or(inst.template.as_str());
    let name = |iri: &str| lib.display_iri(iri);
    let mut diags = Vec::new();
    let Some(callee) = lib.get(&inst.template) else {
        diags.push(Diagnostic::new(
            DiagnosticCode::UnknownTemplate,
            Some(owner),
            format!("unknown template {}", name(&inst.template)),
        ));
        return diags;
    };
    if callee.arity() != inst.arguments.len() {
        diags.push(Diagnostic::new(
            DiagnosticCode::Arity,
            Some(owner),
            format!(
                "{} expects {} arguments, got {}",
                name(&callee.iri),
                callee.arity(),
                inst.arguments.len()
            ),
        ));
        return diags;
    }
    let scope: BTreeMap<&str, &Parameter> =
        enclosing.map(|t| t.parameters.iter().map(|p| (p.name.as_str(), p)).collect()).unwrap_or_default();
    for (arg, param) in inst.arguments.iter().zip(&callee.parameters) {
        let at = format!("argument ?{} of {}", param.name, name(&callee.iri));
        if arg.expand && inst.mode.is_some() {
            let result = match &arg.term {
                Term::List(items) => items.iter().try_for_each(|t| check_term(t, &param.ptype, &scope)),
                t => match element_type(t, &scope) {
                    Some(elem) if type_compatible(&elem, &param.ptype) => Ok(()),
                    Some(elem) => Err(format!("list elements of type {elem} not accepted by {}", param.ptype)),
                    None => Err(format!("{t} is marked for expansion but is not a list")),
                },
            };
            if let Err(msg) = result {
                diags.push(Diagnostic::new(DiagnosticCode::Type, Some(owner), format!("{at}: {msg}")));
            }
            continue;
        }
        match &arg.term {
            Term::None if param.rejects_none() => diags.push(Diagnostic::new(
                DiagnosticCode::NoneNonOptional,
                Some(owner),
                format!("{at}: none passed to a non-optional parameter"),
            )),
            Term::Blank(b) if param.nonblank => diags.push(Diagnostic::new(
                DiagnosticCode::BlankNonBlank,
                Some(owner),
                format!("{at}: blank node _:{b} passed to a non-blank parameter"),
            )),
            term => {
                if let Err(msg) = check_term(term, &param.ptype, &scope) {
                    diags.push(Diagnostic::new(DiagnosticCode::Type, Some(owner), format!("{at}: {msg}")));
                }
            }
        }
    }
    diags
}

/// Distinct (caller, callee) pairs, sorted.
pub fn dependency_graph(lib: &Library) -> Vec<(String, String)> {
    let edges: BTreeSet<(String, String)> = lib
        .templates
        .values()
        .flat_map(|t| t.body_instances().iter().map(move |i| (t.iri.clone(), i.template.clone())))
        .collect();
    edges.into_iter().collect()
}

/// Strongly connected components that contain a cycle, each sorted.
fn cyclic_components(edges: &[(String, String)]) -> Vec<Vec<String>> {
    struct Tarjan<'a> {
        adj: BTreeMap<&'a str, Vec<&'a str>>,
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        stack: Vec<&'a str>,
        on_stack: BTreeSet<&'a str>,
        next: usize,
        out: Vec<Vec<String>>,
    }

    impl<'a> Tarjan<'a> {
        fn visit(&mut self, v: &'a str) {
            self.index.insert(v, self.next);
            self.low.insert(v, self.next);
            self.next += 1;
            self.stack.push(v);
            self.on_stack.insert(v);
            let succs = self.adj.get(v).cloned().unwrap_or_default();
            for w in &succs {
                if !self.index.contains_key(w) {
                    self.visit(w);
                    let lw = self.low[w];
                    let lv = self.low.get_mut(v).unwrap();
                    *lv = (*lv).min(lw);
                } else if self.on_stack.contains(w) {
                    let iw = self.index[w];
                    let lv = self.low.get_mut(v).unwrap();
                    *lv = (*lv).min(iw);
                }
            }
            if self.low[v] == self.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack.remove(w);
                    comp.push(w.to_string());
                    if w == v {
                        break;
                    }
                }
                if comp.len() > 1 || succs.contains(&v) {
                    comp.sort();
                    self.out.push(comp);
                }
            }
        }
    }

    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default();
    }
    let nodes: Vec<&str> = adj.keys().copied().collect();
    let mut t = Tarjan {
        adj,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in nodes {
        if !t.index.contains_key(v) {
            t.visit(v);
        }
    }
    t.out.sort();
    t.out
}

/// All diagnostics for `lib`, sorted by (template, code). Empty iff well-typed.
pub fn check_library(lib: &Library) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for t in lib.templates.values() {
        let iri = Some(t.iri.as_str());
        let mut seen = BTreeSet::new();
        for p in &t.parameters {
            if !seen.insert(p.name.as_str()) {
                diags.push(Diagnostic::new(DiagnosticCode::DupParam, iri, format!("parameter ?{} declared twice", p.name)));
            }
            if let Some(d) = &p.default {
                let bad_blank = p.nonblank && matches!(d, Term::Blank(_));
                if bad_blank || !term_accepts(&p.ptype, d) {
                    diags.push(Diagnostic::new(
                        DiagnosticCode::DefaultType,
                        iri,
                        format!("default {d} of ?{} does not match type {}", p.name, p.ptype),
                    ));
                }
            }
        }
        if let Some(body) = &t.body {
            for inst in body {
                diags.extend(check_instance(inst, Some(t), lib));
            }
            let used = body_variables(body);
            for p in &t.parameters {
                if !used.contains(p.name.as_str()) {
                    diags.push(Diagnostic::new(
                        DiagnosticCode::UnusedParam,
                        iri,
                        format!("parameter ?{} is not used in the body", p.name),
                    ));
                }
            }
        }
    }
    for comp in cyclic_components(&dependency_graph(lib)) {
        let names: Vec<String> = comp.iter().map(|c| lib.display_iri(c)).collect();
        diags.push(Diagnostic::new(
            DiagnosticCode::Cycle,
            Some(&comp[0]),
            format!("cyclic template dependency among {}", names.join(", ")),
        ));
    }
    sort_diagnostics(&mut diags);
    diags
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_library;
    use crate::vocab::OTTR_TRIPLE;

    const PIZZA: &str = include_str!("../../../fixtures/pizza.stottr");

    fn codes(text: &str) -> Vec<&'static str> {
        check_library(&parse_library(text).unwrap()).iter().map(|d| d.code.as_str()).collect()
    }

    const EX: &str = "@prefix ex: <http://ex.org/> .\n";

    #[test]
    fn pizza_is_clean() {
        assert!(check_library(&parse_library(PIZZA).unwrap()).is_empty());
    }

    #[test]
    fn two_cycle_names_both() {
        let lib = parse_library(&format!("{EX}ex:A[?x] :: {{ ex:B(?x) }} .\nex:B[?x] :: {{ ex:A(?x) }} .")).unwrap();
        let diags = check_library(&lib);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, DiagnosticCode::Cycle);
        assert!(diags[0].message.contains("ex:A") && diags[0].message.contains("ex:B"));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        assert_eq!(codes(&format!("{EX}ex:A[?x] :: {{ ex:A(?x) }} .")), ["E_CYCLE"]);
    }

    #[test]
    fn arity_mismatch() {
        let text = format!("{PIZZA}{EX}ex:P[ottr:IRI ?sub] :: {{ ax:SubClassOf(?sub) }} .");
        assert_eq!(codes(&text), ["E_ARITY"]);
    }

    #[test]
    fn unknown_template() {
        assert_eq!(codes(&format!("{EX}ex:A[?x] :: {{ ex:Nope(?x) }} .")), ["E_UNKNOWN_TEMPLATE"]);
    }

    #[test]
    fn type_errors() {
        // Top-typed variable flowing into an IRI parameter
        assert_eq!(
            codes(&format!("{EX}ex:A[?x] :: {{ ottr:Triple(ex:s, ?x, ex:o) }} .")),
            ["E_TYPE"]
        );
        assert_eq!(
            codes(&format!("{EX}ex:A[ottr:IRI ?x] :: {{ ottr:Triple(?x, \"p\", ex:o) }} .")),
            ["E_TYPE"]
        );
        assert_eq!(
            codes(&format!(
                "{EX}ex:B[xsd:int ?n] :: {{ ottr:Triple(ex:s, ex:p, ?n) }} .\nex:A[] :: {{ ex:B(\"x\") }} ."
            )),
            ["E_TYPE"]
        );
        assert!(codes(&format!(
            "{EX}ex:B[rdfs:Literal ?n] :: {{ ottr:Triple(ex:s, ex:p, ?n) }} .\nex:A[xsd:int ?v] :: {{ ex:B(?v), ex:B(\"x\"@en) }} ."
        ))
        .is_empty());
    }

    #[test]
    fn list_types() {
        let ok = format!(
            "{EX}ex:B[List<ottr:IRI> ?xs] :: {{ cross | ottr:Triple(++?xs, ex:p, ex:o) }} .\nex:A[] :: {{ ex:B((ex:a, ex:b)) }} ."
        );
        assert!(codes(&ok).is_empty());
        let bad = format!(
            "{EX}ex:B[List<ottr:IRI> ?xs] :: {{ cross | ottr:Triple(++?xs, ex:p, ex:o) }} .\nex:A[] :: {{ ex:B((ex:a, \"b\")) }} ."
        );
        assert_eq!(codes(&bad), ["E_TYPE"]);
    }

    #[test]
    fn none_blank_and_defaults() {
        assert_eq!(codes(&format!("{EX}ex:A[] :: {{ ottr:Triple(ex:s, ex:p, none) }} .")), ["E_NONE_NONOPTIONAL"]);
        assert!(codes(&format!(
            "{EX}ex:B[? ?x] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .\nex:A[] :: {{ ex:B(none) }} ."
        ))
        .is_empty());
        assert!(codes(&format!(
            "{EX}ex:B[?x = ex:d] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .\nex:A[] :: {{ ex:B(none) }} ."
        ))
        .is_empty());
        assert_eq!(
            codes(&format!("{EX}ex:B[!?x] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .\nex:A[] :: {{ ex:B(_:b) }} .")),
            ["E_BLANK_NONBLANK"]
        );
        assert_eq!(
            codes(&format!("{EX}ex:B[ottr:IRI ?x = \"lit\"] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .")),
            ["E_DEFAULT_TYPE"]
        );
    }

    #[test]
    fn duplicates_and_unused() {
        let lib = parse_library(&format!("{EX}ex:A[?x, ?x, ?y] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .")).unwrap();
        let diags = check_library(&lib);
        let got: Vec<_> = diags.iter().map(|d| (d.code.as_str(), d.severity)).collect();
        assert_eq!(got, [("E_DUP_PARAM", Severity::Error), ("W_UNUSED_PARAM", Severity::Warning)]);
        // signature-only templates are opaque; nothing is unused
        assert!(codes(&format!("{EX}ex:A[?x] .")).is_empty());
    }

    #[test]
    fn dependency_edges() {
        let lib = parse_library(PIZZA).unwrap();
        let ax = "http://tpl.ex.org/axiom/SubClassOf".to_string();
        let pz = "http://tpl.ex.org/pizza/Pizza".to_string();
        let t = OTTR_TRIPLE.to_string();
        let want: BTreeSet<_> = [(pz.clone(), ax.clone()), (pz, t.clone()), (ax, t)].into_iter().collect();
        assert_eq!(dependency_graph(&lib).into_iter().collect::<BTreeSet<_>>(), want);

        assert!(dependency_graph(&parse_library(&format!("{EX}ex:A[?x] .")).unwrap()).is_empty());
        let twice = parse_library(&format!(
            "{EX}ex:B[?x] :: {{ ottr:Triple(ex:s, ex:p, ?x) }} .\nex:A[] :: {{ ex:B(ex:a), ex:B(ex:b) }} ."
        ))
        .unwrap();
        assert_eq!(
            dependency_graph(&twice).iter().filter(|(a, _)| a == "http://ex.org/A").count(),
            1
        );
    }

    #[test]
    fn rendering() {
        let d = Diagnostic::new(DiagnosticCode::Arity, Some("http://ex.org/A"), "bad");
        let mut p = PrefixMap::new();
        p.insert("ex", "http://ex.org/").unwrap();
        assert_eq!(d.render(&p), "error E_ARITY ex:A: bad");
    }
}
