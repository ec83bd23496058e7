//! Instantiation workflows: ordered template steps whose bindings link
//! later steps to values from earlier ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::docgen::classify_user_facing;
use crate::expand::{ExpandError, Expander};
use crate::model::{PrefixMap, Term, TripleGraph, is_absolute_iri};
use crate::syntax::{Instance, Library, ParamType, ParseDiagnostic, parse_term, parse_type};
use crate::typecheck::{Diagnostic, DiagnosticCode, sort_diagnostics, term_accepts, type_compatible};
use crate::vocab::{DEFAULT_EXCLUDED_NAMESPACES, RDF_LANG_STRING, XSD};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Const(Term),
    MintAuto,
    Ref { step: String, param: String },
    UserInput(ParamType),
}

impl Binding {
    /// The textual form used in workflow documents.
    pub fn text(&self, prefixes: &PrefixMap) -> String {
        match self {
            Binding::Const(t) => format!("const:{}", crate::syntax::term_text(t, prefixes)),
            Binding::MintAuto => "mint:auto".into(),
            Binding::Ref { step, param } => format!("ref:{step}.{param}"),
            Binding::UserInput(t) => format!("input:{}", t.display(prefixes)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowStep {
    pub id: String,
    pub template: String,
    pub after: Vec<String>,
    pub bindings: BTreeMap<String, Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workflow {
    pub name: String,
    pub steps: Vec<WorkflowStep>,
}

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("invalid workflow document: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("step '{step}': {message}")]
    Step { step: String, message: String },
    #[error("input {step}.{param}: {message}")]
    Input { step: String, param: String, message: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkflowFile {
    name: String,
    #[serde(default)]
    steps: Vec<StepFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    id: String,
    template: String,
    #[serde(default)]
    after: Vec<String>,
    #[serde(default)]
    bindings: BTreeMap<String, String>,
}

/// A template name as written in documents: prefixed, `<iri>` or absolute.
pub fn resolve_name(text: &str, prefixes: &PrefixMap) -> Result<String, String> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return if is_absolute_iri(inner) { Ok(inner.to_string()) } else { Err(format!("not an absolute IRI: {text}")) };
    }
    match prefixes.resolve(text) {
        Ok(Term::Iri(iri)) => Ok(iri),
        Ok(_) => Err(format!("not a name: {text}")),
        Err(_) if text.contains("://") && is_absolute_iri(text) => Ok(text.to_string()),
        Err(e) => Err(e.to_string()),
    }
}

fn diag_text(d: ParseDiagnostic) -> String {
    d.message
}

pub fn parse_binding(text: &str, prefixes: &PrefixMap) -> Result<Binding, String> {
    if text == "mint:auto" {
        Ok(Binding::MintAuto)
    } else if let Some(rest) = text.strip_prefix("const:") {
        parse_term(rest, prefixes).map(Binding::Const).map_err(diag_text)
    } else if let Some(rest) = text.strip_prefix("ref:") {
        match rest.split_once('.') {
            Some((step, param)) if !step.is_empty() && !param.is_empty() => {
                Ok(Binding::Ref { step: step.to_string(), param: param.to_string() })
            }
            _ => Err(format!("expected ref:<step>.<param>, got '{text}'")),
        }
    } else if let Some(rest) = text.strip_prefix("input:") {
        parse_type(rest, prefixes).map(Binding::UserInput).map_err(diag_text)
    } else {
        Err(format!("binding must start with const:, mint:auto, ref: or input:, got '{text}'"))
    }
}

impl Workflow {
    /// Reads a TOML workflow; names and terms resolve against `prefixes`.
    pub fn from_toml(text: &str, prefixes: &PrefixMap) -> Result<Self, WorkflowError> {
        let file: WorkflowFile = toml::from_str(text)?;
        let mut steps = Vec::with_capacity(file.steps.len());
        for s in file.steps {
            let step_err = |message: String| WorkflowError::Step { step: s.id.clone(), message };
            let template = resolve_name(&s.template, prefixes).map_err(step_err)?;
            let mut bindings = BTreeMap::new();
            for (param, text) in &s.bindings {
                let b = parse_binding(text, prefixes).map_err(|m| step_err(format!("binding {param}: {m}")))?;
                bindings.insert(param.clone(), b);
            }
            steps.push(WorkflowStep { id: s.id.clone(), template, after: s.after, bindings });
        }
        Ok(Workflow { name: file.name, steps })
    }

    pub fn step(&self, id: &str) -> Option<&WorkflowStep> {
        self.steps.iter().find(|s| s.id == id)
    }

    fn position(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }
}

fn wf_diag(code: DiagnosticCode, step: &WorkflowStep, message: String) -> Diagnostic {
    Diagnostic::new(code, Some(&step.template), format!("step '{}': {message}", step.id))
}

/// Structural checks of a workflow against a library.
pub fn validate_workflow(wf: &Workflow, lib: &Library) -> Vec<Diagnostic> {
    let prefixes = lib.effective_prefixes();
    let user_facing = classify_user_facing(lib);
    let mut diags = Vec::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();

    for (index, step) in wf.steps.iter().enumerate() {
        if !seen.insert(&step.id) {
            diags.push(wf_diag(DiagnosticCode::WfOrder, step, "duplicate step id".into()));
        }
        for dep in &step.after {
            match wf.position(dep) {
                Some(p) if p < index => {}
                Some(_) => diags.push(wf_diag(
                    DiagnosticCode::WfOrder,
                    step,
                    format!("runs after '{dep}', which is not declared earlier"),
                )),
                None => diags.push(wf_diag(DiagnosticCode::WfOrder, step, format!("runs after unknown step '{dep}'"))),
            }
        }

        let template = match lib.templates.get(&step.template) {
            Some(t) if user_facing.get(&step.template).copied().unwrap_or(false) => t,
            Some(_) => {
                diags.push(wf_diag(
                    DiagnosticCode::WfUnknownTemplate,
                    step,
                    format!("{} is not a user-facing template", prefixes.display_iri(&step.template)),
                ));
                continue;
            }
            None => {
                diags.push(wf_diag(
                    DiagnosticCode::WfUnknownTemplate,
                    step,
                    format!("unknown template {}", prefixes.display_iri(&step.template)),
                ));
                continue;
            }
        };

        for param in &template.parameters {
            if param.rejects_none() && !step.bindings.contains_key(&param.name) {
                diags.push(wf_diag(DiagnosticCode::WfUnboundParam, step, format!("required parameter ?{} is not bound", param.name)));
            }
        }
        for (name, binding) in &step.bindings {
            let Some(param) = template.parameter(name) else {
                diags.push(wf_diag(DiagnosticCode::WfUnboundParam, step, format!("template has no parameter ?{name}")));
                continue;
            };
            match binding {
                Binding::Const(term) => {
                    if !term_accepts(&param.ptype, term) {
                        diags.push(wf_diag(
                            DiagnosticCode::Type,
                            step,
                            format!("constant for ?{name} does not fit type {}", param.ptype.display(&prefixes)),
                        ));
                    }
                }
                Binding::MintAuto => {
                    if !matches!(param.ptype, ParamType::Iri | ParamType::Top) {
                        diags.push(wf_diag(
                            DiagnosticCode::Type,
                            step,
                            format!("?{name} has type {} and cannot take a minted IRI", param.ptype.display(&prefixes)),
                        ));
                    }
                }
                Binding::UserInput(t) => {
                    if !type_compatible(t, &param.ptype) {
                        diags.push(wf_diag(
                            DiagnosticCode::Type,
                            step,
                            format!("input type {} does not fit ?{name}", t.display(&prefixes)),
                        ));
                    }
                }
                Binding::Ref { step: target, param: target_param } => {
                    let ok = match wf.position(target) {
                        Some(p) if p < index => {
                            matches!(
                                wf.steps[p].bindings.get(target_param),
                                Some(Binding::Const(_) | Binding::MintAuto)
                            )
                        }
                        _ => false,
                    };
                    if !ok {
                        diags.push(wf_diag(
                            DiagnosticCode::WfBadRef,
                            step,
                            format!(
                                "?{name} refers to {target}.{target_param}, which is not a constant or minted value of an earlier step"
                            ),
                        ));
                    }
                }
            }
        }
    }
    sort_diagnostics(&mut diags);
    diags
}

/// Dependencies of each step: `after` entries plus `ref:` targets.
fn dependencies(wf: &Workflow) -> Vec<BTreeSet<usize>> {
    wf.steps
        .iter()
        .map(|s| {
            let refs = s.bindings.values().filter_map(|b| match b {
                Binding::Ref { step, .. } => Some(step),
                _ => None,
            });
            s.after.iter().chain(refs).filter_map(|id| wf.position(id)).collect()
        })
        .collect()
}

/// Topological order of step ids, ties broken by declaration order.
pub fn suggest_order(wf: &Workflow) -> Result<Vec<String>, Diagnostic> {
    let deps = dependencies(wf);
    let mut done = vec![false; wf.steps.len()];
    let mut order = Vec::with_capacity(wf.steps.len());
    while order.len() < wf.steps.len() {
        let next = (0..wf.steps.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(wf.steps[i].id.clone());
            }
            None => {
                let stuck: Vec<&str> =
                    (0..wf.steps.len()).filter(|&i| !done[i]).map(|i| wf.steps[i].id.as_str()).collect();
                return Err(Diagnostic::new(
                    DiagnosticCode::WfCycle,
                    None,
                    format!("workflow '{}' has cyclic dependencies among steps {}", wf.name, stuck.join(", ")),
                ));
            }
        }
    }
    Ok(order)
}

/// Sample values for user-input bindings, keyed by (step id, parameter).
pub type SampleInputs = BTreeMap<(String, String), Term>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputsFile {
    #[serde(default)]
    input: Vec<InputEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputEntry {
    step: String,
    param: String,
    term: String,
}

/// Reads `[[input]]` entries with `step`, `param` and a `term` in template syntax.
pub fn sample_inputs_from_toml(text: &str, prefixes: &PrefixMap) -> Result<SampleInputs, WorkflowError> {
    let file: InputsFile = toml::from_str(text)?;
    let mut out = SampleInputs::new();
    for e in file.input {
        let term = parse_term(&e.term, prefixes).map_err(|d| WorkflowError::Input {
            step: e.step.clone(),
            param: e.param.clone(),
            message: d.message,
        })?;
        out.insert((e.step, e.param), term);
    }
    Ok(out)
}

/// A stand-in value for a user input of type `ptype`.
pub fn placeholder(ptype: &ParamType, base: &str, step: &str, param: &str) -> Term {
    match ptype {
        ParamType::Top | ParamType::Iri => Term::Iri(format!("{}/sample/{step}/{param}", base.trim_end_matches('/'))),
        ParamType::List(inner) => Term::List(vec![placeholder(inner, base, step, param)]),
        ParamType::Literal(dt) if dt == RDF_LANG_STRING => Term::lang_literal(format!("sample {param}"), "en"),
        ParamType::Literal(dt) => {
            let lexical = match dt.strip_prefix(XSD) {
                Some("boolean") => "false".to_string(),
                Some("decimal" | "double" | "float") => "0.0".to_string(),
                Some(local) if local.ends_with("nteger") || local.ends_with("int") || local.ends_with("long")
                    || local.ends_with("short") || local.ends_with("byte") =>
                {
                    "0".to_string()
                }
                _ => format!("sample {param}"),
            };
            Term::typed_literal(lexical, dt.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepReport {
    pub step_id: String,
    pub components_after: usize,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error("{0}")]
    Invalid(Diagnostic),
    #[error("step '{step}': {message}")]
    Binding { step: String, message: String },
    #[error("step '{step}': {error}")]
    Expand { step: String, error: ExpandError },
}

/// Simulation output: the per-step reports and the final cumulative graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub reports: Vec<StepReport>,
    pub graph: TripleGraph,
    pub instances: Vec<(String, Instance)>,
}

impl fmt::Display for StepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} component(s)", self.step_id, self.components_after)?;
        if self.flagged {
            f.write_str(" DISCONNECTED")?;
        }
        Ok(())
    }
}

/// Instantiates the steps in suggested order and counts components of the
/// cumulative graph after each one. Minted IRIs are
/// `{base}/{workflow}/{step}/{n}` with `n` counting from 1 across the run.
pub fn simulate_connectivity(
    wf: &Workflow,
    lib: &Library,
    inputs: &SampleInputs,
    base: &str,
) -> Result<Simulation, SimulationError> {
    let order = suggest_order(wf).map_err(SimulationError::Invalid)?;
    let base = base.trim_end_matches('/');
    let expander = Expander::new(lib);
    let mut values: BTreeMap<(String, String), Term> = BTreeMap::new();
    let mut minted = 0u64;
    let mut graph = TripleGraph::new();
    let mut reports = Vec::with_capacity(order.len());
    let mut instances = Vec::with_capacity(order.len());

    for (counter, id) in order.iter().enumerate() {
        let step = wf.step(id).expect("ordered ids come from the workflow");
        let template = lib.templates.get(&step.template).ok_or_else(|| SimulationError::Expand {
            step: id.clone(),
            error: ExpandError::UnknownTemplate(step.template.clone()),
        })?;
        let mut args = Vec::with_capacity(template.arity());
        for param in &template.parameters {
            let value = match step.bindings.get(&param.name) {
                None => Term::None,
                Some(Binding::Const(t)) => t.clone(),
                Some(Binding::MintAuto) => {
                    minted += 1;
                    Term::Iri(format!("{base}/{}/{id}/{minted}", wf.name))
                }
                Some(Binding::Ref { step: s, param: p }) => {
                    values.get(&(s.clone(), p.clone())).cloned().ok_or_else(|| SimulationError::Binding {
                        step: id.clone(),
                        message: format!("?{} refers to {s}.{p}, which has no value yet", param.name),
                    })?
                }
                Some(Binding::UserInput(t)) => inputs
                    .get(&(id.clone(), param.name.clone()))
                    .cloned()
                    .unwrap_or_else(|| placeholder(t, base, id, &param.name)),
            };
            values.insert((id.clone(), param.name.clone()), value.clone());
            args.push(value);
        }
        let inst = Instance::new(step.template.clone(), args);
        let out = expander
            .expand_instance(&inst, counter as u64)
            .map_err(|error| SimulationError::Expand { step: id.clone(), error })?;
        graph.extend(out);
        let components = graph.connected_components(&DEFAULT_EXCLUDED_NAMESPACES).len();
        reports.push(StepReport { step_id: id.clone(), components_after: components, flagged: components > 1 });
        instances.push((id.clone(), inst));
    }
    Ok(Simulation { reports, graph, instances })
}
