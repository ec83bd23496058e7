//! Expansion of template instances into ground triples.
//!
//! Each top-level instance gets a counter (its position in the input list
//! unless an offset is given). Blank nodes written in template bodies are
//! renamed `_:b{counter}_{label}`, so output is deterministic and instances
//! can be expanded independently and unioned.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::model::{Term, TermError, Triple, TripleGraph};
use crate::syntax::{Argument, ExpansionMode, Instance, Library};

pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("unknown template <{0}>")]
    UnknownTemplate(String),
    #[error("template <{0}> has no body")]
    SignatureOnlyTemplate(String),
    #[error("expansion exceeded the maximum depth of {0}")]
    DepthExceeded(usize),
    #[error("template <{template}> expects {expected} arguments, got {found}")]
    ArityMismatch { template: String, expected: usize, found: usize },
    #[error("argument {position} of <{template}> is marked for expansion but is not a list")]
    NotAList { template: String, position: usize },
    #[error("invalid triple: {0}")]
    InvalidTriple(#[from] TermError),
}

/// Per-instance expansion failures, keyed by instance index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandAllError {
    pub failures: Vec<(usize, ExpandError)>,
}

impl fmt::Display for ExpandAllError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (index, err)) in self.failures.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "instance {index}: {err}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ExpandAllError {}

/// Expands instances against a read-only library.
#[derive(Debug, Clone, Copy)]
pub struct Expander<'a> {
    library: &'a Library,
    max_depth: usize,
}

impl<'a> Expander<'a> {
    pub fn new(library: &'a Library) -> Self {
        Expander { library, max_depth: DEFAULT_MAX_DEPTH }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        assert!(max_depth >= 1, "max depth must be positive");
        self.max_depth = max_depth;
        self
    }

    pub fn library(&self) -> &'a Library {
        self.library
    }

    /// Expands one top-level instance; `counter` scopes its blank nodes.
    pub fn expand_instance(&self, inst: &Instance, counter: u64) -> Result<TripleGraph, ExpandError> {
        let mut out = TripleGraph::new();
        self.expand_into(inst, counter, 1, &mut out)?;
        Ok(out)
    }

    /// Union of all instance expansions; instance `i` uses counter `i`.
    pub fn expand_all(&self, instances: &[Instance]) -> Result<TripleGraph, ExpandAllError> {
        self.expand_all_from(instances, 0)
    }

    /// As [`expand_all`](Self::expand_all), with counters starting at `first_counter`.
    pub fn expand_all_from(&self, instances: &[Instance], first_counter: u64) -> Result<TripleGraph, ExpandAllError> {
        let mut graph = TripleGraph::new();
        let mut failures = Vec::new();
        for (i, inst) in instances.iter().enumerate() {
            if let Err(e) = self.expand_into(inst, first_counter + i as u64, 1, &mut graph) {
                failures.push((i, e));
            }
        }
        if failures.is_empty() { Ok(graph) } else { Err(ExpandAllError { failures }) }
    }

    /// Every distinct output triple with the indices of the instances producing it.
    pub fn provenance_expand(&self, instances: &[Instance]) -> Result<Vec<(Triple, BTreeSet<usize>)>, ExpandAllError> {
        let mut producers: BTreeMap<Triple, BTreeSet<usize>> = BTreeMap::new();
        let mut failures = Vec::new();
        for (i, inst) in instances.iter().enumerate() {
            match self.expand_instance(inst, i as u64) {
                Ok(g) => {
                    for t in g {
                        producers.entry(t).or_default().insert(i);
                    }
                }
                Err(e) => failures.push((i, e)),
            }
        }
        if failures.is_empty() { Ok(producers.into_iter().collect()) } else { Err(ExpandAllError { failures }) }
    }

    fn expand_into(&self, inst: &Instance, counter: u64, depth: usize, out: &mut TripleGraph) -> Result<(), ExpandError> {
        if depth > self.max_depth {
            return Err(ExpandError::DepthExceeded(self.max_depth));
        }
        let template = self.library.get(&inst.template).ok_or_else(|| ExpandError::UnknownTemplate(inst.template.clone()))?;
        if template.arity() != inst.arguments.len() {
            return Err(ExpandError::ArityMismatch {
                template: template.iri.clone(),
                expected: template.arity(),
                found: inst.arguments.len(),
            });
        }
        if let Some(mode) = inst.mode {
            for args in list_expansion(inst, mode)? {
                let single = Instance { template: inst.template.clone(), arguments: args, mode: None };
                self.expand_into(&single, counter, depth, out)?;
            }
            return Ok(());
        }

        let mut bound = Vec::with_capacity(template.arity());
        for (arg, param) in inst.arguments.iter().zip(&template.parameters) {
            let value = match (&arg.term, &param.default) {
                (Term::None, Some(default)) => default.clone(),
                (term, _) => term.clone(),
            };
            if value == Term::None && param.rejects_none() {
                return Ok(());
            }
            bound.push(value);
        }

        if template.is_base() {
            let mut it = bound.into_iter();
            let (s, p, o) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
            out.insert(Triple::new(s, p, o)?);
            return Ok(());
        }
        let body = template.body.as_ref().ok_or_else(|| ExpandError::SignatureOnlyTemplate(template.iri.clone()))?;
        let bindings: BTreeMap<&str, &Term> =
            template.parameters.iter().map(|p| p.name.as_str()).zip(bound.iter()).collect();
        for body_inst in body {
            let inner = Instance {
                template: body_inst.template.clone(),
                arguments: body_inst
                    .arguments
                    .iter()
                    .map(|a| Argument { term: instantiate(&a.term, &bindings, counter), expand: a.expand })
                    .collect(),
                mode: body_inst.mode,
            };
            self.expand_into(&inner, counter, depth + 1, out)?;
        }
        Ok(())
    }
}

/// Substitutes bound variables and freshens body blank nodes.
fn instantiate(term: &Term, bindings: &BTreeMap<&str, &Term>, counter: u64) -> Term {
    match term {
        Term::Variable(v) => bindings.get(v.as_str()).map(|t| (*t).clone()).unwrap_or_else(|| term.clone()),
        Term::Blank(label) => Term::Blank(format!("b{counter}_{label}")),
        Term::List(items) => Term::List(items.iter().map(|t| instantiate(t, bindings, counter)).collect()),
        other => other.clone(),
    }
}

/// Argument vectors produced by list expansion. A marked `none` is passed
/// through unexpanded.
fn list_expansion(inst: &Instance, mode: ExpansionMode) -> Result<Vec<Vec<Argument>>, ExpandError> {
    let mut marked: Vec<(usize, &[Term])> = Vec::new();
    for (i, arg) in inst.arguments.iter().enumerate() {
        if !arg.expand {
            continue;
        }
        match &arg.term {
            Term::List(items) => marked.push((i, items)),
            Term::None => {}
            _ => return Err(ExpandError::NotAList { template: inst.template.clone(), position: i }),
        }
    }
    let base: Vec<Argument> = inst.arguments.iter().map(|a| Argument { term: a.term.clone(), expand: false }).collect();
    let with = |picks: &[(usize, Term)]| {
        let mut args = base.clone();
        for (i, t) in picks {
            args[*i].term = t.clone();
        }
        args
    };
    let result = match mode {
        ExpansionMode::Cross => {
            let mut combos: Vec<Vec<(usize, Term)>> = vec![Vec::new()];
            for (i, items) in &marked {
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        items.iter().map(move |t| {
                            let mut c = c.clone();
                            c.push((*i, t.clone()));
                            c
                        })
                    })
                    .collect();
            }
            combos.iter().map(|c| with(c)).collect()
        }
        ExpansionMode::ZipMin | ExpansionMode::ZipMax => {
            let lens = marked.iter().map(|(_, items)| items.len());
            let n = if mode == ExpansionMode::ZipMin { lens.min().unwrap_or(1) } else { lens.max().unwrap_or(1) };
            (0..n)
                .map(|k| {
                    let picks: Vec<(usize, Term)> =
                        marked.iter().map(|(i, items)| (*i, items.get(k).cloned().unwrap_or(Term::None))).collect();
                    with(&picks)
                })
                .collect()
        }
    };
    Ok(result)
}
