use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::model::{PrefixMap, Term};
use crate::vocab::{OTTR, OTTR_IRI, OTTR_TRIPLE, OWL, RDF, RDFS, RDFS_LITERAL, RDFS_RESOURCE};

/// Parameter types.
///
/// `rdfs:Resource` is the top type and `ottr:IRI` (also `owl:*` classes,
/// `rdfs:Class`, `rdf:Property`) accepts IRIs. Any other type name denotes a
/// literal datatype; `rdfs:Literal` accepts every literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamType {
    Top,
    Iri,
    Literal(String),
    List(Box<ParamType>),
}

impl ParamType {
    pub fn from_iri(iri: &str) -> ParamType {
        let is_iri_type = iri == OTTR_IRI
            || iri.starts_with(OWL)
            || iri == format!("{RDFS}Class")
            || iri == format!("{RDF}Property");
        if iri == RDFS_RESOURCE || iri == format!("{OTTR}Top") {
            ParamType::Top
        } else if is_iri_type {
            ParamType::Iri
        } else {
            ParamType::Literal(iri.to_string())
        }
    }

    pub fn list_of(inner: ParamType) -> ParamType {
        ParamType::List(Box::new(inner))
    }

    pub fn list_depth(&self) -> usize {
        match self {
            ParamType::List(inner) => 1 + inner.list_depth(),
            _ => 0,
        }
    }

    /// Compact textual form, e.g. `List<ottr:IRI>`.
    pub fn display(&self, prefixes: &PrefixMap) -> String {
        match self {
            ParamType::Top => prefixes.display_iri(RDFS_RESOURCE),
            ParamType::Iri => prefixes.display_iri(OTTR_IRI),
            ParamType::Literal(dt) => prefixes.display_iri(dt),
            ParamType::List(inner) => format!("List<{}>", inner.display(prefixes)),
        }
    }

    pub fn is_literal_top(&self) -> bool {
        matches!(self, ParamType::Literal(dt) if dt == RDFS_LITERAL)
    }
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display(&PrefixMap::well_known()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Parameter {
    pub name: String,
    pub ptype: ParamType,
    pub optional: bool,
    pub nonblank: bool,
    pub default: Option<Term>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, ptype: ParamType) -> Self {
        Parameter { name: name.into(), ptype, optional: false, nonblank: false, default: None }
    }

    pub fn optional(mut self) -> Self {
        self.optional = true;
        self
    }

    pub fn nonblank(mut self) -> Self {
        self.nonblank = true;
        self
    }

    pub fn with_default(mut self, default: Term) -> Self {
        self.default = Some(default);
        self
    }

    /// Whether `none` bound to this parameter makes the instance vanish.
    pub fn rejects_none(&self) -> bool {
        !self.optional && self.default.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExpansionMode {
    Cross,
    ZipMin,
    ZipMax,
}

impl ExpansionMode {
    pub fn keyword(self) -> &'static str {
        match self {
            ExpansionMode::Cross => "cross",
            ExpansionMode::ZipMin => "zipMin",
            ExpansionMode::ZipMax => "zipMax",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "cross" => Some(ExpansionMode::Cross),
            "zipMin" => Some(ExpansionMode::ZipMin),
            "zipMax" => Some(ExpansionMode::ZipMax),
            _ => None,
        }
    }
}

/// An instance argument; `expand` marks it for list expansion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Argument {
    pub term: Term,
    pub expand: bool,
}

impl From<Term> for Argument {
    fn from(term: Term) -> Self {
        Argument { term, expand: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub template: String,
    pub arguments: Vec<Argument>,
    pub mode: Option<ExpansionMode>,
}

impl Instance {
    pub fn new(template: impl Into<String>, args: impl IntoIterator<Item = Term>) -> Self {
        Instance { template: template.into(), arguments: args.into_iter().map(Argument::from).collect(), mode: None }
    }

    /// Sets the expansion mode and marks the arguments at `marked`.
    pub fn expanded(mut self, mode: ExpansionMode, marked: &[usize]) -> Self {
        self.mode = Some(mode);
        for &i in marked {
            self.arguments[i].expand = true;
        }
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.arguments.iter().map(|a| &a.term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateDefinition {
    pub iri: String,
    pub parameters: Vec<Parameter>,
    /// `None` for a signature-only declaration.
    pub body: Option<Vec<Instance>>,
}

impl TemplateDefinition {
    /// The built-in `ottr:Triple`.
    pub fn triple() -> &'static TemplateDefinition {
        static TRIPLE: OnceLock<TemplateDefinition> = OnceLock::new();
        TRIPLE.get_or_init(|| TemplateDefinition {
            iri: OTTR_TRIPLE.to_string(),
            parameters: vec![
                Parameter::new("subject", ParamType::Top),
                Parameter::new("predicate", ParamType::Iri),
                Parameter::new("object", ParamType::Top),
            ],
            body: None,
        })
    }

    pub fn is_base(&self) -> bool {
        self.iri == OTTR_TRIPLE
    }

    pub fn arity(&self) -> usize {
        self.parameters.len()
    }

    pub fn parameter(&self, name: &str) -> Option<&Parameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn body_instances(&self) -> &[Instance] {
        self.body.as_deref().unwrap_or(&[])
    }
}

/// A set of template definitions plus the prefixes declared with them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Library {
    /// Prefixes declared in the source text.
    pub prefixes: PrefixMap,
    pub templates: BTreeMap<String, TemplateDefinition>,
}

impl Library {
    /// Declared prefixes layered over the well-known ones.
    pub fn effective_prefixes(&self) -> PrefixMap {
        self.prefixes.layered_over(&PrefixMap::well_known())
    }

    /// Looks up a template, including the built-in `ottr:Triple`.
    pub fn get(&self, iri: &str) -> Option<&TemplateDefinition> {
        if iri == OTTR_TRIPLE { Some(TemplateDefinition::triple()) } else { self.templates.get(iri) }
    }

    pub fn insert(&mut self, template: TemplateDefinition) {
        self.templates.insert(template.iri.clone(), template);
    }

    /// Prefixed name where possible.
    pub fn display_iri(&self, iri: &str) -> String {
        self.effective_prefixes().display_iri(iri)
    }
}
