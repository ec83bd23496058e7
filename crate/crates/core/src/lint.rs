//! Design-rule checks over template libraries and instance sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expand::{ExpandAllError, Expander};
use crate::model::{PrefixMap, Term};
use crate::syntax::{ExpansionMode, Instance, Library, term_text};
use crate::typecheck::Severity;
use crate::vocab::{OWL, RDFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    #[serde(rename = "R_OUTPUT_REDUNDANCY")]
    OutputRedundancy,
    #[serde(rename = "R_INSTANCE_DUPLICATE")]
    InstanceDuplicate,
    #[serde(rename = "R_SHARED_VALUE")]
    SharedValue,
    #[serde(rename = "R_AXIOM_SCATTER")]
    AxiomScatter,
    #[serde(rename = "R_PARAM_COUNT")]
    ParamCount,
    #[serde(rename = "R_NAMING")]
    Naming,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::OutputRedundancy => "R_OUTPUT_REDUNDANCY",
            Rule::InstanceDuplicate => "R_INSTANCE_DUPLICATE",
            Rule::SharedValue => "R_SHARED_VALUE",
            Rule::AxiomScatter => "R_AXIOM_SCATTER",
            Rule::ParamCount => "R_PARAM_COUNT",
            Rule::Naming => "R_NAMING",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a finding is about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    Instance(usize),
    Template(String),
    Term(Term),
}

impl Subject {
    pub fn render(&self, prefixes: &PrefixMap) -> String {
        match self {
            Subject::Instance(i) => format!("#{i}"),
            Subject::Template(iri) => prefixes.display_iri(iri),
            Subject::Term(t) => term_text(t, prefixes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintFinding {
    pub rule: Rule,
    pub severity: Severity,
    pub subjects: Vec<Subject>,
    pub message: String,
}

impl LintFinding {
    /// `severity rule subjects: message`
    pub fn render(&self, prefixes: &PrefixMap) -> String {
        let subjects: Vec<String> = self.subjects.iter().map(|s| s.render(prefixes)).collect();
        format!("{} {} {}: {}", self.severity, self.rule, subjects.join(","), self.message)
    }
}

fn sort_findings(findings: &mut [LintFinding]) {
    findings.sort_by(|a, b| (a.rule, &a.subjects, &a.message).cmp(&(b.rule, &b.subjects, &b.message)));
}

#[derive(Debug, Clone)]
pub struct NamingRule {
    pub prefix: String,
    pub pattern: Regex,
}

#[derive(Debug, Clone)]
pub struct LintConfig {
    pub param_count_threshold: usize,
    pub shared_value_threshold: usize,
    pub naming_rules: Vec<NamingRule>,
    pub axiom_predicates: BTreeSet<String>,
}

impl Default for LintConfig {
    fn default() -> Self {
        let axiom_predicates = [
            format!("{RDFS}domain"),
            format!("{RDFS}range"),
            format!("{RDFS}subClassOf"),
            format!("{RDFS}subPropertyOf"),
            format!("{OWL}inverseOf"),
            format!("{OWL}equivalentClass"),
            format!("{OWL}disjointWith"),
        ]
        .into_iter()
        .collect();
        LintConfig { param_count_threshold: 7, shared_value_threshold: 3, naming_rules: Vec::new(), axiom_predicates }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid lint config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid naming pattern: {0}")]
    Regex(#[from] regex::Error),
    #[error("{0} must be at least 1")]
    Threshold(&'static str),
    #[error("{0}")]
    Prefix(#[from] crate::model::PrefixError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    param_count_threshold: Option<usize>,
    shared_value_threshold: Option<usize>,
    #[serde(default)]
    naming: Vec<NamingEntry>,
    axiom_predicates: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NamingEntry {
    prefix: String,
    pattern: String,
}

impl LintConfig {
    /// Reads a TOML config; prefixed names in `axiom_predicates` resolve against `prefixes`.
    pub fn from_toml(text: &str, prefixes: &PrefixMap) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        let mut config = LintConfig::default();
        if let Some(n) = file.param_count_threshold {
            config.param_count_threshold = n;
        }
        if let Some(n) = file.shared_value_threshold {
            config.shared_value_threshold = n;
        }
        if config.param_count_threshold == 0 {
            return Err(ConfigError::Threshold("param_count_threshold"));
        }
        if config.shared_value_threshold == 0 {
            return Err(ConfigError::Threshold("shared_value_threshold"));
        }
        for entry in file.naming {
            config.naming_rules.push(NamingRule { prefix: entry.prefix, pattern: Regex::new(&entry.pattern)? });
        }
        if let Some(preds) = file.axiom_predicates {
            config.axiom_predicates = preds
                .iter()
                .map(|p| match prefixes.resolve(p) {
                    Ok(Term::Iri(iri)) if !p.contains("://") => Ok(iri),
                    _ if p.contains("://") => Ok(p.clone()),
                    Ok(_) => unreachable!(),
                    Err(e) => Err(e),
                })
                .collect::<Result<_, _>>()?;
        }
        Ok(config)
    }
}

/// One finding per triple produced by two or more instances.
pub fn lint_output_redundancy(instances: &[Instance], library: &Library) -> Result<Vec<LintFinding>, ExpandAllError> {
    let prefixes = library.effective_prefixes();
    let provenance = Expander::new(library).provenance_expand(instances)?;
    let mut findings: Vec<LintFinding> = provenance
        .into_iter()
        .filter(|(_, producers)| producers.len() >= 2)
        .map(|(triple, producers)| LintFinding {
            rule: Rule::OutputRedundancy,
            severity: Severity::Warning,
            message: format!(
                "triple {} {} {} is produced by {} instances",
                term_text(triple.subject(), &prefixes),
                term_text(triple.predicate(), &prefixes),
                term_text(triple.object(), &prefixes),
                producers.len()
            ),
            subjects: producers.into_iter().map(Subject::Instance).collect(),
        })
        .collect();
    sort_findings(&mut findings);
    Ok(findings)
}

/// Duplicate instances, and non-IRI values repeated across many instances.
pub fn lint_instantiation_redundancy(instances: &[Instance], config: &LintConfig) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    let mut groups: BTreeMap<&Instance, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        groups.entry(inst).or_default().push(i);
    }
    for indices in groups.into_values().filter(|g| g.len() >= 2) {
        findings.push(LintFinding {
            rule: Rule::InstanceDuplicate,
            severity: Severity::Warning,
            message: format!("{} identical instances", indices.len()),
            subjects: indices.into_iter().map(Subject::Instance).collect(),
        });
    }

    let mut occurrences: BTreeMap<&Term, BTreeSet<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        for term in inst.terms() {
            term.visit(&mut |t| {
                if matches!(t, Term::Literal(_) | Term::Blank(_)) {
                    occurrences.entry(t).or_default().insert(i);
                }
            });
        }
    }
    for (value, users) in occurrences {
        if users.len() >= config.shared_value_threshold {
            let mut subjects: Vec<Subject> = users.iter().copied().map(Subject::Instance).collect();
            subjects.push(Subject::Term(value.clone()));
            findings.push(LintFinding {
                rule: Rule::SharedValue,
                severity: Severity::Info,
                message: format!(
                    "value {} is used by {} instances; consider a sub-template or a shared entity",
                    value,
                    users.len()
                ),
                subjects,
            });
        }
    }
    sort_findings(&mut findings);
    findings
}

/// A term during symbolic inlining, with the template whose body wrote it.
#[derive(Clone)]
struct Traced {
    term: Term,
    origin: Option<String>,
}

struct AxiomWalker<'a> {
    library: &'a Library,
    predicates: &'a BTreeSet<String>,
    definers: BTreeMap<String, BTreeSet<String>>,
}

const INLINE_DEPTH: usize = 64;

impl AxiomWalker<'_> {
    fn walk(&mut self, template_iri: &str, args: Vec<Traced>, depth: usize) {
        let Some(template) = self.library.get(template_iri) else { return };
        if depth > INLINE_DEPTH || template.arity() != args.len() {
            return;
        }
        let mut bound = Vec::with_capacity(args.len());
        for (arg, param) in args.into_iter().zip(&template.parameters) {
            let arg = match (&arg.term, &param.default) {
                (Term::None, Some(d)) => Traced { term: d.clone(), origin: Some(template.iri.clone()) },
                _ => arg,
            };
            if arg.term == Term::None && param.rejects_none() {
                return;
            }
            bound.push(arg);
        }
        if template.is_base() {
            if let (Term::Iri(subject), Term::Iri(predicate)) = (&bound[0].term, &bound[1].term)
                && self.predicates.contains(predicate)
                && let Some(origin) = &bound[0].origin
            {
                self.definers.entry(subject.clone()).or_default().insert(origin.clone());
            }
            return;
        }
        let bindings: BTreeMap<&str, &Traced> =
            template.parameters.iter().map(|p| p.name.as_str()).zip(bound.iter()).collect();
        for inst in template.body_instances() {
            let traced: Vec<(Traced, bool)> = inst
                .arguments
                .iter()
                .map(|a| {
                    let t = match &a.term {
                        Term::Variable(v) => bindings.get(v.as_str()).map(|t| (*t).clone()).unwrap_or(Traced {
                            term: a.term.clone(),
                            origin: None,
                        }),
                        ground => Traced { term: ground.clone(), origin: Some(template.iri.clone()) },
                    };
                    (t, a.expand)
                })
                .collect();
            for args in symbolic_list_expansion(traced, inst.mode) {
                self.walk(&inst.template, args, depth + 1);
            }
        }
    }
}

/// Cross product over marked ground lists; zips are over-approximated by
/// the cross product, which can only add candidate definers.
fn symbolic_list_expansion(args: Vec<(Traced, bool)>, mode: Option<ExpansionMode>) -> Vec<Vec<Traced>> {
    let mut combos: Vec<Vec<Traced>> = vec![Vec::new()];
    for (arg, marked) in args {
        let choices = match (&arg.term, marked && mode.is_some()) {
            (Term::List(items), true) => {
                items.iter().map(|t| Traced { term: t.clone(), origin: arg.origin.clone() }).collect()
            }
            _ => vec![arg],
        };
        combos = combos
            .into_iter()
            .flat_map(|c| {
                choices.iter().map(move |t| {
                    let mut c = c.clone();
                    c.push(t.clone());
                    c
                })
            })
            .collect();
    }
    combos
}

/// Axiomatic triples about one ground term must come from a single template.
pub fn lint_axiom_encapsulation(library: &Library, config: &LintConfig) -> Vec<LintFinding> {
    let prefixes = library.effective_prefixes();
    let mut walker = AxiomWalker { library, predicates: &config.axiom_predicates, definers: BTreeMap::new() };
    for t in library.templates.values() {
        let opaque = t.parameters.iter().map(|p| Traced { term: Term::Variable(p.name.clone()), origin: None }).collect();
        walker.walk(&t.iri, opaque, 0);
    }
    let mut findings: Vec<LintFinding> = walker
        .definers
        .into_iter()
        .filter(|(_, defs)| defs.len() >= 2)
        .map(|(term, defs)| {
            let names: Vec<String> = defs.iter().map(|d| prefixes.display_iri(d)).collect();
            let mut subjects: Vec<Subject> = defs.into_iter().map(Subject::Template).collect();
            let message = format!(
                "axioms about {} are spread over {} templates: {}",
                prefixes.display_iri(&term),
                names.len(),
                names.join(", ")
            );
            subjects.push(Subject::Term(Term::Iri(term)));
            LintFinding { rule: Rule::AxiomScatter, severity: Severity::Error, subjects, message }
        })
        .collect();
    sort_findings(&mut findings);
    findings
}

/// Parameter counts and IRI naming rules.
pub fn lint_headers(library: &Library, config: &LintConfig) -> Vec<LintFinding> {
    let mut findings = Vec::new();
    for t in library.templates.values() {
        if t.arity() > config.param_count_threshold {
            findings.push(LintFinding {
                rule: Rule::ParamCount,
                severity: Severity::Warning,
                subjects: vec![Subject::Template(t.iri.clone())],
                message: format!(
                    "{} parameters exceed the threshold of {}; consider splitting the header",
                    t.arity(),
                    config.param_count_threshold
                ),
            });
        }
    }
    if !config.naming_rules.is_empty() {
        // IRI -> templates mentioning it (its own IRI counts as a mention)
        let mut mentions: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for t in library.templates.values() {
            mentions.entry(&t.iri).or_default().insert(&t.iri);
            for inst in t.body_instances() {
                for term in inst.terms() {
                    term.visit(&mut |x| {
                        if let Term::Iri(iri) = x {
                            mentions.entry(iri).or_default().insert(&t.iri);
                        }
                    });
                }
            }
        }
        for (iri, templates) in mentions {
            for rule in &config.naming_rules {
                let Some(local) = iri.strip_prefix(rule.prefix.as_str()) else { continue };
                if !rule.pattern.is_match(local) {
                    let mut subjects = vec![Subject::Term(Term::Iri(iri.to_string()))];
                    subjects.extend(templates.iter().map(|t| Subject::Template(t.to_string())));
                    findings.push(LintFinding {
                        rule: Rule::Naming,
                        severity: Severity::Warning,
                        subjects,
                        message: format!("local name '{local}' does not match {}", rule.pattern.as_str()),
                    });
                }
            }
        }
    }
    sort_findings(&mut findings);
    findings
}

/// All applicable lints. Instance lints run only when instances are given.
pub fn lint_all(library: &Library, instances: Option<&[Instance]>, config: &LintConfig) -> Result<LintReport, ExpandAllError> {
    let mut findings = lint_headers(library, config);
    findings.extend(lint_axiom_encapsulation(library, config));
    if let Some(instances) = instances {
        findings.extend(lint_output_redundancy(instances, library)?);
        findings.extend(lint_instantiation_redundancy(instances, config));
    }
    sort_findings(&mut findings);
    Ok(LintReport { findings })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LintReport {
    pub findings: Vec<LintFinding>,
}

#[derive(Serialize)]
struct FindingJson {
    severity: Severity,
    subjects: Vec<String>,
    message: String,
}

impl LintReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn render_text(&self, prefixes: &PrefixMap) -> String {
        self.findings.iter().map(|f| f.render(prefixes) + "\n").collect()
    }

    /// Findings grouped by rule id.
    pub fn to_json(&self, prefixes: &PrefixMap) -> serde_json::Value {
        let mut by_rule: BTreeMap<&'static str, Vec<FindingJson>> = BTreeMap::new();
        for f in &self.findings {
            by_rule.entry(f.rule.as_str()).or_default().push(FindingJson {
                severity: f.severity,
                subjects: f.subjects.iter().map(|s| s.render(prefixes)).collect(),
                message: f.message.clone(),
            });
        }
        serde_json::to_value(&by_rule).expect("findings serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_instances, parse_library};

    fn fixture(name: &str) -> String {
        std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
    }

    #[test]
    fn shared_output_triple() {
        let lib = parse_library(&fixture("people.stottr")).unwrap();
        let shared = parse_instances(&fixture("people_shared.stottr"), &lib).unwrap();
        let f = lint_output_redundancy(&shared, &lib).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].subjects, [Subject::Instance(0), Subject::Instance(1)]);
        let disjoint = parse_instances(&fixture("people_disjoint.stottr"), &lib).unwrap();
        assert!(lint_output_redundancy(&disjoint, &lib).unwrap().is_empty());
    }

    #[test]
    fn three_producers() {
        let lib = parse_library(&fixture("people.stottr")).unwrap();
        let insts =
            parse_instances("ex:Member(ex:a, ex:x) .\nex:Member(ex:a, ex:y) .\nex:Member(ex:a, ex:z) .", &lib).unwrap();
        let f = lint_output_redundancy(&insts, &lib).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].subjects, [0, 1, 2].map(Subject::Instance));
    }

    #[test]
    fn duplicates_and_shared_values() {
        let lib = parse_library("@prefix ex: <http://ex.org/> .").unwrap();
        let c = LintConfig::default();
        let dup = parse_instances("ex:T(ex:a) .\nex:T(ex:a) .", &lib).unwrap();
        let f = lint_instantiation_redundancy(&dup, &c);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].rule, Rule::InstanceDuplicate);
        assert_eq!(f[0].subjects, [Subject::Instance(0), Subject::Instance(1)]);

        let shared = parse_instances(
            "ex:M(ex:a, \"21.5\"^^xsd:double) .\nex:M(ex:b, \"21.5\"^^xsd:double) .\nex:M(ex:c, \"21.5\"^^xsd:double) .",
            &lib,
        )
        .unwrap();
        let f = lint_instantiation_redundancy(&shared, &c);
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].rule, f[0].severity), (Rule::SharedValue, Severity::Info));
        assert!(lint_instantiation_redundancy(&shared[..2], &c).is_empty());

        let distinct = parse_instances("ex:T(ex:a) .\nex:T(ex:b) .\nex:T(\"x\") .", &lib).unwrap();
        assert!(lint_instantiation_redundancy(&distinct, &c).is_empty());
    }

    #[test]
    fn axiom_scatter() {
        let c = LintConfig::default();
        let scattered = parse_library(&fixture("axiom_scatter.stottr")).unwrap();
        let f = lint_axiom_encapsulation(&scattered, &c);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].severity, Severity::Error);
        assert_eq!(
            f[0].subjects[..2],
            [Subject::Template("http://tpl.ex.org/pizza/T1".into()), Subject::Template("http://tpl.ex.org/pizza/T2".into())]
        );

        let encapsulated = parse_library(&fixture("axioms.stottr")).unwrap();
        assert!(lint_axiom_encapsulation(&encapsulated, &c).is_empty());
        let plain = parse_library(&fixture("people.stottr")).unwrap();
        assert!(lint_axiom_encapsulation(&plain, &c).is_empty());
    }

    #[test]
    fn direct_macro_call_alongside_encapsulating_template_scatters() {
        let text = fixture("axioms.stottr")
            + "pz:Rogue[ottr:IRI ?p] :: { ax:DomainRange(pz:hasTopping, ?p, pz:Food) } .\n";
        let lib = parse_library(&text).unwrap();
        let f = lint_axiom_encapsulation(&lib, &LintConfig::default());
        assert_eq!(f.len(), 1);
        assert!(f[0].message.contains("pz:AxiomHasTopping") && f[0].message.contains("pz:Rogue"));
    }

    #[test]
    fn header_rules() {
        let params: Vec<String> = (0..8).map(|i| format!("?p{i}")).collect();
        let text = format!("@prefix ex: <http://ex.org/> .\nex:Wide[{}] .\nex:Narrow[{}] .", params.join(", "), params[..7].join(", "));
        let lib = parse_library(&text).unwrap();
        let f = lint_headers(&lib, &LintConfig::default());
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].subjects, [Subject::Template("http://ex.org/Wide".into())]);
    }

    #[test]
    fn naming_rules() {
        let text = "@prefix ex: <http://ex.org/> .\n@prefix m: <http://ex.org/material/> .\n\
            ex:T[ottr:IRI ?x] :: { ottr:Triple(?x, ex:madeOf, m:Sample_01), ottr:Triple(?x, ex:madeOf, m:sample-02) } .";
        let lib = parse_library(text).unwrap();
        let mut c = LintConfig::default();
        assert!(lint_headers(&lib, &c).is_empty());
        c.naming_rules.push(NamingRule { prefix: "http://ex.org/material/".into(), pattern: Regex::new("^[a-z0-9-]+$").unwrap() });
        let f = lint_headers(&lib, &c);
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].rule, Rule::Naming);
        assert_eq!(f[0].subjects[0], Subject::Term(Term::Iri("http://ex.org/material/Sample_01".into())));
    }

    #[test]
    fn config_file() {
        let c = LintConfig::from_toml(&fixture("lint.toml"), &PrefixMap::well_known()).unwrap();
        assert_eq!(c.naming_rules.len(), 1);
        let c = LintConfig::from_toml("axiom_predicates = [\"rdfs:domain\"]", &PrefixMap::well_known()).unwrap();
        assert_eq!(c.axiom_predicates.len(), 1);
        assert!(LintConfig::from_toml("param_count_threshold = 0", &PrefixMap::well_known()).is_err());
    }

    #[test]
    fn deterministic() {
        let lib = parse_library(&fixture("axiom_scatter.stottr")).unwrap();
        let c = LintConfig::default();
        assert_eq!(lint_all(&lib, None, &c).unwrap(), lint_all(&lib, None, &c).unwrap());
    }
}
