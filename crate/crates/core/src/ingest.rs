//! CSV rows to template instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use crate::expand::{ExpandAllError, Expander};
use crate::model::{PrefixMap, Term, TripleGraph, is_absolute_iri};
use crate::syntax::{Instance, Library, parse_term};
use crate::typecheck::term_accepts;
use crate::vocab::{XSD, XSD_STRING};
use crate::workflow::resolve_name;

/// How a cell becomes a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellKind {
    Iri,
    Literal(String),
    Lang(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnBinding {
    Column { column: String, kind: CellKind },
    Constant(Term),
    MintPattern(String),
    /// Like `Column`, but an empty cell skips the whole row.
    SkipIfEmpty { column: String, kind: CellKind },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingConfig {
    pub template: String,
    pub delimiter: u8,
    pub base: Option<String>,
    pub bindings: BTreeMap<String, ColumnBinding>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("invalid mapping: {0}")]
    Config(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("column '{0}' is not in the header row")]
    MissingColumn(String),
    #[error("expansion failed: {0}")]
    Expand(#[from] ExpandAllError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    template: String,
    delimiter: Option<String>,
    base: Option<String>,
    bindings: BTreeMap<String, BindingFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BindingFile {
    column: Option<String>,
    #[serde(rename = "as")]
    kind: Option<String>,
    datatype: Option<String>,
    lang: Option<String>,
    #[serde(rename = "const")]
    constant: Option<String>,
    mint: Option<String>,
    #[serde(default)]
    skip_if_empty: bool,
}

fn placeholders(pattern: &str) -> Vec<&str> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\{([^{}]+)\}").expect("valid regex"));
    re.captures_iter(pattern).map(|c| c.get(1).expect("group").as_str()).collect()
}

impl MappingConfig {
    /// Reads a TOML mapping and checks it against the template signature.
    pub fn from_toml(text: &str, lib: &Library) -> Result<Self, IngestError> {
        let file: MappingFile = toml::from_str(text).map_err(|e| IngestError::Config(e.to_string()))?;
        let prefixes = lib.effective_prefixes();
        let template = resolve_name(&file.template, &prefixes).map_err(IngestError::Config)?;
        let delimiter = match file.delimiter.as_deref() {
            None => b',',
            Some(d) if d.len() == 1 && d.is_ascii() => d.as_bytes()[0],
            Some("\\t") => b'\t',
            Some(d) => return Err(IngestError::Config(format!("delimiter must be one ASCII character, got '{d}'"))),
        };
        let mut bindings = BTreeMap::new();
        for (param, b) in file.bindings {
            let err = |m: String| IngestError::Config(format!("binding {param}: {m}"));
            let binding = match (&b.column, &b.constant, &b.mint) {
                (Some(column), None, None) => {
                    let kind = match b.kind.as_deref().unwrap_or("literal") {
                        "iri" => CellKind::Iri,
                        "literal" => {
                            let dt = match &b.datatype {
                                Some(dt) => resolve_name(dt, &prefixes).map_err(err)?,
                                None => XSD_STRING.to_string(),
                            };
                            CellKind::Literal(dt)
                        }
                        "lang" => CellKind::Lang(b.lang.clone().ok_or_else(|| err("as = \"lang\" needs lang".into()))?),
                        other => return Err(err(format!("unknown cell kind '{other}'"))),
                    };
                    if b.skip_if_empty {
                        ColumnBinding::SkipIfEmpty { column: column.clone(), kind }
                    } else {
                        ColumnBinding::Column { column: column.clone(), kind }
                    }
                }
                (None, Some(c), None) => {
                    ColumnBinding::Constant(parse_term(c, &prefixes).map_err(|d| err(d.message))?)
                }
                (None, None, Some(p)) => ColumnBinding::MintPattern(p.clone()),
                _ => return Err(err("give exactly one of column, const or mint".into())),
            };
            bindings.insert(param, binding);
        }
        let config = MappingConfig { template, delimiter, base: file.base, bindings };
        config.check(lib)?;
        Ok(config)
    }

    /// Signature checks: template exists, bindings name real parameters and
    /// cover the required ones, and cell kinds fit parameter types.
    pub fn check(&self, lib: &Library) -> Result<(), IngestError> {
        let prefixes = lib.effective_prefixes();
        let t = lib
            .get(&self.template)
            .ok_or_else(|| IngestError::Config(format!("unknown template {}", prefixes.display_iri(&self.template))))?;
        for name in self.bindings.keys() {
            if t.parameter(name).is_none() {
                return Err(IngestError::Config(format!("template has no parameter ?{name}")));
            }
        }
        for p in &t.parameters {
            match self.bindings.get(&p.name) {
                None if p.rejects_none() => {
                    return Err(IngestError::Config(format!("required parameter ?{} is not bound", p.name)));
                }
                Some(ColumnBinding::Column { kind, .. } | ColumnBinding::SkipIfEmpty { kind, .. }) => {
                    let sample = match kind {
                        CellKind::Iri => Term::Iri("http://example.org/x".into()),
                        CellKind::Literal(dt) => Term::typed_literal("", dt.clone()),
                        CellKind::Lang(tag) => Term::lang_literal("", tag.clone()),
                    };
                    if !term_accepts(&p.ptype, &sample) {
                        return Err(IngestError::Config(format!(
                            "cells for ?{} do not fit type {}",
                            p.name,
                            p.ptype.display(&prefixes)
                        )));
                    }
                }
                Some(ColumnBinding::Constant(term)) if !term_accepts(&p.ptype, term) => {
                    return Err(IngestError::Config(format!("constant for ?{} does not fit its type", p.name)));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn columns(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for b in self.bindings.values() {
            match b {
                ColumnBinding::Column { column, .. } | ColumnBinding::SkipIfEmpty { column, .. } => {
                    out.insert(column.as_str());
                }
                ColumnBinding::MintPattern(p) => out.extend(placeholders(p)),
                ColumnBinding::Constant(_) => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowDiagnosticKind {
    /// A bad cell; the row produced no instance.
    Error,
    /// A `skip_if_empty` column was empty.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiagnostic {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub column: Option<String>,
    pub kind: RowDiagnosticKind,
    pub message: String,
}

impl fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            RowDiagnosticKind::Error => "error",
            RowDiagnosticKind::Skipped => "skipped",
        };
        match &self.column {
            Some(c) => write!(f, "row {} column {c}: {kind}: {}", self.row, self.message),
            None => write!(f, "row {}: {kind}: {}", self.row, self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingestion {
    pub instances: Vec<Instance>,
    /// Data row number of each instance.
    pub rows: Vec<usize>,
    pub diagnostics: Vec<RowDiagnostic>,
    pub data_rows: usize,
}

impl Ingestion {
    /// Rows that produced no instance.
    pub fn rejected_rows(&self) -> BTreeSet<usize> {
        self.diagnostics.iter().map(|d| d.row).collect()
    }
}

/// Whether `lexical` is valid for the XSD numeric and boolean types; other
/// datatypes accept anything.
pub fn valid_lexical(lexical: &str, datatype: &str) -> bool {
    static PATTERNS: OnceLock<[(Vec<&'static str>, Regex); 4]> = OnceLock::new();
    let patterns = PATTERNS.get_or_init(|| {
        [
            (vec!["double", "float"], Regex::new(r"^([+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?|[+-]?INF|NaN)$").unwrap()),
            (vec!["decimal"], Regex::new(r"^[+-]?(\d+(\.\d*)?|\.\d+)$").unwrap()),
            (
                vec![
                    "integer", "int", "long", "short", "byte", "nonNegativeInteger", "positiveInteger",
                    "nonPositiveInteger", "negativeInteger", "unsignedLong", "unsignedInt", "unsignedShort",
                    "unsignedByte",
                ],
                Regex::new(r"^[+-]?\d+$").unwrap(),
            ),
            (vec!["boolean"], Regex::new(r"^(true|false|1|0)$").unwrap()),
        ]
    });
    let Some(local) = datatype.strip_prefix(XSD) else { return true };
    patterns.iter().find(|(names, _)| names.contains(&local)).is_none_or(|(_, re)| re.is_match(lexical))
}

fn cell_term(cell: &str, kind: &CellKind, base: Option<&str>) -> Result<Term, String> {
    match kind {
        CellKind::Iri => {
            if cell.contains(':') && is_absolute_iri(cell) {
                Ok(Term::Iri(cell.to_string()))
            } else if let Some(base) = base {
                let iri = format!("{base}{cell}");
                if is_absolute_iri(&iri) { Ok(Term::Iri(iri)) } else { Err(format!("'{cell}' does not form a valid IRI")) }
            } else {
                Err(format!("'{cell}' is not an absolute IRI and no base is configured"))
            }
        }
        CellKind::Literal(dt) => {
            if valid_lexical(cell, dt) {
                Ok(Term::typed_literal(cell, dt.clone()))
            } else {
                Err(format!("'{cell}' is not a valid {}", PrefixMap::well_known().display_iri(dt)))
            }
        }
        CellKind::Lang(tag) => Ok(Term::lang_literal(cell, tag.clone())),
    }
}

fn check_quotes(text: &str) -> Result<(), IngestError> {
    // Doubled quotes inside a field come in pairs, so an odd count means an
    // unterminated quoted field.
    let mut line = 1;
    let mut open_at = None;
    for c in text.chars() {
        match c {
            '"' => open_at = if open_at.is_some() { None } else { Some(line) },
            '\n' => line += 1,
            _ => {}
        }
    }
    match open_at {
        Some(l) => Err(IngestError::Csv(format!("unbalanced quote starting on line {l}"))),
        None => Ok(()),
    }
}

/// Maps each data row to one instance of the configured template. Bad cells
/// produce row diagnostics and no instance; row order is preserved.
pub fn ingest_csv(text: &str, config: &MappingConfig, lib: &Library) -> Result<Ingestion, IngestError> {
    config.check(lib)?;
    check_quotes(text)?;
    let template = lib.get(&config.template).expect("checked above");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> =
        reader.headers().map_err(|e| IngestError::Csv(e.to_string()))?.iter().map(str::to_string).collect();
    let index: BTreeMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h.as_str(), i)).collect();
    for c in config.columns() {
        if !index.contains_key(c) {
            return Err(IngestError::MissingColumn(c.to_string()));
        }
    }

    let mut out = Ingestion::default();
    for (n, record) in reader.records().enumerate() {
        let row = n + 1;
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        out.data_rows += 1;
        let diag = |column: Option<&str>, kind, message: String| RowDiagnostic {
            row,
            column: column.map(str::to_string),
            kind,
            message,
        };
        if record.len() != header.len() {
            out.diagnostics.push(diag(
                None,
                RowDiagnosticKind::Error,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
            continue;
        }
        let get = |c: &str| record.get(index[c]).unwrap_or("");

        let mut args = Vec::with_capacity(template.arity());
        let mut failure = None;
        for p in &template.parameters {
            let value = match config.bindings.get(&p.name) {
                None => Ok(Term::None),
                Some(ColumnBinding::Constant(t)) => Ok(t.clone()),
                Some(ColumnBinding::MintPattern(pattern)) => {
                    let mut iri = pattern.clone();
                    let mut empty = None;
                    for ph in placeholders(pattern) {
                        let v = get(ph);
                        if v.is_empty() {
                            empty = Some(ph);
                        }
                        iri = iri.replace(&format!("{{{ph}}}"), v);
                    }
                    match empty {
                        Some(ph) => Err(diag(Some(ph), RowDiagnosticKind::Error, format!("empty cell needed to mint ?{}", p.name))),
                        None if is_absolute_iri(&iri) => Ok(Term::Iri(iri)),
                        None => Err(diag(None, RowDiagnosticKind::Error, format!("minted '{iri}' is not a valid IRI"))),
                    }
                }
                Some(ColumnBinding::Column { column, kind }) => {
                    let cell = get(column);
                    if cell.is_empty() {
                        if p.rejects_none() {
                            Err(diag(
                                Some(column),
                                RowDiagnosticKind::Error,
                                format!("empty cell for required parameter ?{}", p.name),
                            ))
                        } else {
                            Ok(Term::None)
                        }
                    } else {
                        cell_term(cell, kind, config.base.as_deref())
                            .map_err(|m| diag(Some(column), RowDiagnosticKind::Error, m))
                    }
                }
                Some(ColumnBinding::SkipIfEmpty { column, kind }) => {
                    let cell = get(column);
                    if cell.is_empty() {
                        Err(diag(Some(column), RowDiagnosticKind::Skipped, format!("'{column}' is empty")))
                    } else {
                        cell_term(cell, kind, config.base.as_deref())
                            .map_err(|m| diag(Some(column), RowDiagnosticKind::Error, m))
                    }
                }
            };
            match value {
                Ok(t) => args.push(t),
                Err(d) => {
                    failure = Some(d);
                    break;
                }
            }
        }
        match failure {
            Some(d) => out.diagnostics.push(d),
            None => {
                out.instances.push(Instance::new(config.template.clone(), args));
                out.rows.push(row);
            }
        }
    }
    Ok(out)
}

/// Ingestion followed by expansion of the resulting instances.
pub fn ingest_to_graph(text: &str, config: &MappingConfig, lib: &Library) -> Result<TripleGraph, IngestError> {
    let ingestion = ingest_csv(text, config, lib)?;
    Ok(Expander::new(lib).expand_all(&ingestion.instances)?)
}

/// The parameter name that marks publication status.
pub const PUBLICATION_STATUS: &str = "publicationStatus";

fn is_published(term: &Term) -> bool {
    let value = match term {
        Term::Literal(l) => l.lexical.as_str(),
        Term::Iri(iri) => iri.rsplit(['/', '#', ':']).next().unwrap_or(""),
        _ => return false,
    };
    value.eq_ignore_ascii_case("published")
}

/// Drops instances whose template has a `publicationStatus` parameter not
/// bound to "published" (a literal, or an IRI with that local name).
/// Instances of templates without the parameter are kept.
pub fn published_only(instances: &[Instance], lib: &Library) -> Vec<Instance> {
    instances
        .iter()
        .filter(|inst| {
            let Some(t) = lib.get(&inst.template) else { return true };
            match t.parameters.iter().position(|p| p.name == PUBLICATION_STATUS) {
                None => true,
                Some(i) => inst.arguments.get(i).is_some_and(|a| is_published(&a.term)),
            }
        })
        .cloned()
        .collect()
}
