//! Toolchain for OTTR-style ontology templates.
//!
//! A template library written in a compact stOTTR-like syntax is parsed into
//! a [`Library`](syntax::Library), type-checked, and instances of its templates
//! are expanded into ground RDF triples. Around that core sit a linter for
//! template design rules, instantiation workflows with a connectivity check,
//! documentation generation and CSV ingestion.

pub mod docgen;
pub mod expand;
pub mod ingest;
pub mod lint;
pub mod model;
pub mod syntax;
pub mod typecheck;
pub mod vocab;
pub mod workflow;

pub use expand::{ExpandError, Expander};
pub use model::{Literal, PrefixMap, Term, Triple, TripleGraph};
pub use syntax::{Argument, ExpansionMode, Instance, Library, ParamType, Parameter, TemplateDefinition};
pub use typecheck::{Diagnostic, DiagnosticCode, Severity};
