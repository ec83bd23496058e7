use std::collections::BTreeMap;

use thiserror::Error;

use super::Term;
use crate::vocab::DEFAULT_PREFIXES;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("unbound prefix '{0}'")]
    UnboundPrefix(String),
    #[error("prefix '{label}' already bound to <{existing}>, cannot rebind to <{requested}>")]
    Conflict { label: String, existing: String, requested: String },
    #[error("'{0}' is not a prefixed name")]
    NotPrefixed(String),
}

pub(crate) fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Prefix label to namespace IRI bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMap {
    bindings: BTreeMap<String, String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// The `ottr`, `owl`, `rdf`, `rdfs` and `xsd` namespaces.
    pub fn well_known() -> Self {
        PrefixMap {
            bindings: DEFAULT_PREFIXES.iter().map(|(l, n)| (l.to_string(), n.to_string())).collect(),
        }
    }

    /// Binds `label`. Re-declaring the same namespace is a no-op.
    pub fn insert(&mut self, label: impl Into<String>, namespace: impl Into<String>) -> Result<(), PrefixError> {
        let label = label.into();
        let namespace = namespace.into();
        match self.bindings.get(&label) {
            Some(existing) if *existing != namespace => Err(PrefixError::Conflict {
                label,
                existing: existing.clone(),
                requested: namespace,
            }),
            Some(_) => Ok(()),
            None => {
                self.bindings.insert(label, namespace);
                Ok(())
            }
        }
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.bindings.get(label).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Bindings sorted by label.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(l, n)| (l.as_str(), n.as_str()))
    }

    /// This map layered over `base`: labels bound here shadow `base`.
    pub fn layered_over(&self, base: &PrefixMap) -> PrefixMap {
        let mut bindings = base.bindings.clone();
        bindings.extend(self.bindings.iter().map(|(l, n)| (l.clone(), n.clone())));
        PrefixMap { bindings }
    }

    /// Expands `label:local` to an IRI term.
    pub fn resolve(&self, prefixed: &str) -> Result<Term, PrefixError> {
        let (label, local) =
            prefixed.split_once(':').ok_or_else(|| PrefixError::NotPrefixed(prefixed.to_string()))?;
        let namespace = self.get(label).ok_or_else(|| PrefixError::UnboundPrefix(label.to_string()))?;
        Ok(Term::Iri(format!("{namespace}{local}")))
    }

    /// Shortest `label:local` form of `iri`, if some namespace yields a plain local name.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.bindings
            .iter()
            .filter_map(|(label, ns)| {
                let local = iri.strip_prefix(ns.as_str())?;
                (!local.is_empty() && local.chars().all(is_local_char)).then_some((ns.len(), label, local))
            })
            .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            .map(|(_, label, local)| format!("{label}:{local}"))
    }

    /// Compact form when possible, `<iri>` otherwise.
    pub fn display_iri(&self, iri: &str) -> String {
        self.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
    }
}
