use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::term::escape_string;
use super::{PrefixMap, Term, Triple};
use crate::vocab::{DEFAULT_EXCLUDED_NAMESPACES, XSD_STRING};

/// A set of ground triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleGraph {
    triples: BTreeSet<Triple>,
}

impl TripleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn extend(&mut self, other: TripleGraph) {
        self.triples.extend(other.triples);
    }

    pub fn union(&self, other: &TripleGraph) -> TripleGraph {
        TripleGraph { triples: self.triples.union(&other.triples).cloned().collect() }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn retain(&mut self, f: impl FnMut(&Triple) -> bool) {
        self.triples.retain(f);
    }

    /// One triple per line, lines sorted lexicographically.
    pub fn to_ntriples(&self) -> String {
        let mut lines: Vec<String> = self.triples.iter().map(Triple::to_string).collect();
        lines.sort();
        let mut out = String::new();
        for line in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Turtle grouped by subject, using `prefixes` for compact names.
    pub fn to_turtle(&self, prefixes: &PrefixMap) -> String {
        let mut out = String::new();
        for (label, ns) in prefixes.iter() {
            let _ = writeln!(out, "@prefix {label}: <{ns}> .");
        }
        let mut by_subject: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
        for t in &self.triples {
            by_subject.entry(t.subject()).or_default().push(t);
        }
        for (subject, triples) in by_subject {
            out.push('\n');
            out.push_str(&turtle_term(subject, prefixes));
            for (i, t) in triples.iter().enumerate() {
                let sep = if i == 0 { " " } else { " ;\n    " };
                let _ = write!(
                    out,
                    "{sep}{} {}",
                    turtle_term(t.predicate(), prefixes),
                    turtle_term(t.object(), prefixes)
                );
            }
            out.push_str(" .\n");
        }
        out
    }

    /// Partition of the node set into connected components.
    ///
    /// Nodes are IRIs and blank nodes in subject or object position, minus
    /// IRIs under an excluded namespace. A triple joins its subject and
    /// object when both are nodes. Components are sorted by their least node.
    pub fn connected_components<S: AsRef<str>>(&self, excluded: &[S]) -> Vec<BTreeSet<Term>> {
        let is_node = |t: &Term| match t {
            Term::Iri(iri) => !excluded.iter().any(|ns| iri.starts_with(ns.as_ref())),
            Term::Blank(_) => true,
            _ => false,
        };
        let mut index: BTreeMap<&Term, usize> = BTreeMap::new();
        let mut nodes: Vec<&Term> = Vec::new();
        let mut edges = Vec::new();
        for t in &self.triples {
            let s = is_node(t.subject()).then(|| node_id(t.subject(), &mut index, &mut nodes));
            let o = is_node(t.object()).then(|| node_id(t.object(), &mut index, &mut nodes));
            if let (Some(s), Some(o)) = (s, o) {
                edges.push((s, o));
            }
        }
        let mut dsu = DisjointSets::new(nodes.len());
        for (a, b) in edges {
            dsu.union(a, b);
        }
        let mut groups: BTreeMap<usize, BTreeSet<Term>> = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            groups.entry(dsu.find(i)).or_default().insert((*node).clone());
        }
        let mut components: Vec<BTreeSet<Term>> = groups.into_values().collect();
        components.sort_by(|a, b| a.first().cmp(&b.first()));
        components
    }

    /// Component count with the rdf/rdfs/owl/xsd namespaces excluded.
    pub fn component_count(&self) -> usize {
        self.connected_components(&DEFAULT_EXCLUDED_NAMESPACES).len()
    }
}

impl FromIterator<Triple> for TripleGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        TripleGraph { triples: iter.into_iter().collect() }
    }
}

impl IntoIterator for TripleGraph {
    type Item = Triple;
    type IntoIter = std::collections::btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

fn node_id<'a>(t: &'a Term, index: &mut BTreeMap<&'a Term, usize>, nodes: &mut Vec<&'a Term>) -> usize {
    *index.entry(t).or_insert_with(|| {
        nodes.push(t);
        nodes.len() - 1
    })
}

fn turtle_term(term: &Term, prefixes: &PrefixMap) -> String {
    match term {
        Term::Iri(iri) => prefixes.compact(iri).unwrap_or_else(|| term.to_string()),
        Term::Literal(lit) if lit.lang.is_none() && lit.datatype != XSD_STRING => {
            format!("\"{}\"^^{}", escape_string(&lit.lexical), turtle_term(&Term::Iri(lit.datatype.clone()), prefixes))
        }
        _ => term.to_string(),
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}
