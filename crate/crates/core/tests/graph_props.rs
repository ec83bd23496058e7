use std::collections::{BTreeMap, BTreeSet};

use ottrkit::model::{Term, Triple, TripleGraph};
use ottrkit::vocab::{DEFAULT_EXCLUDED_NAMESPACES, OWL, RDF_TYPE};
use proptest::prelude::*;

fn node(i: u8) -> Term {
    if i % 5 == 4 { Term::blank(format!("n{i}")) } else { Term::Iri(format!("http://ex.org/n{i}")) }
}

fn triple_strategy() -> impl Strategy<Value = Triple> {
    (0u8..12, 0u8..3, 0u8..15).prop_map(|(s, p, o)| {
        let object = match o {
            12 => Term::literal("shared"),
            13 => Term::Iri(format!("{OWL}Class")),
            14 => Term::literal(format!("v{s}")),
            _ => node(o),
        };
        let predicate = if p == 0 { Term::Iri(RDF_TYPE.into()) } else { Term::Iri(format!("http://ex.org/p{p}")) };
        Triple::new(node(s), predicate, object).unwrap()
    })
}

fn graph_strategy() -> impl Strategy<Value = TripleGraph> {
    prop::collection::vec(triple_strategy(), 0..20).prop_map(|ts| ts.into_iter().collect())
}

fn is_node(t: &Term) -> bool {
    match t {
        Term::Blank(_) => true,
        Term::Iri(iri) => !DEFAULT_EXCLUDED_NAMESPACES.iter().any(|ns| iri.starts_with(ns)),
        _ => false,
    }
}

/// Components by breadth-first search over an adjacency map.
fn bfs_components(g: &TripleGraph) -> BTreeSet<BTreeSet<Term>> {
    let mut adj: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for t in g.iter() {
        for n in [t.subject(), t.object()] {
            if is_node(n) {
                adj.entry(n.clone()).or_default();
            }
        }
        if is_node(t.subject()) && is_node(t.object()) {
            adj.get_mut(t.subject()).unwrap().insert(t.object().clone());
            adj.get_mut(t.object()).unwrap().insert(t.subject().clone());
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    for start in adj.keys() {
        if seen.contains(start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = vec![start.clone()];
        while let Some(n) = queue.pop() {
            if seen.insert(n.clone()) {
                queue.extend(adj[&n].iter().cloned());
                comp.insert(n);
            }
        }
        out.insert(comp);
    }
    out
}

proptest! {
    #[test]
    fn union_is_commutative_associative_idempotent(a in graph_strategy(), b in graph_strategy(), c in graph_strategy()) {
        prop_assert_eq!(a.union(&b), b.union(&a));
        prop_assert_eq!(a.union(&b).union(&c), a.union(&b.union(&c)));
        prop_assert_eq!(a.union(&a), a.clone());
    }

    #[test]
    fn components_partition_the_node_set(g in graph_strategy()) {
        let comps = g.connected_components(&DEFAULT_EXCLUDED_NAMESPACES);
        let mut all = BTreeSet::new();
        let mut total = 0;
        for c in &comps {
            prop_assert!(!c.is_empty());
            total += c.len();
            all.extend(c.iter().cloned());
        }
        prop_assert_eq!(total, all.len());
        let nodes: BTreeSet<Term> = g.iter().flat_map(|t| [t.subject().clone(), t.object().clone()]).filter(is_node).collect();
        prop_assert_eq!(all, nodes);
    }

    #[test]
    fn components_match_bfs(g in graph_strategy()) {
        let ours: BTreeSet<BTreeSet<Term>> = g.connected_components(&DEFAULT_EXCLUDED_NAMESPACES).into_iter().collect();
        prop_assert_eq!(ours, bfs_components(&g));
    }

    #[test]
    fn adding_a_triple_never_adds_components(g in graph_strategy(), t in triple_strategy()) {
        let nodes: BTreeSet<Term> =
            g.connected_components(&DEFAULT_EXCLUDED_NAMESPACES).into_iter().flatten().collect();
        let touches_existing = [t.subject(), t.object()].into_iter().any(|n| nodes.contains(n));
        let before = g.component_count();
        let mut h = g.clone();
        h.insert(t);
        let after = h.component_count();
        // A triple over fresh nodes only can add exactly one component.
        if touches_existing {
            prop_assert!(after <= before);
        } else {
            prop_assert!(after <= before + 1);
        }
    }

    #[test]
    fn ntriples_lines_sorted_and_counted(g in graph_strategy()) {
        let text = g.to_ntriples();
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines.len(), g.len());
        let mut sorted = lines.clone();
        sorted.sort();
        prop_assert_eq!(lines, sorted);
    }
}

#[test]
fn shared_class_does_not_connect() {
    let class = Term::Iri(format!("{OWL}Class"));
    let ty = Term::Iri(RDF_TYPE.into());
    let g: TripleGraph = [
        Triple::new(node(0), ty.clone(), class.clone()).unwrap(),
        Triple::new(node(1), ty, class).unwrap(),
    ]
    .into_iter()
    .collect();
    assert_eq!(g.component_count(), 2);
    let none: [&str; 0] = [];
    assert_eq!(g.connected_components(&none).len(), 1);
}
