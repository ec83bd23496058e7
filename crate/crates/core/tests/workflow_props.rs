use std::collections::BTreeMap;

use ottrkit::model::Term;
use ottrkit::syntax::parse_library;
use ottrkit::workflow::{Binding, SampleInputs, Workflow, WorkflowStep, simulate_connectivity, suggest_order, validate_workflow};
use ottrkit::{DiagnosticCode, Library};
use proptest::prelude::*;

fn step(id: usize, after: Vec<usize>) -> WorkflowStep {
    WorkflowStep {
        id: format!("s{id}"),
        template: "http://ex.org/Node".into(),
        after: after.into_iter().map(|a| format!("s{a}")).collect(),
        bindings: BTreeMap::new(),
    }
}

fn has_cycle(n: usize, deps: &[Vec<usize>]) -> bool {
    // repeatedly strip steps with no remaining dependencies
    let mut removed = vec![false; n];
    loop {
        let next = (0..n).find(|&i| !removed[i] && deps[i].iter().all(|&d| removed[d]));
        match next {
            Some(i) => removed[i] = true,
            None => return removed.iter().any(|r| !r),
        }
    }
}

fn deps_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..7).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n, 0..3), n))
}

fn node_library() -> Library {
    parse_library(
        "@prefix ex: <http://ex.org/> .\n\
         ex:Node[ottr:IRI ?x, ? ottr:IRI ?y] :: {\n\
             ottr:Triple(?x, rdfs:label, \"node\"),\n\
             ottr:Triple(?x, ex:rel, ?y)\n\
         } .",
    )
    .unwrap()
}

/// Steps minting `x`; each `y` is unbound, a fresh constant, or a ref.
fn linked_workflow(ys: &[Option<Option<usize>>]) -> Workflow {
    let steps = ys
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let mut s = step(i, Vec::new());
            s.bindings.insert("x".into(), Binding::MintAuto);
            match y {
                None => {}
                Some(None) => {
                    s.bindings.insert("y".into(), Binding::Const(Term::Iri(format!("http://ex.org/fresh{i}"))));
                }
                Some(Some(j)) => {
                    s.bindings.insert("y".into(), Binding::Ref { step: format!("s{j}"), param: "x".into() });
                }
            }
            s
        })
        .collect();
    Workflow { name: "w".into(), steps }
}

fn ys_strategy() -> impl Strategy<Value = Vec<Option<Option<usize>>>> {
    (1usize..7).prop_flat_map(|n| {
        (0..n)
            .map(|i| {
                if i == 0 {
                    prop_oneof![Just(None), Just(Some(None))].boxed()
                } else {
                    prop_oneof![Just(None), Just(Some(None)), (0..i).prop_map(|j| Some(Some(j)))].boxed()
                }
            })
            .collect::<Vec<_>>()
    })
}

fn components(wf: &Workflow, lib: &Library) -> Vec<usize> {
    simulate_connectivity(wf, lib, &SampleInputs::new(), "http://ex.org/run")
        .unwrap()
        .reports
        .into_iter()
        .map(|r| r.components_after)
        .collect()
}

proptest! {
    #[test]
    fn suggested_order_is_topological(deps in deps_strategy()) {
        let n = deps.len();
        let wf = Workflow { name: "w".into(), steps: deps.iter().enumerate().map(|(i, d)| step(i, d.clone())).collect() };
        match suggest_order(&wf) {
            Ok(order) => {
                prop_assert!(!has_cycle(n, &deps));
                let pos: BTreeMap<&str, usize> = order.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
                prop_assert_eq!(pos.len(), n);
                for (i, d) in deps.iter().enumerate() {
                    for &j in d {
                        let (dep, this) = (format!("s{j}"), format!("s{i}"));
                        prop_assert!(pos[dep.as_str()] < pos[this.as_str()]);
                    }
                }
                if deps.iter().all(|d| d.is_empty()) {
                    let declared: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
                    prop_assert_eq!(order, declared);
                }
            }
            Err(d) => {
                prop_assert_eq!(d.code, DiagnosticCode::WfCycle);
                prop_assert!(has_cycle(n, &deps));
            }
        }
    }

    #[test]
    fn adding_a_ref_never_adds_components(ys in ys_strategy(), pick in any::<prop::sample::Index>()) {
        let lib = node_library();
        let wf = linked_workflow(&ys);
        prop_assert_eq!(validate_workflow(&wf, &lib), vec![]);
        let before = components(&wf, &lib);

        // turn one non-ref binding of a later step into a ref to an earlier one
        let candidates: Vec<usize> = (1..ys.len()).filter(|&i| !matches!(ys[i], Some(Some(_)))).collect();
        if candidates.is_empty() {
            return Ok(());
        }
        let i = candidates[pick.index(candidates.len())];
        let mut linked = ys.clone();
        linked[i] = Some(Some(pick.index(i)));
        let after = components(&linked_workflow(&linked), &lib);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a <= b, "{before:?} -> {after:?}");
        }
    }

    #[test]
    fn simulation_is_deterministic(ys in ys_strategy()) {
        let lib = node_library();
        let wf = linked_workflow(&ys);
        let a = simulate_connectivity(&wf, &lib, &SampleInputs::new(), "http://ex.org/run").unwrap();
        let b = simulate_connectivity(&wf, &lib, &SampleInputs::new(), "http://ex.org/run").unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn fully_linked_chain_stays_connected() {
    let lib = node_library();
    let ys: Vec<Option<Option<usize>>> = (0..5).map(|i| if i == 0 { None } else { Some(Some(i - 1)) }).collect();
    assert_eq!(components(&linked_workflow(&ys), &lib), [1, 1, 1, 1, 1]);
    let unlinked: Vec<Option<Option<usize>>> = vec![None; 4];
    assert_eq!(components(&linked_workflow(&unlinked), &lib), [1, 2, 3, 4]);
}
