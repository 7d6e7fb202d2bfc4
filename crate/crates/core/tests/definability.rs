mod support;

use std::collections::{BTreeSet, HashSet};

use rand::rngs::StdRng;
use rand::SeedableRng;
use setforge::completion::{complete, Budget};
use setforge::graph::NodeId;
use setforge::logic::{chain_code_formula, define_class, quine_code_formula};
use setforge::seeds::{assemble, Assembled, CodeSpec, CodeStyle, Component, TupleSpec};

use support::random_spec;

const MAX_SEED: usize = 12;

fn tuple_nodes(a: &Assembled) -> BTreeSet<NodeId> {
    a.index.codes.tuple_nodes().into_iter().collect()
}

#[test]
fn loop_codes_define_tuples_with_components() {
    let mut rng = StdRng::seed_from_u64(41);
    let mut seen = HashSet::new();
    let mut with_components = 0;
    for _ in 0..50_000 {
        if with_components == 15 {
            break;
        }
        let spec = random_spec(&mut rng, CodeStyle::Loop, false);
        if spec.tuples.iter().all(|t| t.components.is_empty()) {
            continue;
        }
        let Ok(a) = assemble(&spec) else { continue };
        if a.graph.len() > MAX_SEED || !seen.insert(serde_json::to_string(&spec).unwrap()) {
            continue;
        }
        with_components += 1;
        let u = complete(&a.graph, 1, &Budget::default()).unwrap();
        let defined = define_class(u.graph(), &quine_code_formula()).unwrap();
        assert_eq!(defined, tuple_nodes(&a), "{spec:?}");
    }
    assert_eq!(with_components, 15);
}

#[test]
fn loop_codes_with_atom_components() {
    let spec: CodeSpec = serde_json::from_str(
        r#"{"atoms":[{"label":"a","kind":"quine"}],"naturals_up_to":2,
            "tuples":[{"tag":1,"components":["a"]},{"tag":0}]}"#,
    )
    .unwrap();
    let a = assemble(&spec).unwrap();
    assert_eq!(a.index.codes.tuple_nodes().len(), 2);
    let u = complete(&a.graph, 1, &Budget::default()).unwrap();
    assert_eq!(define_class(u.graph(), &quine_code_formula()).unwrap(), tuple_nodes(&a));
}

fn chain_spec(len: u32) -> Assembled {
    assemble(&CodeSpec {
        atoms: Vec::new(),
        naturals_up_to: 3,
        tuples: vec![
            TupleSpec { tag: 1, components: Vec::new() },
            TupleSpec { tag: 2, components: Vec::new() },
        ],
        code_style: CodeStyle::Chain(len),
    })
    .unwrap()
}

#[test]
fn chain_formula_never_loses_coded_tuples_below_the_code_length() {
    for len in 1..=4 {
        let a = chain_spec(len);
        let u = complete(&a.graph, 1, &Budget::default()).unwrap();
        for bound in 1..=len {
            let defined = define_class(u.graph(), &chain_code_formula(bound).unwrap()).unwrap();
            assert!(defined.is_superset(&tuple_nodes(&a)), "len {len} bound {bound}");
        }
    }
}

#[test]
fn chain_formula_one_past_the_code_length_is_exact() {
    for len in [3, 4] {
        let a = chain_spec(len);
        let u = complete(&a.graph, 1, &Budget::default()).unwrap();
        let defined = define_class(u.graph(), &chain_code_formula(len + 1).unwrap()).unwrap();
        assert_eq!(defined, tuple_nodes(&a), "len {len}");
    }
}

#[test]
fn short_bounds_over_approximate() {
    let a = chain_spec(4);
    let u = complete(&a.graph, 1, &Budget::default()).unwrap();
    let defined = define_class(u.graph(), &chain_code_formula(2).unwrap()).unwrap();
    assert!(defined.len() > tuple_nodes(&a).len());
}

#[test]
fn chain_codes_are_not_self_membered() {
    let a = chain_spec(3);
    let u = complete(&a.graph, 1, &Budget::default()).unwrap();
    assert!(define_class(u.graph(), &quine_code_formula()).unwrap().is_empty());
    assert!(a.index.codes.code_nodes().iter().all(|b| !a.graph.has_self_loop(*b)));
}

#[test]
fn numeral_components_are_resolved() {
    let spec = CodeSpec {
        atoms: Vec::new(),
        naturals_up_to: 3,
        tuples: vec![TupleSpec {
            tag: 0,
            components: vec![Component::Numeral(2)],
        }],
        code_style: CodeStyle::Loop,
    };
    let a = assemble(&spec).unwrap();
    let u = complete(&a.graph, 1, &Budget::default()).unwrap();
    assert_eq!(define_class(u.graph(), &quine_code_formula()).unwrap(), tuple_nodes(&a));
}
