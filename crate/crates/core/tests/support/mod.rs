//! Shared test helpers: a naive evaluator, generators and small oracles
//! that share no code with the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::rngs::StdRng;
use rand::Rng;
use setforge::graph::{ExtensionalDigraph, NodeId, Provenance};
use setforge::logic::Formula;
use setforge::seeds::{AtomKind, AtomSpec, CodeSpec, CodeStyle, Component, TupleSpec};

/// Direct recursion over the tree, quantifiers over every node.
pub fn naive_eval(g: &ExtensionalDigraph, f: &Formula, env: &mut HashMap<String, NodeId>) -> bool {
    match f {
        Formula::Member(x, y) => g.has_edge(env[x], env[y]),
        Formula::Equal(x, y) => env[x] == env[y],
        Formula::Not(a) => !naive_eval(g, a, env),
        Formula::And(a, b) => {
            let l = naive_eval(g, a, env);
            let r = naive_eval(g, b, env);
            l && r
        }
        Formula::Or(a, b) => {
            let l = naive_eval(g, a, env);
            let r = naive_eval(g, b, env);
            l || r
        }
        Formula::Implies(a, b) => {
            let l = naive_eval(g, a, env);
            let r = naive_eval(g, b, env);
            !l || r
        }
        Formula::Iff(a, b) => naive_eval(g, a, env) == naive_eval(g, b, env),
        Formula::Exists(v, body) | Formula::ForAll(v, body) => {
            let saved = env.get(v).copied();
            let mut results = Vec::new();
            for x in g.node_ids() {
                env.insert(v.clone(), *x);
                results.push(naive_eval(g, body, env));
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            if matches!(f, Formula::Exists(..)) {
                results.contains(&true)
            } else {
                !results.contains(&false)
            }
        }
    }
}

pub const VARS: [&str; 4] = ["x", "y", "z", "w"];

/// Random formula with at most `depth` nested quantifiers.
pub fn random_formula(rng: &mut StdRng, depth: usize, size: usize) -> Formula {
    let var = |rng: &mut StdRng| VARS[rng.gen_range(0..VARS.len())].to_string();
    if size == 0 {
        return if rng.gen_bool(0.6) {
            Formula::Member(var(rng), var(rng))
        } else {
            Formula::Equal(var(rng), var(rng))
        };
    }
    let choice = rng.gen_range(0..if depth > 0 { 8 } else { 6 });
    let sub = |rng: &mut StdRng, d| {
        let s = rng.gen_range(0..size);
        random_formula(rng, d, s)
    };
    match choice {
        0 => random_formula(rng, depth, 0),
        1 => Formula::not(sub(rng, depth)),
        2 => Formula::and(sub(rng, depth), sub(rng, depth)),
        3 => Formula::or(sub(rng, depth), sub(rng, depth)),
        4 => Formula::implies(sub(rng, depth), sub(rng, depth)),
        5 => Formula::iff(sub(rng, depth), sub(rng, depth)),
        6 => Formula::exists(var(rng), sub(rng, depth - 1)),
        _ => Formula::forall(var(rng), sub(rng, depth - 1)),
    }
}

pub fn graph_from_edges(n: u32, edges: &[(u32, u32)]) -> ExtensionalDigraph {
    ExtensionalDigraph::from_parts(
        (0..n).map(|i| (NodeId(i), Provenance::seed(format!("s{i}")))),
        edges.iter().map(|(a, b)| (NodeId(*a), NodeId(*b))),
    )
    .expect("valid edges")
}

/// Arbitrary digraph on `n` nodes, not necessarily extensional.
pub fn random_digraph(rng: &mut StdRng, n: u32, p: f64) -> ExtensionalDigraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    graph_from_edges(n, &edges)
}

/// No directed cycle except self-loops.
pub fn only_self_loop_cycles(n: u32, mask: u32) -> bool {
    // Kahn's algorithm on the graph without self-loops.
    let edge = |a: u32, b: u32| mask >> (a * n + b) & 1 == 1;
    let mut indeg: Vec<u32> = (0..n).map(|b| (0..n).filter(|a| *a != b && edge(*a, b)).count() as u32).collect();
    let mut ready: Vec<u32> = (0..n).filter(|b| indeg[*b as usize] == 0).collect();
    let mut done = 0;
    while let Some(a) = ready.pop() {
        done += 1;
        for b in 0..n {
            if b != a && edge(a, b) {
                indeg[b as usize] -= 1;
                if indeg[b as usize] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    done == n
}

/// In-neighbourhood bitmasks are pairwise distinct.
pub fn extensional_mask(n: u32, mask: u32) -> bool {
    let ext: Vec<u32> = (0..n)
        .map(|b| (0..n).filter(|a| mask >> (a * n + b) & 1 == 1).fold(0, |acc, a| acc | 1 << a))
        .collect();
    let mut sorted = ext.clone();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == ext.len()
}

/// Every labelled extensional digraph on exactly `n` nodes whose only
/// cycles are self-loops.
pub fn all_seeds(n: u32) -> Vec<ExtensionalDigraph> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << (n * n)) {
        if extensional_mask(n, mask) && only_self_loop_cycles(n, mask) {
            let edges: Vec<(u32, u32)> = (0..n * n)
                .filter(|bit| mask >> bit & 1 == 1)
                .map(|bit| (bit / n, bit % n))
                .collect();
            out.push(graph_from_edges(n, &edges));
        }
    }
    out
}

pub fn all_seeds_up_to(n: u32) -> Vec<ExtensionalDigraph> {
    (0..=n).flat_map(all_seeds).collect()
}

/// `|V_0|, …, |V_k|` computed with the Ackermann coding of hereditarily
/// finite sets: the stage after `s` sets holds every subset, `2^s` sets.
pub fn von_neumann_sizes(k: u32) -> Vec<u64> {
    let mut sizes = vec![0u64];
    for _ in 0..k {
        let s = *sizes.last().unwrap();
        sizes.push(1u64 << s);
    }
    sizes
}

/// Maps every node of `small` into `big` so that extensions correspond.
/// Self-membered nodes are matched by their other members and, among
/// those, by provenance; Quine atoms must match by provenance. Everything
/// else goes by the image of its extension. Returns `None` if some node
/// has no counterpart, the map is not injective, or an old node gained
/// members.
pub fn end_embedding(small: &ExtensionalDigraph, big: &ExtensionalDigraph) -> Option<BTreeMap<NodeId, NodeId>> {
    let index: HashMap<&[NodeId], NodeId> = big.iter().map(|(id, _, m)| (m, id)).collect();
    let mut looped: HashMap<Vec<NodeId>, Vec<NodeId>> = HashMap::new();
    for (id, _, m) in big.iter() {
        if m.contains(&id) {
            looped.entry(m.iter().copied().filter(|x| *x != id).collect()).or_default().push(id);
        }
    }
    let mut f: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    loop {
        let before = f.len();
        for (id, prov, members) in small.iter() {
            if f.contains_key(&id) {
                continue;
            }
            let others: Option<Vec<NodeId>> =
                members.iter().filter(|m| **m != id).map(|m| f.get(m).copied()).collect();
            let Some(mut image) = others else { continue };
            image.sort_unstable();
            let target = if members.contains(&id) {
                let candidates = looped.get(&image)?;
                let same = candidates.iter().copied().find(|y| big.provenance(*y).ok() == Some(prov));
                match same {
                    Some(y) => y,
                    None if image.is_empty() => return None,
                    None => *candidates.iter().find(|y| !f.values().any(|t| t == *y))?,
                }
            } else {
                *index.get(image.as_slice())?
            };
            f.insert(id, target);
        }
        if f.len() == small.len() {
            break;
        }
        if f.len() == before {
            return None;
        }
    }
    for (id, _, members) in small.iter() {
        let mut image: Vec<NodeId> = members.iter().map(|m| f[m]).collect();
        image.sort_unstable();
        if big.members(f[&id]).ok()? != image.as_slice() {
            return None;
        }
    }
    let mut targets: Vec<NodeId> = f.values().copied().collect();
    targets.sort_unstable();
    targets.dedup();
    (targets.len() == f.len()).then_some(f)
}

/// Random code spec; many fail validation or assembly and are meant to be
/// rejected by the caller.
pub fn random_spec(rng: &mut StdRng, style: CodeStyle, chain_atoms: bool) -> CodeSpec {
    let atom_count = rng.gen_range(0..=3);
    let atoms: Vec<AtomSpec> = (0..atom_count)
        .map(|i| AtomSpec {
            label: format!("a{i}"),
            kind: if chain_atoms || rng.gen_bool(0.1) {
                AtomKind::Chain(rng.gen_range(1..=3))
            } else {
                AtomKind::Quine
            },
        })
        .collect();
    let naturals_up_to = rng.gen_range(0..=4);
    let mut tuples = Vec::new();
    if naturals_up_to > 0 {
        for _ in 0..rng.gen_range(0..=4) {
            let components = (0..rng.gen_range(0..=2))
                .map(|_| {
                    if !atoms.is_empty() && rng.gen_bool(0.5) {
                        Component::Atom(atoms[rng.gen_range(0..atoms.len())].label.clone())
                    } else {
                        Component::Numeral(rng.gen_range(0..naturals_up_to))
                    }
                })
                .collect();
            let t = TupleSpec {
                tag: rng.gen_range(0..naturals_up_to),
                components,
            };
            if !tuples.contains(&t) {
                tuples.push(t);
            }
        }
    }
    CodeSpec {
        atoms,
        naturals_up_to,
        tuples,
        code_style: style,
    }
}
