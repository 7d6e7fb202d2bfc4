use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId};
use crate::logic::ast::Formula;
use crate::logic::parser::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    Extensionality,
    /// Every node with nonempty extension has a member sharing no member with it.
    FoundationMinimal,
    /// Some node contains an empty node and is closed under `y ↦ y ∪ {y}`.
    Infinity,
}

impl Axiom {
    pub const ALL: [Axiom; 3] = [Axiom::Extensionality, Axiom::FoundationMinimal, Axiom::Infinity];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Extensionality => "extensionality",
            Axiom::FoundationMinimal => "foundation_minimal",
            Axiom::Infinity => "infinity",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown axiom `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub passed: bool,
    /// Pairs sharing an extension, or nodes without a minimal member.
    pub counterexamples: Vec<Vec<NodeId>>,
}

/// The axiom as a sentence, for cross-checking [`check_axiom`] with `eval`.
pub fn axiom_formula(axiom: Axiom) -> Formula {
    let text = match axiom {
        Axiom::Extensionality => "all x. all y. (all z. (z in x <-> z in y)) -> x = y",
        Axiom::FoundationMinimal => {
            "all x. (exists y. y in x) -> (exists y. y in x & !exists w. w in y & w in x)"
        }
        Axiom::Infinity => {
            "exists x. (exists e. e in x & (all w. !(w in e))) \
             & (all y. y in x -> (exists s. s in x & (all w. (w in s <-> w in y | w = y))))"
        }
    };
    parse(text).expect("axiom text parses")
}

pub fn check_axiom(g: &ExtensionalDigraph, axiom: Axiom) -> AxiomReport {
    let counterexamples = match axiom {
        Axiom::Extensionality => {
            let mut seen = std::collections::HashMap::new();
            let mut out = Vec::new();
            for (id, _, members) in g.iter() {
                if let Some(first) = seen.insert(members, id) {
                    out.push(vec![first, id]);
                }
            }
            out
        }
        Axiom::FoundationMinimal => g
            .iter()
            .filter(|(_, _, members)| {
                !members.is_empty()
                    && !members.iter().any(|y| {
                        let inner = g.members(*y).expect("members are nodes");
                        inner.iter().all(|w| members.binary_search(w).is_err())
                    })
            })
            .map(|(id, _, _)| vec![id])
            .collect(),
        Axiom::Infinity => Vec::new(),
    };
    let passed = match axiom {
        Axiom::Infinity => has_inductive_node(g),
        _ => counterexamples.is_empty(),
    };
    AxiomReport {
        axiom,
        passed,
        counterexamples,
    }
}

fn has_inductive_node(g: &ExtensionalDigraph) -> bool {
    let ext = g.extension_index();
    let successor = |y: NodeId| -> Option<NodeId> {
        let mut s = g.members(y).ok()?.to_vec();
        if let Err(pos) = s.binary_search(&y) {
            s.insert(pos, y);
        }
        ext.get(s.as_slice()).copied()
    };
    g.iter().any(|(_, _, members)| {
        members.iter().any(|e| g.members(*e).is_ok_and(|m| m.is_empty()))
            && members
                .iter()
                .all(|y| successor(*y).is_some_and(|s| members.binary_search(&s).is_ok()))
    })
}

/// `p` is coded by a self-membered pair: `exists b. b = {b, p} & b != p`.
pub fn quine_code_formula() -> Formula {
    parse("exists b. (all z. (z in b <-> (z = b | z = p)) & !(b = p))").expect("fixed text parses")
}

/// Bounded unfolding of the chain-code formula in the free variable `p`:
/// `exists b0. exists b1. (b0 = {b1, p} & exists b2. (b1 = {b2, p} & …))`
/// with `bound` links, each pair abstraction spelled out with `z`.
pub fn chain_code_formula(bound: u32) -> Result<Formula> {
    if bound == 0 {
        return Err(Error::InvalidArgument("chain formula bound must be at least 1".into()));
    }
    let b = |j: u32| format!("b{j}");
    let link = |j: u32| Formula::pair_abstraction(&b(j), &b(j + 1), "p", "z");
    let mut f = Formula::exists(b(bound), link(bound - 1));
    for j in (1..bound).rev() {
        f = Formula::exists(b(j), Formula::and(link(j - 1), f));
    }
    Ok(Formula::exists(b(0), f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::{complete, Budget};
    use crate::logic::{define_class, eval, Env};
    use crate::seeds::{quine_atoms, von_neumann_seed};

    #[test]
    fn quine_atom_fails_foundation() {
        let q = quine_atoms(&["a"]).unwrap();
        let r = check_axiom(&q, Axiom::FoundationMinimal);
        assert!(!r.passed);
        assert_eq!(r.counterexamples, vec![vec![NodeId(0)]]);
    }

    #[test]
    fn finite_graphs_fail_infinity() {
        let v4 = von_neumann_seed(4).unwrap();
        assert!(!check_axiom(&v4, Axiom::Infinity).passed);
        assert!(check_axiom(&v4, Axiom::FoundationMinimal).passed);
        assert!(check_axiom(&v4, Axiom::Extensionality).passed);
    }

    #[test]
    fn semantic_checks_match_formulas() {
        let graphs = [
            quine_atoms(&["a", "b"]).unwrap(),
            von_neumann_seed(3).unwrap(),
            complete(&quine_atoms(&["a"]).unwrap(), 2, &Budget::default()).unwrap().into_graph(),
            ExtensionalDigraph::from_parts(
                [(NodeId(0), crate::Provenance::seed("x")), (NodeId(1), crate::Provenance::seed("y"))],
                [],
            )
            .unwrap(),
        ];
        for g in &graphs {
            for a in Axiom::ALL {
                assert_eq!(
                    check_axiom(g, a).passed,
                    eval(g, &axiom_formula(a), &Env::new()).unwrap(),
                    "{a}"
                );
            }
        }
    }

    #[test]
    fn chain_formula_shape() {
        assert!(chain_code_formula(0).is_err());
        let f = chain_code_formula(2).unwrap();
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), ["p"]);
        assert_eq!(f.quantifier_depth(), 4);
        let v3 = von_neumann_seed(3).unwrap();
        // A single link only asks for some b0 = {b1, p}: {∅} and {∅, {∅}} qualify.
        let class = define_class(&v3, &chain_code_formula(1).unwrap()).unwrap();
        assert_eq!(class.into_iter().collect::<Vec<_>>(), [NodeId(0), NodeId(1)]);
        // Two links need b1 = {b2, p} as well: b0 = {∅,{∅}}, b1 = {∅}, b2 = p = ∅.
        let class = define_class(&v3, &chain_code_formula(2).unwrap()).unwrap();
        assert_eq!(class.into_iter().collect::<Vec<_>>(), [NodeId(0)]);
    }
}
