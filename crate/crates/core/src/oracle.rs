//! Brute-force ground truth over interned hereditarily finite values.
//!
//! Nothing here shares code with the completion engine: values are
//! represented by what they contain rather than by graph nodes, and missing
//! subsets are found by bitmask enumeration.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::completion::Budget;
use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId, Provenance};
use crate::iso::is_isomorphic;

/// Handle to an interned [`SetValue`]; equal values share one handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetValue {
    /// Self-membered urelement whose members are itself plus `extra`.
    /// A Quine atom has no `extra`; a loop code `b = {p, b}` carries `[p]`.
    Atom { label: String, extra: Vec<SetId> },
    /// Sorted, duplicate-free members.
    Collection(Vec<SetId>),
}

#[derive(Debug, Clone, Default)]
pub struct Interner {
    values: Vec<SetValue>,
    ids: HashMap<SetValue, SetId>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, mut v: SetValue) -> SetId {
        match &mut v {
            SetValue::Atom { extra, .. } | SetValue::Collection(extra) => {
                extra.sort_unstable();
                extra.dedup();
            }
        }
        if let Some(id) = self.ids.get(&v) {
            return *id;
        }
        let id = SetId(self.values.len() as u32);
        self.values.push(v.clone());
        self.ids.insert(v, id);
        id
    }

    pub fn get(&self, id: SetId) -> &SetValue {
        &self.values[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted members of the value, atoms included in themselves.
    pub fn elements(&self, id: SetId) -> Vec<SetId> {
        match self.get(id) {
            SetValue::Collection(m) => m.clone(),
            SetValue::Atom { extra, .. } => {
                let mut m = extra.clone();
                m.push(id);
                m.sort_unstable();
                m
            }
        }
    }
}

/// A universe of values grown round by round.
#[derive(Debug, Clone)]
pub struct OracleUniverse {
    pub interner: Interner,
    /// Values present, with the round that added them (0 for the start).
    pub present: Vec<(SetId, u32)>,
}

impl OracleUniverse {
    fn new(interner: Interner, start: Vec<SetId>) -> Self {
        Self {
            interner,
            present: start.into_iter().map(|v| (v, 0)).collect(),
        }
    }

    /// Adds `Collection(X)` for every subset `X` of the present values whose
    /// elements no present value has.
    fn round(&mut self, round: u32, budget: &Budget) -> Result<()> {
        let k = self.present.len();
        if k >= 63 || (1u64 << k) > budget.max_subsets_enumerated {
            return Err(Error::BudgetExceeded {
                what: "oracle subset enumeration",
                needed: format!("2^{k}"),
                limit: budget.max_subsets_enumerated,
            });
        }
        let seen: HashSet<Vec<SetId>> = self.present.iter().map(|(v, _)| self.interner.elements(*v)).collect();
        let mut missing = Vec::new();
        for mask in 0u64..(1u64 << k) {
            let mut x: Vec<SetId> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| self.present[i].0).collect();
            x.sort_unstable();
            if !seen.contains(&x) {
                missing.push(x);
            }
        }
        let total = (k + missing.len()) as u64;
        if total > budget.max_nodes {
            return Err(Error::BudgetExceeded {
                what: "oracle value count",
                needed: total.to_string(),
                limit: budget.max_nodes,
            });
        }
        for x in missing {
            let id = self.interner.intern(SetValue::Collection(x));
            self.present.push((id, round));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<SetId> {
        self.present.iter().map(|(v, _)| *v).collect()
    }

    /// The membership digraph of the present values. Start values keep the
    /// ids given in `start`; later values are numbered after them.
    fn to_graph(&self, start: &BTreeMap<SetId, (NodeId, Provenance)>) -> Result<ExtensionalDigraph> {
        let mut next = start.values().map(|(id, _)| id.0 + 1).max().unwrap_or(0);
        let mut node_of: HashMap<SetId, NodeId> = HashMap::new();
        let mut nodes = Vec::new();
        for (v, round) in &self.present {
            let (id, prov) = match start.get(v) {
                Some((id, prov)) => (*id, prov.clone()),
                None => {
                    let id = NodeId(next);
                    next += 1;
                    let prov = if *round == 0 {
                        Provenance::seed(render(&self.interner, *v))
                    } else {
                        Provenance::Deficiency {
                            level: *round,
                            members: Vec::new(),
                        }
                    };
                    (id, prov)
                }
            };
            node_of.insert(*v, id);
            nodes.push((id, prov));
        }
        let mut edges = Vec::new();
        for ((v, _), (_, prov)) in self.present.iter().zip(nodes.iter_mut()) {
            let mut ms: Vec<NodeId> = self.interner.elements(*v).iter().map(|m| node_of[m]).collect();
            ms.sort_unstable();
            edges.extend(ms.iter().map(|m| (*m, node_of[v])));
            if let Provenance::Deficiency { members, .. } = prov {
                *members = ms;
            }
        }
        ExtensionalDigraph::from_parts(nodes, edges)
    }
}

/// Canonical brace notation; atoms print as their label.
pub fn render(interner: &Interner, v: SetId) -> String {
    match interner.get(v) {
        SetValue::Atom { label, extra } if extra.is_empty() => label.clone(),
        SetValue::Atom { label, extra } => {
            let inner: Vec<String> = extra.iter().map(|e| render(interner, *e)).collect();
            format!("{label}[{}]", inner.join(","))
        }
        SetValue::Collection(m) => {
            let inner: Vec<String> = m.iter().map(|e| render(interner, *e)).collect();
            format!("{{{}}}", inner.join(","))
        }
    }
}

/// All values of rank at most `k` over the given Quine atoms: `k` rounds
/// of adding every missing subset, starting from the atoms.
pub fn hf_universe(k: u32, atoms: &[&str]) -> Result<OracleUniverse> {
    let limit = if atoms.is_empty() { 4 } else { 3 };
    if k > limit {
        return Err(Error::InvalidArgument(format!("hf_universe rank {k} exceeds {limit}")));
    }
    let mut interner = Interner::new();
    let start = atoms
        .iter()
        .map(|a| {
            interner.intern(SetValue::Atom {
                label: a.to_string(),
                extra: Vec::new(),
            })
        })
        .collect();
    let mut u = OracleUniverse::new(interner, start);
    for round in 1..=k {
        u.round(round, &Budget::default())?;
    }
    Ok(u)
}

pub fn hf_graph(k: u32, atoms: &[&str]) -> Result<ExtensionalDigraph> {
    hf_universe(k, atoms)?.to_graph(&BTreeMap::new())
}

/// Decorates every node of `g` with a value: self-looped nodes become atoms
/// carrying their other members, all other nodes become collections.
/// Cycles other than self-loops are rejected.
pub fn decorate(g: &ExtensionalDigraph, interner: &mut Interner) -> Result<BTreeMap<NodeId, SetId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Open,
        Done(SetId),
    }
    let mut state: HashMap<NodeId, State> = HashMap::new();
    for (root, _, _) in g.iter() {
        let mut stack = vec![(root, false)];
        while let Some((x, expanded)) = stack.pop() {
            match (state.get(&x).copied(), expanded) {
                (Some(State::Done(_)), _) => continue,
                (Some(State::Open), false) => {
                    return Err(Error::Decoration(format!("node {x} lies on a cycle longer than a self-loop")))
                }
                (None, false) => {
                    state.insert(x, State::Open);
                    stack.push((x, true));
                    for m in g.members(x)? {
                        if *m == x {
                            continue;
                        }
                        match state.get(m) {
                            Some(State::Open) => {
                                return Err(Error::Decoration(format!(
                                    "nodes {m} and {x} lie on a cycle longer than a self-loop"
                                )))
                            }
                            Some(State::Done(_)) => {}
                            None => stack.push((*m, false)),
                        }
                    }
                }
                (_, true) => {
                    let members = g.members(x)?;
                    let mut others = Vec::new();
                    for m in members.iter().filter(|m| **m != x) {
                        match state.get(m) {
                            Some(State::Done(v)) => others.push(*v),
                            _ => {
                                return Err(Error::Decoration(format!(
                                    "nodes {m} and {x} lie on a cycle longer than a self-loop"
                                )))
                            }
                        }
                    }
                    let value = if members.contains(&x) {
                        SetValue::Atom {
                            label: format!("{}#{x}", g.provenance(x)?.short_label()),
                            extra: others,
                        }
                    } else {
                        SetValue::Collection(others)
                    };
                    state.insert(x, State::Done(interner.intern(value)));
                }
            }
        }
    }
    Ok(state
        .into_iter()
        .map(|(k, s)| match s {
            State::Done(v) => (k, v),
            State::Open => unreachable!("every node finishes"),
        })
        .collect())
}

/// `n` rounds of missing-subset closure over the decoration of `g`.
pub fn oracle_complete(g: &ExtensionalDigraph, n: usize, budget: &Budget) -> Result<ExtensionalDigraph> {
    if let Some((a, b)) = g.extensionality_clash() {
        return Err(Error::NonExtensional(a, b));
    }
    let mut interner = Interner::new();
    let deco = decorate(g, &mut interner)?;
    let start: BTreeMap<SetId, (NodeId, Provenance)> = deco
        .iter()
        .map(|(id, v)| Ok((*v, (*id, g.provenance(*id)?.clone()))))
        .collect::<Result<_>>()?;
    let mut u = OracleUniverse::new(interner, deco.values().copied().collect());
    for round in 1..=n {
        u.round(round as u32, budget)?;
    }
    u.to_graph(&start)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Isomorphic,
    NotIsomorphic {
        invariant: &'static str,
        left: String,
        right: String,
    },
}

impl Verdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, Verdict::Isomorphic)
    }
}

fn level_histogram(g: &ExtensionalDigraph) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for (_, p, _) in g.iter() {
        *h.entry(p.level()).or_insert(0) += 1;
    }
    h
}

fn degree_multiset(g: &ExtensionalDigraph) -> Vec<(usize, usize)> {
    let mut out_deg: HashMap<NodeId, usize> = HashMap::new();
    for (m, _) in g.edges() {
        *out_deg.entry(m).or_insert(0) += 1;
    }
    let mut v: Vec<(usize, usize)> = g
        .iter()
        .map(|(id, _, members)| (members.len(), out_deg.get(&id).copied().unwrap_or(0)))
        .collect();
    v.sort_unstable();
    v
}

/// Cheap invariants first, then a full isomorphism test.
pub fn compare(a: &ExtensionalDigraph, b: &ExtensionalDigraph) -> Result<Verdict> {
    let differ = |invariant, l: String, r: String| {
        Ok(Verdict::NotIsomorphic {
            invariant,
            left: l,
            right: r,
        })
    };
    if a.len() != b.len() {
        return differ("node count", a.len().to_string(), b.len().to_string());
    }
    let (ha, hb) = (level_histogram(a), level_histogram(b));
    if ha != hb {
        return differ("nodes per level", format!("{ha:?}"), format!("{hb:?}"));
    }
    let loops = |g: &ExtensionalDigraph| g.node_ids().iter().filter(|x| g.has_self_loop(**x)).count();
    if loops(a) != loops(b) {
        return differ("self-loop count", loops(a).to_string(), loops(b).to_string());
    }
    let (da, db) = (degree_multiset(a), degree_multiset(b));
    if da != db {
        return differ("degree multiset", format!("{da:?}"), format!("{db:?}"));
    }
    if is_isomorphic(a, b)? {
        Ok(Verdict::Isomorphic)
    } else {
        differ("canonical form", "differs".into(), "differs".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::quine_atoms;

    #[test]
    fn hf_universe_sizes() {
        assert_eq!(hf_universe(2, &[]).unwrap().present.len(), 2);
        assert_eq!(hf_universe(4, &[]).unwrap().present.len(), 16);
        let u = hf_universe(1, &["a"]).unwrap();
        let names: Vec<String> = u.values().iter().map(|v| render(&u.interner, *v)).collect();
        assert_eq!(names, ["a", "{}"]);
        assert!(hf_universe(5, &[]).is_err());
        assert!(hf_universe(4, &["a"]).is_err());
    }

    #[test]
    fn interning_identifies_equal_values() {
        let mut i = Interner::new();
        let e = i.intern(SetValue::Collection(vec![]));
        let a = i.intern(SetValue::Collection(vec![e, e]));
        let b = i.intern(SetValue::Collection(vec![e]));
        assert_eq!(a, b);
        assert_eq!(i.len(), 2);
    }

    #[test]
    fn decoration_rejects_two_cycles() {
        let g = ExtensionalDigraph::from_parts(
            [(NodeId(0), Provenance::seed("x")), (NodeId(1), Provenance::seed("y"))],
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))],
        )
        .unwrap();
        assert!(matches!(decorate(&g, &mut Interner::new()), Err(Error::Decoration(_))));
    }

    #[test]
    fn compare_examples() {
        let v2 = hf_graph(2, &[]).unwrap();
        let v3 = hf_graph(3, &[]).unwrap();
        assert!(compare(&v2, &v2).unwrap().is_isomorphic());
        assert_eq!(
            compare(&v2, &v3).unwrap(),
            Verdict::NotIsomorphic {
                invariant: "node count",
                left: "2".into(),
                right: "4".into()
            }
        );
    }

    #[test]
    fn quine_completion_has_expected_sizes() {
        let q = quine_atoms(&["a"]).unwrap();
        let g = oracle_complete(&q, 2, &Budget::default()).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.is_extensional());
    }
}
