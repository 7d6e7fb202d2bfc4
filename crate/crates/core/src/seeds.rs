//! Seed graphs: von Neumann stages, Quine atoms, descending chains,
//! Kuratowski tuple codes and the loop or chain codes attached to them.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dred::{Dred, DepthMap, RankFamily};
use crate::error::{Error, Result};
use crate::graph::{CodeKind, ExtensionalDigraph, GraphBuilder, NodeId, Provenance};

/// `(V_k, ∈)` with node ids given by the Ackermann coding: node `c` has
/// as members the nodes whose bits are set in `c`.
pub fn von_neumann_seed(k: u32) -> Result<ExtensionalDigraph> {
    if k > 5 {
        return Err(Error::InvalidArgument(format!(
            "von Neumann stage {k} is too large; at most 5 is supported"
        )));
    }
    let mut size: u64 = 0;
    for _ in 0..k {
        size = 1u64 << size;
    }
    let mut labels: Vec<String> = Vec::with_capacity(size as usize);
    let mut b = GraphBuilder::new();
    for c in 0..size {
        let members: Vec<NodeId> = (0..64).filter(|bit| c >> bit & 1 == 1).map(NodeId).collect();
        let inner: Vec<&str> = members.iter().map(|m| labels[m.0 as usize].as_str()).collect();
        labels.push(format!("{{{}}}", inner.join(",")));
        b.push(Provenance::seed(labels[c as usize].clone()), members)?;
    }
    Ok(b.finish())
}

pub fn quine_atoms(labels: &[&str]) -> Result<ExtensionalDigraph> {
    let mut seen = HashSet::new();
    let mut b = GraphBuilder::new();
    for label in labels {
        if !seen.insert(*label) {
            return Err(Error::InvalidArgument(format!("duplicate atom label `{label}`")));
        }
        b.push_self_membered(Provenance::seed(*label), Vec::new())?;
    }
    Ok(b.finish())
}

/// Graph builder that keeps an extension lookup table in sync.
struct Forge {
    b: GraphBuilder,
    ext: HashMap<Vec<NodeId>, NodeId>,
}

impl Forge {
    fn new(g: ExtensionalDigraph) -> Self {
        let ext = g.iter().map(|(id, _, m)| (m.to_vec(), id)).collect();
        Self {
            b: GraphBuilder::from_graph(g),
            ext,
        }
    }

    fn lookup(&self, members: &[NodeId]) -> Option<NodeId> {
        let mut key = members.to_vec();
        key.sort_unstable();
        key.dedup();
        self.ext.get(&key).copied()
    }

    /// Reuses a node with this extension if one exists.
    fn intern(&mut self, provenance: Provenance, members: Vec<NodeId>) -> Result<(NodeId, bool)> {
        if let Some(id) = self.lookup(&members) {
            return Ok((id, false));
        }
        Ok((self.fresh(provenance, members)?, true))
    }

    /// Adds a node that must not share its extension with any existing one.
    fn fresh(&mut self, provenance: Provenance, members: Vec<NodeId>) -> Result<NodeId> {
        if let Some(existing) = self.lookup(&members) {
            return Err(Error::ExtensionalityClash {
                existing,
                detail: format!("{} has extension {:?}", provenance.short_label(), ids(&members)),
            });
        }
        let id = self.b.push(provenance, members)?;
        let m = self.b.graph().members(id)?.to_vec();
        self.ext.insert(m, id);
        Ok(id)
    }

    fn fresh_self_membered(&mut self, provenance: Provenance, members: Vec<NodeId>) -> Result<NodeId> {
        let id = self.b.push_self_membered(provenance, members)?;
        let m = self.b.graph().members(id)?.to_vec();
        self.ext.insert(m, id);
        Ok(id)
    }

    fn finish(self) -> ExtensionalDigraph {
        self.b.finish()
    }
}

fn ids(members: &[NodeId]) -> Vec<u32> {
    members.iter().map(|m| m.0).collect()
}

/// Adds `a_0 … a_{L-1}` with `a_j = {a_{j+1}}` and `a_{L-1} = {terminal}`.
/// Returns the new graph and the chain in order `a_0` first.
pub fn chain_atoms(
    g: &ExtensionalDigraph,
    label: &str,
    length: u32,
    terminal: NodeId,
) -> Result<(ExtensionalDigraph, Vec<NodeId>)> {
    if !g.contains(terminal) {
        return Err(Error::UnknownNode(terminal));
    }
    let mut f = Forge::new(g.clone());
    let chain = push_chain(&mut f, label, length, terminal)?;
    Ok((f.finish(), chain))
}

fn push_chain(f: &mut Forge, label: &str, length: u32, terminal: NodeId) -> Result<Vec<NodeId>> {
    if length == 0 {
        return Err(Error::InvalidSpec(format!("chain `{label}` has length 0")));
    }
    let mut below = terminal;
    let mut chain = Vec::with_capacity(length as usize);
    for j in (0..length).rev() {
        below = f.fresh(Provenance::code(CodeKind::Atom, format!("{label}/{j}")), vec![below])?;
        chain.push(below);
    }
    chain.reverse();
    Ok(chain)
}

/// Right-nested Kuratowski code of `components`, reusing existing nodes.
/// A single component encodes as itself.
pub fn encode_tuple(g: &ExtensionalDigraph, components: &[NodeId]) -> Result<(ExtensionalDigraph, NodeId)> {
    let mut f = Forge::new(g.clone());
    let top = push_tuple(&mut f, components)?;
    Ok((f.finish(), top))
}

fn push_tuple(f: &mut Forge, components: &[NodeId]) -> Result<NodeId> {
    let (last, init) = components
        .split_last()
        .ok_or_else(|| Error::InvalidArgument("cannot encode an empty tuple".into()))?;
    for c in components {
        if !f.b.graph().contains(*c) {
            return Err(Error::UnknownNode(*c));
        }
    }
    let mut acc = *last;
    for x in init.iter().rev() {
        acc = push_pair(f, *x, acc)?;
    }
    Ok(acc)
}

fn push_pair(f: &mut Forge, x: NodeId, y: NodeId) -> Result<NodeId> {
    let tuple = |d: String| Provenance::code(CodeKind::Tuple, d);
    let (sx, _) = f.intern(tuple(format!("{{{x}}}")), vec![x])?;
    let (sxy, _) = f.intern(tuple(format!("{{{x},{y}}}")), vec![x, y])?;
    let (p, _) = f.intern(tuple(format!("({x},{y})")), vec![sx, sxy])?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Quine,
    Chain(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub label: String,
    pub kind: AtomKind,
}

/// A tuple component: an atom label or a von Neumann numeral.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Component {
    Numeral(u32),
    Atom(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub tag: u32,
    #[serde(default)]
    pub components: Vec<Component>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeStyle {
    #[default]
    Loop,
    Chain(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub naturals_up_to: u32,
    #[serde(default)]
    pub tuples: Vec<TupleSpec>,
    #[serde(default)]
    pub code_style: CodeStyle,
}

impl CodeSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        let mut labels = HashSet::new();
        for a in &self.atoms {
            if !labels.insert(a.label.as_str()) {
                return bad(format!("duplicate atom label `{}`", a.label));
            }
            match a.kind {
                AtomKind::Chain(0) => return bad(format!("chain atom `{}` has length 0", a.label)),
                AtomKind::Quine if matches!(self.code_style, CodeStyle::Chain(_)) => {
                    return bad(format!("quine atom `{}` cannot appear in a chain-style spec", a.label))
                }
                _ => {}
            }
        }
        if self.code_style == CodeStyle::Chain(0) {
            return bad("chain code length 0".into());
        }
        let mut seen = HashSet::new();
        for t in &self.tuples {
            if t.tag >= self.naturals_up_to {
                return bad(format!("tag {} is not below naturals_up_to {}", t.tag, self.naturals_up_to));
            }
            for c in &t.components {
                match c {
                    Component::Numeral(n) if *n >= self.naturals_up_to => {
                        return bad(format!("numeral component {n} is not below naturals_up_to"))
                    }
                    Component::Atom(l) if !labels.contains(l.as_str()) => {
                        return bad(format!("component `{l}` is not a declared atom"))
                    }
                    _ => {}
                }
            }
            if !seen.insert(t) {
                return bad(format!("duplicate tuple {t:?}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeEntry {
    pub tuple: TupleSpec,
    /// The encoded tuple `p`.
    pub node: NodeId,
    /// `[b_p]` for loop style, `[b_0, …, b_{L-1}]` for chain style.
    pub codes: Vec<NodeId>,
    /// Chain style only: singleton ramp `{p}, {{p}}, …` feeding the bottom code.
    pub ramp: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeIndex {
    pub entries: Vec<CodeEntry>,
}

impl CodeIndex {
    pub fn tuple_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.entries.iter().map(|e| e.node).collect();
        v.sort_unstable();
        v
    }

    pub fn code_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.entries.iter().flat_map(|e| e.codes.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

fn find_numeral(g: &ExtensionalDigraph, ext: &HashMap<&[NodeId], NodeId>, n: u32) -> Result<NodeId> {
    let mut members: Vec<NodeId> = Vec::new();
    for _ in 0..n {
        let next = *ext
            .get(members.as_slice())
            .ok_or_else(|| Error::InvalidSpec(format!("numeral {} is not in the graph", members.len())))?;
        members.push(next);
        members.sort_unstable();
    }
    ext.get(members.as_slice())
        .copied()
        .filter(|id| g.contains(*id))
        .ok_or_else(|| Error::InvalidSpec(format!("numeral {n} is not in the graph")))
}

fn find_atom(g: &ExtensionalDigraph, label: &str) -> Result<NodeId> {
    let chain_head = format!("{label}/0");
    g.iter()
        .find(|(id, prov, _)| match prov {
            Provenance::Seed { label: l } => l == label && g.has_self_loop(*id),
            Provenance::Code {
                code: CodeKind::Atom,
                detail,
            } => *detail == chain_head,
            _ => false,
        })
        .map(|(id, _, _)| id)
        .ok_or_else(|| Error::InvalidSpec(format!("atom `{label}` is not in the graph")))
}

/// Encodes every spec tuple as `p = (tag, c_1, …)` and attaches its code:
/// `b_p = {p, b_p}` in loop style, or `b_j = {p, b_{j+1}}` ending in a
/// bottom `{p, t_p}` in chain style, where `t_p` is the `(L-2)`-fold
/// singleton of `p` (so the bottom is `{p}` when `L ≤ 2`).
pub fn attach_codes(g: &ExtensionalDigraph, spec: &CodeSpec) -> Result<(ExtensionalDigraph, CodeIndex)> {
    spec.validate()?;
    let resolved: Vec<Vec<NodeId>> = {
        let ext = g.extension_index();
        let mut out = Vec::with_capacity(spec.tuples.len());
        for t in &spec.tuples {
            let mut comps = vec![find_numeral(g, &ext, t.tag)?];
            for c in &t.components {
                comps.push(match c {
                    Component::Numeral(n) => find_numeral(g, &ext, *n)?,
                    Component::Atom(l) => find_atom(g, l)?,
                });
            }
            out.push(comps);
        }
        out
    };
    let mut f = Forge::new(g.clone());
    let mut index = CodeIndex::default();
    for (t, comps) in spec.tuples.iter().zip(resolved) {
        let p = push_tuple(&mut f, &comps)?;
        let mut ramp = Vec::new();
        let codes = match spec.code_style {
            CodeStyle::Loop => vec![f.fresh_self_membered(Provenance::code(CodeKind::Loop, format!("b[{p}]")), vec![p])?],
            CodeStyle::Chain(len) => {
                let mut below = p;
                for k in 1..len.max(2) - 1 {
                    below = f.fresh(Provenance::code(CodeKind::Chain, format!("t{k}[{p}]")), vec![below])?;
                    ramp.push(below);
                }
                let mut codes = Vec::with_capacity(len as usize);
                for j in (0..len).rev() {
                    below = f.fresh(Provenance::code(CodeKind::Chain, format!("b{j}[{p}]")), vec![p, below])?;
                    codes.push(below);
                }
                codes.reverse();
                codes
            }
        };
        index.entries.push(CodeEntry {
            tuple: t.clone(),
            node: p,
            codes,
            ramp,
        });
    }
    Ok((f.finish(), index))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomEntry {
    pub label: String,
    /// `[a]` for a Quine atom, `[a_0, …, a_{L-1}]` for a chain.
    pub nodes: Vec<NodeId>,
    /// Chain atoms only: the numeral grounding the chain followed by its
    /// singleton ramp; the last entry is the chain's terminal.
    pub support: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedIndex {
    pub numerals: Vec<NodeId>,
    pub atoms: Vec<AtomEntry>,
    pub codes: CodeIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembled {
    pub graph: ExtensionalDigraph,
    /// Present for chain-style specs.
    pub dred: Option<Dred>,
    pub index: SeedIndex,
}

/// Numerals, atoms, tuple codes and loop or chain codes in one graph.
///
/// Chain atom `i` hangs off the numeral `max(naturals_up_to, 1) + i`
/// through a ramp of singletons, so each terminal is distinct; numerals are
/// materialized up to the largest such ground.
pub fn assemble(spec: &CodeSpec) -> Result<Assembled> {
    spec.validate()?;
    let chain_count = spec.atoms.iter().filter(|a| matches!(a.kind, AtomKind::Chain(_))).count() as u32;
    let first_ground = spec.naturals_up_to.max(1);
    let numeral_count = if chain_count > 0 {
        first_ground + chain_count
    } else {
        spec.naturals_up_to
    };
    let mut f = Forge::new(ExtensionalDigraph::empty());
    let mut numerals = Vec::with_capacity(numeral_count as usize);
    for n in 0..numeral_count {
        numerals.push(f.fresh(Provenance::seed(n.to_string()), numerals.clone())?);
    }
    let mut atoms = Vec::new();
    let mut next_ground = first_ground;
    for a in &spec.atoms {
        let entry = match a.kind {
            AtomKind::Quine => AtomEntry {
                label: a.label.clone(),
                nodes: vec![f.fresh_self_membered(Provenance::seed(a.label.clone()), Vec::new())?],
                support: Vec::new(),
            },
            AtomKind::Chain(len) => {
                let mut support = vec![numerals[next_ground as usize]];
                next_ground += 1;
                for k in 1..len {
                    let below = *support.last().unwrap();
                    let r = f.fresh(Provenance::code(CodeKind::Atom, format!("{}/ramp{k}", a.label)), vec![below])?;
                    support.push(r);
                }
                let nodes = push_chain(&mut f, &a.label, len, *support.last().unwrap())?;
                AtomEntry {
                    label: a.label.clone(),
                    nodes,
                    support,
                }
            }
        };
        atoms.push(entry);
    }
    let (graph, codes) = attach_codes(&f.finish(), spec)?;
    let index = SeedIndex { numerals, atoms, codes };
    let dred = match spec.code_style {
        CodeStyle::Chain(_) => Some(chain_dred(&graph, &index)),
        CodeStyle::Loop => None,
    };
    Ok(Assembled { graph, dred, index })
}

/// Depth and ranks for a chain-style assembly. Chain positions and ramps
/// get their depth explicitly; every other node takes the largest member
/// depth. Ranks follow the members except along chains, where `r_i` drops
/// by one per step down to just above the chain's support.
fn chain_dred(g: &ExtensionalDigraph, index: &SeedIndex) -> Dred {
    #[derive(Clone, Copy)]
    enum Rule {
        /// Explicit depth; ranks from the recipe.
        Ramp(u32),
        /// Explicit depth; `r_i = r_i(anchor) + offset + i - position`,
        /// where the anchor sits at the foot of the support ramp.
        Chain {
            depth: u32,
            anchor: NodeId,
            offset: u32,
            position: u32,
        },
    }
    let mut rules: HashMap<NodeId, Rule> = HashMap::new();
    for a in &index.atoms {
        for (k, r) in a.support.iter().enumerate().skip(1) {
            rules.insert(*r, Rule::Ramp(k as u32));
        }
        if let Some(anchor) = a.support.first() {
            for (j, x) in a.nodes.iter().enumerate() {
                rules.insert(
                    *x,
                    Rule::Chain {
                        depth: j as u32 + 1,
                        anchor: *anchor,
                        offset: a.support.len() as u32 - 1,
                        position: j as u32,
                    },
                );
            }
        }
    }
    let mut depth: DepthMap = BTreeMap::new();
    // Nodes were pushed after their members, so id order is a topological order.
    let mut pending: Vec<(NodeId, NodeId, u32, u32)> = Vec::new();
    for (id, _, members) in g.iter() {
        let recipe = members.iter().map(|m| depth[m]).max().unwrap_or(0);
        let d = match rules.get(&id) {
            Some(Rule::Ramp(k)) | Some(Rule::Chain { depth: k, .. }) => *k,
            None => {
                if let Some(e) = index.codes.entries.iter().find(|e| e.codes.contains(&id) || e.ramp.contains(&id)) {
                    let dp = depth[&e.node];
                    if let Some(k) = e.ramp.iter().position(|r| *r == id) {
                        rules.insert(id, Rule::Ramp(dp + k as u32 + 1));
                        dp + k as u32 + 1
                    } else {
                        let j = e.codes.iter().position(|c| *c == id).unwrap() as u32;
                        pending.push((id, e.node, e.ramp.len() as u32, j));
                        dp + j
                    }
                } else {
                    recipe
                }
            }
        };
        depth.insert(id, d);
    }
    for (id, anchor, offset, position) in pending {
        rules.insert(
            id,
            Rule::Chain {
                depth: depth[&id],
                anchor,
                offset,
                position,
            },
        );
    }
    let top = depth.values().max().copied().unwrap_or(0);
    let mut ranks: RankFamily = BTreeMap::new();
    for i in 1..=top + 1 {
        let mut r: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (id, _, members) in g.iter() {
            if depth[&id] >= i {
                continue;
            }
            let v = match rules.get(&id) {
                Some(Rule::Chain {
                    anchor,
                    offset,
                    position,
                    ..
                }) => r[anchor] + u64::from(offset + i - position),
                _ => members.iter().map(|m| r[m] + 1).max().unwrap_or(0),
            };
            r.insert(id, v);
        }
        ranks.insert(i, r);
    }
    Dred::from_parts(g.clone(), depth, ranks)
}
