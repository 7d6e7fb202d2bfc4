//! The deficiency operator and the iterated completion `V_0 ⊆ V_1 ⊆ …`.
//!
//! Each step adds one node for every subset of the current node set that no
//! existing node represents. Subsets are enumerated in lexicographic order of
//! their sorted member lists and new nodes receive consecutive ids in that
//! order, so a completion is reproducible bit for bit.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, GraphBuilder, NodeId, Provenance};

/// Guards against the tower-of-exponentials growth of completion levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_subsets_enumerated: u64,
}

impl Budget {
    pub const DEFAULT_MAX_SUBSETS: u64 = 1 << 20;
    pub const DEFAULT_MAX_NODES: u64 = 1 << 20;

    pub fn new(max_nodes: u64, max_subsets_enumerated: u64) -> Result<Self> {
        if max_nodes == 0 || max_subsets_enumerated == 0 {
            return Err(Error::InvalidArgument("budget limits must be positive".into()));
        }
        Ok(Self {
            max_nodes,
            max_subsets_enumerated,
        })
    }

    pub fn with_max_subsets(max_subsets_enumerated: u64) -> Result<Self> {
        Self::new(Self::DEFAULT_MAX_NODES, max_subsets_enumerated)
    }

    /// Fails unless all `2^node_count` subsets may be enumerated.
    pub(crate) fn admit_subsets(&self, node_count: usize) -> Result<u64> {
        let needed = if node_count >= 64 { None } else { Some(1u64 << node_count) };
        match needed {
            Some(n) if n <= self.max_subsets_enumerated => Ok(n),
            _ => Err(Error::BudgetExceeded {
                what: "subset enumeration",
                needed: format!("2^{node_count}"),
                limit: self.max_subsets_enumerated,
            }),
        }
    }

    pub(crate) fn admit_nodes(&self, total: u64) -> Result<()> {
        if total > self.max_nodes {
            return Err(Error::BudgetExceeded {
                what: "node count",
                needed: total.to_string(),
                limit: self.max_nodes,
            });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_nodes: Self::DEFAULT_MAX_NODES,
            max_subsets_enumerated: Self::DEFAULT_MAX_SUBSETS,
        }
    }
}

/// Calls `visit` on every subset of `items` in lexicographic order of the
/// (sorted) member lists: `[]`, `[a]`, `[a, b]`, `[a, b, c]`, `[a, c]`, …
pub(crate) fn for_each_subset_lex(items: &[NodeId], mut visit: impl FnMut(&[NodeId])) {
    fn go(items: &[NodeId], start: usize, cur: &mut Vec<NodeId>, visit: &mut impl FnMut(&[NodeId])) {
        visit(cur);
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, i + 1, cur, visit);
            cur.pop();
        }
    }
    go(items, 0, &mut Vec::with_capacity(items.len()), &mut visit);
}

/// Every subset of the node set that no node represents, in lexicographic
/// order of sorted member lists.
pub fn deficiency(g: &ExtensionalDigraph, budget: &Budget) -> Result<Vec<Vec<NodeId>>> {
    g.require_extensional()?;
    budget.admit_subsets(g.len())?;
    let represented = g.extension_index();
    let mut out = Vec::new();
    for_each_subset_lex(g.node_ids(), |s| {
        if !represented.contains_key(s) {
            out.push(s.to_vec());
        }
    });
    Ok(out)
}

/// Number of nodes one completion step adds to an extensional graph with
/// `node_count` nodes: every node represents exactly one subset.
fn step_growth(node_count: usize) -> u64 {
    (1u64 << node_count) - node_count as u64
}

/// An extensional digraph stratified into completion levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledUniverse {
    graph: ExtensionalDigraph,
    /// `levels[n]` is the sorted node set `M_n`; the last level is the whole graph.
    levels: Vec<Vec<NodeId>>,
    seed_level_count: usize,
}

impl LeveledUniverse {
    /// A universe with a single level holding the seed.
    pub fn from_seed(g: ExtensionalDigraph) -> Result<Self> {
        g.require_extensional()?;
        let levels = vec![g.node_ids().to_vec()];
        Ok(Self {
            graph: g,
            levels,
            seed_level_count: 1,
        })
    }

    /// Reassembles a universe from its parts, checking the level invariants.
    pub fn from_parts(graph: ExtensionalDigraph, levels: Vec<Vec<NodeId>>, seed_level_count: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::Schema {
            path: "levels".into(),
            message: msg,
        });
        if levels.is_empty() {
            return bad("at least one level is required".into());
        }
        if seed_level_count == 0 || seed_level_count > levels.len() {
            return bad(format!("seed level count {seed_level_count} out of range"));
        }
        for (n, level) in levels.iter().enumerate() {
            if level.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("level {n} is not sorted and duplicate-free"));
            }
            if let Some(id) = level.iter().find(|id| !graph.contains(**id)) {
                return bad(format!("level {n} names unknown node {id}"));
            }
        }
        for n in 1..levels.len() {
            let prev = &levels[n - 1];
            if prev.iter().any(|id| levels[n].binary_search(id).is_err()) {
                return bad(format!("level {} is not contained in level {n}", n - 1));
            }
            for id in levels[n].iter().filter(|id| prev.binary_search(id).is_err()) {
                match graph.provenance(*id)? {
                    Provenance::Deficiency { level, members } if *level as usize == n => {
                        if members.as_slice() != graph.members(*id)? {
                            return bad(format!("node {id} provenance members differ from its extension"));
                        }
                    }
                    _ if n < seed_level_count => {}
                    _ => return bad(format!("node {id} in level {n} lacks deficiency provenance for that level")),
                }
            }
        }
        if levels.last().unwrap().as_slice() != graph.node_ids() {
            return bad("last level must contain every node".into());
        }
        let u = Self {
            graph,
            levels,
            seed_level_count,
        };
        for m in 0..u.levels.len() - 1 {
            if !crate::graph::is_end_extension(&u.level_graph(m), &u.level_graph(m + 1)) {
                return bad(format!("level {m} is not an end-extension predecessor of level {}", m + 1));
            }
        }
        Ok(u)
    }

    pub fn graph(&self) -> &ExtensionalDigraph {
        &self.graph
    }

    pub fn into_graph(self) -> ExtensionalDigraph {
        self.graph
    }

    pub fn levels(&self) -> &[Vec<NodeId>] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &[NodeId] {
        &self.levels[n]
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn seed_level_count(&self) -> usize {
        self.seed_level_count
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// The graph restricted to `M_n`.
    pub fn level_graph(&self, n: usize) -> ExtensionalDigraph {
        if n + 1 == self.levels.len() {
            return self.graph.clone();
        }
        self.graph.restrict(&self.levels[n])
    }

    /// First level containing each node.
    pub fn level_index(&self) -> HashMap<NodeId, usize> {
        let mut out = HashMap::with_capacity(self.graph.len());
        for (n, level) in self.levels.iter().enumerate() {
            for id in level {
                out.entry(*id).or_insert(n);
            }
        }
        out
    }

    /// Appends one level holding a new node per set in `sets`, in order.
    pub(crate) fn extend_with(&self, sets: Vec<Vec<NodeId>>) -> Result<Self> {
        let level = self.levels.len() as u32;
        let mut b = GraphBuilder::from_graph(self.graph.clone());
        for members in sets {
            b.push(
                Provenance::Deficiency {
                    level,
                    members: members.clone(),
                },
                members,
            )?;
        }
        let graph = b.finish();
        let mut levels = self.levels.clone();
        levels.push(graph.node_ids().to_vec());
        Ok(Self {
            graph,
            levels,
            seed_level_count: self.seed_level_count,
        })
    }
}

/// Appends the next level `M_{n+1} = M_n ∪ D(V_n)`.
pub fn complete_step(u: &LeveledUniverse, budget: &Budget) -> Result<LeveledUniverse> {
    let g = u.graph();
    budget.admit_subsets(g.len())?;
    budget.admit_nodes(g.len() as u64 + step_growth(g.len()))?;
    let sets = deficiency(g, budget)?;
    u.extend_with(sets)
}

/// `n` completion steps starting from `M_0 = g`.
pub fn complete(g: &ExtensionalDigraph, n: usize, budget: &Budget) -> Result<LeveledUniverse> {
    let mut u = LeveledUniverse::from_seed(g.clone())?;
    for _ in 0..n {
        u = complete_step(&u, budget)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    Pairing,
    Union,
    Subsets,
    PowerSet,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Pairing => "pairing",
            Clause::Union => "union",
            Clause::Subsets => "subsets",
            Clause::PowerSet => "power_set",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseStatus {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseResult {
    pub clause: Clause,
    /// The level `n` whose nodes were checked.
    pub level: usize,
    pub status: ClauseStatus,
    pub checked: u64,
    pub failures: u64,
    /// The first few missing sets, as sorted member lists.
    pub counterexamples: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WitnessReport {
    pub results: Vec<ClauseResult>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.status != ClauseStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClauseResult> {
        self.results.iter().filter(|r| r.status == ClauseStatus::Fail)
    }

    pub fn clause(&self, clause: Clause, level: usize) -> Option<&ClauseResult> {
        self.results.iter().find(|r| r.clause == clause && r.level == level)
    }
}

const MAX_COUNTEREXAMPLES: usize = 16;
/// Extensions larger than this are not expanded into their subsets.
const MAX_WITNESS_EXTENSION: usize = 20;

struct Tally {
    clause: Clause,
    level: usize,
    checked: u64,
    failures: u64,
    counterexamples: Vec<Vec<NodeId>>,
    skipped: Option<String>,
}

impl Tally {
    fn new(clause: Clause, level: usize) -> Self {
        Self {
            clause,
            level,
            checked: 0,
            failures: 0,
            counterexamples: Vec::new(),
            skipped: None,
        }
    }

    fn record(&mut self, ok: bool, set: impl FnOnce() -> Vec<NodeId>) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(set());
            }
        }
    }

    fn finish(self) -> ClauseResult {
        let status = match (self.skipped, self.failures) {
            (_, f) if f > 0 => ClauseStatus::Fail,
            (Some(reason), _) => ClauseStatus::Skipped(reason),
            (None, _) => ClauseStatus::Pass,
        };
        ClauseResult {
            clause: self.clause,
            level: self.level,
            status,
            checked: self.checked,
            failures: self.failures,
            counterexamples: self.counterexamples,
        }
    }
}

/// Checks, level by level, the finite closure facts behind "the completion
/// has a true power set operator": pairs, unions and subsets of level-`n`
/// sets appear by level `n+1`, power sets by level `n+2`.
pub fn witness_report(u: &LeveledUniverse) -> WitnessReport {
    let g = u.graph();
    let by_extension = g.extension_index();
    let level_of = u.level_index();
    let present = |set: &[NodeId], within: usize| -> Option<NodeId> {
        by_extension
            .get(set)
            .copied()
            .filter(|id| level_of.get(id).is_some_and(|l| *l <= within))
    };
    let last = u.level_count() - 1;
    let mut results = Vec::new();

    for n in 0..last {
        let level = u.level(n);

        let mut pairing = Tally::new(Clause::Pairing, n);
        for (i, x0) in level.iter().enumerate() {
            for x1 in &level[i..] {
                let pair: Vec<NodeId> = if x0 == x1 { vec![*x0] } else { vec![*x0, *x1] };
                pairing.record(present(&pair, n + 1).is_some(), || pair.clone());
            }
        }
        results.push(pairing.finish());

        let mut union = Tally::new(Clause::Union, n);
        for x in level {
            let mut set: Vec<NodeId> = g
                .members(*x)
                .expect("level nodes are graph nodes")
                .iter()
                .flat_map(|y| g.members(*y).expect("members are nodes").iter().copied())
                .collect();
            set.sort_unstable();
            set.dedup();
            union.record(present(&set, n + 1).is_some(), || set.clone());
        }
        results.push(union.finish());

        let mut subsets = Tally::new(Clause::Subsets, n);
        let mut power = (n + 2 <= last).then(|| Tally::new(Clause::PowerSet, n));
        for x in level {
            let ext = g.members(*x).expect("level nodes are graph nodes");
            if ext.len() > MAX_WITNESS_EXTENSION {
                let reason = format!("node {x} has {} members", ext.len());
                subsets.skipped = Some(reason.clone());
                if let Some(p) = power.as_mut() {
                    p.skipped = Some(reason);
                }
                continue;
            }
            let mut reps = Vec::with_capacity(1 << ext.len());
            let mut complete_reps = true;
            for_each_subset_lex(ext, |s| {
                let found = present(s, n + 1);
                subsets.record(found.is_some(), || s.to_vec());
                match found {
                    Some(id) => reps.push(id),
                    None => complete_reps = false,
                }
            });
            if let Some(p) = power.as_mut() {
                reps.sort_unstable();
                let ok = complete_reps && present(&reps, n + 2).is_some();
                p.record(ok, || vec![*x]);
            }
        }
        results.push(subsets.finish());
        if let Some(p) = power {
            results.push(p.finish());
        }
    }
    WitnessReport { results }
}
