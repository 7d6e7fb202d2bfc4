//! Depth-ranked extensional digraphs.
//!
//! A [`Dred`] carries a depth `d` on every node and a family of partial rank
//! functions `r_i`, each defined exactly on the nodes of depth `< i` and
//! strictly increasing along membership inside its domain. Only the finite
//! prefix `r_1 ..= r_R` is stored, where `R` must exceed every depth so that
//! each node is ranked somewhere. Ordinals are represented by naturals.

use std::collections::{BTreeMap, BTreeSet};

use crate::completion::{deficiency, Budget, LeveledUniverse};
use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId};

pub type DepthMap = BTreeMap<NodeId, u32>;
pub type RankFamily = BTreeMap<u32, BTreeMap<NodeId, u64>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dred {
    graph: ExtensionalDigraph,
    depth: DepthMap,
    ranks: RankFamily,
}

impl Dred {
    /// Assembles a candidate without checking it; see [`verify_dred`].
    pub fn from_parts(graph: ExtensionalDigraph, depth: DepthMap, ranks: RankFamily) -> Self {
        Self { graph, depth, ranks }
    }

    /// Depth 0 everywhere and `r_1` the ordinary set-theoretic rank.
    /// Fails on graphs with a membership cycle.
    pub fn well_founded(graph: ExtensionalDigraph) -> Result<Self> {
        let ranks = set_ranks(&graph)?;
        let depth = graph.node_ids().iter().map(|id| (*id, 0)).collect();
        Ok(Self {
            graph,
            depth,
            ranks: BTreeMap::from([(1, ranks)]),
        })
    }

    pub fn graph(&self) -> &ExtensionalDigraph {
        &self.graph
    }

    pub fn depth_map(&self) -> &DepthMap {
        &self.depth
    }

    pub fn rank_family(&self) -> &RankFamily {
        &self.ranks
    }

    pub fn depth(&self, x: NodeId) -> Option<u32> {
        self.depth.get(&x).copied()
    }

    pub fn rank(&self, index: u32, x: NodeId) -> Option<u64> {
        self.ranks.get(&index).and_then(|r| r.get(&x)).copied()
    }

    pub fn max_depth(&self) -> Option<u32> {
        self.depth.values().max().copied()
    }

    pub fn rank_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.ranks.keys().copied()
    }

    /// Restriction to `keep`: the induced subgraph with depth and ranks cut down.
    pub fn restrict(&self, keep: &[NodeId]) -> Self {
        let graph = self.graph.restrict(keep);
        let depth = self
            .depth
            .iter()
            .filter(|(id, _)| graph.contains(**id))
            .map(|(k, v)| (*k, *v))
            .collect();
        let ranks = self
            .ranks
            .iter()
            .map(|(i, r)| {
                let r = r.iter().filter(|(id, _)| graph.contains(**id)).map(|(k, v)| (*k, *v)).collect();
                (*i, r)
            })
            .collect();
        Self { graph, depth, ranks }
    }
}

/// Ordinary rank: 0 for the empty set, else one more than the largest member rank.
pub fn set_ranks(g: &ExtensionalDigraph) -> Result<BTreeMap<NodeId, u64>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Open,
        Done(u64),
    }
    let mut marks = vec![Mark::Fresh; g.len()];
    for root in 0..g.len() {
        if marks[root] != Mark::Fresh {
            continue;
        }
        // Iterative post-order so deep chains cannot overflow the stack.
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        marks[root] = Mark::Open;
        while let Some((v, next)) = stack.pop() {
            let members = g.members_at(v);
            if next < members.len() {
                stack.push((v, next + 1));
                let w = g.index_of(members[next]).expect("members are nodes");
                match marks[w] {
                    Mark::Fresh => {
                        marks[w] = Mark::Open;
                        stack.push((w, 0));
                    }
                    Mark::Open => {
                        return Err(Error::NotDred(format!(
                            "membership cycle through node {}",
                            g.node_ids()[w]
                        )))
                    }
                    Mark::Done(_) => {}
                }
            } else {
                let r = members
                    .iter()
                    .map(|m| match marks[g.index_of(*m).unwrap()] {
                        Mark::Done(r) => r + 1,
                        _ => unreachable!("members finish first"),
                    })
                    .max()
                    .unwrap_or(0);
                marks[v] = Mark::Done(r);
            }
        }
    }
    Ok(g
        .node_ids()
        .iter()
        .zip(marks)
        .map(|(id, m)| match m {
            Mark::Done(r) => (*id, r),
            _ => unreachable!(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankViolation {
    /// No stored rank index exceeds this depth.
    MissingIndex { needed: u32 },
    /// `r_index(node)` is defined but should not be, or the reverse.
    Domain { index: u32, node: NodeId, defined: bool },
    /// `member E container` inside the domain but `r(member) >= r(container)`.
    Order { index: u32, member: NodeId, container: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DredReport {
    pub extensionality: Option<(NodeId, NodeId)>,
    pub missing_depth: Vec<NodeId>,
    /// Edges `(x, y)` with `d(x) > d(y) + 1`.
    pub condition2: Vec<(NodeId, NodeId)>,
    /// Pairs `(x, y)` with `ext(x) ⊆ ext(y)` and `d(x) > d(y) + 1`.
    pub condition3: Vec<(NodeId, NodeId)>,
    pub condition4: Vec<RankViolation>,
}

impl DredReport {
    pub fn passed(&self) -> bool {
        self.extensionality.is_none()
            && self.missing_depth.is_empty()
            && self.condition2.is_empty()
            && self.condition3.is_empty()
            && self.condition4.is_empty()
    }

    /// The first failing condition (1 to 4) with a description.
    pub fn first_failure(&self) -> Option<(u8, String)> {
        if let Some((a, b)) = self.extensionality {
            return Some((1, format!("nodes {a} and {b} share an extension")));
        }
        if let Some(x) = self.missing_depth.first() {
            return Some((2, format!("node {x} has no depth")));
        }
        if let Some((x, y)) = self.condition2.first() {
            return Some((2, format!("edge ({x}, {y}) raises depth by more than one")));
        }
        if let Some((x, y)) = self.condition3.first() {
            return Some((3, format!("ext({x}) ⊆ ext({y}) but d({x}) > d({y}) + 1")));
        }
        self.condition4.first().map(|v| (4, format!("{v:?}")))
    }
}

/// Checks extensionality and conditions 2 to 4, listing every violation.
pub fn verify_dred(h: &Dred) -> DredReport {
    let g = &h.graph;
    let mut report = DredReport {
        extensionality: g.extensionality_clash(),
        ..DredReport::default()
    };
    report.missing_depth = g.node_ids().iter().copied().filter(|id| !h.depth.contains_key(id)).collect();
    if !report.missing_depth.is_empty() {
        return report;
    }
    let d = |x: &NodeId| h.depth[x];

    for (y, _, members) in g.iter() {
        for x in members {
            if d(x) > d(&y) + 1 {
                report.condition2.push((*x, y));
            }
        }
    }

    // Only x with d(x) >= 2 can violate condition 3; supersets of ext(x)
    // are found among the containers of its least-shared member.
    let containers = g.container_indices();
    let min_depth = h.depth.values().min().copied().unwrap_or(0);
    for (xi, x) in g.node_ids().iter().enumerate() {
        let dx = d(x);
        if dx < min_depth + 2 {
            continue;
        }
        let ext = g.members_at(xi);
        let candidates: Vec<usize> = match ext
            .iter()
            .map(|m| g.index_of(*m).unwrap())
            .min_by_key(|mi| containers[*mi].len())
        {
            None => (0..g.len()).collect(),
            Some(mi) => containers[mi].clone(),
        };
        for yi in candidates {
            let y = g.node_ids()[yi];
            if dx > d(&y) + 1 && is_subset(ext, g.members_at(yi)) {
                report.condition3.push((*x, y));
            }
        }
    }
    report.condition3.sort_unstable();

    let max_depth = h.max_depth().unwrap_or(0);
    if !h.ranks.keys().any(|i| *i > max_depth) {
        report.condition4.push(RankViolation::MissingIndex { needed: max_depth + 1 });
    }
    for (index, r) in &h.ranks {
        for id in g.node_ids() {
            let should = d(id) < *index;
            if r.contains_key(id) != should {
                report.condition4.push(RankViolation::Domain {
                    index: *index,
                    node: *id,
                    defined: !should,
                });
            }
        }
        if let Some(extra) = r.keys().find(|id| !g.contains(**id)) {
            report.condition4.push(RankViolation::Domain {
                index: *index,
                node: *extra,
                defined: true,
            });
        }
        for (y, _, members) in g.iter() {
            let Some(ry) = r.get(&y) else { continue };
            for z in members {
                if let Some(rz) = r.get(z) {
                    if rz >= ry {
                        report.condition4.push(RankViolation::Order {
                            index: *index,
                            member: *z,
                            container: y,
                        });
                    }
                }
            }
        }
    }
    report
}

fn is_subset(small: &[NodeId], big: &[NodeId]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

/// The map whose image must be finite for a deficiency set to count as
/// bounded. Every subset of a finite graph has finite image under either
/// choice; the switch is where an infinitary restriction would apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedImage {
    Depth,
    Identity,
}

pub const BOUNDED_IMAGE: BoundedImage = BoundedImage::Depth;

/// `{X ∈ D(H) : the image of X under BOUNDED_IMAGE is finite}`.
pub fn bounded_deficiency(h: &Dred, budget: &Budget) -> Result<Vec<Vec<NodeId>>> {
    let sets = deficiency(&h.graph, budget)?;
    let bound = h.graph.len();
    Ok(sets
        .into_iter()
        .filter(|set| {
            let image_size = match BOUNDED_IMAGE {
                BoundedImage::Depth => set.iter().map(|x| h.depth[x]).collect::<BTreeSet<_>>().len(),
                BoundedImage::Identity => set.len(),
            };
            image_size <= bound
        })
        .collect())
}

/// A completion whose every level carries depth and ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DredLeveledUniverse {
    universe: LeveledUniverse,
    depth: DepthMap,
    ranks: RankFamily,
}

impl DredLeveledUniverse {
    pub fn from_parts(universe: LeveledUniverse, depth: DepthMap, ranks: RankFamily) -> Self {
        Self { universe, depth, ranks }
    }

    pub fn universe(&self) -> &LeveledUniverse {
        &self.universe
    }

    pub fn depth_map(&self) -> &DepthMap {
        &self.depth
    }

    pub fn rank_family(&self) -> &RankFamily {
        &self.ranks
    }

    pub fn dred(&self) -> Dred {
        Dred::from_parts(self.universe.graph().clone(), self.depth.clone(), self.ranks.clone())
    }

    pub fn level_dred(&self, m: usize) -> Dred {
        self.dred().restrict(self.universe.level(m))
    }
}

/// Iterates the bounded-deficiency completion, extending depth by the
/// maximum member depth and each `r_i` by the supremum of member ranks plus
/// one (both 0 on the empty set). Conditions are re-verified after every
/// step; a violation surfaces as [`Error::DredCondition`].
pub fn dred_complete(h: &Dred, n: usize, budget: &Budget) -> Result<DredLeveledUniverse> {
    let report = verify_dred(h);
    if let Some((condition, detail)) = report.first_failure() {
        return Err(Error::NotDred(format!("condition {condition}: {detail}")));
    }
    let start = DredLeveledUniverse {
        universe: LeveledUniverse::from_seed(h.graph.clone())?,
        depth: h.depth.clone(),
        ranks: h.ranks.clone(),
    };
    dred_extend(&start, n, budget)
}

/// Appends `n` further levels to an existing depth-ranked completion.
pub fn dred_extend(du: &DredLeveledUniverse, n: usize, budget: &Budget) -> Result<DredLeveledUniverse> {
    let mut universe = du.universe.clone();
    let mut depth = du.depth.clone();
    let mut ranks = du.ranks.clone();
    for _ in 0..n {
        let g = universe.graph();
        budget.admit_subsets(g.len())?;
        budget.admit_nodes(g.len() as u64 + (1u64 << g.len()) - g.len() as u64)?;
        let current = Dred::from_parts(g.clone(), depth.clone(), ranks.clone());
        let sets = bounded_deficiency(&current, budget)?;
        let next = universe.extend_with(sets)?;
        let fresh: Vec<NodeId> = next
            .graph()
            .node_ids()
            .iter()
            .copied()
            .filter(|id| !depth.contains_key(id))
            .collect();
        for x in &fresh {
            let members = next.graph().members(*x)?;
            let dx = members.iter().map(|m| depth[m]).max().unwrap_or(0);
            depth.insert(*x, dx);
            for (i, r) in ranks.iter_mut() {
                if dx < *i {
                    let rx = members.iter().map(|m| r[m] + 1).max().unwrap_or(0);
                    r.insert(*x, rx);
                }
            }
        }
        universe = next;
        let step = Dred::from_parts(universe.graph().clone(), depth.clone(), ranks.clone());
        if let Some((condition, detail)) = verify_dred(&step).first_failure() {
            return Err(Error::DredCondition { condition, detail });
        }
    }
    Ok(DredLeveledUniverse { universe, depth, ranks })
}

/// A member of `x` with minimal `r_n`, where `n` is one more than the
/// largest member depth; ties go to the smaller id. The result is checked
/// to be membership-minimal within `x`.
pub fn foundation_witness(h: &Dred, x: NodeId) -> Result<NodeId> {
    let members = h.graph.members(x)?;
    if members.is_empty() {
        return Err(Error::EmptyExtension(x));
    }
    let depth_of = |m: &NodeId| h.depth(*m).ok_or_else(|| Error::NotDred(format!("node {m} has no depth")));
    let mut n = 0;
    for m in members {
        n = n.max(depth_of(m)? + 1);
    }
    let r = h
        .ranks
        .get(&n)
        .ok_or_else(|| Error::NotDred(format!("rank function r_{n} is not stored")))?;
    let mut best: Option<(u64, NodeId)> = None;
    for m in members {
        let rm = *r
            .get(m)
            .ok_or_else(|| Error::NotDred(format!("r_{n} undefined on member {m}")))?;
        if best.is_none_or(|(b, _)| rm < b) {
            best = Some((rm, *m));
        }
    }
    let (_, y0) = best.expect("nonempty members");
    let below = h.graph.members(y0)?;
    if let Some(z) = below.iter().find(|z| members.binary_search(z).is_ok()) {
        return Err(Error::NotDred(format!(
            "r_{n} is not a rank function: {z} E {y0} inside node {x}"
        )));
    }
    Ok(y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::complete;
    use crate::graph::Provenance;
    use crate::seeds::von_neumann_seed;

    fn quine_dred() -> Dred {
        let g = ExtensionalDigraph::from_parts([(NodeId(0), Provenance::seed("a"))], [(NodeId(0), NodeId(0))]).unwrap();
        Dred::from_parts(
            g,
            BTreeMap::from([(NodeId(0), 0)]),
            BTreeMap::from([(1, BTreeMap::from([(NodeId(0), 0)]))]),
        )
    }

    #[test]
    fn von_neumann_seed_with_set_rank_passes() {
        let h = Dred::well_founded(von_neumann_seed(3).unwrap()).unwrap();
        assert!(verify_dred(&h).passed());
        let mut ranks = h.rank_family().clone();
        ranks.insert(2, ranks[&1].clone());
        ranks.insert(3, ranks[&1].clone());
        let h = Dred::from_parts(h.graph().clone(), h.depth_map().clone(), ranks);
        assert!(verify_dred(&h).passed());
    }

    #[test]
    fn quine_atom_fails_condition_four() {
        let r = verify_dred(&quine_dred());
        assert!(!r.passed());
        assert_eq!(
            r.condition4,
            vec![RankViolation::Order {
                index: 1,
                member: NodeId(0),
                container: NodeId(0)
            }]
        );
        assert!(matches!(foundation_witness(&quine_dred(), NodeId(0)), Err(Error::NotDred(_))));
    }

    #[test]
    fn chain_edge_respects_condition_two() {
        // a_1 E a_0, terminal t E a_1; depth(a_j) = j + 1, t at depth 1.
        let g = ExtensionalDigraph::from_parts(
            [
                (NodeId(0), Provenance::seed("t")),
                (NodeId(1), Provenance::seed("a1")),
                (NodeId(2), Provenance::seed("a0")),
            ],
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))],
        )
        .unwrap();
        let depth = BTreeMap::from([(NodeId(0), 1), (NodeId(1), 2), (NodeId(2), 1)]);
        let ranks = (1..=3)
            .map(|i| {
                let r: BTreeMap<NodeId, u64> = [(NodeId(0), 0u64), (NodeId(1), 1), (NodeId(2), 2)]
                    .into_iter()
                    .filter(|(id, _)| depth[id] < i)
                    .collect();
                (i, r)
            })
            .collect();
        let r = verify_dred(&Dred::from_parts(g, depth, ranks));
        assert!(r.condition2.is_empty());
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn condition_three_violations_are_listed() {
        // x = {e} at depth 3, y = {e, s} at depth 0: ext(x) ⊆ ext(y).
        let g = ExtensionalDigraph::from_parts(
            [
                (NodeId(0), Provenance::seed("e")),
                (NodeId(1), Provenance::seed("x")),
                (NodeId(2), Provenance::seed("y")),
            ],
            [(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))],
        )
        .unwrap();
        let depth = BTreeMap::from([(NodeId(0), 0), (NodeId(1), 3), (NodeId(2), 0)]);
        let r = verify_dred(&Dred::from_parts(g, depth, BTreeMap::new()));
        assert_eq!(r.condition3, vec![(NodeId(1), NodeId(2))]);
        assert!(r.condition2.contains(&(NodeId(1), NodeId(2))));
    }

    #[test]
    fn bounded_deficiency_equals_deficiency_on_finite_dreds() {
        let b = Budget::default();
        let empty = Dred::well_founded(ExtensionalDigraph::empty()).unwrap();
        assert_eq!(bounded_deficiency(&empty, &b).unwrap(), vec![vec![]]);
        let two = Dred::well_founded(von_neumann_seed(2).unwrap()).unwrap();
        assert_eq!(bounded_deficiency(&two, &b).unwrap(), deficiency(two.graph(), &b).unwrap());
        assert_eq!(bounded_deficiency(&two, &b).unwrap().len(), 2);
    }

    #[test]
    fn empty_seed_completion_matches_plain_completion_with_von_neumann_ranks() {
        let b = Budget::default();
        let empty = Dred::well_founded(ExtensionalDigraph::empty()).unwrap();
        let du = dred_complete(&empty, 4, &b).unwrap();
        let plain = complete(&ExtensionalDigraph::empty(), 4, &b).unwrap();
        assert_eq!(du.universe(), &plain);
        assert_eq!(du.universe().level_sizes(), vec![0, 1, 2, 4, 16]);
        assert!(du.depth_map().values().all(|d| *d == 0));
        let expected = set_ranks(plain.graph()).unwrap();
        assert_eq!(du.rank_family()[&1], expected);
        // ∅ is node 0; {∅, {∅}} is the level-3 node with members [0, 1].
        assert_eq!(du.dred().rank(1, NodeId(0)), Some(0));
        let pair = plain.graph().iter().find(|(_, _, m)| *m == [NodeId(0), NodeId(1)]).unwrap().0;
        assert_eq!(du.dred().rank(1, pair), Some(2));
        for m in 0..du.universe().level_count() {
            assert!(verify_dred(&du.level_dred(m)).passed());
        }
    }

    #[test]
    fn foundation_witness_examples() {
        let du = dred_complete(&Dred::well_founded(ExtensionalDigraph::empty()).unwrap(), 3, &Budget::default()).unwrap();
        let h = du.dred();
        let g = h.graph();
        let e = NodeId(0);
        let single = g.iter().find(|(_, _, m)| *m == [e]).unwrap().0;
        let pair = g.iter().find(|(_, _, m)| *m == [e, single]).unwrap().0;
        assert_eq!(foundation_witness(&h, pair).unwrap(), e);
        assert_eq!(foundation_witness(&h, single).unwrap(), e);
        assert_eq!(foundation_witness(&h, e), Err(Error::EmptyExtension(e)));
    }

    #[test]
    fn well_founded_rejects_cycles() {
        let g = ExtensionalDigraph::from_parts(
            [(NodeId(0), Provenance::seed("x")), (NodeId(1), Provenance::seed("y"))],
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))],
        )
        .unwrap();
        assert!(matches!(Dred::well_founded(g), Err(Error::NotDred(_))));
    }
}
