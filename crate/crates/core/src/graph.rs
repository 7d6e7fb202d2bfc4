//! Finite digraphs whose edges read "source is a member of target".
//!
//! A node stands for the set of its in-neighbours (its *extension*). The
//! graph is extensional when no two nodes share an extension; the type
//! admits non-extensional graphs so that [`is_extensional`] has something to
//! reject, and operations that need extensionality check it themselves.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque, totally ordered node identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Loop,
    Chain,
    Tuple,
    Atom,
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CodeKind::Loop => "loop",
            CodeKind::Chain => "chain",
            CodeKind::Tuple => "tuple",
            CodeKind::Atom => "atom",
        };
        f.write_str(s)
    }
}

/// Where a node came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Seed { label: String },
    /// Added by a completion step; `members` is the extension at creation.
    Deficiency { level: u32, members: Vec<NodeId> },
    Code { code: CodeKind, detail: String },
}

impl Provenance {
    pub fn seed(label: impl Into<String>) -> Self {
        Provenance::Seed { label: label.into() }
    }

    pub fn code(code: CodeKind, detail: impl Into<String>) -> Self {
        Provenance::Code {
            code,
            detail: detail.into(),
        }
    }

    /// Completion level the node was created at (0 for seeds and codes).
    pub fn level(&self) -> u32 {
        match self {
            Provenance::Deficiency { level, .. } => *level,
            _ => 0,
        }
    }

    /// Identity-free summary used for label-respecting isomorphism.
    pub fn class_label(&self) -> String {
        match self {
            Provenance::Seed { label } => format!("seed:{label}"),
            Provenance::Deficiency { level, .. } => format!("deficiency:{level}"),
            Provenance::Code { code, .. } => format!("code:{code}"),
        }
    }

    pub fn short_label(&self) -> String {
        match self {
            Provenance::Seed { label } => label.clone(),
            Provenance::Deficiency { level, .. } => format!("D{level}"),
            Provenance::Code { code, detail } => format!("{code}:{detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeData {
    provenance: Provenance,
    /// Sorted, deduplicated extension.
    members: Vec<NodeId>,
}

/// Immutable finite digraph with per-node provenance.
///
/// Nodes are stored in increasing [`NodeId`] order; each node keeps its
/// sorted extension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ExtensionalDigraph {
    ids: Vec<NodeId>,
    data: Vec<NodeData>,
}

impl ExtensionalDigraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit nodes and (member, container) edges.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = (NodeId, Provenance)>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut pairs: Vec<(NodeId, Provenance)> = nodes.into_iter().collect();
        pairs.sort_by_key(|(id, _)| *id);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateNode(w[0].0));
            }
        }
        let ids: Vec<NodeId> = pairs.iter().map(|(id, _)| *id).collect();
        let mut data: Vec<NodeData> = pairs
            .into_iter()
            .map(|(_, provenance)| NodeData {
                provenance,
                members: Vec::new(),
            })
            .collect();
        for (src, tgt) in edges {
            let (Ok(_), Ok(t)) = (ids.binary_search(&src), ids.binary_search(&tgt)) else {
                return Err(Error::DanglingEdge(src, tgt));
            };
            data[t].members.push(src);
        }
        for d in &mut data {
            d.members.sort_unstable();
            d.members.dedup();
        }
        Ok(Self { ids, data })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Smallest id strictly greater than every id in the graph.
    pub fn next_id(&self) -> NodeId {
        self.ids.last().map_or(NodeId(0), |id| NodeId(id.0 + 1))
    }

    pub fn provenance(&self, id: NodeId) -> Result<&Provenance> {
        let i = self.index_of(id).ok_or(Error::UnknownNode(id))?;
        Ok(&self.data[i].provenance)
    }

    /// The extension of `id` as a sorted slice.
    pub fn members(&self, id: NodeId) -> Result<&[NodeId]> {
        let i = self.index_of(id).ok_or(Error::UnknownNode(id))?;
        Ok(&self.data[i].members)
    }

    pub(crate) fn members_at(&self, index: usize) -> &[NodeId] {
        &self.data[index].members
    }

    pub(crate) fn provenance_at(&self, index: usize) -> &Provenance {
        &self.data[index].provenance
    }

    pub fn has_edge(&self, member: NodeId, container: NodeId) -> bool {
        self.members(container)
            .map(|m| m.binary_search(&member).is_ok())
            .unwrap_or(false)
    }

    pub fn has_self_loop(&self, id: NodeId) -> bool {
        self.has_edge(id, id)
    }

    pub fn edge_count(&self) -> usize {
        self.data.iter().map(|d| d.members.len()).sum()
    }

    /// All (member, container) edges sorted by member, then container.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<(NodeId, NodeId)> = self
            .ids
            .iter()
            .zip(&self.data)
            .flat_map(|(c, d)| d.members.iter().map(move |m| (*m, *c)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Iterates `(id, provenance, extension)` in id order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Provenance, &[NodeId])> + '_ {
        self.ids
            .iter()
            .zip(&self.data)
            .map(|(id, d)| (*id, &d.provenance, d.members.as_slice()))
    }

    /// Dense container lists: `containers()[i]` holds indices of the nodes
    /// that node `i` is a member of.
    pub(crate) fn container_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (ci, d) in self.data.iter().enumerate() {
            for m in &d.members {
                let mi = self.index_of(*m).expect("edge endpoints are nodes");
                out[mi].push(ci);
            }
        }
        out
    }

    /// Map from extension to the first node (in id order) carrying it.
    pub fn extension_index(&self) -> HashMap<&[NodeId], NodeId> {
        let mut map = HashMap::with_capacity(self.len());
        for (id, d) in self.ids.iter().zip(&self.data) {
            map.entry(d.members.as_slice()).or_insert(*id);
        }
        map
    }

    /// First pair of distinct nodes sharing an extension, if any.
    pub fn extensionality_clash(&self) -> Option<(NodeId, NodeId)> {
        let mut seen: HashMap<&[NodeId], NodeId> = HashMap::with_capacity(self.len());
        for (id, d) in self.ids.iter().zip(&self.data) {
            if let Some(prev) = seen.insert(d.members.as_slice(), *id) {
                return Some((prev, *id));
            }
        }
        None
    }

    pub fn is_extensional(&self) -> bool {
        self.extensionality_clash().is_none()
    }

    pub(crate) fn require_extensional(&self) -> Result<()> {
        match self.extensionality_clash() {
            Some((a, b)) => Err(Error::NonExtensional(a, b)),
            None => Ok(()),
        }
    }

    /// Induced subgraph on `keep` (unknown ids are ignored).
    pub fn restrict(&self, keep: &[NodeId]) -> Self {
        let keep: BTreeSet<NodeId> = keep.iter().copied().filter(|id| self.contains(*id)).collect();
        let mut ids = Vec::with_capacity(keep.len());
        let mut data = Vec::with_capacity(keep.len());
        for id in keep.iter() {
            let d = &self.data[self.index_of(*id).unwrap()];
            ids.push(*id);
            data.push(NodeData {
                provenance: d.provenance.clone(),
                members: d.members.iter().copied().filter(|m| keep.contains(m)).collect(),
            });
        }
        Self { ids, data }
    }

    /// Returns a new graph with one extra node whose id is [`Self::next_id`].
    pub fn with_node(&self, provenance: Provenance, members: &[NodeId]) -> Result<(Self, NodeId)> {
        let mut b = GraphBuilder::from_graph(self.clone());
        let id = b.push(provenance, members.to_vec())?;
        Ok((b.finish(), id))
    }

    /// Returns a new graph with extra edges into existing nodes.
    pub fn with_edges(&self, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = self.clone();
        for (src, tgt) in edges {
            if !g.contains(*src) {
                return Err(Error::DanglingEdge(*src, *tgt));
            }
            let t = g.index_of(*tgt).ok_or(Error::DanglingEdge(*src, *tgt))?;
            let m = &mut g.data[t].members;
            if let Err(pos) = m.binary_search(src) {
                m.insert(pos, *src);
            }
        }
        Ok(g)
    }
}

/// Appends nodes with increasing ids. Used by constructions that grow a
/// graph in bulk before freezing it.
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    graph: ExtensionalDigraph,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_graph(graph: ExtensionalDigraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &ExtensionalDigraph {
        &self.graph
    }

    /// Adds a node whose extension is `members`; `members` may be unsorted
    /// but must name existing nodes.
    pub fn push(&mut self, provenance: Provenance, mut members: Vec<NodeId>) -> Result<NodeId> {
        let id = self.graph.next_id();
        members.sort_unstable();
        members.dedup();
        for m in &members {
            if !self.graph.contains(*m) {
                return Err(Error::DanglingEdge(*m, id));
            }
        }
        self.graph.ids.push(id);
        self.graph.data.push(NodeData { provenance, members });
        Ok(id)
    }

    /// Adds a node that is a member of itself in addition to `members`.
    pub fn push_self_membered(&mut self, provenance: Provenance, mut members: Vec<NodeId>) -> Result<NodeId> {
        let id = self.graph.next_id();
        for m in &members {
            if !self.graph.contains(*m) {
                return Err(Error::DanglingEdge(*m, id));
            }
        }
        members.push(id);
        members.sort_unstable();
        members.dedup();
        self.graph.ids.push(id);
        self.graph.data.push(NodeData { provenance, members });
        Ok(id)
    }

    pub fn finish(self) -> ExtensionalDigraph {
        self.graph
    }
}

/// `{z : (z, x) is an edge}`.
pub fn extension(g: &ExtensionalDigraph, x: NodeId) -> Result<BTreeSet<NodeId>> {
    Ok(g.members(x)?.iter().copied().collect())
}

pub fn is_extensional(g: &ExtensionalDigraph) -> bool {
    g.is_extensional()
}

/// `small ⊆_end big`: every node of `small` is in `big` with exactly the
/// same extension, so old nodes gain no new members.
pub fn is_end_extension(small: &ExtensionalDigraph, big: &ExtensionalDigraph) -> bool {
    small.iter().all(|(id, _, members)| match big.members(id) {
        Ok(bm) => bm == members,
        Err(_) => false,
    })
}
