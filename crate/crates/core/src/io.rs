//! Canonical JSON documents and DOT export.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::completion::LeveledUniverse;
use crate::dred::{Dred, DredLeveledUniverse};
use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId, Provenance};

pub const FORMAT_VERSION: u32 = 1;

/// JSON schema for [`GraphDocument`], shipped alongside the crate.
pub const GRAPH_DOCUMENT_SCHEMA: &str = include_str!("../schema/graph_document.schema.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: NodeId,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankBlock {
    pub index: u32,
    pub values: Vec<(NodeId, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsBlock {
    /// How many leading levels came from the seed rather than a completion step.
    pub seed_levels: usize,
    /// Nodes first appearing at each level.
    pub added: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub format_version: u32,
    pub nodes: Vec<NodeEntry>,
    /// `[member, container]` pairs.
    pub edges: Vec<(NodeId, NodeId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<Vec<(NodeId, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<RankBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelsBlock>,
    /// Named formulas, referenced on the command line as `@name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulas: Option<BTreeMap<String, String>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl GraphDocument {
    pub fn from_graph(g: &ExtensionalDigraph) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            nodes: g
                .iter()
                .map(|(id, p, _)| NodeEntry {
                    id,
                    provenance: p.clone(),
                })
                .collect(),
            edges: g.edges(),
            depth: None,
            ranks: None,
            levels: None,
            formulas: None,
        }
    }

    pub fn from_universe(u: &LeveledUniverse) -> Self {
        let mut doc = Self::from_graph(u.graph());
        let mut added = Vec::with_capacity(u.level_count());
        let mut prev: &[NodeId] = &[];
        for level in u.levels() {
            added.push(level.iter().copied().filter(|x| prev.binary_search(x).is_err()).collect());
            prev = level;
        }
        doc.levels = Some(LevelsBlock {
            seed_levels: u.seed_level_count(),
            added,
        });
        doc
    }

    pub fn from_dred(h: &Dred) -> Self {
        let mut doc = Self::from_graph(h.graph());
        doc.set_dred(h);
        doc
    }

    pub fn from_dred_universe(du: &DredLeveledUniverse) -> Self {
        let mut doc = Self::from_universe(du.universe());
        doc.set_dred(&du.dred());
        doc
    }

    fn set_dred(&mut self, h: &Dred) {
        self.depth = Some(h.depth_map().iter().map(|(k, v)| (*k, *v)).collect());
        self.ranks = Some(
            h.rank_family()
                .iter()
                .map(|(i, r)| RankBlock {
                    index: *i,
                    values: r.iter().map(|(k, v)| (*k, *v)).collect(),
                })
                .collect(),
        );
    }

    /// Checks referential integrity, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(schema(
                "format_version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            ));
        }
        let mut ids = HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !ids.insert(n.id) {
                return Err(schema(format!("nodes[{i}].id"), format!("duplicate id {}", n.id)));
            }
        }
        for (i, (s, t)) in self.edges.iter().enumerate() {
            for (side, x) in [("0", s), ("1", t)] {
                if !ids.contains(x) {
                    return Err(schema(format!("edges[{i}][{side}]"), format!("unknown node {x}")));
                }
            }
        }
        let depth: Option<HashMap<NodeId, u32>> = match &self.depth {
            None => None,
            Some(d) => {
                let mut map = HashMap::new();
                for (i, (x, v)) in d.iter().enumerate() {
                    if !ids.contains(x) {
                        return Err(schema(format!("depth[{i}][0]"), format!("unknown node {x}")));
                    }
                    if map.insert(*x, *v).is_some() {
                        return Err(schema(format!("depth[{i}][0]"), format!("node {x} listed twice")));
                    }
                }
                if map.len() != ids.len() {
                    return Err(schema("depth", "every node needs a depth"));
                }
                Some(map)
            }
        };
        if let Some(ranks) = &self.ranks {
            let depth = depth.as_ref().ok_or_else(|| schema("ranks", "ranks require a depth block"))?;
            let mut indices = HashSet::new();
            for (k, block) in ranks.iter().enumerate() {
                if block.index == 0 || !indices.insert(block.index) {
                    return Err(schema(format!("ranks[{k}].index"), "indices must be distinct and at least 1"));
                }
                let mut seen = HashSet::new();
                for (j, (x, _)) in block.values.iter().enumerate() {
                    let path = format!("ranks[{k}].values[{j}][0]");
                    let d = depth.get(x).ok_or_else(|| schema(&path, format!("unknown node {x}")))?;
                    if *d >= block.index {
                        return Err(schema(&path, format!("node {x} has depth {d}, not below {}", block.index)));
                    }
                    if !seen.insert(*x) {
                        return Err(schema(&path, format!("node {x} listed twice")));
                    }
                }
                let expected = depth.values().filter(|d| **d < block.index).count();
                if seen.len() != expected {
                    return Err(schema(
                        format!("ranks[{k}].values"),
                        "must cover exactly the nodes of smaller depth",
                    ));
                }
            }
        }
        if let Some(levels) = &self.levels {
            let mut seen = HashSet::new();
            for (n, added) in levels.added.iter().enumerate() {
                for (j, x) in added.iter().enumerate() {
                    let path = format!("levels.added[{n}][{j}]");
                    if !ids.contains(x) {
                        return Err(schema(path, format!("unknown node {x}")));
                    }
                    if !seen.insert(*x) {
                        return Err(schema(path, format!("node {x} listed twice")));
                    }
                }
            }
            if seen.len() != ids.len() {
                return Err(schema("levels.added", "every node must appear at some level"));
            }
            if levels.seed_levels == 0 || levels.seed_levels > levels.added.len() {
                return Err(schema("levels.seed_levels", "must be between 1 and the number of levels"));
            }
        }
        Ok(())
    }

    /// Sorts every list so equal documents serialize identically.
    pub fn normalize(&mut self) {
        self.nodes.sort_by_key(|n| n.id);
        self.edges.sort_unstable();
        if let Some(d) = &mut self.depth {
            d.sort_unstable();
        }
        if let Some(r) = &mut self.ranks {
            r.sort_by_key(|b| b.index);
            for b in r.iter_mut() {
                b.values.sort_unstable();
            }
        }
        if let Some(l) = &mut self.levels {
            for a in l.added.iter_mut() {
                a.sort_unstable();
            }
        }
    }

    pub fn graph(&self) -> Result<ExtensionalDigraph> {
        ExtensionalDigraph::from_parts(
            self.nodes.iter().map(|n| (n.id, n.provenance.clone())),
            self.edges.iter().copied(),
        )
    }

    pub fn universe(&self) -> Result<Option<LeveledUniverse>> {
        let Some(levels) = &self.levels else { return Ok(None) };
        let mut cumulative = Vec::with_capacity(levels.added.len());
        let mut acc: Vec<NodeId> = Vec::new();
        for added in &levels.added {
            acc.extend(added);
            acc.sort_unstable();
            cumulative.push(acc.clone());
        }
        LeveledUniverse::from_parts(self.graph()?, cumulative, levels.seed_levels).map(Some)
    }

    pub fn dred(&self) -> Result<Option<Dred>> {
        let (Some(depth), Some(ranks)) = (&self.depth, &self.ranks) else {
            return Ok(None);
        };
        let depth = depth.iter().copied().collect();
        let ranks = ranks
            .iter()
            .map(|b| (b.index, b.values.iter().copied().collect()))
            .collect();
        Ok(Some(Dred::from_parts(self.graph()?, depth, ranks)))
    }
}

/// Sorted keys, sorted lists, compact, one trailing newline.
pub fn serialize(doc: &GraphDocument) -> String {
    let mut doc = doc.clone();
    doc.normalize();
    let value = serde_json::to_value(&doc).expect("documents serialize");
    let mut s = serde_json::to_string(&value).expect("values serialize");
    s.push('\n');
    s
}

pub fn deserialize(text: &str) -> Result<GraphDocument> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: GraphDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path.is_empty() || path == "?" { "$".into() } else { path }, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema("$", e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn shade(level: u32) -> String {
    if level == 0 {
        return "white".into();
    }
    let grey = 90u32.saturating_sub(12 * (level - 1)).max(30);
    format!("grey{grey}")
}

fn write_dot(g: &ExtensionalDigraph, dred: Option<&Dred>) -> String {
    let mut out = String::from("digraph G {\n  node [shape=box, style=filled];\n");
    for (id, prov, _) in g.iter() {
        let mut label = prov.short_label();
        if let Some(h) = dred {
            if let Some(d) = h.depth(id) {
                let _ = write!(label, "\\nd={d}");
            }
            let ranks: Vec<String> = h
                .rank_indices()
                .filter_map(|i| h.rank(i, id).map(|r| format!("r{i}={r}")))
                .collect();
            if !ranks.is_empty() {
                let _ = write!(label, "\\n{}", ranks.join(" "));
            }
        }
        let label = escape(&label).replace("\\\\n", "\\n");
        let _ = writeln!(out, "  n{id} [label=\"{label}\", fillcolor=\"{}\"];", shade(prov.level()));
    }
    for (m, c) in g.edges() {
        let _ = writeln!(out, "  n{m} -> n{c};");
    }
    out.push_str("}\n");
    out
}

/// DOT text with edges drawn member to container; completion nodes are
/// shaded darker the later their level.
pub fn to_dot(g: &ExtensionalDigraph) -> String {
    write_dot(g, None)
}

/// As [`to_dot`], with depth and ranks in each label.
pub fn dred_to_dot(h: &Dred) -> String {
    write_dot(h.graph(), Some(h))
}
