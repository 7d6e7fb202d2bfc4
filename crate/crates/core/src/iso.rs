//! Exact isomorphism and canonical fingerprints by colour refinement with
//! individualisation.
//!
//! Identity is never taken from a bisimulation quotient: two Quine atoms are
//! bisimilar yet distinct nodes, and the search keeps them apart.

use std::collections::HashMap;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::ExtensionalDigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoConfig {
    /// Graphs with more nodes are rejected with [`Error::SizeLimit`].
    pub max_nodes: usize,
    /// Require the bijection to preserve provenance class labels
    /// (seed label, deficiency level, code kind).
    pub respect_labels: bool,
}

impl Default for IsoConfig {
    fn default() -> Self {
        Self {
            max_nodes: 1 << 16,
            respect_labels: false,
        }
    }
}

/// Fingerprint of the empty graph under the default (unlabelled) config.
pub const EMPTY_GRAPH_FINGERPRINT: &str =
    "sha256:61e466bc020ca48dc43d115269c829c1659a12c1a9aeddf6d1cc114458d31db4";

struct Dense {
    members: Vec<Vec<u32>>,
    containers: Vec<Vec<u32>>,
    labels: Option<Vec<String>>,
}

impl Dense {
    fn new(g: &ExtensionalDigraph, cfg: &IsoConfig) -> Result<Self> {
        if g.len() > cfg.max_nodes {
            return Err(Error::SizeLimit {
                nodes: g.len(),
                bound: cfg.max_nodes,
            });
        }
        let index: HashMap<_, u32> = g.node_ids().iter().enumerate().map(|(i, id)| (*id, i as u32)).collect();
        let members: Vec<Vec<u32>> = (0..g.len())
            .map(|i| g.members_at(i).iter().map(|m| index[m]).collect())
            .collect();
        let mut containers = vec![Vec::new(); g.len()];
        for (c, ms) in members.iter().enumerate() {
            for m in ms {
                containers[*m as usize].push(c as u32);
            }
        }
        let labels = cfg
            .respect_labels
            .then(|| (0..g.len()).map(|i| g.provenance_at(i).class_label()).collect());
        Ok(Self {
            members,
            containers,
            labels,
        })
    }

    fn len(&self) -> usize {
        self.members.len()
    }

    fn initial_colours(&self) -> Vec<u32> {
        let keys: Vec<(Option<&str>, bool)> = (0..self.len())
            .map(|i| {
                let label = self.labels.as_ref().map(|l| l[i].as_str());
                (label, self.members[i].contains(&(i as u32)))
            })
            .collect();
        ordinal(&keys)
    }

    /// Iterated refinement by member and container colour multisets.
    fn refine(&self, colours: &mut Vec<u32>) {
        let mut classes = count_classes(colours);
        loop {
            let sigs: Vec<(u32, Vec<u32>, Vec<u32>)> = (0..self.len())
                .map(|i| {
                    let mut m: Vec<u32> = self.members[i].iter().map(|x| colours[*x as usize]).collect();
                    m.sort_unstable();
                    let mut c: Vec<u32> = self.containers[i].iter().map(|x| colours[*x as usize]).collect();
                    c.sort_unstable();
                    (colours[i], m, c)
                })
                .collect();
            let next = ordinal(&sigs);
            let next_classes = count_classes(&next);
            *colours = next;
            if next_classes == classes {
                break;
            }
            classes = next_classes;
        }
    }

    fn certificate(&self, perm: &[u32]) -> Certificate {
        let n = self.len();
        let mut inv = vec![0u32; n];
        for (v, p) in perm.iter().enumerate() {
            inv[*p as usize] = v as u32;
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| inv.iter().map(|v| l[*v as usize].clone()).collect());
        let mut edges: Vec<(u32, u32)> = self
            .members
            .iter()
            .enumerate()
            .flat_map(|(c, ms)| ms.iter().map(move |m| (perm[*m as usize], perm[c])))
            .collect();
        edges.sort_unstable();
        Certificate {
            nodes: n as u32,
            labels,
            edges,
        }
    }
}

/// Assigns each key its rank among the distinct keys.
fn ordinal<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
    let mut out = vec![0u32; keys.len()];
    let mut colour = 0u32;
    for (pos, i) in order.iter().enumerate() {
        if pos > 0 && keys[order[pos - 1]] != keys[*i] {
            colour += 1;
        }
        out[*i] = colour;
    }
    out
}

fn count_classes(colours: &[u32]) -> usize {
    colours.iter().max().map_or(0, |m| *m as usize + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Certificate {
    nodes: u32,
    labels: Option<Vec<String>>,
    edges: Vec<(u32, u32)>,
}

impl Certificate {
    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"setforge-cert-v1\n");
        h.update(self.nodes.to_le_bytes());
        if let Some(labels) = &self.labels {
            for l in labels {
                h.update((l.len() as u32).to_le_bytes());
                h.update(l.as_bytes());
            }
        }
        h.update((self.edges.len() as u32).to_le_bytes());
        for (a, b) in &self.edges {
            h.update(a.to_le_bytes());
            h.update(b.to_le_bytes());
        }
        let bytes = h.finalize();
        let mut s = String::from("sha256:");
        for b in bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

struct Leaf {
    cert: Certificate,
    perm: Vec<u32>,
}

struct Search<'a> {
    dense: &'a Dense,
    first: Option<Leaf>,
    best: Option<Leaf>,
    automorphisms: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn run(&mut self, colours: Vec<u32>, prefix: &mut Vec<u32>) {
        let n = self.dense.len();
        if count_classes(&colours) == n {
            self.leaf(colours);
            return;
        }
        let mut sizes = vec![0usize; n];
        for c in &colours {
            sizes[*c as usize] += 1;
        }
        let target = sizes.iter().position(|s| *s > 1).expect("non-discrete partition") as u32;
        let cell: Vec<u32> = (0..n as u32).filter(|v| colours[*v as usize] == target).collect();
        let mut explored: Vec<u32> = Vec::new();
        for w in cell {
            if self.same_orbit_as_explored(w, prefix, &explored) {
                continue;
            }
            let keys: Vec<(u32, bool)> = colours.iter().enumerate().map(|(v, c)| (*c, v as u32 != w)).collect();
            let mut child = ordinal(&keys);
            self.dense.refine(&mut child);
            prefix.push(w);
            self.run(child, prefix);
            prefix.pop();
            explored.push(w);
        }
    }

    fn same_orbit_as_explored(&self, w: u32, prefix: &[u32], explored: &[u32]) -> bool {
        if explored.is_empty() {
            return false;
        }
        let n = self.dense.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(p: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while p[r as usize] != r {
                r = p[r as usize];
            }
            let mut y = x;
            while p[y as usize] != r {
                let next = p[y as usize];
                p[y as usize] = r;
                y = next;
            }
            r
        }
        let mut any = false;
        for gamma in &self.automorphisms {
            if prefix.iter().any(|v| gamma[*v as usize] != *v) {
                continue;
            }
            any = true;
            for (v, image) in gamma.iter().enumerate() {
                let a = find(&mut parent, v as u32);
                let b = find(&mut parent, *image);
                if a != b {
                    parent[a as usize] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, w);
        explored.iter().any(|e| find(&mut parent, *e) == root)
    }

    fn leaf(&mut self, perm: Vec<u32>) {
        let cert = self.dense.certificate(&perm);
        let leaf = Leaf { cert, perm };
        let Some(first) = &self.first else {
            self.best = Some(Leaf {
                cert: leaf.cert.clone(),
                perm: leaf.perm.clone(),
            });
            self.first = Some(leaf);
            return;
        };
        let best = self.best.as_ref().expect("best is set with first");
        let twin = if leaf.cert == first.cert {
            Some(first)
        } else if leaf.cert == best.cert {
            Some(best)
        } else {
            None
        };
        if let Some(other) = twin {
            let mut inv = vec![0u32; other.perm.len()];
            for (v, p) in other.perm.iter().enumerate() {
                inv[*p as usize] = v as u32;
            }
            let gamma: Vec<u32> = leaf.perm.iter().map(|p| inv[*p as usize]).collect();
            if gamma.iter().enumerate().any(|(v, g)| v as u32 != *g) {
                self.automorphisms.push(gamma);
            }
        } else if leaf.cert < best.cert {
            self.best = Some(leaf);
        }
    }
}

fn canonical_certificate(g: &ExtensionalDigraph, cfg: &IsoConfig) -> Result<Certificate> {
    let dense = Dense::new(g, cfg)?;
    let mut colours = dense.initial_colours();
    dense.refine(&mut colours);
    let mut search = Search {
        dense: &dense,
        first: None,
        best: None,
        automorphisms: Vec::new(),
    };
    if dense.len() == 0 {
        return Ok(dense.certificate(&[]));
    }
    search.run(colours, &mut Vec::new());
    Ok(search.best.expect("search visits at least one leaf").cert)
}

/// Fingerprint that is equal for two graphs exactly when they are isomorphic.
pub fn canonical_fingerprint(g: &ExtensionalDigraph) -> Result<String> {
    canonical_fingerprint_with(g, &IsoConfig::default())
}

pub fn canonical_fingerprint_with(g: &ExtensionalDigraph, cfg: &IsoConfig) -> Result<String> {
    Ok(canonical_certificate(g, cfg)?.digest())
}

pub fn is_isomorphic(a: &ExtensionalDigraph, b: &ExtensionalDigraph) -> Result<bool> {
    is_isomorphic_with(a, b, &IsoConfig::default())
}

pub fn is_isomorphic_with(a: &ExtensionalDigraph, b: &ExtensionalDigraph, cfg: &IsoConfig) -> Result<bool> {
    for g in [a, b] {
        if g.len() > cfg.max_nodes {
            return Err(Error::SizeLimit {
                nodes: g.len(),
                bound: cfg.max_nodes,
            });
        }
    }
    if a.len() != b.len() || a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    Ok(canonical_certificate(a, cfg)? == canonical_certificate(b, cfg)?)
}
