use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{ExtensionalDigraph, NodeId};
use crate::logic::ast::Formula;

/// Variable assignment; must bind every free variable.
pub type Env = BTreeMap<String, NodeId>;

/// Where a quantifier looks for witnesses. Restricted ranges are only used
/// when the body forces membership, so they never change the result.
#[derive(Debug, Clone, Copy)]
enum Range {
    All,
    ContainersOf(usize),
    MembersOf(usize),
}

#[derive(Debug)]
enum Code {
    Member(usize, usize),
    Equal(usize, usize),
    Not(Box<Code>),
    And(Box<Code>, Box<Code>),
    Or(Box<Code>, Box<Code>),
    Implies(Box<Code>, Box<Code>),
    Iff(Box<Code>, Box<Code>),
    Exists(usize, Range, Box<Code>),
    ForAll(usize, Box<Code>),
}

/// Membership atoms `(x, y)` meaning `x in y` that every model of `f`
/// satisfies, for the current values of the variables involved.
fn forced_memberships(f: &Formula) -> Vec<(String, String)> {
    match f {
        Formula::Member(x, y) => vec![(x.clone(), y.clone())],
        Formula::And(a, b) => {
            let mut v = forced_memberships(a);
            v.extend(forced_memberships(b));
            v
        }
        Formula::Or(a, b) => {
            let right = forced_memberships(b);
            forced_memberships(a).into_iter().filter(|m| right.contains(m)).collect()
        }
        Formula::Exists(v, body) => forced_memberships(body)
            .into_iter()
            .filter(|(x, y)| x != v && y != v)
            .collect(),
        Formula::ForAll(z, body) => {
            let mut out: Vec<(String, String)> = forced_memberships(body)
                .into_iter()
                .filter(|(x, y)| x != z && y != z)
                .collect();
            // all z. (z in b <-> (... | z = w | ...)) forces w in b, also as
            // a conjunct of the body.
            let mut parts = Vec::new();
            conjuncts(body, &mut parts);
            for part in parts {
                let (b, rhs) = match part {
                    Formula::Iff(l, r) => match (&**l, &**r) {
                        (Formula::Member(a, b), rhs) if a == z => (b, rhs),
                        (lhs, Formula::Member(a, b)) if a == z => (b, lhs),
                        _ => continue,
                    },
                    Formula::Implies(l, r) => match &**r {
                        Formula::Member(a, b) if a == z => (b, &**l),
                        _ => continue,
                    },
                    _ => continue,
                };
                if b == z {
                    continue;
                }
                let mut ds = Vec::new();
                disjuncts(rhs, &mut ds);
                for d in ds {
                    if let Formula::Equal(l, r) = d {
                        let w = if l == z { r } else if r == z { l } else { continue };
                        if w != z {
                            out.push((w.clone(), b.clone()));
                        }
                    }
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other),
    }
}

fn disjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Or(a, b) => {
            disjuncts(a, out);
            disjuncts(b, out);
        }
        other => out.push(other),
    }
}

struct Compiler {
    scope: Vec<(String, usize)>,
    slots: usize,
}

impl Compiler {
    fn slot(&self, v: &str) -> Result<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    }

    fn bind(&mut self, v: &str) -> usize {
        let s = self.slots;
        self.slots += 1;
        self.scope.push((v.to_string(), s));
        s
    }

    fn compile(&mut self, f: &Formula) -> Result<Code> {
        let two = |c: &mut Self, a: &Formula, b: &Formula| -> Result<(Box<Code>, Box<Code>)> {
            Ok((Box::new(c.compile(a)?), Box::new(c.compile(b)?)))
        };
        Ok(match f {
            Formula::Member(x, y) => Code::Member(self.slot(x)?, self.slot(y)?),
            Formula::Equal(x, y) => Code::Equal(self.slot(x)?, self.slot(y)?),
            Formula::Not(a) => Code::Not(Box::new(self.compile(a)?)),
            Formula::And(a, b) => {
                let (a, b) = two(self, a, b)?;
                Code::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = two(self, a, b)?;
                Code::Or(a, b)
            }
            Formula::Implies(a, b) => {
                let (a, b) = two(self, a, b)?;
                Code::Implies(a, b)
            }
            Formula::Iff(a, b) => {
                let (a, b) = two(self, a, b)?;
                Code::Iff(a, b)
            }
            Formula::Exists(v, body) => {
                let mut range = Range::All;
                for (x, y) in forced_memberships(body) {
                    if y == *v && x != *v {
                        if let Ok(s) = self.slot(&x) {
                            range = Range::ContainersOf(s);
                            break;
                        }
                    } else if x == *v && y != *v {
                        if let Ok(s) = self.slot(&y) {
                            range = Range::MembersOf(s);
                            break;
                        }
                    }
                }
                let s = self.bind(v);
                let body = self.compile(body)?;
                self.scope.pop();
                Code::Exists(s, range, Box::new(body))
            }
            Formula::ForAll(v, body) => {
                let s = self.bind(v);
                let body = self.compile(body)?;
                self.scope.pop();
                Code::ForAll(s, Box::new(body))
            }
        })
    }
}

/// A formula compiled against a graph, ready for repeated evaluation.
pub struct Prepared<'g> {
    g: &'g ExtensionalDigraph,
    containers: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
    code: Code,
    free: Vec<(String, usize)>,
    slots: usize,
}

impl<'g> Prepared<'g> {
    pub fn new(g: &'g ExtensionalDigraph, f: &Formula) -> Result<Self> {
        let free: Vec<String> = f.free_vars().into_iter().collect();
        let mut c = Compiler {
            scope: Vec::new(),
            slots: 0,
        };
        let free: Vec<(String, usize)> = free.iter().map(|v| (v.clone(), c.bind(v))).collect();
        let code = c.compile(f)?;
        let members = (0..g.len())
            .map(|i| g.members_at(i).iter().map(|m| g.index_of(*m).expect("members are nodes")).collect())
            .collect();
        Ok(Self {
            g,
            containers: g.container_indices(),
            members,
            code,
            free,
            slots: c.slots,
        })
    }

    pub fn free_vars(&self) -> impl Iterator<Item = &str> {
        self.free.iter().map(|(v, _)| v.as_str())
    }

    pub fn eval(&self, env: &Env) -> Result<bool> {
        let mut vals = vec![usize::MAX; self.slots];
        for (v, s) in &self.free {
            let id = env.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            vals[*s] = self.g.index_of(*id).ok_or(Error::UnknownNode(*id))?;
        }
        Ok(self.run(&self.code, &mut vals))
    }

    fn run(&self, c: &Code, vals: &mut [usize]) -> bool {
        match c {
            Code::Member(x, y) => self.members[vals[*y]].binary_search(&vals[*x]).is_ok(),
            Code::Equal(x, y) => vals[*x] == vals[*y],
            Code::Not(a) => !self.run(a, vals),
            Code::And(a, b) => self.run(a, vals) && self.run(b, vals),
            Code::Or(a, b) => self.run(a, vals) || self.run(b, vals),
            Code::Implies(a, b) => !self.run(a, vals) || self.run(b, vals),
            Code::Iff(a, b) => self.run(a, vals) == self.run(b, vals),
            Code::Exists(s, range, body) => match range {
                Range::All => (0..self.g.len()).any(|i| {
                    vals[*s] = i;
                    self.run(body, vals)
                }),
                Range::ContainersOf(src) | Range::MembersOf(src) => {
                    let list = match range {
                        Range::ContainersOf(_) => &self.containers[vals[*src]],
                        _ => &self.members[vals[*src]],
                    };
                    list.iter().any(|i| {
                        vals[*s] = *i;
                        self.run(body, vals)
                    })
                }
            },
            Code::ForAll(s, body) => (0..self.g.len()).all(|i| {
                vals[*s] = i;
                self.run(body, vals)
            }),
        }
    }
}

/// Tarskian satisfaction with quantifiers over all nodes of `g`.
pub fn eval(g: &ExtensionalDigraph, f: &Formula, env: &Env) -> Result<bool> {
    Prepared::new(g, f)?.eval(env)
}

fn single_free_var(f: &Formula) -> Result<String> {
    let free = f.free_vars();
    if free.len() != 1 {
        return Err(Error::Arity(free.into_iter().collect()));
    }
    Ok(free.into_iter().next().unwrap())
}

/// Nodes satisfying a formula with exactly one free variable.
pub fn define_class(g: &ExtensionalDigraph, f: &Formula) -> Result<BTreeSet<NodeId>> {
    let var = single_free_var(f)?;
    let prepared = Prepared::new(g, f)?;
    let mut env = Env::new();
    let mut out = BTreeSet::new();
    for id in g.node_ids() {
        env.insert(var.clone(), *id);
        if prepared.eval(&env)? {
            out.insert(*id);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComprehensionReport {
    /// `{z ∈ ext(x) : f(z)}`, sorted.
    pub subset: Vec<NodeId>,
    /// A node whose extension is exactly `subset`.
    pub witness: Option<NodeId>,
}

impl ComprehensionReport {
    pub fn passed(&self) -> bool {
        self.witness.is_some()
    }
}

pub fn comprehension_instance(g: &ExtensionalDigraph, x: NodeId, f: &Formula) -> Result<ComprehensionReport> {
    let var = single_free_var(f)?;
    let prepared = Prepared::new(g, f)?;
    let mut env = Env::new();
    let mut subset = Vec::new();
    for z in g.members(x)? {
        env.insert(var.clone(), *z);
        if prepared.eval(&env)? {
            subset.push(*z);
        }
    }
    let witness = g.extension_index().get(subset.as_slice()).copied();
    Ok(ComprehensionReport { subset, witness })
}
