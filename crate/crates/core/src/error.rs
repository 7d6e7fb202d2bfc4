use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("edge ({0}, {1}) references a node outside the graph")]
    DanglingEdge(NodeId, NodeId),

    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),

    #[error("graph is not extensional: {0} and {1} share an extension")]
    NonExtensional(NodeId, NodeId),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        limit: u64,
    },

    #[error("size limit exceeded: {nodes} nodes, bound is {bound}")]
    SizeLimit { nodes: usize, bound: usize },

    #[error("extensionality clash: new node would share its extension with {existing} ({detail})")]
    ExtensionalityClash { existing: NodeId, detail: String },

    #[error("dred condition {condition} violated: {detail}")]
    DredCondition { condition: u8, detail: String },

    #[error("not a depth-ranked digraph: {0}")]
    NotDred(String),

    #[error("node {0} has empty extension")]
    EmptyExtension(NodeId),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("expected exactly one free variable, found {0:?}")]
    Arity(Vec<String>),

    #[error("invalid code spec: {0}")]
    InvalidSpec(String),

    #[error("decoration failed: {0}")]
    Decoration(String),

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
