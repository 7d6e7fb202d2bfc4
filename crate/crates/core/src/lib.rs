//! Extensional digraphs, their deficiency completions and depth-ranked
//! variants, with first-order evaluation and an independent oracle.

pub mod cli;
pub mod completion;
pub mod dred;
pub mod error;
pub mod graph;
pub mod io;
pub mod iso;
pub mod logic;
pub mod oracle;
pub mod seeds;

pub use error::{Error, Result};
pub use graph::{ExtensionalDigraph, NodeId, Provenance};
