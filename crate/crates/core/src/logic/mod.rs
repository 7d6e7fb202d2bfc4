//! First-order logic over `{∈, =}` evaluated in finite digraphs.

mod ast;
mod axioms;
mod eval;
mod parser;

pub use ast::Formula;
pub use axioms::{axiom_formula, chain_code_formula, check_axiom, quine_code_formula, Axiom, AxiomReport};
pub use eval::{comprehension_instance, define_class, eval, ComprehensionReport, Env, Prepared};
pub use parser::parse;
