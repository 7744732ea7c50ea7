//! Circuits with partial evaluation, their degree-reduction view, QDIMACS
//! ingestion and a brute-force oracle.

mod brute;
mod cpd;
mod dag;
mod qdimacs;
pub mod random;
mod varset;

use thiserror::Error;

pub use brute::{brute_force_count, BoolEvaluator, BRUTE_MAX_COUNTED};
pub use cpd::{chain_len, cpd_child_refs, cpd_topo, reduced_var, top_ref, Cpd, CpdRef};
pub use dag::{CpeDag, NodeId, NodeKind};
pub use qdimacs::{parse_order, parse_qdimacs, Qdimacs, Quant};
pub use varset::VarSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid variable order: {0}")]
    BadOrder(String),
    #[error("variable level {0} out of range")]
    LevelOutOfRange(u32),
    #[error("counted variables must include every free variable of the root")]
    CountedMissesFree,
    #[error("{n} variables exceed the brute-force limit of {max}")]
    TooManyVariables { n: usize, max: usize },
}
