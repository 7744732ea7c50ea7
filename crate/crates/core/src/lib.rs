//! Certified model counting for circuits with partial evaluation.
//!
//! A BDD-based solver computes the number of satisfying assignments and, by
//! recording the intermediate states of each breadth-first Apply, doubles as
//! the honest prover of an interactive protocol. The verifier checks the
//! count in time polynomial in the circuit, with error probability bounded
//! by `4 n |phi| / p` over the field of order `p = 2^61 - 1`.

pub mod bdd;
pub mod circuit;
pub mod ebdd;
pub mod field;
pub mod protocol;
pub mod unipoly;

pub use field::FieldElem;
pub use unipoly::UniPoly;
