use std::fmt::Write;

use super::{BddArena, BddRef};

/// Graphviz rendering for debugging. Dashed edges are low (0) edges.
pub fn to_dot(arena: &BddArena, root: BddRef, name_of: impl Fn(u32) -> String) -> String {
    let mut s = String::from("digraph bdd {\n  node [shape=circle];\n");
    s.push_str("  n0 [label=\"0\", shape=box];\n  n1 [label=\"1\", shape=box];\n");
    for n in arena.postorder(root) {
        let _ = writeln!(s, "  n{} [label=\"{}\"];", n.raw(), name_of(arena.level(n)));
        let _ = writeln!(s, "  n{} -> n{} [style=dashed];", n.raw(), arena.low(n).raw());
        let _ = writeln!(s, "  n{} -> n{};", n.raw(), arena.high(n).raw());
    }
    s.push_str("}\n");
    s
}
