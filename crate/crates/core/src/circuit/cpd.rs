//! The degree-reduction view of a circuit.
//!
//! Above every binary node `b` with free variables `g_1 > ... > g_k` (by
//! level) sits a chain of `k` reduction nodes. `CpdRef { node: b, red: j }`
//! addresses the chain entry with `j` reductions applied:
//! `(b, j) = delta_{g_j}(b, j-1)`, so `(b, 0)` is the operator itself and
//! `(b, k)` is the top of the chain. The innermost reduction acts on the
//! highest level. Non-binary nodes have only `red = 0`.

use super::dag::{CpeDag, NodeId};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CpdRef {
    pub node: NodeId,
    pub red: u32,
}

impl CpdRef {
    pub fn new(node: NodeId, red: u32) -> Self {
        CpdRef { node, red }
    }
}

/// Number of reduction nodes above `node`.
pub fn chain_len(dag: &CpeDag, node: NodeId) -> u32 {
    if dag.kind(node).is_binary() {
        dag.free(node).len() as u32
    } else {
        0
    }
}

/// The reference standing for `conv(node)`.
pub fn top_ref(dag: &CpeDag, node: NodeId) -> CpdRef {
    CpdRef::new(node, chain_len(dag, node))
}

/// Variable reduced by the chain entry `r` (`g_j` for `r.red = j > 0`).
pub fn reduced_var(dag: &CpeDag, r: CpdRef) -> Option<u32> {
    if r.red == 0 {
        return None;
    }
    dag.free(r.node).iter_desc().nth(r.red as usize - 1)
}

pub fn cpd_child_refs(dag: &CpeDag, r: CpdRef) -> Vec<CpdRef> {
    if r.red > 0 {
        return vec![CpdRef::new(r.node, r.red - 1)];
    }
    dag.kind(r.node).children().map(|c| top_ref(dag, c)).collect()
}

/// All references reachable from the root, parents before children.
///
/// Each chain is emitted contiguously from its top down to the operator.
pub fn cpd_topo(dag: &CpeDag) -> Vec<CpdRef> {
    Cpd::new(dag).refs
}

/// Indexed enumeration of the references, with the free levels of each
/// node in descending order.
#[derive(Clone, Debug)]
pub struct Cpd {
    refs: Vec<CpdRef>,
    start: Vec<u32>,
    chain: Vec<u32>,
    free_levels: Vec<Vec<u32>>,
}

impl Cpd {
    pub fn new(dag: &CpeDag) -> Self {
        let order = dag.topo_order();
        let mut start = vec![u32::MAX; dag.arena_len()];
        let mut chain = vec![0; dag.arena_len()];
        let mut free_levels = vec![Vec::new(); dag.arena_len()];
        let mut refs = Vec::new();
        for id in order {
            start[id.index()] = refs.len() as u32;
            free_levels[id.index()] = dag.free(id).to_vec_desc();
            let k = chain_len(dag, id);
            chain[id.index()] = k;
            for red in (0..=k).rev() {
                refs.push(CpdRef::new(id, red));
            }
        }
        Cpd { refs, start, chain, free_levels }
    }

    pub fn refs(&self) -> &[CpdRef] {
        &self.refs
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }

    pub fn get(&self, ordinal: u32) -> Option<CpdRef> {
        self.refs.get(ordinal as usize).copied()
    }

    /// Position of `r` in the topological enumeration.
    pub fn ordinal(&self, r: CpdRef) -> Option<u32> {
        let s = *self.start.get(r.node.index())?;
        if s == u32::MAX {
            return None;
        }
        let k = self.chain_len(r.node);
        (r.red <= k).then(|| s + (k - r.red))
    }

    pub fn is_reachable(&self, node: NodeId) -> bool {
        self.start.get(node.index()).is_some_and(|&s| s != u32::MAX)
    }

    /// Free levels of a reachable node, highest first.
    pub fn free_levels(&self, node: NodeId) -> &[u32] {
        &self.free_levels[node.index()]
    }

    pub fn chain_len(&self, node: NodeId) -> u32 {
        self.chain[node.index()]
    }

    /// The reduced variable of a chain entry, `g_j` for `red = j > 0`.
    pub fn reduced_var(&self, r: CpdRef) -> Option<u32> {
        if r.red == 0 {
            None
        } else {
            self.free_levels(r.node).get(r.red as usize - 1).copied()
        }
    }

    pub fn top(&self, dag: &CpeDag, node: NodeId) -> CpdRef {
        top_ref(dag, node)
    }

    pub fn is_leaf(&self, dag: &CpeDag, r: CpdRef) -> bool {
        r.red == 0 && dag.kind(r.node).is_leaf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::dag::NodeKind;

    fn forall_implication() -> (CpeDag, [NodeId; 5]) {
        let mut d = CpeDag::new(2);
        let x = d.var(1);
        let y = d.var(2);
        let nx = d.not(x);
        let xy = d.and(x, y);
        let body = d.or(nx, xy);
        let root = d.forall(2, body);
        d.set_root(root);
        (d, [x, y, xy, body, root])
    }

    #[test]
    fn single_var_has_single_ref() {
        let mut d = CpeDag::new(1);
        let x = d.var(1);
        d.set_root(x);
        assert_eq!(cpd_topo(&d), vec![CpdRef::new(x, 0)]);
    }

    #[test]
    fn binary_node_chain_precedes_operator_and_children() {
        let mut d = CpeDag::new(2);
        let x = d.var(1);
        let y = d.var(2);
        let a = d.and(x, y);
        d.set_root(a);
        let refs = cpd_topo(&d);
        assert_eq!(&refs[..3], &[CpdRef::new(a, 2), CpdRef::new(a, 1), CpdRef::new(a, 0)]);
        assert_eq!(refs.len(), 5);
        assert_eq!(reduced_var(&d, CpdRef::new(a, 1)), Some(2));
        assert_eq!(reduced_var(&d, CpdRef::new(a, 2)), Some(1));
    }

    #[test]
    fn child_refs_follow_conv() {
        let (d, [x, _y, xy, body, _root]) = forall_implication();
        assert_eq!(cpd_child_refs(&d, CpdRef::new(xy, 2)), vec![CpdRef::new(xy, 1)]);
        let nx = match d.kind(body) {
            NodeKind::Or(l, _) => l,
            _ => unreachable!(),
        };
        assert_eq!(cpd_child_refs(&d, CpdRef::new(nx, 0)), vec![CpdRef::new(x, 0)]);
        assert_eq!(cpd_child_refs(&d, CpdRef::new(body, 0)), vec![CpdRef::new(nx, 0), CpdRef::new(xy, 2)]);
        assert!(cpd_child_refs(&d, CpdRef::new(x, 0)).is_empty());
    }

    #[test]
    fn forall_implication_chain_lengths() {
        let (d, [_, _, xy, body, root]) = forall_implication();
        // The root conjunction has only x free; the inner operators have x and y.
        assert_eq!(chain_len(&d, root), 1);
        assert_eq!(chain_len(&d, body), 2);
        assert_eq!(chain_len(&d, xy), 2);
        let cpd = Cpd::new(&d);
        let reductions = cpd.refs().iter().filter(|r| r.red > 0).count();
        assert_eq!(reductions, 5);
        assert_eq!(cpd.len(), d.size() + reductions);
    }

    #[test]
    fn ordinals_are_consistent_with_topo_order() {
        let (d, _) = forall_implication();
        let cpd = Cpd::new(&d);
        for (i, &r) in cpd.refs().iter().enumerate() {
            assert_eq!(cpd.ordinal(r), Some(i as u32));
            assert_eq!(cpd.get(i as u32), Some(r));
            for c in cpd_child_refs(&d, r) {
                assert!(cpd.ordinal(c).unwrap() > i as u32);
            }
            assert_eq!(cpd.reduced_var(r), reduced_var(&d, r));
        }
        assert_eq!(cpd.refs()[0], top_ref(&d, d.root()));
    }
}
