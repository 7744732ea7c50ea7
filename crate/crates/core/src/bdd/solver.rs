use num_bigint::BigUint;

use super::{BddArena, BddRef, BinOp};
use crate::circuit::{CpeDag, NodeId, NodeKind};

/// Builds a BDD for every reachable node, children first. Binary nodes are
/// combined by `binary`, which receives the circuit node, the operator and
/// the operand BDDs. Unreachable nodes map to `FALSE`.
pub fn build_bottom_up<F>(dag: &CpeDag, arena: &mut BddArena, mut binary: F) -> Vec<BddRef>
where
    F: FnMut(&mut BddArena, NodeId, BinOp, BddRef, BddRef) -> BddRef,
{
    let mut bdds = vec![BddRef::FALSE; dag.arena_len()];
    for id in dag.topo_order().into_iter().rev() {
        let b = match dag.kind(id) {
            NodeKind::True => BddRef::TRUE,
            NodeKind::False => BddRef::FALSE,
            NodeKind::Var(l) => arena.var(l),
            NodeKind::Not(c) => arena.negate(bdds[c.index()]),
            NodeKind::PEval { var, value, child } => arena.restrict(bdds[child.index()], var, value),
            NodeKind::And(l, r) => binary(arena, id, BinOp::And, bdds[l.index()], bdds[r.index()]),
            NodeKind::Or(l, r) => binary(arena, id, BinOp::Or, bdds[l.index()], bdds[r.index()]),
        };
        bdds[id.index()] = b;
    }
    bdds
}

#[derive(Debug)]
pub struct SolveResult {
    pub arena: BddArena,
    pub root: BddRef,
    /// BDD of each circuit node, indexed by node id.
    pub node_bdds: Vec<BddRef>,
    /// Models over the dag's counted variables.
    pub count: BigUint,
}

impl SolveResult {
    pub fn satisfiable(&self) -> bool {
        self.root != BddRef::FALSE
    }
}

/// Plain BDD solving with depth-first Apply; the Apply cache is cleared
/// after each circuit node.
pub fn solve(dag: &CpeDag) -> SolveResult {
    let mut arena = BddArena::new();
    let node_bdds = build_bottom_up(dag, &mut arena, |arena, _, op, u, v| {
        let r = arena.apply(op, u, v);
        arena.clear_cache();
        r
    });
    let root = node_bdds[dag.root().index()];
    let count = arena.count_models_in(root, dag.counted());
    SolveResult { arena, root, node_bdds, count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{brute_force_count, random::random_cpe, random::RandomCpeParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn solve_matches_brute_force_on_random_circuits() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            let dag = random_cpe(&mut rng, &RandomCpeParams { num_vars: 7, ..Default::default() });
            let res = solve(&dag);
            assert_eq!(res.count, brute_force_count(&dag).unwrap());
        }
    }

    #[test]
    fn node_bdds_agree_with_boolean_evaluation() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for _ in 0..30 {
            let dag = random_cpe(&mut rng, &RandomCpeParams { num_vars: 5, ..Default::default() });
            let res = solve(&dag);
            for id in dag.topo_order() {
                for bits in 0u64..32 {
                    let bits = bits << 1;
                    let want = dag.eval_bool(id, bits);
                    let got = res.arena.eval_bits(res.node_bdds[id.index()], &|l| bits >> l & 1 == 1);
                    assert_eq!(got, want);
                }
            }
        }
    }
}
