//! Exhaustive evaluation, used as an oracle for small instances.

use num_bigint::BigUint;
use rustc_hash::FxHashMap;

use super::dag::{CpeDag, NodeId, NodeKind};
use super::CircuitError;

/// Largest counted-variable set `brute_force_count` accepts.
pub const BRUTE_MAX_COUNTED: usize = 25;

/// Boolean evaluator over complete assignments packed into a `u64`.
///
/// Results are memoized per node on the assignment restricted to the node's
/// free variables, so repeated sub-circuits under partial evaluation are not
/// re-evaluated.
pub struct BoolEvaluator<'a> {
    dag: &'a CpeDag,
    masks: Vec<u64>,
    memo: FxHashMap<(u32, u64), bool>,
}

impl<'a> BoolEvaluator<'a> {
    /// # Panics
    /// If the dag has 64 or more levels.
    pub fn new(dag: &'a CpeDag) -> Self {
        assert!(dag.num_levels() < 64, "bitmask evaluation needs fewer than 64 levels");
        let masks =
            (0..dag.arena_len() as u32).map(|i| dag.free(NodeId(i)).iter_asc().fold(0u64, |m, l| m | 1 << l)).collect();
        BoolEvaluator { dag, masks, memo: FxHashMap::default() }
    }

    pub fn eval(&mut self, id: NodeId, bits: u64) -> bool {
        let key = (id.0, bits & self.masks[id.index()]);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = match self.dag.kind(id) {
            NodeKind::True => true,
            NodeKind::False => false,
            NodeKind::Var(l) => bits >> l & 1 == 1,
            NodeKind::Not(c) => !self.eval(c, bits),
            NodeKind::And(l, r) => self.eval(l, bits) && self.eval(r, bits),
            NodeKind::Or(l, r) => self.eval(l, bits) || self.eval(r, bits),
            NodeKind::PEval { var, value, child } => {
                let bits = (bits & !(1u64 << var)) | (u64::from(value) << var);
                self.eval(child, bits)
            }
        };
        self.memo.insert(key, v);
        v
    }
}

/// Number of assignments to the counted variables that satisfy the root.
pub fn brute_force_count(dag: &CpeDag) -> Result<BigUint, CircuitError> {
    let n = dag.num_counted();
    if n > BRUTE_MAX_COUNTED {
        return Err(CircuitError::TooManyVariables { n, max: BRUTE_MAX_COUNTED });
    }
    if dag.num_levels() >= 64 {
        return Err(CircuitError::TooManyVariables { n: dag.num_levels() as usize, max: 63 });
    }
    let levels: Vec<u32> = dag.counted().iter_asc().collect();
    let mut eval = BoolEvaluator::new(dag);
    let mut count: u64 = 0;
    for a in 0u64..(1u64 << n) {
        let bits = levels.iter().enumerate().fold(0u64, |acc, (i, &l)| acc | ((a >> i) & 1) << l);
        if eval.eval(dag.root(), bits) {
            count += 1;
        }
    }
    Ok(BigUint::from(count))
}
