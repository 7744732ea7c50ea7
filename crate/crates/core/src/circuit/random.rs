//! Random circuit generation for property tests and benchmarks.

use rand::Rng;

use super::dag::{CpeDag, NodeId};
use super::varset::VarSet;

#[derive(Clone, Copy, Debug)]
pub struct RandomCpeParams {
    /// Variables live on levels `1..=num_vars`.
    pub num_vars: u32,
    /// Upper bound on the number of stored nodes (including constants).
    pub max_nodes: usize,
    /// Probability of counting over all variables rather than `free(root)`.
    pub pad_counted: f64,
}

impl Default for RandomCpeParams {
    fn default() -> Self {
        RandomCpeParams { num_vars: 6, max_nodes: 30, pad_counted: 0.25 }
    }
}

/// Generates a random circuit using every node kind, with partial evaluation
/// applied only to variables that are free in its operand.
pub fn random_cpe<R: Rng + ?Sized>(rng: &mut R, params: &RandomCpeParams) -> CpeDag {
    assert!(params.num_vars >= 1);
    let mut dag = CpeDag::new(params.num_vars);
    let mut pool: Vec<NodeId> = Vec::new();
    let leaves = rng.gen_range(1..=params.num_vars.min(4) + 1);
    for _ in 0..leaves {
        let l = rng.gen_range(1..=params.num_vars);
        pool.push(dag.var(l));
    }
    if rng.gen_bool(0.2) {
        pool.push(dag.constant(rng.gen()));
    }
    let mut last = pool[pool.len() - 1];
    let mut attempts = 0;
    while dag.arena_len() < params.max_nodes && attempts < 8 * params.max_nodes {
        attempts += 1;
        // Prefer recent nodes so the circuit grows in depth.
        let pick = |rng: &mut R, pool: &[NodeId]| {
            let n = pool.len();
            let back = rng.gen_range(0..n.min(6));
            if rng.gen_bool(0.7) {
                pool[n - 1 - back]
            } else {
                pool[rng.gen_range(0..n)]
            }
        };
        let before = dag.arena_len();
        let node = match rng.gen_range(0..100) {
            0..=9 => {
                let l = rng.gen_range(1..=params.num_vars);
                dag.var(l)
            }
            10..=24 => {
                let a = pick(rng, &pool);
                dag.not(a)
            }
            25..=49 => {
                let (a, b) = (pick(rng, &pool), pick(rng, &pool));
                dag.and(a, b)
            }
            50..=74 => {
                let (a, b) = (pick(rng, &pool), pick(rng, &pool));
                dag.or(a, b)
            }
            _ => {
                let a = pick(rng, &pool);
                let free: Vec<u32> = dag.free(a).iter_asc().collect();
                if free.is_empty() {
                    continue;
                }
                let x = free[rng.gen_range(0..free.len())];
                dag.peval(x, rng.gen(), a)
            }
        };
        if dag.arena_len() > before {
            pool.push(node);
            last = node;
        }
    }
    dag.set_root(last);
    if rng.gen_bool(params.pad_counted) {
        dag.set_counted(VarSet::range(params.num_vars)).expect("full range covers every free variable");
    }
    dag
}
