//! Hash-consed reduced ordered BDDs.
//!
//! Levels follow the circuit convention: level 1 is nearest the terminals and
//! the highest level sits at the root. Terminals have level 0. Complement
//! edges are not used, so every handle denotes exactly one multilinear
//! polynomial.

mod dot;
mod eval;
mod solver;

use num_bigint::BigUint;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::circuit::VarSet;

pub use dot::to_dot;
pub use eval::{eval_bdd, BddError, BddEvaluator, Lin, PartialAssignment};
pub use solver::{build_bottom_up, solve, SolveResult};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BddRef(u32);

impl BddRef {
    pub const FALSE: BddRef = BddRef(0);
    pub const TRUE: BddRef = BddRef(1);

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOp {
    And,
    Or,
}

impl BinOp {
    pub fn eval_bool(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
        }
    }

    /// Arithmetisation: `a*b` for conjunction, `a + b - a*b` for disjunction.
    pub fn eval_field(self, a: crate::FieldElem, b: crate::FieldElem) -> crate::FieldElem {
        match self {
            BinOp::And => a * b,
            BinOp::Or => a + b - a * b,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    level: u32,
    low: BddRef,
    high: BddRef,
}

/// Node store with a unique table and an Apply cache.
#[derive(Clone, Debug)]
pub struct BddArena {
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, u32, u32), BddRef>,
    cache: FxHashMap<(BinOp, u32, u32), BddRef>,
}

impl Default for BddArena {
    fn default() -> Self {
        Self::new()
    }
}

impl BddArena {
    pub fn new() -> Self {
        let terminal = |b| Node { level: 0, low: BddRef::from_bool(b), high: BddRef::from_bool(b) };
        BddArena {
            nodes: vec![terminal(false), terminal(true)],
            unique: FxHashMap::default(),
            cache: FxHashMap::default(),
        }
    }

    /// Number of stored nodes, including both terminals.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn level(&self, u: BddRef) -> u32 {
        self.nodes[u.index()].level
    }

    #[inline]
    pub fn low(&self, u: BddRef) -> BddRef {
        self.nodes[u.index()].low
    }

    #[inline]
    pub fn high(&self, u: BddRef) -> BddRef {
        self.nodes[u.index()].high
    }

    /// Cofactors of `u` with respect to `level`; nodes below `level` do not
    /// depend on it.
    #[inline]
    pub fn cofactors(&self, u: BddRef, level: u32) -> (BddRef, BddRef) {
        let n = self.nodes[u.index()];
        if n.level == level && !u.is_terminal() {
            (n.low, n.high)
        } else {
            (u, u)
        }
    }

    /// The reduced node `<level, low, high>`.
    ///
    /// # Panics
    /// If a child's level is not strictly below `level`.
    pub fn mk(&mut self, level: u32, low: BddRef, high: BddRef) -> BddRef {
        if low == high {
            return low;
        }
        assert!(
            level > self.level(low) && level > self.level(high),
            "mk: children must lie strictly below level {level}"
        );
        let key = (level, low.0, high.0);
        if let Some(&r) = self.unique.get(&key) {
            return r;
        }
        let r = BddRef(self.nodes.len() as u32);
        self.nodes.push(Node { level, low, high });
        self.unique.insert(key, r);
        r
    }

    /// The BDD of the single variable at `level`.
    pub fn var(&mut self, level: u32) -> BddRef {
        self.mk(level, BddRef::FALSE, BddRef::TRUE)
    }

    fn apply_terminal(op: BinOp, u: BddRef, v: BddRef) -> Option<BddRef> {
        match op {
            BinOp::And => {
                if u == BddRef::FALSE || v == BddRef::FALSE {
                    Some(BddRef::FALSE)
                } else if u == BddRef::TRUE {
                    Some(v)
                } else if v == BddRef::TRUE || u == v {
                    Some(u)
                } else {
                    None
                }
            }
            BinOp::Or => {
                if u == BddRef::TRUE || v == BddRef::TRUE {
                    Some(BddRef::TRUE)
                } else if u == BddRef::FALSE {
                    Some(v)
                } else if v == BddRef::FALSE || u == v {
                    Some(u)
                } else {
                    None
                }
            }
        }
    }

    /// Depth-first Apply with memoization.
    pub fn apply(&mut self, op: BinOp, u: BddRef, v: BddRef) -> BddRef {
        enum Frame {
            Expand(BddRef, BddRef),
            Build(u32, u32, u32),
        }
        let mut stack = vec![Frame::Expand(u, v)];
        let mut results: Vec<BddRef> = Vec::new();
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Expand(u, v) => {
                    if let Some(r) = Self::apply_terminal(op, u, v) {
                        results.push(r);
                        continue;
                    }
                    let (a, b) = if u <= v { (u.0, v.0) } else { (v.0, u.0) };
                    if let Some(&r) = self.cache.get(&(op, a, b)) {
                        results.push(r);
                        continue;
                    }
                    let level = self.level(u).max(self.level(v));
                    let (u0, u1) = self.cofactors(u, level);
                    let (v0, v1) = self.cofactors(v, level);
                    stack.push(Frame::Build(level, a, b));
                    stack.push(Frame::Expand(u1, v1));
                    stack.push(Frame::Expand(u0, v0));
                }
                Frame::Build(level, a, b) => {
                    let high = results.pop().expect("apply result stack");
                    let low = results.pop().expect("apply result stack");
                    let r = self.mk(level, low, high);
                    self.cache.insert((op, a, b), r);
                    results.push(r);
                }
            }
        }
        results.pop().expect("apply result")
    }

    /// Drops the Apply cache, keeping its allocation proportional to the
    /// most recent use.
    pub fn clear_cache(&mut self) {
        let used = self.cache.len();
        self.cache.clear();
        self.cache.shrink_to(used);
    }

    /// Non-terminal nodes reachable from `u`, children before parents.
    pub fn postorder(&self, u: BddRef) -> Vec<BddRef> {
        self.postorder_above(u, 0)
    }

    /// Like [`postorder`](Self::postorder) but stops at nodes with level `<= floor`.
    fn postorder_above(&self, u: BddRef, floor: u32) -> Vec<BddRef> {
        let mut out = Vec::new();
        if u.is_terminal() || self.level(u) <= floor {
            return out;
        }
        // A node is marked when expanded, not when pushed, so every child is
        // emitted before any of its parents.
        let mut seen: FxHashSet<u32> = FxHashSet::default();
        let mut stack = vec![(u, false)];
        while let Some((n, done)) = stack.pop() {
            if done {
                out.push(n);
                continue;
            }
            if !seen.insert(n.0) {
                continue;
            }
            stack.push((n, true));
            for c in [self.high(n), self.low(n)] {
                if !c.is_terminal() && self.level(c) > floor && !seen.contains(&c.0) {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Swaps the terminals.
    pub fn negate(&mut self, u: BddRef) -> BddRef {
        let mut map: FxHashMap<u32, BddRef> = FxHashMap::default();
        map.insert(0, BddRef::TRUE);
        map.insert(1, BddRef::FALSE);
        for n in self.postorder(u) {
            let (l, h, lv) = (self.low(n), self.high(n), self.level(n));
            let r = self.mk(lv, map[&l.0], map[&h.0]);
            map.insert(n.0, r);
        }
        map[&u.0]
    }

    /// `<x := b> u` for the variable at `level`.
    pub fn restrict(&mut self, u: BddRef, level: u32, b: bool) -> BddRef {
        let mut map: FxHashMap<u32, BddRef> = FxHashMap::default();
        let lookup = |map: &FxHashMap<u32, BddRef>, c: BddRef| map.get(&c.0).copied().unwrap_or(c);
        for n in self.postorder_above(u, level.saturating_sub(1)) {
            let r = if self.level(n) == level {
                if b {
                    self.high(n)
                } else {
                    self.low(n)
                }
            } else {
                let (l, h) = (lookup(&map, self.low(n)), lookup(&map, self.high(n)));
                self.mk(self.level(n), l, h)
            };
            map.insert(n.0, r);
        }
        lookup(&map, u)
    }

    /// Number of satisfying assignments over levels `1..=n`.
    ///
    /// # Panics
    /// If `u` depends on a level above `n`.
    pub fn count_models(&self, u: BddRef, n: u32) -> BigUint {
        assert!(self.level(u) <= n, "count_models: BDD depends on levels above {n}");
        self.count_with_rank(u, n as usize, |l| l as usize)
    }

    /// Number of satisfying assignments over the variables in `vars`, which
    /// must contain the support of `u`.
    pub fn count_models_in(&self, u: BddRef, vars: &VarSet) -> BigUint {
        self.count_with_rank(u, vars.len(), |l| {
            debug_assert!(l == 0 || vars.contains(l), "support not contained in counted set");
            vars.rank(l)
        })
    }

    fn count_with_rank(&self, u: BddRef, total: usize, rank: impl Fn(u32) -> usize) -> BigUint {
        let mut counts: FxHashMap<u32, BigUint> = FxHashMap::default();
        counts.insert(0, BigUint::from(0u32));
        counts.insert(1, BigUint::from(1u32));
        for n in self.postorder(u) {
            let r = rank(self.level(n));
            let part = |c: BddRef| -> BigUint {
                let gap = r - 1 - rank(self.level(c));
                &counts[&c.0] << gap
            };
            let v = part(self.low(n)) + part(self.high(n));
            counts.insert(n.0, v);
        }
        &counts[&u.0] << (total - rank(self.level(u)))
    }

    /// Number of nodes reachable from `u`, terminals included.
    pub fn size(&self, u: BddRef) -> usize {
        let inner = self.postorder(u);
        let mut terminals = [false; 2];
        if u.is_terminal() {
            terminals[u.index()] = true;
        }
        for &n in &inner {
            for c in [self.low(n), self.high(n)] {
                if c.is_terminal() {
                    terminals[c.index()] = true;
                }
            }
        }
        inner.len() + terminals.iter().filter(|&&t| t).count()
    }

    /// Levels `u` depends on.
    pub fn support(&self, u: BddRef) -> VarSet {
        self.postorder(u).into_iter().map(|n| self.level(n)).collect()
    }

    /// Boolean value under a complete assignment (`bits >> l & 1` is level `l`).
    pub fn eval_bits(&self, u: BddRef, bits: &dyn Fn(u32) -> bool) -> bool {
        let mut n = u;
        while !n.is_terminal() {
            n = if bits(self.level(n)) { self.high(n) } else { self.low(n) };
        }
        n == BddRef::TRUE
    }

    /// BDD over levels `1..=levels` from a truth table. Bit `l - 1` of an
    /// entry's index holds the value of level `l`.
    ///
    /// # Panics
    /// If `table.len() != 2^levels`.
    pub fn from_truth_table(&mut self, levels: u32, table: &[bool]) -> BddRef {
        assert_eq!(table.len(), 1usize << levels, "truth table size");
        let mut layer: Vec<BddRef> = table.iter().map(|&b| BddRef::from_bool(b)).collect();
        for l in 1..=levels {
            layer = layer.chunks(2).map(|c| self.mk(l, c[0], c[1])).collect();
        }
        layer[0]
    }
}
