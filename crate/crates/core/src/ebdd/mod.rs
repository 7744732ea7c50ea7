//! Extended BDDs: BDDs whose frontier may contain pending Apply calls
//! ("product nodes" `<u * v>` over two plain BDDs).
//!
//! [`compute_ebdd`] runs Apply breadth-first, one level at a time from the
//! root level down. Expanding level `L` replaces every product at level `L`
//! by a decision on `L` over the products of the cofactors, which is exactly
//! one degree reduction `delta_L` of the product's polynomial. The sequence
//! `w_0, ..., w_N` (with `N` the number of variable levels) is stored once:
//! each product records its replacement, and view `i` treats products at
//! levels `> N - i` as expanded. `w_N` is the result of Apply.

mod cache;

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bdd::{BddArena, BddError, BddEvaluator, BddRef, BinOp, Lin, PartialAssignment};
use crate::field::FieldElem;
use crate::unipoly::UniPoly;

pub use cache::ChainCache;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EbddError {
    #[error("view index {index} out of range 0..={max}")]
    IndexOutOfRange { index: u32, max: u32 },
    #[error(transparent)]
    Assignment(#[from] BddError),
}

/// An edge target in an eBDD: a plain BDD or a product node.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Child {
    Bdd(BddRef),
    Prod(u32),
}

/// What a product node becomes when its level is expanded.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Expansion {
    /// Decision on the product's level between the cofactor products.
    Split(Child, Child),
    /// The product has a terminal operand and equals this BDD exactly.
    Direct(BddRef),
}

#[derive(Clone, Copy, Debug)]
pub struct Product {
    pub u: BddRef,
    pub v: BddRef,
    pub level: u32,
    pub expansion: Expansion,
    /// The BDD this product resolves to in the final diagram.
    pub result: BddRef,
}

/// The sequence `w_0, ..., w_N` of one breadth-first Apply.
#[derive(Clone, Debug)]
pub struct EbddDiffLog {
    op: BinOp,
    u1: BddRef,
    u2: BddRef,
    num_levels: u32,
    root: Child,
    products: Vec<Product>,
    /// Products in expansion order (level descending), grouped by level.
    order: Vec<u32>,
    steps: Vec<(u32, usize, usize)>,
    final_bdd: BddRef,
}

fn trivial(op: BinOp, u: BddRef, v: BddRef) -> Option<BddRef> {
    let (t, other) = if u.is_terminal() {
        (u, v)
    } else if v.is_terminal() {
        (v, u)
    } else {
        return None;
    };
    Some(match (op, t) {
        (BinOp::And, BddRef::FALSE) => BddRef::FALSE,
        (BinOp::Or, BddRef::TRUE) => BddRef::TRUE,
        _ => other,
    })
}

/// Breadth-first Apply over levels `1..=num_levels`.
///
/// # Panics
/// If an operand depends on a level above `num_levels`.
pub fn compute_ebdd(arena: &mut BddArena, op: BinOp, u1: BddRef, u2: BddRef, num_levels: u32) -> EbddDiffLog {
    assert!(arena.level(u1) <= num_levels && arena.level(u2) <= num_levels);
    let mut b = Builder { op, products: Vec::new(), index: FxHashMap::default(), buckets: BTreeMap::new() };
    let root = b.child(arena, u1, u2);
    let mut order = Vec::new();
    let mut steps = Vec::new();
    while let Some((level, ids)) = b.buckets.pop_last() {
        let start = order.len();
        for id in ids {
            let Product { u, v, .. } = b.products[id as usize];
            let expansion = match trivial(op, u, v) {
                Some(t) => Expansion::Direct(t),
                None => {
                    let (u0, u1) = arena.cofactors(u, level);
                    let (v0, v1) = arena.cofactors(v, level);
                    let t0 = b.child(arena, u0, v0);
                    let t1 = b.child(arena, u1, v1);
                    Expansion::Split(t0, t1)
                }
            };
            b.products[id as usize].expansion = expansion;
            order.push(id);
        }
        steps.push((level, start, order.len()));
    }
    let mut products = b.products;

    // Resolve bottom-up: children always sit on lower levels, which were
    // expanded later.
    for &id in order.iter().rev() {
        let p = products[id as usize];
        let res = |c: Child| match c {
            Child::Bdd(b) => b,
            Child::Prod(q) => products[q as usize].result,
        };
        let r = match p.expansion {
            Expansion::Direct(b) => b,
            Expansion::Split(t0, t1) => {
                let (r0, r1) = (res(t0), res(t1));
                arena.mk(p.level, r0, r1)
            }
        };
        products[id as usize].result = r;
    }
    let final_bdd = match root {
        Child::Bdd(b) => b,
        Child::Prod(p) => products[p as usize].result,
    };
    EbddDiffLog { op, u1, u2, num_levels, root, products, order, steps, final_bdd }
}

struct Builder {
    op: BinOp,
    products: Vec<Product>,
    index: FxHashMap<(u32, u32), u32>,
    buckets: BTreeMap<u32, Vec<u32>>,
}

impl Builder {
    /// The product node `<u * v>`, shared per unordered pair. Only a pair of
    /// terminals collapses immediately.
    fn child(&mut self, arena: &BddArena, u: BddRef, v: BddRef) -> Child {
        if u.is_terminal() && v.is_terminal() {
            return Child::Bdd(BddRef::from_bool(self.op.eval_bool(u == BddRef::TRUE, v == BddRef::TRUE)));
        }
        let key = if u <= v { (u.raw(), v.raw()) } else { (v.raw(), u.raw()) };
        if let Some(&p) = self.index.get(&key) {
            return Child::Prod(p);
        }
        let id = self.products.len() as u32;
        let level = arena.level(u).max(arena.level(v));
        self.products.push(Product { u, v, level, expansion: Expansion::Direct(BddRef::FALSE), result: BddRef::FALSE });
        self.index.insert(key, id);
        self.buckets.entry(level).or_default().push(id);
        Child::Prod(id)
    }
}

impl EbddDiffLog {
    pub fn op(&self) -> BinOp {
        self.op
    }

    pub fn operands(&self) -> (BddRef, BddRef) {
        (self.u1, self.u2)
    }

    pub fn num_levels(&self) -> u32 {
        self.num_levels
    }

    pub fn root(&self) -> Child {
        self.root
    }

    /// `w_N`, handle-equal to `apply(op, u1, u2)`.
    pub fn final_bdd(&self) -> BddRef {
        self.final_bdd
    }

    pub fn products(&self) -> &[Product] {
        &self.products
    }

    pub fn product(&self, id: u32) -> &Product {
        &self.products[id as usize]
    }

    /// Substitutions performed when going from `w_i` to `w_{i+1}`: the
    /// products on level `N - i` with their replacements.
    pub fn diff(&self, i: u32) -> impl Iterator<Item = (u32, Expansion)> + '_ {
        let level = self.num_levels.checked_sub(i).unwrap_or(0);
        self.steps
            .iter()
            .filter(move |s| s.0 == level && level > 0)
            .flat_map(move |&(_, a, b)| self.order[a..b].iter().map(|&id| (id, self.products[id as usize].expansion)))
    }

    /// Total number of substitutions recorded.
    pub fn diff_len(&self) -> usize {
        self.order.len()
    }

    pub fn view(&self, i: u32) -> Result<EbddView<'_>, EbddError> {
        if i > self.num_levels {
            return Err(EbddError::IndexOutOfRange { index: i, max: self.num_levels });
        }
        Ok(EbddView { log: self, threshold: self.num_levels - i })
    }
}

/// Read-only view of `w_i`: products on levels above the threshold are
/// expanded, the rest are pending.
#[derive(Clone, Copy, Debug)]
pub struct EbddView<'a> {
    log: &'a EbddDiffLog,
    threshold: u32,
}

impl<'a> EbddView<'a> {
    pub fn is_expanded(&self, p: u32) -> bool {
        self.log.products[p as usize].level > self.threshold
    }

    /// Pending product nodes reachable in this view.
    pub fn product_nodes(&self) -> Vec<u32> {
        let mut seen = vec![false; self.log.products.len()];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        if let Child::Prod(p) = self.log.root {
            stack.push(p);
        }
        while let Some(p) = stack.pop() {
            if std::mem::replace(&mut seen[p as usize], true) {
                continue;
            }
            if !self.is_expanded(p) {
                out.push(p);
                continue;
            }
            if let Expansion::Split(t0, t1) = self.log.products[p as usize].expansion {
                for t in [t0, t1] {
                    if let Child::Prod(q) = t {
                        stack.push(q);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// When no products are pending, the view is this plain BDD.
    pub fn as_bdd(&self) -> Option<BddRef> {
        match self.log.root {
            Child::Bdd(b) => Some(b),
            Child::Prod(p) => {
                if self.product_nodes().is_empty() {
                    // Every reachable product is expanded, so the view
                    // coincides with the resolved diagram.
                    Some(self.log.products[p as usize].result)
                } else {
                    None
                }
            }
        }
    }
}

/// Evaluation scratch shared across calls.
#[derive(Default, Debug)]
pub struct EbddEvaluator {
    bdd: BddEvaluator,
    stamp: u32,
    seen: Vec<u32>,
    vals: Vec<UniPoly>,
    stack: Vec<(u32, bool)>,
}

impl EbddEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// `[sigma] [[w_i]]` where `vals` is indexed by level and `free` is the
    /// level left symbolic.
    pub fn eval(
        &mut self,
        arena: &BddArena,
        log: &EbddDiffLog,
        i: u32,
        vals: &[FieldElem],
        free: Option<u32>,
    ) -> UniPoly {
        let threshold = log.num_levels.saturating_sub(i);
        self.bdd.reset(arena);
        let root = match log.root {
            Child::Bdd(b) => return self.bdd.eval(arena, b, vals, free).to_poly(),
            Child::Prod(p) => p,
        };
        if self.seen.len() < log.products.len() {
            self.seen.resize(log.products.len(), 0);
            self.vals.resize(log.products.len(), UniPoly::ZERO);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        self.stack.clear();
        self.stack.push((root, false));
        while let Some((p, ready)) = self.stack.pop() {
            if self.seen[p as usize] == self.stamp {
                continue;
            }
            let prod = log.products[p as usize];
            let value = if prod.level <= threshold {
                let a = self.bdd.eval(arena, prod.u, vals, free);
                let b = self.bdd.eval(arena, prod.v, vals, free);
                combine(log.op, a, b)
            } else {
                match prod.expansion {
                    Expansion::Direct(b) => self.bdd.eval(arena, b, vals, free).to_poly(),
                    Expansion::Split(t0, t1) => {
                        if !ready {
                            self.stack.push((p, true));
                            for t in [t1, t0] {
                                if let Child::Prod(q) = t {
                                    if self.seen[q as usize] != self.stamp {
                                        self.stack.push((q, false));
                                    }
                                }
                            }
                            continue;
                        }
                        let e0 = self.child_value(arena, t0, vals, free);
                        let e1 = self.child_value(arena, t1, vals, free);
                        if free == Some(prod.level) {
                            debug_assert!(e0.is_constant() && e1.is_constant());
                            UniPoly::linear(e0.c0, e1.c0 - e0.c0)
                        } else {
                            let s = vals[prod.level as usize];
                            e0 + (e1 - e0).scale(s)
                        }
                    }
                }
            };
            self.seen[p as usize] = self.stamp;
            self.vals[p as usize] = value;
        }
        self.vals[root as usize]
    }

    fn child_value(&mut self, arena: &BddArena, c: Child, vals: &[FieldElem], free: Option<u32>) -> UniPoly {
        match c {
            Child::Bdd(b) => self.bdd.eval(arena, b, vals, free).to_poly(),
            Child::Prod(q) => self.vals[q as usize],
        }
    }
}

/// `[[u]] * [[v]]` arithmetised.
pub fn combine(op: BinOp, a: Lin, b: Lin) -> UniPoly {
    let (pa, pb) = (a.to_poly(), b.to_poly());
    let prod = pa * pb;
    match op {
        BinOp::And => prod,
        BinOp::Or => pa + pb - prod,
    }
}

/// `[sigma] [[w_i]]`, with validation of the index and of the assignment.
pub fn evaluate_ebdd(
    arena: &BddArena,
    log: &EbddDiffLog,
    i: u32,
    sigma: &PartialAssignment,
) -> Result<UniPoly, EbddError> {
    log.view(i)?;
    let support = arena.support(log.u1).union(&arena.support(log.u2));
    let (dense, free) = sigma.densify(support.iter_asc(), log.num_levels as usize + 1)?;
    Ok(EbddEvaluator::new().eval(arena, log, i, &dense, free))
}

/// Read view of `w_i`.
pub fn reconstruct_view(log: &EbddDiffLog, i: u32) -> Result<EbddView<'_>, EbddError> {
    log.view(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn f(v: u64) -> FieldElem {
        FieldElem::new(v)
    }

    /// x at level 2, y at level 1; returns (x xor y, x and y).
    fn xor_and(a: &mut BddArena) -> (BddRef, BddRef) {
        let u = a.from_truth_table(2, &[false, true, true, false]);
        let v = a.from_truth_table(2, &[false, false, false, true]);
        (u, v)
    }

    // Hand-derived polynomials of the three stages of `(x xor y) or (x and y)`.
    fn p0(x: FieldElem, y: FieldElem) -> FieldElem {
        let a = x + y - f(2) * x * y;
        let b = x * y;
        a + b - a * b
    }
    fn p1(x: FieldElem, y: FieldElem) -> FieldElem {
        x + y - f(2) * x * y + x * y * y
    }
    fn p2(x: FieldElem, y: FieldElem) -> FieldElem {
        x + y - x * y
    }

    fn point(x: FieldElem, y: FieldElem) -> PartialAssignment {
        PartialAssignment::new().with(2, x).with(1, y)
    }

    #[test]
    fn or_of_xor_and_and_stages() {
        let mut a = BddArena::new();
        let (u, v) = xor_and(&mut a);
        let log = compute_ebdd(&mut a, BinOp::Or, u, v, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut pts: Vec<(FieldElem, FieldElem)> =
            (0..4).map(|b| (FieldElem::from_bool(b & 2 != 0), FieldElem::from_bool(b & 1 != 0))).collect();
        pts.extend((0..10).map(|_| (FieldElem::random(&mut rng), FieldElem::random(&mut rng))));
        for (x, y) in pts {
            let s = point(x, y);
            assert_eq!(evaluate_ebdd(&a, &log, 0, &s).unwrap(), UniPoly::constant(p0(x, y)));
            assert_eq!(evaluate_ebdd(&a, &log, 1, &s).unwrap(), UniPoly::constant(p1(x, y)));
            assert_eq!(evaluate_ebdd(&a, &log, 2, &s).unwrap(), UniPoly::constant(p2(x, y)));
        }
        let x_or_y = a.from_truth_table(2, &[false, true, true, true]);
        assert_eq!(log.final_bdd(), x_or_y);
    }

    #[test]
    fn stage_zero_with_x_free() {
        let mut a = BddArena::new();
        let (u, v) = xor_and(&mut a);
        let log = compute_ebdd(&mut a, BinOp::Or, u, v, 2);
        let s = PartialAssignment::new().with(1, f(1));
        let want = UniPoly::new(f(1), -f(1), f(1));
        assert_eq!(evaluate_ebdd(&a, &log, 0, &s).unwrap(), want);
    }

    #[test]
    fn stage_one_has_two_pending_products_on_level_one() {
        let mut a = BddArena::new();
        let (u, v) = xor_and(&mut a);
        let log = compute_ebdd(&mut a, BinOp::Or, u, v, 2);
        let view = log.view(1).unwrap();
        let pending = view.product_nodes();
        assert_eq!(pending.len(), 2);
        assert!(pending.iter().all(|&p| log.product(p).level == 1));
        assert_eq!(log.view(0).unwrap().product_nodes().len(), 1);
        assert_eq!(log.view(2).unwrap().as_bdd(), Some(log.final_bdd()));
        assert_eq!(log.view(0).unwrap().as_bdd(), None);
        assert_eq!(log.diff(0).count(), 1);
        assert_eq!(log.diff(1).count(), 2);
        assert!(matches!(log.view(3), Err(EbddError::IndexOutOfRange { index: 3, max: 2 })));
    }

    #[test]
    fn terminal_operands_collapse() {
        let mut a = BddArena::new();
        let log = compute_ebdd(&mut a, BinOp::Or, BddRef::TRUE, BddRef::TRUE, 3);
        assert_eq!(log.final_bdd(), BddRef::TRUE);
        assert_eq!(log.diff_len(), 0);
        assert_eq!(log.root(), Child::Bdd(BddRef::TRUE));
    }

    #[test]
    fn idempotent_and() {
        let mut a = BddArena::new();
        let u = crate::bdd::tests::two_of_three(&mut a);
        let log = compute_ebdd(&mut a, BinOp::And, u, u, 3);
        assert_eq!(log.final_bdd(), u);
    }

    fn random_table(rng: &mut ChaCha20Rng, n: u32) -> Vec<bool> {
        let density = rng.gen_range(0.1..0.9);
        (0..1usize << n).map(|_| rng.gen_bool(density)).collect()
    }

    #[test]
    fn chain_relation_and_final_agreement() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut ev = EbddEvaluator::new();
        for round in 0..60 {
            let n = 1 + round % 6;
            let mut a = BddArena::new();
            let t1 = random_table(&mut rng, n);
            let t2 = random_table(&mut rng, n);
            let (u, v) = (a.from_truth_table(n, &t1), a.from_truth_table(n, &t2));
            let op = if round % 2 == 0 { BinOp::And } else { BinOp::Or };
            let log = compute_ebdd(&mut a, op, u, v, n);
            assert!(log.products().len() <= a.size(u) * a.size(v));
            let expect = a.apply(op, u, v);
            assert_eq!(log.final_bdd(), expect);
            for i in 0..n {
                let free = n - i;
                for _ in 0..5 {
                    let vals: Vec<FieldElem> = (0..=n).map(|_| FieldElem::random(&mut rng)).collect();
                    let q = ev.eval(&a, &log, i, &vals, Some(free));
                    assert!(q.degree().unwrap_or(0) <= 2);
                    let next = ev.eval(&a, &log, i + 1, &vals, None);
                    assert_eq!(q.degree_reduce().eval(vals[free as usize]), next.c0);
                }
                for p in log.view(i).unwrap().product_nodes() {
                    assert!(log.product(p).level <= n - i);
                }
            }
        }
    }

    #[test]
    fn chain_cache_matches_direct_evaluation() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let mut ev = EbddEvaluator::new();
        // One cache across rounds, so leftovers from earlier chains would show.
        let mut cache = ChainCache::new();
        for round in 0..80 {
            let n = 1 + round % 7;
            let mut a = BddArena::new();
            let t1 = random_table(&mut rng, n);
            let t2 = random_table(&mut rng, n);
            let (u, v) = (a.from_truth_table(n, &t1), a.from_truth_table(n, &t2));
            let op = if round % 2 == 0 { BinOp::And } else { BinOp::Or };
            let log = compute_ebdd(&mut a, op, u, v, n);
            let levels: Vec<u32> = (1..=n).rev().collect();
            let mut vals: Vec<FieldElem> = (0..=n).map(|_| FieldElem::random(&mut rng)).collect();
            cache.start(&a, &log, &levels, &vals);
            for &g in levels.iter().rev() {
                assert_eq!(cache.boundary(), Some(g));
                let want = ev.eval(&a, &log, n - g, &vals, Some(g));
                assert_eq!(cache.answer(&a, &log), want, "round {round} level {g}");
                let r = FieldElem::random(&mut rng);
                vals[g as usize] = r;
                cache.advance(&a, &log, r);
            }
            assert_eq!(cache.boundary(), None);
            for w in [u, v] {
                let mut bev = BddEvaluator::new();
                bev.reset(&a);
                assert_eq!(cache.final_value(&a, &log, w), bev.eval(&a, w, &vals, None).0);
            }
        }
    }
}
