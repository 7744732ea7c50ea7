use super::{combine, Child, EbddDiffLog, Expansion};
use crate::bdd::{BddArena, BddRef, Lin};
use crate::field::FieldElem;
use crate::unipoly::UniPoly;

const NO_RANK: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Edge {
    child: Child,
    /// Endpoint ranks: 0 for terminals, `1..=k` for the chain levels from
    /// the lowest up, `k + 1` for the virtual root above everything.
    prank: u32,
    crank: u32,
    /// Sum over root paths of the edge weights at the original point.
    coef: FieldElem,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    rank: u32,
    is_bdd: bool,
    child: Child,
    edges: (u32, u32),
}

/// Dense table cleared in O(1) by bumping a stamp.
#[derive(Debug, Default)]
struct Stamped<T> {
    stamp: Vec<u32>,
    val: Vec<T>,
}

impl<T: Copy + Default> Stamped<T> {
    fn fit(&mut self, n: usize) {
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.val.resize(n, T::default());
        }
    }

    #[inline]
    fn get(&self, i: usize, s: u32) -> Option<T> {
        (self.stamp[i] == s).then(|| self.val[i])
    }

    #[inline]
    fn set(&mut self, i: usize, s: u32, v: T) {
        self.stamp[i] = s;
        self.val[i] = v;
    }

    fn wipe(&mut self) {
        self.stamp.fill(0);
    }
}

/// Incremental evaluation of one reduction chain.
///
/// A chain evaluates `w_i` at points that differ only in the levels below a
/// boundary `B` that climbs through the free levels `g_k < ... < g_1`. Above
/// `B` the point never changes, so the fully expanded part of the diagram is
/// collapsed once into a coefficient per edge crossing the boundary. Moving
/// the boundary up touches only the edges leaving or entering the levels it
/// passes, and values below the boundary are memoized for good because those
/// levels are already fixed.
///
/// A cache serves one chain at a time and keeps its scratch tables between
/// chains.
#[derive(Debug, Default)]
pub struct ChainCache {
    edges: Vec<Edge>,
    by_parent: Vec<u32>,
    parent_start: Vec<u32>,
    by_child: Vec<u32>,
    child_start: Vec<u32>,
    /// Free levels, highest first.
    levels: Vec<u32>,
    rank_of: Vec<u32>,
    /// Rank of the boundary; `k + 1` once the chain is exhausted.
    rank: u32,
    cur: Vec<FieldElem>,
    s_const: FieldElem,
    poly: Vec<u32>,
    stamp: u32,
    slot_prod: Stamped<u32>,
    slot_bdd: Stamped<u32>,
    pval: Stamped<FieldElem>,
    bval: Stamped<FieldElem>,
    nodes: Vec<Node>,
    weights: Vec<FieldElem>,
    order: Vec<u32>,
    coef: Vec<FieldElem>,
    stack: Vec<(BddRef, bool)>,
}

impl ChainCache {
    /// An idle cache. Call [`ChainCache::start`] before anything else.
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a chain. `levels` are its free levels in descending order and
    /// `vals` holds the point (indexed by level) at the top of the chain.
    /// The boundary starts at the lowest level.
    ///
    /// # Panics
    /// If `levels` is empty or the diagram has a node outside `levels`.
    pub fn start(&mut self, arena: &BddArena, log: &EbddDiffLog, levels: &[u32], vals: &[FieldElem]) {
        assert!(!levels.is_empty(), "chain has at least one level");
        self.bump(arena.len(), log.products.len());
        for &l in &self.levels {
            self.rank_of[l as usize] = NO_RANK;
        }
        if self.rank_of.len() < vals.len() {
            self.rank_of.resize(vals.len(), NO_RANK);
        }
        let k = levels.len() as u32;
        for (i, &l) in levels.iter().enumerate() {
            self.rank_of[l as usize] = k - i as u32;
        }
        self.levels.clear();
        self.levels.extend_from_slice(levels);
        self.rank = 1;
        self.cur.clear();
        self.cur.extend_from_slice(vals);
        self.s_const = FieldElem::ZERO;
        self.poly.clear();
        self.edges.clear();
        self.nodes.clear();
        self.weights.clear();

        // Every node strictly above the lowest level is expanded.
        let root = log.root;
        let rrank = self.rank_of_child(arena, log, root);
        self.edges.push(Edge { child: root, prank: k + 1, crank: rrank, coef: FieldElem::ONE });
        self.weights.push(FieldElem::ONE);
        if rrank > 1 {
            self.set_slot(root, 0);
            self.nodes.push(Node { rank: rrank, is_bdd: matches!(root, Child::Bdd(_)), child: root, edges: (0, 0) });
        }
        let mut next = 0;
        while next < self.nodes.len() {
            let Node { rank, child: node, .. } = self.nodes[next];
            let sv = vals[self.levels[(k - rank) as usize] as usize];
            let (outs, n) = match node {
                Child::Prod(p) => match log.products[p as usize].expansion {
                    Expansion::Split(t0, t1) => ([(t0, FieldElem::ONE - sv), (t1, sv)], 2),
                    Expansion::Direct(b) => ([(Child::Bdd(b), FieldElem::ONE); 2], 1),
                },
                Child::Bdd(b) => {
                    ([(Child::Bdd(arena.low(b)), FieldElem::ONE - sv), (Child::Bdd(arena.high(b)), sv)], 2)
                }
            };
            let first = self.edges.len() as u32;
            for &(c, w) in &outs[..n] {
                let crank = self.rank_of_child(arena, log, c);
                self.edges.push(Edge { child: c, prank: rank, crank, coef: FieldElem::ZERO });
                self.weights.push(w);
                if crank > 1 && self.slot(c).is_none() {
                    self.set_slot(c, self.nodes.len() as u32);
                    self.nodes.push(Node { rank: crank, is_bdd: matches!(c, Child::Bdd(_)), child: c, edges: (0, 0) });
                }
            }
            self.nodes[next].edges = (first, self.edges.len() as u32);
            next += 1;
        }

        // Top-down coefficients. Within a level, products feed BDD nodes
        // through direct edges, so they go first.
        self.order.clear();
        self.order.extend(0..self.nodes.len() as u32);
        let nodes = &self.nodes;
        self.order.sort_unstable_by_key(|&s| {
            let n = &nodes[s as usize];
            (std::cmp::Reverse(n.rank), n.is_bdd)
        });
        self.coef.clear();
        self.coef.resize(self.nodes.len(), FieldElem::ZERO);
        if let Some(c) = self.coef.first_mut() {
            *c = FieldElem::ONE;
        }
        for i in 0..self.order.len() {
            let s = self.order[i] as usize;
            let (a, b) = self.nodes[s].edges;
            let cs = self.coef[s];
            for e in a as usize..b as usize {
                let coef = cs * self.weights[e];
                self.edges[e].coef = coef;
                if let Some(t) = self.slot(self.edges[e].child) {
                    self.coef[t as usize] += coef;
                }
            }
        }

        group(&self.edges, k + 2, |e| e.prank, &mut self.by_parent, &mut self.parent_start);
        group(&self.edges, k + 2, |e| e.crank, &mut self.by_child, &mut self.child_start);

        for i in 0..self.edges.len() {
            let e = self.edges[i];
            if e.crank == 1 {
                self.poly.push(i as u32);
            } else if e.crank == 0 {
                let v = self.const_val(arena, log, e.child);
                self.s_const += e.coef * v;
            }
        }
    }

    fn bump(&mut self, arena_len: usize, products: usize) {
        self.slot_prod.fit(products);
        self.pval.fit(products);
        self.slot_bdd.fit(arena_len);
        self.bval.fit(arena_len);
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.slot_prod.wipe();
            self.pval.wipe();
            self.slot_bdd.wipe();
            self.bval.wipe();
            self.stamp = 1;
        }
    }

    fn rank_of_child(&self, arena: &BddArena, log: &EbddDiffLog, c: Child) -> u32 {
        let level = match c {
            Child::Bdd(b) => arena.level(b),
            Child::Prod(p) => log.products[p as usize].level,
        };
        if level == 0 {
            return 0;
        }
        let r = self.rank_of[level as usize];
        assert!(r != NO_RANK, "level {level} is not free in this chain");
        r
    }

    fn slot(&self, c: Child) -> Option<u32> {
        match c {
            Child::Bdd(b) if b.is_terminal() => None,
            Child::Bdd(b) => self.slot_bdd.get(b.index(), self.stamp),
            Child::Prod(p) => self.slot_prod.get(p as usize, self.stamp),
        }
    }

    fn set_slot(&mut self, c: Child, s: u32) {
        match c {
            Child::Bdd(b) => self.slot_bdd.set(b.index(), self.stamp, s),
            Child::Prod(p) => self.slot_prod.set(p as usize, self.stamp, s),
        }
    }

    fn boundary_level(&self) -> Option<u32> {
        let k = self.levels.len() as u32;
        (self.rank <= k).then(|| self.levels[(k - self.rank) as usize])
    }

    /// Current free level, or `None` once every level has been fixed.
    pub fn boundary(&self) -> Option<u32> {
        self.boundary_level()
    }

    /// The view polynomial in the boundary level.
    pub fn answer(&mut self, arena: &BddArena, log: &EbddDiffLog) -> UniPoly {
        let mut acc = UniPoly::constant(self.s_const);
        for i in 0..self.poly.len() {
            let e = self.edges[self.poly[i] as usize];
            acc = acc + self.poly_val(arena, log, e.child).scale(e.coef);
        }
        acc
    }

    /// Fixes the boundary level to `r` and moves the boundary to the next
    /// level up.
    ///
    /// # Panics
    /// If the chain is already exhausted.
    pub fn advance(&mut self, arena: &BddArena, log: &EbddDiffLog, r: FieldElem) {
        let old = self.boundary_level().expect("chain already exhausted");
        self.cur[old as usize] = r;
        let old_rank = self.rank;
        self.rank += 1;
        let new_rank = self.rank as usize;
        for i in 0..self.poly.len() {
            let e = self.edges[self.poly[i] as usize];
            let v = self.const_val(arena, log, e.child);
            self.s_const += e.coef * v;
        }
        self.poly.clear();
        // Edges leaving the new boundary level stop crossing it.
        for i in self.parent_start[new_rank]..self.parent_start[new_rank + 1] {
            let e = self.edges[self.by_parent[i as usize] as usize];
            if e.crank <= old_rank {
                let v = self.const_val(arena, log, e.child);
                self.s_const -= e.coef * v;
            }
        }
        // Edges entering it from above start contributing polynomials.
        for i in self.child_start[new_rank]..self.child_start[new_rank + 1] {
            let id = self.by_child[i as usize];
            if self.edges[id as usize].prank > new_rank as u32 {
                self.poly.push(id);
            }
        }
    }

    /// Value of a BDD over the chain's levels once all of them are fixed.
    ///
    /// # Panics
    /// If the chain is not exhausted.
    pub fn final_value(&mut self, arena: &BddArena, log: &EbddDiffLog, u: BddRef) -> FieldElem {
        assert!(self.boundary().is_none(), "chain not finished");
        self.const_val(arena, log, Child::Bdd(u))
    }

    fn poly_val(&mut self, arena: &BddArena, log: &EbddDiffLog, c: Child) -> UniPoly {
        match c {
            Child::Bdd(b) => self.lin(arena, b).to_poly(),
            Child::Prod(p) => {
                let prod = log.products[p as usize];
                let a = self.lin(arena, prod.u);
                let b = self.lin(arena, prod.v);
                combine(log.op, a, b)
            }
        }
    }

    fn lin(&mut self, arena: &BddArena, b: BddRef) -> Lin {
        let boundary = self.boundary_level().unwrap_or(u32::MAX);
        if arena.level(b) < boundary {
            return Lin::constant(self.const_bdd(arena, b));
        }
        debug_assert_eq!(arena.level(b), boundary);
        let lo = self.const_bdd(arena, arena.low(b));
        let hi = self.const_bdd(arena, arena.high(b));
        Lin(lo, hi - lo)
    }

    fn const_val(&mut self, arena: &BddArena, log: &EbddDiffLog, c: Child) -> FieldElem {
        match c {
            Child::Bdd(b) => self.const_bdd(arena, b),
            Child::Prod(p) => {
                if let Some(v) = self.pval.get(p as usize, self.stamp) {
                    return v;
                }
                let prod = log.products[p as usize];
                let a = self.const_bdd(arena, prod.u);
                let b = self.const_bdd(arena, prod.v);
                let v = log.op.eval_field(a, b);
                self.pval.set(p as usize, self.stamp, v);
                v
            }
        }
    }

    /// Memoized value of a BDD whose levels all lie below the boundary.
    fn const_bdd(&mut self, arena: &BddArena, u: BddRef) -> FieldElem {
        let stamp = self.stamp;
        let known = |m: &Stamped<FieldElem>, n: BddRef| match n {
            BddRef::FALSE => Some(FieldElem::ZERO),
            BddRef::TRUE => Some(FieldElem::ONE),
            _ => m.get(n.index(), stamp),
        };
        if let Some(v) = known(&self.bval, u) {
            return v;
        }
        debug_assert!(self.boundary_level().map_or(true, |b| arena.level(u) < b));
        self.stack.clear();
        self.stack.push((u, false));
        while let Some((n, ready)) = self.stack.pop() {
            if known(&self.bval, n).is_some() {
                continue;
            }
            let (lo, hi) = (arena.low(n), arena.high(n));
            if !ready {
                self.stack.push((n, true));
                for c in [hi, lo] {
                    if known(&self.bval, c).is_none() {
                        self.stack.push((c, false));
                    }
                }
                continue;
            }
            let l = known(&self.bval, lo).expect("child evaluated");
            let h = known(&self.bval, hi).expect("child evaluated");
            let s = self.cur[arena.level(n) as usize];
            self.bval.set(n.index(), stamp, l + s * (h - l));
        }
        known(&self.bval, u).expect("root evaluated")
    }
}

/// Counting sort of edge ids by a key below `buckets`; `start[b]..start[b + 1]`
/// delimits bucket `b` in `out`.
fn group(edges: &[Edge], buckets: u32, key: impl Fn(&Edge) -> u32, out: &mut Vec<u32>, start: &mut Vec<u32>) {
    start.clear();
    start.resize(buckets as usize + 1, 0);
    for e in edges {
        start[key(e) as usize + 1] += 1;
    }
    for i in 0..buckets as usize {
        start[i + 1] += start[i];
    }
    out.clear();
    out.resize(edges.len(), 0);
    let mut fill = start[..buckets as usize].to_vec();
    for (i, e) in edges.iter().enumerate() {
        let b = &mut fill[key(e) as usize];
        out[*b as usize] = i as u32;
        *b += 1;
    }
}
