use rustc_hash::FxHashMap;

use super::varset::VarSet;
use super::CircuitError;

/// Handle of a node in a [`CpeDag`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Node kinds. Variables are identified by their level (1-based, level 1 is
/// nearest the BDD leaves).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum NodeKind {
    True,
    False,
    Var(u32),
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    PEval { var: u32, value: bool, child: NodeId },
}

impl NodeKind {
    pub fn is_binary(&self) -> bool {
        matches!(self, NodeKind::And(..) | NodeKind::Or(..))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, NodeKind::True | NodeKind::False | NodeKind::Var(_))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            NodeKind::True | NodeKind::False | NodeKind::Var(_) => (None, None),
            NodeKind::Not(c) | NodeKind::PEval { child: c, .. } => (Some(c), None),
            NodeKind::And(l, r) | NodeKind::Or(l, r) => (Some(l), Some(r)),
        };
        a.into_iter().chain(b)
    }
}

/// A hash-consed circuit with partial evaluation.
///
/// The dag also records a *counted* variable set `D`, a superset of the
/// root's free variables; model counts are taken over `D`. By default `D`
/// equals `free(root)`.
#[derive(Clone, Debug)]
pub struct CpeDag {
    nodes: Vec<NodeKind>,
    free: Vec<u32>,
    sets: Vec<VarSet>,
    set_ids: FxHashMap<VarSet, u32>,
    unique: FxHashMap<NodeKind, NodeId>,
    num_levels: u32,
    root: NodeId,
    counted: VarSet,
    names: Vec<u32>,
}

impl CpeDag {
    pub const TRUE: NodeId = NodeId(0);
    pub const FALSE: NodeId = NodeId(1);

    /// An empty dag over variable levels `1..=num_levels`; level `l` is named `l`.
    pub fn new(num_levels: u32) -> Self {
        let mut dag = CpeDag {
            nodes: Vec::new(),
            free: Vec::new(),
            sets: Vec::new(),
            set_ids: FxHashMap::default(),
            unique: FxHashMap::default(),
            num_levels,
            root: Self::TRUE,
            counted: VarSet::new(),
            names: (0..=num_levels).collect(),
        };
        dag.intern(NodeKind::True, VarSet::new());
        dag.intern(NodeKind::False, VarSet::new());
        dag
    }

    fn intern_set(&mut self, set: VarSet) -> u32 {
        if let Some(&id) = self.set_ids.get(&set) {
            return id;
        }
        let id = self.sets.len() as u32;
        self.sets.push(set.clone());
        self.set_ids.insert(set, id);
        id
    }

    fn intern(&mut self, kind: NodeKind, free: VarSet) -> NodeId {
        if let Some(&id) = self.unique.get(&kind) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        let set = self.intern_set(free);
        self.nodes.push(kind);
        self.free.push(set);
        self.unique.insert(kind, id);
        id
    }

    pub fn tt(&self) -> NodeId {
        Self::TRUE
    }

    pub fn ff(&self) -> NodeId {
        Self::FALSE
    }

    pub fn constant(&self, b: bool) -> NodeId {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    /// # Panics
    /// If `level` is not in `1..=num_levels`.
    pub fn var(&mut self, level: u32) -> NodeId {
        assert!(level >= 1 && level <= self.num_levels, "variable level {level} outside 1..={}", self.num_levels);
        self.intern(NodeKind::Var(level), VarSet::singleton(level))
    }

    pub fn not(&mut self, a: NodeId) -> NodeId {
        let free = self.free(a).clone();
        self.intern(NodeKind::Not(a), free)
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let free = self.free(a).union(self.free(b));
        self.intern(NodeKind::And(a, b), free)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let free = self.free(a).union(self.free(b));
        self.intern(NodeKind::Or(a, b), free)
    }

    /// `<x := value> a`. When `x` is not free in `a` the substitution is the
    /// identity and `a` itself is returned, which keeps every PEval node
    /// well-formed.
    pub fn peval(&mut self, var: u32, value: bool, a: NodeId) -> NodeId {
        if !self.free(a).contains(var) {
            return a;
        }
        let free = self.free(a).without(var);
        self.intern(NodeKind::PEval { var, value, child: a }, free)
    }

    /// `<x:=0>a AND <x:=1>a`.
    pub fn forall(&mut self, var: u32, a: NodeId) -> NodeId {
        if !self.free(a).contains(var) {
            return a;
        }
        let lo = self.peval(var, false, a);
        let hi = self.peval(var, true, a);
        self.and(lo, hi)
    }

    /// `<x:=0>a OR <x:=1>a`.
    pub fn exists(&mut self, var: u32, a: NodeId) -> NodeId {
        if !self.free(a).contains(var) {
            return a;
        }
        let lo = self.peval(var, false, a);
        let hi = self.peval(var, true, a);
        self.or(lo, hi)
    }

    /// Balanced conjunction; the empty conjunction is `true`.
    pub fn and_all(&mut self, items: &[NodeId]) -> NodeId {
        match items.len() {
            0 => Self::TRUE,
            1 => items[0],
            n => {
                let (l, r) = items.split_at(n / 2);
                let l = self.and_all(l);
                let r = self.and_all(r);
                self.and(l, r)
            }
        }
    }

    /// Balanced disjunction; the empty disjunction is `false`.
    pub fn or_all(&mut self, items: &[NodeId]) -> NodeId {
        match items.len() {
            0 => Self::FALSE,
            1 => items[0],
            n => {
                let (l, r) = items.split_at(n / 2);
                let l = self.or_all(l);
                let r = self.or_all(r);
                self.or(l, r)
            }
        }
    }

    /// Sets the root and resets the counted set to `free(root)`.
    pub fn set_root(&mut self, root: NodeId) {
        self.root = root;
        self.counted = self.free(root).clone();
    }

    /// Counts over `counted`, which must contain `free(root)`.
    pub fn set_counted(&mut self, counted: VarSet) -> Result<(), CircuitError> {
        if !self.free(self.root).is_subset(&counted) {
            return Err(CircuitError::CountedMissesFree);
        }
        if let Some(max) = counted.max() {
            if max > self.num_levels || counted.contains(0) {
                return Err(CircuitError::LevelOutOfRange(max));
            }
        }
        self.counted = counted;
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn counted(&self) -> &VarSet {
        &self.counted
    }

    /// Number of counted variables `n`.
    pub fn num_counted(&self) -> usize {
        self.counted.len()
    }

    pub fn num_levels(&self) -> u32 {
        self.num_levels
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()]
    }

    pub fn free(&self, id: NodeId) -> &VarSet {
        &self.sets[self.free[id.index()] as usize]
    }

    /// Total nodes stored, including unreachable ones.
    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// External name (e.g. QDIMACS index) of a level.
    pub fn name_of(&self, level: u32) -> u32 {
        self.names[level as usize]
    }

    pub fn set_names(&mut self, names: Vec<u32>) {
        assert_eq!(names.len(), self.num_levels as usize + 1);
        self.names = names;
    }

    /// Nodes reachable from the root, parents before children, root first.
    pub fn topo_order(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut post = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                post.push(id);
                continue;
            }
            if seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            stack.push((id, true));
            let kind = self.kind(id);
            let children: Vec<NodeId> = kind.children().collect();
            for c in children.into_iter().rev() {
                if !seen[c.index()] {
                    stack.push((c, false));
                }
            }
        }
        post.reverse();
        post
    }

    /// `|phi|`: number of nodes reachable from the root.
    pub fn size(&self) -> usize {
        self.topo_order().len()
    }

    /// Variables occurring in the circuit reachable from the root.
    pub fn occurring_vars(&self) -> VarSet {
        self.topo_order()
            .into_iter()
            .filter_map(|id| match self.kind(id) {
                NodeKind::Var(l) => Some(l),
                _ => None,
            })
            .collect()
    }

    /// Largest free-variable set of any reachable node.
    pub fn max_free(&self) -> usize {
        self.topo_order().into_iter().map(|id| self.free(id).len()).max().unwrap_or(0)
    }

    /// Boolean evaluation of `id` under a complete assignment `bits`
    /// (bit `l` holds level `l`). Only valid for dags with fewer than 64 levels.
    pub fn eval_bool(&self, id: NodeId, bits: u64) -> bool {
        super::brute::BoolEvaluator::new(self).eval(id, bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_shares_structure() {
        let mut d = CpeDag::new(3);
        let x = d.var(1);
        let y = d.var(2);
        let a = d.and(x, y);
        let b = d.and(x, y);
        assert_eq!(a, b);
        let before = d.arena_len();
        let nx = d.not(x);
        let _ = d.or(a, nx);
        let _ = d.or(b, nx);
        assert_eq!(d.arena_len(), before + 2);
    }

    #[test]
    fn free_sets_follow_definition() {
        let mut d = CpeDag::new(3);
        let x = d.var(1);
        let y = d.var(2);
        let a = d.and(x, y);
        assert_eq!(d.free(a).to_vec_desc(), vec![2, 1]);
        let p = d.peval(2, true, a);
        assert_eq!(d.free(p).to_vec_desc(), vec![1]);
        // Substituting a non-free variable is the identity.
        assert_eq!(d.peval(3, false, a), a);
        assert_eq!(d.peval(2, false, p), p);
    }

    #[test]
    fn topo_order_puts_parents_first() {
        let mut d = CpeDag::new(2);
        let x = d.var(1);
        let y = d.var(2);
        let nx = d.not(x);
        let xy = d.and(x, y);
        let body = d.or(nx, xy);
        let root = d.forall(2, body);
        d.set_root(root);
        let order = d.topo_order();
        assert_eq!(order[0], root);
        let pos = |n: NodeId| order.iter().position(|&m| m == n).unwrap();
        for &n in &order {
            for c in d.kind(n).children() {
                assert!(pos(n) < pos(c));
            }
        }
        assert_eq!(d.size(), 8);
        assert_eq!(d.num_counted(), 1);
    }

    #[test]
    fn counted_set_must_cover_free() {
        let mut d = CpeDag::new(3);
        let x = d.var(1);
        let y = d.var(2);
        let a = d.or(x, y);
        d.set_root(a);
        assert!(d.set_counted(VarSet::singleton(1)).is_err());
        assert!(d.set_counted(VarSet::range(3)).is_ok());
        assert_eq!(d.num_counted(), 3);
        assert!(d.set_counted(VarSet::range(4)).is_err());
    }
}
