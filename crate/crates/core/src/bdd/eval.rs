use thiserror::Error;

use super::{BddArena, BddRef};
use crate::field::FieldElem;
use crate::unipoly::UniPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("assignment leaves levels {0} and {1} unset; at most one may be free")]
    TooManyFree(u32, u32),
}

/// A linear polynomial `a + b*x` in the (single) free variable.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Lin(pub FieldElem, pub FieldElem);

impl Lin {
    pub fn constant(a: FieldElem) -> Self {
        Lin(a, FieldElem::ZERO)
    }

    pub fn to_poly(self) -> UniPoly {
        UniPoly::linear(self.0, self.1)
    }

    #[inline]
    pub fn eval(self, x: FieldElem) -> FieldElem {
        self.0 + self.1 * x
    }
}

impl From<Lin> for UniPoly {
    fn from(l: Lin) -> UniPoly {
        l.to_poly()
    }
}

/// Partial assignment from levels to field elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    vals: Vec<Option<FieldElem>>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, level: u32, v: FieldElem) -> &mut Self {
        let l = level as usize;
        if self.vals.len() <= l {
            self.vals.resize(l + 1, None);
        }
        self.vals[l] = Some(v);
        self
    }

    pub fn with(mut self, level: u32, v: FieldElem) -> Self {
        self.set(level, v);
        self
    }

    pub fn unset(&mut self, level: u32) {
        if let Some(slot) = self.vals.get_mut(level as usize) {
            *slot = None;
        }
    }

    pub fn get(&self, level: u32) -> Option<FieldElem> {
        self.vals.get(level as usize).copied().flatten()
    }

    /// Dense values indexed by level (unset levels read as zero) and the
    /// single unset level among `levels`, if any.
    pub fn densify(
        &self,
        levels: impl Iterator<Item = u32>,
        width: usize,
    ) -> Result<(Vec<FieldElem>, Option<u32>), BddError> {
        let mut dense = vec![FieldElem::ZERO; width.max(self.vals.len())];
        for (l, v) in self.vals.iter().enumerate() {
            if let Some(v) = v {
                dense[l] = *v;
            }
        }
        let mut free = None;
        for l in levels {
            if self.get(l).is_none() {
                match free {
                    None => free = Some(l),
                    Some(f) if f != l => return Err(BddError::TooManyFree(f.max(l), f.min(l))),
                    _ => {}
                }
            }
        }
        Ok((dense, free))
    }
}

/// Reusable evaluation scratch: a memo table stamped per evaluation point, so
/// successive evaluations do not pay for clearing.
#[derive(Default, Debug)]
pub struct BddEvaluator {
    stamp: u32,
    seen: Vec<u32>,
    vals: Vec<Lin>,
    stack: Vec<(BddRef, bool)>,
}

impl BddEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a new evaluation point; previous memo entries become invalid.
    pub fn reset(&mut self, arena: &BddArena) {
        if self.seen.len() < arena.len() {
            self.seen.resize(arena.len(), 0);
            self.vals.resize(arena.len(), Lin::default());
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
    }

    #[inline]
    fn cached(&self, u: BddRef) -> Option<Lin> {
        match u {
            BddRef::FALSE => Some(Lin::constant(FieldElem::ZERO)),
            BddRef::TRUE => Some(Lin::constant(FieldElem::ONE)),
            _ if self.seen[u.index()] == self.stamp => Some(self.vals[u.index()]),
            _ => None,
        }
    }

    /// Evaluates `u` at the point `vals` (indexed by level) with the level
    /// `free` left symbolic. Memo entries persist until the next `reset`, so
    /// several roots can share work at one point.
    pub fn eval(&mut self, arena: &BddArena, u: BddRef, vals: &[FieldElem], free: Option<u32>) -> Lin {
        if let Some(v) = self.cached(u) {
            return v;
        }
        if self.seen.len() < arena.len() {
            self.seen.resize(arena.len(), 0);
            self.vals.resize(arena.len(), Lin::default());
        }
        self.stack.clear();
        self.stack.push((u, false));
        while let Some((n, ready)) = self.stack.pop() {
            if self.seen[n.index()] == self.stamp {
                continue;
            }
            let (lo, hi) = (arena.low(n), arena.high(n));
            if !ready {
                self.stack.push((n, true));
                for c in [hi, lo] {
                    if self.cached(c).is_none() {
                        self.stack.push((c, false));
                    }
                }
                continue;
            }
            let l = self.cached(lo).expect("child evaluated");
            let h = self.cached(hi).expect("child evaluated");
            let level = arena.level(n);
            let v = if free == Some(level) {
                // Children do not mention the free variable.
                Lin(l.0, h.0 - l.0)
            } else {
                let s = vals[level as usize];
                Lin(l.0 + s * (h.0 - l.0), l.1 + s * (h.1 - l.1))
            };
            self.seen[n.index()] = self.stamp;
            self.vals[n.index()] = v;
        }
        self.cached(u).expect("root evaluated")
    }
}

/// `[sigma] [[u]]` as a polynomial in the one level `sigma` leaves unset.
pub fn eval_bdd(arena: &BddArena, u: BddRef, sigma: &PartialAssignment) -> Result<UniPoly, BddError> {
    let support = arena.support(u);
    let width = support.max().unwrap_or(0) as usize + 1;
    let (dense, free) = sigma.densify(support.iter_asc(), width)?;
    let mut ev = BddEvaluator::new();
    ev.reset(arena);
    Ok(ev.eval(arena, u, &dense, free).to_poly())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::tests::two_of_three;

    fn f(v: u64) -> FieldElem {
        FieldElem::new(v)
    }

    /// xy + yz + zx - 3xyz
    fn fig3_poly(x: FieldElem, y: FieldElem, z: FieldElem) -> FieldElem {
        x * y + y * z + z * x - f(3) * x * y * z
    }

    #[test]
    fn three_var_values() {
        let mut a = BddArena::new();
        let u = two_of_three(&mut a);
        let s = PartialAssignment::new().with(3, f(1)).with(2, f(1)).with(1, f(0));
        assert_eq!(eval_bdd(&a, u, &s).unwrap(), UniPoly::ONE);
        let s = PartialAssignment::new().with(3, f(1)).with(1, f(0));
        assert_eq!(eval_bdd(&a, u, &s).unwrap(), UniPoly::X);
        let (x, y, z) = (f(12345), f(999), f(7));
        let s = PartialAssignment::new().with(3, x).with(2, y).with(1, z);
        assert_eq!(eval_bdd(&a, u, &s).unwrap(), UniPoly::constant(fig3_poly(x, y, z)));
    }

    #[test]
    fn true_is_one_everywhere() {
        let a = BddArena::new();
        let s = PartialAssignment::new();
        assert_eq!(eval_bdd(&a, BddRef::TRUE, &s).unwrap(), UniPoly::ONE);
    }

    #[test]
    fn two_free_levels_are_rejected() {
        let mut a = BddArena::new();
        let u = two_of_three(&mut a);
        let s = PartialAssignment::new().with(3, f(1));
        assert_eq!(eval_bdd(&a, u, &s), Err(BddError::TooManyFree(2, 1)));
    }

    #[test]
    fn evaluator_reuse_across_points() {
        let mut a = BddArena::new();
        let u = two_of_three(&mut a);
        let mut ev = BddEvaluator::new();
        for i in 0..20u64 {
            let vals = vec![f(0), f(i), f(i * i + 1), f(3 * i + 2)];
            ev.reset(&a);
            let got = ev.eval(&a, u, &vals, None);
            assert_eq!(got, Lin::constant(fig3_poly(vals[3], vals[2], vals[1])));
        }
    }
}
