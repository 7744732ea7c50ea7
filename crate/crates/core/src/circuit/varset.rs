use std::fmt;

/// A set of variable levels (1-based), stored as a bitset.
///
/// Trailing zero words are always trimmed so that structural equality and
/// hashing agree with set equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    pub fn new() -> Self {
        VarSet { words: Vec::new() }
    }

    pub fn singleton(level: u32) -> Self {
        let mut s = VarSet::new();
        s.insert(level);
        s
    }

    /// `{1, ..., n}`.
    pub fn range(n: u32) -> Self {
        let mut s = VarSet::new();
        for l in 1..=n {
            s.insert(l);
        }
        s
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if w < self.words.len() {
            self.words[w] &= !(1 << b);
            self.trim();
        }
    }

    pub fn contains(&self, level: u32) -> bool {
        let (w, b) = ((level / 64) as usize, level % 64);
        w < self.words.len() && self.words[w] & (1 << b) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let (long, short) = if self.words.len() >= other.words.len() { (self, other) } else { (other, self) };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w |= s;
        }
        VarSet { words }
    }

    pub fn without(&self, level: u32) -> VarSet {
        let mut s = self.clone();
        s.remove(level);
        s
    }

    pub fn with(&self, level: u32) -> VarSet {
        let mut s = self.clone();
        s.insert(level);
        s
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.words.iter().enumerate().all(|(i, w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    pub fn max(&self) -> Option<u32> {
        self.iter_desc().next()
    }

    /// Number of members `<= level`.
    pub fn rank(&self, level: u32) -> usize {
        let w = (level / 64) as usize;
        let mut r: usize = self.words.iter().take(w).map(|x| x.count_ones() as usize).sum();
        if let Some(&word) = self.words.get(w) {
            let b = level % 64;
            let mask = if b == 63 { u64::MAX } else { (1u64 << (b + 1)) - 1 };
            r += (word & mask).count_ones() as usize;
        }
        r
    }

    pub fn iter_asc(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros();
                w &= w - 1;
                Some(i as u32 * 64 + b)
            })
        })
    }

    /// Members from the highest level down; this is the canonical order used
    /// to align partial assignments with a node's free set.
    pub fn iter_desc(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().rev().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = 63 - w.leading_zeros();
                w &= !(1u64 << b);
                Some(i as u32 * 64 + b)
            })
        })
    }

    pub fn to_vec_desc(&self) -> Vec<u32> {
        self.iter_desc().collect()
    }
}

impl FromIterator<u32> for VarSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = VarSet::new();
        for l in iter {
            s.insert(l);
        }
        s
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter_asc()).finish()
    }
}
