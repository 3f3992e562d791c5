//! Variable subsets as bitmasks over a declared variable order.

use std::fmt;

/// Maximum number of variables a subset can address.
pub const MAX_VARS: usize = 32;

/// A set of variable indices; bit `i` stands for the `i`-th declared variable.
///
/// Profile coordinates are indexed by `mask - 1`, so `{0}`, `{1}`, `{0,1}`,
/// `{2}`, ... is the coordinate order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct VarSet(pub u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_VARS);
        VarSet(1 << i)
    }

    pub fn full(n: usize) -> Self {
        if n >= 32 {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(VarSet::EMPTY, |s, i| s | VarSet::singleton(i))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_VARS && self.0 & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VarSet) -> VarSet {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    /// Indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    /// Position of this non-empty subset in a profile vector.
    pub fn coord_index(self) -> usize {
        debug_assert!(!self.is_empty());
        self.0 as usize - 1
    }

    pub fn from_coord_index(idx: usize) -> Self {
        VarSet(idx as u32 + 1)
    }

    /// All non-empty subsets of `{0..n}` in coordinate order.
    pub fn nonempty_subsets(n: usize) -> impl Iterator<Item = VarSet> {
        (1u32..=VarSet::full(n).0).map(VarSet)
    }

    /// All subsets (including empty) of `self`.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let full = self.0;
        let mut cur: Option<u32> = Some(0);
        std::iter::from_fn(move || {
            let out = cur?;
            cur = if out == full {
                None
            } else {
                Some((out.wrapping_sub(full)) & full)
            };
            Some(VarSet(out))
        })
    }

    /// Comma-joined names, e.g. `a,b`.
    pub fn names<S: AsRef<str>>(self, names: &[S]) -> String {
        self.iter()
            .map(|i| names[i].as_ref())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl std::ops::BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, rhs: VarSet) -> VarSet {
        self.union(rhs)
    }
}

impl std::ops::BitAnd for VarSet {
    type Output = VarSet;
    fn bitand(self, rhs: VarSet) -> VarSet {
        self.intersection(rhs)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_order_is_bitmask_order() {
        let order: Vec<_> = VarSet::nonempty_subsets(2).collect();
        assert_eq!(order, vec![VarSet(1), VarSet(2), VarSet(3)]);
        assert_eq!(VarSet(3).coord_index(), 2);
        assert_eq!(VarSet::from_coord_index(2), VarSet(3));
    }

    #[test]
    fn subset_enumeration() {
        let s = VarSet::from_indices([0, 2, 3]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset_of(s)));
        assert_eq!(VarSet::EMPTY.subsets().count(), 1);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(s.names(&["a", "b", "c", "d"]), "a,c,d");
    }
}
