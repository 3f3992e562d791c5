//! Information expressions: sparse linear functionals over subset-entropy
//! coordinates, and the informational quantities they are built from.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::profile::EntropyProfile;
use crate::rational::{int, to_f64, Rational};
use crate::varset::VarSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("variable subsets overlap")]
    OverlappingSubsets,
    #[error("variable subset is empty")]
    EmptySubset,
    #[error("dimension mismatch: expression over {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subset refers to a variable outside 0..{0}")]
    OutOfRange(usize),
}

/// `H(S|T)` or `I(S;T|U)` over variable subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantity {
    Entropy { of: VarSet, given: VarSet },
    MutualInfo { left: VarSet, right: VarSet, given: VarSet },
}

impl Quantity {
    pub fn entropy(of: VarSet, given: VarSet) -> Self {
        Quantity::Entropy { of, given }
    }

    pub fn mutual_info(left: VarSet, right: VarSet, given: VarSet) -> Self {
        Quantity::MutualInfo { left, right, given }
    }

    /// Every variable the quantity mentions.
    pub fn support(&self) -> VarSet {
        match *self {
            Quantity::Entropy { of, given } => of | given,
            Quantity::MutualInfo { left, right, given } => left | right | given,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ExprError> {
        let (parts, nonempty): (Vec<VarSet>, Vec<VarSet>) = match *self {
            Quantity::Entropy { of, given } => (vec![of, given], vec![of]),
            Quantity::MutualInfo { left, right, given } => {
                (vec![left, right, given], vec![left, right])
            }
        };
        if nonempty.iter().any(|s| s.is_empty()) {
            return Err(ExprError::EmptySubset);
        }
        if !self.support().is_subset_of(VarSet::full(n)) {
            return Err(ExprError::OutOfRange(n));
        }
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                if !a.is_disjoint(*b) {
                    return Err(ExprError::OverlappingSubsets);
                }
            }
        }
        Ok(())
    }

    /// Text in the expression language, e.g. `I(c;d|a)`.
    pub fn display<S: AsRef<str>>(&self, names: &[S]) -> String {
        match *self {
            Quantity::Entropy { of, given } if given.is_empty() => format!("H({})", of.names(names)),
            Quantity::Entropy { of, given } => {
                format!("H({}|{})", of.names(names), given.names(names))
            }
            Quantity::MutualInfo { left, right, given } if given.is_empty() => {
                format!("I({};{})", left.names(names), right.names(names))
            }
            Quantity::MutualInfo { left, right, given } => format!(
                "I({};{}|{})",
                left.names(names),
                right.names(names),
                given.names(names)
            ),
        }
    }
}

/// Inclusion-exclusion expansion of a quantity into subset entropies.
pub fn expand(q: &Quantity, n: usize) -> Result<InfoExpression, ExprError> {
    q.validate(n)?;
    let mut e = InfoExpression::zero(n);
    match *q {
        Quantity::Entropy { of, given } => {
            e.add_term(of | given, int(1));
            e.add_term(given, int(-1));
        }
        Quantity::MutualInfo { left, right, given } => {
            e.add_term(left | given, int(1));
            e.add_term(right | given, int(1));
            e.add_term(left | right | given, int(-1));
            e.add_term(given, int(-1));
        }
    }
    Ok(e)
}

/// A weighted sum of quantities, kept in the form it was written.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermSum {
    pub terms: Vec<(Rational, Quantity)>,
}

impl TermSum {
    pub fn new() -> Self {
        TermSum::default()
    }

    pub fn plus(mut self, coef: Rational, q: Quantity) -> Self {
        self.terms.push((coef, q));
        self
    }

    pub fn canonical(&self, n: usize) -> Result<InfoExpression, ExprError> {
        let mut e = InfoExpression::zero(n);
        for (c, q) in &self.terms {
            e += expand(q, n)? * c.clone();
        }
        Ok(e)
    }

    pub fn display<S: AsRef<str>>(&self, names: &[S]) -> String {
        let mut out = String::new();
        for (k, (c, q)) in self.terms.iter().enumerate() {
            let (neg, mag) = (c.is_negative(), c.abs());
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mag != int(1) {
                out.push_str(&crate::rational::format_exact(&mag));
                out.push('*');
            }
            out.push_str(&q.display(names));
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Sparse linear functional `Σ coef(S)·H(S)` over non-empty subsets.
///
/// Zero coefficients are never stored, so structural equality is equality of
/// functionals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InfoExpression {
    n: usize,
    terms: BTreeMap<VarSet, Rational>,
}

impl InfoExpression {
    pub fn zero(n: usize) -> Self {
        InfoExpression {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// `coef · H(s)`.
    pub fn term(n: usize, s: VarSet, coef: Rational) -> Self {
        let mut e = Self::zero(n);
        e.add_term(s, coef);
        e
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coef · H(s)`; the empty set contributes nothing.
    pub fn add_term(&mut self, s: VarSet, coef: Rational) {
        if s.is_empty() || coef.is_zero() {
            return;
        }
        debug_assert!(s.is_subset_of(VarSet::full(self.n)));
        let slot = self.terms.entry(s).or_insert_with(Rational::zero);
        *slot += coef;
        if slot.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn coefficient(&self, s: VarSet) -> Rational {
        self.terms.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in coordinate order.
    pub fn terms(&self) -> impl Iterator<Item = (VarSet, &Rational)> {
        self.terms.iter().map(|(s, c)| (*s, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dot product with a profile.
    pub fn evaluate(&self, p: &EntropyProfile) -> Result<f64, ExprError> {
        if p.n() != self.n {
            return Err(ExprError::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        Ok(self
            .terms
            .iter()
            .fold(0.0, |acc, (s, c)| acc + to_f64(c) * p.get(*s)))
    }

    /// Exact dot product with a rational coordinate vector (indexed by
    /// `VarSet::coord_index`).
    pub fn evaluate_exact(&self, coords: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(s, c)| c * &coords[s.coord_index()])
            .sum()
    }

    /// Sum of `|coef|` over terms whose subset satisfies `pred`.
    pub fn l1_mass(&self, pred: impl Fn(VarSet) -> bool) -> Rational {
        self.terms
            .iter()
            .filter(|(s, _)| pred(**s))
            .map(|(_, c)| c.abs())
            .sum()
    }

    /// Dense coefficient vector in coordinate order.
    pub fn dense(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); (1usize << self.n) - 1];
        for (s, c) in &self.terms {
            v[s.coord_index()] = c.clone();
        }
        v
    }

    pub fn from_dense(n: usize, coords: &[Rational]) -> Self {
        let mut e = Self::zero(n);
        for (i, c) in coords.iter().enumerate() {
            e.add_term(VarSet::from_coord_index(i), c.clone());
        }
        e
    }

    /// Re-indexes onto `new_n` variables via `map[old] = new`.
    pub fn relabel(&self, new_n: usize, map: &[usize]) -> Self {
        let mut e = Self::zero(new_n);
        for (s, c) in &self.terms {
            e.add_term(VarSet::from_indices(s.iter().map(|i| map[i])), c.clone());
        }
        e
    }

    /// True when `self = λ·other` for some rational `λ > 0`.
    pub fn is_positive_multiple_of(&self, other: &InfoExpression) -> bool {
        if self.n != other.n || self.terms.len() != other.terms.len() {
            return false;
        }
        let Some((s0, c0)) = self.terms.iter().next() else {
            return other.is_zero();
        };
        let Some(d0) = other.terms.get(s0) else {
            return false;
        };
        let ratio = c0 / d0;
        ratio.is_positive()
            && self
                .terms
                .iter()
                .all(|(s, c)| other.terms.get(s).is_some_and(|d| d * &ratio == *c))
    }
}

impl AddAssign for InfoExpression {
    fn add_assign(&mut self, rhs: InfoExpression) {
        debug_assert_eq!(self.n, rhs.n);
        for (s, c) in rhs.terms {
            self.add_term(s, c);
        }
    }
}

impl Add for InfoExpression {
    type Output = InfoExpression;
    fn add(mut self, rhs: InfoExpression) -> InfoExpression {
        self += rhs;
        self
    }
}

impl Neg for InfoExpression {
    type Output = InfoExpression;
    fn neg(mut self) -> InfoExpression {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for InfoExpression {
    type Output = InfoExpression;
    fn sub(self, rhs: InfoExpression) -> InfoExpression {
        self + (-rhs)
    }
}

impl Mul<Rational> for InfoExpression {
    type Output = InfoExpression;
    fn mul(mut self, k: Rational) -> InfoExpression {
        if k.is_zero() {
            return InfoExpression::zero(self.n);
        }
        for c in self.terms.values_mut() {
            *c = &*c * &k;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: VarSet = VarSet(1);
    const B: VarSet = VarSet(2);
    const C: VarSet = VarSet(4);
    const D: VarSet = VarSet(8);

    #[test]
    fn expansions() {
        let i_ab = expand(&Quantity::mutual_info(A, B, VarSet::EMPTY), 4).unwrap();
        let want = InfoExpression::term(4, A, int(1)) + InfoExpression::term(4, B, int(1))
            - InfoExpression::term(4, A | B, int(1));
        assert_eq!(i_ab, want);

        let i_cd_a = expand(&Quantity::mutual_info(C, D, A), 4).unwrap();
        assert_eq!(i_cd_a.coefficient(A | C), int(1));
        assert_eq!(i_cd_a.coefficient(A | D), int(1));
        assert_eq!(i_cd_a.coefficient(A | C | D), int(-1));
        assert_eq!(i_cd_a.coefficient(A), int(-1));
        assert_eq!(i_cd_a.len(), 4);

        let h = expand(&Quantity::entropy(C, A | B), 4).unwrap();
        assert_eq!(h.coefficient(A | B | C), int(1));
        assert_eq!(h.coefficient(A | B), int(-1));
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn expansion_errors() {
        assert_eq!(
            expand(&Quantity::mutual_info(A | B, B, VarSet::EMPTY), 4),
            Err(ExprError::OverlappingSubsets)
        );
        assert_eq!(
            expand(&Quantity::mutual_info(A, B, A), 4),
            Err(ExprError::OverlappingSubsets)
        );
        assert_eq!(
            expand(&Quantity::entropy(VarSet::EMPTY, A), 4),
            Err(ExprError::EmptySubset)
        );
        assert_eq!(
            expand(&Quantity::entropy(VarSet(16), A), 4),
            Err(ExprError::OutOfRange(4))
        );
    }

    #[test]
    fn cancellation_leaves_no_zero_coefficients() {
        let q = Quantity::mutual_info(A, B, VarSet::EMPTY);
        let e = expand(&q, 2).unwrap() - expand(&q, 2).unwrap();
        assert!(e.is_zero());
        assert!((e * int(3)).is_zero());
    }

    #[test]
    fn positive_multiples() {
        let e = expand(&Quantity::mutual_info(A, B, C), 4).unwrap();
        assert!((e.clone() * int(3)).is_positive_multiple_of(&e));
        assert!(!(e.clone() * int(-1)).is_positive_multiple_of(&e));
        assert!(!e.is_positive_multiple_of(&expand(&Quantity::mutual_info(A, B, D), 4).unwrap()));
    }

    #[test]
    fn display_forms() {
        let names = ["a", "b", "c", "d"];
        assert_eq!(Quantity::mutual_info(C, D, A).display(&names), "I(c;d|a)");
        assert_eq!(Quantity::entropy(C, A | B).display(&names), "H(c|a,b)");
        let s = TermSum::new()
            .plus(int(2), Quantity::mutual_info(C, D, A))
            .plus(int(-1), Quantity::mutual_info(C, D, VarSet::EMPTY));
        assert_eq!(s.display(&names), "2*I(c;d|a) - I(c;d)");
    }
}
