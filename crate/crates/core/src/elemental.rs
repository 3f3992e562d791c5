//! Elemental Shannon inequalities: the minimal generating set of the
//! polymatroid cone.

use crate::expr::{expand, InfoExpression, Quantity};
use crate::varset::VarSet;

/// One elemental inequality `expr ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elemental {
    pub quantity: Quantity,
    pub expr: InfoExpression,
}

impl Elemental {
    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> String {
        self.quantity.display(names)
    }
}

/// `n` monotonicity terms `H(i | rest)`, then every `I(i;j|K)` with `i < j`
/// and `K` ranging over subsets of the remaining variables in coordinate
/// order. Count is `n + C(n,2)·2^(n-2)`.
pub fn elementals(n: usize) -> Vec<Elemental> {
    let full = VarSet::full(n);
    let mut out = Vec::with_capacity(elemental_count(n));
    for i in 0..n {
        let q = Quantity::entropy(VarSet::singleton(i), full.difference(VarSet::singleton(i)));
        out.push(Elemental {
            expr: expand(&q, n).expect("elemental quantities are well formed"),
            quantity: q,
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let (si, sj) = (VarSet::singleton(i), VarSet::singleton(j));
            let rest = full.difference(si | sj);
            let mut ks: Vec<VarSet> = rest.subsets().collect();
            ks.sort();
            for k in ks {
                let q = Quantity::mutual_info(si, sj, k);
                out.push(Elemental {
                    expr: expand(&q, n).expect("elemental quantities are well formed"),
                    quantity: q,
                });
            }
        }
    }
    out
}

pub fn elemental_count(n: usize) -> usize {
    if n < 2 {
        n
    } else {
        n + n * (n - 1) / 2 * (1 << (n - 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_formula() {
        assert_eq!(elementals(1).len(), 1);
        assert_eq!(elementals(2).len(), 3);
        assert_eq!(elementals(3).len(), 9);
        assert_eq!(elementals(4).len(), 28);
        assert_eq!(elementals(6).len(), 246);
        for n in 1..=6 {
            assert_eq!(elementals(n).len(), elemental_count(n));
        }
    }

    #[test]
    fn elementals_are_distinct() {
        let es = elementals(4);
        for (i, a) in es.iter().enumerate() {
            for b in &es[i + 1..] {
                assert!(!a.expr.is_positive_multiple_of(&b.expr));
            }
        }
    }
}
