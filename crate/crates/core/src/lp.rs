//! Exact linear programming over the Shannon cone.
//!
//! `lp_min` minimizes a linear objective over `{h : g·h >= 0 for all g}`.
//! The feasible set is a cone, so the minimum is either 0 or unbounded. It is
//! decided by a phase-one simplex on the dual system `Σ y_i g_i = c, y >= 0`:
//! a feasible `y` is the dual certificate, and an infeasible phase one yields
//! a Farkas vector `h` with `g·h >= 0` for every `g` and `c·h < 0`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::elemental::{elemental_count, elementals, Elemental};
use crate::expr::InfoExpression;
use crate::lang::print_canonical;
use crate::profile::{default_names, subset_key};
use crate::rational::{format_exact, Rational};
use crate::varset::VarSet;

/// Largest arity the LP accepts.
pub const MAX_LP_VARS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("the Shannon LP supports 1 to {MAX_LP_VARS} variables, got {0}")]
    UnsupportedArity(usize),
    #[error("certificate failed exact re-verification")]
    CertificateRejected,
}

pub fn elemental_inequalities(n: usize) -> Result<Vec<InfoExpression>, LpError> {
    check_arity(n)?;
    Ok(elementals(n).into_iter().map(|e| e.expr).collect())
}

fn check_arity(n: usize) -> Result<(), LpError> {
    if (1..=MAX_LP_VARS).contains(&n) {
        Ok(())
    } else {
        Err(LpError::UnsupportedArity(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// Minimum is 0; `objective = Σ weights[i]·cone[i]` with `weights >= 0`.
    Zero { weights: Vec<Rational> },
    /// `ray` lies in the cone and `objective·ray = value < 0`.
    UnboundedBelow { ray: Vec<Rational>, value: Rational },
}

/// Minimizes `objective` over the cone cut out by `cone` (every expression
/// `>= 0`). All expressions must share the objective's arity.
pub fn lp_min(objective: &InfoExpression, cone: &[InfoExpression]) -> LpOutcome {
    let m = (1usize << objective.n()) - 1;
    let c = objective.dense();
    let cols: Vec<Vec<Rational>> = cone
        .iter()
        .map(|g| {
            assert_eq!(g.n(), objective.n(), "cone and objective arity differ");
            g.dense()
        })
        .collect();
    phase_one(m, &cols, &c)
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs of the phase-one objective, last entry is `-value`.
    cost: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let piv = self.rows[r][col].clone();
        if !piv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &piv;
                }
            }
        }
        let nz: Vec<usize> = (0..self.rows[r].len())
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row.is_empty() {
                continue;
            }
            eliminate(row, &prow, &nz, col);
        }
        eliminate(&mut self.cost, &prow, &nz, col);
        self.rows[r] = prow;
        self.basis[r] = col;
    }
}

fn eliminate(row: &mut [Rational], prow: &[Rational], nz: &[usize], col: usize) {
    let f = row[col].clone();
    if f.is_zero() {
        return;
    }
    for &j in nz {
        row[j] -= &f * &prow[j];
    }
}

fn phase_one(m: usize, cols: &[Vec<Rational>], c: &[Rational]) -> LpOutcome {
    let k = cols.len();
    let width = k + m + 1;
    let rhs = width - 1;
    let mut sign = vec![Rational::one(); m];
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = c[i].is_negative();
        if flip {
            sign[i] = -Rational::one();
        }
        let mut row = vec![Rational::zero(); width];
        for (j, col) in cols.iter().enumerate() {
            row[j] = if flip { -col[i].clone() } else { col[i].clone() };
        }
        row[k + i] = Rational::one();
        row[rhs] = c[i].abs();
        rows.push(row);
    }
    let mut cost = vec![Rational::zero(); width];
    for row in &rows {
        for j in 0..k {
            cost[j] -= &row[j];
        }
        cost[rhs] -= &row[rhs];
    }
    let mut t = Tableau {
        rows,
        cost,
        basis: (k..k + m).collect(),
    };

    // Bland's rule: lowest-index improving column, ties in the ratio test
    // broken by lowest basic index.
    while let Some(col) = (0..rhs).find(|&j| t.cost[j].is_negative()) {
        let mut best: Option<(usize, Rational)> = None;
        for (i, row) in t.rows.iter().enumerate() {
            if !row[col].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[col];
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && t.basis[i] < t.basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        let (r, _) = best.expect("phase one is bounded below by zero");
        t.pivot(r, col);
    }

    if t.cost[rhs].is_zero() {
        let mut weights = vec![Rational::zero(); k];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < k {
                weights[b] = t.rows[i][rhs].clone();
            }
        }
        LpOutcome::Zero { weights }
    } else {
        // Row duals of the flipped system are 1 - (reduced cost of the
        // artificial column); the Farkas vector is their negation, unflipped.
        let mut ray: Vec<Rational> = (0..m)
            .map(|i| -(Rational::one() - &t.cost[k + i]) * &sign[i])
            .collect();
        primitive(&mut ray);
        let value = dot(c, &ray);
        LpOutcome::UnboundedBelow { ray, value }
    }
}

/// Rescales a nonzero rational vector to coprime integers, keeping direction.
fn primitive(v: &mut [Rational]) {
    let den = v
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num = v
        .iter()
        .fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(&(x.numer() * &den / x.denom())));
    if num.is_zero() {
        return;
    }
    let f = Rational::new(den, num);
    for x in v.iter_mut() {
        *x *= &f;
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    ShannonType,
    NotShannonType,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::ShannonType => "shannon-type",
            Decision::NotShannonType => "not-shannon-type",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Positive weights on elemental inequalities summing to the expression.
    DualWeights(Vec<(Elemental, Rational)>),
    /// A polymatroid (dense, coordinate order) on which the expression is negative.
    Witness { coords: Vec<Rational>, value: Rational },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShannonTypeVerdict {
    pub expr: InfoExpression,
    pub decision: Decision,
    pub certificate: Certificate,
}

impl ShannonTypeVerdict {
    /// Re-checks the certificate with exact arithmetic.
    pub fn verify(&self) -> bool {
        let n = self.expr.n();
        match &self.certificate {
            Certificate::DualWeights(ws) => {
                let mut sum = InfoExpression::zero(n);
                for (e, w) in ws {
                    if w.is_negative() || e.expr.n() != n {
                        return false;
                    }
                    sum += e.expr.clone() * w.clone();
                }
                self.decision == Decision::ShannonType && sum == self.expr
            }
            Certificate::Witness { coords, value } => {
                coords.len() == (1usize << n) - 1
                    && elementals(n)
                        .iter()
                        .all(|e| !e.expr.evaluate_exact(coords).is_negative())
                    && self.expr.evaluate_exact(coords) == *value
                    && value.is_negative()
                    && self.decision == Decision::NotShannonType
            }
        }
    }

    pub fn is_shannon_type(&self) -> bool {
        self.decision == Decision::ShannonType
    }

    /// Certificate JSON. Dual weights are keyed by the canonical text of each
    /// elemental expression, witness coordinates by subset key.
    pub fn to_json<S: AsRef<str>>(&self, names: &[S]) -> Value {
        let expr = print_canonical(&self.expr, names);
        match &self.certificate {
            Certificate::DualWeights(ws) => {
                let map: BTreeMap<String, String> = ws
                    .iter()
                    .map(|(e, w)| (print_canonical(&e.expr, names), format_exact(w)))
                    .collect();
                let labels: BTreeMap<String, String> = ws
                    .iter()
                    .map(|(e, _)| (print_canonical(&e.expr, names), e.label(names)))
                    .collect();
                json!({
                    "expression": expr,
                    "decision": self.decision.as_str(),
                    "certificate": {
                        "kind": "dual-weights",
                        "dual_weights": map,
                        "labels": labels,
                    }
                })
            }
            Certificate::Witness { coords, value } => {
                let map: BTreeMap<String, String> = coords
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (subset_key(VarSet::from_coord_index(i), names), format_exact(x)))
                    .collect();
                json!({
                    "expression": expr,
                    "decision": self.decision.as_str(),
                    "certificate": {
                        "kind": "witness-polymatroid",
                        "witness": map,
                        "value": format_exact(value),
                    }
                })
            }
        }
    }
}

/// Decides whether `e >= 0` follows from the elemental inequalities.
pub fn is_shannon_type(e: &InfoExpression) -> Result<ShannonTypeVerdict, LpError> {
    let n = e.n();
    check_arity(n)?;
    let els = elementals(n);
    debug_assert_eq!(els.len(), elemental_count(n));

    let certificate = if e.is_zero() {
        Certificate::DualWeights(Vec::new())
    } else if let Some((el, w)) = els.iter().find_map(|el| {
        e.is_positive_multiple_of(&el.expr).then(|| {
            let (s, c) = el.expr.terms().next().expect("elementals are nonzero");
            (el.clone(), e.coefficient(s) / c)
        })
    }) {
        Certificate::DualWeights(vec![(el, w)])
    } else {
        let cone: Vec<InfoExpression> = els.iter().map(|x| x.expr.clone()).collect();
        match lp_min(e, &cone) {
            LpOutcome::Zero { weights } => Certificate::DualWeights(
                els.into_iter()
                    .zip(weights)
                    .filter(|(_, w)| !w.is_zero())
                    .collect(),
            ),
            LpOutcome::UnboundedBelow { ray, value } => Certificate::Witness { coords: ray, value },
        }
    };
    let decision = match certificate {
        Certificate::DualWeights(_) => Decision::ShannonType,
        Certificate::Witness { .. } => Decision::NotShannonType,
    };
    let verdict = ShannonTypeVerdict {
        expr: e.clone(),
        decision,
        certificate,
    };
    if verdict.verify() {
        Ok(verdict)
    } else {
        Err(LpError::CertificateRejected)
    }
}

/// Names used in certificate output when none are supplied.
pub fn certificate_names(n: usize) -> Vec<String> {
    default_names(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, Quantity};
    use crate::rational::int;

    fn s(i: usize) -> VarSet {
        VarSet::singleton(i)
    }

    #[test]
    fn arity_cap() {
        assert_eq!(elemental_inequalities(2).unwrap().len(), 3);
        assert_eq!(elemental_inequalities(3).unwrap().len(), 9);
        assert_eq!(elemental_inequalities(4).unwrap().len(), 28);
        assert_eq!(elemental_inequalities(7), Err(LpError::UnsupportedArity(7)));
        assert_eq!(elemental_inequalities(0), Err(LpError::UnsupportedArity(0)));
    }

    #[test]
    fn mutual_information_is_in_the_cone() {
        let e = expand(&Quantity::mutual_info(s(0), s(1), VarSet::EMPTY), 2).unwrap();
        match lp_min(&e, &elemental_inequalities(2).unwrap()) {
            LpOutcome::Zero { weights } => assert_eq!(weights, vec![int(0), int(0), int(1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_entropy_is_unbounded() {
        let e = InfoExpression::term(2, s(0), int(-1));
        match lp_min(&e, &elemental_inequalities(2).unwrap()) {
            LpOutcome::UnboundedBelow { ray, value } => {
                assert!(value.is_negative());
                assert!(ray[0].is_positive());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sum_of_elementals_recovers_weights() {
        let els = elemental_inequalities(3).unwrap();
        let e = els[0].clone() * int(2) + els[4].clone() + els[7].clone() * Rational::new(1.into(), 3.into());
        let v = is_shannon_type(&e).unwrap();
        assert!(v.is_shannon_type());
        assert!(v.verify());
    }

    #[test]
    fn tampered_certificate_fails() {
        let e = expand(&Quantity::mutual_info(s(0), s(1), s(2)), 3).unwrap();
        let mut v = is_shannon_type(&e).unwrap();
        if let Certificate::DualWeights(ws) = &mut v.certificate {
            ws[0].1 = int(2);
        }
        assert!(!v.verify());
    }
}
