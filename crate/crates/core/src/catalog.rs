//! Built-in inequalities over four variables `(a, b, c, d)` and the checker
//! for conditional inequalities.
//!
//! Catalog inequalities are positional: the first four declared variables of
//! a distribution or profile play the roles of `a, b, c, d`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{DistError, JointDistribution};
use crate::elemental::elementals;
use crate::expr::{expand, ExprError, InfoExpression, Quantity, TermSum};
use crate::profile::EntropyProfile;
use crate::rational::{int, rat, Rational};
use crate::varset::VarSet;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

const A: VarSet = VarSet(1);
const B: VarSet = VarSet(2);
const C: VarSet = VarSet(4);
const D: VarSet = VarSet(8);
const E: VarSet = VarSet::EMPTY;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("constraint `{constraint}` is not an independence or determinism pattern and evaluates to {value}")]
    ConstraintNotApplicable { constraint: String, value: f64 },
    #[error("inequality has {expected} variables, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `expr = 0`, with the recognized informational pattern when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub expr: InfoExpression,
    pub pattern: Option<Quantity>,
}

impl Constraint {
    pub fn from_quantity(q: Quantity, n: usize) -> Result<Self, ExprError> {
        Ok(Constraint {
            expr: expand(&q, n)?,
            pattern: Some(q),
        })
    }

    pub fn from_expr(expr: InfoExpression) -> Self {
        let pattern = recognize(&expr);
        Constraint { expr, pattern }
    }

    pub fn display<S: AsRef<str>>(&self, names: &[S]) -> String {
        match &self.pattern {
            Some(q) => q.display(names),
            None => crate::lang::print_canonical(&self.expr, names),
        }
    }
}

/// If all `constraints` are zero then `body ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalInequality {
    pub name: String,
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
    /// Body as written, term by term.
    pub body_terms: TermSum,
    /// Canonical body.
    pub body: InfoExpression,
}

impl ConditionalInequality {
    pub fn new(
        name: impl Into<String>,
        names: Vec<String>,
        constraints: Vec<Constraint>,
        body_terms: TermSum,
    ) -> Result<Self, ExprError> {
        let n = names.len();
        if let Some(c) = constraints.iter().find(|c| c.expr.n() != n) {
            return Err(ExprError::DimensionMismatch {
                expected: n,
                found: c.expr.n(),
            });
        }
        let body = body_terms.canonical(n)?;
        Ok(ConditionalInequality {
            name: name.into(),
            names,
            constraints,
            body_terms,
            body,
        })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn is_unconditional(&self) -> bool {
        self.constraints.is_empty()
    }
}

fn abcd() -> Vec<String> {
    ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()
}

fn mi(l: VarSet, r: VarSet, g: VarSet) -> Quantity {
    Quantity::mutual_info(l, r, g)
}

fn four(name: &str, constraints: &[Quantity], body: TermSum) -> ConditionalInequality {
    let constraints = constraints
        .iter()
        .map(|q| Constraint::from_quantity(*q, 4).expect("catalog quantities are valid"))
        .collect();
    ConditionalInequality::new(name, abcd(), constraints, body).expect("catalog bodies are valid")
}

/// `I(c;d|a) + I(c;d|b) - I(c;d)`.
fn body_1() -> TermSum {
    TermSum::new()
        .plus(int(1), mi(C, D, A))
        .plus(int(1), mi(C, D, B))
        .plus(int(-1), mi(C, D, E))
}

/// `I(c;d|a) + I(c;d|b) + I(a;b) - I(c;d)`.
fn body_234() -> TermSum {
    TermSum::new()
        .plus(int(1), mi(C, D, A))
        .plus(int(1), mi(C, D, B))
        .plus(int(1), mi(A, B, E))
        .plus(int(-1), mi(C, D, E))
}

pub fn zhang_yeung() -> ConditionalInequality {
    let body = TermSum::new()
        .plus(int(2), mi(C, D, A))
        .plus(int(1), mi(C, D, B))
        .plus(int(1), mi(A, B, E))
        .plus(int(1), mi(A, C, D))
        .plus(int(1), mi(A, D, C))
        .plus(int(-1), mi(C, D, E));
    four("zy98", &[], body)
}

/// Conditional inequalities `cond1` through `cond4`.
pub fn conditional(which: u8) -> Option<ConditionalInequality> {
    Some(match which {
        1 => four("cond1", &[mi(A, B, C), mi(A, B, E)], body_1()),
        2 => four("cond2", &[mi(A, B, C), mi(B, D, C)], body_234()),
        3 => four("cond3", &[mi(A, B, C), Quantity::entropy(C, A | B)], body_234()),
        4 => four("cond4", &[mi(A, C, D), mi(A, D, C)], body_234()),
        _ => return None,
    })
}

/// The parameterized family, valid for every `k ≥ 1`:
/// `I(c;d|a) + I(c;d|b) + I(a;b) + (1/k) I(c;d|a)
///  + ((k+1)/2) (I(a;c|d) + I(a;d|c)) - I(c;d) ≥ 0`.
pub fn matus_star(k: u32) -> ConditionalInequality {
    assert!(k >= 1, "matus-star needs k >= 1");
    let k = k as i64;
    let half = rat(k + 1, 2);
    let body = body_234()
        .plus(rat(1, k), mi(C, D, A))
        .plus(half.clone(), mi(A, C, D))
        .plus(half, mi(A, D, C));
    four(&format!("matus-star({k})"), &[], body)
}

/// Ingleton in the orientation matching the bodies above:
/// `I(c;d|a) + I(c;d|b) + I(a;b) - I(c;d) ≥ 0`. Not an information
/// inequality; it holds for linear ranks but fails on some entropic points.
pub fn ingleton() -> ConditionalInequality {
    four("ingleton", &[], body_234())
}

/// The 28 elemental inequalities over `(a, b, c, d)`.
pub fn basic() -> Vec<ConditionalInequality> {
    let names = abcd();
    elementals(4)
        .into_iter()
        .map(|e| {
            four(
                &format!("basic:{}", e.label(&names)),
                &[],
                TermSum::new().plus(int(1), e.quantity),
            )
        })
        .collect()
}

/// One family of the built-in catalog.
#[derive(Debug, Clone)]
pub enum CatalogEntry {
    Basic(Vec<ConditionalInequality>),
    Fixed(ConditionalInequality),
    /// Parameterized by an integer `k ≥ 1`.
    Family {
        name: &'static str,
        generator: fn(u32) -> ConditionalInequality,
    },
}

impl CatalogEntry {
    pub fn name(&self) -> &str {
        match self {
            CatalogEntry::Basic(_) => "basic",
            CatalogEntry::Fixed(i) => &i.name,
            CatalogEntry::Family { name, .. } => name,
        }
    }
}

/// Basic inequalities plus the six named families.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = vec![CatalogEntry::Basic(basic()), CatalogEntry::Fixed(zhang_yeung())];
    out.extend((1..=4).map(|i| CatalogEntry::Fixed(conditional(i).expect("1..=4"))));
    out.push(CatalogEntry::Family {
        name: "matus-star",
        generator: matus_star,
    });
    out
}

/// Resolves a frozen name: `basic`, `zy98`, `cond1`..`cond4`,
/// `matus-star(k)`, `ingleton`.
pub fn lookup(name: &str) -> Option<Vec<ConditionalInequality>> {
    match name {
        "basic" => Some(basic()),
        "zy98" => Some(vec![zhang_yeung()]),
        "ingleton" => Some(vec![ingleton()]),
        _ => {
            if let Some(k) = name.strip_prefix("cond") {
                let k: u8 = k.parse().ok()?;
                return conditional(k).map(|i| vec![i]);
            }
            let k = name.strip_prefix("matus-star(")?.strip_suffix(')')?;
            let k: u32 = k.trim().parse().ok().filter(|&k| k >= 1)?;
            Some(vec![matus_star(k)])
        }
    }
}

/// Finds `q` with `expr = λ·expand(q)`, `λ > 0`, by enumerating every
/// disjoint placement of the variables. Only attempted for `n ≤ 8`.
pub fn recognize(expr: &InfoExpression) -> Option<Quantity> {
    let n = expr.n();
    if n > 8 || expr.is_zero() {
        return None;
    }
    let support = expr
        .terms()
        .fold(VarSet::EMPTY, |acc, (s, _)| acc | s);
    let vars: Vec<usize> = support.iter().collect();
    let k = vars.len();
    let mut candidates = Vec::new();
    for code in 0..4usize.pow(k as u32) {
        let mut parts = [VarSet::EMPTY; 4];
        let mut c = code;
        for &v in &vars {
            parts[c % 4] = parts[c % 4] | VarSet::singleton(v);
            c /= 4;
        }
        let [none, left, right, given] = parts;
        if !none.is_empty() {
            continue;
        }
        // left/right: I(left;right|given) or, with right empty, H(left|given).
        if right.is_empty() {
            if !left.is_empty() {
                candidates.push(Quantity::entropy(left, given));
            }
        } else if !left.is_empty() && left < right {
            candidates.push(Quantity::mutual_info(left, right, given));
        }
    }
    candidates
        .into_iter()
        .find(|q| expand(q, n).is_ok_and(|e| expr.is_positive_multiple_of(&e)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintStatus {
    /// Certified zero by an exact structural test.
    ExactZero,
    /// Certified non-zero by an exact structural test.
    ExactNonzero,
    /// Within tolerance of zero; not certified.
    NumericZero,
    NumericNonzero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub constraint: String,
    pub value: f64,
    pub status: ConstraintStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub inequality: String,
    pub applicable: bool,
    pub constraints: Vec<ConstraintRecord>,
    /// Body value, reported whenever the constraints hold.
    pub body: Option<f64>,
    /// `body ≥ -tol`.
    pub holds: Option<bool>,
    /// Set when some constraint was accepted only numerically.
    pub numeric_warning: bool,
}

fn finish(
    ineq: &ConditionalInequality,
    constraints: Vec<ConstraintRecord>,
    body: f64,
    tol: f64,
) -> CheckVerdict {
    let applicable = constraints.iter().all(|c| {
        matches!(
            c.status,
            ConstraintStatus::ExactZero | ConstraintStatus::NumericZero
        )
    });
    let numeric_warning = constraints
        .iter()
        .any(|c| c.status == ConstraintStatus::NumericZero);
    CheckVerdict {
        inequality: ineq.name.clone(),
        applicable,
        constraints,
        body: applicable.then_some(body),
        holds: applicable.then_some(body >= -tol),
        numeric_warning,
    }
}

/// Checks `ineq` on a distribution. Recognized constraints are certified by
/// exact independence or functional-dependence tests; other constraints fall
/// back to `|value| ≤ tol` and set the warning flag.
pub fn check_conditional(
    ineq: &ConditionalInequality,
    d: &JointDistribution,
    tol: f64,
) -> Result<CheckVerdict, CheckError> {
    if d.n() != ineq.n() {
        return Err(CheckError::DimensionMismatch {
            expected: ineq.n(),
            found: d.n(),
        });
    }
    let profile = EntropyProfile::of(d).map_err(|_| CheckError::DimensionMismatch {
        expected: ineq.n(),
        found: d.n(),
    })?;
    let mut records = Vec::new();
    for c in &ineq.constraints {
        let value = c.expr.evaluate(&profile)?;
        let status = match c.pattern {
            Some(Quantity::MutualInfo { left, right, given }) => {
                if d.is_conditionally_independent(left, right, given)? {
                    ConstraintStatus::ExactZero
                } else {
                    ConstraintStatus::ExactNonzero
                }
            }
            Some(Quantity::Entropy { of, given }) => {
                if d.is_function_of(of, given)? {
                    ConstraintStatus::ExactZero
                } else {
                    ConstraintStatus::ExactNonzero
                }
            }
            None if value.abs() <= tol => ConstraintStatus::NumericZero,
            None => {
                return Err(CheckError::ConstraintNotApplicable {
                    constraint: c.display(&ineq.names),
                    value,
                })
            }
        };
        records.push(ConstraintRecord {
            constraint: c.display(&ineq.names),
            value,
            status,
        });
    }
    let body = ineq.body.evaluate(&profile)?;
    Ok(finish(ineq, records, body, tol))
}

/// Profile-only variant: every constraint is judged numerically.
pub fn check_conditional_profile(
    ineq: &ConditionalInequality,
    p: &EntropyProfile,
    tol: f64,
) -> Result<CheckVerdict, CheckError> {
    if p.n() != ineq.n() {
        return Err(CheckError::DimensionMismatch {
            expected: ineq.n(),
            found: p.n(),
        });
    }
    let mut records = Vec::new();
    for c in &ineq.constraints {
        let value = c.expr.evaluate(p)?;
        let status = if value.abs() <= tol {
            ConstraintStatus::NumericZero
        } else if c.pattern.is_some() {
            ConstraintStatus::NumericNonzero
        } else {
            return Err(CheckError::ConstraintNotApplicable {
                constraint: c.display(&ineq.names),
                value,
            });
        };
        records.push(ConstraintRecord {
            constraint: c.display(&ineq.names),
            value,
            status,
        });
    }
    let body = ineq.body.evaluate(p)?;
    Ok(finish(ineq, records, body, tol))
}

/// Coefficient `(k+1)/2` used by the family, exposed for reports.
pub fn matus_weight(k: u32) -> Rational {
    rat(k as i64 + 1, 2)
}
