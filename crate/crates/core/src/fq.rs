//! The line/parabola quadruple over a prime field `F_q`.
//!
//! `c` is a random non-vertical line `y = c0 + c1 x`, `a` and `b` are
//! independent uniform points of `c`, and `d` is a uniform parabola
//! `y = d0 + d1 x + d2 x^2` (`d2 != 0`) through `a` and `b`, tangent to `c`
//! when `a = b`. Every such parabola is `c(x) + d2 (x - xa)(x - xb)`, which
//! gives the enumeration below directly and handles tangency as a repeated
//! root in every characteristic.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dist::{Budget, DistError, JointDistribution, Variable};
use crate::expr::Quantity;
use crate::primes::{is_prime, primes};
use crate::profile::{EntropyProfile, ProfileError};
use crate::rational::{format_exact, int, rat, to_f64, Rational};
use crate::varset::VarSet;

/// Largest `q` for which the joint distribution is enumerated.
pub const MAX_BRUTE_FORCE_Q: u64 = 31;

/// Tolerance used when comparing enumerated entropies with closed forms.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FqError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {q} exceeds the enumeration cap {MAX_BRUTE_FORCE_Q}")]
    TooLarge { q: u64 },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Arithmetic modulo a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FqError> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(FqError::NotPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn order(self) -> u32 {
        self.p
    }

    pub fn elements(self) -> std::ops::Range<u32> {
        0..self.p
    }

    pub fn add(self, x: u32, y: u32) -> u32 {
        ((x as u64 + y as u64) % self.p as u64) as u32
    }

    pub fn sub(self, x: u32, y: u32) -> u32 {
        ((x as u64 + self.p as u64 - y as u64) % self.p as u64) as u32
    }

    pub fn neg(self, x: u32) -> u32 {
        self.sub(0, x)
    }

    pub fn mul(self, x: u32, y: u32) -> u32 {
        ((x as u64 * y as u64) % self.p as u64) as u32
    }

    pub fn pow(self, mut x: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, x: u32) -> Option<u32> {
        (!x.is_multiple_of(self.p)).then(|| self.pow(x, self.p as u64 - 2))
    }
}

/// Point `(x, y)` encoded as `x + q·y`.
pub fn encode_point(q: u32, x: u32, y: u32) -> u32 {
    x + q * y
}

/// Line `y = c0 + c1 x` encoded as `c0 + q·c1`.
pub fn encode_line(q: u32, c0: u32, c1: u32) -> u32 {
    c0 + q * c1
}

/// Parabola `y = d0 + d1 x + d2 x^2`, `d2 != 0`, encoded as
/// `d0 + q·d1 + q^2·(d2 - 1)`.
pub fn encode_parabola(q: u32, d0: u32, d1: u32, d2: u32) -> u32 {
    d0 + q * d1 + q * q * (d2 - 1)
}

pub fn decode_point(q: u32, v: u32) -> (u32, u32) {
    (v % q, v / q)
}

pub fn decode_line(q: u32, v: u32) -> (u32, u32) {
    (v % q, v / q)
}

pub fn decode_parabola(q: u32, v: u32) -> (u32, u32, u32) {
    (v % q, (v / q) % q, v / (q * q) + 1)
}

/// Number of supported outcomes, `q^4 (q-1)`.
pub fn support_size(q: u64) -> u128 {
    (q as u128).pow(4) * (q as u128 - 1)
}

/// Builds the exact joint distribution of `(a, b, c, d)`.
pub fn construct_example(q: u64, budget: Budget) -> Result<JointDistribution, FqError> {
    let f = PrimeField::new(q)?;
    if q > MAX_BRUTE_FORCE_Q {
        return Err(FqError::TooLarge { q });
    }
    budget.check(support_size(q))?;
    let qq = q as u32;
    let vars = vec![
        Variable::new("a", qq * qq),
        Variable::new("b", qq * qq),
        Variable::new("c", qq * qq),
        Variable::new("d", qq * qq * (qq - 1)),
    ];
    let m = support_size(q) as usize;
    let mut values = Vec::with_capacity(4 * m);
    for c1 in f.elements() {
        for c0 in f.elements() {
            let line = encode_line(qq, c0, c1);
            let on_line = |x: u32| f.add(c0, f.mul(c1, x));
            for xa in f.elements() {
                let a = encode_point(qq, xa, on_line(xa));
                for xb in f.elements() {
                    let b = encode_point(qq, xb, on_line(xb));
                    let s = f.add(xa, xb);
                    let p = f.mul(xa, xb);
                    for d2 in 1..qq {
                        let d0 = f.add(c0, f.mul(d2, p));
                        let d1 = f.sub(c1, f.mul(d2, s));
                        values.extend_from_slice(&[a, b, line, encode_parabola(qq, d0, d1, d2)]);
                    }
                }
            }
        }
    }
    Ok(JointDistribution::from_parts_unchecked(vars, values, vec![1; m])?)
}

/// A value `r + s·log2(q) + t·log2(q-1)` with rational `r, s, t`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogValue {
    pub rational: Rational,
    pub log_q: Rational,
    pub log_q1: Rational,
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue {
            rational: Rational::zero(),
            log_q: Rational::zero(),
            log_q1: Rational::zero(),
        }
    }

    pub fn new(rational: Rational, log_q: Rational, log_q1: Rational) -> Self {
        LogValue {
            rational,
            log_q,
            log_q1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.log_q.is_zero() && self.log_q1.is_zero()
    }

    pub fn eval(&self, q: u64) -> f64 {
        let lq1 = if q > 2 { ((q - 1) as f64).log2() } else { 0.0 };
        to_f64(&self.rational) + to_f64(&self.log_q) * (q as f64).log2() + to_f64(&self.log_q1) * lq1
    }

    pub fn abs_coefficients(&self) -> LogValue {
        LogValue::new(self.rational.abs(), self.log_q.abs(), self.log_q1.abs())
    }

    pub fn display(&self) -> String {
        let mut parts = Vec::new();
        if !self.rational.is_zero() {
            parts.push(format_exact(&self.rational));
        }
        if !self.log_q.is_zero() {
            parts.push(format!("({})*log2(q)", format_exact(&self.log_q)));
        }
        if !self.log_q1.is_zero() {
            parts.push(format!("({})*log2(q-1)", format_exact(&self.log_q1)));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, o: LogValue) -> LogValue {
        LogValue::new(self.rational + o.rational, self.log_q + o.log_q, self.log_q1 + o.log_q1)
    }
}

impl Sub for LogValue {
    type Output = LogValue;
    fn sub(self, o: LogValue) -> LogValue {
        self + (-o)
    }
}

impl Neg for LogValue {
    type Output = LogValue;
    fn neg(self) -> LogValue {
        LogValue::new(-self.rational, -self.log_q, -self.log_q1)
    }
}

impl Mul<&Rational> for LogValue {
    type Output = LogValue;
    fn mul(self, k: &Rational) -> LogValue {
        LogValue::new(self.rational * k, self.log_q * k, self.log_q1 * k)
    }
}

const A: VarSet = VarSet(1);
const B: VarSet = VarSet(2);
const C: VarSet = VarSet(4);
const D: VarSet = VarSet(8);
const E: VarSet = VarSet::EMPTY;

/// Closed-form entropy of every subset of `(a, b, c, d)`, in coordinate
/// order. `L = log2 q`, `M = log2 (q-1)`.
pub fn closed_form_profile(q: u64) -> Result<Vec<LogValue>, FqError> {
    PrimeField::new(q)?;
    let qi = q as i64;
    let l = |k: i64| LogValue::new(int(0), int(k), int(0));
    let lm = |k: i64| LogValue::new(int(0), int(k), int(1));
    Ok(VarSet::nonempty_subsets(4)
        .map(|s| match s.0 {
            // a, b, c
            1 | 2 | 4 => l(2),
            8 => lm(2),
            // ab
            3 => LogValue::new(int(0), rat(4 * qi - 1, qi), int(0)),
            5 | 6 => l(3),
            9 | 10 => lm(3),
            // cd
            12 => lm(4) - LogValue::new(rat(qi - 1, qi), int(0), int(0)),
            7 => l(4),
            _ => lm(4),
        })
        .collect())
}

/// Closed-form profile evaluated to floats.
pub fn closed_form_entropy_profile(q: u64) -> Result<EntropyProfile, FqError> {
    let coords = closed_form_profile(q)?.iter().map(|v| v.eval(q)).collect();
    Ok(EntropyProfile::unnamed(coords).expect("closed forms are non-negative"))
}

/// A closed-form value of one named information quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedValue {
    pub name: &'static str,
    pub quantity: Quantity,
    pub value: LogValue,
}

fn quantity_value(profile: &[LogValue], q: &Quantity) -> LogValue {
    let e = crate::expr::expand(q, 4).expect("quantities over (a,b,c,d)");
    e.terms().fold(LogValue::zero(), |acc, (s, coef)| {
        acc + profile[s.coord_index()].clone() * coef
    })
}

/// The six headline quantities: `I(c;d) = (q-1)/q`,
/// `I(c;d|a) = I(c;d|b) = I(a;b|c) = 0`, `I(a;b) = H(c|a,b) = log2(q)/q`.
pub fn closed_form_quantities(q: u64) -> Result<Vec<NamedValue>, FqError> {
    let profile = closed_form_profile(q)?;
    Ok(headline_quantities()
        .into_iter()
        .map(|(name, quantity)| NamedValue {
            name,
            value: quantity_value(&profile, &quantity),
            quantity,
        })
        .collect())
}

pub fn headline_quantities() -> Vec<(&'static str, Quantity)> {
    vec![
        ("I(c;d)", Quantity::mutual_info(C, D, E)),
        ("I(c;d|a)", Quantity::mutual_info(C, D, A)),
        ("I(c;d|b)", Quantity::mutual_info(C, D, B)),
        ("I(a;b|c)", Quantity::mutual_info(A, B, C)),
        ("I(a;b)", Quantity::mutual_info(A, B, E)),
        ("H(c|a,b)", Quantity::entropy(C, A | B)),
    ]
}

/// Exact zeros of the quadruple's profile that hold for every prime `q`:
/// conditional independences and functional dependences, as established
/// by enumeration.
pub fn structural_zeros() -> Vec<Quantity> {
    vec![
        Quantity::mutual_info(A, B, C),
        Quantity::mutual_info(A, B, D),
        Quantity::mutual_info(C, D, A),
        Quantity::mutual_info(C, D, B),
        Quantity::entropy(A, B | C | D),
        Quantity::entropy(B, A | C | D),
        Quantity::entropy(C, A | B | D),
    ]
}

/// Which extension of the conditional inequality is refuted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// `I(c;d) <= I(c;d|a) + I(c;d|b) + λ1 I(a;b) + λ2 I(a;b|c)`.
    Ext1,
    /// `I(c;d) <= I(c;d|a) + I(c;d|b) + I(a;b) + λ1 I(a;b|c) + λ2 H(c|a,b)`.
    Ext3,
}

/// `lhs - rhs` of the unconditional extension on the closed forms; positive
/// means the extension fails at this `q`.
pub fn gap_unconditional(q: u64, lambda1: f64, lambda2: f64, which: Extension) -> Result<f64, FqError> {
    PrimeField::new(q)?;
    assert!(lambda1 >= 0.0 && lambda2 >= 0.0, "multipliers must be non-negative");
    let qf = q as f64;
    let small = qf.log2() / qf;
    let base = (qf - 1.0) / qf;
    Ok(match which {
        Extension::Ext1 => base - (lambda1 + lambda2) * small,
        Extension::Ext3 => base - small - (lambda1 + lambda2) * small,
    })
}

/// Smallest prime at which `gap_unconditional` is positive.
pub fn minimal_refuting_q(lambda1: f64, lambda2: f64, which: Extension) -> u64 {
    primes()
        .find(|&q| gap_unconditional(q, lambda1, lambda2, which).expect("q is prime") > 0.0)
        .expect("the gap tends to 1")
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantityCheck {
    pub name: String,
    pub closed_form: String,
    pub expected: f64,
    pub enumerated: f64,
    pub abs_error: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroCheck {
    pub quantity: String,
    pub kind: &'static str,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub q: u64,
    pub support_size: u64,
    pub uniform: bool,
    pub joint_entropy: f64,
    pub joint_entropy_expected: f64,
    pub quantities: Vec<QuantityCheck>,
    pub profile_matches_closed_form: bool,
    pub max_profile_error: f64,
    pub zeros: Vec<ZeroCheck>,
    pub closed_forms_hold: bool,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Enumerates the example and compares it with the closed forms.
pub fn verify_example(q: u64, budget: Budget) -> Result<ExampleReport, FqError> {
    let d = construct_example(q, budget)?;
    verify_distribution(q, &d)
}

/// Same as [`verify_example`] for an already constructed distribution.
pub fn verify_distribution(q: u64, d: &JointDistribution) -> Result<ExampleReport, FqError> {
    let names = d.names();
    let profile = EntropyProfile::of(d).map_err(|e: ProfileError| DistError::Json(e.to_string()))?;
    let closed = closed_form_profile(q)?;

    let quantities: Vec<QuantityCheck> = closed_form_quantities(q)?
        .into_iter()
        .map(|nv| {
            let expected = nv.value.eval(q);
            let enumerated = profile.quantity(&nv.quantity).expect("4 variables");
            let abs_error = (expected - enumerated).abs();
            QuantityCheck {
                name: nv.name.to_string(),
                closed_form: nv.value.display(),
                expected,
                enumerated,
                abs_error,
                matches: abs_error <= CLOSED_FORM_TOLERANCE,
            }
        })
        .collect();

    let max_profile_error = closed
        .iter()
        .zip(profile.coords())
        .map(|(c, &h)| (c.eval(q) - h).abs())
        .fold(0.0, f64::max);

    let zeros: Vec<ZeroCheck> = structural_zeros()
        .iter()
        .map(|z| {
            let (kind, certified) = match *z {
                Quantity::MutualInfo { left, right, given } => (
                    "conditional-independence",
                    d.is_conditionally_independent(left, right, given)
                        .expect("disjoint subsets"),
                ),
                Quantity::Entropy { of, given } => {
                    ("functional-dependence", d.is_function_of(of, given).expect("valid subsets"))
                }
            };
            ZeroCheck {
                quantity: z.display(&names),
                kind,
                certified,
            }
        })
        .collect();

    let joint_entropy = profile.get(VarSet::full(4));
    let joint_entropy_expected = (support_size(q) as f64).log2();
    let total = d.total();
    let uniform = (0..d.support_size()).all(|o| d.weight(o) == 1) && total == d.support_size() as u64;
    let closed_forms_hold = quantities.iter().all(|c| c.matches);
    let profile_ok = max_profile_error <= CLOSED_FORM_TOLERANCE;
    let all_pass = closed_forms_hold
        && profile_ok
        && uniform
        && zeros.iter().all(|z| z.certified)
        && (joint_entropy - joint_entropy_expected).abs() <= CLOSED_FORM_TOLERANCE;
    let note = (q == 2).then(|| {
        if all_pass {
            "characteristic 2: all closed forms hold verbatim".to_string()
        } else {
            "characteristic 2: some closed forms fail; see entries".to_string()
        }
    });
    Ok(ExampleReport {
        q,
        support_size: d.support_size() as u64,
        uniform,
        joint_entropy,
        joint_entropy_expected,
        quantities,
        profile_matches_closed_form: profile_ok,
        max_profile_error,
        zeros,
        closed_forms_hold,
        all_pass,
        note,
    })
}

/// Exact closed forms keyed by subset name, for reports.
pub fn closed_form_table(q: u64) -> Result<BTreeMap<String, String>, FqError> {
    let names = ["a", "b", "c", "d"];
    Ok(closed_form_profile(q)?
        .into_iter()
        .enumerate()
        .map(|(i, v)| (VarSet::from_coord_index(i).names(&names), v.display()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_inverse() {
        let f = PrimeField::new(7).unwrap();
        for x in 1..7 {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
        }
        assert_eq!(f.inv(0), None);
        assert_eq!(PrimeField::new(4), Err(FqError::NotPrime(4)));
    }

    #[test]
    fn encodings_round_trip() {
        let q = 5;
        assert_eq!(decode_parabola(q, encode_parabola(q, 3, 4, 2)), (3, 4, 2));
        assert_eq!(decode_point(q, encode_point(q, 1, 4)), (1, 4));
    }

    #[test]
    fn supports() {
        assert_eq!(construct_example(2, Budget::default()).unwrap().support_size(), 16);
        assert_eq!(construct_example(3, Budget::default()).unwrap().support_size(), 162);
        assert!(matches!(
            construct_example(3, Budget::new(100)),
            Err(FqError::Dist(DistError::BudgetExceeded { .. }))
        ));
        assert_eq!(construct_example(9, Budget::default()), Err(FqError::NotPrime(9)));
        assert_eq!(construct_example(37, Budget::default()), Err(FqError::TooLarge { q: 37 }));
    }

    #[test]
    fn headline_closed_forms() {
        let qs = closed_form_quantities(3).unwrap();
        let get = |n: &str| qs.iter().find(|v| v.name == n).unwrap().value.clone();
        assert_eq!(get("I(c;d)"), LogValue::new(rat(2, 3), int(0), int(0)));
        assert_eq!(get("I(a;b)"), LogValue::new(int(0), rat(1, 3), int(0)));
        assert_eq!(get("H(c|a,b)"), get("I(a;b)"));
        assert!(get("I(c;d|a)").is_zero());
        assert!(get("I(a;b|c)").is_zero());
    }

    #[test]
    fn extension_gap_values() {
        let g7 = gap_unconditional(7, 1.0, 1.0, Extension::Ext1).unwrap();
        assert!((g7 - (6.0 / 7.0 - 2.0 * 7f64.log2() / 7.0)).abs() < 1e-12);
        assert!(gap_unconditional(5, 1.0, 1.0, Extension::Ext1).unwrap() < 0.0);
        assert_eq!(minimal_refuting_q(1.0, 1.0, Extension::Ext1), 7);
        assert_eq!(minimal_refuting_q(0.0, 0.0, Extension::Ext1), 2);
    }
}
