//! Interval boxes around limits of serialized and transformed quadruples,
//! and certificates that a conditional inequality fails on every point of
//! such a box.
//!
//! A box keeps, for each of the 15 coordinates of an `(a, b, c, d)` profile,
//! a center and a half-width, plus a zero-set of expressions pinned exactly
//! to 0. The half-widths are the explicit first-order slacks of the hashing
//! and relativization steps; sublinear terms vanish in the limit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{conditional, lookup, matus_star, ConditionalInequality};
use crate::dist::{Budget, DistError, JointDistribution};
use crate::expr::{expand, InfoExpression, Quantity};
use crate::fq::{closed_form_entropy_profile, construct_example, structural_zeros, FqError};
use crate::lang::parse;
use crate::primes::primes;
use crate::profile::{subset_key, EntropyProfile};
use crate::rational::{format_exact, parse_exact, to_f64, Rational};
use crate::varset::VarSet;

const A: VarSet = VarSet(1);
const B: VarSet = VarSet(2);
const C: VarSet = VarSet(4);
const E: VarSet = VarSet::EMPTY;

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

/// Largest `k` tried by [`robust_gap_ineq4`] when the slack is zero.
pub const K_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AeError {
    #[error("constraint {0} is not implied by the zero-set")]
    ConstraintsNotPinned(String),
    #[error("{target}: guaranteed gap {gap} is not positive (deficit {deficit})")]
    GapNotPositive {
        target: String,
        q: Option<u64>,
        gap: f64,
        deficit: f64,
    },
    #[error("expected a 4-variable profile, got {0} variables")]
    DimensionMismatch(usize),
    #[error("unknown target `{0}`; expected cond1, cond3 or both")]
    UnknownTarget(String),
    #[error(transparent)]
    Fq(#[from] FqError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A 4-variable profile together with quantities known to be exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedBase {
    pub profile: EntropyProfile,
    pub exact_zeros: Vec<Quantity>,
    pub q: Option<u64>,
}

/// Candidate zeros tested structurally: `I(i;j|K)` for singletons `i < j`,
/// then `H(i|K)`.
fn candidate_zeros(n: usize) -> Vec<Quantity> {
    let full = VarSet::full(n);
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (si, sj) = (VarSet::singleton(i), VarSet::singleton(j));
            for k in full.difference(si | sj).subsets() {
                out.push(Quantity::mutual_info(si, sj, k));
            }
        }
    }
    for i in 0..n {
        let si = VarSet::singleton(i);
        for k in full.difference(si).subsets() {
            out.push(Quantity::entropy(si, k));
        }
    }
    out
}

/// Quantities of the candidate list that vanish exactly on `d`.
pub fn detect_zeros(d: &JointDistribution) -> Result<Vec<Quantity>, DistError> {
    let mut out = Vec::new();
    for q in candidate_zeros(d.n()) {
        let zero = match q {
            Quantity::MutualInfo { left, right, given } => {
                d.is_conditionally_independent(left, right, given)?
            }
            Quantity::Entropy { of, given } => d.is_function_of(of, given)?,
        };
        if zero {
            out.push(q);
        }
    }
    Ok(out)
}

impl CertifiedBase {
    /// Profile and structural zeros of a 4-variable distribution.
    pub fn from_distribution(d: &JointDistribution) -> Result<Self, AeError> {
        if d.n() != 4 {
            return Err(AeError::DimensionMismatch(d.n()));
        }
        let profile = EntropyProfile::of(d).expect("4 variables");
        Ok(CertifiedBase {
            profile,
            exact_zeros: detect_zeros(d)?,
            q: None,
        })
    }

    /// The quadruple over `F_q` from its closed forms.
    pub fn closed_form(q: u64) -> Result<Self, AeError> {
        Ok(CertifiedBase {
            profile: closed_form_entropy_profile(q)?,
            exact_zeros: structural_zeros(),
            q: Some(q),
        })
    }

    /// The quadruple over `F_q` by enumeration.
    pub fn enumerated(q: u64, budget: Budget) -> Result<Self, AeError> {
        let d = construct_example(q, budget)?;
        let mut base = Self::from_distribution(&d)?;
        base.q = Some(q);
        Ok(base)
    }

    fn has_zero(&self, q: &Quantity) -> bool {
        let e = expand(q, 4).expect("4 variables");
        let basis: Vec<InfoExpression> = self
            .exact_zeros
            .iter()
            .map(|z| expand(z, 4).expect("4 variables"))
            .collect();
        in_span(&e, &basis)
    }

    /// Value of `q` on the base, exactly 0 when the base pins it.
    fn slack(&self, q: &Quantity) -> f64 {
        if self.has_zero(q) {
            0.0
        } else {
            self.profile.quantity(q).expect("4 variables").max(0.0)
        }
    }
}

/// An expression pinned to 0, with its display label.
#[derive(Debug, Clone, PartialEq)]
pub struct PinnedZero {
    pub label: String,
    pub expr: InfoExpression,
}

impl PinnedZero {
    fn of(q: &Quantity) -> Self {
        PinnedZero {
            label: q.display(&NAMES),
            expr: expand(q, 4).expect("4 variables"),
        }
    }
}

/// Interval box around a 4-variable limit profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AePointBox {
    pub center: Vec<f64>,
    pub half_width: Vec<f64>,
    pub zero_set: Vec<PinnedZero>,
    pub provenance: Vec<String>,
    pub q: Option<u64>,
}

impl AePointBox {
    pub fn lo(&self, i: usize) -> f64 {
        (self.center[i] - self.half_width[i]).max(0.0)
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.center[i] + self.half_width[i]
    }

    pub fn max_half_width(&self) -> f64 {
        self.half_width.iter().copied().fold(0.0, f64::max)
    }

    /// Range of a linear expression over the box.
    pub fn interval(&self, e: &InfoExpression) -> (f64, f64) {
        e.terms().fold((0.0, 0.0), |(lo, hi), (s, c)| {
            let c = to_f64(c);
            let i = s.coord_index();
            if c >= 0.0 {
                (lo + c * self.lo(i), hi + c * self.hi(i))
            } else {
                (lo + c * self.hi(i), hi + c * self.lo(i))
            }
        })
    }

    /// Every pinned expression can be 0 somewhere in the box.
    pub fn is_consistent(&self) -> bool {
        self.zero_set.iter().all(|z| {
            let (lo, hi) = self.interval(&z.expr);
            lo <= 1e-9 && hi >= -1e-9
        })
    }

    fn add_zero(&mut self, q: &Quantity) {
        let z = PinnedZero::of(q);
        if !self.zero_set.iter().any(|p| p.expr == z.expr) {
            self.zero_set.push(z);
        }
    }

    pub fn implies_zero(&self, e: &InfoExpression) -> bool {
        let basis: Vec<InfoExpression> = self.zero_set.iter().map(|z| z.expr.clone()).collect();
        in_span(e, &basis)
    }
}

fn provenance(steps: &[&str]) -> Vec<String> {
    steps.iter().map(|s| s.to_string()).collect()
}

fn given_set(q: &Quantity) -> VarSet {
    match *q {
        Quantity::Entropy { given, .. } | Quantity::MutualInfo { given, .. } => given,
    }
}

/// Replaces `a` by a Slepian-Wolf hash of `a` given `b`: coordinates
/// containing `a` move by at most `I(a;b)`, `I(a';b)` vanishes, and zeros
/// not conditioning on `a` survive since `a'` is a function of `a`.
pub fn sw_hash_limit(base: &CertifiedBase) -> AePointBox {
    let ab = Quantity::mutual_info(A, B, E);
    let hw = base.slack(&ab);
    let center = base.profile.coords().to_vec();
    let half_width = (0..center.len())
        .map(|i| if VarSet::from_coord_index(i).contains(0) { hw } else { 0.0 })
        .collect();
    let mut b = AePointBox {
        center,
        half_width,
        zero_set: Vec::new(),
        provenance: provenance(&["serialize", "sw-hash", "scale", "limit"]),
        q: base.q,
    };
    b.add_zero(&ab);
    for z in &base.exact_zeros {
        if !given_set(z).contains(0) {
            b.add_zero(z);
        }
    }
    b
}

fn ab_given_c() -> Quantity {
    Quantity::mutual_info(A, B, C)
}

fn c_given_ab() -> Quantity {
    Quantity::entropy(C, A | B)
}

/// Relativization making `c` a function of `(a, b)`: every coordinate moves
/// by at most `H(c|a,b)`.
pub fn relativize_limit(base: &CertifiedBase) -> AePointBox {
    let hw = base.slack(&c_given_ab());
    let center = base.profile.coords().to_vec();
    let mut b = AePointBox {
        half_width: vec![hw; center.len()],
        center,
        zero_set: Vec::new(),
        provenance: provenance(&["serialize", "relativize", "scale", "limit"]),
        q: base.q,
    };
    if base.has_zero(&ab_given_c()) {
        b.add_zero(&ab_given_c());
    }
    b.add_zero(&c_given_ab());
    b
}

/// Hashing followed by relativization; pins `I(a;b)` and `H(c|a,b)`
/// together, with half-width `I(a;b) + H(c|a,b)` everywhere.
pub fn combined_limit(base: &CertifiedBase) -> AePointBox {
    let hw = base.slack(&Quantity::mutual_info(A, B, E)) + base.slack(&c_given_ab());
    let center = base.profile.coords().to_vec();
    let mut b = AePointBox {
        half_width: vec![hw; center.len()],
        center,
        zero_set: Vec::new(),
        provenance: provenance(&["serialize", "sw-hash", "relativize", "scale", "limit"]),
        q: base.q,
    };
    if base.has_zero(&ab_given_c()) {
        b.add_zero(&ab_given_c());
    }
    b.add_zero(&Quantity::mutual_info(A, B, E));
    b.add_zero(&c_given_ab());
    b
}

/// Exact test of `target ∈ span(basis)` over the rationals.
pub fn in_span(target: &InfoExpression, basis: &[InfoExpression]) -> bool {
    if target.is_zero() {
        return true;
    }
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let reduce = |v: &mut Vec<Rational>, rows: &[Vec<Rational>], pivots: &[usize]| {
        for (r, &p) in rows.iter().zip(pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone() / &r[p];
                for (x, y) in v.iter_mut().zip(r) {
                    *x -= &f * y;
                }
            }
        }
    };
    for b in basis {
        let mut v = b.dense();
        reduce(&mut v, &rows, &pivots);
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            rows.push(v);
            pivots.push(p);
        }
    }
    let mut t = target.dense();
    reduce(&mut t, &rows, &pivots);
    t.iter().all(Zero::is_zero)
}

/// `Σ |coefficient| · half-width`, term by term as the body is written.
fn perturbation(ineq: &ConditionalInequality, hw: &[f64]) -> (f64, Rational) {
    let mut value = 0.0;
    let mut mass = Rational::zero();
    for (coef, q) in &ineq.body_terms.terms {
        let e = expand(q, 4).expect("catalog bodies are valid");
        for (s, c) in e.terms() {
            let w = (coef * c).abs();
            let h = hw[s.coord_index()];
            if h > 0.0 {
                value += to_f64(&w) * h;
                mass += w;
            }
        }
    }
    (value, mass)
}

/// Proof that `ineq` fails on every point of a box whose zero-set pins its
/// constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationCertificate {
    pub target: String,
    pub q: Option<u64>,
    /// `-(body at center) - perturbation`; positive.
    pub gap: f64,
    pub half_width: f64,
    pub zero_set: Vec<String>,
    pub provenance: Vec<String>,
    pub center_body: f64,
    /// Total `|coefficient|` on perturbed coordinates, exact.
    pub perturbation_mass: String,
    pub perturbation: f64,
    pub center: BTreeMap<String, f64>,
    pub half_widths: BTreeMap<String, f64>,
}

fn coord_map(v: &[f64]) -> BTreeMap<String, f64> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| (subset_key(VarSet::from_coord_index(i), &NAMES), x))
        .collect()
}

/// Certifies that the body of `ineq` is negative over all of `bx` while its
/// constraints hold exactly.
pub fn certify_violation(
    bx: &AePointBox,
    ineq: &ConditionalInequality,
) -> Result<ViolationCertificate, AeError> {
    if ineq.n() != 4 {
        return Err(AeError::DimensionMismatch(ineq.n()));
    }
    for c in &ineq.constraints {
        if !bx.implies_zero(&c.expr) {
            return Err(AeError::ConstraintsNotPinned(c.display(&ineq.names)));
        }
    }
    let center_body = eval_at(&ineq.body, &bx.center);
    let (pert, mass) = perturbation(ineq, &bx.half_width);
    let gap = -center_body - pert;
    if gap.is_nan() || gap <= 0.0 {
        return Err(AeError::GapNotPositive {
            target: ineq.name.clone(),
            q: bx.q,
            gap,
            deficit: -gap,
        });
    }
    Ok(ViolationCertificate {
        target: ineq.name.clone(),
        q: bx.q,
        gap,
        half_width: bx.max_half_width(),
        zero_set: bx.zero_set.iter().map(|z| z.label.clone()).collect(),
        provenance: bx.provenance.clone(),
        center_body,
        perturbation_mass: format_exact(&mass),
        perturbation: pert,
        center: coord_map(&bx.center),
        half_widths: coord_map(&bx.half_width),
    })
}

impl ViolationCertificate {
    /// Recomputes the certificate from its own contents and the catalog.
    pub fn verify(&self) -> bool {
        let Some(ineq) = lookup(&self.target).and_then(|v| v.into_iter().next()) else {
            return false;
        };
        let dense = |m: &BTreeMap<String, f64>| -> Option<Vec<f64>> {
            VarSet::nonempty_subsets(4)
                .map(|s| m.get(&subset_key(s, &NAMES)).copied())
                .collect()
        };
        let (Some(center), Some(hw)) = (dense(&self.center), dense(&self.half_widths)) else {
            return false;
        };
        let Ok(zeros) = self
            .zero_set
            .iter()
            .map(|z| parse(z, &NAMES))
            .collect::<Result<Vec<_>, _>>()
        else {
            return false;
        };
        if !ineq.constraints.iter().all(|c| in_span(&c.expr, &zeros)) {
            return false;
        }
        let center_body = eval_at(&ineq.body, &center);
        let (pert, mass) = perturbation(&ineq, &hw);
        let gap = -center_body - pert;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs());
        gap > 0.0
            && close(gap, self.gap)
            && close(center_body, self.center_body)
            && parse_exact(&self.perturbation_mass).is_ok_and(|m| m == mass)
    }
}

/// Inequalities whose a.e. failure is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Cond1,
    Cond3,
    Both,
}

impl FromStr for Target {
    type Err = AeError;
    fn from_str(s: &str) -> Result<Self, AeError> {
        match s {
            "cond1" => Ok(Target::Cond1),
            "cond3" => Ok(Target::Cond3),
            "both" => Ok(Target::Both),
            other => Err(AeError::UnknownTarget(other.to_string())),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Cond1 => "cond1",
            Target::Cond3 => "cond3",
            Target::Both => "both",
        })
    }
}

/// One or two violation certificates sharing a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeCertificate {
    pub target: Target,
    pub q: Option<u64>,
    /// Smallest gap among the certificates.
    pub gap: f64,
    pub half_width: f64,
    pub zero_set: Vec<String>,
    pub provenance: Vec<String>,
    pub certificates: Vec<ViolationCertificate>,
}

impl AeCertificate {
    pub fn verify(&self) -> bool {
        !self.certificates.is_empty()
            && self.certificates.iter().all(|c| {
                c.verify() && c.zero_set == self.zero_set && c.provenance == self.provenance
            })
            && self.gap > 0.0
    }
}

/// The box a target is certified against.
pub fn target_box(base: &CertifiedBase, target: Target) -> AePointBox {
    match target {
        Target::Cond1 => sw_hash_limit(base),
        Target::Cond3 => relativize_limit(base),
        Target::Both => combined_limit(base),
    }
}

fn target_inequalities(target: Target) -> Vec<ConditionalInequality> {
    let one = || conditional(1).expect("cond1");
    let three = || conditional(3).expect("cond3");
    match target {
        Target::Cond1 => vec![one()],
        Target::Cond3 => vec![three()],
        Target::Both => vec![one(), three()],
    }
}

/// Certifies `target` on the box built from `base`.
pub fn certify_target(base: &CertifiedBase, target: Target) -> Result<AeCertificate, AeError> {
    let bx = target_box(base, target);
    let certificates = target_inequalities(target)
        .iter()
        .map(|i| certify_violation(&bx, i))
        .collect::<Result<Vec<_>, _>>()?;
    let gap = certificates.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
    Ok(AeCertificate {
        target,
        q: base.q,
        gap,
        half_width: bx.max_half_width(),
        zero_set: bx.zero_set.iter().map(|z| z.label.clone()).collect(),
        provenance: bx.provenance.clone(),
        certificates,
    })
}

/// First prime whose closed-form box certifies `target`.
pub fn minimal_certifying_q(target: Target) -> AeCertificate {
    primes()
        .find_map(|q| {
            let base = CertifiedBase::closed_form(q).expect("q is prime");
            certify_target(&base, target).ok()
        })
        .expect("the gap tends to 1")
}

/// Body of `matus-star(k)` on `p`: its right side minus its left side.
pub fn matus_rhs(p: &EntropyProfile, k: u32) -> Result<f64, AeError> {
    if p.n() != 4 {
        return Err(AeError::DimensionMismatch(p.n()));
    }
    Ok(matus_star(k).body.evaluate(p).expect("4 variables"))
}

/// Bound on how far the body of the fourth conditional inequality can go
/// negative, and the `k` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustBound {
    pub epsilon: f64,
    pub k: u64,
}

/// `min over k >= 1 of I(c;d|a)/k + (k+1)/2 · slack`, where `slack` bounds
/// `I(a;c|d) + I(a;d|c)` on `p`.
pub fn robust_gap_ineq4(p: &EntropyProfile, slack: f64) -> Result<RobustBound, AeError> {
    if p.n() != 4 {
        return Err(AeError::DimensionMismatch(p.n()));
    }
    assert!(slack >= 0.0, "slack must be non-negative");
    let x = p
        .quantity(&Quantity::mutual_info(C, VarSet(8), A))
        .expect("4 variables")
        .max(0.0);
    let k_max = if slack > 0.0 {
        ((2.0 * x / slack).sqrt().ceil() as u64 + 2).min(K_CAP)
    } else {
        K_CAP
    };
    let f = |k: u64| x / k as f64 + (k as f64 + 1.0) / 2.0 * slack;
    let mut best = RobustBound { epsilon: f(1), k: 1 };
    for k in 2..=k_max {
        let v = f(k);
        if v < best.epsilon {
            best = RobustBound { epsilon: v, k };
        }
    }
    Ok(best)
}

fn eval_at(e: &InfoExpression, coords: &[f64]) -> f64 {
    e.terms()
        .fold(0.0, |acc, (s, c)| acc + to_f64(c) * coords[s.coord_index()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(q: u64) -> f64 {
        (q as f64).log2()
    }

    #[test]
    fn sw_box_widths() {
        let base = CertifiedBase::closed_form(19).unwrap();
        let bx = sw_hash_limit(&base);
        let hw = l(19) / 19.0;
        let moved = bx.half_width.iter().filter(|&&h| h > 0.0).count();
        assert_eq!(moved, 8);
        assert!((bx.max_half_width() - hw).abs() < 1e-12);
        assert!(bx.is_consistent());
        assert!(bx.zero_set.iter().any(|z| z.label == "I(a;b)"));
        assert!(bx.zero_set.iter().any(|z| z.label == "I(a;b|c)"));
    }

    #[test]
    fn cond1_at_19_and_17() {
        let cert = certify_target(&CertifiedBase::closed_form(19).unwrap(), Target::Cond1).unwrap();
        let expect = (18.0 - 4.0 * l(19)) / 19.0;
        assert!((cert.gap - expect).abs() < 1e-9);
        assert!(cert.verify());
        match certify_target(&CertifiedBase::closed_form(17).unwrap(), Target::Cond1) {
            Err(AeError::GapNotPositive { deficit, .. }) => assert!(deficit > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_constraint_is_refused() {
        let base = CertifiedBase::closed_form(101).unwrap();
        let bx = sw_hash_limit(&base);
        let err = certify_violation(&bx, &conditional(3).unwrap()).unwrap_err();
        assert_eq!(err, AeError::ConstraintsNotPinned("H(c|a,b)".into()));
    }

    #[test]
    fn span_membership() {
        let ab = expand(&Quantity::mutual_info(A, B, E), 4).unwrap();
        let abc = expand(&Quantity::mutual_info(A, B, C), 4).unwrap();
        let sum = ab.clone() + abc.clone();
        assert!(in_span(&sum, &[ab.clone(), abc.clone()]));
        assert!(!in_span(&sum, &[ab]));
    }

    #[test]
    fn robust_bound_scan() {
        let mut coords = vec![0.0; 15];
        // I(c;d|a) = 1: H(a)=0 and c = d a fair bit.
        for s in VarSet::nonempty_subsets(4) {
            coords[s.coord_index()] = if s.contains(2) || s.contains(3) { 1.0 } else { 0.0 };
        }
        let p = EntropyProfile::unnamed(coords).unwrap();
        let r = robust_gap_ineq4(&p, 0.02).unwrap();
        assert_eq!(r.k, 10);
        assert!((r.epsilon - 0.21).abs() < 1e-12);
        assert_eq!(robust_gap_ineq4(&p, 5.0).unwrap().k, 1);
        let z = robust_gap_ineq4(&p, 0.0).unwrap();
        assert_eq!(z.k, K_CAP);
    }
}
