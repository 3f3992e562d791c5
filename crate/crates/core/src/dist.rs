//! Finite joint distributions with exact rational probabilities.
//!
//! A [`JointDistribution`] keeps its pmf as positive integer weights over one
//! common denominator, so every probability is an exact rational and all
//! structural questions (independence, functional dependence, flatness) are
//! decided by integer comparisons. Entropies are the only floating-point
//! quantities and are computed from the exact marginals.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{format_exact, parse_exact, Rational, RationalParseError};
use crate::varset::{VarSet, MAX_VARS};

/// Default cap on the number of support entries an operation may create.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("probabilities sum to {sum}, defect {defect}", sum = format_exact(.sum), defect = format_exact(.defect))]
    SumNotOne { sum: Box<Rational>, defect: Box<Rational> },
    #[error("outcome {outcome} has {found} values, expected {expected}")]
    ArityMismatch {
        outcome: usize,
        expected: usize,
        found: usize,
    },
    #[error("outcome {outcome} has non-positive probability {p}", p = format_exact(.p))]
    NonPositiveProbability { outcome: usize, p: Box<Rational> },
    #[error("value {value} of variable `{variable}` outside alphabet of size {alphabet}")]
    ValueOutOfRange {
        variable: String,
        value: u64,
        alphabet: u32,
    },
    #[error("outcome {0} listed more than once")]
    DuplicateOutcome(usize),
    #[error("invalid variable declaration: {0}")]
    InvalidVariable(String),
    #[error("at most {MAX_VARS} variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("variable subset is empty")]
    EmptySubset,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable subsets overlap")]
    OverlappingSubsets,
    #[error("variable name `{0}` already in use")]
    NameCollision(String),
    #[error("function undefined on outcome {0}")]
    PartialFunction(usize),
    #[error("support of {needed} entries exceeds budget {cap}")]
    BudgetExceeded { needed: u128, cap: u64 },
    #[error("common denominator does not fit in 64 bits")]
    DenominatorOverflow,
    #[error("joint alphabet too large to index")]
    AlphabetOverflow,
    #[error(transparent)]
    Rational(#[from] RationalParseError),
    #[error("distribution JSON: {0}")]
    Json(String),
}

pub type Result<T, E = DistError> = std::result::Result<T, E>;

/// Support-size cap for operations that enumerate outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_support: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_support: DEFAULT_SUPPORT_BUDGET,
        }
    }
}

impl Budget {
    pub fn new(max_support: u64) -> Self {
        Budget { max_support }
    }

    pub fn check(&self, needed: u128) -> Result<()> {
        if needed > self.max_support as u128 {
            Err(DistError::BudgetExceeded {
                needed,
                cap: self.max_support,
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub alphabet: u32,
}

impl Variable {
    pub fn new(name: impl Into<String>, alphabet: u32) -> Self {
        Variable {
            name: name.into(),
            alphabet,
        }
    }
}

/// A finite joint distribution. Zero-mass outcomes are never stored.
///
/// Equality compares the pmf, not the storage order of outcomes.
#[derive(Debug, Clone)]
pub struct JointDistribution {
    vars: Vec<Variable>,
    /// Outcome-major table, `vars.len()` values per outcome.
    values: Vec<u32>,
    /// Positive integer weights, `p = weight / total`.
    weights: Vec<u64>,
    total: u64,
}

impl PartialEq for JointDistribution {
    fn eq(&self, other: &Self) -> bool {
        if self.vars != other.vars
            || self.total != other.total
            || self.support_size() != other.support_size()
        {
            return false;
        }
        fn sorted(d: &JointDistribution) -> Vec<(&[u32], u64)> {
            let mut rows: Vec<(&[u32], u64)> =
                (0..d.support_size()).map(|o| (d.outcome(o), d.weights[o])).collect();
            rows.sort_unstable();
            rows
        }
        sorted(self) == sorted(other)
    }
}

impl Eq for JointDistribution {}

/// Grouping of outcomes by their projection onto a variable subset.
pub(crate) struct Grouping {
    pub ids: Vec<u32>,
    pub weights: Vec<u64>,
    /// One outcome index per group.
    pub representative: Vec<u32>,
}

impl Grouping {
    pub fn len(&self) -> usize {
        self.weights.len()
    }
}

fn validate_vars(vars: &[Variable]) -> Result<()> {
    if vars.len() > MAX_VARS {
        return Err(DistError::TooManyVariables(vars.len()));
    }
    for (i, v) in vars.iter().enumerate() {
        if v.name.is_empty() {
            return Err(DistError::InvalidVariable(format!("variable {i} has an empty name")));
        }
        if v.alphabet == 0 {
            return Err(DistError::InvalidVariable(format!(
                "variable `{}` has an empty alphabet",
                v.name
            )));
        }
        if vars[..i].iter().any(|w| w.name == v.name) {
            return Err(DistError::NameCollision(v.name.clone()));
        }
    }
    Ok(())
}

impl JointDistribution {
    /// Builds and validates a distribution from explicit outcomes.
    pub fn new(vars: Vec<Variable>, outcomes: Vec<(Vec<u32>, Rational)>) -> Result<Self> {
        validate_vars(&vars)?;
        let n = vars.len();
        let mut den_lcm = BigInt::one();
        for (i, (vals, p)) in outcomes.iter().enumerate() {
            if vals.len() != n {
                return Err(DistError::ArityMismatch {
                    outcome: i,
                    expected: n,
                    found: vals.len(),
                });
            }
            if !p.is_positive() {
                return Err(DistError::NonPositiveProbability {
                    outcome: i,
                    p: Box::new(p.clone()),
                });
            }
            for (v, var) in vals.iter().zip(&vars) {
                if *v >= var.alphabet {
                    return Err(DistError::ValueOutOfRange {
                        variable: var.name.clone(),
                        value: *v as u64,
                        alphabet: var.alphabet,
                    });
                }
            }
            den_lcm = den_lcm.lcm(p.denom());
        }
        let sum: Rational = outcomes.iter().map(|(_, p)| p.clone()).sum();
        if !sum.is_one() {
            return Err(DistError::SumNotOne {
                defect: Box::new(Rational::one() - &sum),
                sum: Box::new(sum),
            });
        }
        let total = den_lcm.to_u64().ok_or(DistError::DenominatorOverflow)?;
        let mut values = Vec::with_capacity(n * outcomes.len());
        let mut weights = Vec::with_capacity(outcomes.len());
        for (vals, p) in &outcomes {
            values.extend_from_slice(vals);
            let w = (p.numer() * (&den_lcm / p.denom()))
                .to_u64()
                .ok_or(DistError::DenominatorOverflow)?;
            weights.push(w);
        }
        let d = JointDistribution {
            vars,
            values,
            weights,
            total,
        };
        d.check_indexable()?;
        if let Some(i) = d.first_duplicate() {
            return Err(DistError::DuplicateOutcome(i));
        }
        Ok(d)
    }

    /// Builds a distribution from integer weights; the pmf is `w / sum(w)`.
    /// Zero weights are dropped.
    pub fn from_weights(vars: Vec<Variable>, outcomes: Vec<(Vec<u32>, u64)>) -> Result<Self> {
        let total: u128 = outcomes.iter().map(|(_, w)| *w as u128).sum();
        if total == 0 {
            return Err(DistError::SumNotOne {
                sum: Box::new(Rational::zero()),
                defect: Box::new(Rational::one()),
            });
        }
        let total = u64::try_from(total).map_err(|_| DistError::DenominatorOverflow)?;
        let outcomes = outcomes
            .into_iter()
            .filter(|(_, w)| *w > 0)
            .map(|(v, w)| (v, Rational::new(BigInt::from(w), BigInt::from(total))))
            .collect();
        Self::new(vars, outcomes)
    }

    /// Trusted constructor for generators whose outcomes are distinct and
    /// in range by construction.
    pub(crate) fn from_parts_unchecked(
        vars: Vec<Variable>,
        values: Vec<u32>,
        weights: Vec<u64>,
    ) -> Result<Self> {
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        let total = u64::try_from(total).map_err(|_| DistError::DenominatorOverflow)?;
        debug_assert_eq!(values.len(), vars.len() * weights.len());
        debug_assert!(weights.iter().all(|&w| w > 0));
        let mut d = JointDistribution {
            vars,
            values,
            weights,
            total,
        };
        d.normalize();
        d.check_indexable()?;
        Ok(d)
    }

    fn normalize(&mut self) {
        let g = self
            .weights
            .iter()
            .fold(self.total, |g, &w| g.gcd(&w));
        if g > 1 {
            self.total /= g;
            for w in &mut self.weights {
                *w /= g;
            }
        }
    }

    fn check_indexable(&self) -> Result<()> {
        let bits: f64 = self.vars.iter().map(|v| (v.alphabet as f64).log2()).sum();
        if bits >= 127.0 {
            return Err(DistError::AlphabetOverflow);
        }
        Ok(())
    }

    fn first_duplicate(&self) -> Option<usize> {
        let g = self.grouping(VarSet::full(self.n()));
        if g.len() == self.support_size() {
            return None;
        }
        let mut seen = vec![false; g.len()];
        g.ids.iter().position(|&id| std::mem::replace(&mut seen[id as usize], true))
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// Common denominator of all probabilities.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, i: usize) -> u64 {
        self.weights[i]
    }

    pub fn outcome(&self, i: usize) -> &[u32] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn probability(&self, i: usize) -> Rational {
        Rational::new(BigInt::from(self.weights[i]), BigInt::from(self.total))
    }

    /// `(values, probability)` for every supported outcome.
    pub fn outcomes(&self) -> impl Iterator<Item = (&[u32], Rational)> + '_ {
        (0..self.support_size()).map(move |i| (self.outcome(i), self.probability(i)))
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| DistError::UnknownVariable(name.to_string()))
    }

    /// Subset from variable names.
    pub fn subset<S: AsRef<str>>(&self, names: &[S]) -> Result<VarSet> {
        names.iter().try_fold(VarSet::EMPTY, |s, name| {
            Ok(s | VarSet::singleton(self.index_of(name.as_ref())?))
        })
    }

    fn check_subset(&self, s: VarSet) -> Result<()> {
        if !s.is_subset_of(VarSet::full(self.n())) {
            let bad = s.difference(VarSet::full(self.n())).iter().next().unwrap_or(0);
            return Err(DistError::UnknownVariable(format!("#{bad}")));
        }
        Ok(())
    }

    fn check_nonempty_subset(&self, s: VarSet) -> Result<()> {
        if s.is_empty() {
            return Err(DistError::EmptySubset);
        }
        self.check_subset(s)
    }

    /// Groups outcomes by their projection onto `s`. Group ids are assigned
    /// in increasing order of the projected tuple.
    pub(crate) fn grouping(&self, s: VarSet) -> Grouping {
        let m = self.support_size();
        if s.is_empty() {
            return Grouping {
                ids: vec![0; m],
                weights: if m == 0 { vec![] } else { vec![self.total] },
                representative: if m == 0 { vec![] } else { vec![0] },
            };
        }
        let idx: Vec<usize> = s.iter().collect();
        let space: f64 = idx.iter().map(|&i| self.vars[i].alphabet as f64).product();
        if space <= 1.8e19 {
            let strides = self.strides::<u64>(&idx);
            let keys: Vec<u64> = (0..m)
                .map(|o| {
                    let row = self.outcome(o);
                    idx.iter().zip(&strides).map(|(&i, &st)| row[i] as u64 * st).sum()
                })
                .collect();
            let space = space as u64;
            if space <= (1 << 22).max(2 * m as u64) && space <= (1 << 28) {
                self.group_dense(&keys, space as usize)
            } else {
                self.group_sorted(keys)
            }
        } else {
            let strides = self.strides::<u128>(&idx);
            let keys: Vec<u128> = (0..m)
                .map(|o| {
                    let row = self.outcome(o);
                    idx.iter().zip(&strides).map(|(&i, &st)| row[i] as u128 * st).sum()
                })
                .collect();
            self.group_sorted(keys)
        }
    }

    /// Mixed-radix strides with the first variable most significant, so key
    /// order is lexicographic tuple order.
    fn strides<K: From<u32> + std::ops::Mul<Output = K> + Copy>(&self, idx: &[usize]) -> Vec<K> {
        let mut acc = K::from(1u32);
        let mut out: Vec<K> = idx
            .iter()
            .rev()
            .map(|&i| {
                let st = acc;
                acc = acc * K::from(self.vars[i].alphabet);
                st
            })
            .collect();
        out.reverse();
        out
    }

    fn group_dense(&self, keys: &[u64], space: usize) -> Grouping {
        let mut slot = vec![u32::MAX; space];
        for &k in keys {
            slot[k as usize] = 0;
        }
        let mut next = 0u32;
        for s in slot.iter_mut() {
            if *s == 0 {
                *s = next;
                next += 1;
            }
        }
        let mut weights = vec![0u64; next as usize];
        let mut representative = vec![u32::MAX; next as usize];
        let ids: Vec<u32> = keys
            .iter()
            .enumerate()
            .map(|(o, &k)| {
                let id = slot[k as usize];
                weights[id as usize] += self.weights[o];
                if representative[id as usize] == u32::MAX {
                    representative[id as usize] = o as u32;
                }
                id
            })
            .collect();
        Grouping {
            ids,
            weights,
            representative,
        }
    }

    fn group_sorted<K: Ord + Copy>(&self, keys: Vec<K>) -> Grouping {
        let mut order: Vec<u32> = (0..keys.len() as u32).collect();
        order.sort_unstable_by_key(|&o| (keys[o as usize], o));
        let mut ids = vec![0u32; keys.len()];
        let mut weights = Vec::new();
        let mut representative = Vec::new();
        let mut prev: Option<K> = None;
        for &o in &order {
            let k = keys[o as usize];
            if prev != Some(k) {
                weights.push(0u64);
                representative.push(o);
                prev = Some(k);
            }
            let id = weights.len() - 1;
            weights[id] += self.weights[o as usize];
            ids[o as usize] = id as u32;
        }
        Grouping {
            ids,
            weights,
            representative,
        }
    }

    /// Exact marginal onto `keep`, variables in declared order.
    pub fn marginalize(&self, keep: VarSet) -> Result<JointDistribution> {
        self.check_nonempty_subset(keep)?;
        let g = self.grouping(keep);
        let idx: Vec<usize> = keep.iter().collect();
        let vars = idx.iter().map(|&i| self.vars[i].clone()).collect();
        let mut values = Vec::with_capacity(idx.len() * g.len());
        for &r in &g.representative {
            let row = self.outcome(r as usize);
            values.extend(idx.iter().map(|&i| row[i]));
        }
        let mut d = JointDistribution {
            vars,
            values,
            weights: g.weights,
            total: self.total,
        };
        d.normalize();
        Ok(d)
    }

    /// Product distribution of `copies` independent copies. Each variable
    /// becomes tuple-valued; copy `j` contributes digit `j` in base `alphabet`.
    pub fn iid_power(&self, copies: u32, budget: Budget) -> Result<JointDistribution> {
        if copies == 0 {
            return Err(DistError::InvalidVariable("number of copies must be positive".into()));
        }
        let m = self.support_size() as u128;
        let needed = (0..copies).try_fold(1u128, |acc, _| acc.checked_mul(m));
        let needed = needed.unwrap_or(u128::MAX);
        budget.check(needed)?;
        let mut vars = Vec::with_capacity(self.n());
        for v in &self.vars {
            let alphabet = (v.alphabet as u64)
                .checked_pow(copies)
                .and_then(|a| u32::try_from(a).ok())
                .ok_or(DistError::AlphabetOverflow)?;
            vars.push(Variable::new(v.name.clone(), alphabet));
        }
        let total = self
            .total
            .checked_pow(copies)
            .ok_or(DistError::DenominatorOverflow)?;
        let n = self.n();
        let m = self.support_size();
        let size = needed as usize;
        let mut values = Vec::with_capacity(size * n);
        let mut weights = Vec::with_capacity(size);
        let mut digits = vec![0usize; copies as usize];
        for _ in 0..size {
            let mut w = 1u64;
            let row_start = values.len();
            values.resize(row_start + n, 0);
            let mut place = vec![1u32; n];
            for &o in &digits {
                w *= self.weights[o];
                let src = self.outcome(o);
                for i in 0..n {
                    values[row_start + i] += src[i] * place[i];
                    place[i] = place[i].wrapping_mul(self.vars[i].alphabet);
                }
            }
            weights.push(w);
            for d in digits.iter_mut() {
                *d += 1;
                if *d < m {
                    break;
                }
                *d = 0;
            }
        }
        let mut d = JointDistribution {
            vars,
            values,
            weights,
            total,
        };
        d.normalize();
        d.check_indexable()?;
        Ok(d)
    }

    /// Appends a variable computed deterministically from `sources`. The
    /// function receives the source values in declared order.
    pub fn apply_function<F>(
        &self,
        sources: VarSet,
        name: &str,
        alphabet: u32,
        f: F,
    ) -> Result<JointDistribution>
    where
        F: Fn(&[u32]) -> Option<u32>,
    {
        self.check_subset(sources)?;
        if self.vars.iter().any(|v| v.name == name) {
            return Err(DistError::NameCollision(name.to_string()));
        }
        let mut vars = self.vars.clone();
        vars.push(Variable::new(name, alphabet));
        validate_vars(&vars)?;
        let idx: Vec<usize> = sources.iter().collect();
        let n = self.n();
        let mut values = Vec::with_capacity((n + 1) * self.support_size());
        let mut args = Vec::with_capacity(idx.len());
        for o in 0..self.support_size() {
            let row = self.outcome(o);
            args.clear();
            args.extend(idx.iter().map(|&i| row[i]));
            let v = f(&args).ok_or(DistError::PartialFunction(o))?;
            if v >= alphabet {
                return Err(DistError::ValueOutOfRange {
                    variable: name.to_string(),
                    value: v as u64,
                    alphabet,
                });
            }
            values.extend_from_slice(row);
            values.push(v);
        }
        let d = JointDistribution {
            vars,
            values,
            weights: self.weights.clone(),
            total: self.total,
        };
        d.check_indexable()?;
        Ok(d)
    }

    fn entropy_of_weights(&self, weights: &[u64]) -> f64 {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &w in weights {
            *counts.entry(w).or_default() += 1;
        }
        let t = self.total as f64;
        counts
            .into_iter()
            .map(|(w, c)| {
                let p = w as f64 / t;
                c as f64 * p * (t / w as f64).log2()
            })
            .sum()
    }

    /// Shannon entropy (bits) of the marginal on `s`.
    pub fn entropy(&self, s: VarSet) -> Result<f64> {
        self.check_nonempty_subset(s)?;
        Ok(self.entropy_of_weights(&self.grouping(s).weights))
    }

    /// `H(S ∪ T) - H(T)`; `T` may be empty.
    pub fn conditional_entropy(&self, s: VarSet, t: VarSet) -> Result<f64> {
        self.check_nonempty_subset(s)?;
        self.check_subset(t)?;
        let ht = if t.is_empty() { 0.0 } else { self.entropy(t)? };
        Ok(self.entropy(s | t)? - ht)
    }

    /// `I(A;B|C)` in bits.
    pub fn mutual_information(&self, a: VarSet, b: VarSet, c: VarSet) -> Result<f64> {
        self.check_nonempty_subset(a)?;
        self.check_nonempty_subset(b)?;
        self.check_subset(c)?;
        let h = |s: VarSet| -> Result<f64> {
            if s.is_empty() {
                Ok(0.0)
            } else {
                self.entropy(s)
            }
        };
        Ok(h(a | c)? + h(b | c)? - h(a | b | c)? - h(c)?)
    }

    /// Exact test of `p(A,B|C=γ) = p(A|γ) p(B|γ)` on every γ in the support
    /// of `C`.
    pub fn is_conditionally_independent(&self, a: VarSet, b: VarSet, c: VarSet) -> Result<bool> {
        self.check_nonempty_subset(a)?;
        self.check_nonempty_subset(b)?;
        self.check_subset(c)?;
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(DistError::OverlappingSubsets);
        }
        let abc = self.grouping(a | b | c);
        let ac = self.grouping(a | c);
        let bc = self.grouping(b | c);
        let gc = self.grouping(c);

        // Support of (A,B,C) must be the full product of the A- and
        // B-supports over each γ.
        let mut n_abc = vec![0u64; gc.len()];
        let mut n_ac = vec![0u64; gc.len()];
        let mut n_bc = vec![0u64; gc.len()];
        for &r in &abc.representative {
            n_abc[gc.ids[r as usize] as usize] += 1;
        }
        for &r in &ac.representative {
            n_ac[gc.ids[r as usize] as usize] += 1;
        }
        for &r in &bc.representative {
            n_bc[gc.ids[r as usize] as usize] += 1;
        }
        if (0..gc.len()).any(|g| n_abc[g] != n_ac[g] * n_bc[g]) {
            return Ok(false);
        }
        for (g, &r) in abc.representative.iter().enumerate() {
            let r = r as usize;
            let lhs = abc.weights[g] as u128 * gc.weights[gc.ids[r] as usize] as u128;
            let rhs = ac.weights[ac.ids[r] as usize] as u128 * bc.weights[bc.ids[r] as usize] as u128;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Exact test of `H(S|T) = 0`: every `T`-value in the support fixes `S`.
    pub fn is_function_of(&self, s: VarSet, t: VarSet) -> Result<bool> {
        self.check_nonempty_subset(s)?;
        self.check_subset(t)?;
        Ok(self.grouping(s | t).len() == self.grouping(t).len())
    }

    /// Per-subset flatness of the marginal pmf on its support.
    pub fn is_quasi_uniform(&self) -> QuasiUniformReport {
        let subsets: Vec<(VarSet, bool)> = VarSet::nonempty_subsets(self.n())
            .map(|s| {
                let g = self.grouping(s);
                let flat = g.weights.windows(2).all(|w| w[0] == w[1]);
                (s, flat)
            })
            .collect();
        QuasiUniformReport {
            quasi_uniform: subsets.iter().all(|(_, f)| *f),
            subsets,
        }
    }

    /// Exact marginal probabilities on `s`, keyed by projected values.
    pub fn marginal_pmf(&self, s: VarSet) -> Result<BTreeMap<Vec<u32>, Rational>> {
        self.check_nonempty_subset(s)?;
        let g = self.grouping(s);
        let idx: Vec<usize> = s.iter().collect();
        Ok(g.representative
            .iter()
            .zip(&g.weights)
            .map(|(&r, &w)| {
                let row = self.outcome(r as usize);
                (
                    idx.iter().map(|&i| row[i]).collect(),
                    Rational::new(BigInt::from(w), BigInt::from(self.total)),
                )
            })
            .collect())
    }

    /// Streams the JSON form; suitable for very large supports.
    pub fn write_json<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let vars = serde_json::to_string(&self.vars).map_err(io::Error::other)?;
        write!(w, "{{\"variables\":{vars},\"outcomes\":[")?;
        for o in 0..self.support_size() {
            if o > 0 {
                w.write_all(b",")?;
            }
            w.write_all(b"{\"values\":[")?;
            for (k, v) in self.outcome(o).iter().enumerate() {
                if k > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{v}")?;
            }
            write!(w, "],\"p\":\"{}\"}}", format_exact(&self.probability(o)))?;
        }
        w.write_all(b"]}")
    }

    pub fn to_json_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_json(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON output is UTF-8")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawDistribution =
            serde_json::from_str(text).map_err(|e| DistError::Json(e.to_string()))?;
        let mut outcomes = Vec::with_capacity(raw.outcomes.len());
        for o in raw.outcomes {
            let p = match &o.p {
                serde_json::Value::String(s) => parse_exact(s)?,
                other => return Err(RationalParseError::NotExact(other.to_string()).into()),
            };
            let mut values = Vec::with_capacity(o.values.len());
            for (k, &v) in o.values.iter().enumerate() {
                let alphabet = raw.variables.get(k).map_or(0, |var| var.alphabet);
                let v = u32::try_from(v).ok().filter(|&v| v < alphabet || k >= raw.variables.len());
                match v {
                    Some(v) => values.push(v),
                    None => {
                        return Err(DistError::ValueOutOfRange {
                            variable: raw.variables[k].name.clone(),
                            value: o.values[k],
                            alphabet,
                        })
                    }
                }
            }
            outcomes.push((values, p));
        }
        JointDistribution::new(raw.variables, outcomes)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    variables: Vec<Variable>,
    outcomes: Vec<RawOutcome>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    values: Vec<u64>,
    p: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiUniformReport {
    pub quasi_uniform: bool,
    pub subsets: Vec<(VarSet, bool)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn coin() -> JointDistribution {
        JointDistribution::new(
            vec![Variable::new("x", 2)],
            vec![(vec![0], rat(1, 2)), (vec![1], rat(1, 2))],
        )
        .unwrap()
    }

    fn coin_pair() -> JointDistribution {
        JointDistribution::from_weights(
            vec![Variable::new("x", 2), Variable::new("y", 2)],
            vec![(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 1)],
        )
        .unwrap()
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let d = JointDistribution::new(
            vec![Variable::new("x", 3), Variable::new("y", 2)],
            vec![(vec![2, 1], int(1))],
        )
        .unwrap();
        for s in VarSet::nonempty_subsets(2) {
            assert_eq!(d.entropy(s).unwrap(), 0.0);
        }
        assert!(d.is_quasi_uniform().quasi_uniform);
    }

    #[test]
    fn fair_coin_is_one_bit() {
        assert!((coin().entropy(VarSet(1)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_defect_is_reported_exactly() {
        let err = JointDistribution::new(
            vec![Variable::new("x", 2)],
            vec![(vec![0], rat(1, 2)), (vec![1], rat(1, 4))],
        )
        .unwrap_err();
        assert_eq!(
            err,
            DistError::SumNotOne {
                sum: Box::new(rat(3, 4)),
                defect: Box::new(rat(1, 4))
            }
        );
    }

    #[test]
    fn construction_errors() {
        let x = || vec![Variable::new("x", 2)];
        assert!(matches!(
            JointDistribution::new(x(), vec![(vec![0, 1], int(1))]),
            Err(DistError::ArityMismatch { .. })
        ));
        assert!(matches!(
            JointDistribution::new(x(), vec![(vec![0], int(0)), (vec![1], int(1))]),
            Err(DistError::NonPositiveProbability { outcome: 0, .. })
        ));
        assert!(matches!(
            JointDistribution::new(x(), vec![(vec![2], int(1))]),
            Err(DistError::ValueOutOfRange { .. })
        ));
        assert!(matches!(
            JointDistribution::new(x(), vec![(vec![1], rat(1, 2)), (vec![1], rat(1, 2))]),
            Err(DistError::DuplicateOutcome(1))
        ));
        assert!(matches!(
            JointDistribution::new(
                vec![Variable::new("x", 2), Variable::new("x", 2)],
                vec![(vec![1, 1], int(1))]
            ),
            Err(DistError::NameCollision(_))
        ));
    }

    #[test]
    fn marginal_of_independent_pair() {
        let m = coin_pair().marginalize(VarSet(1)).unwrap();
        assert_eq!(m, coin());
        assert_eq!(coin_pair().marginalize(VarSet(3)).unwrap(), coin_pair());
        assert_eq!(coin_pair().marginalize(VarSet(0)), Err(DistError::EmptySubset));
        assert!(matches!(
            coin_pair().marginalize(VarSet(4)),
            Err(DistError::UnknownVariable(_))
        ));
    }

    #[test]
    fn iid_power_of_coin() {
        let d = coin().iid_power(3, Budget::default()).unwrap();
        assert_eq!(d.support_size(), 8);
        assert_eq!(d.variables()[0].alphabet, 8);
        assert!((d.entropy(VarSet(1)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(coin().iid_power(1, Budget::default()).unwrap(), coin());
        assert!(matches!(
            coin().iid_power(10, Budget::new(100)),
            Err(DistError::BudgetExceeded { needed: 1024, cap: 100 })
        ));
    }

    #[test]
    fn apply_function_cases() {
        let pair = coin_pair();
        let id = pair
            .apply_function(VarSet(1), "z", 2, |v| Some(v[0]))
            .unwrap();
        let z = VarSet(4);
        let x = VarSet(1);
        assert!((id.entropy(z).unwrap() - 1.0).abs() < 1e-12);
        assert!((id.mutual_information(z, x, VarSet::EMPTY).unwrap() - 1.0).abs() < 1e-12);

        let k = pair.apply_function(VarSet(3), "k", 1, |_| Some(0)).unwrap();
        assert_eq!(k.entropy(z).unwrap(), 0.0);

        let xor = pair
            .apply_function(VarSet(3), "s", 2, |v| Some(v[0] ^ v[1]))
            .unwrap();
        assert!((xor.entropy(z).unwrap() - 1.0).abs() < 1e-12);
        assert!(xor.is_conditionally_independent(z, x, VarSet::EMPTY).unwrap());
        assert!(xor.is_conditionally_independent(z, VarSet(2), VarSet::EMPTY).unwrap());
        assert!(xor.is_function_of(z, VarSet(3)).unwrap());

        assert!(matches!(
            pair.apply_function(VarSet(1), "y", 2, |v| Some(v[0])),
            Err(DistError::NameCollision(_))
        ));
        assert!(matches!(
            pair.apply_function(VarSet(1), "w", 2, |v| (v[0] == 0).then_some(0)),
            Err(DistError::PartialFunction(_))
        ));
    }

    #[test]
    fn independence_tests() {
        let pair = coin_pair();
        assert!(pair
            .is_conditionally_independent(VarSet(1), VarSet(2), VarSet::EMPTY)
            .unwrap());
        assert_eq!(
            pair.is_conditionally_independent(VarSet(1), VarSet(3), VarSet::EMPTY),
            Err(DistError::OverlappingSubsets)
        );
        // y = x: dependent.
        let eq = JointDistribution::from_weights(
            vec![Variable::new("x", 2), Variable::new("y", 2)],
            vec![(vec![0, 0], 1), (vec![1, 1], 1)],
        )
        .unwrap();
        assert!(!eq
            .is_conditionally_independent(VarSet(1), VarSet(2), VarSet::EMPTY)
            .unwrap());
        // Same marginal weights but a support hole: x=0 forces y=0.
        let hole = JointDistribution::from_weights(
            vec![Variable::new("x", 2), Variable::new("y", 2)],
            vec![(vec![0, 0], 2), (vec![1, 0], 1), (vec![1, 1], 1)],
        )
        .unwrap();
        assert!(!hole
            .is_conditionally_independent(VarSet(1), VarSet(2), VarSet::EMPTY)
            .unwrap());
    }

    #[test]
    fn quasi_uniform_detects_nonflat_marginal() {
        let hole = JointDistribution::from_weights(
            vec![Variable::new("x", 2), Variable::new("y", 2)],
            vec![(vec![0, 0], 1), (vec![1, 0], 1), (vec![1, 1], 1)],
        )
        .unwrap();
        let rep = hole.is_quasi_uniform();
        assert!(!rep.quasi_uniform);
        assert_eq!(rep.subsets, vec![(VarSet(1), false), (VarSet(2), false), (VarSet(3), true)]);
        assert!(coin_pair().is_quasi_uniform().quasi_uniform);
    }

    #[test]
    fn json_round_trip_and_float_rejection() {
        let d = coin_pair();
        let text = d.to_json_string();
        let back = JointDistribution::from_json_str(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json_string(), text);

        let bad = r#"{"variables":[{"name":"x","alphabet":2}],"outcomes":[{"values":[0],"p":"0.5"},{"values":[1],"p":"1/2"}]}"#;
        let err = JointDistribution::from_json_str(bad).unwrap_err();
        assert!(err.to_string().contains("exact rational required"));
        let num = r#"{"variables":[{"name":"x","alphabet":2}],"outcomes":[{"values":[0],"p":1}]}"#;
        assert!(JointDistribution::from_json_str(num)
            .unwrap_err()
            .to_string()
            .contains("exact rational required"));
    }
}
