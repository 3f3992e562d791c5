//! Finite-N random binning of `X^N` for decoding with side information
//! `Y^N`, with exact entropies of the resulting system.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dist::{Budget, DistError, JointDistribution};
use crate::varset::VarSet;

/// Cap on the number of `X^N` values a hash table may index.
pub const MAX_TABLE: u64 = 1_000_000;

/// Rate slack used when none is configured.
pub const DEFAULT_DELTA: f64 = 0.1;

pub const CSV_HEADER: [&str; 6] = ["seed", "N", "m", "H_hash", "I_hash_y", "H_x_given_hash_y"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A uniform random map from `X^N` to `{0, .., m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinningCode {
    pub copies: u32,
    pub bins: u32,
    pub seed: u64,
    /// Indexed by the tuple value `Σ x_j · |X|^j`.
    pub table: Vec<u32>,
}

impl BinningCode {
    pub fn hash(&self, tuple: u32) -> u32 {
        self.table[tuple as usize]
    }
}

/// `round(2^(N (H(x|y) + δ)))`, at least 1.
pub fn bin_count(h_x_given_y: f64, copies: u32, delta: f64) -> Result<u32, SwError> {
    let m = (copies as f64 * (h_x_given_y + delta)).exp2().round().max(1.0);
    if m > u32::MAX as f64 {
        return Err(SwError::InvalidParameter(format!("bin count {m} too large")));
    }
    Ok(m as u32)
}

/// Draws a code for hashing variable `x` of `d` given `y`, over `copies`
/// i.i.d. copies. `bins` overrides the rate-derived bin count.
pub fn build_code(
    d: &JointDistribution,
    x: usize,
    y: usize,
    copies: u32,
    delta: f64,
    seed: u64,
    bins: Option<u32>,
) -> Result<BinningCode, SwError> {
    if copies == 0 {
        return Err(SwError::InvalidParameter("N must be at least 1".into()));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(SwError::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    if x >= d.n() || y >= d.n() || x == y {
        return Err(SwError::InvalidParameter("x and y must be distinct variables".into()));
    }
    let alphabet = d.variables()[x].alphabet as u128;
    let states = (0..copies).try_fold(1u128, |acc, _| acc.checked_mul(alphabet));
    let states = states.unwrap_or(u128::MAX);
    Budget::new(MAX_TABLE).check(states)?;
    let m = match bins {
        Some(0) => return Err(SwError::InvalidParameter("bin count must be positive".into())),
        Some(m) => m,
        None => {
            let h = d.conditional_entropy(VarSet::singleton(x), VarSet::singleton(y))?;
            bin_count(h, copies, delta)?
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = (0..states).map(|_| rng.gen_range(0..m)).collect();
    Ok(BinningCode {
        copies,
        bins: m,
        seed,
        table,
    })
}

/// `copies` i.i.d. copies of `d` with the hash of `x` appended as the last
/// variable, named `<x>'`.
pub fn hash_system(
    d: &JointDistribution,
    x: usize,
    code: &BinningCode,
    budget: Budget,
) -> Result<JointDistribution, SwError> {
    let power = d.iid_power(code.copies, budget)?;
    let name = format!("{}'", d.variables()[x].name);
    Ok(power.apply_function(VarSet::singleton(x), &name, code.bins, |v| {
        Some(code.hash(v[0]))
    })?)
}

/// One row of the report; entropies are divided by `N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwRow {
    pub seed: u64,
    #[serde(rename = "N")]
    pub copies: u32,
    pub m: u32,
    #[serde(rename = "H_hash")]
    pub h_hash: f64,
    #[serde(rename = "I_hash_y")]
    pub i_hash_y: f64,
    #[serde(rename = "H_x_given_hash_y")]
    pub h_x_given_hash_y: f64,
    /// `H(X'|X) = 0`, checked structurally.
    #[serde(skip)]
    pub hash_is_function_of_x: bool,
}

/// Exact quantities of the hashed system for variable `x` and side
/// information `y`.
pub fn sw_row(
    d: &JointDistribution,
    x: usize,
    y: usize,
    code: &BinningCode,
    budget: Budget,
) -> Result<SwRow, SwError> {
    let sys = hash_system(d, x, code, budget)?;
    let (sx, sy, sh) = (
        VarSet::singleton(x),
        VarSet::singleton(y),
        VarSet::singleton(sys.n() - 1),
    );
    let n = code.copies as f64;
    Ok(SwRow {
        seed: code.seed,
        copies: code.copies,
        m: code.bins,
        h_hash: sys.entropy(sh)? / n,
        i_hash_y: sys.mutual_information(sh, sy, VarSet::EMPTY)?.max(0.0) / n,
        h_x_given_hash_y: sys.conditional_entropy(sx, sh | sy)?.max(0.0) / n,
        hash_is_function_of_x: sys.is_function_of(sh, sx)?,
    })
}

/// Settings shared by every row of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct SwConfig {
    pub copies: Vec<u32>,
    pub delta: f64,
    pub bins: Option<u32>,
    pub budget: Budget,
}

impl Default for SwConfig {
    fn default() -> Self {
        SwConfig {
            copies: vec![2, 4, 6, 8],
            delta: DEFAULT_DELTA,
            bins: None,
            budget: Budget::default(),
        }
    }
}

/// Rows for each `N` of `config`, hashing the first variable of a
/// two-variable distribution given the second.
pub fn sw_report(d: &JointDistribution, config: &SwConfig, seed: u64) -> Result<Vec<SwRow>, SwError> {
    if d.n() != 2 {
        return Err(SwError::InvalidParameter(format!(
            "expected a distribution over (x, y), got {} variables",
            d.n()
        )));
    }
    config
        .copies
        .iter()
        .map(|&n| {
            let code = build_code(d, 0, 1, n, config.delta, seed, config.bins)?;
            sw_row(d, 0, 1, &code, config.budget)
        })
        .collect()
}

/// Fair bit `x` observed through a binary symmetric channel with the given
/// crossover probability `num/den`.
pub fn binary_symmetric_pair(num: u64, den: u64) -> JointDistribution {
    assert!(num <= den && den > 0, "crossover must lie in [0, 1]");
    let outcomes = [
        (vec![0, 0], den - num),
        (vec![0, 1], num),
        (vec![1, 0], num),
        (vec![1, 1], den - num),
    ];
    JointDistribution::from_weights(
        vec![crate::dist::Variable::new("x", 2), crate::dist::Variable::new("y", 2)],
        outcomes.into_iter().filter(|(_, w)| *w > 0).collect(),
    )
    .expect("valid pair")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_pair_needs_few_bins() {
        let d = binary_symmetric_pair(0, 1);
        let code = build_code(&d, 0, 1, 4, 0.25, 1, None).unwrap();
        assert_eq!(code.bins, 2);
    }

    #[test]
    fn same_seed_same_table() {
        let d = binary_symmetric_pair(1, 4);
        let a = build_code(&d, 0, 1, 6, 0.1, 42, None).unwrap();
        let b = build_code(&d, 0, 1, 6, 0.1, 42, None).unwrap();
        assert_eq!(a, b);
        let c = build_code(&d, 0, 1, 6, 0.1, 43, None).unwrap();
        assert_ne!(a.table, c.table);
    }

    #[test]
    fn constant_hash_carries_nothing() {
        let d = binary_symmetric_pair(1, 4);
        let cfg = SwConfig {
            bins: Some(1),
            ..SwConfig::default()
        };
        for row in sw_report(&d, &cfg, 3).unwrap() {
            assert_eq!(row.h_hash, 0.0);
            assert_eq!(row.i_hash_y, 0.0);
            assert!(row.hash_is_function_of_x);
        }
    }

    #[test]
    fn table_budget() {
        let d = binary_symmetric_pair(1, 4);
        assert!(matches!(
            build_code(&d, 0, 1, 21, 0.1, 0, None),
            Err(SwError::Dist(DistError::BudgetExceeded { .. }))
        ));
    }
}
