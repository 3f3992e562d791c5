//! Entropy profiles: the vector of all `2^n - 1` subset entropies.

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::dist::JointDistribution;
use crate::elemental::elementals;
use crate::expr::{expand, ExprError, Quantity};
use crate::varset::VarSet;

/// Largest variable count for which a dense profile is built.
pub const MAX_PROFILE_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile needs {expected} coordinates, got {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("coordinate {index} is {value}; coordinates must be finite and non-negative")]
    BadCoordinate { index: usize, value: f64 },
    #[error("profiles support at most {MAX_PROFILE_VARS} variables, got {0}")]
    TooManyVariables(usize),
    #[error("profile has {found} variables, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown subset key `{0}`")]
    UnknownKey(String),
    #[error("missing coordinate `{0}`")]
    MissingKey(String),
    #[error("profile JSON: {0}")]
    Json(String),
}

impl From<ExprError> for ProfileError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::DimensionMismatch { expected, found } => {
                ProfileError::DimensionMismatch { expected, found }
            }
            other => ProfileError::Json(other.to_string()),
        }
    }
}

/// Subset entropies in bits, indexed by `VarSet::coord_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    names: Vec<String>,
    coords: Vec<f64>,
}

impl EntropyProfile {
    pub fn new(names: Vec<String>, coords: Vec<f64>) -> Result<Self, ProfileError> {
        let n = names.len();
        if n > MAX_PROFILE_VARS {
            return Err(ProfileError::TooManyVariables(n));
        }
        let expected = (1usize << n) - 1;
        if coords.len() != expected {
            return Err(ProfileError::WrongLength {
                expected,
                found: coords.len(),
            });
        }
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(ProfileError::BadCoordinate { index, value });
        }
        Ok(EntropyProfile { names, coords })
    }

    /// Profile with default names `a, b, c, ...` (or `x0, x1, ...` past 26).
    pub fn unnamed(coords: Vec<f64>) -> Result<Self, ProfileError> {
        let n = (coords.len() + 1).trailing_zeros() as usize;
        Self::new(default_names(n), coords)
    }

    /// All marginal entropies of `d`.
    pub fn of(d: &JointDistribution) -> Result<Self, ProfileError> {
        if d.n() > MAX_PROFILE_VARS {
            return Err(ProfileError::TooManyVariables(d.n()));
        }
        let coords = VarSet::nonempty_subsets(d.n())
            .map(|s| d.entropy(s).expect("subset is non-empty and in range"))
            .collect();
        Ok(EntropyProfile {
            names: d.names(),
            coords,
        })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `H(s)`, with `H(∅) = 0`.
    pub fn get(&self, s: VarSet) -> f64 {
        if s.is_empty() {
            0.0
        } else {
            self.coords[s.coord_index()]
        }
    }

    pub fn quantity(&self, q: &Quantity) -> Result<f64, ExprError> {
        expand(q, self.n())?.evaluate(self)
    }

    /// Coordinate-wise multiplication by `factor > 0`.
    pub fn scale(&self, factor: f64) -> EntropyProfile {
        assert!(factor > 0.0 && factor.is_finite(), "scale factor must be positive");
        EntropyProfile {
            names: self.names.clone(),
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// Checks every elemental inequality at tolerance `tol`.
    pub fn is_polymatroid(&self, tol: f64) -> PolymatroidVerdict {
        let mut checked = 0;
        let violations = elementals(self.n())
            .into_iter()
            .filter_map(|e| {
                checked += 1;
                let value = e.expr.evaluate(self).expect("same dimension");
                (value < -tol).then(|| Violation {
                    inequality: e.label(&self.names),
                    value,
                })
            })
            .collect::<Vec<_>>();
        PolymatroidVerdict {
            polymatroid: violations.is_empty(),
            checked,
            violations,
        }
    }

    /// Ingleton slack for the ordering `(i, j, k, l)`:
    /// `I(i;j|k) + I(i;j|l) + I(k;l) - I(i;j)`. Non-negative means the
    /// Ingleton inequality holds.
    pub fn ingleton(&self, order: [usize; 4]) -> Result<f64, ProfileError> {
        if self.n() != 4 {
            return Err(ProfileError::DimensionMismatch {
                expected: 4,
                found: self.n(),
            });
        }
        Ok(ingleton_expr(order).evaluate(self)?)
    }

    pub fn to_json(&self) -> ProfileJson<'_> {
        ProfileJson(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProfileError> {
        let raw: RawProfile =
            serde_json::from_str(text).map_err(|e| ProfileError::Json(e.to_string()))?;
        Self::from_raw(raw.n, raw.order, raw.coords)
    }

    pub(crate) fn from_raw(
        n: usize,
        order: Vec<String>,
        coords: std::collections::BTreeMap<String, f64>,
    ) -> Result<Self, ProfileError> {
        if order.len() != n {
            return Err(ProfileError::DimensionMismatch {
                expected: n,
                found: order.len(),
            });
        }
        if n > MAX_PROFILE_VARS {
            return Err(ProfileError::TooManyVariables(n));
        }
        let mut dense = vec![f64::NAN; (1usize << n) - 1];
        for (key, v) in &coords {
            let s = parse_subset_key(key, &order)
                .ok_or_else(|| ProfileError::UnknownKey(key.clone()))?;
            dense[s.coord_index()] = *v;
        }
        if let Some(i) = dense.iter().position(|v| v.is_nan()) {
            return Err(ProfileError::MissingKey(subset_key(
                VarSet::from_coord_index(i),
                &order,
            )));
        }
        EntropyProfile::new(order, dense)
    }
}

pub fn ingleton_expr(order: [usize; 4]) -> crate::expr::InfoExpression {
    let [i, j, k, l] = order.map(VarSet::singleton);
    let e = VarSet::EMPTY;
    let q = |a, b, c| expand(&Quantity::mutual_info(a, b, c), 4).expect("valid ordering");
    q(i, j, k) + q(i, j, l) + q(k, l, e) - q(i, j, e)
}

pub fn default_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// Key for a subset in profile JSON: names concatenated in declared order
/// when every name is a single character, comma-joined otherwise.
pub fn subset_key<S: AsRef<str>>(s: VarSet, order: &[S]) -> String {
    let single = order.iter().all(|n| n.as_ref().chars().count() == 1);
    let parts: Vec<&str> = s.iter().map(|i| order[i].as_ref()).collect();
    parts.join(if single { "" } else { "," })
}

fn parse_subset_key<S: AsRef<str>>(key: &str, order: &[S]) -> Option<VarSet> {
    let single = order.iter().all(|n| n.as_ref().chars().count() == 1);
    let parts: Vec<String> = if key.contains(',') || !single {
        key.split(',').map(|p| p.trim().to_string()).collect()
    } else {
        key.chars().map(|c| c.to_string()).collect()
    };
    let mut s = VarSet::EMPTY;
    for p in parts {
        let i = order.iter().position(|n| n.as_ref() == p)?;
        if s.contains(i) {
            return None;
        }
        s = s | VarSet::singleton(i);
    }
    (!s.is_empty()).then_some(s)
}

#[derive(Deserialize)]
struct RawProfile {
    n: usize,
    order: Vec<String>,
    coords: std::collections::BTreeMap<String, f64>,
}

/// Serializer view writing coordinates in coordinate order.
pub struct ProfileJson<'a>(&'a EntropyProfile);

struct Coords<'a>(&'a EntropyProfile);

impl Serialize for Coords<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let p = self.0;
        let mut m = s.serialize_map(Some(p.coords.len()))?;
        for (i, v) in p.coords.iter().enumerate() {
            m.serialize_entry(&subset_key(VarSet::from_coord_index(i), &p.names), v)?;
        }
        m.end()
    }
}

impl Serialize for ProfileJson<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("n", &self.0.n())?;
        m.serialize_entry("order", &self.0.names)?;
        m.serialize_entry("coords", &Coords(self.0))?;
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub inequality: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolymatroidVerdict {
    pub polymatroid: bool,
    pub checked: usize,
    pub violations: Vec<Violation>,
}
