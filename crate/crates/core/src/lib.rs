//! Exact computational laboratory for linear and conditional information
//! inequalities.
//!
//! * [`dist`]: finite joint distributions with exact rational pmfs.
//! * [`profile`], [`expr`], [`catalog`]: entropy profiles, information
//!   expressions and the built-in inequality catalog.
//! * [`lang`]: text form of expressions.
//! * [`lp`]: exact LP over the polymatroid cone with checkable certificates.
//! * [`fq`]: the line/parabola quadruple over prime fields.
//! * [`ae`]: interval boxes for limits of serialized, hashed constructions
//!   and violation certificates.
//! * [`swsim`]: finite-N random-binning simulator.

pub mod ae;
pub mod catalog;
pub mod dist;
pub mod elemental;
pub mod expr;
pub mod fq;
pub mod lang;
pub mod lp;
pub mod primes;
pub mod profile;
pub mod rational;
pub mod swsim;
pub mod varset;

pub use dist::{Budget, JointDistribution, Variable};
pub use expr::{InfoExpression, Quantity};
pub use profile::EntropyProfile;
pub use rational::Rational;
pub use varset::VarSet;
