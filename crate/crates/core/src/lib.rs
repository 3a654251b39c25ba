//! Exact-arithmetic toolkit for two-dimensional singular vectors: Farey
//! lattices and best simultaneous approximation, the dimension-bound formula
//! suite, the self-similar tree of prescribed uniform exponent, and empirical
//! dimension estimators.  All certified paths run on arbitrary-precision
//! integers and rationals; floating point never decides an inequality.

pub mod arith;
pub mod error;
pub mod interval;
pub mod power;

pub mod best_approx;
pub mod cantor_tree;
pub mod dimension_lab;
pub mod exponents;
pub mod rational_geometry;
pub mod serialize;

pub use error::{Error, Result};
