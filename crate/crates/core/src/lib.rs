// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod kernels;
pub mod piecewise;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod representations;
pub mod sequences;
pub mod series;
pub mod special;
pub mod vertical;

pub use error::{Error, Result};
pub use rational::Rational;
