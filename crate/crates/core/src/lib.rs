// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod closure;
pub mod dg;
pub mod dual;
pub mod entropy;
pub mod error;
pub mod experiments;
