// NaN must fail validation, so `!(x >= a)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod error;
pub mod fixtures;
pub mod harness;
pub mod measure;
pub mod multi;
pub mod numeric;
pub mod pairwise;
pub mod precise;
pub mod search;
