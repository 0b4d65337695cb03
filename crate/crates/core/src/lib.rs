// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod costs;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    struct Overview;
    #[doc = include_str!("../../../book/src/problems.md")]
    struct Problems;
    #[doc = include_str!("../../../book/src/costs.md")]
    struct Costs;
    #[doc = include_str!("../../../book/src/dynamics.md")]
    struct Dynamics;
    #[doc = include_str!("../../../book/src/baseline.md")]
    struct Baseline;
    #[doc = include_str!("../../../book/src/reweighting.md")]
    struct Reweighting;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
