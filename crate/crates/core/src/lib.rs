//! Exact Lasso regularization paths, bootstrap-intersected variable
//! selection and the simulation harness used to study them.
//!
//! Start with [`lasso::lars_lasso_path`] for a single path,
//! [`bolasso::run_bolasso`] for bootstrap selection and
//! [`harness::run_experiment`] for reproducible experiments. The guide in
//! `book/` walks through each piece; its code listings run as doc-tests.

pub mod baselines;
pub mod bolasso;
pub mod error;
pub mod harness;
pub mod lasso;
pub mod numerics;
pub mod population;
pub mod rng;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lasso-path.md")]
    mod lasso_path {}
    #[doc = include_str!("../../../book/src/consistency.md")]
    mod consistency {}
    #[doc = include_str!("../../../book/src/bolasso.md")]
    mod bolasso {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cross-validation.md")]
    mod cross_validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
