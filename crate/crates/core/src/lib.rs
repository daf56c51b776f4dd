//! Exact distributions and exact sampling of height-biased random plane trees.
//!
//! A μ-height-biased tree of size `n` is a plane tree `T` with `n` nodes
//! drawn with probability proportional to `exp(-μ h(T))`, where `h(T)` is
//! its height. The crate provides:
//!
//! - [`tree`]: plane trees, statistics, local balls, contour encoding;
//! - [`lattice`]: ±1 walks, the cycle map and the cut bijection, path width;
//! - [`counting`]: exact and log-domain tables of bounded-height counts;
//! - [`partition`]: partition function, height and root-degree laws;
//! - [`asymptotics`]: closed-form predictions for all regimes;
//! - [`sampler`]: exact samplers with reproducible random streams;
//! - [`experiments`]: named checks of predictions against exact laws and
//!   Monte Carlo.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod counting;
pub mod dd;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod logreal;
pub mod partition;
pub mod sampler;
pub mod tree;

pub use error::{Error, Result};
pub use logreal::LogReal;
