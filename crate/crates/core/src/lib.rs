//! iLSHADE-RSP: LSHADE-RSP differential evolution whose recombination
//! occasionally perturbs the target vector with Cauchy noise.
//!
//! The crate provides the optimizer and its baselines ([`engine`]), the
//! operators they are built from ([`strategy`], [`adapt`], [`sampling`]),
//! a benchmark problem suite ([`bench`]), the nonparametric comparison
//! protocol ([`stats`]) and an experiment runner that ties them together
//! ([`experiment`]).
//!
//! ```
//! use ilshade::bench;
//! use ilshade::engine::{run_ilshade_rsp, RunConfig};
//! use ilshade::rng::SeededRng;
//!
//! let problem = bench::registry::problem("sphere", 5).unwrap();
//! let cfg = RunConfig::new(5).with_budget(20_000).with_seed(1);
//! let record = run_ilshade_rsp(&cfg, &problem, &mut SeededRng::new(cfg.seed)).unwrap();
//! assert!(record.fev < 1e-6);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod bench;
pub mod engine;
pub mod experiment;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod strategy;
