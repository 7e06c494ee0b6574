//! Analytic limits for remote inference executed on noisy hardware behind a
//! noisy channel: capacity/dispersion models, rate-distortion demand curves,
//! architecture-dependent supply converses, graph cut bounds, tail
//! reliability calculus, finite-blocklength benchmarks, and throughput caps.

pub mod channel_models;
pub mod compute_graph;
pub mod error;
pub mod finite_blocklength;
pub mod supply_converse;
pub mod tail_reliability;
pub mod task_demand;
pub mod throughput;

pub use error::{LimitsError, Result};
