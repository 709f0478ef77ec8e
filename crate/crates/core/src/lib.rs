//! Generalized-cost model and Monte Carlo simulator for autonomous minibus
//! routes that pick passengers up on demand inside a suburban street grid
//! and then continue on a fixed route downtown.
//!
//! * [`model`] domain types, scenario files and validation
//! * [`analytic`] closed-form costs, selection indicators and zone counts
//! * [`simulator`] demand sampling, routing and the dispatch timeline
//! * [`experiments`] replications, statistics, sweeps and reports
//! * [`ingest`] route models built from stop-boarding data

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod experiments;
pub mod ingest;
pub mod model;
pub mod simulator;
