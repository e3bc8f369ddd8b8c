//! Quality control for crowdsourced UI labeling.
//!
//! Crowdworkers are scored by comparing the class distribution of their
//! labels with the distributions produced by trusted labelers.

pub mod cli;
pub mod corpus;
pub mod dgt;
pub mod error;
pub mod metrics;
pub mod powerlaw;
pub mod report;
pub mod seed;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
