//! Constrained policy optimization for designing fixed-length regulatory DNA
//! that is active in a target cell type while staying below activity limits
//! in off-target cell types.

pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod motif;
pub mod policy;
pub mod reward;
pub mod seq;
pub mod synthetic;
pub mod trainer;
