//! Economic complexity from country-product trade networks.
//!
//! The pipeline runs from raw export values to a binary country-product
//! matrix ([`matrix`]), through the method of reflections ([`reflections`]),
//! to empirical analyses ([`empirics`]). [`capability`] simulates matrices
//! from a capability model and [`nulls`] builds degree-controlled random
//! counterparts. [`io`] holds the file formats used by the `ecomplex` CLI.

pub mod capability;
pub mod cli;
pub mod empirics;
pub mod error;
pub mod io;
pub mod matrix;
pub mod nulls;
pub mod ols;
pub mod reflections;
pub mod rng;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use matrix::{
    compute_rca, diversification, threshold_to_binary, ubiquity, BipartiteMatrix,
    ExportVolumeTable, RcaTable,
};
pub use reflections::{
    correlate_external, normalize, random_walk_check, rank_shift, reflect, NormalizedScores,
    ReflectionTrajectory,
};
