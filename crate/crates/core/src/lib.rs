//! Predicting individual illiteracy from mobile phone metadata.
//!
//! The crate covers the whole path from raw operator logs to maps:
//!
//! - [`ingest`]: streaming CSV parsers for CDR events, top-ups, towers,
//!   handsets and labels, plus referential validation;
//! - [`synthgen`]: a seeded synthetic population whose behavior depends on
//!   literacy, used as an end-to-end oracle;
//! - [`features`]: financial, mobility and social features per subscriber;
//! - [`learn`]: gradient-boosted trees with minority up-sampling, stratified
//!   splits, cross-validation, metrics and feature importance;
//! - [`geomap`]: tower-level aggregation and IDW interpolated surfaces.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod features;
pub mod geo;
pub mod geomap;
pub mod ingest;
pub mod kv;
pub mod learn;
pub mod pipeline;
pub mod provenance;
pub mod seed;
pub mod synthgen;

pub use error::{Error, ErrorKind, Result};
pub use features::{Catalog, FeatureMatrix};
pub use geo::LonLat;
pub use learn::{EvalReport, GbmModel, Hyperparameters};
