//! Road-user position prediction by similarity-weighted averaging of
//! previously observed displacements.
//!
//! The crate is organised along the processing pipeline:
//!
//! * [`trajectory_data`] ingests per-frame tracks, downsamples them, derives
//!   orientations, filters outliers and splits recordings into train/test.
//! * [`spatial_index`] answers exact fixed-radius queries with a ball tree.
//! * [`kernel`] holds the Gaussian similarity between road-user states and
//!   its interaction-aware extension.
//! * [`predictor`] builds the displacement database and computes weighted
//!   average, constant-velocity and interaction-aware predictions.
//! * [`training`] learns kernel parameters by trajectory-grouped K-fold
//!   cross-validation over a refined grid.
//! * [`evaluation`] turns predictions on test data into error records,
//!   quartile statistics and ADE/FDE summaries.
//! * [`physics`] gives the minimum prediction horizon for emergency braking.
//! * [`synth`] generates the synthetic scenarios used for desk-scale runs.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod kernel;
pub mod physics;
pub mod predictor;
pub mod spatial_index;
pub mod stats;
pub mod synth;
pub mod training;
pub mod trajectory_data;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use kernel::{InteractionParams, SimilarityParams, TrafficSituationState};
pub use predictor::{DisplacementDatabase, Prediction};
pub use trajectory_data::{Category, Corpus, RoadUserState, Trajectory};
