//! Tactile data model and the on-disk touch/dataset formats.

mod dataset;
mod format;
mod types;

pub use dataset::{Dataset, ObjectRecord};
pub(crate) use types::validate_identifier;
pub use format::{parse_exploration, serialize_exploration};
pub use types::{
    Cloud, Exploration, LabeledPoint, TactileFrame, TouchSample, DEFAULT_COLS, DEFAULT_ROWS,
};
