//! Tactile object recognition by iterative closest labeled point (iCLAP).
//!
//! Each touch yields a pressure image and a contact position. Pressure
//! images are described by moment features, quantized against a k-means
//! dictionary, and the resulting word label becomes a fourth coordinate
//! next to the contact position. A partial 4D cloud from a few touches is
//! then registered against every reference model with a 4D variant of
//! iterative closest point, and the model with the smallest residual wins.
//!
//! Two single-modality baselines are provided for comparison: 3D ICP on
//! contact positions only, and bag-of-words histograms of labels only.

pub mod cli;
pub mod codebook;
pub mod descriptors;
pub mod error;
pub mod numfmt;
pub mod recognition;
pub mod registration;
pub mod synth;
pub mod tactile;

pub use error::{Error, Result};
