//! Fixed-length appearance descriptors of tactile frames.

mod moments;
mod zernike;

use std::fmt;
use std::str::FromStr;

pub use moments::{centroid, raw_moment_vector, NormalizedMoments};
pub use zernike::{zernike_indices, zernike_len, zernike_order_for_len};

use crate::error::{Error, Result};
use crate::tactile::{Exploration, TactileFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DescriptorKind {
    RawMoments,
    HuMoments,
    ZernikeMoments,
}

impl DescriptorKind {
    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::RawMoments => "raw",
            DescriptorKind::HuMoments => "hu",
            DescriptorKind::ZernikeMoments => "zernike",
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(DescriptorKind::RawMoments),
            "hu" => Ok(DescriptorKind::HuMoments),
            "zernike" => Ok(DescriptorKind::ZernikeMoments),
            other => Err(Error::invalid(format!(
                "unknown descriptor '{other}' (expected raw, hu or zernike)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorConfig {
    pub kind: DescriptorKind,
    pub zernike_max_order: usize,
    /// Divide each frame by its total pressure before extraction.
    pub normalize_pressure: bool,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        Self {
            kind: DescriptorKind::ZernikeMoments,
            zernike_max_order: 4,
            normalize_pressure: false,
        }
    }
}

impl DescriptorConfig {
    pub fn new(kind: DescriptorKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn descriptor_len(&self) -> usize {
        match self.kind {
            DescriptorKind::RawMoments => 6,
            DescriptorKind::HuMoments => 7,
            DescriptorKind::ZernikeMoments => zernike_len(self.zernike_max_order),
        }
    }

    /// Whether `describe` will refuse this frame.
    pub fn rejects(&self, frame: &TactileFrame) -> bool {
        frame.is_degenerate() && (self.kind != DescriptorKind::RawMoments || self.normalize_pressure)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    pub kind: DescriptorKind,
    pub values: Vec<f64>,
}

pub fn raw_moments(frame: &TactileFrame) -> Descriptor {
    Descriptor {
        kind: DescriptorKind::RawMoments,
        values: raw_moment_vector(frame).to_vec(),
    }
}

pub fn hu_moments(frame: &TactileFrame) -> Result<Descriptor> {
    Ok(Descriptor {
        kind: DescriptorKind::HuMoments,
        values: NormalizedMoments::of(frame)?.hu().to_vec(),
    })
}

pub fn zernike_moments(frame: &TactileFrame, max_order: usize) -> Result<Descriptor> {
    Ok(Descriptor {
        kind: DescriptorKind::ZernikeMoments,
        values: zernike::zernike_magnitudes(frame, max_order)?,
    })
}

pub fn describe(frame: &TactileFrame, cfg: &DescriptorConfig) -> Result<Descriptor> {
    let normalized;
    let frame = if cfg.normalize_pressure {
        let total = frame.total();
        if total <= 0.0 {
            return Err(Error::DegenerateFrame);
        }
        normalized = TactileFrame::new(
            frame.rows(),
            frame.cols(),
            frame.pressures().iter().map(|v| v / total).collect(),
        )?;
        &normalized
    } else {
        frame
    };
    match cfg.kind {
        DescriptorKind::RawMoments => Ok(raw_moments(frame)),
        DescriptorKind::HuMoments => hu_moments(frame),
        DescriptorKind::ZernikeMoments => zernike_moments(frame, cfg.zernike_max_order),
    }
}

/// Descriptors of the usable samples of an exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct DescribedExploration {
    /// `(descriptor, contact position)` in sample order.
    pub entries: Vec<(Descriptor, [f64; 3])>,
    /// Index into the exploration's samples for each entry.
    pub sample_indices: Vec<usize>,
    /// Samples dropped because their frame failed the descriptor precondition.
    pub skipped: usize,
}

pub fn describe_exploration(e: &Exploration, cfg: &DescriptorConfig) -> DescribedExploration {
    describe_samples(e.samples(), cfg)
}

pub fn describe_samples(
    samples: &[crate::tactile::TouchSample],
    cfg: &DescriptorConfig,
) -> DescribedExploration {
    let mut out = DescribedExploration {
        entries: Vec::with_capacity(samples.len()),
        sample_indices: Vec::with_capacity(samples.len()),
        skipped: 0,
    };
    for (i, s) in samples.iter().enumerate() {
        match describe(&s.frame, cfg) {
            Ok(d) => {
                out.entries.push((d, s.position));
                out.sample_indices.push(i);
            }
            Err(_) => out.skipped += 1,
        }
    }
    out
}
