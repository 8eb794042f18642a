//! Synthetic tactile objects and simulated explorations.
//!
//! Objects sit centered on the origin of the xy plane. A touch places the
//! sensor axis-aligned at the contact point, columns along x and rows along
//! y, and samples the object's texture intensity at every cell center.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::recognition::derive_seed;
use crate::tactile::{
    Dataset, Exploration, ObjectRecord, TactileFrame, TouchSample, DEFAULT_COLS, DEFAULT_ROWS,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Footprint {
    Rect { width: f64, height: f64 },
    Disk { radius: f64 },
}

impl Footprint {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Footprint::Rect { width, height } => x.abs() <= width / 2.0 && y.abs() <= height / 2.0,
            Footprint::Disk { radius } => x * x + y * y <= radius * radius,
        }
    }

    fn half_extent(&self) -> (f64, f64) {
        match *self {
            Footprint::Rect { width, height } => (width / 2.0, height / 2.0),
            Footprint::Disk { radius } => (radius, radius),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> [f64; 2] {
        let (hx, hy) = self.half_extent();
        loop {
            let x = rng.random_range(-hx..=hx);
            let y = rng.random_range(-hy..=hy);
            if self.contains(x, y) {
                return [x, y];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeightField {
    Flat,
    /// Spherical cap of radius `r` centered on the origin.
    Hemisphere(f64),
    /// Semicircular ridge of the given width running along `axis` through
    /// the origin.
    Ridge { axis: Axis, width: f64 },
}

impl HeightField {
    pub fn height(&self, x: f64, y: f64) -> f64 {
        match *self {
            HeightField::Flat => 0.0,
            HeightField::Hemisphere(r) => (r * r - x * x - y * y).max(0.0).sqrt(),
            HeightField::Ridge { axis, width } => {
                let d = match axis {
                    Axis::X => y,
                    Axis::Y => x,
                };
                let h = width / 2.0;
                (h * h - d * d).max(0.0).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    /// Gaussian bumps of width `sigma` on a square lattice.
    Dots { pitch: f64, sigma: f64 },
    /// Cosine stripes; `orientation` in degrees is the direction across
    /// the stripes.
    Bars { orientation: f64, pitch: f64 },
    /// Circles of the given radius tiled on a lattice of pitch `3 · radius`.
    Ring { radius: f64 },
    Blank,
}

impl Texture {
    /// Intensity in `[0, 1]` (dots may sum slightly above one) at a point.
    pub fn intensity(&self, x: f64, y: f64) -> f64 {
        match *self {
            Texture::Dots { pitch, sigma } => {
                let (i0, j0) = ((x / pitch).round(), (y / pitch).round());
                let mut sum = 0.0;
                for di in -1..=1 {
                    for dj in -1..=1 {
                        let dx = x - (i0 + di as f64) * pitch;
                        let dy = y - (j0 + dj as f64) * pitch;
                        let d2 = dx * dx + dy * dy;
                        sum += if sigma > 0.0 {
                            (-d2 / (2.0 * sigma * sigma)).exp()
                        } else if d2 == 0.0 {
                            1.0
                        } else {
                            0.0
                        };
                    }
                }
                sum
            }
            Texture::Bars { orientation, pitch } => {
                let a = orientation.to_radians();
                let u = x * a.cos() + y * a.sin();
                0.5 * (1.0 + (2.0 * PI * u / pitch).cos())
            }
            Texture::Ring { radius } => {
                let pitch = 3.0 * radius;
                let dx = x - (x / pitch).round() * pitch;
                let dy = y - (y / pitch).round() * pitch;
                let off = (dx * dx + dy * dy).sqrt() - radius;
                let sigma = 0.25 * radius;
                (-off * off / (2.0 * sigma * sigma)).exp()
            }
            Texture::Blank => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthObjectSpec {
    pub object_id: String,
    pub footprint: Footprint,
    pub height_field: HeightField,
    pub texture: Texture,
    pub pressure_gain: f64,
}

impl SynthObjectSpec {
    pub fn validate(&self) -> Result<()> {
        crate::tactile::validate_identifier(&self.object_id)?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let ok_footprint = match self.footprint {
            Footprint::Rect { width, height } => positive(width) && positive(height),
            Footprint::Disk { radius } => positive(radius),
        };
        if !ok_footprint {
            return Err(Error::invalid(format!("{}: footprint dimensions must be positive", self.object_id)));
        }
        let ok_height = match self.height_field {
            HeightField::Flat => true,
            HeightField::Hemisphere(r) => positive(r),
            HeightField::Ridge { width, .. } => positive(width),
        };
        let ok_texture = match self.texture {
            Texture::Dots { pitch, sigma } => positive(pitch) && sigma.is_finite() && sigma >= 0.0,
            Texture::Bars { orientation, pitch } => orientation.is_finite() && positive(pitch),
            Texture::Ring { radius } => positive(radius),
            Texture::Blank => true,
        };
        if !(ok_height && ok_texture && positive(self.pressure_gain)) {
            return Err(Error::invalid(format!("{}: shape parameters must be positive", self.object_id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationSpec {
    pub n_touches: usize,
    /// Standard deviation of the Gaussian noise on each position coordinate (mm).
    pub position_noise: f64,
    /// Standard deviation of the Gaussian noise on each cell.
    pub pressure_noise: f64,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    /// Cell spacing (mm).
    pub cell_pitch: f64,
}

impl Default for ExplorationSpec {
    fn default() -> Self {
        Self {
            n_touches: 60,
            position_noise: 0.5,
            pressure_noise: 0.02,
            seed: 0,
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            cell_pitch: 3.4,
        }
    }
}

impl ExplorationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_touches == 0 || self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid("touch count and sensor dimensions must be positive"));
        }
        for (name, v) in [("position_noise", self.position_noise), ("pressure_noise", self.pressure_noise)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0")));
            }
        }
        if !(self.cell_pitch.is_finite() && self.cell_pitch > 0.0) {
            return Err(Error::invalid("cell_pitch must be positive"));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma).expect("validated sigma").sample(rng)
    }
}

/// Simulates one touch at `contact` (xy, mm).
pub fn render_touch(
    spec: &SynthObjectSpec,
    contact: [f64; 2],
    espec: &ExplorationSpec,
    rng: &mut impl Rng,
) -> Result<TouchSample> {
    let [x, y] = contact;
    if !spec.footprint.contains(x, y) {
        return Err(Error::invalid(format!(
            "contact ({x}, {y}) lies outside the footprint of '{}'",
            spec.object_id
        )));
    }
    let z = spec.height_field.height(x, y);
    let position = [
        x + gaussian(rng, espec.position_noise),
        y + gaussian(rng, espec.position_noise),
        z + gaussian(rng, espec.position_noise),
    ];
    let col_mid = (espec.cols as f64 - 1.0) / 2.0;
    let row_mid = (espec.rows as f64 - 1.0) / 2.0;
    let mut pressures = Vec::with_capacity(espec.rows * espec.cols);
    for r in 0..espec.rows {
        for c in 0..espec.cols {
            let cx = x + (c as f64 - col_mid) * espec.cell_pitch;
            let cy = y + (r as f64 - row_mid) * espec.cell_pitch;
            let v = spec.pressure_gain * spec.texture.intensity(cx, cy) + gaussian(rng, espec.pressure_noise);
            pressures.push(v.max(0.0));
        }
    }
    TouchSample::new(position, TactileFrame::new(espec.rows, espec.cols, pressures)?)
}

/// Touches at contacts drawn uniformly over the footprint, in draw order.
pub fn generate_exploration(spec: &SynthObjectSpec, espec: &ExplorationSpec) -> Result<Exploration> {
    spec.validate()?;
    espec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(espec.seed);
    let samples = (0..espec.n_touches)
        .map(|_| {
            let contact = spec.footprint.sample(&mut rng);
            render_touch(spec, contact, espec, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Exploration::new(spec.object_id.clone(), samples)
}

/// A set of object specs together with its deliberately confusable pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    pub objects: Vec<SynthObjectSpec>,
    /// Index pairs sharing footprint and height field but not texture.
    pub geometry_twins: Vec<(usize, usize)>,
    /// Index pairs sharing texture but not size or shape.
    pub texture_twins: Vec<(usize, usize)>,
}

fn object(id: &str, footprint: Footprint, height_field: HeightField, texture: Texture, gain: f64) -> SynthObjectSpec {
    SynthObjectSpec {
        object_id: id.to_string(),
        footprint,
        height_field,
        texture,
        pressure_gain: gain,
    }
}

fn rect(width: f64, height: f64) -> Footprint {
    Footprint::Rect { width, height }
}

fn disk(radius: f64) -> Footprint {
    Footprint::Disk { radius }
}

fn ridge(axis: Axis, width: f64) -> HeightField {
    HeightField::Ridge { axis, width }
}

fn dots(pitch: f64, sigma: f64) -> Texture {
    Texture::Dots { pitch, sigma }
}

fn bars(orientation: f64, pitch: f64) -> Texture {
    Texture::Bars { orientation, pitch }
}

/// The ten-object benchmark catalog.
pub fn standard_catalog() -> Catalog {
    use HeightField::{Flat, Hemisphere};
    let objects = vec![
        object("plate_dots", rect(80.0, 50.0), Flat, dots(8.0, 1.5), 1.0),
        object("plate_bars", rect(80.0, 50.0), Flat, bars(0.0, 6.0), 1.0),
        object("dome_rings", disk(40.0), Hemisphere(40.0), Texture::Ring { radius: 4.0 }, 1.0),
        object("ridge_rings", rect(120.0, 40.0), ridge(Axis::X, 40.0), Texture::Ring { radius: 4.0 }, 1.0),
        object("dome_bars", disk(25.0), Hemisphere(25.0), bars(45.0, 10.0), 0.8),
        object("ridge_dots", rect(50.0, 110.0), ridge(Axis::Y, 50.0), dots(6.0, 1.0), 1.2),
        object("plate_dots_large", rect(140.0, 90.0), Flat, dots(8.0, 1.5), 1.0),
        object("disk_bars_fine", disk(50.0), Flat, bars(90.0, 4.0), 1.0),
        object("ridge_bars_wide", rect(60.0, 90.0), ridge(Axis::Y, 60.0), bars(0.0, 12.0), 1.0),
        object("dome_dots_dense", disk(30.0), Hemisphere(30.0), dots(5.0, 1.0), 1.5),
    ];
    Catalog {
        objects,
        geometry_twins: vec![(0, 1)],
        texture_twins: vec![(2, 3)],
    }
}

/// The standard catalog plus ten further objects.
pub fn extended_catalog() -> Catalog {
    use HeightField::{Flat, Hemisphere};
    let mut c = standard_catalog();
    c.objects.extend([
        object("plate_rings", rect(80.0, 50.0), Flat, Texture::Ring { radius: 4.0 }, 1.0),
        object("dome_dots", disk(40.0), Hemisphere(40.0), dots(8.0, 1.5), 1.0),
        object("ridge_bars", rect(120.0, 40.0), ridge(Axis::X, 40.0), bars(0.0, 6.0), 1.0),
        object("disk_dots_coarse", disk(50.0), Flat, dots(12.0, 2.5), 0.9),
        object("plate_bars_diag", rect(100.0, 70.0), Flat, bars(45.0, 8.0), 1.1),
        object("dome_rings_large", disk(55.0), Hemisphere(55.0), Texture::Ring { radius: 6.0 }, 1.0),
        object("ridge_rings_tall", rect(60.0, 90.0), ridge(Axis::Y, 60.0), Texture::Ring { radius: 3.0 }, 1.3),
        object("plate_dots_fine", rect(60.0, 60.0), Flat, dots(4.0, 0.8), 0.7),
        object("disk_rings", disk(35.0), Flat, Texture::Ring { radius: 5.0 }, 1.0),
        object("ridge_dots_wide", rect(90.0, 60.0), ridge(Axis::X, 60.0), dots(10.0, 2.0), 1.0),
    ]);
    c.geometry_twins.push((0, 10));
    c.texture_twins.push((0, 11));
    c
}

pub const BENCHMARK_EXPLORATIONS: usize = 5;
pub const BENCHMARK_TOUCHES: usize = 60;

/// Generates `explorations` explorations of every catalog object.
pub fn generate_dataset(catalog: &Catalog, seed: u64, explorations: usize, base: &ExplorationSpec) -> Result<Dataset> {
    let objects = catalog
        .objects
        .par_iter()
        .enumerate()
        .map(|(oi, spec)| {
            let explorations = (0..explorations)
                .map(|ei| {
                    let espec = ExplorationSpec {
                        seed: derive_seed(&[seed, oi as u64, ei as u64]),
                        ..base.clone()
                    };
                    Ok((format!("exp{}", ei + 1), generate_exploration(spec, &espec)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ObjectRecord {
                object_id: spec.object_id.clone(),
                display_name: spec.object_id.replace('_', " "),
                explorations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset { objects })
}

/// Ten objects, five explorations of sixty touches each.
pub fn standard_benchmark(seed: u64) -> Result<Dataset> {
    benchmark(&standard_catalog(), seed)
}

pub fn benchmark(catalog: &Catalog, seed: u64) -> Result<Dataset> {
    let base = ExplorationSpec {
        n_touches: BENCHMARK_TOUCHES,
        ..ExplorationSpec::default()
    };
    generate_dataset(catalog, seed, BENCHMARK_EXPLORATIONS, &base)
}
