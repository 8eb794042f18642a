#![allow(dead_code)]

use iclap::tactile::{Cloud, TactileFrame};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_frame(rng: &mut impl Rng, rows: usize, cols: usize) -> TactileFrame {
    TactileFrame::from_fn(rows, cols, |_, _| rng.random_range(0.0..10.0)).unwrap()
}

/// A few anisotropic Gaussian bumps around `center` (x, y), all well inside
/// a disk of radius `spread + 3·max σ`.
pub struct BlobPattern {
    blobs: Vec<(f64, f64, f64, f64, f64)>,
}

impl BlobPattern {
    pub fn random(rng: &mut impl Rng, spread: f64) -> Self {
        let n = rng.random_range(2..=4);
        let blobs = (0..n)
            .map(|_| {
                (
                    rng.random_range(-spread..spread),
                    rng.random_range(-spread..spread),
                    rng.random_range(1.5..3.5),
                    rng.random_range(1.5..3.5),
                    rng.random_range(0.5..2.0),
                )
            })
            .collect();
        Self { blobs }
    }

    /// Intensity at offset (dx, dy) from the pattern origin.
    pub fn at(&self, dx: f64, dy: f64) -> f64 {
        self.blobs
            .iter()
            .map(|&(bx, by, sx, sy, a)| {
                let u = (dx - bx) / sx;
                let v = (dy - by) / sy;
                a * (-0.5 * (u * u + v * v)).exp()
            })
            .sum()
    }

    /// Samples the pattern, scaled spatially by `scale`, on a grid with
    /// origin at `(cx, cy)`.
    pub fn render(&self, rows: usize, cols: usize, cx: f64, cy: f64, scale: f64) -> TactileFrame {
        TactileFrame::from_fn(rows, cols, |r, c| self.at((c as f64 - cx) / scale, (r as f64 - cy) / scale)).unwrap()
    }
}

/// Rotates `frame` by `degrees` about `(cx, cy)` with bilinear resampling;
/// samples falling outside the grid read as zero.
pub fn rotate_bilinear(frame: &TactileFrame, degrees: f64, cx: f64, cy: f64) -> TactileFrame {
    let (s, c) = degrees.to_radians().sin_cos();
    let (rows, cols) = (frame.rows(), frame.cols());
    let read = |r: isize, col: isize| {
        if r < 0 || col < 0 || r >= rows as isize || col >= cols as isize {
            0.0
        } else {
            frame.get(r as usize, col as usize)
        }
    };
    TactileFrame::from_fn(rows, cols, |r, col| {
        // Inverse map the output pixel into the source frame.
        let (dx, dy) = (col as f64 - cx, r as f64 - cy);
        let sx = cx + c * dx + s * dy;
        let sy = cy - s * dx + c * dy;
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        let (x0, y0) = (x0 as isize, y0 as isize);
        read(y0, x0) * (1.0 - fx) * (1.0 - fy)
            + read(y0, x0 + 1) * fx * (1.0 - fy)
            + read(y0 + 1, x0) * (1.0 - fx) * fy
            + read(y0 + 1, x0 + 1) * fx * fy
    })
    .unwrap()
}

/// Rotation by `angle` in the plane of axes `i` and `j`.
pub fn givens(dim: usize, i: usize, j: usize, angle: f64) -> DMatrix<f64> {
    let mut g = DMatrix::identity(dim, dim);
    let (s, c) = angle.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

pub fn random_cloud(rng: &mut impl Rng, dim: usize, n: usize, extent: f64) -> Cloud {
    Cloud::new(dim, (0..dim * n).map(|_| rng.random_range(-extent..extent)).collect()).unwrap()
}

/// Nearest point by exhaustive scan; ties go to the lowest index.
pub fn linear_scan(cloud: &Cloud, q: &[f64]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in cloud.points().enumerate() {
        let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    best
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}
