use crate::error::{Error, Result};
use crate::tactile::TactileFrame;

/// Raw moments up to order two: `(m00, m10, m01, m20, m11, m02)`.
pub fn raw_moment_vector(frame: &TactileFrame) -> [f64; 6] {
    let mut m = [0.0; 6];
    for (x, y, v) in frame.cells() {
        if v == 0.0 {
            continue;
        }
        let (x, y) = (x as f64, y as f64);
        m[0] += v;
        m[1] += v * x;
        m[2] += v * y;
        m[3] += v * x * x;
        m[4] += v * x * y;
        m[5] += v * y * y;
    }
    m
}

/// Intensity centroid `(x̄, ȳ)` in pixel units, with the frame mass.
pub fn centroid(frame: &TactileFrame) -> Result<(f64, f64, f64)> {
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    for (x, y, v) in frame.cells() {
        m00 += v;
        m10 += v * x as f64;
        m01 += v * y as f64;
    }
    if m00 <= 0.0 {
        return Err(Error::DegenerateFrame);
    }
    Ok((m10 / m00, m01 / m00, m00))
}

/// Scale-normalized central moments `η_pq = μ_pq / μ00^(1 + (p+q)/2)` for
/// `p + q ≤ 3`. Entries with `p + q < 2` are 1 (`η00`) or 0 (first order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedMoments {
    eta: [[f64; 4]; 4],
}

impl NormalizedMoments {
    pub fn of(frame: &TactileFrame) -> Result<Self> {
        let (cx, cy, m00) = centroid(frame)?;
        let mut mu = [[0.0f64; 4]; 4];
        for (x, y, v) in frame.cells() {
            if v == 0.0 {
                continue;
            }
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let mut xp = 1.0;
            for row in mu.iter_mut() {
                let mut yq = 1.0;
                for cell in row.iter_mut() {
                    *cell += v * xp * yq;
                    yq *= dy;
                }
                xp *= dx;
            }
        }
        let mut eta = [[0.0; 4]; 4];
        for p in 0..4 {
            for q in 0..4 - p {
                let order = (p + q) as f64;
                eta[p][q] = if p + q == 1 {
                    0.0
                } else {
                    mu[p][q] / m00.powf(1.0 + order / 2.0)
                };
            }
        }
        Ok(Self { eta })
    }

    /// `η_pq`; panics for `p + q > 3`.
    pub fn get(&self, p: usize, q: usize) -> f64 {
        assert!(p + q <= 3, "normalized moments are kept up to order 3");
        self.eta[p][q]
    }

    /// The seven Hu invariants.
    pub fn hu(&self) -> [f64; 7] {
        let n = |p, q| self.get(p, q);
        let (n20, n02, n11) = (n(2, 0), n(0, 2), n(1, 1));
        let (n30, n03, n21, n12) = (n(3, 0), n(0, 3), n(2, 1), n(1, 2));

        let a = n30 + n12;
        let b = n21 + n03;
        let c = n30 - 3.0 * n12;
        let d = 3.0 * n21 - n03;

        [
            n20 + n02,
            (n20 - n02).powi(2) + 4.0 * n11 * n11,
            c * c + d * d,
            a * a + b * b,
            c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b),
            (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
            d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b),
        ]
    }
}
