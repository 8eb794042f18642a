use std::f64::consts::PI;

use super::moments::centroid;
use crate::error::Result;
use crate::tactile::TactileFrame;

/// `(n, m)` pairs with `0 ≤ m ≤ n ≤ max_order` and `n − m` even, ordered by
/// `n` then `m`.
pub fn zernike_indices(max_order: usize) -> Vec<(usize, usize)> {
    (0..=max_order)
        .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| (n, m)))
        .collect()
}

pub fn zernike_len(max_order: usize) -> usize {
    (0..=max_order).map(|n| n / 2 + 1).sum()
}

/// Inverse of [`zernike_len`].
pub fn zernike_order_for_len(len: usize) -> Option<usize> {
    (0..=len).find(|&o| zernike_len(o) == len)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficients of the radial polynomial `R_nm(ρ) = Σ_s c_s ρ^(n−2s)`.
fn radial_coefficients(n: usize, m: usize) -> Vec<(i32, f64)> {
    let half_diff = (n - m) / 2;
    let half_sum = (n + m) / 2;
    (0..=half_diff)
        .map(|s| {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * factorial(n - s)
                / (factorial(s) * factorial(half_sum - s) * factorial(half_diff - s));
            ((n - 2 * s) as i32, c)
        })
        .collect()
}

/// Magnitudes `|A_nm|` for every index of [`zernike_indices`].
///
/// The frame is mapped onto the unit disk centered at its intensity
/// centroid, with radius equal to the largest distance from the centroid to
/// any pixel center, so every pixel lands inside the disk.
pub(crate) fn zernike_magnitudes(frame: &TactileFrame, max_order: usize) -> Result<Vec<f64>> {
    let (cx, cy, _) = centroid(frame)?;

    let radius = frame
        .cells()
        .map(|(x, y, _)| (x as f64 - cx).hypot(y as f64 - cy))
        .fold(0.0f64, f64::max);

    // (ρ, θ, f) for non-zero pixels inside the disk.
    let polar: Vec<(f64, f64, f64)> = frame
        .cells()
        .filter(|&(_, _, v)| v != 0.0)
        .filter_map(|(x, y, v)| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if radius == 0.0 {
                return Some((0.0, 0.0, v));
            }
            let rho = dx.hypot(dy) / radius;
            (rho <= 1.0 + 1e-12).then(|| (rho.min(1.0), dy.atan2(dx), v))
        })
        .collect();

    let out = zernike_indices(max_order)
        .into_iter()
        .map(|(n, m)| {
            let coeffs = radial_coefficients(n, m);
            let (mut re, mut im) = (0.0, 0.0);
            for &(rho, theta, v) in &polar {
                let radial: f64 = coeffs.iter().map(|&(p, c)| c * rho.powi(p)).sum();
                let (sin, cos) = (m as f64 * theta).sin_cos();
                // conj(V_nm) = R_nm(ρ)·e^{−imθ}
                re += v * radial * cos;
                im -= v * radial * sin;
            }
            (n as f64 + 1.0) / PI * re.hypot(im)
        })
        .collect();
    Ok(out)
}
