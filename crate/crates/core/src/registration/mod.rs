//! Rigid registration in three or four dimensions: closed-form alignment of
//! matched pairs, exact nearest-neighbor search and the iterative
//! closest-point loop built from them.

mod icp;
mod kabsch;
mod kdtree;

pub use icp::{
    iclap_distance, icp_register, icp_register_with, IcpParams, InitialGuess, RegistrationResult,
    StopReason,
};
pub use kabsch::{kabsch, random_rotation, trace_optimality_check, trace_upper_bound, CrossCovariance};
pub use kdtree::{KdTree, Neighbor, NearestSearch};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tactile::Cloud;

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}

/// Component-wise mean of a cloud.
pub fn centroid(c: &Cloud) -> Vec<f64> {
    mean_of(c.points(), c.dim())
}

pub(crate) fn mean_of<'a>(points: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for p in points {
        for (s, v) in sum.iter_mut().zip(p) {
            *s += v;
        }
        n += 1;
    }
    sum.iter_mut().for_each(|s| *s /= n as f64);
    sum
}

/// `p ↦ R·p + T` with `R` a proper rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl RigidTransform {
    /// Checks `‖RᵀR − I‖∞ ≤ 1e-9` and `|det R − 1| ≤ 1e-9`.
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let dim = rotation.nrows();
        if !(dim == 3 || dim == 4) || rotation.ncols() != dim || translation.len() != dim {
            return Err(Error::invalid(format!(
                "transform must be 3D or 4D, got {}x{} rotation with {}-vector",
                rotation.nrows(),
                rotation.ncols(),
                translation.len()
            )));
        }
        let t = Self {
            rotation,
            translation,
        };
        if t.orthogonality_error() > 1e-9 || (t.rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("rotation is not a proper orthogonal matrix"));
        }
        if t.translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("translation must be finite"));
        }
        Ok(t)
    }

    pub(crate) fn from_parts(rotation: DMatrix<f64>, translation: DVector<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(DMatrix::identity(dim, dim), DVector::zeros(dim))
    }

    pub fn from_translation(t: &[f64]) -> Self {
        Self::from_parts(DMatrix::identity(t.len(), t.len()), DVector::from_column_slice(t))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    /// `‖RᵀR − I‖∞` (largest absolute entry).
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.rotation.transpose() * &self.rotation - DMatrix::<f64>::identity(d, d)).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.rotation.determinant()
    }

    #[inline]
    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for (r, o) in out.iter_mut().enumerate().take(d) {
            let mut acc = self.translation[r];
            for (c, v) in p.iter().enumerate().take(d) {
                acc += self.rotation[(r, c)] * v;
            }
            *o = acc;
        }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(p, &mut out);
        out
    }

    pub fn apply_cloud(&self, c: &Cloud) -> Result<Cloud> {
        if c.dim() != self.dim() {
            return Err(Error::invalid("transform and cloud dimensions differ"));
        }
        let mut coords = vec![0.0; c.coords().len()];
        for (p, out) in c.points().zip(coords.chunks_exact_mut(c.dim())) {
            self.apply_into(p, out);
        }
        Cloud::new(c.dim(), coords)
    }
}
