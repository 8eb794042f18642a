use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{mean_of, RigidTransform};
use crate::error::{Error, Result};

/// `H = Σ p′ᵢ q′ᵢᵀ` over centroid deviations of matched pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCovariance(pub DMatrix<f64>);

impl CrossCovariance {
    pub fn from_pairs<A: AsRef<[f64]>, B: AsRef<[f64]>>(p: &[A], q: &[B]) -> Result<(Self, Vec<f64>, Vec<f64>)> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::invalid(format!(
                "need equally many matched points, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        let dim = p[0].as_ref().len();
        if !(dim == 3 || dim == 4)
            || p.iter().any(|x| x.as_ref().len() != dim)
            || q.iter().any(|x| x.as_ref().len() != dim)
        {
            return Err(Error::invalid("matched points must all be 3D or all 4D"));
        }
        let p_bar = mean_of(p.iter().map(|x| x.as_ref()), dim);
        let q_bar = mean_of(q.iter().map(|x| x.as_ref()), dim);
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for (pi, qi) in p.iter().zip(q) {
            let (pi, qi) = (pi.as_ref(), qi.as_ref());
            for a in 0..dim {
                let pa = pi[a] - p_bar[a];
                for b in 0..dim {
                    h[(a, b)] += pa * (qi[b] - q_bar[b]);
                }
            }
        }
        Ok((CrossCovariance(h), p_bar, q_bar))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Rotation maximizing `tr(R·H)` over proper rotations:
    /// `R = V·diag(1, …, 1, det(V·Uᵀ))·Uᵀ` from `H = U·Σ·Vᵀ`.
    /// A zero matrix yields the identity.
    pub fn optimal_rotation(&self) -> DMatrix<f64> {
        let dim = self.dim();
        if self.0.iter().all(|v| *v == 0.0) {
            return DMatrix::identity(dim, dim);
        }
        let svd = SVD::new(self.0.clone(), true, true);
        let u = svd.u.expect("U requested");
        let v = svd.v_t.expect("Vᵀ requested").transpose();
        let mut r = &v * u.transpose();
        if r.determinant() < 0.0 {
            // Flip the direction of the smallest singular value.
            let mut fix = DMatrix::<f64>::identity(dim, dim);
            fix[(dim - 1, dim - 1)] = -1.0;
            r = v * fix * u.transpose();
        }
        r
    }
}

/// Least-squares proper rigid transform taking `p[i]` onto `q[i]`.
pub fn kabsch<A: AsRef<[f64]>, B: AsRef<[f64]>>(p: &[A], q: &[B]) -> Result<RigidTransform> {
    let (h, p_bar, q_bar) = CrossCovariance::from_pairs(p, q)?;
    let r = h.optimal_rotation();
    let t = DVector::from_vec(q_bar) - &r * DVector::from_vec(p_bar);
    Ok(RigidTransform::from_parts(r, t))
}

/// Uniformly distributed proper rotation (QR of a Gaussian matrix).
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `tr(√(HᵀH))`, the sum of singular values, computed from the eigenvalues
/// of `HᵀH`.
pub fn trace_upper_bound(h: &CrossCovariance) -> f64 {
    let hth = h.0.transpose() * &h.0;
    SymmetricEigen::new(hth)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum()
}

/// Samples `trials` random proper rotations and confirms none beats
/// `rotation` on `tr(R·H)`, and that `tr(rotation·H)` respects the
/// `tr(√(HᵀH))` bound (both with 1e-9 slack).
pub fn trace_optimality_check(h: &CrossCovariance, rotation: &DMatrix<f64>, trials: usize, seed: u64) -> bool {
    let dim = h.dim();
    if rotation.nrows() != dim || rotation.ncols() != dim {
        return false;
    }
    let score = (rotation * &h.0).trace();
    if score > trace_upper_bound(h) + 1e-9 {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let candidate = random_rotation(dim, &mut rng);
        score >= (candidate * &h.0).trace() - 1e-9
    })
}
