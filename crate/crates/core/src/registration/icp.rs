use nalgebra::{DMatrix, DVector};

use super::kdtree::{KdTree, NearestSearch};
use super::{centroid, kabsch, mean_of, squared_distance, RigidTransform};
use crate::error::{Error, Result};
use crate::tactile::Cloud;

/// Starting pose for the test cloud.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGuess {
    /// Identity rotation, translation moving the test centroid onto the
    /// model centroid.
    #[default]
    CentroidAlignment,
    Identity,
    Transform(RigidTransform),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpParams {
    pub max_iters: usize,
    /// Stop once the error is at or below this value.
    pub abs_tolerance: f64,
    /// Stop once `|e_{t−1} − e_t| / max(e_{t−1}, ε)` drops below this value.
    pub rel_change_threshold: f64,
    pub init: InitialGuess,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iters: 50,
            abs_tolerance: 1e-6,
            rel_change_threshold: 1e-4,
            init: InitialGuess::CentroidAlignment,
        }
    }
}

const REL_CHANGE_EPS: f64 = 1e-12;

impl IcpParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        for (name, v) in [
            ("abs_tolerance", self.abs_tolerance),
            ("rel_change_threshold", self.rel_change_threshold),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    AbsTolerance,
    MaxIters,
    RelChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    pub transform: RigidTransform,
    /// RMS distance of the final matched pairs.
    pub error: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// Error after every iteration; non-increasing.
    pub error_trace: Vec<f64>,
}

/// Registers `test` onto `model`, building a k-d tree over the model.
pub fn icp_register(test: &Cloud, model: &Cloud, params: &IcpParams) -> Result<RegistrationResult> {
    if test.dim() != model.dim() {
        return Err(Error::invalid(format!(
            "test cloud is {}-D but model is {}-D",
            test.dim(),
            model.dim()
        )));
    }
    icp_register_with(test, &KdTree::build(model), params)
}

/// Error of the transformed `test` points against their matches.
fn rms(transform: &RigidTransform, test: &Cloud, matched: &[&[f64]], buf: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for (p, q) in test.points().zip(matched) {
        transform.apply_into(p, buf);
        sum += squared_distance(buf, q);
    }
    (sum / test.len() as f64).sqrt()
}

/// Iterative closest point against any exact nearest-neighbor index.
///
/// Each iteration matches every transformed test point to its nearest model
/// point, solves the closed-form alignment of the original test points onto
/// those matches, and records the RMS distance of the matched pairs. When
/// rounding makes the fresh solution no better than the current pose on the
/// new matches, the current pose is kept, so the trace never increases.
pub fn icp_register_with<S: NearestSearch + ?Sized>(
    test: &Cloud,
    model: &S,
    params: &IcpParams,
) -> Result<RegistrationResult> {
    params.validate()?;
    let dim = test.dim();
    if model.dim() != dim {
        return Err(Error::invalid(format!(
            "test cloud is {dim}-D but model is {}-D",
            model.dim()
        )));
    }
    if model.is_empty() {
        return Err(Error::invalid("model cloud is empty"));
    }

    let mut transform = match &params.init {
        InitialGuess::Identity => RigidTransform::identity(dim),
        InitialGuess::CentroidAlignment => {
            let p_bar = centroid(test);
            let q_bar = mean_of((0..model.len()).map(|i| model.point(i)), dim);
            let t: Vec<f64> = q_bar.iter().zip(&p_bar).map(|(q, p)| q - p).collect();
            RigidTransform::from_translation(&t)
        }
        InitialGuess::Transform(t) => {
            if t.dim() != dim {
                return Err(Error::invalid("initial transform dimension differs from clouds"));
            }
            t.clone()
        }
    };

    let mut buf = vec![0.0; dim];
    let mut matches: Vec<usize> = Vec::with_capacity(test.len());
    let mut trace: Vec<f64> = Vec::with_capacity(params.max_iters);
    let mut stop_reason = StopReason::MaxIters;

    for iteration in 1..=params.max_iters {
        matches.clear();
        for p in test.points() {
            transform.apply_into(p, &mut buf);
            matches.push(model.nearest_sq(&buf).0);
        }
        let matched: Vec<&[f64]> = matches.iter().map(|&j| model.point(j)).collect();

        let current = rms(&transform, test, &matched, &mut buf);
        let candidate = kabsch(&test.points().collect::<Vec<_>>(), &matched)?;
        let solved = rms(&candidate, test, &matched, &mut buf);
        let error = if solved <= current {
            transform = candidate;
            solved
        } else {
            current
        };
        trace.push(error);

        if error <= params.abs_tolerance {
            stop_reason = StopReason::AbsTolerance;
            break;
        }
        if iteration == params.max_iters {
            stop_reason = StopReason::MaxIters;
            break;
        }
        if iteration >= 2 {
            let prev = trace[trace.len() - 2];
            if (prev - error).abs() / prev.max(REL_CHANGE_EPS) < params.rel_change_threshold {
                stop_reason = StopReason::RelChange;
                break;
            }
        }
    }

    Ok(RegistrationResult {
        transform,
        error: *trace.last().expect("at least one iteration"),
        iterations: trace.len(),
        stop_reason,
        error_trace: trace,
    })
}

/// Registration error between two labeled (4D) clouds.
pub fn iclap_distance(test4: &Cloud, model4: &Cloud, params: &IcpParams) -> Result<f64> {
    if test4.dim() != 4 || model4.dim() != 4 {
        return Err(Error::invalid("labeled-point distance needs 4D clouds"));
    }
    Ok(icp_register(test4, model4, params)?.error)
}

impl RigidTransform {
    /// Convenience for tests and callers that hold plain arrays.
    pub fn from_rows(rotation: &[Vec<f64>], translation: &[f64]) -> Result<Self> {
        let dim = translation.len();
        if rotation.len() != dim || rotation.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("rotation rows do not match translation length"));
        }
        let r = DMatrix::from_fn(dim, dim, |i, j| rotation[i][j]);
        Self::new(r, DVector::from_column_slice(translation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Cloud {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..3 {
                    pts.push([i as f64 * 10.0, j as f64 * 10.0, k as f64 * 10.0]);
                }
            }
        }
        Cloud::from_points(3, pts).unwrap()
    }

    #[test]
    fn perfect_overlap_stops_immediately() {
        let g = grid();
        let params = IcpParams {
            init: InitialGuess::Identity,
            ..IcpParams::default()
        };
        let r = icp_register(&g, &g, &params).unwrap();
        assert_eq!(r.error, 0.0);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.stop_reason, StopReason::AbsTolerance);
    }

    #[test]
    fn recovers_grid_translation() {
        let g = grid();
        let shifted = RigidTransform::from_translation(&[2.0, 0.0, 0.0]).apply_cloud(&g).unwrap();
        let params = IcpParams {
            init: InitialGuess::Identity,
            ..IcpParams::default()
        };
        let r = icp_register(&shifted, &g, &params).unwrap();
        assert!(r.error < 1e-6);
        let t = r.transform.translation();
        assert!((t[0] + 2.0).abs() < 1e-9 && t[1].abs() < 1e-9 && t[2].abs() < 1e-9);
    }

    #[test]
    fn single_iteration_budget() {
        let g = grid();
        let shifted = RigidTransform::from_translation(&[6.0, 0.0, 0.0]).apply_cloud(&g).unwrap();
        let params = IcpParams {
            max_iters: 1,
            init: InitialGuess::Identity,
            abs_tolerance: 0.0,
            ..IcpParams::default()
        };
        let r = icp_register(&shifted, &g, &params).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.error_trace.len(), 1);
        assert!(r.error > 0.0);
        assert_eq!(r.stop_reason, StopReason::MaxIters);
    }

    #[test]
    fn single_pair_aligns_exactly() {
        let p = Cloud::from_points(4, [[1.0, 2.0, 3.0, 4.0]]).unwrap();
        let q = Cloud::from_points(4, [[-5.0, 0.5, 9.0, 2.0]]).unwrap();
        let params = IcpParams {
            max_iters: 1,
            init: InitialGuess::Identity,
            ..IcpParams::default()
        };
        assert_eq!(iclap_distance(&p, &q, &params).unwrap(), 0.0);
    }

    #[test]
    fn dimension_checks() {
        let a = Cloud::from_points(3, [[0.0; 3]]).unwrap();
        let b = Cloud::from_points(4, [[0.0; 4]]).unwrap();
        assert!(icp_register(&a, &b, &IcpParams::default()).is_err());
        assert!(iclap_distance(&a, &a, &IcpParams::default()).is_err());
        let bad = IcpParams {
            max_iters: 0,
            ..IcpParams::default()
        };
        assert!(icp_register(&a, &a, &bad).is_err());
    }
}
