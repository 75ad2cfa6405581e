//! Norm distortion of a linear map on a point set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub epsilon: f64,
    /// `‖Ψx‖ / ‖x‖` for each nonzero input, in input order.
    pub per_point_ratio: Vec<f64>,
    /// Rows skipped because they are zero.
    pub excluded: Vec<usize>,
    pub max_abs_distortion: f64,
    pub pass: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Apply `map` to each point and compare norms. Passes when every ratio lies
/// in `[1 − ε, 1 + ε]`.
pub fn jl_distortion<F>(map: F, points: &PointSet, epsilon: f64) -> Result<DistortionReport>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let images = points.rows().map(&map).collect::<Result<Vec<_>>>()?;
    distortion_from_images(points, &images, epsilon)
}

/// Same as [`jl_distortion`] for images computed elsewhere, e.g. by a batch
/// apply. `images` may be any row-indexable collection.
pub fn distortion_from_images<R: AsRef<[f64]>>(
    points: &PointSet,
    images: &[R],
    epsilon: f64,
) -> Result<DistortionReport> {
    if !(epsilon >= 0.0) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} must be >= 0")));
    }
    if images.len() != points.n() {
        return Err(Error::Dimension(format!(
            "{} images for {} points",
            images.len(),
            points.n()
        )));
    }
    let mut per_point_ratio = Vec::with_capacity(points.n());
    let mut excluded = Vec::new();
    for (i, (x, y)) in points.rows().zip(images).enumerate() {
        let nx = norm(x);
        if nx == 0.0 {
            excluded.push(i);
            continue;
        }
        per_point_ratio.push(norm(y.as_ref()) / nx);
    }
    let max_abs_distortion = per_point_ratio
        .iter()
        .fold(0.0f64, |m, r| m.max((r - 1.0).abs()));
    let pass = per_point_ratio
        .iter()
        .all(|&r| (1.0 - epsilon..=1.0 + epsilon).contains(&r));
    Ok(DistortionReport {
        epsilon,
        per_point_ratio,
        excluded,
        max_abs_distortion,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> PointSet {
        PointSet::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0], vec![-3.0, 0.5]]).unwrap()
    }

    #[test]
    fn identity_passes() {
        let r = jl_distortion(|x| Ok(x.to_vec()), &pts(), 0.0).unwrap();
        assert!(r.pass);
        assert!(r.per_point_ratio.iter().all(|&v| v == 1.0));
        assert_eq!(r.excluded, vec![1]);
    }

    #[test]
    fn doubling_fails() {
        let r = jl_distortion(|x| Ok(x.iter().map(|v| 2.0 * v).collect()), &pts(), 0.5).unwrap();
        assert!(!r.pass);
        assert_eq!(r.max_abs_distortion, 1.0);
    }

    #[test]
    fn permuting_points_permutes_ratios() {
        let a = PointSet::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5]]).unwrap();
        let b = PointSet::from_rows(&[vec![-3.0, 0.5], vec![1.0, 2.0]]).unwrap();
        let f = |x: &[f64]| Ok(vec![x[0], 0.5 * x[1]]);
        let ra = jl_distortion(f, &a, 0.3).unwrap();
        let rb = jl_distortion(f, &b, 0.3).unwrap();
        assert_eq!(ra.per_point_ratio[0], rb.per_point_ratio[1]);
        assert_eq!(ra.per_point_ratio[1], rb.per_point_ratio[0]);
    }
}
