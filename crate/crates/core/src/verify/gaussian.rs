use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{SeedStream, LANE_GAUSS};

/// Dense `k × d` matrix of i.i.d. `N(0, 1/k)` entries, filled row by row.
pub fn gaussian_baseline(d: usize, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    if k == 0 || k > d {
        return Err(Error::Parameter(format!("need 1 <= k <= d, got k = {k}, d = {d}")));
    }
    let mut rng = SeedStream::new(seed, LANE_GAUSS);
    let scale = 1.0 / (k as f64).sqrt();
    let data: Vec<f64> = (0..k * d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        })
        .collect();
    Ok(DMatrix::from_row_slice(k, d, &data))
}
