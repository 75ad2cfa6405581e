//! Random column signs on top of a matrix with small restricted isometry
//! constant, checked as a norm-preserving map on a point set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{delta_s_exact, run_trials};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::{trial_seed, Seed, SeedStream, LANE_SIGNS};
use crate::sketch::sign_vector;

/// `m × d` matrix of independent `±1/√m` entries, filled row by row.
pub fn rademacher_matrix(m: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = SeedStream::new(seed, LANE_SIGNS);
    let a = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * d).map(|_| a * rng.sign()).collect();
    DMatrix::from_row_slice(m, d, &data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrahmerWardReport {
    pub m: usize,
    pub d: usize,
    pub s: usize,
    pub epsilon: f64,
    pub delta_s: f64,
    /// `δ_s ≤ ε/4`, measured. The pass rate is reported either way.
    pub precondition_met: bool,
    pub n_points: usize,
    pub trials: usize,
    pub seed: Seed,
    pub successes: usize,
    pub pass_rate: f64,
    pub note: String,
}

/// For each trial draw product-one signs `ξ` and test whether
/// `(1 − ε)‖x‖² ≤ ‖A D_ξ x‖² ≤ (1 + ε)‖x‖²` for every point.
pub fn krahmer_ward_check(
    a: &DMatrix<f64>,
    s: usize,
    points: &PointSet,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<KrahmerWardReport> {
    let (m, d) = a.shape();
    if points.d() != d {
        return Err(Error::Dimension(format!(
            "points have d = {}, matrix has {d} columns",
            points.d()
        )));
    }
    if !(epsilon > 0.0) || trials == 0 {
        return Err(Error::Parameter("need epsilon > 0 and trials >= 1".into()));
    }
    let rip = delta_s_exact(a, s)?;
    let precondition_met = rip.delta_s <= epsilon / 4.0;
    let ok = run_trials(trials, |trial| {
        let xi = sign_vector(d, true, trial_seed(seed, trial)).signs;
        points.rows().all(|x| {
            let nx2: f64 = x.iter().map(|v| v * v).sum();
            if nx2 == 0.0 {
                return true;
            }
            let signed = DVector::from_iterator(d, x.iter().zip(&xi).map(|(v, s)| v * s));
            let ny2 = (a * signed).norm_squared();
            ((1.0 - epsilon) * nx2..=(1.0 + epsilon) * nx2).contains(&ny2)
        })
    });
    let successes = ok.iter().filter(|v| **v).count();
    let note = if precondition_met {
        "empirical mode: measured delta_s <= epsilon/4 stands in for the sparsity requirement"
    } else {
        "precondition not met: measured delta_s > epsilon/4; pass rate reported for reference"
    };
    Ok(KrahmerWardReport {
        m,
        d,
        s,
        epsilon,
        delta_s: rip.delta_s,
        precondition_met,
        n_points: points.n(),
        trials,
        seed: Seed(seed),
        successes,
        pass_rate: successes as f64 / trials as f64,
        note: note.into(),
    })
}
