//! Mass captured by a random coordinate subset after the averaging walk.

use serde::{Deserialize, Serialize};

use super::run_trials;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, trial_seed, Seed};
use crate::sketch::select_fixed;
use crate::walk::{walk_apply, WalkKind, WalkSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub d: usize,
    pub n: u64,
    pub epsilon: f64,
    pub k: usize,
    pub t: u64,
    pub trials: usize,
    pub seed: Seed,
    pub failures: usize,
    pub frequency: f64,
    /// `n^{-3}`.
    pub bound: f64,
    pub pass: bool,
}

/// Subset size `k = ⌈c_k2 ε⁻² ln n⌉`; see [`subset_concentration_with_k`].
pub fn subset_concentration_experiment(
    d: usize,
    n: u64,
    epsilon: f64,
    c_k2: f64,
    c_moment: f64,
    trials: usize,
    seed: u64,
) -> Result<SubsetReport> {
    if n < 2 || !(epsilon > 0.0) || !(c_k2 > 0.0) {
        return Err(Error::Parameter("need n >= 2, epsilon > 0, c_k2 > 0".into()));
    }
    let k = (c_k2 * (n as f64).ln() / (epsilon * epsilon)).ceil() as usize;
    subset_concentration_with_k(d, k, n, epsilon, c_moment, trials, seed)
}

/// Walk `⌈c_moment d ln d ln n⌉` averaging steps from `e₁`, pick a uniform
/// `k`-subset `S`, and count how often `Σ_{i∈S} x_i²` leaves
/// `(k/d)[1 − ε, 1 + ε]`.
pub fn subset_concentration_with_k(
    d: usize,
    k: usize,
    n: u64,
    epsilon: f64,
    c_moment: f64,
    trials: usize,
    seed: u64,
) -> Result<SubsetReport> {
    if k == 0 || k > d {
        return Err(Error::Parameter(format!("subset size k = {k} must be in 1..={d}")));
    }
    if d < 2 || n < 2 || trials == 0 || !(c_moment > 0.0) {
        return Err(Error::Parameter("need d >= 2, n >= 2, trials >= 1, c_moment > 0".into()));
    }
    let df = d as f64;
    let t = (c_moment * df * df.ln() * (n as f64).ln()).ceil() as u64;
    let target = k as f64 / df;
    let (lo, hi) = (target * (1.0 - epsilon), target * (1.0 + epsilon));
    let fails = run_trials(trials, |trial| {
        let s = trial_seed(seed, trial);
        let mut x = vec![0.0; d];
        x[0] = 1.0;
        let spec = WalkSpec {
            kind: WalkKind::Ora,
            d,
            steps: t,
            seed: Seed(s),
        };
        walk_apply(&mut x, &spec).expect("valid walk");
        let subset = select_fixed(d, k, derive_seed(s, 1)).expect("k <= d");
        let mass: f64 = subset.iter().map(|i| x[i] * x[i]).sum();
        !(lo..=hi).contains(&mass)
    });
    let failures = fails.iter().filter(|f| **f).count();
    let frequency = failures as f64 / trials as f64;
    let bound = (n as f64).powi(-3);
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(SubsetReport {
        d,
        n,
        epsilon,
        k,
        t,
        trials,
        seed: Seed(seed),
        failures,
        frequency,
        bound,
        pass: frequency <= bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_subset_never_fails() {
        let r = subset_concentration_with_k(64, 64, 10, 0.01, 2.25, 50, 3).unwrap();
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn oversized_subset_rejected() {
        assert!(subset_concentration_experiment(16, 100, 0.5, 8.0, 2.25, 10, 0).is_err());
    }

    #[test]
    fn wider_tolerance_fails_no_more_often() {
        let tight = subset_concentration_with_k(128, 20, 10, 0.2, 1.0, 200, 5).unwrap();
        let loose = subset_concentration_with_k(128, 20, 10, 0.99, 1.0, 200, 5).unwrap();
        assert!(loose.failures <= tight.failures);
    }
}
