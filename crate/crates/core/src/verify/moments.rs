//! Even-moment statistics of the averaging walk and its sup-norm.

use serde::{Deserialize, Serialize};

use super::{mean_and_se, run_trials};
use crate::error::{Error, Result};
use crate::rng::{trial_seed, Seed, SeedStream};
use crate::walk::{apply_event, sample_event, walk_apply, WalkKind, WalkSpec};

/// Relative allowance for accumulated round-off when comparing an estimate
/// with an analytic bound (the walk preserves norms only to a few ulps).
pub const ROUNDOFF: f64 = 1e-12;

/// `S_k(x) = Σ x_i^{2k} / (2k)!`.
pub fn s_k(x: &[f64], k: u32) -> f64 {
    if k <= 10 {
        let fact: f64 = (1..=2 * k).map(f64::from).product();
        x.iter().map(|v| v.powi(2 * k as i32)).sum::<f64>() / fact
    } else {
        let log_fact = libm::lgamma(2.0 * k as f64 + 1.0);
        x.iter()
            .filter(|v| **v != 0.0)
            .map(|v| (2.0 * k as f64 * v.abs().ln() - log_fact).exp())
            .sum()
    }
}

/// `2^{p−2} d^{1−p} / p!`.
pub fn moment_bound(d: usize, p: u32) -> f64 {
    let p_f = p as f64;
    ((p_f - 2.0) * std::f64::consts::LN_2 + (1.0 - p_f) * (d as f64).ln()
        - libm::lgamma(p_f + 1.0))
    .exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub d: usize,
    pub p: u32,
    pub t: u64,
    pub trials: usize,
    pub seed: Seed,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    /// False when `d < 25`, below the range the bound is stated for.
    pub hypothesis_ok: bool,
    pub pass: bool,
}

/// Run the averaging walk for `⌈c_moment p d ln d⌉` steps from `e₁` and
/// estimate `E[S_p]`.
pub fn moment_experiment(
    d: usize,
    p: u32,
    c_moment: f64,
    trials: usize,
    seed: u64,
) -> Result<MomentStats> {
    if p == 0 || p as usize > d {
        return Err(Error::Parameter(format!("need 1 <= p <= d, got p = {p}, d = {d}")));
    }
    if d < 2 || trials == 0 || !(c_moment > 0.0) {
        return Err(Error::Parameter("need d >= 2, trials >= 1, c_moment > 0".into()));
    }
    let df = d as f64;
    let t = (c_moment * p as f64 * df * df.ln()).ceil() as u64;
    let values = run_trials(trials, |trial| {
        let mut x = vec![0.0; d];
        x[0] = 1.0;
        let spec = WalkSpec {
            kind: WalkKind::Ora,
            d,
            steps: t,
            seed: Seed(trial_seed(seed, trial)),
        };
        walk_apply(&mut x, &spec).expect("valid walk");
        s_k(&x, p)
    });
    let (estimate, std_error) = mean_and_se(&values);
    let bound = moment_bound(d, p);
    Ok(MomentStats {
        d,
        p,
        t,
        trials,
        seed: Seed(seed),
        estimate,
        std_error,
        bound,
        hypothesis_ok: d >= 25,
        pass: estimate <= bound * (1.0 + ROUNDOFF) + 3.0 * std_error,
    })
}

/// Upper bound on `E[S_k(Rx)]` after one averaging step:
/// `(1 − 2/d) S_k(x) + 2^{1−k}/(d(d−1)) Σ_{a=0}^{k} S_a(x) S_{k−a}(x)`.
pub fn moment_step_bound(x: &[f64], k: u32) -> f64 {
    let d = x.len() as f64;
    let cross: f64 = (0..=k).map(|a| s_k(x, a) * s_k(x, k - a)).sum();
    (1.0 - 2.0 / d) * s_k(x, k) + 2f64.powi(1 - k as i32) / (d * (d - 1.0)) * cross
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStepReport {
    pub d: usize,
    pub k: u32,
    pub trials: usize,
    pub seed: Seed,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Monte Carlo `E[S_k(Rx)]` for a single averaging step `R`.
pub fn moment_step_check(x: &[f64], k: u32, trials: usize, seed: u64) -> Result<MomentStepReport> {
    let d = x.len();
    if d < 2 || trials == 0 {
        return Err(Error::Parameter("need d >= 2 and trials >= 1".into()));
    }
    let values = run_trials(trials, |trial| {
        let mut rng = SeedStream::trial(seed, trial);
        let e = sample_event(&mut rng, WalkKind::Ora, d).expect("d >= 2");
        let mut y = x.to_vec();
        apply_event(&mut y, &e, WalkKind::Ora).expect("sampled plane is valid");
        s_k(&y, k)
    });
    let (estimate, std_error) = mean_and_se(&values);
    let bound = moment_step_bound(x, k);
    Ok(MomentStepReport {
        d,
        k,
        trials,
        seed: Seed(seed),
        estimate,
        std_error,
        bound,
        pass: estimate <= bound * (1.0 + ROUNDOFF) + 3.0 * std_error,
    })
}

/// `10 √(ln d / d)`.
pub fn max_coord_threshold(d: usize) -> f64 {
    let d = d as f64;
    10.0 * (d.ln() / d).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCoordReport {
    pub d: usize,
    pub t: u64,
    pub trials: usize,
    pub seed: Seed,
    pub threshold: f64,
    /// The threshold exceeds 1, so no unit vector can violate it.
    pub vacuous: bool,
    pub violations: usize,
    pub frequency: f64,
    /// `d^{-2}`.
    pub bound: f64,
    pub pass: bool,
}

/// Frequency of `‖Q_t e₁‖∞ ≥ 10 √(ln d / d)` under the averaging walk, with
/// `t = ⌈c_maxcoord d ln d lnln d⌉` unless `steps` overrides it.
pub fn max_coord_experiment(
    d: usize,
    c_maxcoord: f64,
    trials: usize,
    seed: u64,
    steps: Option<u64>,
) -> Result<MaxCoordReport> {
    if d < 2 || trials == 0 || !(c_maxcoord > 0.0) {
        return Err(Error::Parameter("need d >= 2, trials >= 1, c_maxcoord > 0".into()));
    }
    let df = d as f64;
    let t = steps.unwrap_or_else(|| {
        (c_maxcoord * df * df.ln() * df.ln().ln().max(1.0)).ceil() as u64
    });
    let threshold = max_coord_threshold(d);
    let hits = run_trials(trials, |trial| {
        let mut x = vec![0.0; d];
        x[0] = 1.0;
        let spec = WalkSpec {
            kind: WalkKind::Ora,
            d,
            steps: t,
            seed: Seed(trial_seed(seed, trial)),
        };
        walk_apply(&mut x, &spec).expect("valid walk");
        x.iter().fold(0.0f64, |m, v| m.max(v.abs())) >= threshold
    });
    let violations = hits.iter().filter(|h| **h).count();
    let frequency = violations as f64 / trials as f64;
    let bound = 1.0 / (df * df);
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(MaxCoordReport {
        d,
        t,
        trials,
        seed: Seed(seed),
        threshold,
        vacuous: threshold > 1.0,
        violations,
        frequency,
        bound,
        pass: frequency <= bound + slack,
    })
}
