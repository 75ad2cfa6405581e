//! Two-sample test that a symmetric walk's output law is invariant under a
//! random signed permutation with determinant one.

use serde::{Deserialize, Serialize};

use super::run_trials;
use crate::error::{Error, Result};
use crate::rng::{trial_seed, Seed, SeedStream, LANE_SELECT};
use crate::sketch::diag_sign_apply;
use crate::walk::{walk_apply, WalkKind, WalkSpec};

/// Label shuffles per permutation test.
pub const PERMUTATIONS: usize = 999;

const STATISTICS: [&str; 3] = ["x0_squared", "x0_fourth", "max_abs"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticResult {
    pub name: String,
    pub mean_walk: f64,
    pub mean_symmetrized: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub d: usize,
    pub t: u64,
    pub kind: WalkKind,
    /// Samples per side.
    pub trials: usize,
    pub permutations: usize,
    pub seed: Seed,
    pub statistics: Vec<StatisticResult>,
    pub min_p_value: f64,
    /// Every p-value exceeds 0.01.
    pub indistinguishable: bool,
}

fn stats_of(v: &[f64]) -> [f64; 3] {
    let x2 = v[0] * v[0];
    [x2, x2 * x2, v.iter().fold(0.0f64, |m, a| m.max(a.abs()))]
}

fn walk_e1(d: usize, t: u64, kind: WalkKind, seed: u64, signed: bool) -> Vec<f64> {
    let mut x = vec![0.0; d];
    x[0] = 1.0;
    if signed {
        diag_sign_apply(&mut x, true, seed);
    }
    let spec = WalkSpec {
        kind,
        d,
        steps: t,
        seed: Seed(seed),
    };
    walk_apply(&mut x, &spec).expect("valid walk");
    x
}

/// `v ↦ Σv` for a uniform signed permutation `Σ` with `det Σ = +1`.
fn signed_permutation(v: &[f64], seed: u64) -> Vec<f64> {
    let d = v.len();
    let mut rng = SeedStream::new(seed, LANE_SELECT);
    let mut perm: Vec<usize> = (0..d).collect();
    let mut parity = 1.0;
    for i in (1..d).rev() {
        let j = rng.index(i + 1);
        if j != i {
            perm.swap(i, j);
            parity = -parity;
        }
    }
    let mut out = vec![0.0; d];
    let mut product = 1.0;
    for c in 0..d {
        let s = if c + 1 == d { parity * product } else { rng.sign() };
        product *= s;
        out[perm[c]] = s * v[c];
    }
    out
}

/// Compare `Q_T e₁` against `Σ Q_T D_ξ e₁` on three statistics.
pub fn sign_symmetry_test(
    d: usize,
    t: u64,
    kind: WalkKind,
    trials: usize,
    seed: u64,
) -> Result<SymmetryReport> {
    if !kind.is_symmetric() {
        return Err(Error::NotSymmetric(kind));
    }
    if d < 2 || trials < 2 {
        return Err(Error::Parameter("need d >= 2 and trials >= 2".into()));
    }
    let samples: Vec<([f64; 3], [f64; 3])> = run_trials(trials, |trial| {
        let a = walk_e1(d, t, kind, trial_seed(seed, 2 * trial), false);
        let bs = trial_seed(seed, 2 * trial + 1);
        let b = signed_permutation(&walk_e1(d, t, kind, bs, true), bs);
        (stats_of(&a), stats_of(&b))
    });

    let n = trials;
    let pooled: Vec<[f64; 3]> = samples
        .iter()
        .map(|s| s.0)
        .chain(samples.iter().map(|s| s.1))
        .collect();
    let diff = |labels: &[bool], k: usize| {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (v, &first) in pooled.iter().zip(labels) {
            if first {
                sa += v[k];
            } else {
                sb += v[k];
            }
        }
        (sa / n as f64 - sb / n as f64).abs()
    };
    let mut labels: Vec<bool> = (0..2 * n).map(|i| i < n).collect();
    let observed: Vec<f64> = (0..3).map(|k| diff(&labels, k)).collect();
    let mut at_least = [0usize; 3];
    let mut rng = SeedStream::new(seed, LANE_SELECT);
    for _ in 0..PERMUTATIONS {
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.index(i + 1));
        }
        for k in 0..3 {
            if diff(&labels, k) >= observed[k] {
                at_least[k] += 1;
            }
        }
    }

    let statistics: Vec<StatisticResult> = (0..3)
        .map(|k| StatisticResult {
            name: STATISTICS[k].into(),
            mean_walk: samples.iter().map(|s| s.0[k]).sum::<f64>() / n as f64,
            mean_symmetrized: samples.iter().map(|s| s.1[k]).sum::<f64>() / n as f64,
            p_value: (1 + at_least[k]) as f64 / (1 + PERMUTATIONS) as f64,
        })
        .collect();
    let min_p_value = statistics.iter().fold(1.0f64, |m, s| m.min(s.p_value));
    Ok(SymmetryReport {
        d,
        t,
        kind,
        trials,
        permutations: PERMUTATIONS,
        seed: Seed(seed),
        statistics,
        min_p_value,
        indistinguishable: min_p_value > 0.01,
    })
}
