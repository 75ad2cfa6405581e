//! Lazy random-transposition walk on the symmetric group `S_d`, measured by
//! plug-in total variation distance to uniform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Seed, SeedStream};

const MAX_D: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermTvReport {
    pub d: usize,
    pub t: u64,
    pub trials: u64,
    pub seed: Seed,
    /// `½ Σ_σ |p̂(σ) − 1/d!|`.
    pub tv: f64,
    /// `½ Σ_σ √(p̂(σ)(1 − p̂(σ))/trials)`, a conservative spread.
    pub sigma: f64,
    /// `√(d!/trials)`: the scale of the upward bias of the plug-in estimate.
    pub bias_scale: f64,
    /// The bound shape evaluated with constant `c`.
    pub bound: f64,
    pub c: f64,
    /// `trials ≥ 100 d!`.
    pub enough_trials: bool,
}

fn factorial(d: usize) -> usize {
    (1..=d).product()
}

/// `c (√d e^{−T/(6d)} + √(d!) ((√5 − 1)/2)^{T/2})`.
pub fn perm_mixing_bound(d: usize, t: u64, c: f64) -> f64 {
    let (df, tf) = (d as f64, t as f64);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    c * (df.sqrt() * (-tf / (6.0 * df)).exp()
        + (factorial(d) as f64).sqrt() * golden.powf(tf / 2.0))
}

/// Position of `perm` in lexicographic order.
fn lehmer_rank(perm: &[u8]) -> usize {
    let d = perm.len();
    let mut rank = 0;
    for i in 0..d {
        let smaller = perm[i + 1..].iter().filter(|&&p| p < perm[i]).count();
        rank = rank * (d - i) + smaller;
    }
    rank
}

fn sample(d: usize, t: u64, seed: u64, trial: u64) -> usize {
    let mut rng = SeedStream::trial(seed, trial);
    let mut perm = [0u8; MAX_D];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i as u8;
    }
    for _ in 0..t {
        let i = rng.index(d);
        let mut j = rng.index(d - 1);
        if j >= i {
            j += 1;
        }
        if rng.next_u32() & 1 == 1 {
            perm.swap(i, j);
        }
    }
    lehmer_rank(&perm[..d])
}

/// Run `trials` independent walks of `t` steps (each a transposition applied
/// with probability ½) from the identity and compare with uniform.
pub fn perm_mixing_tv(d: usize, t: u64, trials: u64, seed: u64, c: f64) -> Result<PermTvReport> {
    if !(2..=MAX_D).contains(&d) {
        return Err(Error::Parameter(format!("permutation TV needs 2 <= d <= {MAX_D}, got {d}")));
    }
    if trials == 0 {
        return Err(Error::Parameter("need trials >= 1".into()));
    }
    let states = factorial(d);
    // Integer counts: the sum is the same in any order.
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; states],
            |mut acc, trial| {
                acc[sample(d, t, seed, trial)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; states],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = trials as f64;
    let u = 1.0 / states as f64;
    let (mut tv, mut sigma) = (0.0, 0.0);
    for &k in &counts {
        let p = k as f64 / n;
        tv += (p - u).abs();
        sigma += (p * (1.0 - p) / n).sqrt();
    }
    Ok(PermTvReport {
        d,
        t,
        trials,
        seed: Seed(seed),
        tv: 0.5 * tv,
        sigma: 0.5 * sigma,
        bias_scale: (states as f64 / n).sqrt(),
        bound: perm_mixing_bound(d, t, c),
        c,
        enough_trials: trials >= 100 * states as u64,
    })
}
