//! Wall-clock timing of [`apply`](crate::fjlt::apply).
//!
//! Timings are medians over repetitions after one discarded warmup. Inputs
//! are regenerated between repetitions, outside the timed region. Run
//! benchmarks on an otherwise idle machine; they are single threaded.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fjlt::{apply, derive_params, Algorithm, ConstantsConfig, TransformSpec};
use crate::rng::{SeedStream, LANE_BENCH};
use crate::verify::gaussian_baseline;

pub const MIN_REPS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub d: usize,
    pub n: u64,
    pub epsilon: f64,
    pub algorithm: String,
    pub median_apply_ns: u64,
    pub reps: usize,
    pub k_out: usize,
}

fn random_unit(rng: &mut SeedStream, buf: &mut [f64]) {
    for v in buf.iter_mut() {
        *v = rng.unit() - 0.5;
    }
    let norm = buf.iter().map(|v| v * v).sum::<f64>().sqrt();
    buf.iter_mut().for_each(|v| *v /= norm);
}

fn median_ns(mut samples: Vec<u64>) -> u64 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::Parameter(format!("need at least {MIN_REPS} reps, got {reps}")));
    }
    Ok(())
}

/// Median time of one `apply` on a random unit vector.
pub fn time_apply(spec: &TransformSpec, reps: usize, seed: u64) -> Result<BenchRecord> {
    check_reps(reps)?;
    let mut rng = SeedStream::new(seed, LANE_BENCH);
    let mut buf = vec![0.0; spec.d];
    let mut samples = Vec::with_capacity(reps);
    for rep in 0..=reps {
        random_unit(&mut rng, &mut buf);
        let start = Instant::now();
        let out = apply(spec, &mut buf)?;
        std::hint::black_box(out);
        let ns = start.elapsed().as_nanos() as u64;
        if rep > 0 {
            samples.push(ns);
        }
    }
    Ok(BenchRecord {
        d: spec.d,
        n: spec.n,
        epsilon: spec.epsilon,
        algorithm: spec.algorithm.to_string(),
        median_apply_ns: median_ns(samples),
        reps,
        k_out: spec.k_out,
    })
}

/// Median time of a dense `k × d` Gaussian matrix-vector product.
pub fn time_gaussian(d: usize, k: usize, reps: usize, seed: u64) -> Result<u64> {
    check_reps(reps)?;
    let a = gaussian_baseline(d, k, seed)?;
    let mut rng = SeedStream::new(seed, LANE_BENCH);
    let mut x = DVector::zeros(d);
    let mut y = DVector::zeros(k);
    let mut samples = Vec::with_capacity(reps);
    for rep in 0..=reps {
        random_unit(&mut rng, x.as_mut_slice());
        let start = Instant::now();
        y.gemv(1.0, &a, &x, 0.0);
        std::hint::black_box(&y);
        let ns = start.elapsed().as_nanos() as u64;
        if rep > 0 {
            samples.push(ns);
        }
    }
    Ok(median_ns(samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: usize,
    pub algorithm: String,
    pub n: u64,
    pub epsilon: f64,
    pub k_out: usize,
    pub median_apply_ns: u64,
    /// `median_apply_ns / (d ln d)`.
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Max over min of `normalized`, transform rows only.
    pub normalized_spread: f64,
    pub within_2x: bool,
}

impl ScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,algorithm,n,epsilon,k_out,median_apply_ns,normalized\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6e}\n",
                r.d, r.algorithm, r.n, r.epsilon, r.k_out, r.median_apply_ns, r.normalized
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingOptions {
    pub reps: usize,
    /// Also time a dense Gaussian map of the same output size.
    pub gaussian: bool,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            reps: MIN_REPS,
            gaussian: false,
        }
    }
}

/// Time the transform for each `d` in `d_list` (ascending) at fixed `(n, ε)`.
#[allow(clippy::too_many_arguments)]
pub fn scaling_experiment(
    d_list: &[usize],
    n: u64,
    epsilon: f64,
    algorithm: Algorithm,
    constants: &ConstantsConfig,
    seed: u64,
    opts: ScalingOptions,
) -> Result<ScalingReport> {
    if d_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("d list must be strictly ascending".into()));
    }
    let mut rows = Vec::new();
    for &d in d_list {
        let spec = derive_params(d, n, epsilon, algorithm, constants, seed)?;
        let rec = time_apply(&spec, opts.reps, seed)?;
        let dlogd = d as f64 * (d as f64).ln();
        rows.push(ScalingRow {
            d,
            algorithm: rec.algorithm,
            n,
            epsilon,
            k_out: spec.k_out,
            median_apply_ns: rec.median_apply_ns,
            normalized: rec.median_apply_ns as f64 / dlogd,
        });
        if opts.gaussian {
            let k = spec.k_out.min(d);
            let ns = time_gaussian(d, k, opts.reps, seed)?;
            rows.push(ScalingRow {
                d,
                algorithm: "gaussian".into(),
                n,
                epsilon,
                k_out: k,
                median_apply_ns: ns,
                normalized: ns as f64 / dlogd,
            });
        }
    }
    let norm: Vec<f64> = rows
        .iter()
        .filter(|r| r.algorithm != "gaussian")
        .map(|r| r.normalized)
        .collect();
    let hi = norm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = norm.iter().cloned().fold(f64::INFINITY, f64::min);
    let normalized_spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    Ok(ScalingReport {
        rows,
        normalized_spread,
        within_2x: normalized_spread <= 2.0,
    })
}
