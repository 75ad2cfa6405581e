//! Proportional coupling of two uniform Kac walks.
//!
//! Both copies rotate the same coordinate plane. `X` turns by a fresh uniform
//! angle; `Y` is then placed in that plane at the polar angle `X` ended up
//! at, keeping its own radius. The squared-coordinate gap
//! `D = Σ (X_i² − Y_i²)²` shrinks in expectation by exactly
//! `1 − 1/(2d) − 3/(2d(d−1))` per step.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{mean_and_se, run_trials};
use crate::error::{Error, Result};
use crate::rng::{Seed, SeedStream};
use crate::walk::{sample_event, WalkKind};

/// Below this radius the matching angle is arbitrary and drawn uniformly.
const DEGENERATE_RADIUS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CoupledPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Dimension(format!(
                "coupled pair needs equal lengths >= 2, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        for v in [&x, &y] {
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Parameter(format!("coupled vector has norm {norm}")));
            }
        }
        Ok(CoupledPair { x, y })
    }

    /// `e_a` and `e_b` in `R^d`.
    pub fn basis(d: usize, a: usize, b: usize) -> Result<Self> {
        if a >= d || b >= d {
            return Err(Error::Dimension(format!("basis index out of range for d = {d}")));
        }
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; d];
        x[a] = 1.0;
        y[b] = 1.0;
        CoupledPair::new(x, y)
    }

    pub fn gap(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| (a * a - b * b).powi(2))
            .sum()
    }
}

/// One coupled step.
pub fn coupling_step(pair: &mut CoupledPair, rng: &mut SeedStream) {
    let d = pair.x.len();
    let e = sample_event(rng, WalkKind::Uniform, d).expect("pair has d >= 2");
    let (i, j) = (e.i, e.j);
    let (s, c) = libm::sincos(e.theta.expect("uniform walk carries an angle"));
    let (a, b) = (pair.x[i], pair.x[j]);
    let (xi, xj) = (a * c - b * s, a * s + b * c);
    pair.x[i] = xi;
    pair.x[j] = xj;
    if (pair.y[i], pair.y[j]) == (a, b) {
        // Same radius, same angle: skip the polar round trip.
        pair.y[i] = xi;
        pair.y[j] = xj;
        return;
    }

    let phi = if libm::hypot(xi, xj) < DEGENERATE_RADIUS {
        TAU * rng.unit()
    } else {
        libm::atan2(xj, xi)
    };
    let r_y = libm::hypot(pair.y[i], pair.y[j]);
    let (sp, cp) = libm::sincos(phi);
    pair.y[i] = r_y * cp;
    pair.y[j] = r_y * sp;
}

/// Exact expected one-step shrink factor of the gap.
pub fn contraction_factor(d: usize) -> f64 {
    let d = d as f64;
    1.0 - 1.0 / (2.0 * d) - 3.0 / (2.0 * d * (d - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionPoint {
    pub t: u64,
    pub mean_gap: f64,
    pub std_error: f64,
    /// `2 e^{−t/(2d)}`.
    pub envelope: f64,
    /// `2 f^t` with `f` the exact factor.
    pub exact: f64,
    pub within_envelope: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub d: usize,
    pub t_max: u64,
    pub trials: usize,
    pub seed: Seed,
    pub factor_exact: f64,
    /// `D_1 / D_0` with `D_0 = 2` known exactly.
    pub one_step_ratio: f64,
    pub one_step_std_error: f64,
    pub factor_within_3se: bool,
    pub envelope_ok: bool,
    pub pass: bool,
    pub series: Vec<ContractionPoint>,
}

impl ContractionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mean_gap,std_error,envelope,exact,within_envelope\n");
        for p in &self.series {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                p.t, p.mean_gap, p.std_error, p.envelope, p.exact, p.within_envelope
            ));
        }
        out
    }
}

/// Couple walks from `X₀ = e₁`, `Y₀ = e₂` and track the mean gap for
/// `t = 0..=t_max`.
pub fn contraction_experiment(
    d: usize,
    t_max: u64,
    trials: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if d < 3 {
        return Err(Error::Parameter(format!("contraction needs d >= 3, got {d}")));
    }
    if trials < 100 {
        return Err(Error::Parameter(format!("need at least 100 trials, got {trials}")));
    }
    let t_max = t_max.max(1);
    let gaps: Vec<Vec<f64>> = run_trials(trials, |trial| {
        let mut rng = SeedStream::trial(seed, trial);
        let mut pair = CoupledPair::basis(d, 0, 1).expect("d >= 3");
        let mut g = Vec::with_capacity(t_max as usize + 1);
        g.push(pair.gap());
        for _ in 0..t_max {
            coupling_step(&mut pair, &mut rng);
            g.push(pair.gap());
        }
        g
    });

    let factor = contraction_factor(d);
    let mut series = Vec::with_capacity(t_max as usize + 1);
    let mut column = vec![0.0; trials];
    for t in 0..=t_max {
        for (c, g) in column.iter_mut().zip(&gaps) {
            *c = g[t as usize];
        }
        let (mean_gap, std_error) = mean_and_se(&column);
        let envelope = 2.0 * (-(t as f64) / (2.0 * d as f64)).exp();
        series.push(ContractionPoint {
            t,
            mean_gap,
            std_error,
            envelope,
            exact: 2.0 * factor.powf(t as f64),
            within_envelope: mean_gap <= envelope + 3.0 * std_error,
        });
    }
    let one_step_ratio = series[1].mean_gap / 2.0;
    let one_step_std_error = series[1].std_error / 2.0;
    let factor_within_3se = (one_step_ratio - factor).abs() <= 3.0 * one_step_std_error;
    let envelope_ok = series.iter().all(|p| p.within_envelope);
    Ok(ContractionReport {
        d,
        t_max,
        trials,
        seed: Seed(seed),
        factor_exact: factor,
        one_step_ratio,
        one_step_std_error,
        factor_within_3se,
        envelope_ok,
        pass: factor_within_3se && envelope_ok,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_inputs_stay_equal() {
        let x = vec![0.6, 0.8, 0.0, 0.0];
        let mut pair = CoupledPair::new(x.clone(), x).unwrap();
        let mut rng = SeedStream::new(5, 0);
        for _ in 0..1000 {
            coupling_step(&mut pair, &mut rng);
            assert_eq!(pair.gap(), 0.0);
        }
        assert_eq!(pair.x, pair.y);
    }

    #[test]
    fn two_dimensions_couple_in_one_step() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut pair = CoupledPair::new(vec![1.0, 0.0], vec![s, -s]).unwrap();
        let mut rng = SeedStream::new(9, 0);
        coupling_step(&mut pair, &mut rng);
        assert!((pair.x[0] - pair.y[0]).abs() < 1e-15);
        assert!((pair.x[1] - pair.y[1]).abs() < 1e-15);
    }

    #[test]
    fn norms_hold_over_many_steps() {
        let mut pair = CoupledPair::basis(7, 0, 3).unwrap();
        let mut rng = SeedStream::new(1, 0);
        for _ in 0..10_000 {
            coupling_step(&mut pair, &mut rng);
        }
        for v in [&pair.x, &pair.y] {
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn initial_gap_is_two() {
        assert_eq!(CoupledPair::basis(5, 0, 1).unwrap().gap(), 2.0);
    }

    #[test]
    fn factor_arithmetic() {
        assert!((contraction_factor(10) - (1.0 - 0.05 - 3.0 / 180.0)).abs() < 1e-15);
        assert!((contraction_factor(10) - 0.933333).abs() < 1e-6);
    }

    #[test]
    fn rejects_small_inputs() {
        assert!(contraction_experiment(2, 5, 200, 0).is_err());
        assert!(contraction_experiment(5, 5, 99, 0).is_err());
    }
}
