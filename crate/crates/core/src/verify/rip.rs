//! Exact restricted isometry constants by enumerating supports.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{median, run_trials};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, trial_seed, Seed};
use crate::sketch::select_bernoulli;
use crate::walk::{walk_matrix, WalkKind, WalkSpec};

/// Largest number of supports `delta_s_exact` will enumerate.
pub const ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    ExactEnumeration,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub s: usize,
    pub m: usize,
    pub d: usize,
    pub supports: u64,
    /// Smallest eigenvalue of any `s × s` restricted Gram matrix.
    pub lambda_min: f64,
    /// Largest eigenvalue of any `s × s` restricted Gram matrix.
    pub lambda_max: f64,
    /// `max(λ_max − 1, 1 − λ_min)`.
    pub delta_s: f64,
    pub method: RipMethod,
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Extreme eigenvalues of a symmetric matrix. Closed forms for sizes 1 and 2.
fn extreme_eigenvalues(g: &DMatrix<f64>) -> (f64, f64) {
    match g.nrows() {
        1 => (g[(0, 0)], g[(0, 0)]),
        2 => {
            let (a, b, c) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            let mid = 0.5 * (a + c);
            let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            (mid - rad, mid + rad)
        }
        _ => {
            let ev = SymmetricEigen::new(g.clone()).eigenvalues;
            ev.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
        }
    }
}

/// `δ_s(A)`: the worst deviation of `‖Ax‖²` from 1 over unit `s`-sparse `x`,
/// computed from the eigenvalues of every `s × s` column Gram block.
pub fn delta_s_exact(a: &DMatrix<f64>, s: usize) -> Result<RipReport> {
    let (m, d) = a.shape();
    if s == 0 || s > d {
        return Err(Error::Parameter(format!("sparsity s = {s} must be in 1..={d}")));
    }
    let supports = binomial(d, s).filter(|&c| c <= ENUMERATION_CAP).ok_or_else(|| {
        Error::CapExceeded(format!(
            "C({d}, {s}) supports exceeds {ENUMERATION_CAP}; reduce d or s"
        ))
    })?;
    let gram = a.transpose() * a;
    let mut block = DMatrix::zeros(s, s);
    let mut idx: Vec<usize> = (0..s).collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    loop {
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                block[(r, c)] = gram[(i, j)];
            }
        }
        let (l, h) = extreme_eigenvalues(&block);
        lo = lo.min(l);
        hi = hi.max(h);

        // Next combination in lexicographic order.
        let Some(p) = (0..s).rev().find(|&p| idx[p] < d - s + p) else {
            break;
        };
        idx[p] += 1;
        for q in p + 1..s {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(RipReport {
        s,
        m,
        d,
        supports,
        lambda_min: lo,
        lambda_max: hi,
        delta_s: (hi - 1.0).max(1.0 - lo),
        method: RipMethod::ExactEnumeration,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirksenRow {
    /// Target row count; rows are kept independently with probability `m/d`.
    pub m: usize,
    pub median_delta_s: f64,
    pub median_rows_kept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirksenReport {
    pub d: usize,
    pub s: usize,
    pub t: u64,
    pub trials: usize,
    pub seed: Seed,
    /// Median over trials of `√d · max |U_ij|`.
    pub median_coherence: f64,
    pub rows: Vec<DirksenRow>,
    /// Median `δ_s` is non-increasing along the (ascending) `m` grid.
    pub monotone: bool,
}

impl DirksenReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,median_delta_s,median_rows_kept\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                r.m, r.median_delta_s, r.median_rows_kept
            ));
        }
        out
    }
}

/// Subsample rows of a dense uniform-walk matrix `U` (`d ≤ 64`), rescale by
/// `√(d/m)`, and measure `δ_s` across the `m` grid. The walk length defaults
/// to `⌈12 d ln d⌉`.
pub fn dirksen_subsample_check(
    d: usize,
    s: usize,
    m_grid: &[usize],
    trials: usize,
    seed: u64,
    steps: Option<u64>,
) -> Result<DirksenReport> {
    if d < 2 || trials == 0 {
        return Err(Error::Parameter("need d >= 2 and trials >= 1".into()));
    }
    if m_grid.is_empty() || m_grid.iter().any(|&m| m == 0 || m > d) {
        return Err(Error::Parameter(format!("row targets must lie in 1..={d}")));
    }
    if m_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("row targets must be strictly ascending".into()));
    }
    binomial(d, s)
        .filter(|&c| s >= 1 && s <= d && c <= ENUMERATION_CAP)
        .ok_or_else(|| Error::CapExceeded(format!("cannot enumerate C({d}, {s})")))?;
    let df = d as f64;
    let t = steps.unwrap_or((12.0 * df * df.ln()).ceil() as u64);

    let per_trial: Vec<Result<(f64, Vec<(f64, usize)>)>> = run_trials(trials, |trial| {
        let ts = trial_seed(seed, trial);
        let u = walk_matrix(&WalkSpec {
            kind: WalkKind::Uniform,
            d,
            steps: t,
            seed: Seed(ts),
        })?;
        let coherence = df.sqrt() * u.amax();
        let mut cells = Vec::with_capacity(m_grid.len());
        for (g, &m) in m_grid.iter().enumerate() {
            let sel = select_bernoulli(d, m as f64 / df, derive_seed(ts, g as u64 + 1))?;
            let rows: Vec<usize> = sel.indices();
            let scale = (df / m as f64).sqrt();
            let sub = DMatrix::from_fn(rows.len(), d, |r, c| scale * u[(rows[r], c)]);
            cells.push((delta_s_exact(&sub, s)?.delta_s, rows.len()));
        }
        Ok((coherence, cells))
    });
    let per_trial: Vec<(f64, Vec<(f64, usize)>)> = per_trial.into_iter().collect::<Result<_>>()?;

    let coherences: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let rows: Vec<DirksenRow> = m_grid
        .iter()
        .enumerate()
        .map(|(g, &m)| {
            let deltas: Vec<f64> = per_trial.iter().map(|p| p.1[g].0).collect();
            let kept: Vec<f64> = per_trial.iter().map(|p| p.1[g].1 as f64).collect();
            DirksenRow {
                m,
                median_delta_s: median(&deltas),
                median_rows_kept: median(&kept),
            }
        })
        .collect();
    let monotone = rows
        .windows(2)
        .all(|w| w[1].median_delta_s <= w[0].median_delta_s);
    Ok(DirksenReport {
        d,
        s,
        t,
        trials,
        seed: Seed(seed),
        median_coherence: median(&coherences),
        rows,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_exact() {
        let r = delta_s_exact(&DMatrix::identity(6, 6), 3).unwrap();
        assert_eq!(r.delta_s, 0.0);
        assert_eq!(r.supports, 20);
    }

    #[test]
    fn scaled_identity() {
        let a = DMatrix::identity(2, 2) * 2f64.sqrt();
        let r = delta_s_exact(&a, 1).unwrap();
        assert!((r.delta_s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rows_give_delta_one() {
        let a = DMatrix::<f64>::zeros(0, 5);
        assert_eq!(delta_s_exact(&a, 2).unwrap().delta_s, 1.0);
    }

    #[test]
    fn cap_and_range() {
        let a = DMatrix::<f64>::identity(60, 60);
        assert!(matches!(delta_s_exact(&a, 10), Err(Error::CapExceeded(_))));
        assert!(delta_s_exact(&a, 0).is_err());
        assert!(delta_s_exact(&a, 61).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 2), Some(120));
        assert_eq!(binomial(10, 0), Some(1));
        assert_eq!(binomial(60, 10), Some(75_394_027_566));
    }

    #[test]
    fn identity_walk_has_full_coherence() {
        let r = dirksen_subsample_check(8, 2, &[8], 3, 0, Some(0)).unwrap();
        assert!((r.median_coherence - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.rows[0].median_delta_s, 0.0);
    }
}
