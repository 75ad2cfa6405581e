//! Two-stage fast Johnson–Lindenstrauss transforms built from Kac-type walks.
//!
//! A transform `Ψ = Ψ₂ ∘ Ψ₁` maps `R^d → R^k_out`:
//!
//! 1. stage 1 runs a walk of `t1` steps in `R^d`, keeps a random set of
//!    `K1_realized` coordinates and rescales by `√(d / K1_realized)`;
//! 2. stage 2 runs an independent walk of `t2` steps in `R^K1_realized`,
//!    keeps `k_out` coordinates and rescales by `√(K1_realized / k_out)`.
//!
//! | algorithm  | walk     | stage-1 selection       | stage-2 selection          | signs |
//! |------------|----------|-------------------------|----------------------------|-------|
//! | `Kac`      | uniform  | prefix of Binom(d, K1/d) | prefix of Binom(K1, K2/K1) | no    |
//! | `Ora`      | ORA      | Bernoulli(K1/d)          | uniform K2-subset          | yes   |
//! | `Sora`     | S-ORA    | prefix of Binom(d, K1/d) | prefix of K2               | no    |
//! | `Identity` | none     | everything               | everything                 | no    |
//!
//! with (natural logarithms, `loglog` clamped below at 1)
//!
//! * `K1 = min(d, ⌈c_k1 ε⁻² log n (loglog n)² (log d)³⌉)`
//! * `K2 = ⌈c_k2 ε⁻² log n⌉`, clamped to the realized K1
//! * Kac: `t1 = ⌈c_t1_kac d log d⌉`, `t2 = ⌈c_t2_kac K1 log n⌉`
//! * ORA / S-ORA: `t1 = ⌈c_maxcoord d log d loglog d⌉`,
//!   `t2 = ⌈c_t2_ora K1 log n log d⌉`
//!
//! and the identity map whenever `ε⁻² log n ≥ d`.
//!
//! [`apply`] works in the caller's buffer and performs no heap allocation:
//! walks and selections are regenerated from their seeds as they are used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::{Seed, SeedStream, LANE_PARAMS};
use crate::sketch::{binom_draw, select_bernoulli, select_fixed, CoordinateSelection, Signs};
use crate::walk::{walk_apply_lanes, WalkKind, WalkSpec};

/// Multipliers in the parameter formulas. Only `c_t1_kac = 12` and
/// `c_moment = 2.25` come with a guarantee; the rest are desk-scale
/// empirical defaults and may be overridden.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantsConfig {
    pub c_k1: f64,
    pub c_k2: f64,
    pub c_t1_kac: f64,
    pub c_t2_kac: f64,
    pub c_moment: f64,
    pub c_maxcoord: f64,
    pub c_t2_ora: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            c_k1: 1.0,
            c_k2: 8.0,
            c_t1_kac: 12.0,
            c_t2_kac: 12.0,
            c_moment: 2.25,
            c_maxcoord: 4.0,
            c_t2_ora: 2.25,
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("c_k1", self.c_k1),
            ("c_k2", self.c_k2),
            ("c_t1_kac", self.c_t1_kac),
            ("c_t2_kac", self.c_t2_kac),
            ("c_moment", self.c_moment),
            ("c_maxcoord", self.c_maxcoord),
            ("c_t2_ora", self.c_t2_ora),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Kac,
    Ora,
    Sora,
    Identity,
}

impl Algorithm {
    pub fn walk_kind(self) -> Option<WalkKind> {
        match self {
            Algorithm::Kac => Some(WalkKind::Uniform),
            Algorithm::Ora => Some(WalkKind::Ora),
            Algorithm::Sora => Some(WalkKind::Sora),
            Algorithm::Identity => None,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kac" => Ok(Algorithm::Kac),
            "ora" => Ok(Algorithm::Ora),
            "sora" | "s-ora" => Ok(Algorithm::Sora),
            "identity" => Ok(Algorithm::Identity),
            other => Err(Error::Parameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Kac => "kac",
            Algorithm::Ora => "ora",
            Algorithm::Sora => "sora",
            Algorithm::Identity => "identity",
        })
    }
}

/// A fully resolved transform. Immutable once derived; share it freely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub algorithm: Algorithm,
    pub d: usize,
    /// Declared number of points, saturated at `u64::MAX`.
    pub n: u64,
    /// `ln n`; authoritative when `n` saturates.
    pub log_n: f64,
    pub epsilon: f64,
    pub t1: u64,
    pub t2: u64,
    /// Target stage-1 dimension.
    pub k1: usize,
    /// Target stage-2 dimension (before clamping to the realized K1).
    pub k2: usize,
    pub k_out: usize,
    pub stage1_selection: CoordinateSelection,
    pub stage2_selection: CoordinateSelection,
    pub sign_seeds: Option<[Seed; 2]>,
    pub walk_seeds: [Seed; 2],
    pub master_seed: Seed,
    pub constants: ConstantsConfig,
}

/// `ln ln x`, clamped below at 1.
fn loglog(x: f64) -> f64 {
    x.ln().ln().max(1.0)
}

fn ceil_u64(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil() as u64
    }
}

/// Whether `(d, n, ε)` falls back to the identity map: `ε⁻² ln n ≥ d`.
pub fn is_identity_regime(d: usize, log_n: f64, epsilon: f64) -> bool {
    log_n / (epsilon * epsilon) >= d as f64
}

/// `K1 = min(d, ⌈c_k1 ε⁻² ln n (loglog n)² (ln d)³⌉)`.
pub fn k1_target(d: usize, log_n: f64, epsilon: f64, c: &ConstantsConfig) -> usize {
    let ld = (d as f64).ln();
    let raw = c.c_k1 * log_n / (epsilon * epsilon) * log_n.ln().max(1.0).powi(2) * ld.powi(3);
    (ceil_u64(raw).max(1) as usize).min(d)
}

/// `K2 = ⌈c_k2 ε⁻² ln n⌉`.
pub fn k2_target(log_n: f64, epsilon: f64, c: &ConstantsConfig) -> usize {
    ceil_u64(c.c_k2 * log_n / (epsilon * epsilon)).max(1) as usize
}

/// Stage-1 walk length.
pub fn t1_steps(algorithm: Algorithm, d: usize, c: &ConstantsConfig) -> u64 {
    let df = d as f64;
    match algorithm {
        Algorithm::Kac => ceil_u64(c.c_t1_kac * df * df.ln()),
        Algorithm::Ora | Algorithm::Sora => ceil_u64(c.c_maxcoord * df * df.ln() * loglog(df)),
        Algorithm::Identity => 0,
    }
}

/// Stage-2 walk length, from the target K1.
pub fn t2_steps(algorithm: Algorithm, d: usize, k1: usize, log_n: f64, c: &ConstantsConfig) -> u64 {
    let k1 = k1 as f64;
    match algorithm {
        Algorithm::Kac => ceil_u64(c.c_t2_kac * k1 * log_n),
        Algorithm::Ora | Algorithm::Sora => ceil_u64(c.c_t2_ora * k1 * log_n * (d as f64).ln()),
        Algorithm::Identity => 0,
    }
}

/// Resolve a transform for `n` points in `R^d` at distortion `epsilon`.
///
/// All randomness (walk seeds, binomial draws, selections, signs) is drawn
/// from substreams of `master_seed`.
pub fn derive_params(
    d: usize,
    n: u64,
    epsilon: f64,
    algorithm: Algorithm,
    constants: &ConstantsConfig,
    master_seed: u64,
) -> Result<TransformSpec> {
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2 points, got {n}")));
    }
    derive_params_log(d, n, (n as f64).ln(), epsilon, algorithm, constants, master_seed)
}

fn derive_params_log(
    d: usize,
    n: u64,
    log_n: f64,
    epsilon: f64,
    algorithm: Algorithm,
    constants: &ConstantsConfig,
    master_seed: u64,
) -> Result<TransformSpec> {
    constants.validate()?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if d < 2 {
        return Err(Error::Parameter(format!("need d >= 2, got {d}")));
    }
    if d > u32::MAX as usize {
        return Err(Error::Parameter(format!("d = {d} exceeds 2^32 - 1")));
    }
    if !(log_n.is_finite() && log_n >= std::f64::consts::LN_2) {
        return Err(Error::Parameter(format!("ln n = {log_n} below ln 2")));
    }

    // Fixed draw order keeps every seed stable regardless of algorithm.
    let mut params = SeedStream::new(master_seed, LANE_PARAMS);
    let walk_seeds = [Seed(params.next_u64()), Seed(params.next_u64())];
    let select_seeds = [params.next_u64(), params.next_u64()];
    let sign_seeds = [Seed(params.next_u64()), Seed(params.next_u64())];

    if algorithm == Algorithm::Identity || is_identity_regime(d, log_n, epsilon) {
        let all = CoordinateSelection::prefix(d, d)?;
        return Ok(TransformSpec {
            algorithm: Algorithm::Identity,
            d,
            n,
            log_n,
            epsilon,
            t1: 0,
            t2: 0,
            k1: d,
            k2: d,
            k_out: d,
            stage1_selection: all,
            stage2_selection: all,
            sign_seeds: None,
            walk_seeds,
            master_seed: Seed(master_seed),
            constants: *constants,
        });
    }

    let k1 = k1_target(d, log_n, epsilon, constants);
    let k2 = k2_target(log_n, epsilon, constants);
    let t1 = t1_steps(algorithm, d, constants);
    let mut t2 = t2_steps(algorithm, d, k1, log_n, constants);

    // Redraw (deterministically) if a random size comes out empty.
    let mut nonempty = |mut seed: u64, draw: &dyn Fn(u64) -> Result<CoordinateSelection>| {
        loop {
            let sel = draw(seed)?;
            if sel.kept > 0 {
                return Ok::<_, Error>(sel);
            }
            seed = params.next_u64();
        }
    };

    let q1 = k1 as f64 / d as f64;
    let stage1_selection = match algorithm {
        Algorithm::Ora => nonempty(select_seeds[0], &|s| select_bernoulli(d, q1, s))?,
        _ => nonempty(select_seeds[0], &|s| {
            CoordinateSelection::prefix(d, binom_draw(d, q1, s)?)
        })?,
    };
    let k1_real = stage1_selection.kept;
    let k2_eff = k2.min(k1_real);
    let q2 = k2_eff as f64 / k1_real as f64;
    let stage2_selection = match algorithm {
        Algorithm::Kac => nonempty(select_seeds[1], &|s| {
            CoordinateSelection::prefix(k1_real, binom_draw(k1_real, q2, s)?)
        })?,
        Algorithm::Ora => select_fixed(k1_real, k2_eff, select_seeds[1])?,
        _ => CoordinateSelection::prefix(k1_real, k2_eff)?,
    };
    if k1_real < 2 {
        t2 = 0;
    }

    Ok(TransformSpec {
        algorithm,
        d,
        n,
        log_n,
        epsilon,
        t1,
        t2,
        k1,
        k2,
        k_out: stage2_selection.kept,
        stage1_selection,
        stage2_selection,
        sign_seeds: (algorithm == Algorithm::Ora).then_some(sign_seeds),
        walk_seeds,
        master_seed: Seed(master_seed),
        constants: *constants,
    })
}

/// `ln n` for the net of `s`-sparse unit vectors at scale `δ`:
/// `n = d^s (1 + 2/δ)^s / s!`, evaluated in log space.
pub fn rip_log_n(d: usize, s: usize, delta: f64) -> f64 {
    let s_f = s as f64;
    s_f * (d as f64).ln() + s_f * (1.0 + 2.0 / delta).ln() - libm::lgamma(s_f + 1.0)
}

/// A uniform-walk transform sized so that, read as a JL map on the net
/// above, it gives restricted isometry of order `s` at level ~`δ`.
pub fn rip_params(
    d: usize,
    s: usize,
    delta: f64,
    constants: &ConstantsConfig,
    master_seed: u64,
) -> Result<TransformSpec> {
    if s == 0 || s > d {
        return Err(Error::Parameter(format!("sparsity s = {s} must be in 1..={d}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("delta = {delta} outside (0, 1)")));
    }
    let log_n = rip_log_n(d, s, delta);
    let n = if log_n >= (u64::MAX as f64).ln() {
        u64::MAX
    } else {
        log_n.exp().round() as u64
    };
    derive_params_log(d, n.max(2), log_n, delta, Algorithm::Kac, constants, master_seed)
}

impl TransformSpec {
    pub fn k1_realized(&self) -> usize {
        self.stage1_selection.kept
    }

    pub fn stage1_walk(&self) -> Option<WalkSpec> {
        let kind = self.algorithm.walk_kind()?;
        Some(WalkSpec {
            kind,
            d: self.d,
            steps: self.t1,
            seed: self.walk_seeds[0],
        })
    }

    pub fn stage2_walk(&self) -> Option<WalkSpec> {
        let kind = self.algorithm.walk_kind()?;
        Some(WalkSpec {
            kind,
            d: self.k1_realized(),
            steps: self.t2,
            seed: self.walk_seeds[1],
        })
    }

    /// Structural consistency, checked when a spec is loaded from disk.
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        let bad = |m: String| Err(Error::Parameter(m));
        if self.stage1_selection.d_in != self.d {
            return bad(format!(
                "stage-1 selection is over {} coordinates, d = {}",
                self.stage1_selection.d_in, self.d
            ));
        }
        if self.stage2_selection.d_in != self.stage1_selection.kept {
            return bad("stage-2 selection does not match the stage-1 output".into());
        }
        if self.k_out != self.stage2_selection.kept {
            return bad("k_out does not match the stage-2 selection".into());
        }
        if (self.algorithm == Algorithm::Ora) != self.sign_seeds.is_some() {
            return bad("sign seeds are present exactly for the ORA transform".into());
        }
        if let Some(w) = self.stage1_walk() {
            w.validate()?;
        }
        if let Some(w) = self.stage2_walk() {
            w.validate()?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: TransformSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    /// `Ψx` as a new vector.
    pub fn map(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = x.to_vec();
        let k = apply(self, &mut buf)?.len();
        buf.truncate(k);
        Ok(buf)
    }
}

/// Compute `Ψx` in place. On return the image occupies the first `k_out`
/// entries of `buf`, which are also returned; the rest of `buf` is scratch.
pub fn apply<'a>(spec: &TransformSpec, buf: &'a mut [f64]) -> Result<&'a mut [f64]> {
    if buf.len() != spec.d {
        return Err(Error::Dimension(format!(
            "input has length {}, transform expects d = {}",
            buf.len(),
            spec.d
        )));
    }
    let k = apply_lanes(spec, buf, 1);
    Ok(&mut buf[..k])
}

/// Apply the transform to every row of `points`.
///
/// Identical, bit for bit, to calling [`apply`] on each row.
pub fn apply_batch(spec: &TransformSpec, points: &PointSet) -> Result<PointSet> {
    if points.d() != spec.d {
        return Err(Error::Dimension(format!(
            "points have d = {}, transform expects d = {}",
            points.d(),
            spec.d
        )));
    }
    let n = points.n();
    if n == 0 {
        return PointSet::new(0, spec.k_out, Vec::new());
    }
    let d = spec.d;
    let mut block = vec![0.0; d * n];
    for (r, row) in points.rows().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            block[c * n + r] = v;
        }
    }
    let k = apply_lanes(spec, &mut block, n);
    let mut out = vec![0.0; n * k];
    for c in 0..k {
        for r in 0..n {
            out[r * k + c] = block[c * n + r];
        }
    }
    PointSet::new(n, k, out)
}

/// The transform on `lanes` vectors stored coordinate-major; returns the
/// output dimension. The image occupies the first `k_out * lanes` entries.
pub(crate) fn apply_lanes(spec: &TransformSpec, data: &mut [f64], lanes: usize) -> usize {
    let (Some(w1), Some(w2)) = (spec.stage1_walk(), spec.stage2_walk()) else {
        return spec.d;
    };
    let d = spec.d;

    if let Some(seeds) = spec.sign_seeds {
        scale_rows_by_signs(&mut data[..d * lanes], lanes, d, seeds[0].0);
    }
    walk_apply_lanes(&mut data[..d * lanes], lanes, &w1);
    let k1 = compact(data, lanes, &spec.stage1_selection);
    scale_rows(&mut data[..k1 * lanes], d, k1);

    if let Some(seeds) = spec.sign_seeds {
        scale_rows_by_signs(&mut data[..k1 * lanes], lanes, k1, seeds[1].0);
    }
    walk_apply_lanes(&mut data[..k1 * lanes], lanes, &w2);
    let k = compact(data, lanes, &spec.stage2_selection);
    scale_rows(&mut data[..k * lanes], k1, k);
    k
}

/// Move the selected rows to the front, preserving order.
fn compact(data: &mut [f64], lanes: usize, sel: &CoordinateSelection) -> usize {
    let mut kept = 0;
    for (dst, src) in sel.iter().enumerate() {
        if dst != src {
            data.copy_within(src * lanes..(src + 1) * lanes, dst * lanes);
        }
        kept += 1;
    }
    debug_assert_eq!(kept, sel.kept);
    kept
}

fn scale_rows(data: &mut [f64], from: usize, to: usize) {
    if from == to {
        return;
    }
    let s = (from as f64 / to as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= s);
}

fn scale_rows_by_signs(data: &mut [f64], lanes: usize, rows: usize, seed: u64) {
    for (row, s) in data.chunks_exact_mut(lanes).zip(Signs::new(rows, false, seed)) {
        if s < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
