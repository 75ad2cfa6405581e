//! Kac-type random walks on SO(d), applied in place.
//!
//! A walk is fully described by a [`WalkSpec`]. Its rotation events are
//! regenerated from the seed every time the walk is applied, so applying a
//! walk of any length needs no storage beyond the vector itself and one
//! generator state.
//!
//! Three angle laws are supported:
//!
//! * [`WalkKind::Uniform`]: θ uniform on `[0, 2π)`, the classical Kac walk.
//! * [`WalkKind::Ora`]: no angle; the pair `(x_i, x_j)` is replaced by
//!   `((x_i + x_j)/√2, (x_i − x_j)/√2)` (orthogonal repeated averaging).
//! * [`WalkKind::Sora`]: θ uniform on `{π/4, 3π/4, 5π/4, 7π/4}` with the
//!   ordinary rotation formula, a symmetric variant of averaging.
//!
//! Coordinate pairs are ordered: `i` is uniform on `0..d` and `j` is uniform
//! on the remaining `d − 1` indices.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Seed, SeedStream, LANE_WALK};

/// Largest dimension [`walk_matrix`] will densify by default.
pub const DEFAULT_MATRIX_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    Uniform,
    Ora,
    Sora,
}

impl WalkKind {
    /// Whether the angle law is invariant under θ ↦ −θ and θ ↦ θ + π/2.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, WalkKind::Ora)
    }
}

/// One step of a walk: the plane `(i, j)` and, except for ORA, the angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEvent {
    pub i: usize,
    pub j: usize,
    pub theta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSpec {
    pub kind: WalkKind,
    pub d: usize,
    pub steps: u64,
    pub seed: Seed,
}

impl WalkSpec {
    pub fn new(kind: WalkKind, d: usize, steps: u64, seed: impl Into<Seed>) -> Result<Self> {
        let spec = WalkSpec {
            kind,
            d,
            steps,
            seed: seed.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Dimension("walk dimension must be positive".into()));
        }
        if self.steps > 0 && self.d < 2 {
            return Err(Error::Dimension(format!(
                "a walk with {} steps needs d >= 2, got d = {}",
                self.steps, self.d
            )));
        }
        if self.d > u32::MAX as usize {
            return Err(Error::Dimension(format!("d = {} exceeds 2^32 - 1", self.d)));
        }
        Ok(())
    }

    /// The event stream, regenerated from the seed.
    pub fn events(&self) -> Events {
        Events {
            rng: SeedStream::new(self.seed.0, LANE_WALK),
            kind: self.kind,
            d: self.d,
            remaining: self.steps,
        }
    }
}

/// Iterator over the rotation events of a [`WalkSpec`].
#[derive(Clone, Debug)]
pub struct Events {
    rng: SeedStream,
    kind: WalkKind,
    d: usize,
    remaining: u64,
}

impl Iterator for Events {
    type Item = RotationEvent;

    #[inline]
    fn next(&mut self) -> Option<RotationEvent> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(draw_event(&mut self.rng, self.kind, self.d))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (n, Some(n))
    }
}

#[inline]
fn draw_event(rng: &mut SeedStream, kind: WalkKind, d: usize) -> RotationEvent {
    let i = rng.index(d);
    let mut j = rng.index(d - 1);
    if j >= i {
        j += 1;
    }
    let theta = match kind {
        WalkKind::Uniform => Some(TAU * rng.unit()),
        WalkKind::Ora => None,
        WalkKind::Sora => Some(FRAC_PI_4 + FRAC_PI_2 * rng.index(4) as f64),
    };
    RotationEvent { i, j, theta }
}

/// Draw one event, advancing `rng`.
pub fn sample_event(rng: &mut SeedStream, kind: WalkKind, d: usize) -> Result<RotationEvent> {
    if d < 2 {
        return Err(Error::Dimension(format!(
            "sampling a rotation plane needs d >= 2, got {d}"
        )));
    }
    if d > u32::MAX as usize {
        return Err(Error::Dimension(format!("d = {d} exceeds 2^32 - 1")));
    }
    Ok(draw_event(rng, kind, d))
}

/// The 2×2 block an event acts with.
#[derive(Clone, Copy, Debug)]
enum Block {
    Givens { c: f64, s: f64 },
    Averaging,
}

#[inline]
fn block_of(e: &RotationEvent, kind: WalkKind) -> Block {
    match (kind, e.theta) {
        (WalkKind::Ora, _) | (_, None) => Block::Averaging,
        (WalkKind::Uniform, Some(theta)) => {
            let (s, c) = libm::sincos(theta);
            Block::Givens { c, s }
        }
        (WalkKind::Sora, Some(theta)) => {
            // Exact ±1/√2 entries; the quadrant identifies the angle.
            let r = FRAC_1_SQRT_2;
            match ((theta / FRAC_PI_2) as usize) & 3 {
                0 => Block::Givens { c: r, s: r },
                1 => Block::Givens { c: -r, s: r },
                2 => Block::Givens { c: -r, s: -r },
                _ => Block::Givens { c: r, s: -r },
            }
        }
    }
}

#[inline]
fn rotate_pair(a: f64, b: f64, block: Block) -> (f64, f64) {
    match block {
        Block::Givens { c, s } => (a * c - b * s, a * s + b * c),
        Block::Averaging => ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2),
    }
}

/// Apply one event to `x` in place. Only `x[e.i]` and `x[e.j]` change.
pub fn apply_event(x: &mut [f64], e: &RotationEvent, kind: WalkKind) -> Result<()> {
    let d = x.len();
    if e.i >= d || e.j >= d || e.i == e.j {
        return Err(Error::Dimension(format!(
            "event plane ({}, {}) invalid for d = {d}",
            e.i, e.j
        )));
    }
    let (a, b) = rotate_pair(x[e.i], x[e.j], block_of(e, kind));
    x[e.i] = a;
    x[e.j] = b;
    Ok(())
}

/// Apply every event of `spec`, in order, to `x` in place.
///
/// Uses no heap memory: the events are regenerated on the fly.
pub fn walk_apply(x: &mut [f64], spec: &WalkSpec) -> Result<()> {
    spec.validate()?;
    if x.len() != spec.d {
        return Err(Error::Dimension(format!(
            "vector has length {}, walk has d = {}",
            x.len(),
            spec.d
        )));
    }
    walk_apply_lanes(x, 1, spec);
    Ok(())
}

/// Apply a walk to `lanes` vectors stored coordinate-major: coordinate `c`
/// of every vector lives in `data[c * lanes..(c + 1) * lanes]`.
///
/// Each lane sees exactly the floating-point operations [`walk_apply`]
/// performs on a single vector, so the results agree bit for bit.
pub(crate) fn walk_apply_lanes(data: &mut [f64], lanes: usize, spec: &WalkSpec) {
    debug_assert_eq!(data.len(), lanes * spec.d);
    if spec.steps == 0 || lanes == 0 {
        return;
    }
    if lanes == 1 {
        for e in spec.events() {
            let (a, b) = rotate_pair(data[e.i], data[e.j], block_of(&e, spec.kind));
            data[e.i] = a;
            data[e.j] = b;
        }
        return;
    }
    for e in spec.events() {
        let block = block_of(&e, spec.kind);
        let (xi, xj) = two_rows(data, lanes, e.i, e.j);
        for (a, b) in xi.iter_mut().zip(xj.iter_mut()) {
            let (na, nb) = rotate_pair(*a, *b, block);
            *a = na;
            *b = nb;
        }
    }
}

#[inline]
fn two_rows(data: &mut [f64], lanes: usize, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    if i < j {
        let (lo, hi) = data.split_at_mut(j * lanes);
        (&mut lo[i * lanes..(i + 1) * lanes], &mut hi[..lanes])
    } else {
        let (lo, hi) = data.split_at_mut(i * lanes);
        let xi = &mut hi[..lanes];
        (xi, &mut lo[j * lanes..(j + 1) * lanes])
    }
}

/// Dense `Q_T` for small `d`: column `k` is the walk applied to `e_k`.
pub fn walk_matrix(spec: &WalkSpec) -> Result<DMatrix<f64>> {
    walk_matrix_capped(spec, DEFAULT_MATRIX_CAP)
}

pub fn walk_matrix_capped(spec: &WalkSpec, cap: usize) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = spec.d;
    if d > cap {
        return Err(Error::CapExceeded(format!(
            "walk_matrix densifies d x d; d = {d} is above the cap {cap}"
        )));
    }
    // Row c holds coordinate c of every basis vector, i.e. row c of Q.
    let mut data = vec![0.0; d * d];
    for k in 0..d {
        data[k * d + k] = 1.0;
    }
    walk_apply_lanes(&mut data, d, spec);
    Ok(DMatrix::from_row_slice(d, d, &data))
}
