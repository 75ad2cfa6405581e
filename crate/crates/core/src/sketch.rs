//! Coordinate projections, random coordinate selections and diagonal signs.
//!
//! Every selection is a deterministic function of its parameters and seed.
//! The kept indices are produced by a streaming iterator
//! ([`CoordinateSelection::iter`]) in strictly increasing order, which is
//! what lets the transforms compact a vector in place without storing an
//! index list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Seed, SeedStream, LANE_SELECT, LANE_SIGNS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SelectionMode {
    /// The first `k` coordinates.
    Prefix { k: usize },
    /// Each coordinate independently with probability `q`.
    Bernoulli { q: f64, seed: Seed },
    /// A uniformly random `k`-subset.
    FixedSubset { k: usize, seed: Seed },
}

/// A selection of coordinates out of `0..d_in`, with its realized size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSelection {
    #[serde(flatten)]
    pub mode: SelectionMode,
    pub d_in: usize,
    pub kept: usize,
}

impl CoordinateSelection {
    pub fn prefix(d_in: usize, k: usize) -> Result<Self> {
        if k > d_in {
            return Err(Error::Parameter(format!("prefix of {k} out of {d_in}")));
        }
        Ok(CoordinateSelection {
            mode: SelectionMode::Prefix { k },
            d_in,
            kept: k,
        })
    }

    /// Streaming iterator over the kept indices, ascending.
    pub fn iter(&self) -> SelectionIter {
        let state = match self.mode {
            SelectionMode::Prefix { k } => IterState::Prefix { k },
            SelectionMode::Bernoulli { q, seed } => IterState::Bernoulli {
                q,
                rng: SeedStream::new(seed.0, LANE_SELECT),
            },
            SelectionMode::FixedSubset { k, seed } => IterState::Subset {
                needed: k,
                rng: SeedStream::new(seed.0, LANE_SELECT),
            },
        };
        SelectionIter {
            state,
            next: 0,
            d_in: self.d_in,
        }
    }

    /// The kept indices, materialized.
    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

#[derive(Clone, Debug)]
enum IterState {
    Prefix { k: usize },
    Bernoulli { q: f64, rng: SeedStream },
    Subset { needed: usize, rng: SeedStream },
}

#[derive(Clone, Debug)]
pub struct SelectionIter {
    state: IterState,
    next: usize,
    d_in: usize,
}

impl Iterator for SelectionIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.next < self.d_in {
            let idx = self.next;
            self.next += 1;
            let keep = match &mut self.state {
                IterState::Prefix { k } => {
                    if idx >= *k {
                        self.next = self.d_in;
                        return None;
                    }
                    true
                }
                IterState::Bernoulli { q, rng } => rng.unit() < *q,
                // Selection sampling: keep with probability needed / pool.
                IterState::Subset { needed, rng } => {
                    if *needed == 0 {
                        self.next = self.d_in;
                        return None;
                    }
                    let pool = self.d_in - idx;
                    if rng.index(pool) < *needed {
                        *needed -= 1;
                        true
                    } else {
                        false
                    }
                }
            };
            if keep {
                return Some(idx);
            }
        }
        None
    }
}

fn check_probability(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Parameter(format!("probability {q} outside [0, 1]")));
    }
    Ok(())
}

/// `(x_1, …, x_k)`, no rescaling.
pub fn proj_prefix(x: &[f64], k: usize) -> Result<&[f64]> {
    if k > x.len() {
        return Err(Error::Parameter(format!(
            "prefix of length {k} from a vector of length {}",
            x.len()
        )));
    }
    Ok(&x[..k])
}

/// A Binomial(d, q) draw, computed as `d` Bernoulli draws.
///
/// Uses the same stream as [`select_bernoulli`], so
/// `binom_draw(d, q, s) == select_bernoulli(d, q, s).kept`.
pub fn binom_draw(d: usize, q: f64, seed: u64) -> Result<usize> {
    check_probability(q)?;
    let mut rng = SeedStream::new(seed, LANE_SELECT);
    Ok((0..d).filter(|_| rng.unit() < q).count())
}

pub fn select_bernoulli(d: usize, q: f64, seed: u64) -> Result<CoordinateSelection> {
    let kept = binom_draw(d, q, seed)?;
    Ok(CoordinateSelection {
        mode: SelectionMode::Bernoulli {
            q,
            seed: Seed(seed),
        },
        d_in: d,
        kept,
    })
}

/// A uniformly random `k`-subset of `0..d`.
pub fn select_fixed(d: usize, k: usize, seed: u64) -> Result<CoordinateSelection> {
    if k > d {
        return Err(Error::Parameter(format!("subset of size {k} out of {d}")));
    }
    if d > u32::MAX as usize {
        return Err(Error::Dimension(format!("d = {d} exceeds 2^32 - 1")));
    }
    Ok(CoordinateSelection {
        mode: SelectionMode::FixedSubset {
            k,
            seed: Seed(seed),
        },
        d_in: d,
        kept: k,
    })
}

/// A ±1 vector; when `conditioned`, the product of the signs is +1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignVector {
    pub signs: Vec<f64>,
    pub conditioned: bool,
}

/// Streams the signs of `(d, conditioned, seed)`; the last sign corrects the
/// parity when conditioned.
#[derive(Clone, Debug)]
pub(crate) struct Signs {
    rng: SeedStream,
    remaining: usize,
    conditioned: bool,
    product: f64,
}

impl Signs {
    pub(crate) fn new(d: usize, conditioned: bool, seed: u64) -> Self {
        Signs {
            rng: SeedStream::new(seed, LANE_SIGNS),
            remaining: d,
            conditioned,
            product: 1.0,
        }
    }
}

impl Iterator for Signs {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let s = if self.conditioned && self.remaining == 0 {
            self.product
        } else {
            self.rng.sign()
        };
        self.product *= s;
        Some(s)
    }
}

pub fn sign_vector(d: usize, conditioned: bool, seed: u64) -> SignVector {
    SignVector {
        signs: Signs::new(d, conditioned, seed).collect(),
        conditioned,
    }
}

/// `x_i ← ξ_i x_i` in place.
pub fn diag_sign_apply(x: &mut [f64], conditioned: bool, seed: u64) {
    let signs = Signs::new(x.len(), conditioned, seed);
    for (v, s) in x.iter_mut().zip(signs) {
        *v *= s;
    }
}
