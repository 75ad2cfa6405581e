//! Seeded, platform-independent random streams.
//!
//! Every random quantity in the crate comes from a [`SeedStream`]: a ChaCha8
//! generator keyed by `seed_from_u64(seed)` and positioned on a 64-bit
//! stream id (the *lane*). Distinct lanes of the same seed are independent
//! substreams, so a walk, its coordinate selection and its sign vector can
//! share one user seed without sharing randomness.
//!
//! Conversions are pinned here rather than delegated to `rand`:
//!
//! * `index(n)`: one `u32` draw mapped by Lemire's multiply-shift with
//!   rejection, exactly uniform on `0..n`.
//! * `unit()`: the top 53 bits of one `u64` draw times 2⁻⁵³, uniform on
//!   `[0, 1)`.
//! * `sign()`: the low bit of one `u32` draw.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Lane used for the rotation events of a walk.
pub const LANE_WALK: u64 = 1;
/// Lane used for coordinate selections and binomial draws.
pub const LANE_SELECT: u64 = 2;
/// Lane used for diagonal sign vectors.
pub const LANE_SIGNS: u64 = 3;
/// Lane used when deriving the sub-seeds of a transform.
pub const LANE_PARAMS: u64 = 4;
/// Lane used for dense Gaussian baselines.
pub const LANE_GAUSS: u64 = 5;
/// Lane used for input vectors generated by the benchmark harness.
pub const LANE_BENCH: u64 = 6;
/// Lanes at and above this value are per-trial substreams.
pub const LANE_TRIAL_BASE: u64 = 1 << 32;

#[derive(Clone, Debug)]
pub struct SeedStream(ChaCha8Rng);

impl SeedStream {
    pub fn new(seed: u64, lane: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(lane);
        SeedStream(rng)
    }

    /// Substream for trial `trial` of an experiment seeded with `seed`.
    pub fn trial(seed: u64, trial: u64) -> Self {
        Self::new(seed, LANE_TRIAL_BASE.wrapping_add(trial))
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`. Panics if `n == 0` or `n > u32::MAX`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0 && n <= u32::MAX as usize, "index range {n} unsupported");
        let n = n as u32;
        let mut m = u64::from(self.next_u32()) * u64::from(n);
        let mut low = m as u32;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u64::from(self.next_u32()) * u64::from(n);
                low = m as u32;
            }
        }
        (m >> 32) as usize
    }

    /// Uniform float in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `+1.0` or `-1.0` with equal probability.
    #[inline]
    pub fn sign(&mut self) -> f64 {
        if self.next_u32() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// A fresh 64-bit seed derived from `(seed, lane)`.
pub fn derive_seed(seed: u64, lane: u64) -> u64 {
    SeedStream::new(seed, lane).next_u64()
}

/// Seed for trial `trial` of an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    SeedStream::trial(seed, trial).next_u64()
}


/// A 64-bit seed. Serialized as a decimal string so JSON readers that go
/// through doubles cannot truncate it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl serde::Serialize for Seed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Seed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<u64>()
            .map(Seed)
            .map_err(|e| serde::de::Error::custom(format!("seed {s:?}: {e}")))
    }
}
