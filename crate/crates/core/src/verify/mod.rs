//! Monte Carlo checks of the analytic facts the transforms rest on.
//!
//! Every experiment derives trial `i`'s randomness from `(seed, i)` alone and
//! reduces the per-trial results in trial order, so reports are bit-identical
//! whatever the thread count.

mod coupling;
mod gaussian;
mod jl;
mod kw;
mod mixing;
mod moments;
mod rip;
mod stats;
mod subset;
mod symmetry;

pub use coupling::{
    contraction_experiment, contraction_factor, coupling_step, ContractionPoint,
    ContractionReport, CoupledPair,
};
pub use gaussian::gaussian_baseline;
pub use jl::{distortion_from_images, jl_distortion, DistortionReport};
pub use kw::{krahmer_ward_check, rademacher_matrix, KrahmerWardReport};
pub use mixing::{perm_mixing_bound, perm_mixing_tv, PermTvReport};
pub use moments::{
    max_coord_experiment, max_coord_threshold, moment_bound, ROUNDOFF, moment_experiment,
    moment_step_bound, moment_step_check, s_k, MaxCoordReport, MomentStats, MomentStepReport,
};
pub use rip::{
    delta_s_exact, dirksen_subsample_check, DirksenReport, DirksenRow, RipMethod, RipReport,
    ENUMERATION_CAP,
};
pub use stats::{mean_and_se, median};
pub use subset::{subset_concentration_experiment, subset_concentration_with_k, SubsetReport};
pub use symmetry::{sign_symmetry_test, StatisticResult, SymmetryReport, PERMUTATIONS};

use rayon::prelude::*;

/// Run `f(trial)` for every trial, returning results in trial order.
pub(crate) fn run_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}
