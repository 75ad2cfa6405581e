//! Johnson-Lindenstrauss transforms built from random Givens-rotation walks.
//!
//! A [`fjlt::TransformSpec`] fixes every random choice through seeds, so
//! applying it needs O(1) extra memory beyond the input buffer. The
//! [`verify`] module has the Monte Carlo checks and [`cli`] the `kacjl`
//! binary.
//!
//! ```
//! use kacjl::fjlt::{derive_params, Algorithm, ConstantsConfig};
//!
//! let spec = derive_params(512, 100, 0.5, Algorithm::Sora, &ConstantsConfig::default(), 3)?;
//! let y = spec.map(&vec![1.0 / (512f64).sqrt(); 512])?;
//! assert_eq!(y.len(), spec.k_out);
//! # Ok::<(), kacjl::error::Error>(())
//! ```

pub mod error;
pub mod fjlt;
pub mod points;
pub mod rng;
pub mod sketch;
pub mod walk;
pub mod verify;
pub mod bench;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/walks.md")]
    mod walks {}
    #[doc = include_str!("../../../book/src/selections.md")]
    mod selections {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/rip.md")]
    mod rip {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
