#![doc = include_str!("../../../README.md")]

pub mod curvature;
pub mod error;
pub mod lie;
pub mod metric;
pub mod psi;
pub mod quat;
pub mod rng;
pub mod scan;
pub mod sp2;
pub mod verify;
pub mod zero_locus;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod chapter_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/running.md")]
pub mod chapter_running {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/configuration.md")]
pub mod chapter_configuration {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/library.md")]
pub mod chapter_library {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
pub mod chapter_verification {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scanning.md")]
pub mod chapter_scanning {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/results.md")]
pub mod chapter_results {}
