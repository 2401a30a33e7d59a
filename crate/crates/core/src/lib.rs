//! Holographic waveguide-fed metasurface antennas for uplink massive MIMO.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`design`]: holographic polarizabilities for a target beam, snapped onto
//!    the Lorentzian locus each element can actually reach.
//! 2. [`waveguide`] and [`cdm`]: a coupled-dipole solve of each row, giving its
//!    pattern, directivity, S-parameters and power budget.
//! 3. [`channel`]: clustered multipath channels seen through those patterns,
//!    with an i.i.d. Rayleigh baseline.
//! 4. [`metrics`]: sum capacity, condition numbers and ensemble statistics.
//!
//! [`experiment`] wires the stages together behind a JSON configuration.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cdm;
pub mod channel;
pub mod config;
pub mod consts;
pub mod design;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod waveguide;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/elements.md")]
    mod elements {}
    #[doc = include_str!("../../../book/src/waveguide.md")]
    mod waveguide {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
