//! Performance analysis of holographic-MIMO integrated sensing and
//! communications.
//!
//! The crate builds the array and channel models, evaluates every closed-form
//! sensing and communication metric for the downlink and uplink, constructs
//! SR-CR rate regions and checks all of it against a seeded Monte Carlo oracle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod channels;
pub mod cli;
pub mod downlink;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod oracle;
pub mod params;
pub mod quad;
pub mod region;
pub mod special;
pub mod uplink;

pub use error::{Error, Result};

/// Library version recorded in manifests and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/downlink.md")]
    mod downlink {}
    #[doc = include_str!("../../../book/src/uplink.md")]
    mod uplink {}
    #[doc = include_str!("../../../book/src/regions.md")]
    mod regions {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
