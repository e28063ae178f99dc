//! Diversity-multiplexing-delay tradeoff toolkit for ARQ protocols over the
//! Z-interference channel.
//!
//! * [`analytic`]: closed-form exponents of every scheme.
//! * [`regions`]: outage regions and a brute-force exponent oracle.
//! * [`simulator`]: finite-SNR Monte Carlo of the protocols.
//! * [`cli`]: the `zic-dmt` command-line driver.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod regions;
pub mod simulator;
pub mod stats;
pub mod types;

pub use analytic::{evaluate, DmtResult, SchemeId};
pub use error::{Error, Result};
pub use types::{ext_div, pos_part, validate, Exponent, ExponentPoint, SystemParams};
