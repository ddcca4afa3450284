//! Maritime multipath fading channel simulator.
//!
//! The library models a near-coast ship-to-shore radio link end to end:
//!
//! - [`path_loss`]: piecewise large-scale loss — free space, two-ray
//!   sea-surface reflection, three-ray ducting out to the horizon.
//! - [`config`]: scenario parameters, derived fading quantities and the
//!   validated TOML loader.
//! - [`sde`]: stochastic evolution of the channel state (Brownian phases,
//!   reflected mean-reverting delays, Ornstein-Uhlenbeck Gaussian pairs,
//!   square-root shadowing) with seeded, splittable noise streams.
//! - [`channel`]: assembly of the normalized tapped-delay line with Doppler,
//!   carrier phase, delay-induced power loss and bulk propagation delay,
//!   plus the i.i.d. envelope sampler the dynamic model is validated
//!   against.
//! - [`link`]: OFDM/16-QAM harness with zero-forcing equalization and
//!   SNR/BER accounting over distance.
//! - [`stats`]: quantile goodness-of-fit metrics, Weibull fitting, empirical
//!   PDFs.
//! - [`cli`]: subcommand orchestration and CSV/manifest emission.
//!
//! Monte-Carlo fan-out (independent realizations, distance points) runs on a
//! rayon pool behind the default `parallel` feature; disabling the feature
//! yields a sequential build with bit-identical outputs.

pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub(crate) mod exec;
pub mod link;
pub mod path_loss;
pub mod rng;
pub mod sde;
pub mod stats;

pub use config::{load_config, ScenarioConfig};
pub use error::{Error, Result};
