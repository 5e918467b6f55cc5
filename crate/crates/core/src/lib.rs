//! Pedestrian-blockage fading for mmWave peer-to-peer links.
//!
//! The crate covers both directions of the model:
//!
//! * **analysis**: PDP power integration and trace normalization
//!   ([`trace`]), event segmentation ([`segmentation`]), transition-rate
//!   estimation ([`markov`]) and distribution fitting ([`distributions`]);
//! * **synthesis**: the piecewise-linear fade envelope and full trace
//!   generation from a [`BlockageModel`] ([`synthesis`]).
//!
//! Reference parameter sets for 7°, 15° and 60° HPBW antenna pairs live in
//! [`golden`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod golden;
pub mod io;
pub mod markov;
pub mod rng;
pub mod segmentation;
mod special;
pub mod state;
pub mod synthesis;
pub mod trace;

pub use distributions::{AttenuationModel, Distribution, DistributionFit, Family};
pub use error::{Error, Result};
pub use markov::RateTable;
pub use rng::SimRng;
pub use segmentation::{BlockageEvent, Segmentation, SegmentationConfig};
pub use state::{State, StateModel, StateSequence};
pub use synthesis::{BlockageModel, DrawCoupling, SynthesisReport};
pub use trace::{PowerDelayProfile, PowerTrace, TraceMetadata, TraceOrigin};
