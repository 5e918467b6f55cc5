//! Shared fixtures for the criterion benches.

use blockfade::golden::golden_model;
use blockfade::synthesis::{generate_trace, SynthesisReport, DEFAULT_NOISE_SIGMA_DB};
use blockfade::trace::DEFAULT_SAMPLE_INTERVAL;
use blockfade::{BlockageModel, StateModel};

/// Golden four-state model for a 7° beam.
pub fn model_7deg() -> BlockageModel {
    golden_model(7.0, StateModel::FourState).expect("golden model")
}

/// A noisy synthetic trace of `duration_s` seconds from the 7° model.
pub fn fixture_trace(duration_s: f64, seed: u64) -> SynthesisReport {
    generate_trace(&model_7deg(), duration_s, DEFAULT_SAMPLE_INTERVAL, seed, DEFAULT_NOISE_SIGMA_DB)
        .expect("fixture trace")
}
