//! Shadowing-event segmentation.
//!
//! Both extractors follow the same reconciliation: a two-level Lloyd-Max
//! quantizer over the whole trace proposes candidate fade regions (widened
//! by runs at or above the detection threshold), a candidate survives only
//! if its peak attenuation clears the threshold, and the threshold rule of
//! the chosen model then sets the event boundaries.
//!
//! * Two-state: the event is the maximal run of samples at or above the
//!   detection threshold around the peak; `t_D` is the run length.
//! * Four-state: the event runs from the last sample at or below the
//!   zero-crossing guard before the peak to the first such sample after it;
//!   `t_D` is the time between those two samples. The shadowed region starts
//!   at the first sample reaching `SE_mean` and ends at the last one.

use crate::error::{Error, Result};
use crate::state::{State, StateModel, StateSequence};
use crate::trace::PowerTrace;

/// Slack for comparisons against thresholds computed from the same samples.
const CMP_EPS: f64 = 1e-9;

const LLOYD_MAX_ITER: usize = 100;
const LLOYD_TOL_DB: f64 = 1e-6;

/// Result of a two-level Lloyd-Max quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydMax {
    pub level_lo: f64,
    pub level_hi: f64,
    pub threshold: f64,
    /// `true` where the sample was assigned to the high-attenuation level.
    pub labels: Vec<bool>,
    pub iterations: usize,
}

/// Two-level Lloyd-Max quantizer initialised at the 10th/90th percentiles.
pub fn lloyd_max_2level(samples: &[f64]) -> Result<LloydMax> {
    let (min, max) = min_max(samples).ok_or(Error::DegenerateInput("no samples"))?;
    if !(max > min) {
        return Err(Error::DegenerateInput("all samples identical"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (percentile(&sorted, 0.10), percentile(&sorted, 0.90));
    if !(hi > lo) {
        lo = min;
        hi = max;
    }
    lloyd_max_2level_from(samples, lo, hi)
}

/// Lloyd iteration from explicit initial levels.
pub fn lloyd_max_2level_from(samples: &[f64], init_lo: f64, init_hi: f64) -> Result<LloydMax> {
    if samples.is_empty() {
        return Err(Error::DegenerateInput("no samples"));
    }
    if !(init_hi > init_lo) {
        return Err(Error::DegenerateInput("initial levels must satisfy lo < hi"));
    }
    let (mut lo, mut hi) = (init_lo, init_hi);
    let mut iterations = 0;
    while iterations < LLOYD_MAX_ITER {
        iterations += 1;
        let t = 0.5 * (lo + hi);
        let (mut sum_lo, mut n_lo, mut sum_hi, mut n_hi) = (0.0, 0usize, 0.0, 0usize);
        for &x in samples {
            if x > t {
                sum_hi += x;
                n_hi += 1;
            } else {
                sum_lo += x;
                n_lo += 1;
            }
        }
        if n_lo == 0 || n_hi == 0 {
            return Err(Error::DegenerateInput("quantizer cell emptied"));
        }
        let (new_lo, new_hi) = (sum_lo / n_lo as f64, sum_hi / n_hi as f64);
        let moved = (new_lo - lo).abs().max((new_hi - hi).abs());
        lo = new_lo;
        hi = new_hi;
        if moved < LLOYD_TOL_DB {
            break;
        }
    }
    let threshold = 0.5 * (lo + hi);
    Ok(LloydMax {
        level_lo: lo,
        level_hi: hi,
        threshold,
        labels: samples.iter().map(|&x| x > threshold).collect(),
        iterations,
    })
}

/// One shadowing event. Times in seconds for boundaries, milliseconds for
/// durations; rates in dB/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageEvent {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub t_d_ms: f64,
    pub t_decay_ms: f64,
    pub t_rise_ms: f64,
    pub se_mean_db: f64,
    pub r_decay_db_per_ms: f64,
    pub r_rise_db_per_ms: f64,
}

impl BlockageEvent {
    pub fn from_shape(t_start_s: f64, t_d_ms: f64, t_decay_ms: f64, t_rise_ms: f64, se_mean_db: f64) -> Self {
        Self {
            t_start_s,
            t_end_s: t_start_s + t_d_ms / 1000.0,
            t_d_ms,
            t_decay_ms,
            t_rise_ms,
            se_mean_db,
            r_decay_db_per_ms: se_mean_db / t_decay_ms,
            r_rise_db_per_ms: se_mean_db / t_rise_ms,
        }
    }
}

/// Mean attenuation over the open middle third `(t_D/3, 2 t_D/3)` of an
/// event whose samples are evenly spread over `[0, t_D]` (first and last
/// sample on the boundaries).
pub fn se_mean_of_event(event_samples: &[f64], t_d_ms: f64) -> f64 {
    let n = event_samples.len();
    if n < 2 {
        return event_samples.first().copied().unwrap_or(f64::NAN);
    }
    let step = t_d_ms / (n - 1) as f64;
    middle_third_mean(event_samples, 0.0, step, t_d_ms)
}

/// Middle-third mean where sample `k` sits at `first_ms + k * step_ms`.
pub(crate) fn middle_third_mean(samples: &[f64], first_ms: f64, step_ms: f64, t_d_ms: f64) -> f64 {
    let (a, b) = (t_d_ms / 3.0, 2.0 * t_d_ms / 3.0);
    let inside: Vec<f64> = samples
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let t = first_ms + *k as f64 * step_ms;
            t > a && t < b
        })
        .map(|(_, &x)| x)
        .collect();
    if inside.is_empty() {
        let mid = 0.5 * t_d_ms;
        let k = ((mid - first_ms) / step_ms).round().clamp(0.0, (samples.len() - 1) as f64) as usize;
        return samples[k];
    }
    shifted_mean(&inside)
}

/// Mean computed about the first element, so a constant slice returns that
/// constant bit-exactly.
fn shifted_mean(xs: &[f64]) -> f64 {
    let pivot = xs[0];
    pivot + xs.iter().map(|x| x - pivot).sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationConfig {
    /// Peak attenuation a candidate must reach to count as a fade, dB.
    pub threshold_db: f64,
    /// Guard level standing in for the 0 dB crossing, dB.
    pub zero_cross_db: f64,
    /// Events with fewer samples are treated as noise spikes.
    pub min_event_samples: usize,
    /// Largest tolerated trace median before the trace counts as unnormalized.
    pub max_median_db: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            threshold_db: 3.0,
            zero_cross_db: 0.5,
            min_event_samples: 3,
            max_median_db: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiscardCounts {
    /// Events cut off by the start or end of the trace.
    pub boundary: usize,
    /// Events shorter than `min_event_samples`.
    pub short: usize,
    /// Events whose shadowed region came out empty.
    pub no_shadow: usize,
}

impl DiscardCounts {
    pub fn total(&self) -> usize {
        self.boundary + self.short + self.no_shadow
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub sequence: StateSequence,
    pub events: Vec<BlockageEvent>,
    pub discarded: DiscardCounts,
}

impl Segmentation {
    pub fn mean_t_d_ms(&self) -> Option<f64> {
        mean(self.events.iter().map(|e| e.t_d_ms))
    }

    pub fn mean_se_mean_db(&self) -> Option<f64> {
        mean(self.events.iter().map(|e| e.se_mean_db))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub fn extract_events(trace: &PowerTrace, model: StateModel, config: &SegmentationConfig) -> Result<Segmentation> {
    match model {
        StateModel::TwoState => extract_events_two_state(trace, config),
        StateModel::FourState => extract_events_four_state(trace, config),
    }
}

pub fn extract_events_two_state(trace: &PowerTrace, config: &SegmentationConfig) -> Result<Segmentation> {
    check_normalized(trace, config)?;
    let x = trace.samples();
    let n = x.len();
    let dt_ms = trace.sample_interval() * 1000.0;
    let thr = config.threshold_db - CMP_EPS;

    let mut extents: Vec<(usize, usize)> = fade_peaks(x, config.threshold_db)
        .into_iter()
        .map(|p| {
            let mut s = p;
            while s > 0 && x[s - 1] >= thr {
                s -= 1;
            }
            let mut e = p;
            while e + 1 < n && x[e + 1] >= thr {
                e += 1;
            }
            (s, e)
        })
        .collect();
    extents.sort_unstable();
    extents.dedup();

    let mut labels = vec![State::Unshadowed; n];
    let mut events = Vec::new();
    let mut discarded = DiscardCounts::default();
    for (s, e) in extents {
        if s == 0 || e == n - 1 {
            discarded.boundary += 1;
            continue;
        }
        let len = e - s + 1;
        if len < config.min_event_samples {
            discarded.short += 1;
            continue;
        }
        // The run covers [s - 1/2, e + 1/2] sample periods.
        let run = &x[s..=e];
        let t_d = len as f64 * dt_ms;
        let se = middle_third_mean(run, 0.5 * dt_ms, dt_ms, t_d);
        let Some((f, l)) = shadow_span(run, se) else {
            discarded.no_shadow += 1;
            continue;
        };
        let t_decay = (f as f64 + 0.5) * dt_ms;
        let t_rise = ((len - 1 - l) as f64 + 0.5) * dt_ms;
        let t_start = (s as f64 - 0.5) * trace.sample_interval();
        events.push(BlockageEvent::from_shape(t_start, t_d, t_decay, t_rise, se));
        labels[s..=e].fill(State::Shadowed);
    }

    Ok(Segmentation {
        sequence: StateSequence {
            model: StateModel::TwoState,
            labels,
            sample_interval: trace.sample_interval(),
        },
        events,
        discarded,
    })
}

pub fn extract_events_four_state(trace: &PowerTrace, config: &SegmentationConfig) -> Result<Segmentation> {
    check_normalized(trace, config)?;
    let x = trace.samples();
    let n = x.len();
    let dt_ms = trace.sample_interval() * 1000.0;
    let zc = config.zero_cross_db + CMP_EPS;

    // None marks a side where no zero crossing exists inside the trace.
    let mut extents: Vec<(Option<usize>, Option<usize>)> = fade_peaks(x, config.threshold_db)
        .into_iter()
        .map(|p| {
            let start = (0..p).rev().find(|&i| x[i] <= zc);
            let end = (p + 1..n).find(|&i| x[i] <= zc);
            (start, end)
        })
        .collect();
    extents.sort_unstable();
    extents.dedup();

    let mut complete = Vec::new();
    let mut discarded = DiscardCounts::default();
    for ext in extents {
        match ext {
            (Some(s), Some(e)) => complete.push((s, e)),
            _ => discarded.boundary += 1,
        }
    }
    // Extents sharing or abutting a crossing sample would leave a rising
    // sample directly before a decaying one; fold them into one event.
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(complete.len());
    for (s, e) in complete {
        match merged.last_mut() {
            Some(last) if s <= last.1 + 1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }

    let mut labels = vec![State::Unshadowed; n];
    let mut events = Vec::new();
    for (s, e) in merged {
        if e - s - 1 < config.min_event_samples {
            discarded.short += 1;
            continue;
        }
        let span = &x[s..=e];
        let t_d = (e - s) as f64 * dt_ms;
        let se = middle_third_mean(span, 0.0, dt_ms, t_d);
        let shadow = if se > config.zero_cross_db { shadow_span(span, se) } else { None };
        let Some((f, l)) = shadow.filter(|&(f, l)| f > 0 && l < e - s) else {
            discarded.no_shadow += 1;
            continue;
        };
        let t_decay = f as f64 * dt_ms;
        let t_rise = (e - s - l) as f64 * dt_ms;
        events.push(BlockageEvent::from_shape(trace.time_of(s), t_d, t_decay, t_rise, se));
        labels[s..s + f].fill(State::Decaying);
        labels[s + f..=s + l].fill(State::Shadowed);
        labels[s + l + 1..=e].fill(State::Rising);
    }

    Ok(Segmentation {
        sequence: StateSequence {
            model: StateModel::FourState,
            labels,
            sample_interval: trace.sample_interval(),
        },
        events,
        discarded,
    })
}

fn check_normalized(trace: &PowerTrace, config: &SegmentationConfig) -> Result<()> {
    let m = trace.median();
    if m.abs() > config.max_median_db {
        return Err(Error::NotNormalized(m));
    }
    Ok(())
}

/// Peaks of candidate regions that reach `threshold_db`. A candidate is a
/// run of samples either on the Lloyd-Max high level or at/above the
/// threshold, so fades shallower than the quantizer midpoint still count.
fn fade_peaks(x: &[f64], threshold_db: f64) -> Vec<usize> {
    let thr = threshold_db - CMP_EPS;
    let high = match lloyd_max_2level(x) {
        Ok(q) => q.labels,
        // a constant trace has no fades
        Err(Error::DegenerateInput(_)) => vec![false; x.len()],
        Err(e) => unreachable!("lloyd-max on a validated trace: {e}"),
    };
    let candidate = |i: usize| high[i] || x[i] >= thr;
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if !candidate(i) {
            i += 1;
            continue;
        }
        let mut peak = i;
        while i < x.len() && candidate(i) {
            if x[i] > x[peak] {
                peak = i;
            }
            i += 1;
        }
        if x[peak] >= thr {
            peaks.push(peak);
        }
    }
    peaks
}

/// First and last positions at or above `level`.
fn shadow_span(x: &[f64], level: f64) -> Option<(usize, usize)> {
    let lvl = level - CMP_EPS * level.abs().max(1.0);
    let f = x.iter().position(|&a| a >= lvl)?;
    let l = x.iter().rposition(|&a| a >= lvl)?;
    Some((f, l))
}

fn min_max(x: &[f64]) -> Option<(f64, f64)> {
    let first = *x.first()?;
    Some(x.iter().fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

/// Linear-interpolated percentile of sorted data, `q` in [0, 1].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}
