//! Synthetic blockage traces.
//!
//! Event onsets follow the unshadowed-exit rate of the model's rate table as
//! a memoryless process on the sample grid: the number of unshadowed samples
//! between two events is geometric with per-sample probability `λ·T`. Each
//! event is a trapezoidal fade (four-state) or a rectangle (two-state) whose
//! parameters come from the model's fits.
//!
//! Event quantities are drawn jointly through a Gaussian copula: each
//! quantity keeps its fitted marginal while the normal scores are
//! correlated according to [`DrawCoupling`]. With
//! [`DrawCoupling::independent`] the draws are mutually independent.

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionFit;
use crate::error::{Error, Result};
use crate::markov::RateTable;
use crate::rng::SimRng;
use crate::segmentation::BlockageEvent;
use crate::state::{State, StateModel};
use crate::trace::{PowerTrace, TraceOrigin};

pub const DEFAULT_NOISE_SIGMA_DB: f64 = 0.3;

/// Consecutive rejected draws after which a model is declared inconsistent.
pub const MAX_DRAW_ATTEMPTS: usize = 1000;

/// Shortest unshadowed gap between events, samples. Shorter gaps are redrawn
/// so that consecutive events stay separable.
const MIN_GAP_SAMPLES: u64 = 2;

/// Piecewise-linear fade: ramp down at `r_decay`, hold at `se_mean`, ramp
/// back at `r_rise` so that the fade ends at exactly 0 dB at `t_d`.
/// Rates in dB/ms, times in ms, attenuation in dB (positive = fade).
pub fn envelope(r_decay: f64, r_rise: f64, se_mean: f64, t_d: f64, t: f64) -> Result<f64> {
    check_shape(r_decay, r_rise, se_mean, t_d)?;
    Ok(envelope_unchecked(r_decay, r_rise, se_mean, t_d, t))
}

fn check_shape(r_decay: f64, r_rise: f64, se_mean: f64, t_d: f64) -> Result<()> {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !(positive(r_decay) && positive(r_rise) && positive(se_mean) && positive(t_d)) {
        return Err(Error::InvalidParameter(format!(
            "envelope needs positive finite parameters (r_decay {r_decay}, r_rise {r_rise}, se_mean {se_mean}, t_d {t_d})"
        )));
    }
    if se_mean / r_decay + se_mean / r_rise > t_d {
        return Err(Error::InconsistentEnvelope);
    }
    Ok(())
}

fn envelope_unchecked(r_decay: f64, r_rise: f64, se_mean: f64, t_d: f64, t: f64) -> f64 {
    if !(t > 0.0 && t < t_d) {
        return 0.0;
    }
    (r_decay * t).min(se_mean).min(r_rise * (t_d - t))
}

/// Parameters of one drawn fade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventShape {
    pub t_d_ms: f64,
    /// Plateau depth, dB.
    pub se_mean_db: f64,
    pub r_decay_db_per_ms: f64,
    pub r_rise_db_per_ms: f64,
}

impl EventShape {
    pub fn attenuation_at(&self, t_ms: f64) -> f64 {
        envelope_unchecked(self.r_decay_db_per_ms, self.r_rise_db_per_ms, self.se_mean_db, self.t_d_ms, t_ms)
    }

    /// Continuous mean of the envelope over the middle third of the event.
    pub fn middle_third_mean(&self) -> f64 {
        let (lo, hi) = (self.t_d_ms / 3.0, 2.0 * self.t_d_ms / 3.0);
        (self.integral_to(hi) - self.integral_to(lo)) / (hi - lo)
    }

    fn integral_to(&self, t: f64) -> f64 {
        let (rd, rr, se, td) = (self.r_decay_db_per_ms, self.r_rise_db_per_ms, self.se_mean_db, self.t_d_ms);
        let a = se / rd;
        let b = td - se / rr;
        let mut sum = 0.5 * rd * t.min(a).powi(2);
        if t > a {
            sum += se * (t.min(b) - a).max(0.0);
        }
        if t > b {
            let u = t - b;
            sum += se * u - 0.5 * rr * u * u;
        }
        sum
    }
}

/// Correlations between the normal scores of (t_D, SE_mean, r_decay,
/// r_rise) used when drawing events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrawCoupling {
    pub t_d_se_mean: f64,
    /// Shared by (t_D, r_decay) and (t_D, r_rise).
    pub t_d_rates: f64,
    /// Shared by (SE_mean, r_decay) and (SE_mean, r_rise).
    pub se_mean_rates: f64,
    pub r_decay_r_rise: f64,
}

impl Default for DrawCoupling {
    fn default() -> Self {
        Self {
            t_d_se_mean: 0.7,
            t_d_rates: -0.2,
            se_mean_rates: 0.5,
            r_decay_r_rise: 0.8,
        }
    }
}

impl DrawCoupling {
    pub fn independent() -> Self {
        Self {
            t_d_se_mean: 0.0,
            t_d_rates: 0.0,
            se_mean_rates: 0.0,
            r_decay_r_rise: 0.0,
        }
    }

    pub fn correlation_matrix(&self) -> [[f64; 4]; 4] {
        let (a, b, c, d) = (self.t_d_se_mean, self.t_d_rates, self.se_mean_rates, self.r_decay_r_rise);
        [[1.0, a, b, b], [a, 1.0, c, c], [b, c, 1.0, d], [b, c, d, 1.0]]
    }

    /// Lower Cholesky factor; fails unless the matrix is positive definite.
    pub fn cholesky(&self) -> Result<[[f64; 4]; 4]> {
        let r = self.correlation_matrix();
        let mut l = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let d = r[i][i] - s;
                    if !(d > 1e-12) {
                        return Err(Error::InvalidParameter(
                            "draw coupling is not a positive-definite correlation matrix".into(),
                        ));
                    }
                    l[i][i] = d.sqrt();
                } else {
                    l[i][j] = (r[i][j] - s) / l[j][j];
                }
            }
        }
        Ok(l)
    }
}

/// Everything needed to synthesize traces for one antenna configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockageModel {
    pub hpbw_deg: f64,
    pub rate_table: RateTable,
    pub dist_t_d: DistributionFit,
    pub dist_se_mean: DistributionFit,
    pub dist_r_decay: DistributionFit,
    pub dist_r_rise: DistributionFit,
    pub attenuation_model: Option<crate::distributions::AttenuationModel>,
    pub coupling: DrawCoupling,
}

impl BlockageModel {
    pub fn state_model(&self) -> StateModel {
        self.rate_table.model
    }

    /// Rate of leaving the unshadowed state, 1/s.
    pub fn onset_rate(&self) -> f64 {
        let model = self.state_model();
        self.rate_table.rate(State::Unshadowed, model.onset_state()).unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hpbw_deg > 0.0) || !self.hpbw_deg.is_finite() {
            return Err(Error::InvalidParameter(format!("HPBW must be > 0, got {}", self.hpbw_deg)));
        }
        for fit in [&self.dist_t_d, &self.dist_se_mean, &self.dist_r_decay, &self.dist_r_rise] {
            fit.validate()?;
        }
        self.coupling.cholesky()?;
        Ok(())
    }
}

/// A drawn event and the number of tuples rejected before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventDraw {
    pub shape: EventShape,
    pub n_rejected: usize,
}

pub fn draw_event(model: &BlockageModel, seed: u64) -> Result<EventDraw> {
    let l = model.coupling.cholesky()?;
    draw_four_state(model, &l, &mut SimRng::seed_from_u64(seed))
}

/// Draws a trapezoid satisfying `se/r_decay + se/r_rise <= t_d`.
fn draw_four_state(model: &BlockageModel, l: &[[f64; 4]; 4], rng: &mut SimRng) -> Result<EventDraw> {
    for n_rejected in 0..MAX_DRAW_ATTEMPTS {
        let [t_d, se, rd, rr] = draw_tuple(model, l, rng);
        if [t_d, se, rd, rr].iter().all(|v| *v > 0.0 && v.is_finite()) && se / rd + se / rr <= t_d {
            return Ok(EventDraw {
                shape: EventShape {
                    t_d_ms: t_d,
                    se_mean_db: se,
                    r_decay_db_per_ms: rd,
                    r_rise_db_per_ms: rr,
                },
                n_rejected,
            });
        }
    }
    Err(Error::InconsistentModel(MAX_DRAW_ATTEMPTS))
}

/// Draws a rectangle of at least one sample; the ramps are unused.
fn draw_two_state(model: &BlockageModel, l: &[[f64; 4]; 4], rng: &mut SimRng, dt_ms: f64) -> Result<(usize, f64, usize)> {
    for n_rejected in 0..MAX_DRAW_ATTEMPTS {
        let [t_d, se, _, _] = draw_tuple(model, l, rng);
        let len = (t_d / dt_ms).round();
        if se > 0.0 && se.is_finite() && len >= 1.0 && len.is_finite() {
            return Ok((len as usize, se, n_rejected));
        }
    }
    Err(Error::InconsistentModel(MAX_DRAW_ATTEMPTS))
}

fn draw_tuple(model: &BlockageModel, l: &[[f64; 4]; 4], rng: &mut SimRng) -> [f64; 4] {
    let w: [f64; 4] = std::array::from_fn(|_| rng.std_normal());
    let z: [f64; 4] = std::array::from_fn(|i| (0..=i).map(|k| l[i][k] * w[k]).sum());
    let fits = [&model.dist_t_d, &model.dist_se_mean, &model.dist_r_decay, &model.dist_r_rise];
    std::array::from_fn(|i| fits[i].distribution.from_normal_score(z[i]))
}

#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub trace: PowerTrace,
    /// Events as the segmentation defines them, measured on the noise-free
    /// envelope; ordered and non-overlapping.
    pub ground_truth_events: Vec<BlockageEvent>,
    /// Drawn parameters, one per ground-truth event.
    pub shapes: Vec<EventShape>,
    pub n_rejected_draws: usize,
    /// Events that did not fit before the end of the trace.
    pub n_dropped: usize,
}

/// Number of samples covering `duration_s`.
pub fn sample_count(duration_s: f64, sample_interval: f64) -> usize {
    (duration_s / sample_interval * (1.0 + 1e-12)).floor() as usize
}

pub fn generate_trace(
    model: &BlockageModel,
    duration_s: f64,
    sample_interval: f64,
    seed: u64,
    noise_sigma_db: f64,
) -> Result<SynthesisReport> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(Error::InvalidParameter(format!("duration must be > 0 s, got {duration_s}")));
    }
    if !(sample_interval > 0.0) || !sample_interval.is_finite() {
        return Err(Error::InvalidParameter(format!("sample interval must be > 0 s, got {sample_interval}")));
    }
    if !(noise_sigma_db >= 0.0) || !noise_sigma_db.is_finite() {
        return Err(Error::InvalidParameter(format!("noise sigma must be >= 0 dB, got {noise_sigma_db}")));
    }
    model.validate()?;
    let n = sample_count(duration_s, sample_interval);
    if n == 0 {
        return Err(Error::InvalidParameter(format!(
            "duration {duration_s} s is shorter than one sample interval"
        )));
    }
    let p = model.onset_rate() * sample_interval;
    if p >= 1.0 {
        return Err(Error::IntervalTooCoarse {
            state: State::Unshadowed.name(),
            prob: p,
        });
    }
    let l = model.coupling.cholesky()?;
    let dt_ms = sample_interval * 1000.0;

    let mut root = SimRng::seed_from_u64(seed);
    let mut gap_rng = root.fork();
    let mut shape_rng = root.fork();
    let mut noise_rng = root.fork();

    let mut samples = vec![0.0; n];
    let mut events = Vec::new();
    let mut shapes = Vec::new();
    let mut n_rejected_draws = 0;
    let mut n_dropped = 0;
    // first sample of the current unshadowed run
    let mut pos = 0usize;
    while p > 0.0 && pos < n {
        let mut gap = gap_rng.geometric(p);
        while gap < MIN_GAP_SAMPLES {
            gap = gap_rng.geometric(p);
        }
        let onset = pos.saturating_add(usize::try_from(gap).unwrap_or(usize::MAX));
        if onset >= n {
            break;
        }
        // index of the event's last sample
        let last = match model.state_model() {
            StateModel::FourState => {
                let draw = draw_four_state(model, &l, &mut shape_rng)?;
                n_rejected_draws += draw.n_rejected;
                let shape = draw.shape;
                let m = (shape.t_d_ms / dt_ms).ceil() as usize;
                if onset + m >= n {
                    n_dropped += 1;
                    break;
                }
                for k in 0..=m {
                    samples[onset + k] = shape.attenuation_at(k as f64 * dt_ms);
                }
                let se = ground_truth_se(&samples[onset..=onset + m], dt_ms, shape.t_d_ms);
                events.push(BlockageEvent::from_shape(
                    onset as f64 * sample_interval,
                    shape.t_d_ms,
                    se / shape.r_decay_db_per_ms,
                    se / shape.r_rise_db_per_ms,
                    se,
                ));
                shapes.push(shape);
                onset + m
            }
            StateModel::TwoState => {
                let (len, se, rejected) = draw_two_state(model, &l, &mut shape_rng, dt_ms)?;
                n_rejected_draws += rejected;
                if onset + len > n - 1 {
                    n_dropped += 1;
                    break;
                }
                samples[onset..onset + len].fill(se);
                let t_d = len as f64 * dt_ms;
                events.push(BlockageEvent::from_shape(
                    (onset as f64 - 0.5) * sample_interval,
                    t_d,
                    0.5 * dt_ms,
                    0.5 * dt_ms,
                    se,
                ));
                shapes.push(EventShape {
                    t_d_ms: t_d,
                    se_mean_db: se,
                    r_decay_db_per_ms: se / (0.5 * dt_ms),
                    r_rise_db_per_ms: se / (0.5 * dt_ms),
                });
                onset + len - 1
            }
        };
        pos = last + 1;
    }

    if noise_sigma_db > 0.0 {
        for x in &mut samples {
            *x += noise_sigma_db * noise_rng.std_normal();
        }
    }
    let mut trace = PowerTrace::new(sample_interval, samples, TraceOrigin::Synthetic)?;
    trace.hpbw_deg = Some(model.hpbw_deg);
    Ok(SynthesisReport {
        trace,
        ground_truth_events: events,
        shapes,
        n_rejected_draws,
        n_dropped,
    })
}

/// Middle-third mean of the sampled noise-free event, as segmentation
/// measures it.
fn ground_truth_se(event: &[f64], dt_ms: f64, t_d_ms: f64) -> f64 {
    let sampled_t_d = (event.len() - 1) as f64 * dt_ms;
    debug_assert!(sampled_t_d >= t_d_ms - 1e-9);
    crate::segmentation::middle_third_mean(event, 0.0, dt_ms, sampled_t_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Distribution;
    use crate::segmentation::{extract_events_four_state, SegmentationConfig};
    use crate::trace::DEFAULT_SAMPLE_INTERVAL;
    use proptest::prelude::*;

    const DT: f64 = DEFAULT_SAMPLE_INTERVAL;

    fn fit(d: Distribution) -> DistributionFit {
        DistributionFit::published(d, 1.0)
    }

    fn model_7deg(onset_rate: f64) -> BlockageModel {
        BlockageModel {
            hpbw_deg: 7.0,
            rate_table: RateTable::four_state([onset_rate, 7.88, 7.70, 7.67], DT).unwrap(),
            dist_t_d: fit(Distribution::LogNormal { mu: 5.87, sigma: 0.35 }),
            dist_se_mean: fit(Distribution::LogNormal { mu: 2.71, sigma: 0.31 }),
            dist_r_decay: fit(Distribution::LogNormal { mu: -2.15, sigma: 0.43 }),
            dist_r_rise: fit(Distribution::LogNormal { mu: -2.22, sigma: 0.39 }),
            attenuation_model: None,
            coupling: DrawCoupling::default(),
        }
    }

    #[test]
    fn envelope_examples() {
        let e = |t| envelope(0.12, 0.15, 12.0, 330.0, t).unwrap();
        assert_eq!(e(0.0), 0.0);
        assert_eq!(e(330.0), 0.0);
        assert_eq!(e(100.0), 12.0);
        assert_eq!(e(165.0), 12.0);
        assert!((e(50.0) - 6.0).abs() < 1e-12);
        assert!((e(290.0) - 6.0).abs() < 1e-12);
        assert_eq!(e(-1.0), 0.0);
        assert_eq!(e(400.0), 0.0);
        assert!(matches!(envelope(0.12, 0.15, 12.0, 100.0, 10.0), Err(Error::InconsistentEnvelope)));
        assert!(envelope(0.0, 0.15, 12.0, 330.0, 10.0).is_err());
    }

    #[test]
    fn middle_third_mean_matches_numeric_integral() {
        let s = EventShape {
            t_d_ms: 300.0,
            se_mean_db: 12.0,
            r_decay_db_per_ms: 0.1,
            r_rise_db_per_ms: 0.08,
        };
        let steps = 200_000;
        let h = 100.0 / steps as f64;
        let numeric: f64 = (0..steps).map(|i| s.attenuation_at(100.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h / 100.0;
        assert!((s.middle_third_mean() - numeric).abs() < 1e-6);
    }

    #[test]
    fn coupling_must_be_positive_definite() {
        assert!(DrawCoupling::default().cholesky().is_ok());
        assert!(DrawCoupling::independent().cholesky().is_ok());
        let bad = DrawCoupling {
            t_d_se_mean: 0.99,
            t_d_rates: -0.99,
            se_mean_rates: 0.99,
            r_decay_r_rise: 0.0,
        };
        assert!(bad.cholesky().is_err());
    }

    #[test]
    fn draws_for_7deg_model() {
        let model = model_7deg(0.21);
        let l = model.coupling.cholesky().unwrap();
        let mut rng = SimRng::seed_from_u64(1);
        let (mut rejected, mut td, mut se) = (0, 0.0, 0.0);
        let n = 10_000;
        for _ in 0..n {
            let d = draw_four_state(&model, &l, &mut rng).unwrap();
            rejected += d.n_rejected;
            td += d.shape.t_d_ms;
            se += d.shape.se_mean_db;
        }
        let rate = rejected as f64 / (rejected + n) as f64;
        assert!(rate < 0.20, "rejection rate {rate}");
        assert!((td / n as f64 / 378.0 - 1.0).abs() < 0.05);
        assert!((se / n as f64 / 15.8 - 1.0).abs() < 0.05);
        assert_eq!(draw_event(&model, 5).unwrap(), draw_event(&model, 5).unwrap());
    }

    #[test]
    fn impossible_model_errors() {
        let mut model = model_7deg(0.21);
        model.dist_t_d = fit(Distribution::Uniform { lower: 1.0, upper: 2.0 });
        assert!(matches!(draw_event(&model, 1), Err(Error::InconsistentModel(1000))));
    }

    #[test]
    fn zero_rate_gives_flat_noise() {
        let r = generate_trace(&model_7deg(0.0), 10.0, DT, 1, 0.3).unwrap();
        assert!(r.ground_truth_events.is_empty());
        let x = r.trace.samples();
        let sd = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        assert!((sd - 0.3).abs() < 0.02);
        let quiet = generate_trace(&model_7deg(0.0), 10.0, DT, 1, 0.0).unwrap();
        assert!(quiet.trace.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sample_count_and_errors() {
        assert_eq!(sample_count(135.0, DT), 40_909);
        assert!(generate_trace(&model_7deg(0.21), 0.0, DT, 1, 0.3).is_err());
        assert!(generate_trace(&model_7deg(0.21), 1.0, DT, 1, -0.1).is_err());
        assert!(matches!(
            generate_trace(&model_7deg(400.0), 1.0, DT, 1, 0.0),
            Err(Error::IntervalTooCoarse { .. })
        ));
    }

    #[test]
    fn event_count_over_reference_window() {
        let counts: Vec<usize> = (0..200)
            .map(|s| generate_trace(&model_7deg(0.21), 135.0, DT, s, 0.3).unwrap().ground_truth_events.len())
            .collect();
        let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
        // U time is the window minus the time spent in events
        let expected = 135.0 / (1.0 / 0.21 + 0.385);
        assert!((mean - expected).abs() < 1.0, "mean {mean} vs {expected}");
        assert!((mean - 28.0).abs() < 2.5 * 28f64.sqrt());
    }

    #[test]
    fn events_ordered_and_disjoint() {
        let r = generate_trace(&model_7deg(2.0), 300.0, DT, 9, 0.3).unwrap();
        assert!(r.ground_truth_events.len() > 100);
        for w in r.ground_truth_events.windows(2) {
            assert!(w[0].t_end_s < w[1].t_start_s);
        }
        assert_eq!(r.shapes.len(), r.ground_truth_events.len());
    }

    #[test]
    fn gaps_are_memoryless() {
        let model = model_7deg(5.0);
        let r = generate_trace(&model, 6000.0, DT, 4, 0.0).unwrap();
        let ev = &r.ground_truth_events;
        let dt_ms = DT * 1000.0;
        let onset = |e: &BlockageEvent| (e.t_start_s / DT).round();
        // unshadowed samples between the last sample of one event and the next onset
        let mut gaps: Vec<f64> = ev
            .windows(2)
            .map(|w| onset(&w[1]) - onset(&w[0]) - (w[0].t_d_ms / dt_ms).ceil() - 1.0)
            .collect();
        assert!(gaps.len() >= 10_000, "{} gaps", gaps.len());
        gaps.sort_by(f64::total_cmp);
        // geometric on {2, 3, ...}: P(G <= k) = 1 - q^(k-1)
        let q = 1.0 - 5.0 * DT;
        let cdf = |k: f64| if k < 2.0 { 0.0 } else { 1.0 - q.powf(k - 1.0) };
        let n = gaps.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < gaps.len() {
            let k = gaps[i];
            let below = i as f64 / n;
            while i < gaps.len() && gaps[i] == k {
                i += 1;
            }
            let upto = i as f64 / n;
            d = d.max((upto - cdf(k)).abs()).max((below - cdf(k - 1.0)).abs());
        }
        assert!(d < 1.628 / n.sqrt(), "KS D = {d}");
    }

    #[test]
    fn noise_free_trace_resegments_to_ground_truth() {
        let r = generate_trace(&model_7deg(0.21), 1800.0, DT, 12, 0.0).unwrap();
        let cfg = SegmentationConfig { zero_cross_db: 0.0, ..SegmentationConfig::default() };
        let seg = extract_events_four_state(&r.trace, &cfg).unwrap();
        assert_eq!(seg.events.len(), r.ground_truth_events.len());
        let dt_ms = DT * 1000.0;
        for (got, want) in seg.events.iter().zip(&r.ground_truth_events) {
            assert!((got.t_d_ms - want.t_d_ms).abs() <= dt_ms + 1e-9);
            assert!((got.se_mean_db - want.se_mean_db).abs() <= 0.1);
            assert!((got.t_start_s - want.t_start_s).abs() < 1e-9);
        }
    }

    #[test]
    fn two_state_rectangles() {
        let mut model = model_7deg(0.0);
        model.rate_table = RateTable::two_state(0.21, 3.36, DT).unwrap();
        model.dist_t_d = fit(Distribution::LogNormal { mu: 5.61, sigma: 0.42 });
        let r = generate_trace(&model, 600.0, DT, 3, 0.0).unwrap();
        assert!(!r.ground_truth_events.is_empty());
        let seg = crate::segmentation::extract_events_two_state(&r.trace, &SegmentationConfig::default()).unwrap();
        assert_eq!(seg.events.len(), r.ground_truth_events.len());
        for (got, want) in seg.events.iter().zip(&r.ground_truth_events) {
            assert!((got.t_d_ms - want.t_d_ms).abs() < 1e-9);
            assert_eq!(got.se_mean_db, want.se_mean_db);
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let a = generate_trace(&model_7deg(0.21), 60.0, DT, 77, 0.3).unwrap();
        let b = generate_trace(&model_7deg(0.21), 60.0, DT, 77, 0.3).unwrap();
        assert_eq!(a.trace, b.trace);
        let c = generate_trace(&model_7deg(0.21), 60.0, DT, 78, 0.3).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn envelope_shape(rd in 0.01f64..2.0, rr in 0.01f64..2.0, se in 0.5f64..40.0, extra in 0.0f64..500.0) {
            let td = se / rd + se / rr + extra;
            let step = 0.1;
            let r_max = rd.max(rr);
            let mut prev = envelope(rd, rr, se, td, 0.0).unwrap();
            prop_assert_eq!(prev, 0.0);
            prop_assert_eq!(envelope(rd, rr, se, td, td).unwrap(), 0.0);
            let mut peak: f64 = 0.0;
            let mut t = step;
            while t <= td + step {
                let v = envelope(rd, rr, se, td, t).unwrap();
                prop_assert!(v >= 0.0 && v <= se);
                prop_assert!((v - prev).abs() <= r_max * step * (1.0 + 1e-9));
                peak = peak.max(v);
                prev = v;
                t += step;
            }
            let a = se / rd;
            prop_assert_eq!(envelope(rd, rr, se, td, a + 0.5 * (td - se / rr - a)).unwrap(), se);
            prop_assert!(peak <= se);
        }
    }
}
