//! Power traces and PDP power integration.
//!
//! Attenuation is stored in dB relative to the unshadowed level with positive
//! values meaning a deeper fade, so a "-3 dB threshold" becomes
//! `attenuation >= 3.0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snapshot interval of the reference measurements, seconds.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 3.3e-3;

/// Peak-relative threshold used when integrating PDPs, dB.
pub const DEFAULT_PDP_THRESHOLD_DB: f64 = -20.0;

/// Minimum number of samples for a median reference.
pub const MIN_NORMALIZE_SAMPLES: usize = 100;

/// One power delay profile snapshot on a uniform delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    delays_ns: Vec<f64>,
    powers_mw: Vec<f64>,
}

impl PowerDelayProfile {
    pub fn new(delays_ns: Vec<f64>, powers_mw: Vec<f64>) -> Result<Self> {
        if delays_ns.is_empty() || powers_mw.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if delays_ns.len() != powers_mw.len() {
            return Err(Error::LengthMismatch(delays_ns.len(), powers_mw.len()));
        }
        if let Some(p) = powers_mw.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProfile(format!("bin power {p} is not a finite value >= 0")));
        }
        if delays_ns.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidProfile("non-finite delay".into()));
        }
        if delays_ns.len() > 1 {
            let step = (delays_ns[delays_ns.len() - 1] - delays_ns[0]) / (delays_ns.len() - 1) as f64;
            if step <= 0.0 {
                return Err(Error::InvalidProfile("delays must increase".into()));
            }
            let uniform = delays_ns
                .windows(2)
                .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-6 * step.max(1.0));
            if !uniform {
                return Err(Error::InvalidProfile("delay bins are not uniformly spaced".into()));
            }
        }
        Ok(Self { delays_ns, powers_mw })
    }

    /// Profile on a `spacing_ns` grid starting at 0.
    pub fn on_grid(spacing_ns: f64, powers_mw: Vec<f64>) -> Result<Self> {
        let delays = (0..powers_mw.len()).map(|i| i as f64 * spacing_ns).collect();
        Self::new(delays, powers_mw)
    }

    pub fn delays_ns(&self) -> &[f64] {
        &self.delays_ns
    }

    pub fn powers_mw(&self) -> &[f64] {
        &self.powers_mw
    }
}

/// Total received power of a PDP: the sum of all bins within `|threshold_db|`
/// of the strongest bin.
pub fn integrate_pdp(pdp: &PowerDelayProfile, threshold_db: f64) -> Result<f64> {
    if !(threshold_db <= 0.0) {
        return Err(Error::PositiveThreshold(threshold_db));
    }
    if pdp.powers_mw.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let peak = pdp.powers_mw.iter().copied().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::NoSignal);
    }
    let floor = peak * 10f64.powf(threshold_db / 10.0);
    Ok(pdp.powers_mw.iter().filter(|&&p| p >= floor).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOrigin {
    Measured,
    Synthetic,
}

/// Uniformly sampled attenuation time series.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTrace {
    sample_interval: f64,
    samples: Vec<f64>,
    pub origin: TraceOrigin,
    pub hpbw_deg: Option<f64>,
}

impl PowerTrace {
    pub fn new(sample_interval: f64, samples: Vec<f64>, origin: TraceOrigin) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("no samples".into()));
        }
        if !(sample_interval > 0.0) || !sample_interval.is_finite() {
            return Err(Error::InvalidTrace(format!("sample interval {sample_interval} must be > 0")));
        }
        if let Some(i) = samples.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidTrace(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_interval,
            samples,
            origin,
            hpbw_deg: None,
        })
    }

    pub fn with_hpbw(mut self, hpbw_deg: f64) -> Self {
        self.hpbw_deg = Some(hpbw_deg);
        self
    }

    /// Seconds between samples.
    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Attenuation samples, dB.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Observation window, seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.sample_interval
    }

    pub fn time_of(&self, index: usize) -> f64 {
        index as f64 * self.sample_interval
    }

    pub fn median(&self) -> f64 {
        median(&self.samples)
    }
}

/// Measurement-setup metadata carried alongside a trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub carrier_ghz: Option<f64>,
    pub bandwidth_ghz: Option<f64>,
    pub tr_separation_m: Option<f64>,
    pub label: String,
}

impl TraceMetadata {
    pub fn new(
        carrier_ghz: Option<f64>,
        bandwidth_ghz: Option<f64>,
        tr_separation_m: Option<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        for (name, v) in [
            ("carrier_ghz", carrier_ghz),
            ("bandwidth_ghz", bandwidth_ghz),
            ("tr_separation_m", tr_separation_m),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(Self {
            carrier_ghz,
            bandwidth_ghz,
            tr_separation_m,
            label: label.into(),
        })
    }

    /// 73.5 GHz carrier, 1 GHz RF bandwidth, 14.2 m peer-to-peer link.
    pub fn reference_campaign(label: impl Into<String>) -> Self {
        Self {
            carrier_ghz: Some(73.5),
            bandwidth_ghz: Some(1.0),
            tr_separation_m: Some(14.2),
            label: label.into(),
        }
    }
}

/// Converts received power in dBm into an attenuation trace referenced to
/// the median power level.
pub fn normalize_trace(raw_powers_db: &[f64], sample_interval: f64) -> Result<PowerTrace> {
    if raw_powers_db.len() < MIN_NORMALIZE_SAMPLES {
        return Err(Error::TraceTooShort(raw_powers_db.len(), MIN_NORMALIZE_SAMPLES));
    }
    if raw_powers_db.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidTrace("raw power is not finite".into()));
    }
    let reference = median(raw_powers_db);
    let atten = raw_powers_db.iter().map(|p| reference - p).collect();
    PowerTrace::new(sample_interval, atten, TraceOrigin::Measured)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
