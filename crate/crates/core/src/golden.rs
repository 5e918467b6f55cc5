//! Published parameter sets for the 7°, 15° and 60° HPBW antenna pairs at
//! 73.5 GHz, and ready-made [`BlockageModel`]s built from them.
//!
//! Rates are in transitions per second, durations in ms, attenuation in dB
//! and slopes in dB/ms. Log-normal parameters describe `ln x`.

use crate::distributions::{AttenuationModel, Distribution, DistributionFit};
use crate::error::{Error, Result};
use crate::markov::RateTable;
use crate::state::StateModel;
use crate::synthesis::{BlockageModel, DrawCoupling};
use crate::trace::DEFAULT_SAMPLE_INTERVAL;

pub const HPBWS_DEG: [f64; 3] = [7.0, 15.0, 60.0];

/// (HPBW, unshadowed→shadowed, shadowed→unshadowed).
pub const TWO_STATE_RATES: [(f64, f64, f64); 3] = [(7.0, 0.21, 3.36), (15.0, 0.21, 3.42), (60.0, 0.18, 3.85)];
pub const TWO_STATE_RATES_COMBINED: (f64, f64) = (0.18, 3.52);

/// (HPBW, U→D, D→S, S→R, R→U).
pub const FOUR_STATE_RATES: [(f64, [f64; 4]); 3] = [
    (7.0, [0.21, 7.88, 7.70, 7.67]),
    (15.0, [0.21, 10.49, 9.79, 5.48]),
    (60.0, [0.18, 11.30, 10.36, 6.88]),
];

/// (HPBW, measured mean blockage attenuation).
pub const MEAN_ATTENUATION_DB: [(f64, f64); 3] = [(7.0, 15.8), (15.0, 12.4), (60.0, 11.5)];

const fn ln(mu: f64, sigma: f64) -> Distribution {
    Distribution::LogNormal { mu, sigma }
}

/// (HPBW, two-state t_D fit, GOF).
pub const TWO_STATE_T_D: [(f64, Distribution, f64); 3] = [
    (7.0, ln(5.61, 0.42), 0.95),
    (15.0, Distribution::Weibull { scale: 282.12, shape: 2.84 }, 0.98),
    (60.0, Distribution::Normal { mu: 236.22, sigma: 100.50 }, 0.98),
];
pub const TWO_STATE_T_D_COMBINED: (Distribution, f64) = (ln(5.48, 0.54), 0.98);

/// Four-state fits for one HPBW, each with its published GOF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourStateFits {
    pub hpbw_deg: f64,
    pub r_decay: (Distribution, f64),
    pub r_rise: (Distribution, f64),
    pub se_mean: (Distribution, f64),
    pub t_d: (Distribution, f64),
}

pub const FOUR_STATE_FITS: [FourStateFits; 3] = [
    FourStateFits {
        hpbw_deg: 7.0,
        r_decay: (ln(-2.15, 0.43), 0.96),
        r_rise: (ln(-2.22, 0.39), 0.99),
        se_mean: (ln(2.71, 0.31), 0.97),
        t_d: (ln(5.87, 0.35), 0.94),
    },
    FourStateFits {
        hpbw_deg: 15.0,
        r_decay: (ln(-2.07, 0.61), 0.98),
        r_rise: (ln(-2.17, 0.55), 0.99),
        se_mean: (Distribution::Uniform { lower: 5.11, upper: 19.02 }, 0.98),
        t_d: (ln(5.69, 0.53), 0.93),
    },
    FourStateFits {
        hpbw_deg: 60.0,
        r_decay: (ln(-1.87, 0.51), 0.98),
        r_rise: (ln(-1.95, 0.56), 0.95),
        se_mean: (Distribution::Normal { mu: 11.50, sigma: 2.41 }, 0.96),
        t_d: (ln(5.58, 0.49), 0.95),
    },
];

fn lookup<T: Copy>(hpbw_deg: f64, rows: impl IntoIterator<Item = (f64, T)>) -> Result<T> {
    rows.into_iter()
        .find(|(h, _)| *h == hpbw_deg)
        .map(|(_, v)| v)
        .ok_or_else(|| Error::InvalidParameter(format!("no published parameters for HPBW {hpbw_deg}°; use 7, 15 or 60")))
}

pub fn four_state_fits(hpbw_deg: f64) -> Result<FourStateFits> {
    lookup(hpbw_deg, FOUR_STATE_FITS.iter().map(|f| (f.hpbw_deg, *f)))
}

fn published((d, gof): (Distribution, f64)) -> DistributionFit {
    DistributionFit::published(d, gof)
}

/// Reference model for one HPBW. Two-state models take t_D and the rates
/// from the two-state tables; their SE_mean and slope fits come from the
/// four-state fits of the same HPBW.
pub fn golden_model(hpbw_deg: f64, model: StateModel) -> Result<BlockageModel> {
    let fits = four_state_fits(hpbw_deg)?;
    let (rate_table, t_d) = match model {
        StateModel::TwoState => {
            let (us, su) = lookup(hpbw_deg, TWO_STATE_RATES.iter().map(|&(h, a, b)| (h, (a, b))))?;
            let t_d = lookup(hpbw_deg, TWO_STATE_T_D.iter().map(|&(h, d, g)| (h, (d, g))))?;
            (RateTable::two_state(us, su, DEFAULT_SAMPLE_INTERVAL)?, t_d)
        }
        StateModel::FourState => {
            let rates = lookup(hpbw_deg, FOUR_STATE_RATES)?;
            (RateTable::four_state(rates, DEFAULT_SAMPLE_INTERVAL)?, fits.t_d)
        }
    };
    Ok(BlockageModel {
        hpbw_deg,
        rate_table,
        dist_t_d: published(t_d),
        dist_se_mean: published(fits.se_mean),
        dist_r_decay: published(fits.r_decay),
        dist_r_rise: published(fits.r_rise),
        attenuation_model: Some(AttenuationModel { b: AttenuationModel::PUBLISHED_B }),
        coupling: DrawCoupling::default(),
    })
}
