//! Standard normal CDF and quantile.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::SQRT_2;

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}
