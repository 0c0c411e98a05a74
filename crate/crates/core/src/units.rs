//! Unit conversions. Internally everything is rad/s and seconds.

use std::f64::consts::TAU;

/// Ordinary frequency in GHz to angular frequency.
pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

/// Rate with the given lifetime in µs (`1/T`). A zero lifetime is rejected
/// upstream; an infinite one gives a zero rate.
pub fn rate_from_lifetime_us(t: f64) -> f64 {
    1.0 / us(t)
}

pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU / 1e9
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

pub fn to_us(t: f64) -> f64 {
    t * 1e6
}
