//! Unit conversions used at the configuration boundary.

use std::f64::consts::LN_10;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Power transmittance of a `loss_db` attenuation: 10^(-loss/10).
pub fn db_to_linear(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Inverse of [`db_to_linear`].
pub fn linear_to_db(transmittance: f64) -> f64 {
    -10.0 * transmittance.log10()
}

/// Converts an attenuation coefficient in dB per unit length to the natural
/// (power) coefficient in nepers per the same unit length.
pub fn db_to_nepers(alpha_db: f64) -> f64 {
    alpha_db * LN_10 / 10.0
}

pub fn nepers_to_db(alpha_np: f64) -> f64 {
    alpha_np * 10.0 / LN_10
}

pub fn wavelength_to_frequency(wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength_m
}

pub fn frequency_to_wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}
