//! Reference device configurations.
//!
//! Two families:
//!
//! - `waveguide(i)` .. `waveguide(vi)`: a Si wire source followed by a SiOx
//!   waveguide, read out through a WDM filter pair.
//! - [`awg_device`]: a 1.37 cm Si source feeding an on-chip 16-channel AWG,
//!   collected three channels either side of the pump.
//!
//! Stated device values: pump 1551.1 nm, 100 MHz, 200 ps; γ = 161 /W/m;
//! Si loss 2.0 dB/cm; SiOx loss 2.4 dB/cm (pair-rate fit; the cut-back value is
//! 1.8 dB/cm); 1 dB coupling per facet; WDM channels 1546.4/1556.0 nm, 0.12 THz
//! wide, 3.8 dB filtration loss; detectors 21 % QE, 1 ns gates, 2.1 kHz dark,
//! 10 µs dead time. AWG device: 7.7 dB insertion loss, 2.8 dB filters, 100 GHz
//! band-pass filters, 24 % QE, 5.1 kHz dark.
//!
//! ASSUMPTIONS (not stated values):
//! - Waveguide lengths other than L_SiOx = 2.93 cm (v), 4.49 cm (vi) and the
//!   AWG device's L_Si = 1.37 cm. We take L_Si = 1.37 cm for (i), (v), (vi),
//!   L_Si = 0.6, 3.0, 5.0 cm for (ii)–(iv), and L_SiOx = 0.94 cm for (i)–(iv).
//! - Filter centers are placed symmetrically about the pump in frequency at
//!   the signal-channel offset, so pairs fall fully inside both passbands.
//! - Filter passbands are rectangular; AWG passbands are gaussian.
//! - Linear noise slopes n1 = 0.2 /W per 0.12 THz filter channel and
//!   0.15 /W per AWG channel; n0 = 0. These put the maximum CAR near 100 for
//!   waveguide (i) and near 30 for the AWG device.

use crate::awg::{AwgSpec, PassbandShape};
use crate::chain::{
    Channels, Demux, DetectorConfig, ExperimentChain, FilterSpec, NoiseCoefficients, PumpConfig, WaveguideSegment,
};
use crate::error::{invalid, Result};
use crate::scenario::Scenario;
use crate::units::wavelength_to_frequency;

pub const PUMP_WAVELENGTH: f64 = 1551.1e-9;
pub const SIGNAL_WAVELENGTH: f64 = 1546.4e-9;
pub const REPETITION_RATE: f64 = 100e6;
pub const PULSE_FWHM: f64 = 200e-12;
/// Fixed peak power of the length studies (W).
pub const LENGTH_STUDY_PEAK_POWER: f64 = 0.037;

pub const GAMMA: f64 = 161.0;
pub const SI_LOSS_DB_PER_M: f64 = 200.0;
pub const SIOX_LOSS_DB_PER_M: f64 = 240.0;
pub const SIOX_CUTBACK_LOSS_DB_PER_M: f64 = 180.0;
pub const COUPLING_LOSS_DB: f64 = 1.0;
pub const WDM_BANDWIDTH: f64 = 0.12e12;
pub const WDM_FILTER_LOSS_DB: f64 = 3.8;
pub const AWG_DEVICE_SI_LENGTH: f64 = 0.0137;

/// Waveguide ids with their (L_Si, L_SiOx) in meters.
pub const WAVEGUIDES: [(&str, f64, f64); 6] = [
    ("i", 0.0137, 0.0094),
    ("ii", 0.006, 0.0094),
    ("iii", 0.030, 0.0094),
    ("iv", 0.050, 0.0094),
    ("v", 0.0137, 0.0293),
    ("vi", 0.0137, 0.0449),
];

pub const PRESET_NAMES: [&str; 7] = ["i", "ii", "iii", "iv", "v", "vi", "awg"];

pub fn pump(peak_power: f64) -> PumpConfig {
    PumpConfig::from_peak_power(PUMP_WAVELENGTH, REPETITION_RATE, PULSE_FWHM, peak_power)
}

fn detector(qe: f64, dark_rate: f64) -> DetectorConfig {
    DetectorConfig {
        quantum_efficiency: qe,
        gate_rate: REPETITION_RATE,
        gate_width: 1e-9,
        dark_rate,
        dead_time: 10e-6,
    }
}

/// Signal-channel offset from the pump (Hz).
pub fn signal_offset() -> f64 {
    wavelength_to_frequency(SIGNAL_WAVELENGTH) - wavelength_to_frequency(PUMP_WAVELENGTH)
}

/// Si source plus SiOx waveguide read out through the WDM filter pair.
pub fn waveguide_chain(si_length: f64, siox_length: f64) -> ExperimentChain {
    let nu_p = wavelength_to_frequency(PUMP_WAVELENGTH);
    let offset = signal_offset();
    let filter = |center| FilterSpec {
        center_frequency: center,
        bandwidth_3db: WDM_BANDWIDTH,
        insertion_loss_db: WDM_FILTER_LOSS_DB,
        shape: PassbandShape::Rectangular,
    };
    ExperimentChain {
        coupling_loss_db_per_facet: COUPLING_LOSS_DB,
        segments: vec![
            WaveguideSegment::nonlinear(si_length, SI_LOSS_DB_PER_M, GAMMA),
            WaveguideSegment::passive(siox_length, SIOX_LOSS_DB_PER_M),
        ],
        demux: Demux::Filters(Channels::new(filter(nu_p + offset), filter(nu_p - offset))),
        post_filters: Channels::default(),
        detectors: Channels::both(detector(0.21, 2.1e3)),
        noise: Channels::both(NoiseCoefficients { n0: 0.0, n1: 0.2 }),
        generation_band: None,
    }
}

pub fn waveguide(id: &str) -> Result<Scenario> {
    match WAVEGUIDES.iter().find(|(name, _, _)| *name == id) {
        Some(&(_, l_si, l_siox)) => Ok(Scenario {
            chain: waveguide_chain(l_si, l_siox),
            pump: pump(LENGTH_STUDY_PEAK_POWER),
        }),
        None => invalid(format!("unknown waveguide `{id}`")),
    }
}

pub fn device_awg_spec() -> AwgSpec {
    AwgSpec {
        channel_count: 16,
        channel_spacing: 200e9,
        passband_3db: 80e9,
        insertion_loss_db: 7.7,
        center_frequency: wavelength_to_frequency(PUMP_WAVELENGTH),
        shape: PassbandShape::Gaussian,
        crosstalk_floor: 0.0,
    }
}

/// Si source and on-chip AWG, collecting ports `signal_port` and `idler_port`.
pub fn awg_chain(signal_port: i32, idler_port: i32) -> ExperimentChain {
    let awg = device_awg_spec();
    let bpf = |port| FilterSpec {
        center_frequency: awg.channel_center(port),
        bandwidth_3db: 100e9,
        insertion_loss_db: 2.8,
        shape: PassbandShape::Rectangular,
    };
    ExperimentChain {
        coupling_loss_db_per_facet: COUPLING_LOSS_DB,
        segments: vec![WaveguideSegment::nonlinear(AWG_DEVICE_SI_LENGTH, SI_LOSS_DB_PER_M, GAMMA)],
        post_filters: Channels::new(vec![bpf(signal_port)], vec![bpf(idler_port)]),
        demux: Demux::Awg { spec: awg, ports: Channels::new(signal_port, idler_port) },
        detectors: Channels::both(detector(0.24, 5.1e3)),
        noise: Channels::both(NoiseCoefficients { n0: 0.0, n1: 0.15 }),
        generation_band: None,
    }
}

pub fn awg_device() -> Scenario {
    Scenario { chain: awg_chain(3, -3), pump: pump(0.01) }
}

/// Looks up any preset by name: a waveguide id or `awg`.
pub fn by_name(name: &str) -> Result<Scenario> {
    match name {
        "awg" => Ok(awg_device()),
        id => waveguide(id),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            by_name(name).unwrap().validate().unwrap();
        }
        assert!(by_name("vii").is_err());
    }

    #[test]
    fn length_study_pump_is_37_mw_peak() {
        let s = waveguide("i").unwrap();
        assert!((s.peak_power().unwrap() - 0.037).abs() < 1e-15);
        assert!((s.pump.average_power - 0.74e-3).abs() < 1e-15);
    }
}
