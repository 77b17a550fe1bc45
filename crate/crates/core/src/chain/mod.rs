//! Experiment chain data model and the closed-form rate model.
//!
//! A chain runs from the chip input facet through one nonlinear waveguide,
//! any passive waveguides, a demultiplexer, post filters and two gated
//! threshold detectors. Pump power is the coupled (on-chip) power.

mod rates;

pub use rates::{
    car_estimate, car_linearized, chain_transmittances, click_probabilities, effective_length,
    gate_duty, pair_generation_rate, pair_rate_from_counts, peak_power, predict, predict_with,
    sfwm_quadratic_coefficient, singles_rate, ActiveGateProbabilities, ChainBandwidths, PulseModel,
    RatePrediction,
};

pub use crate::awg::{AwgSpec, Passband, PassbandShape};

use crate::error::{invalid, Result};
use crate::units::{db_to_linear, db_to_nepers, wavelength_to_frequency};

/// A value per detection channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Channels<T> {
    pub signal: T,
    pub idler: T,
}

impl<T> Channels<T> {
    pub fn new(signal: T, idler: T) -> Self {
        Self { signal, idler }
    }

    pub fn both(value: T) -> Self
    where
        T: Clone,
    {
        Self { signal: value.clone(), idler: value }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> Channels<U> {
        Channels { signal: f(self.signal), idler: f(self.idler) }
    }

    pub fn as_ref(&self) -> Channels<&T> {
        Channels { signal: &self.signal, idler: &self.idler }
    }

    pub fn swapped(self) -> Self {
        Self { signal: self.idler, idler: self.signal }
    }

    pub fn zip<U>(self, other: Channels<U>) -> Channels<(T, U)> {
        Channels { signal: (self.signal, other.signal), idler: (self.idler, other.idler) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Nonlinear,
    Passive,
}

/// One propagation section of the chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideSegment {
    pub kind: SegmentKind,
    /// Length (m).
    pub length: f64,
    /// Propagation loss (dB/m).
    pub loss_db_per_m: f64,
    /// Nonlinear coefficient γ (1/(W·m)); zero for passive sections.
    pub gamma: f64,
}

impl WaveguideSegment {
    pub fn nonlinear(length: f64, loss_db_per_m: f64, gamma: f64) -> Self {
        Self { kind: SegmentKind::Nonlinear, length, loss_db_per_m, gamma }
    }

    pub fn passive(length: f64, loss_db_per_m: f64) -> Self {
        Self { kind: SegmentKind::Passive, length, loss_db_per_m, gamma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.length.is_finite() && self.loss_db_per_m.is_finite() && self.gamma.is_finite();
        if !finite || self.length < 0.0 || self.loss_db_per_m < 0.0 || self.gamma < 0.0 {
            return invalid(format!("segment fields must be finite and non-negative: {self:?}"));
        }
        if self.kind == SegmentKind::Passive && self.gamma != 0.0 {
            return invalid("passive segment must have zero nonlinear coefficient");
        }
        Ok(())
    }

    /// Natural power attenuation coefficient (1/m).
    pub fn loss_nepers_per_m(&self) -> f64 {
        db_to_nepers(self.loss_db_per_m)
    }

    /// Linear power transmittance e^(−α L).
    pub fn transmittance(&self) -> f64 {
        (-self.loss_nepers_per_m() * self.length).exp()
    }
}

/// Pulsed pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpConfig {
    /// Wavelength (m).
    pub wavelength: f64,
    /// Repetition rate (Hz).
    pub repetition_rate: f64,
    /// Pulse full width at half maximum (s).
    pub pulse_fwhm: f64,
    /// Coupled average power (W).
    pub average_power: f64,
}

impl PumpConfig {
    /// Builds a pump whose peak power is `peak_power`.
    pub fn from_peak_power(wavelength: f64, repetition_rate: f64, pulse_fwhm: f64, peak_power: f64) -> Self {
        Self {
            wavelength,
            repetition_rate,
            pulse_fwhm,
            average_power: peak_power * repetition_rate * pulse_fwhm,
        }
    }

    pub fn duty_cycle(&self) -> f64 {
        self.repetition_rate * self.pulse_fwhm
    }

    pub fn frequency(&self) -> f64 {
        wavelength_to_frequency(self.wavelength)
    }

    /// Zero average power is allowed (it describes a pump-off run).
    pub fn validate(&self) -> Result<()> {
        let positive = [self.wavelength, self.repetition_rate, self.pulse_fwhm];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid(format!("pump wavelength, rate and width must be positive: {self:?}"));
        }
        if !(self.average_power.is_finite() && self.average_power >= 0.0) {
            return invalid("pump power must be finite and non-negative");
        }
        if self.duty_cycle() > 1.0 + 1e-12 {
            return invalid(format!("pump duty cycle {} exceeds 1", self.duty_cycle()));
        }
        Ok(())
    }
}

/// Band-pass filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Center frequency (Hz).
    pub center_frequency: f64,
    /// 3-dB bandwidth (Hz).
    pub bandwidth_3db: f64,
    /// Peak insertion loss (dB).
    pub insertion_loss_db: f64,
    pub shape: PassbandShape,
}

impl FilterSpec {
    pub fn peak_transmittance(&self) -> f64 {
        db_to_linear(self.insertion_loss_db)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_3db > 0.0 && self.center_frequency > 0.0) {
            return invalid(format!("filter bandwidth and center must be positive: {self:?}"));
        }
        if !(self.insertion_loss_db >= 0.0 && self.insertion_loss_db.is_finite()) {
            return invalid("filter insertion loss must be finite and non-negative");
        }
        Ok(())
    }

    pub fn passband(&self) -> Passband {
        Passband {
            center: self.center_frequency,
            width: self.bandwidth_3db,
            peak: self.peak_transmittance(),
            shape: self.shape,
            floor: 0.0,
        }
    }
}

/// Gated threshold single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub quantum_efficiency: f64,
    /// Gate frequency (Hz).
    pub gate_rate: f64,
    /// Gate width (s).
    pub gate_width: f64,
    /// Dark count rate (Hz) at the given gate rate.
    pub dark_rate: f64,
    /// Dead time after a click (s).
    pub dead_time: f64,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return invalid(format!("quantum efficiency {} not in [0, 1]", self.quantum_efficiency));
        }
        if !(self.gate_rate > 0.0 && self.gate_rate.is_finite() && self.gate_width > 0.0) {
            return invalid("gate rate and width must be positive");
        }
        if !(self.dark_rate >= 0.0 && self.dead_time >= 0.0) {
            return invalid("dark rate and dead time must be non-negative");
        }
        if self.dark_probability() >= 1.0 {
            return invalid(format!("dark count probability per gate {} ≥ 1", self.dark_probability()));
        }
        Ok(())
    }

    /// Dark click probability per gate.
    pub fn dark_probability(&self) -> f64 {
        self.dark_rate / self.gate_rate
    }

    /// Number of gates a click disables.
    pub fn dead_gates(&self) -> u64 {
        (self.dead_time * self.gate_rate).round() as u64
    }
}

/// Sub-quadratic noise photons per pulse at the nonlinear-segment output:
/// `n0 + n1 · P_p`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseCoefficients {
    /// Constant term (photons/pulse).
    pub n0: f64,
    /// Linear slope (photons/pulse per W of peak power).
    pub n1: f64,
}

impl NoiseCoefficients {
    pub fn photons_per_pulse(&self, peak_power: f64) -> f64 {
        self.n0 + self.n1 * peak_power
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Demux {
    /// One band-pass filter per channel.
    Filters(Channels<FilterSpec>),
    /// AWG with the selected output ports (offsets from the pump channel).
    Awg { spec: AwgSpec, ports: Channels<i32> },
}

impl Demux {
    pub fn passbands(&self) -> Result<Channels<Passband>> {
        match self {
            Demux::Filters(f) => Ok(f.map(|f| f.passband())),
            Demux::Awg { spec, ports } => Ok(Channels::new(spec.channel(ports.signal)?, spec.channel(ports.idler)?)),
        }
    }
}

/// Number of pairs per pulse: Poisson, or Bose–Einstein summed over `modes`
/// independent spectral-temporal modes (negative binomial).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PairStatistics {
    #[default]
    Poisson,
    ThermalMultimode { modes: f64 },
}

impl PairStatistics {
    pub fn validate(&self) -> Result<()> {
        if let PairStatistics::ThermalMultimode { modes } = self {
            if !(*modes >= 1.0 && modes.is_finite()) {
                return invalid("thermal mode count must be ≥ 1");
            }
        }
        Ok(())
    }

    /// ln P(no detection) for a pair population whose detected-photon
    /// exponent is `x` (x = mean for Poisson).
    pub fn ln_no_detection(&self, x: f64) -> f64 {
        match *self {
            PairStatistics::Poisson => -x,
            PairStatistics::ThermalMultimode { modes } => -modes * (x / modes).ln_1p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentChain {
    /// Facet coupling loss (dB per facet); only the output facet attenuates photons.
    pub coupling_loss_db_per_facet: f64,
    pub segments: Vec<WaveguideSegment>,
    pub demux: Demux,
    pub post_filters: Channels<Vec<FilterSpec>>,
    pub detectors: Channels<DetectorConfig>,
    pub noise: Channels<NoiseCoefficients>,
    /// Spectral width of the generation band (Hz). Defaults per demux.
    pub generation_band: Option<f64>,
}

impl ExperimentChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_loss_db_per_facet >= 0.0 && self.coupling_loss_db_per_facet.is_finite()) {
            return invalid("coupling loss must be finite and non-negative");
        }
        for s in &self.segments {
            s.validate()?;
        }
        let nonlinear = self.segments.iter().filter(|s| s.kind == SegmentKind::Nonlinear).count();
        if nonlinear != 1 {
            return invalid(format!("chain needs exactly one nonlinear segment, found {nonlinear}"));
        }
        match &self.demux {
            Demux::Filters(f) => {
                f.signal.validate()?;
                f.idler.validate()?;
            }
            Demux::Awg { spec, ports } => {
                spec.validate()?;
                spec.check_channel(ports.signal)?;
                spec.check_channel(ports.idler)?;
            }
        }
        for f in self.post_filters.signal.iter().chain(&self.post_filters.idler) {
            f.validate()?;
        }
        self.detectors.signal.validate()?;
        self.detectors.idler.validate()?;
        for n in [self.noise.signal, self.noise.idler] {
            if !(n.n0 >= 0.0 && n.n1 >= 0.0 && n.n0.is_finite() && n.n1.is_finite()) {
                return invalid("noise coefficients must be finite and non-negative");
            }
        }
        if let Some(b) = self.generation_band {
            if !(b > 0.0 && b.is_finite()) {
                return invalid("generation band must be positive");
            }
        }
        Ok(())
    }

    pub fn nonlinear_index(&self) -> Option<usize> {
        self.segments.iter().position(|s| s.kind == SegmentKind::Nonlinear)
    }

    pub fn nonlinear_segment(&self) -> Result<&WaveguideSegment> {
        match self.nonlinear_index() {
            Some(i) => Ok(&self.segments[i]),
            None => invalid("chain has no nonlinear segment"),
        }
    }

    /// Transmittance of passive sections between the input facet and the
    /// nonlinear segment (attenuates the pump).
    pub fn upstream_transmittance(&self) -> f64 {
        let idx = self.nonlinear_index().unwrap_or(0);
        self.segments[..idx].iter().map(|s| s.transmittance()).product()
    }

    /// Transmittance of passive sections after the nonlinear segment.
    pub fn downstream_transmittance(&self) -> f64 {
        match self.nonlinear_index() {
            Some(idx) => self.segments[idx + 1..].iter().map(|s| s.transmittance()).product(),
            None => 1.0,
        }
    }

    pub fn generation_band_or_default(&self, pump_freq: f64) -> f64 {
        if let Some(b) = self.generation_band {
            return b;
        }
        match &self.demux {
            Demux::Awg { spec, .. } => spec.default_generation_band(),
            Demux::Filters(f) => {
                let reach = |f: &FilterSpec| (f.center_frequency - pump_freq).abs() + 4.0 * f.bandwidth_3db;
                2.0 * reach(&f.signal).max(reach(&f.idler))
            }
        }
    }
}
