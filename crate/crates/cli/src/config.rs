//! JSON experiment configuration. Every dimensioned key carries its unit.

use pairchain::units::wavelength_to_frequency;
use pairchain::{
    AwgSpec, Channels, Demux, DetectorConfig, ExperimentChain, FilterSpec, NoiseCoefficients, PairStatistics,
    PassbandShape, PumpConfig, Scenario, SegmentKind, WaveguideSegment,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pump: PumpSection,
    pub coupling_loss_db: f64,
    pub segments: Vec<SegmentSection>,
    pub demux: DemuxSection,
    #[serde(default, skip_serializing_if = "PostFilters::is_empty")]
    pub post_filters: PostFilters,
    pub detectors: PerChannel<DetectorSection>,
    pub noise: PerChannel<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation_band_ghz: Option<f64>,
    /// Thermal statistics over this many modes; Poisson when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_modes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub wavelength_nm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_power_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_power_mw: Option<f64>,
    pub rep_rate_mhz: f64,
    pub fwhm_ps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Nonlinear,
    Passive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub kind: Kind,
    pub length_cm: f64,
    pub loss_db_per_cm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_per_w_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    #[default]
    Rectangular,
    Gaussian,
}

impl From<Shape> for PassbandShape {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Rectangular => PassbandShape::Rectangular,
            Shape::Gaussian => PassbandShape::Gaussian,
        }
    }
}

impl From<PassbandShape> for Shape {
    fn from(s: PassbandShape) -> Self {
        match s {
            PassbandShape::Rectangular => Shape::Rectangular,
            PassbandShape::Gaussian => Shape::Gaussian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub center_thz: f64,
    pub bandwidth_ghz: f64,
    pub insertion_loss_db: f64,
    #[serde(default)]
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwgSection {
    pub channels: u32,
    pub spacing_ghz: f64,
    pub passband_ghz: f64,
    pub insertion_loss_db: f64,
    pub signal_channel: i32,
    pub idler_channel: i32,
    #[serde(default = "gaussian")]
    pub shape: Shape,
    /// Channel-0 frequency; the pump frequency when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_thz: Option<f64>,
    #[serde(default)]
    pub crosstalk_floor: f64,
}

fn gaussian() -> Shape {
    Shape::Gaussian
}

/// `filters` lists the signal filter then the idler filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DemuxSection {
    Filters(Vec<FilterSection>),
    Awg(AwgSection),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostFilters {
    #[serde(default)]
    pub signal: Vec<FilterSection>,
    #[serde(default)]
    pub idler: Vec<FilterSection>,
}

impl PostFilters {
    fn is_empty(&self) -> bool {
        self.signal.is_empty() && self.idler.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerChannel<T> {
    pub signal: T,
    pub idler: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub qe: f64,
    pub gate_rate_mhz: f64,
    pub gate_width_ns: f64,
    pub dark_rate_khz: f64,
    pub dead_time_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub n0: f64,
    pub n1_per_w: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] pairchain::Error),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Schema(msg.into()))
}

impl FilterSection {
    fn to_spec(&self) -> FilterSpec {
        FilterSpec {
            center_frequency: self.center_thz * 1e12,
            bandwidth_3db: self.bandwidth_ghz * 1e9,
            insertion_loss_db: self.insertion_loss_db,
            shape: self.shape.into(),
        }
    }

    fn from_spec(f: &FilterSpec) -> Self {
        Self {
            center_thz: f.center_frequency / 1e12,
            bandwidth_ghz: f.bandwidth_3db / 1e9,
            insertion_loss_db: f.insertion_loss_db,
            shape: f.shape.into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialises");
        Sha256::digest(compact.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn pair_statistics(&self) -> PairStatistics {
        match self.thermal_modes {
            Some(modes) => PairStatistics::ThermalMultimode { modes },
            None => PairStatistics::Poisson,
        }
    }

    /// Converts to SI model types and validates the result.
    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let p = &self.pump;
        let wavelength = p.wavelength_nm * 1e-9;
        let rate = p.rep_rate_mhz * 1e6;
        let fwhm = p.fwhm_ps * 1e-12;
        let pump = match (p.average_power_mw, p.peak_power_mw) {
            (Some(avg), None) => PumpConfig { wavelength, repetition_rate: rate, pulse_fwhm: fwhm, average_power: avg * 1e-3 },
            (None, Some(peak)) => PumpConfig::from_peak_power(wavelength, rate, fwhm, peak * 1e-3),
            _ => return schema("pump needs exactly one of average_power_mw and peak_power_mw"),
        };

        let mut segments = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let length = s.length_cm * 1e-2;
            let loss = s.loss_db_per_cm * 100.0;
            segments.push(match (s.kind, s.gamma_per_w_m) {
                (Kind::Nonlinear, Some(g)) => WaveguideSegment::nonlinear(length, loss, g),
                (Kind::Nonlinear, None) => return schema("nonlinear segment needs gamma_per_w_m"),
                (Kind::Passive, None) => WaveguideSegment::passive(length, loss),
                (Kind::Passive, Some(_)) => return schema("passive segment must not set gamma_per_w_m"),
            });
        }

        let demux = match &self.demux {
            DemuxSection::Filters(f) => match f.as_slice() {
                [s, i] => Demux::Filters(Channels::new(s.to_spec(), i.to_spec())),
                _ => return schema(format!("demux.filters needs two entries (signal, idler), got {}", f.len())),
            },
            DemuxSection::Awg(a) => Demux::Awg {
                spec: AwgSpec {
                    channel_count: a.channels,
                    channel_spacing: a.spacing_ghz * 1e9,
                    passband_3db: a.passband_ghz * 1e9,
                    insertion_loss_db: a.insertion_loss_db,
                    center_frequency: a.center_thz.map_or_else(|| wavelength_to_frequency(wavelength), |c| c * 1e12),
                    shape: a.shape.into(),
                    crosstalk_floor: a.crosstalk_floor,
                },
                ports: Channels::new(a.signal_channel, a.idler_channel),
            },
        };

        let det = |d: &DetectorSection| DetectorConfig {
            quantum_efficiency: d.qe,
            gate_rate: d.gate_rate_mhz * 1e6,
            gate_width: d.gate_width_ns * 1e-9,
            dark_rate: d.dark_rate_khz * 1e3,
            dead_time: d.dead_time_us * 1e-6,
        };
        let noise = |n: &NoiseSection| NoiseCoefficients { n0: n.n0, n1: n.n1_per_w };
        let filters = |v: &[FilterSection]| v.iter().map(FilterSection::to_spec).collect::<Vec<_>>();

        let chain = ExperimentChain {
            coupling_loss_db_per_facet: self.coupling_loss_db,
            segments,
            demux,
            post_filters: Channels::new(filters(&self.post_filters.signal), filters(&self.post_filters.idler)),
            detectors: Channels::new(det(&self.detectors.signal), det(&self.detectors.idler)),
            noise: Channels::new(noise(&self.noise.signal), noise(&self.noise.idler)),
            generation_band: self.generation_band_ghz.map(|g| g * 1e9),
        };
        let scenario = Scenario { chain, pump };
        scenario.validate()?;
        self.pair_statistics().validate()?;
        Ok(scenario)
    }

    /// Config describing `s`, with the pump given as peak power.
    pub fn from_scenario(s: &Scenario) -> Self {
        // unit conversion noise such as 0.9400000000000001 is rounded away
        let tidy = |v: f64| -> f64 { format!("{v:.12e}").parse().unwrap_or(v) };
        let c = &s.chain;
        let pump = &s.pump;
        let segments = c
            .segments
            .iter()
            .map(|seg| SegmentSection {
                kind: match seg.kind {
                    SegmentKind::Nonlinear => Kind::Nonlinear,
                    SegmentKind::Passive => Kind::Passive,
                },
                length_cm: tidy(seg.length * 100.0),
                loss_db_per_cm: tidy(seg.loss_db_per_m / 100.0),
                gamma_per_w_m: (seg.kind == SegmentKind::Nonlinear).then_some(seg.gamma),
            })
            .collect();
        let demux = match &c.demux {
            Demux::Filters(f) => DemuxSection::Filters(vec![FilterSection::from_spec(&f.signal), FilterSection::from_spec(&f.idler)]),
            Demux::Awg { spec, ports } => DemuxSection::Awg(AwgSection {
                channels: spec.channel_count,
                spacing_ghz: tidy(spec.channel_spacing / 1e9),
                passband_ghz: tidy(spec.passband_3db / 1e9),
                insertion_loss_db: spec.insertion_loss_db,
                signal_channel: ports.signal,
                idler_channel: ports.idler,
                shape: spec.shape.into(),
                center_thz: Some(spec.center_frequency / 1e12),
                crosstalk_floor: spec.crosstalk_floor,
            }),
        };
        let det = |d: &DetectorConfig| DetectorSection {
            qe: d.quantum_efficiency,
            gate_rate_mhz: tidy(d.gate_rate / 1e6),
            gate_width_ns: tidy(d.gate_width / 1e-9),
            dark_rate_khz: tidy(d.dark_rate / 1e3),
            dead_time_us: tidy(d.dead_time / 1e-6),
        };
        let noise = |n: &NoiseCoefficients| NoiseSection { n0: n.n0, n1_per_w: n.n1 };
        let filters = |v: &[FilterSpec]| v.iter().map(FilterSection::from_spec).collect::<Vec<_>>();
        Self {
            pump: PumpSection {
                wavelength_nm: tidy(pump.wavelength / 1e-9),
                average_power_mw: None,
                peak_power_mw: Some(tidy(pump.average_power / pump.duty_cycle() * 1e3)),
                rep_rate_mhz: tidy(pump.repetition_rate / 1e6),
                fwhm_ps: tidy(pump.pulse_fwhm * 1e12),
            },
            coupling_loss_db: c.coupling_loss_db_per_facet,
            segments,
            demux,
            post_filters: PostFilters {
                signal: filters(&c.post_filters.signal),
                idler: filters(&c.post_filters.idler),
            },
            detectors: PerChannel { signal: det(&c.detectors.signal), idler: det(&c.detectors.idler) },
            noise: PerChannel { signal: noise(&c.noise.signal), idler: noise(&c.noise.idler) },
            generation_band_ghz: c.generation_band.map(|b| b / 1e9),
            thermal_modes: None,
        }
    }
}
