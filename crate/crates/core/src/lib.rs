//! Rate models and simulation tools for integrated-photonic photon-pair sources.
//!
//! The crate is organised around an [`ExperimentChain`]: a nonlinear
//! waveguide that generates signal/idler pairs by spontaneous four-wave
//! mixing, followed by passive waveguides, a demultiplexer (a filter pair or
//! an arrayed waveguide grating), post filters and two gated threshold
//! detectors.
//!
//! - [`chain`] holds the domain types and the closed-form rate/CAR model.
//! - [`awg`] models demultiplexer passbands and the anti-correlated pair overlap.
//! - [`montecarlo`] is a per-pulse stochastic counting oracle for the analytic model.
//! - [`fitting`] recovers physical parameters from rate data.
//! - [`presets`] ships the reference device configurations.
//!
//! All quantities are SI internally (m, W, Hz, s). Losses are carried in dB
//! (dB or dB/m) because that is how they are specified.

pub mod awg;
pub mod chain;
pub mod error;
pub mod fitting;
pub mod montecarlo;
pub mod presets;
pub mod quadrature;
pub mod scenario;
pub mod units;

pub use chain::{
    AwgSpec, Channels, Demux, DetectorConfig, ExperimentChain, FilterSpec, NoiseCoefficients,
    PairStatistics, PassbandShape, PumpConfig, RatePrediction, SegmentKind, WaveguideSegment,
};
pub use error::{Error, Result};
pub use scenario::{Scenario, SweepVariable};
