//! A chain together with its pump, and the variables a sweep can vary.

use std::fmt;
use std::str::FromStr;

use crate::chain::{self, Demux, ExperimentChain, PumpConfig, RatePrediction, SegmentKind};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub chain: ExperimentChain,
    pub pump: PumpConfig,
}

impl Scenario {
    /// Validates both parts and checks that the detectors are gated once per
    /// pump pulse.
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.pump.validate()?;
        for d in [&self.chain.detectors.signal, &self.chain.detectors.idler] {
            if (d.gate_rate - self.pump.repetition_rate).abs() > 1e-9 * self.pump.repetition_rate {
                return invalid(format!(
                    "detector gate rate {} Hz must equal the pump repetition rate {} Hz",
                    d.gate_rate, self.pump.repetition_rate
                ));
            }
        }
        Ok(())
    }

    pub fn predict(&self) -> Result<RatePrediction> {
        chain::predict(&self.chain, &self.pump)
    }

    pub fn peak_power(&self) -> Result<f64> {
        chain::peak_power(&self.pump)
    }

    pub fn with_peak_power(&self, peak_power: f64) -> Self {
        let mut s = self.clone();
        s.pump.average_power = peak_power * s.pump.duty_cycle();
        s
    }

    /// Peak power in `[lo, hi]` (W) that maximises the predicted CAR, and
    /// that CAR. Log-spaced scan followed by golden-section refinement.
    pub fn car_maximum(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return invalid("CAR search range must satisfy 0 < lo < hi");
        }
        let car_at = |ln_p: f64| -> Result<f64> {
            let s = self.with_peak_power(ln_p.exp());
            chain::car_estimate(&s.chain, &s.pump)
        };
        const SCAN: usize = 200;
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (SCAN - 1) as f64;
        let mut best = (0, f64::MIN);
        for k in 0..SCAN {
            let c = car_at(a + k as f64 * step)?;
            if c > best.1 {
                best = (k, c);
            }
        }
        let mut x0 = a + best.0.saturating_sub(1) as f64 * step;
        let mut x3 = a + (best.0 + 1).min(SCAN - 1) as f64 * step;
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = x3 - r * (x3 - x0);
        let mut x2 = x0 + r * (x3 - x0);
        let (mut f1, mut f2) = (car_at(x1)?, car_at(x2)?);
        while x3 - x0 > 1e-10 {
            if f1 > f2 {
                x3 = x2;
                (x2, f2) = (x1, f1);
                x1 = x3 - r * (x3 - x0);
                f1 = car_at(x1)?;
            } else {
                x0 = x1;
                (x1, f1) = (x2, f2);
                x2 = x0 + r * (x3 - x0);
                f2 = car_at(x2)?;
            }
        }
        let (x, f) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
        Ok(if f >= best.1 { (x.exp(), f) } else { ((a + best.0 as f64 * step).exp(), best.1) })
    }
}

/// Quantity varied by a sweep. Values are SI (m, W, Hz) except the AWG
/// insertion loss, which is in dB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    /// Nonlinear segment length (m).
    SiLength,
    /// First passive segment after the nonlinear one (m).
    SioxLength,
    /// Pump peak power (W).
    PeakPower,
    /// AWG insertion loss (dB).
    AwgLoss,
    /// Dark count rate of both detectors (Hz).
    DarkRate,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [
        SweepVariable::SiLength,
        SweepVariable::SioxLength,
        SweepVariable::PeakPower,
        SweepVariable::AwgLoss,
        SweepVariable::DarkRate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::SiLength => "l_si",
            SweepVariable::SioxLength => "l_siox",
            SweepVariable::PeakPower => "pp",
            SweepVariable::AwgLoss => "awg_loss",
            SweepVariable::DarkRate => "dark",
        }
    }

    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        if !value.is_finite() {
            return invalid(format!("{} value must be finite", self.name()));
        }
        let mut s = base.clone();
        match self {
            SweepVariable::SiLength => {
                let idx = s.chain.nonlinear_index().ok_or_else(|| Error::InvalidConfig("no nonlinear segment".into()))?;
                s.chain.segments[idx].length = value;
            }
            SweepVariable::SioxLength => {
                let idx = s.chain.nonlinear_index().ok_or_else(|| Error::InvalidConfig("no nonlinear segment".into()))?;
                let seg = s.chain.segments[idx + 1..]
                    .iter_mut()
                    .find(|seg| seg.kind == SegmentKind::Passive)
                    .ok_or_else(|| Error::InvalidConfig("chain has no passive segment after the nonlinear one".into()))?;
                seg.length = value;
            }
            SweepVariable::PeakPower => s = s.with_peak_power(value),
            SweepVariable::AwgLoss => match &mut s.chain.demux {
                Demux::Awg { spec, .. } => spec.insertion_loss_db = value,
                Demux::Filters(_) => return invalid("awg_loss sweep needs an AWG demultiplexer"),
            },
            SweepVariable::DarkRate => {
                s.chain.detectors.signal.dark_rate = value;
                s.chain.detectors.idler.dark_rate = value;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown sweep variable `{s}`")))
    }
}
