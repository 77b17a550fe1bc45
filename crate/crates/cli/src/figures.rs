//! Analytic curves matching the axes of the reference measurements.

use std::path::Path;

use clap::ValueEnum;
use pairchain::chain::car_estimate;
use pairchain::{presets, Demux, Scenario};

use crate::commands::{emit, header};
use crate::table::{num, ResultTable};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Pair rate at the passive-waveguide output against its length.
    #[value(name = "3a")]
    F3a,
    /// Pair rate at the passive-waveguide output against the Si length.
    #[value(name = "3b")]
    F3b,
    /// Signal photons per pulse at the Si output against peak power.
    #[value(name = "3c")]
    F3c,
    /// CAR against peak power for waveguides (i), (v), (vi).
    #[value(name = "3d")]
    F3d,
    /// AWG device pair rate against peak power.
    #[value(name = "5a")]
    F5a,
    /// AWG device CAR: as built, without AWG loss, and also with 20 Hz dark counts.
    #[value(name = "5b")]
    F5b,
}

impl Figure {
    fn id(self) -> &'static str {
        match self {
            Figure::F3a => "3a",
            Figure::F3b => "3b",
            Figure::F3c => "3c",
            Figure::F3d => "3d",
            Figure::F5a => "5a",
            Figure::F5b => "5b",
        }
    }
}

fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn log(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Pairs per pulse leaving the passive section.
fn pair_at_passive_output(s: &Scenario) -> anyhow::Result<f64> {
    let eta = s.chain.downstream_transmittance();
    Ok(s.predict()?.mu_pair_generated * eta * eta)
}

fn car(s: &Scenario) -> anyhow::Result<f64> {
    Ok(car_estimate(&s.chain, &s.pump)?)
}

fn powers() -> Vec<f64> {
    log(1e-3, 0.3, 121)
}

pub fn build(figure: Figure) -> anyhow::Result<ResultTable> {
    let table = match figure {
        Figure::F3a => {
            let mut t = ResultTable::new(["l_siox_cm", "mu_pair_out"]);
            let base = presets::waveguide("i")?;
            for l in lin(0.5, 5.0, 91) {
                let s = pairchain::SweepVariable::SioxLength.apply(&base, l * 1e-2)?;
                t.push(vec![num(l), num(pair_at_passive_output(&s)?)]);
            }
            t
        }
        Figure::F3b => {
            let mut t = ResultTable::new(["l_si_cm", "mu_pair_out", "mu_pair_generated"]);
            let base = presets::waveguide("i")?;
            for l in lin(0.3, 6.0, 115) {
                let s = pairchain::SweepVariable::SiLength.apply(&base, l * 1e-2)?;
                t.push(vec![num(l), num(pair_at_passive_output(&s)?), num(s.predict()?.mu_pair_generated)]);
            }
            t
        }
        Figure::F3c => {
            let mut t = ResultTable::new(["pp_mw", "mu_signal", "mu_sfwm", "mu_noise"]);
            let base = presets::waveguide("i")?;
            let noise = base.chain.noise.signal;
            for pp in powers() {
                let p = base.with_peak_power(pp).predict()?;
                let n = noise.photons_per_pulse(pp);
                t.push(vec![num(pp * 1e3), num(p.mu_signal), num(p.mu_signal - n), num(n)]);
            }
            t
        }
        Figure::F3d => {
            let mut t = ResultTable::new(["pp_mw", "car_i", "car_v", "car_vi"]);
            let wgs = [presets::waveguide("i")?, presets::waveguide("v")?, presets::waveguide("vi")?];
            for pp in powers() {
                let mut row = vec![num(pp * 1e3)];
                for w in &wgs {
                    row.push(num(car(&w.with_peak_power(pp))?));
                }
                t.push(row);
            }
            t
        }
        Figure::F5a => {
            let mut t = ResultTable::new(["pp_mw", "mu_pair_generated", "mu_pair_after_awg"]);
            let base = presets::awg_device();
            let awg = presets::device_awg_spec().peak_transmittance();
            for pp in powers() {
                let mu = base.with_peak_power(pp).predict()?.mu_pair_generated;
                t.push(vec![num(pp * 1e3), num(mu), num(mu * awg * awg)]);
            }
            t
        }
        Figure::F5b => {
            let mut t = ResultTable::new(["pp_mw", "car", "car_no_awg_loss", "car_no_awg_loss_dark_20hz"]);
            let base = presets::awg_device();
            let mut lossless = base.clone();
            if let Demux::Awg { spec, .. } = &mut lossless.chain.demux {
                spec.insertion_loss_db = 0.0;
            }
            let mut quiet = lossless.clone();
            quiet.chain.detectors.signal.dark_rate = 20.0;
            quiet.chain.detectors.idler.dark_rate = 20.0;
            for pp in powers() {
                t.push(vec![
                    num(pp * 1e3),
                    num(car(&base.with_peak_power(pp))?),
                    num(car(&lossless.with_peak_power(pp))?),
                    num(car(&quiet.with_peak_power(pp))?),
                ]);
            }
            t
        }
    };
    let mut t = table;
    header(&mut t, "reproduce", None);
    t.meta("figure", figure.id());
    Ok(t)
}

pub fn run(figure: Figure, out: Option<&Path>) -> anyhow::Result<()> {
    emit(&build(figure)?, out)
}
