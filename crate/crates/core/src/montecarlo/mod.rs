//! Per-pulse Monte Carlo of pair generation, loss, noise, dark counts and
//! detector dead time.
//!
//! Pulses are processed in fixed-length blocks, each with its own ChaCha8
//! stream derived from the seed and block index. Block boundaries depend only
//! on the configuration, so results are bit-identical for any worker count.
//! Detectors start every block active and accidentals are only paired within
//! a block; [`CountSummary::accidental_opportunities`] records the exact
//! number of gate pairs examined.

mod sampler;
mod sweep;

pub use sampler::{CountSampler, MAX_MEAN};
pub use sweep::{derive_seed, point_trial, sweep, SweepPoint};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{Channels, ExperimentChain, PairStatistics, PulseModel, PumpConfig};
use crate::error::{invalid, Result};
use crate::scenario::Scenario;

/// Minimum pulses per block.
pub const MIN_BLOCK_PULSES: u64 = 1 << 20;
/// Blocks are at least this many dead times long.
pub const BLOCK_DEAD_TIMES: u64 = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub n_pulses: u64,
    pub seed: u64,
    /// Gate offset at which accidentals are counted.
    pub accidental_offset: u64,
    pub dead_time_enabled: bool,
    pub pair_statistics: PairStatistics,
}

impl TrialConfig {
    pub fn new(n_pulses: u64, seed: u64) -> Self {
        Self {
            n_pulses,
            seed,
            accidental_offset: 1,
            dead_time_enabled: true,
            pair_statistics: PairStatistics::Poisson,
        }
    }

    pub fn without_dead_time(mut self) -> Self {
        self.dead_time_enabled = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses == 0 {
            return invalid("n_pulses must be at least 1");
        }
        if self.accidental_offset == 0 {
            return invalid("accidental offset must be at least 1 gate");
        }
        if self.accidental_offset >= MIN_BLOCK_PULSES {
            return invalid("accidental offset must be shorter than a simulation block");
        }
        self.pair_statistics.validate()
    }
}

/// Raw counts from a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountSummary {
    pub n_pulses: u64,
    pub singles: Channels<u64>,
    /// Same-gate joint clicks.
    pub coincidences: u64,
    /// Signal click at gate t with idler click at gate t + offset.
    pub accidentals: u64,
    /// Number of (t, t + offset) gate pairs examined.
    pub accidental_opportunities: u64,
    pub active_gates: Channels<u64>,
}

/// Binomial standard error of a count out of `trials`.
pub fn count_std_error(count: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = count as f64 / trials as f64;
    (trials as f64 * p * (1.0 - p)).sqrt()
}

impl CountSummary {
    fn merge(mut self, o: &CountSummary) -> Self {
        self.n_pulses += o.n_pulses;
        self.singles.signal += o.singles.signal;
        self.singles.idler += o.singles.idler;
        self.coincidences += o.coincidences;
        self.accidentals += o.accidentals;
        self.accidental_opportunities += o.accidental_opportunities;
        self.active_gates.signal += o.active_gates.signal;
        self.active_gates.idler += o.active_gates.idler;
        self
    }

    /// Clicks per clock gate.
    pub fn singles_probability(&self) -> Channels<f64> {
        let n = self.n_pulses as f64;
        self.singles.map(|c| c as f64 / n)
    }

    pub fn coincidence_probability(&self) -> f64 {
        self.coincidences as f64 / self.n_pulses as f64
    }

    pub fn accidental_probability(&self) -> f64 {
        if self.accidental_opportunities == 0 {
            return 0.0;
        }
        self.accidentals as f64 / self.accidental_opportunities as f64
    }

    /// Count rates (1/s) at repetition rate `rep_rate`.
    pub fn singles_rate(&self, rep_rate: f64) -> Channels<f64> {
        self.singles_probability().map(|p| p * rep_rate)
    }

    pub fn coincidence_rate(&self, rep_rate: f64) -> f64 {
        self.coincidence_probability() * rep_rate
    }

    pub fn accidental_rate(&self, rep_rate: f64) -> f64 {
        self.accidental_probability() * rep_rate
    }

    pub fn singles_std_error(&self) -> Channels<f64> {
        self.singles.map(|c| count_std_error(c, self.n_pulses))
    }

    pub fn coincidence_std_error(&self) -> f64 {
        count_std_error(self.coincidences, self.n_pulses)
    }

    pub fn accidental_std_error(&self) -> f64 {
        count_std_error(self.accidentals, self.accidental_opportunities)
    }

    /// D_c/D_ca with both counts normalised per gate examined; `None` when no
    /// accidentals were seen.
    pub fn car(&self) -> Option<f64> {
        (self.accidentals > 0).then(|| self.coincidence_probability() / self.accidental_probability())
    }

    /// Poisson standard error of [`car`](Self::car): CAR·sqrt(1/D_c + 1/D_ca).
    pub fn car_std_error(&self) -> Option<f64> {
        let car = self.car()?;
        let dc = self.coincidences.max(1) as f64;
        Some(car * (1.0 / dc + 1.0 / self.accidentals as f64).sqrt())
    }
}

/// Fraction of clock gates in which each detector was armed.
pub fn measured_gate_duty(summary: &CountSummary) -> Channels<f64> {
    let n = summary.n_pulses as f64;
    summary.active_gates.map(|a| a as f64 / n)
}

/// Per-pulse sampling parameters derived from a [`PulseModel`].
#[derive(Debug, Clone)]
struct PulseSampler {
    pairs: CountSampler,
    /// Cumulative category thresholds for one pair: both photons in band,
    /// else signal only, else idler only.
    joint_fraction: f64,
    signal_only_upper: f64,
    efficiency: Channels<f64>,
    /// Probability of a noise or dark click per gate.
    background: Channels<f64>,
    dead_gates: Channels<u64>,
    offset: usize,
}

impl PulseSampler {
    fn new(model: &PulseModel, trial: &TrialConfig) -> Result<Self> {
        let union = model.sfwm_mean.signal + model.sfwm_mean.idler - model.pair_mean;
        let (joint_fraction, signal_only_upper) = if union > 0.0 {
            let j = model.pair_mean / union;
            (j, j + (model.sfwm_mean.signal - model.pair_mean) / union)
        } else {
            (0.0, 0.0)
        };
        let eta = model.detection_efficiency;
        let background = Channels::new(
            -((-eta.signal * model.noise_mean.signal) + (-model.dark_probability.signal).ln_1p()).exp_m1(),
            -((-eta.idler * model.noise_mean.idler) + (-model.dark_probability.idler).ln_1p()).exp_m1(),
        );
        Ok(Self {
            pairs: CountSampler::new(trial.pair_statistics, union.max(0.0))?,
            joint_fraction,
            signal_only_upper,
            efficiency: eta,
            background,
            dead_gates: if trial.dead_time_enabled { model.dead_gates } else { Channels::default() },
            offset: trial.accidental_offset as usize,
        })
    }

    fn run_block(&self, seed: u64, block: u64, len: u64) -> CountSummary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let mut out = CountSummary { n_pulses: len, ..Default::default() };
        let mut dead_s = 0u64;
        let mut dead_i = 0u64;
        // signal clicks of the last `offset` gates
        let mut history = vec![false; self.offset];
        for t in 0..len as usize {
            let active_s = dead_s == 0;
            let active_i = dead_i == 0;
            dead_s = dead_s.saturating_sub(1);
            dead_i = dead_i.saturating_sub(1);

            let mut hit_s = false;
            let mut hit_i = false;
            let n = self.pairs.sample(rng.random::<f64>());
            for _ in 0..n {
                let u: f64 = rng.random();
                let (has_s, has_i) = if u < self.joint_fraction {
                    (true, true)
                } else if u < self.signal_only_upper {
                    (true, false)
                } else {
                    (false, true)
                };
                if has_s && rng.random::<f64>() < self.efficiency.signal {
                    hit_s = true;
                }
                if has_i && rng.random::<f64>() < self.efficiency.idler {
                    hit_i = true;
                }
            }
            if rng.random::<f64>() < self.background.signal {
                hit_s = true;
            }
            if rng.random::<f64>() < self.background.idler {
                hit_i = true;
            }

            let click_s = active_s && hit_s;
            let click_i = active_i && hit_i;
            out.active_gates.signal += active_s as u64;
            out.active_gates.idler += active_i as u64;
            if click_s {
                out.singles.signal += 1;
                dead_s = self.dead_gates.signal;
            }
            if click_i {
                out.singles.idler += 1;
                dead_i = self.dead_gates.idler;
            }
            if click_s && click_i {
                out.coincidences += 1;
            }
            let slot = t % self.offset;
            if t >= self.offset {
                out.accidental_opportunities += 1;
                if click_i && history[slot] {
                    out.accidentals += 1;
                }
            }
            history[slot] = click_s;
        }
        out
    }
}

/// Pulses per block for a given model; independent of the worker count.
pub fn block_length(model: &PulseModel, trial: &TrialConfig) -> u64 {
    let dead = if trial.dead_time_enabled {
        model.dead_gates.signal.max(model.dead_gates.idler)
    } else {
        0
    };
    MIN_BLOCK_PULSES.max(BLOCK_DEAD_TIMES * dead)
}

/// Simulates `trial.n_pulses` pump pulses through the chain.
pub fn simulate(chain: &ExperimentChain, pump: &PumpConfig, trial: &TrialConfig) -> Result<CountSummary> {
    trial.validate()?;
    Scenario { chain: chain.clone(), pump: *pump }.validate()?;
    let model = PulseModel::new(chain, pump)?;
    let sampler = PulseSampler::new(&model, trial)?;
    let block = block_length(&model, trial);
    let n_blocks = trial.n_pulses.div_ceil(block);
    let parts: Vec<CountSummary> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let len = block.min(trial.n_pulses - b * block);
            sampler.run_block(trial.seed, b, len)
        })
        .collect();
    Ok(parts.iter().fold(CountSummary::default(), |acc, p| acc.merge(p)))
}

/// Warnings for configurations outside the recommended regime.
pub fn warnings(model: &PulseModel) -> Vec<String> {
    let mut w = Vec::new();
    let mu = model.singles_mean();
    for (name, m) in [("signal", mu.signal), ("idler", mu.idler)] {
        if m >= 1.0 {
            w.push(format!("{name} mean of {m:.3} photons/pulse is not small; multi-photon effects dominate"));
        }
    }
    w
}
