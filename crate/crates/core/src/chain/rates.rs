use super::{Channels, ExperimentChain, PairStatistics, PumpConfig, SegmentKind, WaveguideSegment};
use crate::awg;
use crate::error::{invalid, Error, Result};
use crate::units::{db_to_linear, db_to_nepers};

/// Below this value of α_Np·L the effective length uses its series expansion.
const SERIES_THRESHOLD: f64 = 1e-6;

/// Loss-weighted interaction length (1 − e^(−αL))/α, with α in dB/m.
pub fn effective_length(alpha_db_per_m: f64, length: f64) -> f64 {
    let a = db_to_nepers(alpha_db_per_m);
    let x = a * length;
    if x < SERIES_THRESHOLD {
        length - a * length * length / 2.0
    } else {
        -(-x).exp_m1() / a
    }
}

/// Peak power P/(R·Δt) of the coupled pump.
pub fn peak_power(pump: &PumpConfig) -> Result<f64> {
    let duty = pump.duty_cycle();
    if !(duty > 0.0 && duty.is_finite()) {
        return Err(Error::InvalidConfig(format!("pump duty cycle must be positive, got {duty}")));
    }
    if duty > 1.0 + 1e-12 {
        return Err(Error::InvalidConfig(format!("pump duty cycle {duty} exceeds 1")));
    }
    Ok(pump.average_power / duty)
}

/// a₂ in μ = a₂·P_p²: Δν·Δt·(γ·L_eff)²·η².
pub fn sfwm_quadratic_coefficient(seg: &WaveguideSegment, bandwidth: f64, pulse_fwhm: f64) -> f64 {
    let l_eff = effective_length(seg.loss_db_per_m, seg.length);
    let g = seg.gamma * l_eff;
    bandwidth * pulse_fwhm * g * g * seg.transmittance().powi(2)
}

/// Pairs per pulse in bandwidth `bandwidth` at the output of the nonlinear
/// segment: Δν·Δt·(γ·P_p·L_eff)²·η².
pub fn pair_generation_rate(pump: &PumpConfig, seg: &WaveguideSegment, bandwidth: f64) -> Result<f64> {
    if seg.kind != SegmentKind::Nonlinear {
        return invalid("pair generation needs a nonlinear segment");
    }
    let pp = peak_power(pump)?;
    Ok(sfwm_quadratic_coefficient(seg, bandwidth, pump.pulse_fwhm) * pp * pp)
}

/// Optical transmittance per channel from the nonlinear-segment output to the
/// detector input (excludes quantum efficiency and gating).
pub fn chain_transmittances(chain: &ExperimentChain) -> Result<Channels<f64>> {
    let common = db_to_linear(chain.coupling_loss_db_per_facet) * chain.downstream_transmittance();
    let peaks = chain.demux.passbands()?.map(|p| p.peak);
    let post = chain
        .post_filters
        .as_ref()
        .map(|fs| fs.iter().map(|f| f.peak_transmittance()).product::<f64>());
    Ok(Channels::new(common * peaks.signal * post.signal, common * peaks.idler * post.idler))
}

/// Equivalent rectangular bandwidths of the demultiplexer (Hz), peak
/// transmittances factored out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainBandwidths {
    /// Bandwidth over which both photons of a pair pass their channels.
    pub pair: f64,
    /// Bandwidth of each channel seen by single photons.
    pub single: Channels<f64>,
}

impl ChainBandwidths {
    pub fn of(chain: &ExperimentChain, pump_freq: f64) -> Result<Self> {
        let pb = chain.demux.passbands()?;
        let band = chain.generation_band_or_default(pump_freq);
        let pair = awg::pair_overlap(&pb.signal, &pb.idler, pump_freq, band)? / (pb.signal.peak * pb.idler.peak);
        let s = awg::band_integral(&pb.signal, pump_freq, band)? / pb.signal.peak;
        let i = awg::band_integral(&pb.idler, pump_freq, band)? / pb.idler.peak;
        Ok(Self { pair, single: Channels::new(s, i) })
    }
}

/// Per-pulse means and per-gate detector parameters of a chain, the common
/// input of the analytic model and the Monte Carlo oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseModel {
    /// Peak power inside the nonlinear segment (W).
    pub peak_power: f64,
    /// Pairs per pulse with both photons inside their channel bands.
    pub pair_mean: f64,
    /// SFWM photons per pulse inside each channel band (includes `pair_mean`).
    pub sfwm_mean: Channels<f64>,
    /// Noise photons per pulse per channel.
    pub noise_mean: Channels<f64>,
    pub optical_transmittance: Channels<f64>,
    /// Optical transmittance × quantum efficiency.
    pub detection_efficiency: Channels<f64>,
    pub dark_probability: Channels<f64>,
    pub dead_gates: Channels<u64>,
    pub bandwidths: ChainBandwidths,
    pub repetition_rate: f64,
}

/// Click statistics for one gate in which both detectors are active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveGateProbabilities {
    pub click: Channels<f64>,
    pub joint: f64,
    /// ln P(no click) per channel.
    pub ln_no_click: Channels<f64>,
    /// ln P(no click in either) − ln P(no s) − ln P(no i).
    pub correlation_exponent: f64,
}

impl PulseModel {
    pub fn new(chain: &ExperimentChain, pump: &PumpConfig) -> Result<Self> {
        chain.validate()?;
        pump.validate()?;
        let seg = chain.nonlinear_segment()?;
        let pp = peak_power(pump)? * chain.upstream_transmittance();
        let nu_p = pump.frequency();
        let bandwidths = ChainBandwidths::of(chain, nu_p)?;
        let density = sfwm_quadratic_coefficient(seg, 1.0, pump.pulse_fwhm) * pp * pp;
        let optical = chain_transmittances(chain)?;
        let det = &chain.detectors;
        Ok(Self {
            peak_power: pp,
            pair_mean: density * bandwidths.pair,
            sfwm_mean: bandwidths.single.map(|b| density * b),
            noise_mean: chain.noise.map(|n| n.photons_per_pulse(pp)),
            optical_transmittance: optical,
            detection_efficiency: Channels::new(
                optical.signal * det.signal.quantum_efficiency,
                optical.idler * det.idler.quantum_efficiency,
            ),
            dark_probability: det.map(|d| d.dark_probability()),
            dead_gates: det.map(|d| d.dead_gates()),
            bandwidths,
            repetition_rate: pump.repetition_rate,
        })
    }

    /// Photons per pulse per channel at the nonlinear-segment output.
    pub fn singles_mean(&self) -> Channels<f64> {
        Channels::new(
            self.sfwm_mean.signal + self.noise_mean.signal,
            self.sfwm_mean.idler + self.noise_mean.idler,
        )
    }

    /// Exact threshold-detector probabilities for a gate in which both
    /// detectors are active.
    pub fn active_gate(&self, stats: PairStatistics) -> ActiveGateProbabilities {
        let eta = self.detection_efficiency;
        let x_s = eta.signal * self.sfwm_mean.signal;
        let x_i = eta.idler * self.sfwm_mean.idler;
        let x_si = x_s + x_i - eta.signal * eta.idler * self.pair_mean;
        let ln_bg = |e: f64, nu: f64, pd: f64| -e * nu + (-pd).ln_1p();
        let ln0_s = stats.ln_no_detection(x_s)
            + ln_bg(eta.signal, self.noise_mean.signal, self.dark_probability.signal);
        let ln0_i = stats.ln_no_detection(x_i)
            + ln_bg(eta.idler, self.noise_mean.idler, self.dark_probability.idler);
        let corr = (stats.ln_no_detection(x_si) - stats.ln_no_detection(x_s) - stats.ln_no_detection(x_i)).max(0.0);
        let p_s = -ln0_s.exp_m1();
        let p_i = -ln0_i.exp_m1();
        // 1 − P0s − P0i + P00 = p_s·p_i + P0s·P0i·(e^corr − 1)
        let joint = p_s * p_i + (ln0_s + ln0_i).exp() * corr.exp_m1();
        ActiveGateProbabilities {
            click: Channels::new(p_s, p_i),
            joint,
            ln_no_click: Channels::new(ln0_s, ln0_i),
            correlation_exponent: corr,
        }
    }
}

/// Photons per pulse in each channel band at the nonlinear-segment output:
/// SFWM plus `n0 + n1·P_p` noise.
pub fn singles_rate(chain: &ExperimentChain, pump: &PumpConfig) -> Result<Channels<f64>> {
    Ok(PulseModel::new(chain, pump)?.singles_mean())
}

/// Active-gate fraction of a detector that is blind for
/// `round(dead_time·gate_rate)` gates after each click.
///
/// `p_click` is the click probability of an active gate. In steady state the
/// active fraction η satisfies η = 1 − (η·p_click)·D, whose solution is
/// 1/(1 + p_click·D).
pub fn gate_duty(p_click: f64, dead_time: f64, gate_rate: f64) -> f64 {
    let dead_gates = (dead_time * gate_rate).round();
    1.0 / (1.0 + p_click.clamp(0.0, 1.0) * dead_gates)
}

/// Click probability per clock gate for each detector, including dead-time
/// gating.
pub fn click_probabilities(chain: &ExperimentChain, pump: &PumpConfig) -> Result<Channels<f64>> {
    let p = predict(chain, pump)?;
    Ok(Channels::new(p.p_click_signal, p.p_click_idler))
}

/// Coincidence-to-accidental ratio p_coincidence/p_accidental.
pub fn car_estimate(chain: &ExperimentChain, pump: &PumpConfig) -> Result<f64> {
    predict(chain, pump)?
        .car
        .ok_or_else(|| Error::Undefined("CAR: a channel never clicks".into()))
}

/// The small-probability form η_s·η_i·μ_c/((η_s·μ_s + p_d)(η_i·μ_i + p_d)) + 1.
pub fn car_linearized(chain: &ExperimentChain, pump: &PumpConfig) -> Result<f64> {
    let m = PulseModel::new(chain, pump)?;
    let eta = m.detection_efficiency;
    let mu = m.singles_mean();
    let p_s = eta.signal * mu.signal + m.dark_probability.signal;
    let p_i = eta.idler * mu.idler + m.dark_probability.idler;
    for (what, p) in [("signal click", p_s), ("idler click", p_i)] {
        if p > 1.0 {
            return Err(Error::InvalidProbability { what, value: p });
        }
        if p <= 0.0 {
            return Err(Error::Undefined(format!("CAR: {what} probability is zero")));
        }
    }
    Ok(eta.signal * eta.idler * m.pair_mean / (p_s * p_i) + 1.0)
}

/// Net pairs per pulse from raw and accidental coincidence rates:
/// (D_c − D_ca)/(R·η_s·η_i).
pub fn pair_rate_from_counts(
    coincidence_rate: f64,
    accidental_rate: f64,
    repetition_rate: f64,
    eta_signal: f64,
    eta_idler: f64,
) -> Result<f64> {
    if accidental_rate < 0.0 {
        return Err(Error::NonPhysical(format!("negative accidental rate {accidental_rate}")));
    }
    if coincidence_rate < accidental_rate {
        return Err(Error::NonPhysical(format!(
            "coincidence rate {coincidence_rate} below accidental rate {accidental_rate}"
        )));
    }
    let denom = repetition_rate * eta_signal * eta_idler;
    if !(denom > 0.0) {
        return invalid("repetition rate and efficiencies must be positive");
    }
    Ok((coincidence_rate - accidental_rate) / denom)
}

/// Analytic rates for one chain/pump configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePrediction {
    /// Pairs per pulse at the nonlinear-segment output (in the pair band).
    pub mu_pair_generated: f64,
    /// Pairs per pulse with both photons reaching the detectors.
    pub mu_pair_out: f64,
    /// Photons per pulse per channel at the nonlinear-segment output.
    pub mu_signal: f64,
    pub mu_idler: f64,
    /// Photons per pulse per channel reaching the detectors.
    pub mu_signal_out: f64,
    pub mu_idler_out: f64,
    /// Click probabilities per clock gate (dead time included).
    pub p_click_signal: f64,
    pub p_click_idler: f64,
    /// Same-gate joint click probability per clock gate.
    pub p_coincidence: f64,
    /// Offset-gate joint click probability per clock gate.
    pub p_accidental: f64,
    /// `None` when either channel never clicks.
    pub car: Option<f64>,
    pub gate_duty: Channels<f64>,
    pub detection_efficiency: Channels<f64>,
    pub peak_power: f64,
}

pub fn predict(chain: &ExperimentChain, pump: &PumpConfig) -> Result<RatePrediction> {
    predict_with(chain, pump, PairStatistics::Poisson)
}

pub fn predict_with(chain: &ExperimentChain, pump: &PumpConfig, stats: PairStatistics) -> Result<RatePrediction> {
    stats.validate()?;
    let m = PulseModel::new(chain, pump)?;
    let g = m.active_gate(stats);
    let det = &chain.detectors;
    let duty = Channels::new(
        gate_duty(g.click.signal, det.signal.dead_time, det.signal.gate_rate),
        gate_duty(g.click.idler, det.idler.dead_time, det.idler.gate_rate),
    );
    let both_active = duty.signal * duty.idler;
    let p_acc = both_active * g.click.signal * g.click.idler;
    let p_coinc = both_active * g.joint;
    let car = if g.click.signal > 0.0 && g.click.idler > 0.0 {
        let excess = (g.ln_no_click.signal + g.ln_no_click.idler).exp() * g.correlation_exponent.exp_m1();
        Some(1.0 + excess / (g.click.signal * g.click.idler))
    } else {
        None
    };
    let mu = m.singles_mean();
    let opt = m.optical_transmittance;
    let out = Channels::new(mu.signal * opt.signal, mu.idler * opt.idler);
    for (what, p) in [("signal click", g.click.signal), ("idler click", g.click.idler), ("coincidence", g.joint)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability { what, value: p });
        }
    }
    Ok(RatePrediction {
        mu_pair_generated: m.pair_mean,
        mu_pair_out: m.pair_mean * opt.signal * opt.idler,
        mu_signal: mu.signal,
        mu_idler: mu.idler,
        mu_signal_out: out.signal,
        mu_idler_out: out.idler,
        p_click_signal: duty.signal * g.click.signal,
        p_click_idler: duty.idler * g.click.idler,
        p_coincidence: p_coinc,
        p_accidental: p_acc,
        car,
        gate_duty: duty,
        detection_efficiency: m.detection_efficiency,
        peak_power: m.peak_power,
    })
}
