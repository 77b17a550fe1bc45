//! Demultiplexer passbands and the pair overlap of anti-correlated photons.
//!
//! A pair generated by spontaneous four-wave mixing satisfies
//! ν_s + ν_i = 2ν_p. With a joint spectrum that is flat over the generation
//! band, the probability that both photons pass their channels is the
//! overlap of the signal passband with the idler passband mirrored about the
//! pump. All integrals are evaluated in the offset variable x = ν − ν_p.

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::units::db_to_linear;

/// Relative accuracy of every passband integral.
pub const QUAD_REL_TOL: f64 = 1e-11;

/// Default generation band, in channel spacings (±4 channels around the pump).
pub const DEFAULT_GENERATION_BAND_SPACINGS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassbandShape {
    Rectangular,
    Gaussian,
}

/// A single transmission window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Passband {
    /// Center frequency (Hz).
    pub center: f64,
    /// Full width at the 3-dB points (Hz).
    pub width: f64,
    /// Peak power transmittance.
    pub peak: f64,
    pub shape: PassbandShape,
    /// Out-of-band floor relative to the peak (0 disables it).
    pub floor: f64,
}

impl Passband {
    /// Transmission normalised to the peak.
    pub fn response(&self, nu: f64) -> f64 {
        self.response_at_offset(nu - self.center)
    }

    fn response_at_offset(&self, dx: f64) -> f64 {
        let half = 0.5 * self.width;
        let r = match self.shape {
            PassbandShape::Rectangular => {
                if dx.abs() <= half {
                    1.0
                } else {
                    0.0
                }
            }
            PassbandShape::Gaussian => {
                let u = dx / half;
                (-(u * u) * std::f64::consts::LN_2).exp()
            }
        };
        r.max(self.floor)
    }

    pub fn transmission(&self, nu: f64) -> f64 {
        self.peak * self.response(nu)
    }

    fn breakpoints_at(&self, center_offset: f64) -> [f64; 3] {
        let half = 0.5 * self.width;
        [center_offset - half, center_offset, center_offset + half]
    }
}

fn check_band(generation_band: f64) -> Result<()> {
    if !(generation_band.is_finite() && generation_band > 0.0) {
        return invalid(format!("generation band must be positive, got {generation_band}"));
    }
    Ok(())
}

/// ∫ T_s(ν_p + x) T_i(ν_p − x) dx over |x| ≤ band/2, in Hz.
pub fn pair_overlap(signal: &Passband, idler: &Passband, pump_freq: f64, band: f64) -> Result<f64> {
    check_band(band)?;
    let ds = signal.center - pump_freq;
    let di = idler.center - pump_freq;
    // idler response at ν_p − x depends on (−x − di); mirror it onto x = −di.
    let mut bps = Vec::with_capacity(6);
    bps.extend(signal.breakpoints_at(ds));
    bps.extend(idler.breakpoints_at(-di));
    let f = |x: f64| signal.response_at_offset(x - ds) * idler.response_at_offset(-x - di);
    let half = 0.5 * band;
    let r = quadrature::integrate(f, -half, half, &bps, QUAD_REL_TOL, 1e-300);
    Ok(signal.peak * idler.peak * r.value)
}

/// ∫ T(ν) dν over the generation band centred on the pump, in Hz.
pub fn band_integral(p: &Passband, pump_freq: f64, band: f64) -> Result<f64> {
    check_band(band)?;
    let d = p.center - pump_freq;
    let f = |x: f64| p.response_at_offset(x - d);
    let half = 0.5 * band;
    let r = quadrature::integrate(f, -half, half, &p.breakpoints_at(d), QUAD_REL_TOL, 1e-300);
    Ok(p.peak * r.value)
}

/// Arrayed waveguide grating with equally spaced, identical channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AwgSpec {
    pub channel_count: u32,
    /// Channel spacing (Hz).
    pub channel_spacing: f64,
    /// 3-dB passband width (Hz).
    pub passband_3db: f64,
    /// Insertion loss at the channel peak (dB, non-negative).
    pub insertion_loss_db: f64,
    /// Frequency of channel 0 (Hz), normally the pump frequency.
    pub center_frequency: f64,
    pub shape: PassbandShape,
    /// Crosstalk floor relative to the channel peak. Zero unless configured.
    pub crosstalk_floor: f64,
}

impl AwgSpec {
    pub fn validate(&self) -> Result<()> {
        if self.channel_count == 0 {
            return invalid("AWG needs at least one channel");
        }
        if !(self.channel_spacing > 0.0 && self.passband_3db > 0.0) {
            return invalid("AWG spacing and passband must be positive");
        }
        if self.passband_3db >= self.channel_spacing {
            return invalid(format!(
                "AWG passband {} Hz must be narrower than the spacing {} Hz",
                self.passband_3db, self.channel_spacing
            ));
        }
        if !(self.insertion_loss_db >= 0.0 && self.insertion_loss_db.is_finite()) {
            return invalid("AWG insertion loss must be a finite non-negative dB value");
        }
        if !(self.center_frequency > 0.0) {
            return invalid("AWG center frequency must be positive");
        }
        if !(0.0..1.0).contains(&self.crosstalk_floor) {
            return invalid("AWG crosstalk floor must lie in [0, 1)");
        }
        Ok(())
    }

    pub fn peak_transmittance(&self) -> f64 {
        db_to_linear(self.insertion_loss_db)
    }

    pub fn default_generation_band(&self) -> f64 {
        DEFAULT_GENERATION_BAND_SPACINGS * self.channel_spacing
    }

    pub fn check_channel(&self, channel: i32) -> Result<()> {
        if channel.unsigned_abs() > self.channel_count / 2 {
            return Err(Error::ChannelOutOfRange { channel, channel_count: self.channel_count });
        }
        Ok(())
    }

    pub fn channel_center(&self, channel: i32) -> f64 {
        self.center_frequency + channel as f64 * self.channel_spacing
    }

    pub fn channel(&self, channel: i32) -> Result<Passband> {
        self.check_channel(channel)?;
        Ok(Passband {
            center: self.channel_center(channel),
            width: self.passband_3db,
            peak: self.peak_transmittance(),
            shape: self.shape,
            floor: self.crosstalk_floor,
        })
    }
}

/// Transmittance of output port `channel` at optical frequency `nu`.
pub fn channel_transmission(awg: &AwgSpec, channel: i32, nu: f64) -> Result<f64> {
    Ok(awg.channel(channel)?.transmission(nu))
}

/// Probability that both photons of a pair drawn uniformly from
/// `generation_band` pass ports `ch_s` and `ch_i` (insertion loss included).
pub fn pair_transmittance(
    awg: &AwgSpec,
    ch_s: i32,
    ch_i: i32,
    pump_freq: f64,
    generation_band: f64,
) -> Result<f64> {
    let s = awg.channel(ch_s)?;
    let i = awg.channel(ch_i)?;
    Ok(pair_overlap(&s, &i, pump_freq, generation_band)? / generation_band)
}

/// Equivalent rectangular bandwidth seen by pairs, with the peak insertion
/// losses factored out. Uses the default generation band.
pub fn effective_pair_bandwidth(awg: &AwgSpec, ch_s: i32, ch_i: i32, pump_freq: f64) -> Result<f64> {
    let band = awg.default_generation_band();
    let t = pair_transmittance(awg, ch_s, ch_i, pump_freq, band)?;
    let peak = awg.peak_transmittance();
    Ok(t * band / (peak * peak))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NU_P: f64 = 193.2778e12;

    pub(crate) fn device_awg_spec(shape: PassbandShape, loss: f64) -> AwgSpec {
        AwgSpec {
            channel_count: 16,
            channel_spacing: 200e9,
            passband_3db: 80e9,
            insertion_loss_db: loss,
            center_frequency: NU_P,
            shape,
            crosstalk_floor: 0.0,
        }
    }

    #[test]
    fn peak_and_half_power_points() {
        let awg = device_awg_spec(PassbandShape::Gaussian, 7.7);
        let c = awg.channel_center(3);
        let peak = channel_transmission(&awg, 3, c).unwrap();
        assert!((peak - 0.169_824_365_246_174_4).abs() < 1e-15);
        for dx in [-40e9, 40e9] {
            let t = channel_transmission(&awg, 3, c + dx).unwrap();
            assert!((t / peak - 0.5).abs() < 1e-14);
        }
        // 2^-25 at one full spacing
        let t = channel_transmission(&awg, 3, c + 200e9).unwrap();
        assert!((t / peak - 2.980_232_238_769_531e-8).abs() < 1e-20);
        assert!(t / peak <= 1e-3);
    }

    #[test]
    fn channel_range_is_enforced() {
        let awg = device_awg_spec(PassbandShape::Gaussian, 7.7);
        assert!(awg.channel(8).is_ok());
        assert!(awg.channel(-8).is_ok());
        assert!(matches!(awg.channel(9), Err(Error::ChannelOutOfRange { .. })));
        assert!(channel_transmission(&awg, -9, NU_P).is_err());
    }

    #[test]
    fn validation_rejects_overlapping_passbands() {
        let mut awg = device_awg_spec(PassbandShape::Gaussian, 7.7);
        awg.passband_3db = 250e9;
        assert!(awg.validate().is_err());
        awg.passband_3db = 80e9;
        awg.insertion_loss_db = -1.0;
        assert!(awg.validate().is_err());
    }

    #[test]
    fn mirrored_rectangles_overlap_exactly() {
        let awg = device_awg_spec(PassbandShape::Rectangular, 0.0);
        let band = awg.default_generation_band();
        let t = pair_transmittance(&awg, 3, -3, NU_P, band).unwrap();
        assert!((t - 80e9 / band).abs() / t < 1e-12);
        let b = effective_pair_bandwidth(&awg, 3, -3, NU_P).unwrap();
        assert!((b - 80e9).abs() / 80e9 < 1e-12);
    }

    #[test]
    fn mirrored_gaussians_match_closed_form() {
        // ∫ 2^(-2(2x/w)²) dx = w·sqrt(π/(8 ln 2)) = 60.21534782314020 GHz for w = 80 GHz
        let awg = device_awg_spec(PassbandShape::Gaussian, 7.7);
        let b = effective_pair_bandwidth(&awg, 3, -3, NU_P).unwrap();
        assert!((b - 60.215_347_823_140_2e9).abs() / b < 1e-9, "{b}");
    }

    #[test]
    fn mismatched_channels_barely_overlap() {
        let awg = device_awg_spec(PassbandShape::Gaussian, 7.7);
        let band = awg.default_generation_band();
        let sym = pair_transmittance(&awg, 3, -3, NU_P, band).unwrap();
        let asym = pair_transmittance(&awg, 3, -2, NU_P, band).unwrap();
        // gaussians offset by one spacing d overlap with factor 2^(-2(d/w)²)
        let ratio = asym / sym;
        assert!((ratio - 2f64.powf(-12.5)).abs() / ratio < 1e-8, "{ratio}");
        let b = effective_pair_bandwidth(&awg, 3, -2, NU_P).unwrap();
        assert!(b < 1.1e7, "{b}");
    }

    #[test]
    fn loss_factors_out() {
        let lossy = device_awg_spec(PassbandShape::Gaussian, 7.7);
        let clean = device_awg_spec(PassbandShape::Gaussian, 0.0);
        let band = lossy.default_generation_band();
        let a = pair_transmittance(&lossy, 3, -3, NU_P, band).unwrap();
        let b = pair_transmittance(&clean, 3, -3, NU_P, band).unwrap();
        assert!((b / a - 10f64.powf(2.0 * 7.7 / 10.0)).abs() / (b / a) < 1e-12);
    }

    #[test]
    fn single_channel_band_integral() {
        // ∫ 2^(-(2x/w)²) dx = (w/2)·sqrt(π/ln 2)
        let awg = device_awg_spec(PassbandShape::Gaussian, 0.0);
        let ch = awg.channel(3).unwrap();
        let v = band_integral(&ch, NU_P, 4.0 * awg.default_generation_band()).unwrap();
        let exact = 40e9 * (std::f64::consts::PI / std::f64::consts::LN_2).sqrt();
        assert!((v - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn crosstalk_floor_adds_background() {
        let mut awg = device_awg_spec(PassbandShape::Gaussian, 0.0);
        awg.crosstalk_floor = 1e-3;
        let t = channel_transmission(&awg, 0, NU_P + 100e9 * 7.0).unwrap();
        assert!((t - 1e-3).abs() < 1e-18);
    }
}
