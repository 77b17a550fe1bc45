use pairchain::awg::{
    band_integral, channel_transmission, effective_pair_bandwidth, pair_transmittance, AwgSpec, PassbandShape,
};
use proptest::prelude::*;

const NU_P: f64 = 193.2778e12;

fn awg(shape: PassbandShape, loss: f64) -> AwgSpec {
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

// dense trapezoid over ν, written directly from the channel transmission
fn trapezoid_pair(a: &AwgSpec, s: i32, i: i32, band: f64) -> f64 {
    let n = 400_000;
    let lo = NU_P - band / 2.0;
    let h = band / n as f64;
    let f = |nu: f64| {
        channel_transmission(a, s, nu).unwrap() * channel_transmission(a, i, 2.0 * NU_P - nu).unwrap()
    };
    let mut sum = 0.5 * (f(lo) + f(lo + band));
    for k in 1..n {
        sum += f(lo + k as f64 * h);
    }
    sum * h / band
}

#[test]
fn gaussian_pair_matches_trapezoid() {
    let a = awg(PassbandShape::Gaussian, 7.7);
    let band = a.default_generation_band();
    let q = pair_transmittance(&a, 3, -3, NU_P, band).unwrap();
    let t = trapezoid_pair(&a, 3, -3, band);
    assert!((q - t).abs() / t < 1e-6, "{q} vs {t}");
}

#[test]
fn mirrored_rectangles_give_passband_width() {
    let a = awg(PassbandShape::Rectangular, 0.0);
    let b = effective_pair_bandwidth(&a, 2, -2, NU_P).unwrap();
    assert!((b - 80e9).abs() / 80e9 < 1e-9);
}

#[test]
fn symmetric_ports_maximise_overlap() {
    let a = awg(PassbandShape::Gaussian, 7.7);
    let band = a.default_generation_band();
    for s in 1..=3 {
        let best = pair_transmittance(&a, s, -s, NU_P, band).unwrap();
        for i in -4..=4 {
            if i != -s {
                assert!(pair_transmittance(&a, s, i, NU_P, band).unwrap() < best);
            }
        }
    }
}

#[test]
fn band_integral_of_rectangle() {
    let a = awg(PassbandShape::Rectangular, 3.0);
    let ch = a.channel(1).unwrap();
    let v = band_integral(&ch, NU_P, a.default_generation_band()).unwrap();
    assert!((v / ch.peak - 80e9).abs() < 1e-3);
}

proptest! {
    #[test]
    fn overlap_is_reciprocal(s in -4i32..=4, i in -4i32..=4, gaussian in any::<bool>(), loss in 0.0f64..10.0) {
        let shape = if gaussian { PassbandShape::Gaussian } else { PassbandShape::Rectangular };
        let a = awg(shape, loss);
        let band = a.default_generation_band();
        let x = pair_transmittance(&a, s, i, NU_P, band).unwrap();
        let y = pair_transmittance(&a, i, s, NU_P, band).unwrap();
        prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
    }

    #[test]
    fn loss_scales_pair_transmittance(loss in 0.0f64..15.0) {
        let lossy = awg(PassbandShape::Gaussian, loss);
        let clean = awg(PassbandShape::Gaussian, 0.0);
        let band = clean.default_generation_band();
        let r = pair_transmittance(&clean, 3, -3, NU_P, band).unwrap()
            / pair_transmittance(&lossy, 3, -3, NU_P, band).unwrap();
        prop_assert!((r / 10f64.powf(2.0 * loss / 10.0) - 1.0).abs() < 1e-12);
    }
}
