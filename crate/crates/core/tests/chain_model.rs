use pairchain::chain::{
    car_estimate, car_linearized, effective_length, gate_duty, pair_generation_rate, pair_rate_from_counts,
    predict, sfwm_quadratic_coefficient,
};
use pairchain::presets;
use pairchain::units::{db_to_linear, db_to_nepers};
use pairchain::{Error, NoiseCoefficients, WaveguideSegment};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn reference_db_values() {
    assert!(rel(db_to_linear(2.1), 0.616_595_001_861_482) < 1e-13);
    assert!(rel(db_to_linear(7.7), 0.169_824_365_246_174) < 1e-13);
    assert!(rel(db_to_linear(3.8), 0.416_869_383_470_335) < 1e-13);
}

#[test]
fn effective_length_reference() {
    let l = effective_length(200.0, 0.0137);
    assert!(rel(l, 0.010_160_140_056_426_91) < 1e-12, "{l}");
    let asym = effective_length(200.0, 10.0);
    assert!(rel(asym, 0.021_714_724_095_162_59) < 1e-12);
    assert_eq!(effective_length(0.0, 0.02), 0.02);
}

#[test]
fn effective_length_series_is_continuous() {
    let l = 0.01;
    // α_Np·L straddles the series threshold
    let a_np = 1e-6 / l;
    let alpha_db = a_np / db_to_nepers(1.0);
    let below = effective_length(alpha_db * (1.0 - 1e-9), l);
    let above = effective_length(alpha_db * (1.0 + 1e-9), l);
    assert!(rel(below, above) < 1e-12);
}

#[test]
fn pair_rate_reference() {
    let sc = presets::waveguide("i").unwrap();
    let seg = sc.chain.nonlinear_segment().unwrap();
    let mu = pair_generation_rate(&sc.pump, seg, 120e9).unwrap();
    assert!(rel(mu, 0.024_892_346_132_253_5) < 1e-10, "{mu}");
    let p = sc.predict().unwrap();
    assert!(rel(p.mu_pair_generated, mu) < 1e-10);
    assert!(rel(p.peak_power, 0.037) < 1e-12);
}

#[test]
fn singles_include_linear_noise() {
    let mut sc = presets::waveguide("i").unwrap();
    sc.chain.noise = pairchain::Channels::both(NoiseCoefficients { n0: 0.0, n1: 0.1 });
    let p = sc.predict().unwrap();
    assert!(rel(p.mu_signal, 0.028_592_346_132_253_5) < 1e-10);
    assert!(rel(p.mu_idler, 0.028_592_346_132_253_5) < 1e-10);
}

#[test]
fn passive_transmittance_reference() {
    let t = WaveguideSegment::passive(0.0293, 180.0).transmittance();
    assert!(rel(t, 0.296_893_028_622_637) < 1e-12);
}

#[test]
fn optimum_length_is_ln2_over_alpha() {
    let pump = presets::pump(0.037);
    let rate = |l: f64| pair_generation_rate(&pump, &WaveguideSegment::nonlinear(l, 200.0, 161.0), 120e9).unwrap();
    let step = 1e-4;
    let (best, _) = (1..=1000)
        .map(|k| k as f64 * step)
        .map(|l| (l, rate(l)))
        .fold((0.0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
    let exact = std::f64::consts::LN_2 / db_to_nepers(200.0);
    assert!(rel(exact, 0.015_051_499_783_199_06) < 1e-12);
    assert!((best - exact).abs() <= step);
}

#[test]
fn passive_loss_scaling_of_pairs_and_singles() {
    let a = presets::waveguide_chain(0.0137, 0.0094);
    let b = presets::waveguide_chain(0.0137, 0.0449);
    let pump = presets::pump(0.037);
    let pa = predict(&a, &pump).unwrap();
    let pb = predict(&b, &pump).unwrap();
    let eta = b.downstream_transmittance() / a.downstream_transmittance();
    assert!(rel(pb.mu_pair_out / pa.mu_pair_out, eta * eta) < 1e-12);
    assert!(rel(pb.mu_signal_out / pa.mu_signal_out, eta) < 1e-12);
    assert!(rel(pb.mu_idler_out / pa.mu_idler_out, eta) < 1e-12);
}

#[test]
fn counts_to_pair_rate() {
    let mu = pair_rate_from_counts(100.0, 10.0, 1e8, 0.05, 0.05).unwrap();
    assert!(rel(mu, 3.6e-4) < 1e-12);
    assert_eq!(pair_rate_from_counts(10.0, 10.0, 1e8, 0.05, 0.05).unwrap(), 0.0);
    assert!(matches!(pair_rate_from_counts(5.0, 10.0, 1e8, 0.05, 0.05), Err(Error::NonPhysical(_))));
    // round trip
    let (r, es, ei, mu) = (1e8, 0.03, 0.07, 2.5e-3);
    let dca = 1234.0;
    let dc = dca + mu * r * es * ei;
    assert!(rel(pair_rate_from_counts(dc, dca, r, es, ei).unwrap(), mu) < 1e-12);
}

#[test]
fn gate_duty_reference_points() {
    // p·D = 10
    assert!(rel(gate_duty(0.01, 10e-6, 1e8), 1.0 / 11.0) < 1e-14);
    // dark counts only: 2.1 kHz over 100 MHz gates, 1000 dead gates
    assert!(rel(gate_duty(2.1e3 / 1e8, 10e-6, 1e8), 0.979_431_929_480_901) < 1e-13);
    assert_eq!(gate_duty(0.3, 0.0, 1e8), 1.0);
}

#[test]
fn zero_power_gives_unit_car() {
    let mut sc = presets::waveguide("i").unwrap();
    sc.pump.average_power = 0.0;
    let car = car_estimate(&sc.chain, &sc.pump).unwrap();
    assert!((car - 1.0).abs() < 1e-12);
    // no dark counts either: CAR undefined
    for d in [&mut sc.chain.detectors.signal, &mut sc.chain.detectors.idler] {
        d.dark_rate = 0.0;
    }
    assert!(matches!(car_estimate(&sc.chain, &sc.pump), Err(Error::Undefined(_))));
}

#[test]
fn dark_counts_dominate_car() {
    let mut sc = presets::waveguide("i").unwrap();
    for d in [&mut sc.chain.detectors.signal, &mut sc.chain.detectors.idler] {
        d.dark_rate = 5e7;
    }
    let car = car_estimate(&sc.chain, &sc.pump).unwrap();
    assert!(car > 1.0 && car < 1.01, "{car}");
}

#[test]
fn exact_and_linear_car_agree_at_low_flux() {
    let sc = presets::waveguide("i").unwrap().with_peak_power(0.005);
    let exact = car_estimate(&sc.chain, &sc.pump).unwrap();
    let lin = car_linearized(&sc.chain, &sc.pump).unwrap();
    assert!(rel(exact, lin) < 1e-3, "{exact} {lin}");
}

#[test]
fn maximum_car_orders_of_magnitude() {
    let max_car = |sc: &pairchain::Scenario| {
        (0..200)
            .map(|k| 1e-4 * 10f64.powf(k as f64 * 3.0 / 199.0))
            .map(|pp| car_estimate(&sc.chain, &sc.with_peak_power(pp).pump).unwrap())
            .fold(0.0, f64::max)
    };
    let wg = max_car(&presets::waveguide("i").unwrap());
    assert!((50.0..200.0).contains(&wg), "{wg}");
    let awg = max_car(&presets::awg_device());
    assert!((15.0..60.0).contains(&awg), "{awg}");
}

fn unimodal(values: &[f64]) -> bool {
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    values[..=peak].windows(2).all(|w| w[1] >= w[0]) && values[peak..].windows(2).all(|w| w[1] <= w[0])
}

proptest! {
    #[test]
    fn pair_rate_is_quadratic(pp in 1e-4f64..1.0, gamma in 1.0f64..500.0, l in 1e-4f64..0.1, alpha in 0.0f64..1000.0) {
        let seg = WaveguideSegment::nonlinear(l, alpha, gamma);
        let a = pair_generation_rate(&presets::pump(pp), &seg, 1e11).unwrap();
        let b = pair_generation_rate(&presets::pump(2.0 * pp), &seg, 1e11).unwrap();
        prop_assert!((b / a - 4.0).abs() < 1e-12);
        let seg2 = WaveguideSegment::nonlinear(l, alpha, 2.0 * gamma);
        let c = sfwm_quadratic_coefficient(&seg2, 1e11, 2e-10) / sfwm_quadratic_coefficient(&seg, 1e11, 2e-10);
        prop_assert!((c - 4.0).abs() < 1e-12);
    }

    #[test]
    fn effective_length_bounds_and_monotonicity(l in 1e-5f64..0.2, alpha in 1e-3f64..2000.0, f in 1.001f64..3.0) {
        let le = effective_length(alpha, l);
        let a_np = db_to_nepers(alpha);
        prop_assert!(le >= 0.0 && le <= l && le <= 1.0 / a_np * (1.0 + 1e-12));
        // strictly monotone until e^(−αL) drops below machine resolution
        if a_np * l * f < 30.0 {
            prop_assert!(effective_length(alpha, l * f) > le);
        } else {
            prop_assert!(effective_length(alpha, l * f) >= le);
        }
        prop_assert!(effective_length(alpha * f, l) < le);
    }

    #[test]
    fn car_is_swap_symmetric(pp in 1e-3f64..0.3, si in 0.005f64..0.05, siox in 0.0f64..0.05, awg in any::<bool>()) {
        let (chain, pump) = if awg {
            let s = presets::awg_device().with_peak_power(pp);
            (s.chain, s.pump)
        } else {
            (presets::waveguide_chain(si, siox), presets::pump(pp))
        };
        let mut swapped = chain.clone();
        swapped.demux = match chain.demux.clone() {
            pairchain::Demux::Filters(f) => pairchain::Demux::Filters(f.swapped()),
            pairchain::Demux::Awg { spec, ports } => pairchain::Demux::Awg { spec, ports: ports.swapped() },
        };
        swapped.post_filters = chain.post_filters.clone().swapped();
        let a = car_estimate(&chain, &pump).unwrap();
        let b = car_estimate(&swapped, &pump).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn car_is_unimodal_in_power(dark in 100.0f64..1e5, n1 in 0.01f64..2.0, l in 0.005f64..0.05) {
        let mut chain = presets::waveguide_chain(l, 0.0094);
        chain.noise = pairchain::Channels::both(NoiseCoefficients { n0: 0.0, n1 });
        for d in [&mut chain.detectors.signal, &mut chain.detectors.idler] {
            d.dark_rate = dark;
        }
        let cars: Vec<f64> = (0..120)
            .map(|k| 1e-5 * 10f64.powf(k as f64 * 5.0 / 119.0))
            .map(|pp| car_estimate(&chain, &presets::pump(pp)).unwrap())
            .collect();
        prop_assert!(unimodal(&cars));
        let peak = cars.iter().cloned().fold(0.0, f64::max);
        prop_assert!(peak > cars[0] && peak > cars[cars.len() - 1]);
    }
}
