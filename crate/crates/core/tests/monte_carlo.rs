//! Statistical checks of the sensing and link simulators against closed forms.

use num_complex::Complex64;
use ofdm_pilot::comm::{
    ber_experiment, equalize_and_demod, estimate_channel, BerConfig, ChannelSampler, MultipathChannel,
    PathTap, RayleighProfile,
};
use ofdm_pilot::ofdm::{complex_gaussian, noise_variance};
use ofdm_pilot::qam::{modulate, random_bits};
use ofdm_pilot::sensing::{
    measure_dpi_floor, rmse_experiment, DataModulation, RmseConfig, SensingReference, SingleTarget,
};
use ofdm_pilot::{hybrid_design, make_uniform_comb, OfdmGrid, OptimizerConfig, PilotPattern, SidelobeWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn anchored_hybrid() -> (OfdmGrid, PilotPattern) {
    let grid = OfdmGrid::new(512, 32).unwrap();
    let cfg = OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, 32) };
    (grid, hybrid_design(&grid, &cfg).unwrap().0)
}

#[test]
fn rayleigh_tone_magnitude_passes_ks() {
    let grid = OfdmGrid::new(64, 8).unwrap();
    let sampler = RayleighProfile::new(8, 8, grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut r: Vec<f64> = (0..10_000)
        .map(|_| sampler.sample(&mut rng).frequency_response(64)[5].norm())
        .collect();
    r.sort_by(f64::total_cmp);
    // unit-power Rayleigh: F(r) = 1 - exp(-r^2)
    let n = r.len() as f64;
    let d = r
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.628 / n.sqrt(), "KS statistic {d}");
}

#[test]
fn gray_16qam_awgn_ber_matches_theory() {
    let n = 256;
    let pattern = make_uniform_comb(&OfdmGrid::new(n, 0).unwrap(), 16).unwrap();
    let data_tones: Vec<usize> = (0..n).filter(|&k| !pattern.contains(k)).collect();
    let var = noise_variance(1.0, 10.0);
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut errors, mut total) = (0usize, 0usize);
    for _ in 0..400 {
        let bits = random_bits(&mut rng, data_tones.len() * 4);
        let mut rx = vec![Complex64::default(); n];
        for (&k, s) in data_tones.iter().zip(modulate(&bits)) {
            rx[k] = s + complex_gaussian(&mut rng, var);
        }
        let out = equalize_and_demod(&rx, &ones, &pattern).unwrap();
        errors += out.iter().zip(&bits).filter(|(a, b)| a != b).count();
        total += bits.len();
    }
    let s = 1.0 / 10f64.sqrt();
    let sigma = (var / 2.0).sqrt();
    let theory = (3.0 * q(s / sigma) + 2.0 * q(3.0 * s / sigma) - q(5.0 * s / sigma)) / 4.0;
    let ber = errors as f64 / total as f64;
    let ci = 4.0 * (theory / total as f64).sqrt();
    assert!((ber - theory).abs() < ci, "ber {ber} theory {theory}");
}

#[test]
fn conjugated_estimate_scrambles_bits() {
    let n = 128;
    let pattern = make_uniform_comb(&OfdmGrid::new(n, 0).unwrap(), 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let data_tones: Vec<usize> = (0..n).filter(|&k| !pattern.contains(k)).collect();
    let bits = random_bits(&mut rng, data_tones.len() * 4 * 50);
    let mut errors = 0;
    for chunk in bits.chunks(data_tones.len() * 4) {
        let mut rx = vec![Complex64::default(); n];
        for (&k, s) in data_tones.iter().zip(modulate(chunk)) {
            rx[k] = h[k] * s;
        }
        let wrong: Vec<Complex64> = h.iter().map(|x| x.conj()).collect();
        let out = equalize_and_demod(&rx, &wrong, &pattern).unwrap();
        errors += out.iter().zip(chunk).filter(|(a, b)| a != b).count();
    }
    let ber = errors as f64 / bits.len() as f64;
    assert!((0.45..0.55).contains(&ber), "{ber}");
}

#[test]
fn comb_interpolation_error_within_curvature_bound() {
    let n = 512;
    let grid = OfdmGrid::new(n, 32).unwrap();
    let comb = make_uniform_comb(&grid, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let taps: Vec<PathTap> = (0..4)
            .map(|_| PathTap { gain: complex_gaussian(&mut rng, 0.25), delay: rng.random_range(0..4) })
            .collect();
        let ch = MultipathChannel::new(taps.clone(), &grid).unwrap();
        let h = ch.frequency_response(n);
        let est = estimate_channel(&h, &comb, 1.0).unwrap();
        // linear interpolation over a gap g: |err| <= g^2/8 * max|H''|, per component
        let curvature: f64 = taps
            .iter()
            .map(|t| t.gain.norm() * (2.0 * std::f64::consts::PI * t.delay as f64 / n as f64).powi(2))
            .sum();
        let bound = std::f64::consts::SQRT_2 * 16.0 * 16.0 / 8.0 * curvature + 1e-12;
        let worst = h.iter().zip(&est).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst <= bound, "{worst} > {bound}");
        for &k in comb.indices() {
            assert!((est[k] - h[k]).norm() < 1e-12);
        }
    }
}

#[test]
fn doubling_n_lowers_dpi_floor_by_3db() {
    let floor = |n: usize| {
        measure_dpi_floor(n, None, 4.0, DataModulation::Qam16, &SidelobeWindow::full(n), 400, 9)
            .unwrap()
            .mean_db
    };
    let drop = floor(512) - floor(1024);
    assert!((drop - 10.0 * 2f64.log10()).abs() < 0.5, "{drop}");
}

#[test]
fn gaussian_data_floor_is_one_over_n() {
    let f = measure_dpi_floor(512, None, 4.0, DataModulation::Gaussian, &SidelobeWindow::full(512), 500, 2)
        .unwrap();
    assert!((f.mean_db - 10.0 * (1.0f64 / 512.0).log10()).abs() < 0.5, "{}", f.mean_db);
}

fn ber_run(pattern: &PilotPattern, grid: OfdmGrid, snr: Vec<f64>, frames: usize) -> Vec<ofdm_pilot::comm::BerPoint> {
    let cfg = BerConfig { snr_grid_db: snr, n_frames: frames, p_ratio: 4.0, seed: 1 };
    ber_experiment(pattern, &RayleighProfile::new(8, 2, grid).unwrap(), &cfg).unwrap()
}

#[test]
fn anchored_ber_is_monotone() {
    let (grid, hybrid) = anchored_hybrid();
    let pts = ber_run(&hybrid, grid, (0..=10).map(|i| 4.0 * i as f64).collect(), 500);
    for w in pts.windows(2) {
        let sigma = (w[0].ber / w[0].total_bits as f64).sqrt();
        assert!(w[1].ber <= w[0].ber + 2.0 * sigma, "{:?}", w);
    }
}

#[test]
fn anchored_ber_vanishes_at_high_snr() {
    let (grid, hybrid) = anchored_hybrid();
    let pts = ber_run(&hybrid, grid, vec![40.0, 60.0], 2000);
    assert!(pts[1].ber < 1e-4, "{:?}", pts);
    assert!(pts[1].ber < pts[0].ber / 2.0, "{:?}", pts);
}

#[test]
fn clustered_pattern_hits_a_floor() {
    let (grid, hybrid) = anchored_hybrid();
    let clustered = PilotPattern::free((0..32).collect(), 512).unwrap();
    let c = ber_run(&clustered, grid, vec![30.0, 40.0], 500);
    let h = ber_run(&hybrid, grid, vec![40.0], 500);
    assert!(c[1].ber > 10.0 * h[0].ber);
    assert!(c[1].ber > 0.5 * c[0].ber, "no floor: {:?}", c);
}

#[test]
fn hybrid_rmse_decreases_with_snr() {
    let (_, hybrid) = anchored_hybrid();
    let cfg = RmseConfig {
        snr_grid_db: (-6..=2).map(|i| 5.0 * i as f64).collect(),
        m_symbols: 4,
        n_trials: 200,
        p_ratio: 4.0,
        data: DataModulation::Qam16,
        reference: SensingReference::PilotOnly,
        seed: 3,
    };
    let pts = rmse_experiment(&hybrid, &SingleTarget::half_grid(512), &cfg).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].rmse_samples <= w[0].rmse_samples + 1.0, "{:?}", pts);
    }
    assert!(pts[0].rmse_samples > 10.0);
    assert_eq!(pts.last().unwrap().rmse_samples, 0.0);
}
