//! Monostatic OFDM sensing: waveform synthesis, point-target echoes,
//! matched filtering, coherent integration and the range-RMSE harness.
//!
//! Lag convention: [`matched_filter`] computes
//! `r(tau) = sum_m conj(x_ref[m]) y[(m + tau) mod N]`, so an echo delayed by
//! `tau0` samples peaks at lag `tau0`.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ambiguity::to_db;
use crate::error::{Error, Result};
use crate::ofdm::{add_noise, check_len, circular_delay, complex_gaussian, mean_energy, noise_variance, ComplexSequence, UnitaryDft};
use crate::pattern::{PilotPattern, SidelobeWindow};
use crate::qam::QamFrame;
use crate::seed::{trial_rng, STREAM_DPI, STREAM_RMSE};

/// Relative tolerance under which matched-filter magnitudes count as tied.
const TIE_REL: f64 = 1e-9;

/// Payload placed on the non-pilot tones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataModulation {
    /// Empty tones: the pilot-only condition.
    None,
    /// Gray 16-QAM, unit average power.
    #[default]
    Qam16,
    /// Circularly-symmetric complex Gaussian, unit variance.
    Gaussian,
}

impl DataModulation {
    /// Draws `count` data symbols.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Complex64> {
        match self {
            DataModulation::None => vec![Complex64::default(); count],
            DataModulation::Qam16 => QamFrame::random(rng, count).symbols,
            DataModulation::Gaussian => (0..count).map(|_| complex_gaussian(rng, 1.0)).collect(),
        }
    }
}

/// Which copy of the transmitted symbol the radar correlates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SensingReference {
    /// Pilot tones only. Data tones are orthogonal to this reference, so the
    /// output is the pilot ambiguity plus filtered noise.
    #[default]
    PilotOnly,
    /// The complete pilot-plus-data symbol.
    Full,
}

/// One OFDM symbol carrying pilots and data.
#[derive(Debug, Clone, PartialEq)]
pub struct IsacSymbol {
    pub freq: ComplexSequence,
    pub time: ComplexSequence,
    pub pattern: PilotPattern,
    pub pilot_amplitude: f64,
}

impl IsacSymbol {
    /// Time-domain pilot-only component `x_p`.
    pub fn pilot_time(&self) -> ComplexSequence {
        let mut freq = vec![Complex64::default(); self.freq.len()];
        for &k in self.pattern.indices() {
            freq[k] = self.freq[k];
        }
        // the length matches by construction
        UnitaryDft::new(freq.len()).inverse(&freq).expect("length matches")
    }

    pub fn reference(&self, kind: SensingReference) -> ComplexSequence {
        match kind {
            SensingReference::PilotOnly => self.pilot_time(),
            SensingReference::Full => self.time.clone(),
        }
    }
}

/// Builds `x = F^H (a_p s_p + d)`: pilots of amplitude `sqrt(p_ratio)` and
/// zero phase, `data` on the remaining tones in ascending order.
pub fn build_isac_symbol(pattern: &PilotPattern, data: &[Complex64], p_ratio: f64) -> Result<IsacSymbol> {
    if !(p_ratio > 0.0) || !p_ratio.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "pilot-to-data power ratio must be positive, got {p_ratio}"
        )));
    }
    let n = pattern.n();
    let n_data = n - pattern.k();
    if data.len() != n_data {
        return Err(Error::LengthMismatch {
            expected: n_data,
            actual: data.len(),
        });
    }
    let amp = p_ratio.sqrt();
    let mut freq = vec![Complex64::default(); n];
    let mut payload = data.iter();
    for (k, slot) in freq.iter_mut().enumerate() {
        *slot = if pattern.contains(k) {
            Complex64::new(amp, 0.0)
        } else {
            *payload.next().expect("data length checked")
        };
    }
    let time = UnitaryDft::new(n).inverse(&freq)?;
    Ok(IsacSymbol {
        freq,
        time,
        pattern: pattern.clone(),
        pilot_amplitude: amp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub gain: Complex64,
    /// Integer delay in samples.
    pub delay: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene {
    targets: Vec<Target>,
}

impl TargetScene {
    pub fn new(targets: Vec<Target>, n: usize) -> Result<Self> {
        if let Some(t) = targets.iter().find(|t| t.delay >= n) {
            return Err(Error::InvalidConfig(format!(
                "target delay {} outside [0, {n})",
                t.delay
            )));
        }
        Ok(Self { targets })
    }

    pub fn single(delay: usize, n: usize) -> Result<Self> {
        Self::new(
            vec![Target {
                gain: Complex64::new(1.0, 0.0),
                delay,
            }],
            n,
        )
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }
}

/// Sum of delayed, scaled copies of `x`, without noise.
pub fn echo(x: &[Complex64], scene: &TargetScene) -> ComplexSequence {
    let mut y = vec![Complex64::default(); x.len()];
    for t in scene.targets() {
        for (acc, v) in y.iter_mut().zip(circular_delay(x, t.delay)) {
            *acc += t.gain * v;
        }
    }
    y
}

/// `y = sum_l alpha_l J_{tau_l} x + z`, noise calibrated to `SNR = E_s / N_0`
/// with `E_s` the average sample energy of the transmitted symbol.
pub fn synthesize_rx<R: Rng + ?Sized>(
    symbol: &IsacSymbol,
    scene: &TargetScene,
    snr_db: f64,
    rng: &mut R,
) -> Result<ComplexSequence> {
    let n = symbol.time.len();
    if let Some(t) = scene.targets().iter().find(|t| t.delay >= n) {
        return Err(Error::InvalidConfig(format!("target delay {} outside grid", t.delay)));
    }
    let mut y = echo(&symbol.time, scene);
    add_noise(&mut y, noise_variance(mean_energy(&symbol.time), snr_db), rng);
    Ok(y)
}

/// Circular cross-correlation `r(tau) = sum_m conj(x_ref[m]) y[(m + tau) mod N]`,
/// evaluated in the frequency domain.
pub fn matched_filter(y: &[Complex64], x_ref: &[Complex64]) -> Result<ComplexSequence> {
    check_len(y, x_ref.len())?;
    let n = y.len();
    let dft = UnitaryDft::new(n);
    let yf = dft.forward(y)?;
    let xf = dft.forward(x_ref)?;
    let prod: Vec<Complex64> = yf.iter().zip(&xf).map(|(a, b)| b.conj() * a).collect();
    // the unitary inverse carries 1/sqrt(N); the correlation needs sqrt(N)
    let scale = (n as f64).sqrt();
    Ok(dft.inverse(&prod)?.into_iter().map(|v| v * scale).collect())
}

/// Elementwise sum of per-symbol matched-filter outputs.
pub fn coherent_integrate(outputs: &[ComplexSequence]) -> Result<ComplexSequence> {
    let first = outputs
        .first()
        .ok_or_else(|| Error::InvalidConfig("nothing to integrate".into()))?;
    let mut acc = first.clone();
    for r in &outputs[1..] {
        check_len(r, acc.len())?;
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    Ok(acc)
}

/// Lag of the largest `|r|`. Values within a relative `1e-9` of the maximum
/// count as tied and the smallest lag wins.
pub fn estimate_delay(r: &[Complex64]) -> Result<usize> {
    let peak = r.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Numerical("matched-filter output is all zero".into()));
    }
    let floor = peak * (1.0 - TIE_REL);
    Ok(r.iter().position(|v| v.norm_sqr() >= floor).expect("peak exists"))
}

/// Cyclic delay error `min(|e|, N - |e|)`.
pub fn circular_error(estimate: usize, truth: usize, n: usize) -> usize {
    let e = estimate.abs_diff(truth) % n;
    e.min(n - e)
}

/// Stochastic sidelobe floor of data-bearing symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpiFloor {
    /// Mean of `|r(tau)|^2 / |r(0)|^2` over the window and trials, dB.
    pub mean_db: f64,
    /// Mean over trials of the windowed peak of the same ratio, dB.
    pub peak_db: f64,
}

/// Normalized sidelobe statistics of one noiseless symbol correlated
/// against itself: (mean ratio over window, peak ratio over window).
fn self_sidelobes(time: &[Complex64], window: &SidelobeWindow) -> Result<(f64, f64)> {
    let r = matched_filter(time, time)?;
    let n = r.len();
    let main = r[0].norm_sqr();
    if !(main > 0.0) {
        return Err(Error::Numerical("symbol has no energy".into()));
    }
    let mut sum = 0.0;
    let mut peak = 0.0f64;
    let mut count = 0usize;
    for tau in window.lags(n) {
        let v = r[tau].norm_sqr() / main;
        sum += v;
        peak = peak.max(v);
        count += 1;
    }
    Ok((sum / count as f64, peak))
}

/// Measures the sidelobe floor of full-reference matched filtering on
/// noiseless symbols.
///
/// With `pattern = None` every tone carries data (and the mainlobe is the
/// total symbol energy). `data = DataModulation::None` yields the
/// deterministic pilot ambiguity.
pub fn measure_dpi_floor(
    n: usize,
    pattern: Option<&PilotPattern>,
    p_ratio: f64,
    data: DataModulation,
    window: &SidelobeWindow,
    n_trials: usize,
    seed: u64,
) -> Result<DpiFloor> {
    window.check(n)?;
    if n_trials == 0 {
        return Err(Error::InvalidConfig("need at least one trial".into()));
    }
    if let Some(p) = pattern {
        if p.n() != n {
            return Err(Error::GridMismatch {
                pattern_n: p.n(),
                grid_n: n,
            });
        }
    }
    if pattern.is_none() && data == DataModulation::None {
        return Err(Error::InvalidConfig("no pilots and no data".into()));
    }
    let dft = UnitaryDft::new(n);
    let per_trial: Vec<(f64, f64)> = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, STREAM_DPI, t as u64);
            let time = match pattern {
                Some(p) => build_isac_symbol(p, &data.draw(&mut rng, n - p.k()), p_ratio)?.time,
                None => dft.inverse(&data.draw(&mut rng, n))?,
            };
            self_sidelobes(&time, window)
        })
        .collect::<Result<_>>()?;
    let (mean, peak) = per_trial
        .iter()
        .fold((0.0, 0.0), |(a, b), (m, p)| (a + m, b + p));
    Ok(DpiFloor {
        mean_db: to_db(mean / n_trials as f64),
        peak_db: to_db(peak / n_trials as f64),
    })
}

/// Single-symbol data-included PSL (linear) for one random payload.
pub fn data_included_psl<R: Rng + ?Sized>(
    pattern: &PilotPattern,
    p_ratio: f64,
    data: DataModulation,
    window: &SidelobeWindow,
    rng: &mut R,
) -> Result<f64> {
    let sym = build_isac_symbol(pattern, &data.draw(rng, pattern.n() - pattern.k()), p_ratio)?;
    Ok(self_sidelobes(&sym.time, window)?.1)
}

/// Draws the target scene for one Monte Carlo trial.
pub trait SceneSampler: Sync {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> TargetScene;
}

/// One unit-gain target with delay uniform in `[0, max_delay)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingleTarget {
    pub max_delay: usize,
}

impl SingleTarget {
    /// Delay uniform over the first half of the grid.
    pub fn half_grid(n: usize) -> Self {
        Self {
            max_delay: (n / 2).max(1),
        }
    }
}

impl SceneSampler for SingleTarget {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> TargetScene {
        let delay = rng.random_range(0..self.max_delay.min(n));
        TargetScene::single(delay, n).expect("delay inside grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseConfig {
    pub snr_grid_db: Vec<f64>,
    /// Symbols per coherent processing interval.
    pub m_symbols: usize,
    pub n_trials: usize,
    pub p_ratio: f64,
    pub data: DataModulation,
    pub reference: SensingReference,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsePoint {
    pub snr_db: f64,
    pub rmse_samples: f64,
}

/// Range RMSE versus SNR for one pattern.
///
/// Every trial draws its scene, payloads and unit-variance noise shapes once
/// and reuses them at each SNR point, so the curve is driven by the noise
/// level and not by resampling.
pub fn rmse_experiment(
    pattern: &PilotPattern,
    sampler: &dyn SceneSampler,
    cfg: &RmseConfig,
) -> Result<Vec<RmsePoint>> {
    if cfg.snr_grid_db.is_empty() {
        return Err(Error::InvalidConfig("empty SNR grid".into()));
    }
    if cfg.m_symbols == 0 || cfg.n_trials == 0 {
        return Err(Error::InvalidConfig(
            "need at least one symbol and one trial".into(),
        ));
    }
    let n = pattern.n();
    let n_data = n - pattern.k();

    let sq_err: Vec<Vec<f64>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, STREAM_RMSE, t as u64);
            let scene = sampler.sample(n, &mut rng);
            let truth = scene.targets().first().map(|t| t.delay).unwrap_or(0);
            let mut symbols = Vec::with_capacity(cfg.m_symbols);
            for _ in 0..cfg.m_symbols {
                let sym = build_isac_symbol(pattern, &cfg.data.draw(&mut rng, n_data), cfg.p_ratio)?;
                let reference = sym.reference(cfg.reference);
                let noise_seed = rng.next_u64();
                symbols.push((sym, reference, noise_seed));
            }
            cfg.snr_grid_db
                .iter()
                .map(|&snr| {
                    let outputs = symbols
                        .iter()
                        .map(|(sym, reference, noise_seed)| {
                            let mut noise = ChaCha8Rng::seed_from_u64(*noise_seed);
                            let y = synthesize_rx(sym, &scene, snr, &mut noise)?;
                            matched_filter(&y, reference)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let est = estimate_delay(&coherent_integrate(&outputs)?)?;
                    let e = circular_error(est, truth, n) as f64;
                    Ok(e * e)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    Ok(cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let total: f64 = sq_err.iter().map(|row| row[i]).sum();
            RmsePoint {
                snr_db,
                rmse_samples: (total / cfg.n_trials as f64).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{af_power_via_dft, difference_multiplicity};
    use crate::pattern::{make_uniform_comb, OfdmGrid};

    fn comb(n: usize, k: usize) -> PilotPattern {
        make_uniform_comb(&OfdmGrid::new(n, 0).unwrap(), k).unwrap()
    }

    fn pilot_only(p: &PilotPattern, p_ratio: f64) -> IsacSymbol {
        build_isac_symbol(p, &vec![Complex64::default(); p.n() - p.k()], p_ratio).unwrap()
    }

    /// Direct O(N^2) correlation.
    fn correlate_direct(y: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = y.len();
        (0..n)
            .map(|tau| (0..n).map(|m| x[m].conj() * y[(m + tau) % n]).sum())
            .collect()
    }

    #[test]
    fn comb_pilot_only_is_impulse_train() {
        let sym = pilot_only(&comb(64, 8), 1.0);
        for (m, v) in sym.time.iter().enumerate() {
            if m % 8 == 0 {
                assert!(v.norm() > 0.1);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pilot_power_ratio() {
        let p = comb(64, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sym = build_isac_symbol(&p, &DataModulation::Qam16.draw(&mut rng, 56), 4.0).unwrap();
        for &k in p.indices() {
            assert!((sym.freq[k].norm_sqr() - 4.0).abs() < 1e-12);
        }
        let energy: f64 = sym.freq.iter().map(|v| v.norm_sqr()).sum();
        let time_energy: f64 = sym.time.iter().map(|v| v.norm_sqr()).sum();
        assert!((energy - time_energy).abs() < 1e-9 * energy);
        assert!(build_isac_symbol(&p, &[], 4.0).is_err());
        assert!(build_isac_symbol(&p, &vec![Complex64::default(); 56], 0.0).is_err());
    }

    #[test]
    fn full_grid_is_constant_magnitude_impulse() {
        let p = PilotPattern::free((0..16).collect(), 16).unwrap();
        let sym = build_isac_symbol(&p, &[], 1.0).unwrap();
        assert!((sym.time[0].norm() - 4.0).abs() < 1e-12);
        assert!(sym.time[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn noiseless_rx_is_pure_delay() {
        let p = PilotPattern::free(vec![1, 4, 9, 20], 32).unwrap();
        let sym = pilot_only(&p, 1.0);
        let scene = TargetScene::single(7, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = synthesize_rx(&sym, &scene, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(y, circular_delay(&sym.time, 7));
        assert!(TargetScene::single(32, 32).is_err());
    }

    #[test]
    fn matched_filter_reproduces_ambiguity() {
        let p = PilotPattern::free(vec![0, 3, 7, 12, 30], 37).unwrap();
        let sym = pilot_only(&p, 1.0);
        let r = matched_filter(&sym.time, &sym.time).unwrap();
        assert!((r[0] - Complex64::new(5.0, 0.0)).norm() < 1e-9);
        let prof = af_power_via_dft(&difference_multiplicity(&p), &SidelobeWindow::full(37)).unwrap();
        for (v, e) in r.iter().zip(&prof.power) {
            assert!((v.norm_sqr() - e).abs() < 1e-9 * 25.0);
        }
    }

    #[test]
    fn matched_filter_matches_direct_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [8usize, 13, 64] {
            let y: Vec<_> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let x: Vec<_> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let fast = matched_filter(&y, &x).unwrap();
            let slow = correlate_direct(&y, &x);
            let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-9 * scale);
            }
        }
        assert!(matched_filter(&[Complex64::default(); 3], &[Complex64::default(); 4]).is_err());
    }

    #[test]
    fn delay_estimate_and_ghosts() {
        let p = PilotPattern::free(vec![0, 1, 5, 11, 40, 77, 100], 128).unwrap();
        let sym = pilot_only(&p, 1.0);
        let y = circular_delay(&sym.time, 5);
        assert_eq!(estimate_delay(&matched_filter(&y, &sym.time).unwrap()).unwrap(), 5);

        // comb grating lobes tie exactly; the smallest aliased lag wins
        let c = comb(512, 32);
        let sym = pilot_only(&c, 1.0);
        let y = circular_delay(&sym.time, 100);
        assert_eq!(estimate_delay(&matched_filter(&y, &sym.time).unwrap()).unwrap(), 100 % 32);

        assert!(estimate_delay(&[Complex64::default(); 4]).is_err());
    }

    #[test]
    fn integration_sums() {
        let a = vec![Complex64::new(1.0, 0.0); 4];
        assert_eq!(coherent_integrate(std::slice::from_ref(&a)).unwrap(), a);
        let s = coherent_integrate(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(s[2], Complex64::new(3.0, 0.0));
        assert!(coherent_integrate(&[a, vec![Complex64::default(); 3]]).is_err());
        assert!(coherent_integrate(&[]).is_err());
    }

    #[test]
    fn circular_errors() {
        assert_eq!(circular_error(3, 510, 512), 5);
        assert_eq!(circular_error(100, 100, 512), 0);
        assert_eq!(circular_error(0, 256, 512), 256);
    }

    #[test]
    fn pilot_only_floor_is_deterministic_af() {
        let p = PilotPattern::free(vec![0, 3, 7, 12, 30], 64).unwrap();
        let w = SidelobeWindow::full(64);
        let f = measure_dpi_floor(64, Some(&p), 1.0, DataModulation::None, &w, 3, 1).unwrap();
        let prof = af_power_via_dft(&difference_multiplicity(&p), &w).unwrap();
        let lags: Vec<usize> = w.lags(64).collect();
        let mean = lags.iter().map(|&t| prof.power[t]).sum::<f64>() / lags.len() as f64 / 25.0;
        assert!((f.mean_db - to_db(mean)).abs() < 1e-9);
        assert!((f.peak_db - prof.psl_db).abs() < 1e-9);
    }

    #[test]
    fn rmse_noiseless_is_zero() {
        let p = PilotPattern::free(vec![0, 1, 5, 11, 40, 77, 100, 101], 128).unwrap();
        let cfg = RmseConfig {
            snr_grid_db: vec![f64::INFINITY],
            m_symbols: 2,
            n_trials: 20,
            p_ratio: 4.0,
            data: DataModulation::Qam16,
            reference: SensingReference::Full,
            seed: 9,
        };
        let out = rmse_experiment(&p, &SingleTarget::half_grid(128), &cfg).unwrap();
        assert_eq!(out[0].rmse_samples, 0.0);
        let empty = RmseConfig {
            snr_grid_db: vec![],
            ..cfg
        };
        assert!(rmse_experiment(&p, &SingleTarget::half_grid(128), &empty).is_err());
    }
}
