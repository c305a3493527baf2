//! Communication link over a frequency-selective multipath channel:
//! pilot-based channel estimation with linear interpolation, one-tap
//! zero-forcing equalization, 16-QAM demapping and the BER harness.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ofdm::{add_noise, check_len, circular_delay, complex_gaussian, mean_energy, noise_variance, ComplexSequence, UnitaryDft};
use crate::pattern::{OfdmGrid, PilotPattern};
use crate::qam::{demodulate, QamFrame};
use crate::seed::{trial_rng, STREAM_BER};
use crate::sensing::build_isac_symbol;

/// Equalizer gains below this magnitude erase the tone.
const ERASURE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathTap {
    pub gain: Complex64,
    /// Integer delay in samples.
    pub delay: usize,
}

/// Discrete multipath impulse response `h[n] = sum_p beta_p delta[n - nu_p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    taps: Vec<PathTap>,
}

impl MultipathChannel {
    /// Every tap must fall inside the cyclic prefix so the channel acts as a
    /// circular convolution on the useful block.
    pub fn new(taps: Vec<PathTap>, grid: &OfdmGrid) -> Result<Self> {
        if let Some(t) = taps.iter().find(|t| t.delay > 0 && t.delay >= grid.cp_length()) {
            return Err(Error::InvalidConfig(format!(
                "tap delay {} not covered by the cyclic prefix ({})",
                t.delay,
                grid.cp_length()
            )));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[PathTap] {
        &self.taps
    }

    /// `H[k] = sum_p beta_p exp(-j 2 pi k nu_p / N)`.
    pub fn frequency_response(&self, n: usize) -> ComplexSequence {
        (0..n)
            .map(|k| {
                self.taps
                    .iter()
                    .map(|t| {
                        let phase = -2.0 * std::f64::consts::PI * ((k * t.delay) % n) as f64 / n as f64;
                        t.gain * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }
}

/// `y_c = sum_p beta_p J_{nu_p} x + z_c`, noise set by `SNR = E_s / N_0` on
/// the transmitted samples.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Complex64],
    ch: &MultipathChannel,
    snr_db: f64,
    rng: &mut R,
) -> Result<ComplexSequence> {
    let n = x.len();
    let mut y = vec![Complex64::default(); n];
    for tap in ch.taps() {
        if tap.delay >= n {
            return Err(Error::InvalidConfig(format!(
                "tap delay {} outside [0, {n})",
                tap.delay
            )));
        }
        for (acc, v) in y.iter_mut().zip(circular_delay(x, tap.delay)) {
            *acc += tap.gain * v;
        }
    }
    add_noise(&mut y, noise_variance(mean_energy(x), snr_db), rng);
    Ok(y)
}

/// Draws one channel realization per frame.
pub trait ChannelSampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> MultipathChannel;
}

/// Rayleigh taps: `n_paths` i.i.d. `CN(0, 1/n_paths)` gains at delays drawn
/// uniformly from `[0, delay_span)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighProfile {
    pub n_paths: usize,
    pub delay_span: usize,
    pub grid: OfdmGrid,
}

impl RayleighProfile {
    pub fn new(n_paths: usize, delay_span: usize, grid: OfdmGrid) -> Result<Self> {
        if n_paths == 0 || delay_span == 0 {
            return Err(Error::InvalidConfig(
                "Rayleigh profile needs at least one path and a positive delay span".into(),
            ));
        }
        if delay_span > grid.cp_length().max(1) {
            return Err(Error::InvalidConfig(format!(
                "delay span {delay_span} exceeds the cyclic prefix {}",
                grid.cp_length()
            )));
        }
        Ok(Self {
            n_paths,
            delay_span,
            grid,
        })
    }
}

impl ChannelSampler for RayleighProfile {
    fn sample(&self, rng: &mut ChaCha8Rng) -> MultipathChannel {
        let var = 1.0 / self.n_paths as f64;
        let taps = (0..self.n_paths)
            .map(|_| PathTap {
                gain: complex_gaussian(rng, var),
                delay: rng.random_range(0..self.delay_span),
            })
            .collect();
        MultipathChannel::new(taps, &self.grid).expect("delays inside the cyclic prefix")
    }
}

/// Least-squares estimates at the pilots, linearly interpolated (real and
/// imaginary parts) along the cyclic tone index.
pub fn estimate_channel(rx_freq: &[Complex64], pattern: &PilotPattern, pilot_amplitude: f64) -> Result<ComplexSequence> {
    let n = pattern.n();
    check_len(rx_freq, n)?;
    let k = pattern.k();
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "channel estimation needs at least 2 pilots, got {k}"
        )));
    }
    if !(pilot_amplitude > 0.0) {
        return Err(Error::InvalidConfig("pilot amplitude must be positive".into()));
    }
    let pilots = pattern.indices();
    let mut est = vec![Complex64::default(); n];
    for i in 0..k {
        let a = pilots[i];
        let b = if i + 1 < k { pilots[i + 1] } else { pilots[0] + n };
        let ha = rx_freq[a] / pilot_amplitude;
        let hb = rx_freq[b % n] / pilot_amplitude;
        let gap = b - a;
        est[a] = ha;
        for t in 1..gap {
            let w = t as f64 / gap as f64;
            est[(a + t) % n] = ha + (hb - ha) * w;
        }
    }
    Ok(est)
}

/// One-tap zero-forcing equalization and Gray demapping of the data tones
/// (ascending tone order, four bits per tone).
///
/// Tones whose estimate is below `1e-12` in magnitude are erased: the
/// equalized value is taken as zero, which demaps to `1111`.
pub fn equalize_and_demod(rx_freq: &[Complex64], channel_est: &[Complex64], pattern: &PilotPattern) -> Result<Vec<u8>> {
    let n = pattern.n();
    check_len(rx_freq, n)?;
    check_len(channel_est, n)?;
    let eq: Vec<Complex64> = (0..n)
        .filter(|&k| !pattern.contains(k))
        .map(|k| {
            let h = channel_est[k];
            if h.norm() < ERASURE_THRESHOLD {
                Complex64::default()
            } else {
                rx_freq[k] / h
            }
        })
        .collect();
    Ok(demodulate(&eq))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerConfig {
    pub snr_grid_db: Vec<f64>,
    pub n_frames: usize,
    pub p_ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

/// Bit error rate versus SNR for one pattern.
///
/// Each frame draws a channel, a 16-QAM payload and a noise shape once and
/// reuses them at every SNR point.
pub fn ber_experiment(pattern: &PilotPattern, sampler: &dyn ChannelSampler, cfg: &BerConfig) -> Result<Vec<BerPoint>> {
    if cfg.snr_grid_db.is_empty() {
        return Err(Error::InvalidConfig("empty SNR grid".into()));
    }
    if cfg.n_frames == 0 {
        return Err(Error::InvalidConfig("need at least one frame".into()));
    }
    let n = pattern.n();
    let n_data = n - pattern.k();
    let dft = UnitaryDft::new(n);

    let per_frame: Vec<Vec<u64>> = (0..cfg.n_frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = trial_rng(cfg.seed, STREAM_BER, f as u64);
            let ch = sampler.sample(&mut rng);
            let frame = QamFrame::random(&mut rng, n_data);
            let sym = build_isac_symbol(pattern, &frame.symbols, cfg.p_ratio)?;
            let noise_seed = rng.next_u64();
            cfg.snr_grid_db
                .iter()
                .map(|&snr| {
                    let mut noise = ChaCha8Rng::seed_from_u64(noise_seed);
                    let y = apply_channel(&sym.time, &ch, snr, &mut noise)?;
                    let yf = dft.forward(&y)?;
                    let h = estimate_channel(&yf, pattern, sym.pilot_amplitude)?;
                    let bits = equalize_and_demod(&yf, &h, pattern)?;
                    Ok(bits.iter().zip(&frame.bits).filter(|(a, b)| a != b).count() as u64)
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;

    let total_bits = (cfg.n_frames * n_data * crate::qam::BITS_PER_SYMBOL) as u64;
    Ok(cfg
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let bit_errors: u64 = per_frame.iter().map(|row| row[i]).sum();
            BerPoint {
                snr_db,
                total_bits,
                bit_errors,
                ber: if total_bits == 0 {
                    0.0
                } else {
                    bit_errors as f64 / total_bits as f64
                },
            }
        })
        .collect())
}

/// SNR at which a BER curve first falls to `target`, by linear interpolation
/// of `log10(BER)` between grid points. `None` if the curve never crosses.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    let lt = target.log10();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.ber >= target && b.ber < target {
            if b.ber <= 0.0 {
                return Some(b.snr_db);
            }
            let (la, lb) = (a.ber.log10(), b.ber.log10());
            let frac = if la == lb { 0.0 } else { (la - lt) / (la - lb) };
            return Some(a.snr_db + frac * (b.snr_db - a.snr_db));
        }
    }
    None
}
