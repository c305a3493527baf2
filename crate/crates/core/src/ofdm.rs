//! Unitary DFT, circular delay and complex Gaussian noise.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Length-N block of complex baseband samples or frequency-domain symbols.
pub type ComplexSequence = Vec<Complex64>;

/// Unitary N-point DFT pair: `X = F x`, `x = F^H X`.
pub struct UnitaryDft {
    n: usize,
    scale: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl UnitaryDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `X[k] = N^{-1/2} sum_m x[m] exp(-j 2 pi k m / N)`.
    pub fn forward(&self, x: &[Complex64]) -> Result<ComplexSequence> {
        self.run(&self.fwd, x)
    }

    /// `x[m] = N^{-1/2} sum_k X[k] exp(+j 2 pi k m / N)`.
    pub fn inverse(&self, x: &[Complex64]) -> Result<ComplexSequence> {
        self.run(&self.inv, x)
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, x: &[Complex64]) -> Result<ComplexSequence> {
        check_len(x, self.n)?;
        let mut buf = x.to_vec();
        plan.process(&mut buf);
        for v in &mut buf {
            *v *= self.scale;
        }
        Ok(buf)
    }
}

pub(crate) fn check_len(x: &[Complex64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    Ok(())
}

/// `out[m] = x[(m - tau) mod N]`.
pub fn circular_delay(x: &[Complex64], tau: usize) -> ComplexSequence {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let tau = tau % n;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&x[n - tau..]);
    out.extend_from_slice(&x[..n - tau]);
    out
}

/// Average energy per sample.
pub fn mean_energy(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Noise variance for `SNR = E_s / N_0` with `E_s` the per-sample energy.
/// Infinite SNR gives zero.
pub fn noise_variance(signal_energy: f64, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        signal_energy * 10f64.powf(-snr_db / 10.0)
    }
}

/// One `CN(0, variance)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Adds i.i.d. `CN(0, variance)` noise in place.
pub fn add_noise<R: Rng + ?Sized>(y: &mut [Complex64], variance: f64, rng: &mut R) {
    if variance == 0.0 {
        return;
    }
    for v in y {
        *v += complex_gaussian(rng, variance);
    }
}
