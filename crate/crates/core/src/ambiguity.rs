//! Periodic delay-domain ambiguity function of a pilot set.
//!
//! The pilot-only ambiguity `Psi(tau) = sum_{k in P} exp(j 2 pi k tau / N)`
//! has power `|Psi(tau)|^2` equal to the N-point DFT of the cyclic difference
//! multiplicity `lambda(d)`. Both routes are implemented here: the direct
//! phasor sum ([`af_direct`]) and the transform of the integer difference
//! counts ([`af_power_via_dft`]). The PSL objective used by the optimizer is
//! computed from the latter so that it is a pure function of the pilot set.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::pattern::{PilotPattern, SidelobeWindow};

/// Relative bound on the imaginary residue of the transformed multiplicities.
const IMAG_TOLERANCE: f64 = 1e-9;

/// Converts a linear power ratio to dB; zero maps to negative infinity.
pub fn to_db(linear: f64) -> f64 {
    if linear <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * linear.log10()
    }
}

/// Table of `exp(j 2 pi m / N)` for `m` in `[0, N)`.
///
/// Phases are reduced modulo N in integer arithmetic before lookup, so
/// `Psi(tau)` never suffers from large-argument trigonometric error.
#[derive(Debug, Clone)]
pub struct Twiddles {
    table: Vec<Complex64>,
}

impl Twiddles {
    pub fn new(n: usize) -> Self {
        let table = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect();
        Self { table }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.table.len()
    }

    /// `exp(j 2 pi k tau / N)`.
    #[inline]
    pub fn phasor(&self, k: usize, tau: usize) -> Complex64 {
        let n = self.table.len();
        self.table[(k % n) * (tau % n) % n]
    }
}

/// Cyclic difference multiplicity `lambda(d)` of a pilot set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceMultiplicity {
    lambda: Vec<u64>,
    k: usize,
}

impl DifferenceMultiplicity {
    #[inline]
    pub fn lambda(&self) -> &[u64] {
        &self.lambda
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Builds a multiplicity sequence from raw counts, checking the integer
    /// identities that every genuine pilot set satisfies.
    pub fn from_counts(lambda: Vec<u64>, k: usize) -> Result<Self> {
        let n = lambda.len();
        let total: u64 = lambda.iter().sum();
        if n == 0 || lambda[0] != k as u64 || total != (k * k) as u64 {
            return Err(Error::Numerical(format!(
                "counts violate lambda(0) = K and sum = K^2 for K = {k}"
            )));
        }
        Ok(Self { lambda, k })
    }

    fn add_pairs(&mut self, index: usize, others: impl Iterator<Item = usize>, add: bool) {
        let n = self.lambda.len();
        let bump = |v: &mut u64| {
            if add {
                *v += 1;
            } else {
                *v -= 1;
            }
        };
        bump(&mut self.lambda[0]);
        for m in others {
            bump(&mut self.lambda[(index + n - m) % n]);
            bump(&mut self.lambda[(m + n - index) % n]);
        }
    }
}

/// `lambda(d) = #{(m, n) in P x P : m - n = d mod N}`.
pub fn difference_multiplicity(pattern: &PilotPattern) -> DifferenceMultiplicity {
    let n = pattern.n();
    let mut lambda = vec![0u64; n];
    let idx = pattern.indices();
    for &m in idx {
        for &q in idx {
            lambda[(m + n - q) % n] += 1;
        }
    }
    DifferenceMultiplicity {
        lambda,
        k: pattern.k(),
    }
}

/// Pilot-only ambiguity `Psi(tau)` for every lag, by direct phasor summation.
pub fn af_direct(pattern: &PilotPattern) -> Vec<Complex64> {
    let tw = Twiddles::new(pattern.n());
    af_direct_with(&tw, pattern.indices())
}

pub(crate) fn af_direct_with(tw: &Twiddles, indices: &[usize]) -> Vec<Complex64> {
    (0..tw.n())
        .map(|tau| indices.iter().map(|&k| tw.phasor(k, tau)).sum())
        .collect()
}

/// Delay-domain power profile and the PSL it implies for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct AfProfile {
    pub power: Vec<f64>,
    pub mainlobe: f64,
    pub psl_linear: f64,
    pub psl_db: f64,
    pub argmax_tau: usize,
}

impl AfProfile {
    /// Writes `tau,power,power_db_rel_mainlobe` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tau,power,power_db_rel_mainlobe")?;
        for (tau, &p) in self.power.iter().enumerate() {
            let rel = to_db(p / self.mainlobe);
            writeln!(out, "{tau},{p:.6e},{}", crate::report::fmt_db(rel))?;
        }
        Ok(())
    }
}

/// PSL of a pattern over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psl {
    pub linear: f64,
    pub db: f64,
    /// Smallest maximizing lag.
    pub argmax_tau: usize,
}

/// Reusable FFT plan for turning multiplicities into power profiles.
pub struct PowerEvaluator {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PowerEvaluator {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self {
            n,
            fft,
            buf: vec![Complex64::default(); n],
            scratch,
        }
    }

    /// `power[tau] = sum_d lambda(d) exp(j 2 pi d tau / N)`.
    pub fn power(&mut self, lam: &DifferenceMultiplicity) -> Result<Vec<f64>> {
        if lam.n() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: lam.n(),
            });
        }
        for (b, &l) in self.buf.iter_mut().zip(&lam.lambda) {
            *b = Complex64::new(l as f64, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);

        let k2 = (lam.k * lam.k) as f64;
        let n = self.n;
        let mut power = vec![0.0; n];
        for tau in 0..n {
            let v = self.buf[tau];
            if v.im.abs() > IMAG_TOLERANCE * k2.max(1.0) {
                return Err(Error::Numerical(format!(
                    "imaginary residue {:.3e} at tau = {tau}; multiplicities are not symmetric",
                    v.im
                )));
            }
            // power(tau) and power(N - tau) are equal; average them so the
            // profile is exactly symmetric.
            let mirror = self.buf[(n - tau) % n].re;
            power[tau] = (0.5 * (v.re + mirror)).max(0.0);
        }
        power[0] = k2;
        Ok(power)
    }

    pub fn psl(&mut self, lam: &DifferenceMultiplicity, window: &SidelobeWindow) -> Result<Psl> {
        window.check(self.n)?;
        let power = self.power(lam)?;
        Ok(psl_from_power(&power, lam.k, window))
    }
}

fn psl_from_power(power: &[f64], k: usize, window: &SidelobeWindow) -> Psl {
    let n = power.len();
    let best = window.lags(n).map(|t| power[t]).fold(0.0, f64::max);
    // rounding can split lobes of equal height; treat near-equal as a tie
    let floor = best * (1.0 - 1e-12);
    let arg = window
        .lags(n)
        .find(|&t| power[t] >= floor)
        .unwrap_or(window.tau_min);
    let linear = best / (k * k) as f64;
    Psl {
        linear,
        db: to_db(linear),
        argmax_tau: arg,
    }
}

/// Power profile of the ambiguity via the DFT of the difference counts.
pub fn af_power_via_dft(lam: &DifferenceMultiplicity, window: &SidelobeWindow) -> Result<AfProfile> {
    window.check(lam.n())?;
    let power = PowerEvaluator::new(lam.n()).power(lam)?;
    let psl = psl_from_power(&power, lam.k, window);
    Ok(AfProfile {
        mainlobe: power[0],
        power,
        psl_linear: psl.linear,
        psl_db: psl.db,
        argmax_tau: psl.argmax_tau,
    })
}

/// PSL of `pattern` over `window`.
pub fn psl(pattern: &PilotPattern, window: &SidelobeWindow) -> Result<Psl> {
    let lam = difference_multiplicity(pattern);
    PowerEvaluator::new(pattern.n()).psl(&lam, window)
}

/// Suppression gain of an evaluated pattern over the periodic baseline, in dB.
pub fn delta_psl(psl_periodic_db: f64, psl_evaluated_db: f64) -> Result<f64> {
    if !psl_periodic_db.is_finite() || !psl_evaluated_db.is_finite() {
        return Err(Error::Numerical(format!(
            "delta PSL needs finite inputs, got {psl_periodic_db} and {psl_evaluated_db}"
        )));
    }
    Ok(psl_periodic_db - psl_evaluated_db)
}

/// Multiplicities of `pattern` with `remove` swapped for `add`, updated in O(K).
pub fn swap_multiplicity(
    pattern: &PilotPattern,
    lam: &DifferenceMultiplicity,
    remove: usize,
    add: usize,
) -> Result<DifferenceMultiplicity> {
    if !pattern.contains(remove) {
        return Err(Error::InvalidSwap(format!("{remove} is not a pilot")));
    }
    if add >= pattern.n() {
        return Err(Error::IndexOutOfRange {
            index: add,
            n: pattern.n(),
        });
    }
    if pattern.contains(add) {
        return Err(Error::InvalidSwap(format!("{add} is already a pilot")));
    }
    if lam.n() != pattern.n() || lam.k != pattern.k() {
        return Err(Error::LengthMismatch {
            expected: pattern.n(),
            actual: lam.n(),
        });
    }
    let others = || pattern.indices().iter().copied().filter(|&m| m != remove);
    let mut out = lam.clone();
    out.add_pairs(remove, others(), false);
    out.add_pairs(add, others(), true);
    Ok(out)
}

/// PSL after replacing `remove` with `add`, plus the updated multiplicities.
///
/// The result is bit-identical to recomputing from scratch on the swapped
/// pattern because the integer counts are identical.
pub fn psl_after_swap(
    pattern: &PilotPattern,
    lam: &DifferenceMultiplicity,
    remove: usize,
    add: usize,
    window: &SidelobeWindow,
) -> Result<(f64, DifferenceMultiplicity)> {
    let updated = swap_multiplicity(pattern, lam, remove, add)?;
    let psl = PowerEvaluator::new(pattern.n()).psl(&updated, window)?;
    Ok((psl.linear, updated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{make_uniform_comb, OfdmGrid};

    fn pat(idx: &[usize], n: usize) -> PilotPattern {
        PilotPattern::free(idx.to_vec(), n).unwrap()
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(
            difference_multiplicity(&pat(&[0, 1], 8)).lambda(),
            &[2, 1, 0, 0, 0, 0, 0, 1]
        );
        assert_eq!(
            difference_multiplicity(&pat(&[0, 2, 4, 6], 8)).lambda(),
            &[4, 0, 4, 0, 4, 0, 4, 0]
        );
        let pds = difference_multiplicity(&pat(&[1, 2, 5, 7], 13));
        assert_eq!(pds.lambda()[0], 4);
        assert!(pds.lambda()[1..].iter().all(|&l| l == 1));
    }

    #[test]
    fn direct_af_examples() {
        for v in af_direct(&pat(&[5], 8)) {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let comb = af_direct(&pat(&[0, 2, 4, 6], 8));
        let expect = [4.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0];
        for (v, e) in comb.iter().zip(expect) {
            assert!((v - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
        let full = af_direct(&pat(&(0..8).collect::<Vec<_>>(), 8));
        assert_eq!(full[0], Complex64::new(8.0, 0.0));
        assert!(full[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn dft_power_examples() {
        let w = SidelobeWindow::full(8);
        let p = af_power_via_dft(&difference_multiplicity(&pat(&[0, 2, 4, 6], 8)), &w).unwrap();
        let expect = [16.0, 0.0, 0.0, 0.0, 16.0, 0.0, 0.0, 0.0];
        for (a, b) in p.power.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }

        let p = af_power_via_dft(&difference_multiplicity(&pat(&[0, 1], 8)), &w).unwrap();
        for (tau, &v) in p.power.iter().enumerate() {
            let e = 2.0 + 2.0 * (2.0 * PI * tau as f64 / 8.0).cos();
            assert!((v - e).abs() < 1e-12);
        }

        let w13 = SidelobeWindow::full(13);
        let p = af_power_via_dft(&difference_multiplicity(&pat(&[1, 2, 5, 7], 13)), &w13).unwrap();
        assert_eq!(p.power[0], 16.0);
        assert!(p.power[1..].iter().all(|v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn asymmetric_counts_rejected() {
        // lambda(1) != lambda(N-1): not the multiplicity of any pilot set
        let lam = DifferenceMultiplicity::from_counts(vec![2, 2, 0, 0, 0, 0, 0, 0], 2).unwrap();
        assert!(matches!(
            af_power_via_dft(&lam, &SidelobeWindow::full(8)),
            Err(Error::Numerical(_))
        ));
        assert!(DifferenceMultiplicity::from_counts(vec![3, 1, 0, 0], 2).is_err());
    }

    #[test]
    fn psl_examples() {
        let g = OfdmGrid::new(512, 0).unwrap();
        let comb = make_uniform_comb(&g, 32).unwrap();
        let r = psl(&comb, &SidelobeWindow::full(512)).unwrap();
        assert_eq!(r.linear, 1.0);
        assert_eq!(r.db, 0.0);
        assert_eq!(r.argmax_tau, 32);

        let r = psl(&pat(&[5], 8), &SidelobeWindow::new(2, 3, 8).unwrap()).unwrap();
        assert!((r.linear - 1.0).abs() < 1e-12);

        let r = psl(&pat(&[1, 2, 5, 7], 13), &SidelobeWindow::new(1, 6, 13).unwrap()).unwrap();
        assert!((r.linear - 3.0 / 16.0).abs() < 1e-12);
        assert!((r.db - (-7.2699)).abs() < 1e-4);
        assert_eq!(r.argmax_tau, 1);

        let full = pat(&(0..8).collect::<Vec<_>>(), 8);
        let r = psl(&full, &SidelobeWindow::full(8)).unwrap();
        assert_eq!(r.linear, 0.0);
        assert_eq!(r.db, f64::NEG_INFINITY);
    }

    #[test]
    fn psl_rejects_bad_window() {
        let w = SidelobeWindow {
            tau_min: 3,
            tau_max: 9,
        };
        assert!(matches!(psl(&pat(&[0, 1], 8), &w), Err(Error::InvalidWindow { .. })));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_psl(0.0, -9.0).unwrap(), 9.0);
        assert_eq!(delta_psl(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(delta_psl(-3.0, -8.5).unwrap(), 5.5);
        assert!(delta_psl(0.0, f64::NEG_INFINITY).is_err());
        assert!(delta_psl(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn swap_examples() {
        let w = SidelobeWindow::full(8);
        let p = pat(&[0, 2, 4, 6], 8);
        let lam = difference_multiplicity(&p);
        let (lin, lam2) = psl_after_swap(&p, &lam, 6, 7, &w).unwrap();
        assert!(lin < 1.0);
        let swapped = p.with_swap(6, 7).unwrap();
        assert_eq!(lam2, difference_multiplicity(&swapped));

        let (back, lam3) = psl_after_swap(&swapped, &lam2, 7, 6, &w).unwrap();
        assert_eq!(lam3, lam);
        assert_eq!(back.to_bits(), psl(&p, &w).unwrap().linear.to_bits());

        assert!(psl_after_swap(&p, &lam, 1, 3, &w).is_err());
        assert!(psl_after_swap(&p, &lam, 2, 4, &w).is_err());
    }

    #[test]
    fn every_swap_on_small_grid_matches_recompute() {
        let w = SidelobeWindow::full(16);
        let p = pat(&[0, 3, 7, 12], 16);
        let lam = difference_multiplicity(&p);
        for &r in p.indices() {
            for a in p.unused_indices() {
                let (lin, _) = psl_after_swap(&p, &lam, r, a, &w).unwrap();
                let oracle = psl(&pat_swap(&p, r, a), &w).unwrap().linear;
                assert_eq!(lin.to_bits(), oracle.to_bits());
            }
        }
    }

    fn pat_swap(p: &PilotPattern, r: usize, a: usize) -> PilotPattern {
        let mut v: Vec<usize> = p.indices().iter().copied().filter(|&x| x != r).collect();
        v.push(a);
        PilotPattern::free(v, p.n()).unwrap()
    }
}
