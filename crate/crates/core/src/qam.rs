//! Gray-coded square 16-QAM with unit average symbol energy.

use num_complex::Complex64;
use rand::Rng;

pub const BITS_PER_SYMBOL: usize = 4;

/// `1 / sqrt(10)`: scales the {-3, -1, 1, 3} lattice to unit average energy.
const SCALE: f64 = 0.316_227_766_016_837_94;

/// Gray label (two bits) to amplitude level on one axis.
fn level(b0: u8, b1: u8) -> f64 {
    match (b0 & 1, b1 & 1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

/// Nearest level on one axis. A zero input decides `11` (the +1 level).
fn decide(v: f64) -> (u8, u8) {
    let v = v / SCALE;
    if v < -2.0 {
        (0, 0)
    } else if v < 0.0 {
        (0, 1)
    } else if v < 2.0 {
        (1, 1)
    } else {
        (1, 0)
    }
}

/// Maps groups of four bits (I pair, then Q pair) to symbols.
///
/// # Panics
/// If `bits.len()` is not a multiple of four.
pub fn modulate(bits: &[u8]) -> Vec<Complex64> {
    assert!(bits.len().is_multiple_of(BITS_PER_SYMBOL), "bit count must be a multiple of 4");
    bits.chunks_exact(BITS_PER_SYMBOL)
        .map(|b| Complex64::new(level(b[0], b[1]) * SCALE, level(b[2], b[3]) * SCALE))
        .collect()
}

/// Minimum-distance demapping.
pub fn demodulate(symbols: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * BITS_PER_SYMBOL);
    for s in symbols {
        let (a, b) = decide(s.re);
        let (c, d) = decide(s.im);
        out.extend_from_slice(&[a, b, c, d]);
    }
    out
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    (0..count).map(|_| rng.random::<bool>() as u8).collect()
}

/// Random payload: bits and the symbols they map to.
#[derive(Debug, Clone, PartialEq)]
pub struct QamFrame {
    pub bits: Vec<u8>,
    pub symbols: Vec<Complex64>,
}

impl QamFrame {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_symbols: usize) -> Self {
        let bits = random_bits(rng, n_symbols * BITS_PER_SYMBOL);
        let symbols = modulate(&bits);
        Self { bits, symbols }
    }
}
