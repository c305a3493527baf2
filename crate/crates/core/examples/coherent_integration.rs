//! Coherent integration over M symbols: pilot returns add in amplitude,
//! independent payload fluctuations add in power.

use num_complex::Complex64;
use ofdm_pilot::sensing::{build_isac_symbol, coherent_integrate, matched_filter, DataModulation};
use ofdm_pilot::{hybrid_design, OfdmGrid, OptimizerConfig, PilotPattern};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Data-tone part of a symbol's self-correlation.
fn data_correlation(pattern: &PilotPattern, data: &[Complex64]) -> ofdm_pilot::Result<Vec<Complex64>> {
    let sym = build_isac_symbol(pattern, data, 4.0)?;
    let xd: Vec<Complex64> = sym.time.iter().zip(sym.pilot_time()).map(|(a, b)| a - b).collect();
    matched_filter(&xd, &xd)
}

fn mean_sidelobe_db(r: &[Complex64]) -> f64 {
    10.0 * (r[1..].iter().map(|v| v.norm_sqr()).sum::<f64>() / (r.len() - 1) as f64).log10()
}

fn main() -> ofdm_pilot::Result<()> {
    let n = 512;
    let grid = OfdmGrid::new(n, 32)?;
    let (pattern, _) = hybrid_design(&grid, &OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, 32) })?;
    let n_data = n - pattern.k();
    // expected data correlation: every data tone at unit power
    let mean = data_correlation(&pattern, &vec![Complex64::new(1.0, 0.0); n_data])?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("{:>3} {:>14} {:>18}", "M", "pilot peak dB", "data sidelobe dB");
    for m in [1usize, 2, 4, 8, 16, 32] {
        let mut pilot = Vec::with_capacity(m);
        let mut fluct = Vec::with_capacity(m);
        for _ in 0..m {
            let data = DataModulation::Qam16.draw(&mut rng, n_data);
            let sym = build_isac_symbol(&pattern, &data, 4.0)?;
            let xp = sym.pilot_time();
            pilot.push(matched_filter(&xp, &xp)?);
            let r = data_correlation(&pattern, &data)?;
            fluct.push(r.iter().zip(&mean).map(|(a, b)| a - b).collect());
        }
        let peak = coherent_integrate(&pilot)?[0].norm_sqr();
        println!(
            "{m:>3} {:>14.2} {:>18.2}",
            10.0 * peak.log10(),
            mean_sidelobe_db(&coherent_integrate(&fluct)?)
        );
    }
    Ok(())
}
