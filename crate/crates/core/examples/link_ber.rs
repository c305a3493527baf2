//! Uncoded 16-QAM BER over Rayleigh multipath for three pilot layouts.

use ofdm_pilot::comm::{ber_experiment, snr_at_ber, BerConfig, RayleighProfile};
use ofdm_pilot::{hybrid_design, make_uniform_comb, OfdmGrid, OptimizerConfig, PilotPattern};

fn main() -> ofdm_pilot::Result<()> {
    let grid = OfdmGrid::new(512, 32)?;
    let cfg = OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, 32) };
    let patterns = [
        ("comb", make_uniform_comb(&grid, 32)?),
        ("hybrid", hybrid_design(&grid, &cfg)?.0),
        ("block", PilotPattern::free((0..32).collect(), 512)?),
    ];
    let bcfg = BerConfig {
        snr_grid_db: (0..=10).map(|i| 4.0 * i as f64).collect(),
        n_frames: 1000,
        p_ratio: 4.0,
        seed: 1,
    };
    let channel = RayleighProfile::new(8, 2, grid)?;
    let curves = patterns
        .iter()
        .map(|(_, p)| ber_experiment(p, &channel, &bcfg))
        .collect::<ofdm_pilot::Result<Vec<_>>>()?;

    print!("{:>8}", "SNR dB");
    for (label, _) in &patterns {
        print!(" {label:>11}");
    }
    println!();
    for i in 0..bcfg.snr_grid_db.len() {
        print!("{:>8.1}", bcfg.snr_grid_db[i]);
        for c in &curves {
            print!(" {:>11.3e}", c[i].ber);
        }
        println!();
    }
    for ((label, _), c) in patterns.iter().zip(&curves) {
        match snr_at_ber(c, 1e-2) {
            Some(s) => println!("{label}: BER 1e-2 at {s:.2} dB"),
            None => println!("{label}: never reaches BER 1e-2"),
        }
    }
    Ok(())
}
