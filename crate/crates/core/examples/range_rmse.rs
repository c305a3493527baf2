//! Range RMSE of the comb and of an anchored design over SNR.
//!
//! The comb estimate lands on grating-lobe ghosts however clean the echo is,
//! so its error stays flat while the designed pattern converges to zero.

use ofdm_pilot::sensing::{rmse_experiment, RmseConfig, SingleTarget};
use ofdm_pilot::{hybrid_design, make_uniform_comb, OfdmGrid, OptimizerConfig};

fn main() -> ofdm_pilot::Result<()> {
    let grid = OfdmGrid::new(512, 32)?;
    let comb = make_uniform_comb(&grid, 32)?;
    let (hybrid, _) = hybrid_design(&grid, &OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, 32) })?;

    let cfg = RmseConfig {
        snr_grid_db: (-8..=6).map(|i| 5.0 * i as f64).collect(),
        m_symbols: 4,
        n_trials: 300,
        p_ratio: 4.0,
        data: Default::default(),
        reference: Default::default(),
        seed: 1,
    };
    let sampler = SingleTarget::half_grid(512);
    let a = rmse_experiment(&comb, &sampler, &cfg)?;
    let b = rmse_experiment(&hybrid, &sampler, &cfg)?;
    println!("{:>8} {:>12} {:>12}", "SNR dB", "comb", "hybrid");
    for (x, y) in a.iter().zip(&b) {
        println!("{:>8.1} {:>12.3} {:>12.3}", x.snr_db, x.rmse_samples, y.rmse_samples);
    }
    Ok(())
}
