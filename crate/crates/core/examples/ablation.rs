//! PSL gain over the comb for uniform, greedy and hybrid designs across
//! pilot and anchor counts. Writes `ablation.csv` under `out/`.

use ofdm_pilot::experiments::{cmd_ablation, ExperimentConfig};

fn main() -> ofdm_pilot::Result<()> {
    let cfg = ExperimentConfig { trials: 200, ..ExperimentConfig::default() };
    println!("{:>8} {:>4} {:>5} {:>12} {:>12}", "method", "K", "n_anc", "pilot dB", "data dB");
    for r in cmd_ablation(&cfg)? {
        println!(
            "{:>8} {:>4} {:>5} {:>12.3} {:>12.3}",
            r.method, r.k, r.n_anc, r.delta_psl_pilot_only_db, r.delta_psl_data_db
        );
    }
    Ok(())
}
