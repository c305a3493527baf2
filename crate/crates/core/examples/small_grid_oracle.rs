//! Compares the hybrid optimizer with exhaustive search on small grids.

use ofdm_pilot::{exhaustive_oracle, hybrid_design, OfdmGrid, OptimizerConfig, SidelobeWindow};

fn main() -> ofdm_pilot::Result<()> {
    println!("{:>3} {:>2} {:>5} {:>10} {:>10}  oracle set", "N", "K", "n_anc", "oracle dB", "hybrid dB");
    for (n, k) in [(13, 4), (16, 4), (20, 5), (21, 5), (31, 6)] {
        let grid = OfdmGrid::new(n, 0)?;
        let window = SidelobeWindow::full(n);
        for n_anc in [0, 1] {
            let (best, oracle_db) = exhaustive_oracle(&grid, k, n_anc, &window)?;
            let cfg = OptimizerConfig {
                n_anc,
                sample_size: n - k,
                max_iter: 50,
                ..OptimizerConfig::new(&grid, k)
            };
            let (_, trace) = hybrid_design(&grid, &cfg)?;
            println!(
                "{n:>3} {k:>2} {n_anc:>5} {oracle_db:>10.4} {:>10.4}  {:?}",
                trace.final_psl_db,
                best.indices()
            );
        }
    }
    Ok(())
}
