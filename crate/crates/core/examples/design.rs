//! Designs an anchored pilot pattern and compares it with the uniform comb.
//!
//! ```text
//! cargo run --release --example design -- 512 32 16
//! ```

use ofdm_pilot::{delta_psl, hybrid_design, make_uniform_comb, psl, OfdmGrid, OptimizerConfig};

fn main() -> ofdm_pilot::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, k, n_anc) = match args[..] {
        [n, k, a] => (n, k, a),
        _ => (512, 32, 16),
    };
    let grid = OfdmGrid::new(n, n / 16)?;
    let cfg = OptimizerConfig { n_anc, ..OptimizerConfig::new(&grid, k) };

    let (pattern, trace) = hybrid_design(&grid, &cfg)?;
    let comb = psl(&make_uniform_comb(&grid, k)?, &cfg.window)?;

    println!("N={n} K={k} anchors={n_anc}");
    println!("comb PSL      {:8.3} dB", comb.db);
    println!("greedy PSL    {:8.3} dB", trace.stage1_psl_db);
    println!("hybrid PSL    {:8.3} dB", trace.final_psl_db);
    println!("gain vs comb  {:8.3} dB", delta_psl(comb.db, trace.final_psl_db)?);
    println!("sweeps {} / swaps {}", trace.sweeps_executed, trace.swaps_accepted);
    println!("anchors {:?}", pattern.anchors());
    println!("pilots  {:?}", pattern.indices());
    Ok(())
}
