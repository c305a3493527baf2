//! Prints the delay-domain ambiguity of the comb and of a designed pattern,
//! and writes both profiles as CSV to the system temp directory.

use std::fs::File;

use ofdm_pilot::{
    af_power_via_dft, difference_multiplicity, hybrid_design, make_uniform_comb, to_db, OfdmGrid,
    OptimizerConfig, PilotPattern,
};

fn show(label: &str, pattern: &PilotPattern, cfg: &OptimizerConfig) -> ofdm_pilot::Result<()> {
    let profile = af_power_via_dft(&difference_multiplicity(pattern), &cfg.window)?;
    let path = std::env::temp_dir().join(format!("af_{label}.csv"));
    profile.write_csv(File::create(&path)?)?;
    println!(
        "{label:>6}: PSL {:8.3} dB at lag {:3}  ({})",
        profile.psl_db,
        profile.argmax_tau,
        path.display()
    );
    let strongest: Vec<String> = {
        let mut lags: Vec<usize> = (1..=pattern.n() / 2).collect();
        lags.sort_by(|&a, &b| profile.power[b].total_cmp(&profile.power[a]));
        lags.iter()
            .take(5)
            .map(|&t| format!("{t}:{:.1}", to_db(profile.power[t] / profile.mainlobe)))
            .collect()
    };
    println!("        strongest lags (dB) {}", strongest.join(" "));
    Ok(())
}

fn main() -> ofdm_pilot::Result<()> {
    let grid = OfdmGrid::new(512, 32)?;
    let cfg = OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, 32) };
    show("comb", &make_uniform_comb(&grid, 32)?, &cfg)?;
    show("hybrid", &hybrid_design(&grid, &cfg)?.0, &cfg)?;
    Ok(())
}
