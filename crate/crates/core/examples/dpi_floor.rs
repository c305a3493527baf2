//! Sidelobe floor that random data imposes on full-reference matched filtering.

use ofdm_pilot::sensing::{measure_dpi_floor, DataModulation};
use ofdm_pilot::{hybrid_design, OfdmGrid, OptimizerConfig, SidelobeWindow};

fn main() -> ofdm_pilot::Result<()> {
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "N", "1/N dB", "gauss", "16qam", "pilots+qam");
    for n in [256usize, 512, 1024] {
        let window = SidelobeWindow::full(n);
        let grid = OfdmGrid::new(n, n / 16)?;
        let (pattern, _) = hybrid_design(&grid, &OptimizerConfig { n_anc: 16, ..OptimizerConfig::new(&grid, n / 16) })?;
        let gauss = measure_dpi_floor(n, None, 4.0, DataModulation::Gaussian, &window, 500, 1)?;
        let qam = measure_dpi_floor(n, None, 4.0, DataModulation::Qam16, &window, 500, 1)?;
        let mixed = measure_dpi_floor(n, Some(&pattern), 4.0, DataModulation::Qam16, &window, 500, 1)?;
        println!(
            "{n:>5} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            10.0 * (1.0 / n as f64).log10(),
            gauss.mean_db,
            qam.mean_db,
            mixed.mean_db
        );
    }
    Ok(())
}
