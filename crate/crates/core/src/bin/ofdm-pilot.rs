use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ofdm_pilot::experiments::{
    cmd_ablation, cmd_af_dump, cmd_ber, cmd_design, cmd_dpi, cmd_rmse, ConfigOverrides,
    ExperimentConfig,
};
use ofdm_pilot::report::{fmt_db, fmt_lin};
use ofdm_pilot::Result;

#[derive(Parser)]
#[command(name = "ofdm-pilot", version, about = "Design and evaluate non-uniform OFDM pilot patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a pattern; writes pattern.json and trace.csv.
    Design(Common),
    /// Delta-PSL table over K and anchor counts; writes ablation.csv.
    Ablation(Common),
    /// Range RMSE versus SNR; writes rmse.csv.
    Rmse {
        #[command(flatten)]
        common: Common,
        /// Pattern JSON files.
        #[arg(required = true)]
        patterns: Vec<PathBuf>,
    },
    /// BER versus SNR over Rayleigh multipath; writes ber.csv.
    Ber {
        #[command(flatten)]
        common: Common,
        #[arg(required = true)]
        patterns: Vec<PathBuf>,
    },
    /// Ambiguity power profile of a pattern; writes af.csv.
    AfDump {
        #[command(flatten)]
        common: Common,
        pattern: PathBuf,
    },
    /// Data-to-pilot interference floor; writes dpi.csv.
    Dpi {
        #[command(flatten)]
        common: Common,
        /// Pattern JSON files; data-only symbols when omitted.
        patterns: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    cp: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_anc: Option<usize>,
    #[arg(long)]
    window_min: Option<usize>,
    #[arg(long)]
    window_max: Option<usize>,
    #[arg(long)]
    sample_size: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR grid in dB: `start:step:stop` or `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    m_symbols: Option<usize>,
    #[arg(long)]
    p_ratio: Option<f64>,
    #[arg(long)]
    channel_paths: Option<usize>,
    #[arg(long)]
    delay_span: Option<usize>,
    /// Matched-filter reference for rmse: `pilot` or `full`.
    #[arg(long)]
    reference: Option<String>,
    /// Pilot counts for the ablation, comma separated.
    #[arg(long)]
    ks: Option<String>,
    /// Anchor counts for the ablation, comma separated.
    #[arg(long)]
    n_ancs: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::load(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            n: self.n,
            cp: self.cp,
            k: self.k,
            n_anc: self.n_anc,
            window_min: self.window_min,
            window_max: self.window_max,
            sample_size: self.sample_size,
            max_iter: self.max_iter,
            seed: self.seed,
            snr: self.snr,
            trials: self.trials,
            frames: self.frames,
            m_symbols: self.m_symbols,
            p_ratio: self.p_ratio,
            channel_paths: self.channel_paths,
            delay_span: self.delay_span,
            reference: self.reference,
            ks: self.ks,
            n_ancs: self.n_ancs,
            out: self.out,
        };
        ExperimentConfig::resolve(file.merged_with(flags))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design(c) => {
            let report = cmd_design(&c.resolve()?)?;
            println!("{report}");
        }
        Command::Ablation(c) => {
            println!("method,k,n_anc,delta_psl_pilot_only_db,delta_psl_data_db");
            for r in cmd_ablation(&c.resolve()?)? {
                println!(
                    "{},{},{},{},{}",
                    r.method,
                    r.k,
                    r.n_anc,
                    fmt_db(r.delta_psl_pilot_only_db),
                    fmt_db(r.delta_psl_data_db)
                );
            }
        }
        Command::Rmse { common, patterns } => {
            for r in cmd_rmse(&common.resolve()?, &patterns)? {
                println!("{} {} dB: {}", r.pattern_label, fmt_db(r.snr_db), fmt_lin(r.rmse_samples));
            }
        }
        Command::Ber { common, patterns } => {
            for r in cmd_ber(&common.resolve()?, &patterns)? {
                println!("{} {} dB: {}", r.pattern_label, fmt_db(r.snr_db), fmt_lin(r.ber));
            }
        }
        Command::AfDump { common, pattern } => {
            let path = cmd_af_dump(&common.resolve()?, &pattern)?;
            println!("{}", path.display());
        }
        Command::Dpi { common, patterns } => {
            for r in cmd_dpi(&common.resolve()?, &patterns)? {
                println!(
                    "N={} K={}: mean {} dB, peak {} dB",
                    r.n,
                    r.k,
                    fmt_db(r.mean_floor_db),
                    fmt_db(r.peak_floor_db)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
