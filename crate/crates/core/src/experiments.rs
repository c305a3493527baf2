//! Experiment configuration and the batch commands behind the CLI.
//!
//! Settings resolve in three layers: built-in defaults, then a flat TOML
//! file, then explicit overrides (command-line flags). Every command writes
//! its CSV into the output directory and is deterministic for a given
//! master seed.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::ambiguity::{af_power_via_dft, delta_psl, difference_multiplicity, psl, to_db};
use crate::comm::{ber_experiment, BerConfig, RayleighProfile};
use crate::error::{Error, Result};
use crate::optimizer::{greedy_csm, hybrid_design, OptimizerConfig, OptimizerTrace};
use crate::pattern::{make_uniform_comb, OfdmGrid, PilotPattern, SidelobeWindow};
use crate::report::{fmt_db, fmt_lin};
use crate::seed::{trial_rng, STREAM_ABLATION};
use crate::sensing::{
    data_included_psl, measure_dpi_floor, rmse_experiment, DataModulation, RmseConfig,
    SensingReference, SingleTarget,
};

const DEFAULT_RMSE_SNR: &str = "-30:5:30";
const DEFAULT_BER_SNR: &str = "0:2:40";

/// Optional settings, as read from a config file or from flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    pub n: Option<usize>,
    pub cp: Option<usize>,
    pub k: Option<usize>,
    pub n_anc: Option<usize>,
    pub window_min: Option<usize>,
    pub window_max: Option<usize>,
    pub sample_size: Option<usize>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    /// `start:step:stop` or a comma list, in dB.
    pub snr: Option<String>,
    pub trials: Option<usize>,
    pub frames: Option<usize>,
    pub m_symbols: Option<usize>,
    pub p_ratio: Option<f64>,
    pub channel_paths: Option<usize>,
    pub delay_span: Option<usize>,
    /// `pilot` or `full`.
    pub reference: Option<String>,
    /// Comma list of pilot counts for the ablation.
    pub ks: Option<String>,
    /// Comma list of anchor counts for the ablation.
    pub n_ancs: Option<String>,
    pub out: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `other` win.
    pub fn merged_with(self, other: ConfigOverrides) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            n, cp, k, n_anc, window_min, window_max, sample_size, max_iter, seed, snr, trials,
            frames, m_symbols, p_ratio, channel_paths, delay_span, reference, ks, n_ancs, out
        )
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub cp: usize,
    pub k: usize,
    pub n_anc: usize,
    pub window_min: usize,
    /// Defaults to N/2.
    pub window_max: Option<usize>,
    pub sample_size: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Per-command default when unset.
    pub snr: Option<Vec<f64>>,
    pub trials: usize,
    pub frames: usize,
    pub m_symbols: usize,
    pub p_ratio: f64,
    pub channel_paths: usize,
    pub delay_span: usize,
    pub reference: SensingReference,
    pub ks: Vec<usize>,
    pub n_ancs: Vec<usize>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 512,
            cp: 32,
            k: 32,
            n_anc: 16,
            window_min: 1,
            window_max: None,
            sample_size: 64,
            max_iter: 200,
            seed: 1,
            snr: None,
            trials: 500,
            frames: 2000,
            m_symbols: 4,
            p_ratio: 4.0,
            channel_paths: 8,
            delay_span: 2,
            reference: SensingReference::PilotOnly,
            ks: vec![32, 64, 128],
            n_ancs: vec![1, 5, 12, 16],
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Applies overrides on top of the defaults and validates the result.
    pub fn resolve(over: ConfigOverrides) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            n: over.n.unwrap_or(d.n),
            cp: over.cp.unwrap_or(d.cp),
            k: over.k.unwrap_or(d.k),
            n_anc: over.n_anc.unwrap_or(d.n_anc),
            window_min: over.window_min.unwrap_or(d.window_min),
            window_max: over.window_max.or(d.window_max),
            sample_size: over.sample_size.unwrap_or(d.sample_size),
            max_iter: over.max_iter.unwrap_or(d.max_iter),
            seed: over.seed.unwrap_or(d.seed),
            snr: over.snr.as_deref().map(parse_snr_grid).transpose()?,
            trials: over.trials.unwrap_or(d.trials),
            frames: over.frames.unwrap_or(d.frames),
            m_symbols: over.m_symbols.unwrap_or(d.m_symbols),
            p_ratio: over.p_ratio.unwrap_or(d.p_ratio),
            channel_paths: over.channel_paths.unwrap_or(d.channel_paths),
            delay_span: over.delay_span.unwrap_or(d.delay_span),
            reference: match over.reference.as_deref() {
                None => d.reference,
                Some("pilot") => SensingReference::PilotOnly,
                Some("full") => SensingReference::Full,
                Some(other) => {
                    return Err(Error::InvalidConfig(format!(
                        "reference must be `pilot` or `full`, got `{other}`"
                    )))
                }
            },
            ks: over.ks.as_deref().map(parse_list).transpose()?.unwrap_or(d.ks),
            n_ancs: over.n_ancs.as_deref().map(parse_list).transpose()?.unwrap_or(d.n_ancs),
            out: over.out.unwrap_or(d.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.optimizer_config(self.k, self.n_anc).validate(&grid)?;
        if self.trials == 0 || self.frames == 0 || self.m_symbols == 0 {
            return Err(Error::InvalidConfig(
                "trials, frames and m_symbols must be positive".into(),
            ));
        }
        if !(self.p_ratio > 0.0) || !self.p_ratio.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "p_ratio must be positive, got {}",
                self.p_ratio
            )));
        }
        if let Some(g) = &self.snr {
            if g.is_empty() {
                return Err(Error::InvalidConfig("empty SNR grid".into()));
            }
        }
        RayleighProfile::new(self.channel_paths, self.delay_span, grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<OfdmGrid> {
        OfdmGrid::new(self.n, self.cp)
    }

    pub fn window(&self) -> SidelobeWindow {
        SidelobeWindow {
            tau_min: self.window_min,
            tau_max: self.window_max.unwrap_or(self.n / 2),
        }
    }

    pub fn optimizer_config(&self, k: usize, n_anc: usize) -> OptimizerConfig {
        OptimizerConfig {
            k,
            n_anc,
            window: self.window(),
            sample_size: self.sample_size,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }

    fn snr_or(&self, default: &str) -> Vec<f64> {
        self.snr
            .clone()
            .unwrap_or_else(|| parse_snr_grid(default).expect("built-in grid parses"))
    }

    fn out_file(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        Ok(self.out.join(name))
    }
}

/// Parses `start:step:stop` (inclusive) or `a,b,c`.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse SNR grid `{text}`"));
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::InvalidConfig("empty SNR grid".into()));
    }
    if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + step * i as f64).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    let out: Vec<usize> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse list `{text}`")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty list".into()));
    }
    Ok(out)
}

fn load_patterns(files: &[PathBuf], grid: &OfdmGrid) -> Result<Vec<(String, PilotPattern)>> {
    if files.is_empty() {
        return Err(Error::InvalidConfig("no pattern files given".into()));
    }
    files
        .iter()
        .map(|path| {
            let p = PilotPattern::read_json(path).map_err(|e| match e {
                Error::Io(io) => {
                    Error::InvalidConfig(format!("cannot read pattern file {}: {io}", path.display()))
                }
                other => other,
            })?;
            let p = crate::pattern::validate_pattern(&p, grid)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((label, p))
        })
        .collect()
}

/// Outcome of `design`.
#[derive(Debug, Clone)]
pub struct DesignReport {
    pub pattern: PilotPattern,
    pub trace: OptimizerTrace,
    pub comb_psl_db: f64,
    pub pattern_path: PathBuf,
    pub trace_path: PathBuf,
}

impl DesignReport {
    pub fn delta_psl_db(&self) -> Option<f64> {
        delta_psl(self.comb_psl_db, self.trace.final_psl_db).ok()
    }
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pilots: {} (anchors {})",
            self.pattern.k(),
            self.pattern.n_anchors()
        )?;
        writeln!(f, "PSL (dB): {}", fmt_db(self.trace.final_psl_db))?;
        match self.delta_psl_db() {
            Some(d) => writeln!(f, "delta PSL vs comb (dB): {}", fmt_db(d))?,
            None => writeln!(f, "delta PSL vs comb (dB): n/a")?,
        }
        writeln!(f, "stage-1 PSL (dB): {}", fmt_db(self.trace.stage1_psl_db))?;
        writeln!(f, "final PSL (dB): {}", fmt_db(self.trace.final_psl_db))?;
        writeln!(
            f,
            "sweeps: {}, swaps accepted: {}",
            self.trace.sweeps_executed, self.trace.swaps_accepted
        )?;
        writeln!(f, "pattern: {}", self.pattern_path.display())?;
        write!(f, "trace: {}", self.trace_path.display())
    }
}

/// Runs the hybrid design and writes `pattern.json` and `trace.csv`.
pub fn cmd_design(cfg: &ExperimentConfig) -> Result<DesignReport> {
    let grid = cfg.grid()?;
    let ocfg = cfg.optimizer_config(cfg.k, cfg.n_anc);
    let (pattern, trace) = hybrid_design(&grid, &ocfg)?;
    let comb_psl_db = psl(&make_uniform_comb(&grid, cfg.k)?, &ocfg.window)?.db;

    let pattern_path = cfg.out_file("pattern.json")?;
    pattern.write_json(&pattern_path)?;
    let trace_path = cfg.out_file("trace.csv")?;
    let mut w = BufWriter::new(File::create(&trace_path)?);
    trace.write_csv(&mut w)?;
    w.flush()?;

    Ok(DesignReport {
        pattern,
        trace,
        comb_psl_db,
        pattern_path,
        trace_path,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub method: &'static str,
    pub k: usize,
    pub n_anc: usize,
    pub delta_psl_pilot_only_db: f64,
    pub delta_psl_data_db: f64,
}

/// Mean data-included PSL over `cfg.trials` payloads. Trial `t` uses the
/// same payload stream for every pattern.
fn mean_data_psl(pattern: &PilotPattern, cfg: &ExperimentConfig, window: &SidelobeWindow) -> Result<f64> {
    let stream = STREAM_ABLATION ^ ((pattern.k() as u64) << 32);
    let vals: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, stream, t as u64);
            data_included_psl(pattern, cfg.p_ratio, DataModulation::Qam16, window, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(to_db(vals.iter().sum::<f64>() / vals.len() as f64))
}

/// PSL suppression gain over the comb for every `(K, N_anc)` cell and each of
/// the uniform, greedy and hybrid methods. Writes `ablation.csv`.
pub fn cmd_ablation(cfg: &ExperimentConfig) -> Result<Vec<AblationRow>> {
    let grid = cfg.grid()?;
    let window = cfg.window();
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        let comb = make_uniform_comb(&grid, k)?;
        let comb_pilot = psl(&comb, &window)?.db;
        let comb_data = mean_data_psl(&comb, cfg, &window)?;
        for &n_anc in &cfg.n_ancs {
            let ocfg = cfg.optimizer_config(k, n_anc);
            let (greedy, _) = greedy_csm(&grid, &ocfg)?;
            let (hybrid, _) = hybrid_design(&grid, &ocfg)?;
            for (method, p) in [("uniform", &comb), ("greedy", &greedy), ("hybrid", &hybrid)] {
                let pilot = psl(p, &window)?.db;
                let data = mean_data_psl(p, cfg, &window)?;
                rows.push(AblationRow {
                    method,
                    k,
                    n_anc,
                    delta_psl_pilot_only_db: delta_psl(comb_pilot, pilot)?,
                    delta_psl_data_db: delta_psl(comb_data, data)?,
                });
            }
        }
    }
    let mut w = BufWriter::new(File::create(cfg.out_file("ablation.csv")?)?);
    writeln!(w, "method,k,n_anc,delta_psl_pilot_only_db,delta_psl_data_db")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.method,
            r.k,
            r.n_anc,
            fmt_db(r.delta_psl_pilot_only_db),
            fmt_db(r.delta_psl_data_db)
        )?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub snr_db: f64,
    pub pattern_label: String,
    pub m_symbols: usize,
    pub n_trials: usize,
    pub rmse_samples: f64,
}

/// Range RMSE versus SNR for each pattern file. Writes `rmse.csv`.
pub fn cmd_rmse(cfg: &ExperimentConfig, pattern_files: &[PathBuf]) -> Result<Vec<RmseRow>> {
    let grid = cfg.grid()?;
    let patterns = load_patterns(pattern_files, &grid)?;
    let rcfg = RmseConfig {
        snr_grid_db: cfg.snr_or(DEFAULT_RMSE_SNR),
        m_symbols: cfg.m_symbols,
        n_trials: cfg.trials,
        p_ratio: cfg.p_ratio,
        data: DataModulation::Qam16,
        reference: cfg.reference,
        seed: cfg.seed,
    };
    let sampler = SingleTarget::half_grid(cfg.n);
    let mut rows = Vec::new();
    for (label, p) in &patterns {
        for pt in rmse_experiment(p, &sampler, &rcfg)? {
            rows.push(RmseRow {
                snr_db: pt.snr_db,
                pattern_label: label.clone(),
                m_symbols: cfg.m_symbols,
                n_trials: cfg.trials,
                rmse_samples: pt.rmse_samples,
            });
        }
    }
    let mut w = BufWriter::new(File::create(cfg.out_file("rmse.csv")?)?);
    writeln!(w, "snr_db,pattern_label,m_symbols,n_trials,rmse_samples")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_db(r.snr_db),
            r.pattern_label,
            r.m_symbols,
            r.n_trials,
            fmt_lin(r.rmse_samples)
        )?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub snr_db: f64,
    pub pattern_label: String,
    pub n_frames: usize,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

/// BER versus SNR over Rayleigh multipath for each pattern file. Writes `ber.csv`.
pub fn cmd_ber(cfg: &ExperimentConfig, pattern_files: &[PathBuf]) -> Result<Vec<BerRow>> {
    let grid = cfg.grid()?;
    let patterns = load_patterns(pattern_files, &grid)?;
    let bcfg = BerConfig {
        snr_grid_db: cfg.snr_or(DEFAULT_BER_SNR),
        n_frames: cfg.frames,
        p_ratio: cfg.p_ratio,
        seed: cfg.seed,
    };
    let sampler = RayleighProfile::new(cfg.channel_paths, cfg.delay_span, grid)?;
    let mut rows = Vec::new();
    for (label, p) in &patterns {
        for pt in ber_experiment(p, &sampler, &bcfg)? {
            rows.push(BerRow {
                snr_db: pt.snr_db,
                pattern_label: label.clone(),
                n_frames: cfg.frames,
                total_bits: pt.total_bits,
                bit_errors: pt.bit_errors,
                ber: pt.ber,
            });
        }
    }
    let mut w = BufWriter::new(File::create(cfg.out_file("ber.csv")?)?);
    writeln!(w, "snr_db,pattern_label,n_frames,total_bits,bit_errors,ber")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_db(r.snr_db),
            r.pattern_label,
            r.n_frames,
            r.total_bits,
            r.bit_errors,
            fmt_lin(r.ber)
        )?;
    }
    w.flush()?;
    Ok(rows)
}

/// Writes the ambiguity power profile of a pattern file to `af.csv`.
pub fn cmd_af_dump(cfg: &ExperimentConfig, pattern_file: &Path) -> Result<PathBuf> {
    let grid = cfg.grid()?;
    let (_, p) = load_patterns(&[pattern_file.to_path_buf()], &grid)?
        .pop()
        .expect("one pattern loaded");
    let profile = af_power_via_dft(&difference_multiplicity(&p), &cfg.window())?;
    let path = cfg.out_file("af.csv")?;
    let mut w = BufWriter::new(File::create(&path)?);
    profile.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpiRow {
    pub n: usize,
    pub k: usize,
    pub p_ratio: f64,
    pub mean_floor_db: f64,
    pub peak_floor_db: f64,
}

/// Data-to-pilot interference floor of each pattern file, or of data-only
/// symbols when no file is given. Writes `dpi.csv`.
pub fn cmd_dpi(cfg: &ExperimentConfig, pattern_files: &[PathBuf]) -> Result<Vec<DpiRow>> {
    let grid = cfg.grid()?;
    let window = cfg.window();
    let patterns: Vec<Option<PilotPattern>> = if pattern_files.is_empty() {
        vec![None]
    } else {
        load_patterns(pattern_files, &grid)?
            .into_iter()
            .map(|(_, p)| Some(p))
            .collect()
    };
    let mut rows = Vec::new();
    for p in &patterns {
        let floor = measure_dpi_floor(
            cfg.n,
            p.as_ref(),
            cfg.p_ratio,
            DataModulation::Qam16,
            &window,
            cfg.trials,
            cfg.seed,
        )?;
        rows.push(DpiRow {
            n: cfg.n,
            k: p.as_ref().map_or(0, |p| p.k()),
            p_ratio: cfg.p_ratio,
            mean_floor_db: floor.mean_db,
            peak_floor_db: floor.peak_db,
        });
    }
    let mut w = BufWriter::new(File::create(cfg.out_file("dpi.csv")?)?);
    writeln!(w, "n,k,p_ratio,mean_floor_db,peak_floor_db")?;
    for r in &rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            r.k,
            fmt_lin(r.p_ratio),
            fmt_db(r.mean_floor_db),
            fmt_db(r.peak_floor_db)
        )?;
    }
    w.flush()?;
    Ok(rows)
}
