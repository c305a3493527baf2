//! Hybrid pilot placement: anchor-constrained greedy construction followed by
//! stochastic cyclic coordinate descent (SCCD) over single-pilot swaps.
//!
//! Candidate swaps are screened with an incrementally updated `Psi(tau)`
//! table, checking the currently worst lags first so that most candidates are
//! rejected after a handful of lags. A candidate that survives the screen is
//! confirmed with [`psl_after_swap`], so every accepted move is judged by the
//! exact integer-count objective.

use std::io::Write;

use num_complex::Complex64;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ambiguity::{
    af_direct_with, difference_multiplicity, psl, psl_after_swap, to_db, DifferenceMultiplicity,
    Twiddles,
};
use crate::error::{Error, Result};
use crate::pattern::{make_anchor_set, OfdmGrid, PilotPattern, SidelobeWindow};
use crate::report::fmt_db;

/// A swap is accepted only if it lowers the linear PSL by this relative margin.
const ACCEPT_REL: f64 = 1e-10;
/// Screening margin, looser than [`ACCEPT_REL`] so the screen never rejects a
/// swap the exact objective would accept.
const SCREEN_REL: f64 = 1e-11;
/// Upper bound on the number of patterns [`exhaustive_oracle`] will visit.
pub const ORACLE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizerConfig {
    /// Total pilot count K.
    pub k: usize,
    /// Number of frozen anchors.
    pub n_anc: usize,
    pub window: SidelobeWindow,
    /// Candidates drawn per swap attempt (S).
    pub sample_size: usize,
    /// Cap on SCCD sweeps.
    pub max_iter: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Defaults for a given grid: no anchors, full window, S = 64, 200 sweeps.
    pub fn new(grid: &OfdmGrid, k: usize) -> Self {
        Self {
            k,
            n_anc: 0,
            window: SidelobeWindow::full(grid.n()),
            sample_size: 64,
            max_iter: 200,
            seed: 1,
        }
    }

    pub fn validate(&self, grid: &OfdmGrid) -> Result<()> {
        let n = grid.n();
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidConfig(format!(
                "pilot count {} must be in 1..={n}",
                self.k
            )));
        }
        if self.n_anc > self.k {
            return Err(Error::InvalidConfig(format!(
                "{} anchors exceed the pilot count {}",
                self.n_anc, self.k
            )));
        }
        if self.sample_size == 0 {
            return Err(Error::InvalidConfig("sample size must be positive".into()));
        }
        self.window.check(n)
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub sweep: usize,
    pub psl_db: f64,
    /// Cumulative accepted swaps at the end of this sweep.
    pub swaps_accepted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace {
    pub stage1_psl_db: f64,
    pub final_psl_db: f64,
    pub sweeps_executed: usize,
    pub swaps_accepted: usize,
    /// Starts with sweep 0 (the input pattern).
    pub psl_history: Vec<SweepRecord>,
}

impl OptimizerTrace {
    /// Writes `sweep,psl_db,swaps_accepted` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "sweep,psl_db,swaps_accepted")?;
        for r in &self.psl_history {
            writeln!(out, "{},{},{}", r.sweep, fmt_db(r.psl_db), r.swaps_accepted)?;
        }
        Ok(())
    }
}

/// `Psi(tau)` over the half window `[tau_min, tau_max]`, used to screen moves.
///
/// `|Psi(N - tau)| = |Psi(tau)|`, so the half window is enough.
struct SwapScreen {
    tw: Twiddles,
    tau0: usize,
    lags: Vec<usize>,
    psi: Vec<Complex64>,
}

impl SwapScreen {
    fn new(n: usize, window: &SidelobeWindow) -> Self {
        Self {
            tw: Twiddles::new(n),
            tau0: window.tau_min,
            lags: (window.tau_min..=window.tau_max).collect(),
            psi: vec![Complex64::default(); window.tau_max - window.tau_min + 1],
        }
    }

    /// Recomputes `Psi` from the pilot set and orders lags worst-first.
    fn reset(&mut self, indices: &[usize]) {
        let tau0 = self.tau0;
        for (slot, tau) in self.psi.iter_mut().zip(tau0..) {
            *slot = indices.iter().map(|&k| self.tw.phasor(k, tau)).sum();
        }
        let psi = &self.psi;
        self.lags
            .sort_by(|&a, &b| psi[b - tau0].norm_sqr().total_cmp(&psi[a - tau0].norm_sqr()).then(a.cmp(&b)));
    }

    /// Peak power after removing `remove` (if any) and adding `add`, or `None`
    /// as soon as some lag reaches `limit`.
    fn peak_below(&self, remove: Option<usize>, add: usize, limit: f64) -> Option<f64> {
        let tau0 = self.tau0;
        let mut peak = 0.0f64;
        for &tau in &self.lags {
            let mut v = self.psi[tau - tau0] + self.tw.phasor(add, tau);
            if let Some(r) = remove {
                v -= self.tw.phasor(r, tau);
            }
            let p = v.norm_sqr();
            if p >= limit {
                return None;
            }
            peak = peak.max(p);
        }
        Some(peak)
    }
}

/// Stage 1: start from the anchors and add one pilot at a time, each time
/// choosing the free tone that minimizes the windowed peak `|Psi|`.
/// Ties go to the smallest index.
pub fn greedy_csm(grid: &OfdmGrid, cfg: &OptimizerConfig) -> Result<(PilotPattern, f64)> {
    cfg.validate(grid)?;
    let n = grid.n();
    let anchors = make_anchor_set(grid, cfg.n_anc)?;
    let mut chosen = anchors.clone();
    chosen.sort_unstable();
    let mut used = vec![false; n];
    for &a in &anchors {
        used[a] = true;
    }

    let mut screen = SwapScreen::new(n, &cfg.window);
    while chosen.len() < cfg.k {
        screen.reset(&chosen);
        let mut best: Option<(usize, f64)> = None;
        for cand in (0..n).filter(|&c| !used[c]) {
            let limit = match best {
                Some((_, b)) => b * (1.0 - ACCEPT_REL),
                None => f64::INFINITY,
            };
            if let Some(peak) = screen.peak_below(None, cand, limit) {
                best = Some((cand, peak));
            }
        }
        // there is always a free tone while chosen.len() < k <= n
        let (pick, _) = best.expect("free tone available");
        used[pick] = true;
        let pos = chosen.binary_search(&pick).unwrap_err();
        chosen.insert(pos, pick);
    }

    let pattern = PilotPattern::new(chosen, anchors, n)?;
    let value = psl(&pattern, &cfg.window)?;
    Ok((pattern, value.db))
}

/// Stage 2: stochastic cyclic coordinate descent.
///
/// Each sweep visits the non-anchor pilots in a seeded random order. For
/// each pilot a random subset of at most `sample_size` unused tones is drawn
/// and the first one whose swap strictly lowers the PSL is taken. Sweeps
/// repeat until one makes no swap or `max_iter` sweeps have run.
pub fn sccd_refine(
    pattern: &PilotPattern,
    grid: &OfdmGrid,
    cfg: &OptimizerConfig,
) -> Result<(PilotPattern, OptimizerTrace)> {
    cfg.validate(grid)?;
    let pattern = crate::pattern::validate_pattern(pattern, grid)?;
    if pattern.k() != cfg.k {
        return Err(Error::InvalidConfig(format!(
            "pattern has {} pilots, configuration expects {}",
            pattern.k(),
            cfg.k
        )));
    }
    let n = grid.n();
    let k2 = (cfg.k * cfg.k) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut current = pattern;
    let mut lam: DifferenceMultiplicity = difference_multiplicity(&current);
    let mut current_lin = psl(&current, &cfg.window)?.linear;
    let stage1_db = to_db(current_lin);
    let mut unused = current.unused_indices();
    let mut screen = SwapScreen::new(n, &cfg.window);
    screen.reset(current.indices());

    let mut history = vec![SweepRecord {
        sweep: 0,
        psl_db: stage1_db,
        swaps_accepted: 0,
    }];
    let mut swaps = 0usize;
    let mut sweeps = 0usize;

    while sweeps < cfg.max_iter {
        let mut improved = false;
        let mut order: Vec<usize> = current.free_indices().collect();
        order.shuffle(&mut rng);

        for p in order {
            let s = cfg.sample_size.min(unused.len());
            if s == 0 {
                continue;
            }
            let picks = index::sample(&mut rng, unused.len(), s);
            let limit = current_lin * k2 * (1.0 - SCREEN_REL);
            let mut accepted = None;
            for slot in picks.iter() {
                let u = unused[slot];
                if screen.peak_below(Some(p), u, limit).is_none() {
                    continue;
                }
                let (lin, new_lam) = psl_after_swap(&current, &lam, p, u, &cfg.window)?;
                if lin < current_lin * (1.0 - ACCEPT_REL) {
                    accepted = Some((slot, u, lin, new_lam));
                    break;
                }
            }
            if let Some((slot, u, lin, new_lam)) = accepted {
                current = current.with_swap(p, u)?;
                lam = new_lam;
                current_lin = lin;
                unused.remove(slot);
                let pos = unused.binary_search(&p).unwrap_err();
                unused.insert(pos, p);
                screen.reset(current.indices());
                swaps += 1;
                improved = true;
            }
        }

        sweeps += 1;
        history.push(SweepRecord {
            sweep: sweeps,
            psl_db: to_db(current_lin),
            swaps_accepted: swaps,
        });
        if !improved {
            break;
        }
    }

    let trace = OptimizerTrace {
        stage1_psl_db: stage1_db,
        final_psl_db: to_db(current_lin),
        sweeps_executed: sweeps,
        swaps_accepted: swaps,
        psl_history: history,
    };
    Ok((current, trace))
}

/// Greedy construction followed by SCCD refinement.
pub fn hybrid_design(grid: &OfdmGrid, cfg: &OptimizerConfig) -> Result<(PilotPattern, OptimizerTrace)> {
    let (stage1, _) = greedy_csm(grid, cfg)?;
    sccd_refine(&stage1, grid, cfg)
}

/// Global PSL minimum over every K-subset that contains the anchor set.
///
/// Scores each pattern with the direct phasor sum, independently of the
/// difference-count route the optimizer uses. Ties go to the
/// lexicographically smallest sorted index set.
pub fn exhaustive_oracle(
    grid: &OfdmGrid,
    k: usize,
    n_anc: usize,
    window: &SidelobeWindow,
) -> Result<(PilotPattern, f64)> {
    let n = grid.n();
    let cfg = OptimizerConfig {
        k,
        n_anc,
        window: *window,
        sample_size: 1,
        max_iter: 0,
        seed: 0,
    };
    cfg.validate(grid)?;
    let anchors = make_anchor_set(grid, n_anc)?;
    let free: Vec<usize> = (0..n).filter(|i| !anchors.contains(i)).collect();
    let r = k - n_anc;
    let count = binomial(free.len() as u128, r as u128);
    if count > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge(count));
    }

    let tw = Twiddles::new(n);
    let lags: Vec<usize> = window.lags(n).collect();
    let k2 = (k * k) as f64;
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut pick: Vec<usize> = (0..r).collect();
    let mut set = Vec::with_capacity(k);
    loop {
        set.clear();
        set.extend_from_slice(&anchors);
        set.extend(pick.iter().map(|&i| free[i]));
        set.sort_unstable();
        let af = af_direct_with(&tw, &set);
        let peak = lags.iter().map(|&t| af[t].norm_sqr()).fold(0.0, f64::max) / k2;
        let better = match &best {
            None => true,
            Some((bset, bval)) => {
                let tol = 1e-12 * bval.max(1e-300);
                peak < bval - tol || ((peak - bval).abs() <= tol && set < *bset)
            }
        };
        if better {
            best = Some((set.clone(), peak));
        }
        if !next_combination(&mut pick, free.len()) {
            break;
        }
    }
    let (set, val) = best.expect("at least one admissible pattern");
    Ok((PilotPattern::new(set, anchors, n)?, to_db(val)))
}

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) / (i + 1);
        if acc > ORACLE_LIMIT * 1_000 {
            return acc;
        }
    }
    acc
}

/// Advances `c` to the next r-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
