//! Grid numerology, pilot patterns and the sidelobe lag window.
//!
//! A [`PilotPattern`] is the optimization variable of the whole crate: the
//! sorted set of active pilot subcarriers together with the frozen anchor
//! subset that keeps channel estimation well conditioned.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// OFDM numerology: subcarrier count and cyclic prefix length in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OfdmGrid {
    n_subcarriers: usize,
    cp_length: usize,
}

impl OfdmGrid {
    pub fn new(n_subcarriers: usize, cp_length: usize) -> Result<Self> {
        if n_subcarriers < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 subcarriers, got {n_subcarriers}"
            )));
        }
        if cp_length >= n_subcarriers {
            return Err(Error::InvalidGrid(format!(
                "cyclic prefix {cp_length} must be shorter than N = {n_subcarriers}"
            )));
        }
        Ok(Self {
            n_subcarriers,
            cp_length,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n_subcarriers
    }

    #[inline]
    pub fn cp_length(&self) -> usize {
        self.cp_length
    }
}

/// Set of active pilot tones with a frozen anchor subset.
///
/// Indices and anchors are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PilotPattern {
    indices: Vec<usize>,
    anchors: Vec<usize>,
    grid_n: usize,
}

impl PilotPattern {
    pub fn new(mut indices: Vec<usize>, mut anchors: Vec<usize>, grid_n: usize) -> Result<Self> {
        indices.sort_unstable();
        anchors.sort_unstable();
        check_invariants(&indices, &anchors, grid_n)?;
        Ok(Self {
            indices,
            anchors,
            grid_n,
        })
    }

    /// Pattern without anchors.
    pub fn free(indices: Vec<usize>, grid_n: usize) -> Result<Self> {
        Self::new(indices, Vec::new(), grid_n)
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    /// Grid size the pattern was designed for.
    #[inline]
    pub fn n(&self) -> usize {
        self.grid_n
    }

    /// Pilot count K.
    #[inline]
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn n_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_anchor(&self, index: usize) -> bool {
        self.anchors.binary_search(&index).is_ok()
    }

    /// Pilots that are not anchors, ascending.
    pub fn free_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied().filter(|&i| !self.is_anchor(i))
    }

    /// Subcarriers not carrying a pilot, ascending.
    pub fn unused_indices(&self) -> Vec<usize> {
        (0..self.grid_n).filter(|&i| !self.contains(i)).collect()
    }

    /// Returns the pattern with `remove` replaced by `add`. Anchors cannot be removed.
    pub fn with_swap(&self, remove: usize, add: usize) -> Result<Self> {
        let pos = self
            .indices
            .binary_search(&remove)
            .map_err(|_| Error::InvalidSwap(format!("{remove} is not a pilot")))?;
        if self.is_anchor(remove) {
            return Err(Error::InvalidSwap(format!("{remove} is an anchor")));
        }
        if add >= self.grid_n {
            return Err(Error::IndexOutOfRange {
                index: add,
                n: self.grid_n,
            });
        }
        if self.contains(add) {
            return Err(Error::InvalidSwap(format!("{add} is already a pilot")));
        }
        let mut indices = self.indices.clone();
        indices.remove(pos);
        let ins = indices.binary_search(&add).unwrap_err();
        indices.insert(ins, add);
        Ok(Self {
            indices,
            anchors: self.anchors.clone(),
            grid_n: self.grid_n,
        })
    }

    pub fn to_file_format(&self) -> PatternFile {
        PatternFile {
            n: self.grid_n,
            k: self.k(),
            anchors: self.anchors.clone(),
            pilots: self.indices.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        // PatternFile holds only integers and vectors, serialization cannot fail.
        serde_json::to_string_pretty(&self.to_file_format()).expect("pattern serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PatternFile = serde_json::from_str(text)?;
        file.into_pattern()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn check_invariants(indices: &[usize], anchors: &[usize], grid_n: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::EmptyPattern);
    }
    debug_assert!(indices.windows(2).all(|w| w[0] <= w[1]));
    for w in indices.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    if let Some(&last) = indices.last() {
        if last >= grid_n {
            return Err(Error::IndexOutOfRange {
                index: last,
                n: grid_n,
            });
        }
    }
    for w in anchors.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateIndex(w[0]));
        }
    }
    for &a in anchors {
        if indices.binary_search(&a).is_err() {
            return Err(Error::AnchorNotInPattern(a));
        }
    }
    Ok(())
}

/// Checks every pattern invariant against `grid` and returns the pattern.
pub fn validate_pattern(pattern: &PilotPattern, grid: &OfdmGrid) -> Result<PilotPattern> {
    if pattern.grid_n != grid.n() {
        return Err(Error::GridMismatch {
            pattern_n: pattern.grid_n,
            grid_n: grid.n(),
        });
    }
    check_invariants(&pattern.indices, &pattern.anchors, pattern.grid_n)?;
    Ok(pattern.clone())
}

/// Periodic comb of `k` tones. When `k` does not divide N the tones sit at
/// `floor(i * N / k)`.
pub fn make_uniform_comb(grid: &OfdmGrid, k: usize) -> Result<PilotPattern> {
    let n = grid.n();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "comb size {k} must be in 1..={n}"
        )));
    }
    let indices = (0..k).map(|i| i * n / k).collect();
    PilotPattern::free(indices, n)
}

/// Equispaced anchor tones at `round(i * N / n_anc)`.
pub fn make_anchor_set(grid: &OfdmGrid, n_anc: usize) -> Result<Vec<usize>> {
    let n = grid.n();
    if n_anc > n {
        return Err(Error::InvalidConfig(format!(
            "{n_anc} anchors do not fit on {n} subcarriers"
        )));
    }
    // round half up in integer arithmetic: (2 i N + n_anc) / (2 n_anc)
    Ok((0..n_anc)
        .map(|i| ((2 * i * n + n_anc) / (2 * n_anc)) % n)
        .collect())
}

/// On-disk JSON layout of a pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFile {
    pub n: usize,
    pub k: usize,
    pub anchors: Vec<usize>,
    pub pilots: Vec<usize>,
}

impl PatternFile {
    pub fn into_pattern(self) -> Result<PilotPattern> {
        if self.k != self.pilots.len() {
            return Err(Error::InvalidConfig(format!(
                "k = {} but {} pilots listed",
                self.k,
                self.pilots.len()
            )));
        }
        PilotPattern::new(self.pilots, self.anchors, self.n)
    }
}

/// Lag region over which sidelobes are measured: all `tau` whose cyclic
/// distance `min(tau, N - tau)` lies in `[tau_min, tau_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SidelobeWindow {
    pub tau_min: usize,
    pub tau_max: usize,
}

impl SidelobeWindow {
    pub fn new(tau_min: usize, tau_max: usize, n: usize) -> Result<Self> {
        let w = Self { tau_min, tau_max };
        w.check(n)?;
        Ok(w)
    }

    /// Widest nondegenerate window, `[1, N/2]`.
    pub fn full(n: usize) -> Self {
        Self {
            tau_min: 1,
            tau_max: (n / 2).max(1),
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.tau_min == 0 || self.tau_min > self.tau_max || self.tau_max > n / 2 {
            return Err(Error::InvalidWindow {
                tau_min: self.tau_min,
                tau_max: self.tau_max,
                n,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, tau: usize, n: usize) -> bool {
        let tau = tau % n;
        let d = tau.min(n - tau);
        self.tau_min <= d && d <= self.tau_max
    }

    /// Every lag in `[0, N)` inside the window, ascending.
    pub fn lags(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..n).filter(move |&t| self.contains(t, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> OfdmGrid {
        OfdmGrid::new(n, 0).unwrap()
    }

    #[test]
    fn grid_invariants() {
        assert!(OfdmGrid::new(1, 0).is_err());
        assert!(OfdmGrid::new(8, 8).is_err());
        assert!(OfdmGrid::new(8, 7).is_ok());
    }

    #[test]
    fn validate_examples() {
        let g = grid(512);
        let p = PilotPattern::new(vec![0, 16, 32], vec![0], 512).unwrap();
        assert_eq!(validate_pattern(&p, &g).unwrap(), p);

        assert!(matches!(
            PilotPattern::free(vec![0, 0, 5], 512),
            Err(Error::DuplicateIndex(0))
        ));
        assert!(matches!(
            PilotPattern::free(vec![0, 600], 512),
            Err(Error::IndexOutOfRange { index: 600, .. })
        ));
        assert!(matches!(
            PilotPattern::new(vec![0, 5], vec![3], 512),
            Err(Error::AnchorNotInPattern(3))
        ));
        assert!(matches!(
            PilotPattern::free(vec![], 512),
            Err(Error::EmptyPattern)
        ));
        assert!(matches!(
            validate_pattern(&p, &grid(256)),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let g = grid(64);
        let p = PilotPattern::new(vec![9, 3, 40], vec![40], 64).unwrap();
        let once = validate_pattern(&p, &g).unwrap();
        let twice = validate_pattern(&once, &g).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.indices(), &[3, 9, 40]);
    }

    #[test]
    fn comb_examples() {
        assert_eq!(make_uniform_comb(&grid(8), 4).unwrap().indices(), &[0, 2, 4, 6]);
        assert_eq!(make_uniform_comb(&grid(8), 3).unwrap().indices(), &[0, 2, 5]);
        let comb = make_uniform_comb(&grid(512), 32).unwrap();
        let expect: Vec<usize> = (0..32).map(|i| 16 * i).collect();
        assert_eq!(comb.indices(), expect.as_slice());
        assert!(comb.anchors().is_empty());
        assert!(make_uniform_comb(&grid(8), 0).is_err());
        assert!(make_uniform_comb(&grid(8), 9).is_err());
    }

    #[test]
    fn anchor_examples() {
        let a = make_anchor_set(&grid(512), 16).unwrap();
        let expect: Vec<usize> = (0..16).map(|i| 32 * i).collect();
        assert_eq!(a, expect);
        assert_eq!(make_anchor_set(&grid(512), 1).unwrap(), vec![0]);
        assert_eq!(make_anchor_set(&grid(16), 4).unwrap(), vec![0, 4, 8, 12]);
        assert!(make_anchor_set(&grid(16), 0).unwrap().is_empty());
        assert!(make_anchor_set(&grid(16), 17).is_err());
    }

    #[test]
    fn swap_rules() {
        let p = PilotPattern::new(vec![0, 4, 9], vec![0], 16).unwrap();
        assert_eq!(p.with_swap(9, 2).unwrap().indices(), &[0, 2, 4]);
        assert!(p.with_swap(0, 2).is_err());
        assert!(p.with_swap(3, 2).is_err());
        assert!(p.with_swap(4, 9).is_err());
        assert!(p.with_swap(4, 16).is_err());
    }

    #[test]
    fn window_lags() {
        let w = SidelobeWindow::new(2, 3, 10).unwrap();
        assert_eq!(w.lags(10).collect::<Vec<_>>(), vec![2, 3, 7, 8]);
        assert_eq!(SidelobeWindow::full(8).lags(8).count(), 7);
        assert!(SidelobeWindow::new(0, 3, 10).is_err());
        assert!(SidelobeWindow::new(4, 3, 10).is_err());
        assert!(SidelobeWindow::new(1, 6, 10).is_err());
    }

    #[test]
    fn json_layout() {
        let p = PilotPattern::new(vec![7, 1, 3], vec![1], 8).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["n"], 8);
        assert_eq!(v["k"], 3);
        assert_eq!(v["anchors"], serde_json::json!([1]));
        assert_eq!(v["pilots"], serde_json::json!([1, 3, 7]));
        assert!(PilotPattern::from_json(r#"{"n":8,"k":2,"anchors":[],"pilots":[1]}"#).is_err());
    }
}
