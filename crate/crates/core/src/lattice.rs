//! Grid geometry, couplings, disorder sampling and the Neel pattern.
//!
//! Active qubits are numbered `0..num_qubits` in row-major order over the
//! active sites of the grid, and bit `i` of a basis index is the state of
//! active qubit `i`. All frequencies are ordinary frequencies in MHz.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Grid coordinate `(row, col)`.
pub type Site = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub g_mhz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    rows: usize,
    cols: usize,
    active_mask: Vec<bool>,
    coupling_mhz: f64,
    coupling_overrides: BTreeMap<(Site, Site), f64>,
    readout_index: usize,
    sites: Vec<Site>,
    index_of: Vec<Option<usize>>,
}

fn normalize_pair(a: Site, b: Site) -> (Site, Site) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl LatticeSpec {
    /// Builds and validates a lattice. `active_mask` is row-major over the full
    /// grid; `None` means every site is active. When `readout_index` is `None`
    /// the site nearest the grid centre is used.
    pub fn new(
        rows: usize,
        cols: usize,
        active_mask: Option<Vec<bool>>,
        coupling_mhz: f64,
        readout_index: Option<usize>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols < 2 {
            return Err(Error::Lattice(format!(
                "grid {rows}x{cols} must contain at least two sites"
            )));
        }
        let active_mask = active_mask.unwrap_or_else(|| vec![true; rows * cols]);
        if active_mask.len() != rows * cols {
            return Err(Error::Lattice(format!(
                "mask has {} entries, grid has {}",
                active_mask.len(),
                rows * cols
            )));
        }
        if !(coupling_mhz.is_finite() && coupling_mhz > 0.0) {
            return Err(Error::Lattice(format!(
                "coupling must be finite and positive, got {coupling_mhz} MHz"
            )));
        }

        let mut sites = Vec::new();
        let mut index_of = vec![None; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                if active_mask[r * cols + c] {
                    index_of[r * cols + c] = Some(sites.len());
                    sites.push((r, c));
                }
            }
        }
        if sites.len() < 2 {
            return Err(Error::Lattice(format!(
                "{} active sites, need at least 2",
                sites.len()
            )));
        }
        if sites.len() > 63 {
            return Err(Error::Lattice(format!(
                "{} active sites exceeds the 63-qubit bitmask limit",
                sites.len()
            )));
        }

        let mut lattice = LatticeSpec {
            rows,
            cols,
            active_mask,
            coupling_mhz,
            coupling_overrides: BTreeMap::new(),
            readout_index: 0,
            sites,
            index_of,
        };
        if !lattice.is_connected() {
            return Err(Error::Lattice("active subgraph is disconnected".into()));
        }
        lattice.readout_index = match readout_index {
            Some(r) if r < lattice.num_qubits() => r,
            Some(r) => {
                return Err(Error::Lattice(format!(
                    "readout index {r} is not an active qubit (have {})",
                    lattice.num_qubits()
                )))
            }
            None => default_readout(&lattice),
        };
        Ok(lattice)
    }

    /// Full grid with every site active.
    pub fn grid(rows: usize, cols: usize, coupling_mhz: f64) -> Result<Self> {
        Self::new(rows, cols, None, coupling_mhz, None)
    }

    /// Builds a lattice with the listed grid sites marked inactive.
    pub fn with_inactive(
        rows: usize,
        cols: usize,
        inactive: &[Site],
        coupling_mhz: f64,
        readout_index: Option<usize>,
    ) -> Result<Self> {
        let mut mask = vec![true; rows * cols];
        for &(r, c) in inactive {
            if r >= rows || c >= cols {
                return Err(Error::Lattice(format!(
                    "inactive site ({r},{c}) lies outside the {rows}x{cols} grid"
                )));
            }
            mask[r * cols + c] = false;
        }
        Self::new(rows, cols, Some(mask), coupling_mhz, readout_index)
    }

    /// Replaces the coupling of one grid-adjacent active pair.
    pub fn with_coupling_override(mut self, a: Site, b: Site, g_mhz: f64) -> Result<Self> {
        if !(g_mhz.is_finite() && g_mhz > 0.0) {
            return Err(Error::Lattice(format!(
                "coupling override must be finite and positive, got {g_mhz} MHz"
            )));
        }
        let adjacent = a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1;
        if !adjacent || self.index_of_site(a).is_none() || self.index_of_site(b).is_none() {
            return Err(Error::Lattice(format!(
                "override ({},{})-({},{}) is not an active nearest-neighbour pair",
                a.0, a.1, b.0, b.1
            )));
        }
        self.coupling_overrides.insert(normalize_pair(a, b), g_mhz);
        Ok(self)
    }

    pub fn with_readout(mut self, readout_index: usize) -> Result<Self> {
        if readout_index >= self.num_qubits() {
            return Err(Error::Lattice(format!(
                "readout index {readout_index} is not an active qubit"
            )));
        }
        self.readout_index = readout_index;
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_qubits(&self) -> usize {
        self.sites.len()
    }

    pub fn coupling_mhz(&self) -> f64 {
        self.coupling_mhz
    }

    pub fn readout_index(&self) -> usize {
        self.readout_index
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active_mask
    }

    pub fn coupling_overrides(&self) -> &BTreeMap<(Site, Site), f64> {
        &self.coupling_overrides
    }

    /// Grid coordinate of active qubit `index`.
    pub fn site(&self, index: usize) -> Site {
        self.sites[index]
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn index_of_site(&self, (r, c): Site) -> Option<usize> {
        if r >= self.rows || c >= self.cols {
            return None;
        }
        self.index_of[r * self.cols + c]
    }

    /// Nearest-neighbour couplings, each pair once with `i < j`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for (i, &(r, c)) in self.sites.iter().enumerate() {
            for nb in [(r, c + 1), (r + 1, c)] {
                if let Some(j) = self.index_of_site(nb) {
                    let g_mhz = self
                        .coupling_overrides
                        .get(&normalize_pair((r, c), nb))
                        .copied()
                        .unwrap_or(self.coupling_mhz);
                    out.push(Edge { i, j, g_mhz });
                }
            }
        }
        out.sort_by_key(|e| (e.i, e.j));
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.num_qubits();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            let (r, c) = self.sites[i];
            let mut neighbours = vec![(r + 1, c), (r, c + 1)];
            if r > 0 {
                neighbours.push((r - 1, c));
            }
            if c > 0 {
                neighbours.push((r, c - 1));
            }
            for nb in neighbours {
                if let Some(j) = self.index_of_site(nb) {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
        count == n
    }

    /// True if active qubit `index` belongs to the initially excited sublattice.
    pub fn on_sublattice_a(&self, index: usize) -> bool {
        let (r, c) = self.sites[index];
        (r + c) % 2 == 0
    }

    pub fn to_config(&self) -> LatticeConfig {
        let inactive_sites = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .filter(|&(r, c)| !self.active_mask[r * self.cols + c])
            .map(|(r, c)| [r, c])
            .collect();
        let coupling_overrides = self
            .coupling_overrides
            .iter()
            .map(|(&(a, b), &mhz)| CouplingOverride {
                a: [a.0, a.1],
                b: [b.0, b.1],
                mhz,
            })
            .collect();
        LatticeConfig {
            rows: self.rows,
            cols: self.cols,
            inactive_sites,
            coupling_mhz: self.coupling_mhz,
            readout_index: Some(self.readout_index),
            coupling_overrides,
        }
    }
}

/// Active qubit closest to the geometric centre of the grid, lowest index on ties.
pub fn default_readout(lattice: &LatticeSpec) -> usize {
    let cr = (lattice.rows as f64 - 1.0) / 2.0;
    let cc = (lattice.cols as f64 - 1.0) / 2.0;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &(r, c)) in lattice.sites.iter().enumerate() {
        // squared distances on a half-integer grid are exact in f64
        let d = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Bitmask with bit `i` set iff active qubit `i` sits on an even `(row + col)` site.
pub fn neel_pattern(lattice: &LatticeSpec) -> u64 {
    (0..lattice.num_qubits())
        .filter(|&i| lattice.on_sublattice_a(i))
        .fold(0u64, |m, i| m | (1u64 << i))
}

pub fn edges(lattice: &LatticeSpec) -> Vec<Edge> {
    lattice.edges()
}

/// Per-qubit detunings drawn uniformly from `[-bound, bound]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderProfile {
    pub detunings_mhz: Vec<f64>,
    pub bound_mhz: f64,
    pub seed: u64,
}

impl DisorderProfile {
    pub fn zero(num_qubits: usize) -> Self {
        DisorderProfile {
            detunings_mhz: vec![0.0; num_qubits],
            bound_mhz: 0.0,
            seed: 0,
        }
    }
}

pub fn sample_disorder(lattice: &LatticeSpec, h_mhz: f64, seed: u64) -> Result<DisorderProfile> {
    if !(h_mhz >= 0.0) || !h_mhz.is_finite() {
        return Err(Error::NegativeDisorder(h_mhz));
    }
    let n = lattice.num_qubits();
    let detunings_mhz = if h_mhz == 0.0 {
        vec![0.0; n]
    } else {
        let mut rng = rng_from_seed(seed);
        let dist = Uniform::new_inclusive(-h_mhz, h_mhz)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        (0..n).map(|_| dist.sample(&mut rng)).collect()
    };
    Ok(DisorderProfile {
        detunings_mhz,
        bound_mhz: h_mhz,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverride {
    pub a: [usize; 2],
    pub b: [usize; 2],
    pub mhz: f64,
}

/// Structured-text lattice description (TOML preset files and the `[lattice]`
/// table of run configs). Omitted fields take the 3x3 defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub rows: usize,
    pub cols: usize,
    pub inactive_sites: Vec<[usize; 2]>,
    pub coupling_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout_index: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coupling_overrides: Vec<CouplingOverride>,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            rows: 3,
            cols: 3,
            inactive_sites: Vec::new(),
            coupling_mhz: 2.185,
            readout_index: None,
            coupling_overrides: Vec::new(),
        }
    }
}

impl LatticeConfig {
    pub fn build(&self) -> Result<LatticeSpec> {
        let inactive: Vec<Site> = self.inactive_sites.iter().map(|s| (s[0], s[1])).collect();
        let mut lattice = LatticeSpec::with_inactive(
            self.rows,
            self.cols,
            &inactive,
            self.coupling_mhz,
            self.readout_index,
        )?;
        for o in &self.coupling_overrides {
            lattice = lattice.with_coupling_override((o.a[0], o.a[1]), (o.b[0], o.b[1]), o.mhz)?;
        }
        Ok(lattice)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            key: "lattice".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_by_three_defaults() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        assert_eq!(l.num_qubits(), 9);
        assert_eq!(l.edges().len(), 12);
        assert_eq!(l.readout_index(), 4);
    }

    #[test]
    fn smallest_lattice() {
        let l = LatticeSpec::grid(1, 2, 2.0).unwrap();
        assert_eq!(l.edges(), vec![Edge { i: 0, j: 1, g_mhz: 2.0 }]);
        assert_eq!(default_readout(&l), 0);
        assert_eq!(neel_pattern(&l), 0b01);
    }

    #[test]
    fn four_by_four_readout_tie_break() {
        // brute-force distances to (1.5, 1.5); four sites at distance^2 = 0.5
        let l = LatticeSpec::grid(4, 4, 2.75).unwrap();
        let mut best: Vec<usize> = Vec::new();
        let mut best_d = f64::MAX;
        for i in 0..16 {
            let (r, c) = l.site(i);
            let d = (r as f64 - 1.5).hypot(c as f64 - 1.5);
            if d < best_d - 1e-12 {
                best_d = d;
                best = vec![i];
            } else if (d - best_d).abs() < 1e-12 {
                best.push(i);
            }
        }
        assert_eq!(best, vec![5, 6, 9, 10]);
        assert_eq!(default_readout(&l), 5);
    }

    #[test]
    fn sixty_one_qubit_mask() {
        let l = LatticeSpec::with_inactive(8, 8, &[(0, 3), (5, 6), (7, 1)], 2.75, None).unwrap();
        assert_eq!(l.num_qubits(), 61);
    }

    #[test]
    fn masked_two_by_two() {
        let l = LatticeSpec::with_inactive(2, 2, &[(1, 1)], 2.0, None).unwrap();
        assert_eq!(l.edges().len(), 2);
    }

    #[test]
    fn neel_counts() {
        let l = LatticeSpec::grid(3, 3, 2.0).unwrap();
        let m = neel_pattern(&l);
        assert_eq!(m.count_ones(), 5);
        for i in [0, 2, 4, 6, 8] {
            assert!(m & (1 << i) != 0);
        }
        let l = LatticeSpec::grid(4, 4, 2.0).unwrap();
        assert_eq!(neel_pattern(&l).count_ones(), 8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LatticeSpec::grid(1, 1, 2.0).is_err());
        assert!(LatticeSpec::grid(2, 2, 0.0).is_err());
        assert!(LatticeSpec::grid(2, 2, -1.0).is_err());
        // a 1x3 chain with the middle removed is disconnected
        assert!(LatticeSpec::with_inactive(1, 3, &[(0, 1)], 2.0, None).is_err());
        assert!(LatticeSpec::new(2, 2, None, 2.0, Some(4)).is_err());
        let l = LatticeSpec::grid(2, 2, 2.0).unwrap();
        assert!(l.clone().with_coupling_override((0, 0), (1, 1), 2.0).is_err());
        assert!(l.with_coupling_override((0, 0), (0, 1), -2.0).is_err());
    }

    #[test]
    fn overrides_apply_to_one_edge() {
        let l = LatticeSpec::grid(2, 2, 2.0)
            .unwrap()
            .with_coupling_override((0, 1), (0, 0), 2.5)
            .unwrap();
        let e = l.edges();
        assert_eq!(e[0], Edge { i: 0, j: 1, g_mhz: 2.5 });
        assert!(e[1..].iter().all(|e| e.g_mhz == 2.0));
    }

    #[test]
    fn disorder_determinism_and_bounds() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        assert!(sample_disorder(&l, 0.0, 99)
            .unwrap()
            .detunings_mhz
            .iter()
            .all(|&d| d == 0.0));
        let a = sample_disorder(&l, 50.0, 11).unwrap();
        let b = sample_disorder(&l, 50.0, 11).unwrap();
        assert_eq!(a, b);
        assert!(sample_disorder(&l, -1.0, 0).is_err());
    }

    #[test]
    fn disorder_moments() {
        // uniform on [-50, 50]: mean 0, sd 50/sqrt(3); 1e4 draws → stderr ≈ 0.29
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let draws = 10_000;
        let mut sums = vec![0.0; 9];
        let mut max_abs: f64 = 0.0;
        for s in 0..draws {
            let d = sample_disorder(&l, 50.0, s).unwrap();
            for (acc, x) in sums.iter_mut().zip(&d.detunings_mhz) {
                *acc += x;
                max_abs = max_abs.max(x.abs());
            }
        }
        for s in sums {
            assert!((s / draws as f64).abs() < 1.0);
        }
        assert!(max_abs <= 50.0);
    }

    #[test]
    fn config_round_trip() {
        let text = r#"
            rows = 3
            cols = 4
            inactive_sites = [[0, 0]]
            coupling_mhz = 2.75
            readout_index = 3
        "#;
        let cfg = LatticeConfig::from_toml_str(text).unwrap();
        let l = cfg.build().unwrap();
        assert_eq!(l.num_qubits(), 11);
        assert_eq!(l.readout_index(), 3);
        assert_eq!(l.to_config(), cfg);
        assert!(LatticeConfig::from_toml_str("rows = 3\ncols = 3\ncoupling_mhz = 2.0\nrowz = 1").is_err());
    }
}
