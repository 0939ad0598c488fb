//! Exact diagonalization inside a fixed-excitation sector and gap-ratio
//! level statistics.
//!
//! The XY + σ_z Hamiltonian conserves the number of excitations, so the
//! spectrum splits into sectors of dimension `C(N, k)`. Within a sector the
//! matrix is real symmetric.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{neel_pattern, sample_disorder, DisorderProfile, LatticeSpec};
use crate::seed::derive_seed;
use crate::statevec::{mhz_to_rad_per_ns, StateVector};

/// Dense storage guard for sector matrices.
pub const MAX_SECTOR_DIM: usize = 20_000;

/// Gap pairs with both spacings below this (rad/ns) count as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    num_qubits: usize,
    excitations: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    pub fn new(num_qubits: usize, excitations: usize) -> Result<Self> {
        if excitations > num_qubits || num_qubits > 63 {
            return Err(Error::InvalidArgument(format!(
                "no sector with {excitations} excitations on {num_qubits} qubits"
            )));
        }
        let dim = binomial(num_qubits, excitations);
        if dim > MAX_SECTOR_DIM as u128 {
            return Err(Error::SectorTooLarge {
                dim: dim.min(usize::MAX as u128) as usize,
                limit: MAX_SECTOR_DIM,
            });
        }
        let mut states = Vec::with_capacity(dim as usize);
        if excitations == 0 {
            states.push(0);
        } else {
            // Gosper's hack: next integer with the same popcount
            let mut x: u64 = (1u64 << excitations) - 1;
            let limit = 1u64 << num_qubits;
            while x < limit {
                states.push(x);
                let c = x & x.wrapping_neg();
                let r = x + c;
                x = (((r ^ x) >> 2) / c) | r;
            }
        }
        Ok(SectorBasis {
            num_qubits,
            excitations,
            states,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn excitations(&self) -> usize {
        self.excitations
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn position(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Dense `H/ħ` (rad/ns) restricted to the `k`-excitation sector.
pub fn sector_hamiltonian(
    lattice: &LatticeSpec,
    disorder: &DisorderProfile,
    k: usize,
) -> Result<(SectorBasis, DMatrix<f64>)> {
    let n = lattice.num_qubits();
    if disorder.detunings_mhz.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: disorder.detunings_mhz.len(),
        });
    }
    let basis = SectorBasis::new(n, k)?;
    let dim = basis.dim();
    let omegas: Vec<f64> = disorder
        .detunings_mhz
        .iter()
        .map(|&d| mhz_to_rad_per_ns(d))
        .collect();
    let edges = lattice.edges();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for (row, &s) in basis.states().iter().enumerate() {
        m[(row, row)] = omegas
            .iter()
            .enumerate()
            .map(|(q, w)| if s >> q & 1 == 1 { *w } else { -*w })
            .sum();
        for e in &edges {
            if (s >> e.i ^ s >> e.j) & 1 == 1 {
                let t = s ^ ((1 << e.i) | (1 << e.j));
                let col = basis.position(t).expect("hopping stays in sector");
                m[(row, col)] += mhz_to_rad_per_ns(e.g_mhz);
            }
        }
    }
    Ok((basis, m))
}

/// `exp(-i H t)` stored as one dense unitary per excitation sector.
///
/// Worth it when the same evolution is applied many times to small systems;
/// memory is `Σ_k C(N,k)²` complex entries.
#[derive(Debug, Clone)]
pub struct SectorPropagator {
    num_qubits: usize,
    /// (basis indices, row-major unitary) per sector.
    blocks: Vec<(Vec<usize>, Vec<Complex64>)>,
}

impl SectorPropagator {
    pub fn new(lattice: &LatticeSpec, disorder: &DisorderProfile, t_ns: f64) -> Result<Self> {
        let n = lattice.num_qubits();
        let mut blocks = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let (basis, h) = sector_hamiltonian(lattice, disorder, k)?;
            let dim = basis.dim();
            let eig = h.symmetric_eigen();
            let phases: Vec<Complex64> = eig
                .eigenvalues
                .iter()
                .map(|&e| Complex64::from_polar(1.0, -e * t_ns))
                .collect();
            let v = &eig.eigenvectors;
            let mut u = Vec::with_capacity(dim * dim);
            for a in 0..dim {
                for b in 0..dim {
                    u.push((0..dim).fold(Complex64::new(0.0, 0.0), |acc, m| {
                        acc + phases[m] * (v[(a, m)] * v[(b, m)])
                    }));
                }
            }
            let index = basis.states().iter().map(|&s| s as usize).collect();
            blocks.push((index, u));
        }
        Ok(SectorPropagator { num_qubits: n, blocks })
    }

    /// Largest sector dimension for `num_qubits`, to decide whether caching pays.
    pub fn max_block_dim(num_qubits: usize) -> u128 {
        binomial(num_qubits, num_qubits / 2)
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                got: state.num_qubits(),
            });
        }
        let amps = state.amplitudes_mut();
        let mut local = Vec::new();
        for (index, u) in &self.blocks {
            local.clear();
            local.extend(index.iter().map(|&b| amps[b]));
            if local.iter().all(|a| a.norm_sqr() == 0.0) {
                continue;
            }
            for (row, &b) in u.chunks_exact(index.len()).zip(index) {
                amps[b] = row
                    .iter()
                    .zip(&local)
                    .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub seed: u64,
    pub h_mhz: f64,
}

/// Sorted sector eigenvalues for one disorder realization.
pub fn sector_spectrum(
    lattice: &LatticeSpec,
    disorder: &DisorderProfile,
    k: usize,
) -> Result<SpectrumResult> {
    let (_, m) = sector_hamiltonian(lattice, disorder, k)?;
    let mut energies: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    energies.sort_by(f64::total_cmp);
    Ok(SpectrumResult {
        energies,
        seed: disorder.seed,
        h_mhz: disorder.bound_mhz,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapRatios {
    pub ratios: Vec<f64>,
    /// Number of adjacent-gap pairs skipped because both gaps vanished.
    pub degenerate: usize,
}

/// `r_n = min(δ_n, δ_{n-1}) / max(δ_n, δ_{n-1})` over consecutive spacings.
pub fn gap_ratios(energies: &[f64]) -> Result<GapRatios> {
    if energies.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 energies, got {}",
            energies.len()
        )));
    }
    if energies.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Unsorted);
    }
    let gaps: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let mut ratios = Vec::with_capacity(gaps.len() - 1);
    let mut degenerate = 0;
    for w in gaps.windows(2) {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if hi < DEGENERATE_GAP {
            degenerate += 1;
            continue;
        }
        ratios.push(lo / hi);
    }
    Ok(GapRatios { ratios, degenerate })
}

/// Which part of the sector spectrum enters the gap-ratio average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumWindow {
    #[default]
    Full,
    /// Middle 50% of the levels.
    Middle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRatioPoint {
    pub h_over_g: f64,
    pub r_mean: f64,
    pub r_stderr: f64,
    pub realizations: usize,
    pub degenerate: usize,
}

/// Mean gap ratio against disorder strength. `r_mean` pools every ratio
/// from every realization; `r_stderr` is the standard error of the
/// per-realization means. Realization `i` of grid point `p` uses disorder
/// seed `derive_seed(seed, "level-stats", p * realizations + i)`.
pub fn mean_gap_ratio_sweep(
    lattice: &LatticeSpec,
    k: usize,
    h_over_g_grid: &[f64],
    realizations: usize,
    seed: u64,
    window: SpectrumWindow,
) -> Result<Vec<GapRatioPoint>> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("realizations must be >= 1".into()));
    }
    let g = lattice.coupling_mhz();
    h_over_g_grid
        .iter()
        .enumerate()
        .map(|(p, &hg)| {
            let per_real: Vec<(f64, usize, usize)> = (0..realizations)
                .into_par_iter()
                .map(|i| {
                    let s = derive_seed(seed, "level-stats", (p * realizations + i) as u64);
                    let d = sample_disorder(lattice, hg * g, s)?;
                    let spec = sector_spectrum(lattice, &d, k)?;
                    let e = windowed(&spec.energies, window);
                    let gr = gap_ratios(e)?;
                    let sum: f64 = gr.ratios.iter().sum();
                    Ok((sum, gr.ratios.len(), gr.degenerate))
                })
                .collect::<Result<_>>()?;
            let total: f64 = per_real.iter().map(|x| x.0).sum();
            let count: usize = per_real.iter().map(|x| x.1).sum();
            let degenerate = per_real.iter().map(|x| x.2).sum();
            let means: Vec<f64> = per_real
                .iter()
                .filter(|x| x.1 > 0)
                .map(|x| x.0 / x.1 as f64)
                .collect();
            Ok(GapRatioPoint {
                h_over_g: hg,
                r_mean: if count > 0 { total / count as f64 } else { f64::NAN },
                r_stderr: stderr(&means),
                realizations,
                degenerate,
            })
        })
        .collect()
}

/// Neel-sector sweep (`k` = number of initially excited sites).
pub fn neel_sector_sweep(
    lattice: &LatticeSpec,
    h_over_g_grid: &[f64],
    realizations: usize,
    seed: u64,
) -> Result<Vec<GapRatioPoint>> {
    let k = neel_pattern(lattice).count_ones() as usize;
    mean_gap_ratio_sweep(lattice, k, h_over_g_grid, realizations, seed, SpectrumWindow::Full)
}

fn windowed(e: &[f64], window: SpectrumWindow) -> &[f64] {
    match window {
        SpectrumWindow::Full => e,
        SpectrumWindow::Middle => {
            let n = e.len();
            let lo = n / 4;
            let hi = (n - n / 4).max(lo + 3).min(n);
            &e[lo.min(n.saturating_sub(3))..hi]
        }
    }
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (n - 1); zero for fewer than two values.
pub(crate) fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

fn stderr(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    std_dev(x) / (x.len() as f64).sqrt()
}

/// Pearson correlation `C₁₂ / √(C₁₁ C₂₂)`.
pub fn correlation_coefficient(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut c11 = 0.0;
    let mut c22 = 0.0;
    let mut c12 = 0.0;
    for (x, y) in a.iter().zip(b) {
        c11 += (x - ma) * (x - ma);
        c22 += (y - mb) * (y - mb);
        c12 += (x - ma) * (y - mb);
    }
    if c11 == 0.0 || c22 == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((c12 / (c11 * c22).sqrt()).clamp(-1.0, 1.0))
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut r = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && x[idx[end + 1]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            r[i] = avg;
        }
        start = end + 1;
    }
    r
}

/// Spearman rank correlation (Pearson on average ranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    correlation_coefficient(&ranks(a), &ranks(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::HamiltonianOp;
    use num_complex::Complex64;
    use rand::Rng;

    #[test]
    fn sector_basis_sizes() {
        let b = SectorBasis::new(9, 5).unwrap();
        assert_eq!(b.dim(), 126);
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert!(b.states().iter().all(|s| s.count_ones() == 5));
        assert_eq!(SectorBasis::new(4, 0).unwrap().states(), &[0]);
        assert_eq!(SectorBasis::new(4, 4).unwrap().states(), &[15]);
        assert!(matches!(
            SectorBasis::new(40, 20),
            Err(Error::SectorTooLarge { .. })
        ));
    }

    #[test]
    fn two_site_sector_matrix() {
        let l = LatticeSpec::grid(1, 2, 2.185).unwrap();
        let (_, m) = sector_hamiltonian(&l, &DisorderProfile::zero(2), 1).unwrap();
        let w = mhz_to_rad_per_ns(2.185);
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(1, 1)], 0.0);
        assert!((m[(0, 1)] - w).abs() < 1e-15);
        assert!((m[(1, 0)] - w).abs() < 1e-15);
    }

    #[test]
    fn sector_matches_matrix_free_action() {
        let l = LatticeSpec::grid(3, 3, 2.185).unwrap();
        let d = sample_disorder(&l, 30.0, 8).unwrap();
        let (basis, m) = sector_hamiltonian(&l, &d, 5).unwrap();
        assert_eq!(m.shape(), (126, 126));
        let mut rng = crate::seed::rng_from_seed(1);
        let v: Vec<f64> = (0..basis.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
        let dense = &m * nalgebra::DVector::from_vec(v.clone());

        let mut full = vec![Complex64::default(); 512];
        for (k, &s) in basis.states().iter().enumerate() {
            full[s as usize] = Complex64::new(v[k], 0.0);
        }
        let h = HamiltonianOp::from_disorder(&l, &d).unwrap();
        let mut out = vec![Complex64::default(); 512];
        h.apply_into(&full, &mut out);
        for (k, &s) in basis.states().iter().enumerate() {
            assert!((out[s as usize].re - dense[k]).abs() < 1e-10);
            assert!(out[s as usize].im.abs() < 1e-15);
        }
    }

    #[test]
    fn gap_ratio_examples() {
        assert_eq!(gap_ratios(&[0.0, 1.0, 2.0]).unwrap().ratios, vec![1.0]);
        assert_eq!(gap_ratios(&[0.0, 1.0, 3.0]).unwrap().ratios, vec![0.5]);
        assert!(matches!(gap_ratios(&[0.0, 2.0, 1.0]), Err(Error::Unsorted)));
        assert!(gap_ratios(&[0.0, 1.0]).is_err());
        let g = gap_ratios(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(g.degenerate, 1);
        assert_eq!(g.ratios, vec![0.0]);
    }

    #[test]
    fn correlation_examples() {
        let a = [1.0, 2.0, 4.0, 3.5];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((correlation_coefficient(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlation_coefficient(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            correlation_coefficient(&a, &[1.0; 4]),
            Err(Error::ZeroVariance)
        ));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 25.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn sweep_is_deterministic() {
        let l = LatticeSpec::grid(2, 3, 2.185).unwrap();
        let a = mean_gap_ratio_sweep(&l, 3, &[1.0, 5.0], 4, 9, SpectrumWindow::Full).unwrap();
        let b = mean_gap_ratio_sweep(&l, 3, &[1.0, 5.0], 4, 9, SpectrumWindow::Full).unwrap();
        assert_eq!(a, b);
        assert!(mean_gap_ratio_sweep(&l, 3, &[1.0], 0, 9, SpectrumWindow::Full).is_err());
    }
}
