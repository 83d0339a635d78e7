//! Per-block diagonalization of the interaction Hamiltonian and exact
//! propagation in normalized time τ = γt.
//!
//! In units of ħγ the block with `N` total quanta is the zero-diagonal
//! tridiagonal matrix with couplings `c_k = √((k+1)(N−2k)(N−2k−1))`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Arc, RwLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::csvfmt;
use crate::error::Result;
use crate::hilbert::{initial_block_state, mean_occupations, BlockState, OccupationRecord};
use crate::numkit::{self, EigenDecomposition, TridiagonalSym};

pub fn block_coupling(total: usize) -> Vec<f64> {
    (0..total / 2)
        .map(|k| (((k + 1) * (total - 2 * k) * (total - 2 * k - 1)) as f64).sqrt())
        .collect()
}

pub fn block_matrix(total: usize) -> TridiagonalSym {
    let couplings = block_coupling(total);
    debug_assert!(couplings.iter().all(|&c| c > 0.0));
    TridiagonalSym::with_zero_diagonal(couplings).expect("block couplings are finite")
}

/// Eigenvalues `λ^{Nj}` and eigenvectors `χ^{Nj}_k` of block `N`.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    total: usize,
    decomposition: EigenDecomposition,
}

impl BlockSpectrum {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.decomposition.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.decomposition.eigenvalues()
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        self.decomposition.eigenvector(j)
    }

    pub fn decomposition(&self) -> &EigenDecomposition {
        &self.decomposition
    }

    /// Project block amplitudes onto the eigenbasis.
    fn to_eigenbasis(&self, amps: &[C64]) -> Vec<C64> {
        (0..self.dim())
            .map(|j| {
                self.eigenvector(j)
                    .iter()
                    .zip(amps)
                    .map(|(&v, &a)| a * v)
                    .sum()
            })
            .collect()
    }
}

pub fn block_spectrum(total: usize) -> Result<BlockSpectrum> {
    Ok(BlockSpectrum {
        total,
        decomposition: numkit::eigh_tridiagonal(&block_matrix(total))?,
    })
}

/// Eigenvalues of block `N` with only the `k = 0` and `k = N/2` rows of the
/// eigenvector matrix. This is all the heralding calculation needs for the
/// coherent-pump initial state, at O(m²) instead of O(m³).
#[derive(Debug, Clone)]
pub struct EdgeSpectrum {
    pub total: usize,
    pub eigenvalues: Vec<f64>,
    /// `χ^{Nj}_0` for every `j`.
    pub first: Vec<f64>,
    /// `χ^{Nj}_{N/2}` for every `j`.
    pub last: Vec<f64>,
}

pub fn block_edge_spectrum(total: usize) -> Result<EdgeSpectrum> {
    let last_row = total / 2;
    let partial = numkit::eigh_tridiagonal_rows(&block_matrix(total), &[0, last_row])?;
    Ok(EdgeSpectrum {
        total,
        eigenvalues: partial.eigenvalues().to_vec(),
        first: partial.row(0),
        last: partial.row(1),
    })
}

/// Lazily filled map `N → BlockSpectrum`. Entries never change once inserted;
/// concurrent requests for the same block may both compute it, and the first
/// insert wins.
#[derive(Debug, Default)]
pub struct SpectrumCache {
    spectra: RwLock<HashMap<usize, Arc<BlockSpectrum>>>,
}

impl SpectrumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, total: usize) -> Result<Arc<BlockSpectrum>> {
        if let Some(s) = self.spectra.read().expect("spectrum cache poisoned").get(&total) {
            return Ok(Arc::clone(s));
        }
        let computed = Arc::new(block_spectrum(total)?);
        let mut map = self.spectra.write().expect("spectrum cache poisoned");
        Ok(Arc::clone(map.entry(total).or_insert(computed)))
    }

    /// Compute the missing spectra for `totals` in parallel.
    pub fn prefetch(&self, totals: &[usize]) -> Result<()> {
        totals.par_iter().try_for_each(|&n| self.get(n).map(|_| ()))
    }

    pub fn len(&self) -> usize {
        self.spectra.read().expect("spectrum cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct BlockMode {
    total: usize,
    spectrum: Arc<BlockSpectrum>,
    coefficients: Vec<C64>,
}

/// A state expanded in the Hamiltonian eigenbasis, ready to be evaluated at
/// any τ. Blocks with no amplitude are dropped.
pub struct Propagator {
    template: BlockState,
    modes: Vec<BlockMode>,
}

impl Propagator {
    pub fn new(initial: &BlockState, cache: &SpectrumCache) -> Result<Self> {
        let active: Vec<(usize, &Vec<C64>)> = initial
            .blocks()
            .iter()
            .filter(|(_, b)| b.iter().any(|a| a.norm_sqr() > 0.0))
            .map(|(&n, b)| (n, b))
            .collect();
        let modes = active
            .par_iter()
            .map(|&(total, amps)| {
                let spectrum = cache.get(total)?;
                let coefficients = spectrum.to_eigenbasis(amps);
                Ok(BlockMode { total, spectrum, coefficients })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            template: initial.clone(),
            modes,
        })
    }

    /// `c(τ) = V · diag(e^{−iτλ}) · Vᵀ · c(0)` in every block.
    pub fn state_at(&self, tau: f64) -> BlockState {
        if tau == 0.0 {
            return self.template.clone();
        }
        let blocks: Vec<(usize, Vec<C64>)> = self
            .modes
            .par_iter()
            .map(|mode| {
                let s = &mode.spectrum;
                let mut out = vec![C64::new(0.0, 0.0); s.dim()];
                for (j, (&lambda, &c)) in s.eigenvalues().iter().zip(&mode.coefficients).enumerate() {
                    let w = c * C64::from_polar(1.0, -tau * lambda);
                    for (o, &v) in out.iter_mut().zip(s.eigenvector(j)) {
                        *o += w * v;
                    }
                }
                (mode.total, out)
            })
            .collect();
        let mut map: BTreeMap<usize, Vec<C64>> = self
            .template
            .blocks()
            .iter()
            .map(|(&n, b)| (n, vec![C64::new(0.0, 0.0); b.len()]))
            .collect();
        map.extend(blocks);
        self.template.with_blocks(map)
    }
}

pub fn evolve(initial: &BlockState, tau: f64, cache: &SpectrumCache) -> Result<BlockState> {
    Ok(Propagator::new(initial, cache)?.state_at(tau))
}

/// Occupations along `tau_grid`, starting from signal vacuum ⊗ pump `|β⟩`.
pub fn energy_series(beta: f64, tau_grid: &[f64], eps_tail: f64) -> Result<Vec<OccupationRecord>> {
    if let Some(bad) = tau_grid.iter().find(|t| !t.is_finite()) {
        return Err(crate::Error::InvalidInput(format!("non-finite tau {bad}")));
    }
    let initial = initial_block_state(beta, eps_tail)?;
    let cache = SpectrumCache::new();
    let propagator = Propagator::new(&initial, &cache)?;
    tau_grid
        .iter()
        .map(|&tau| {
            let (mean_ns, mean_np) = mean_occupations(&propagator.state_at(tau))?;
            Ok(OccupationRecord {
                tau,
                mean_ns,
                mean_np,
                sum_energy: mean_ns + 2.0 * mean_np,
            })
        })
        .collect()
}

/// τ in `[0, tau_max]` where ⟨n_s⟩ is largest, with the value there.
pub fn signal_peak_time(beta: f64, tau_max: f64, eps_tail: f64) -> Result<(f64, f64)> {
    let initial = initial_block_state(beta, eps_tail)?;
    let cache = SpectrumCache::new();
    let propagator = Propagator::new(&initial, &cache)?;
    let ns = |tau: f64| mean_occupations(&propagator.state_at(tau)).map_or(f64::NAN, |(n, _)| n);
    let best = numkit::maximize_sampled(ns, 0.0, tau_max, 400, 1e-10)?;
    Ok((best.x, best.value))
}

/// Evenly spaced grid of `steps` points on `[0, tau_max]` (a single point at
/// 0 when `steps == 1`).
pub fn tau_grid(tau_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..steps).map(|i| tau_max * i as f64 / (steps - 1) as f64).collect(),
    }
}

pub const ENERGY_CSV_HEADER: &str = "tau,mean_ns,two_mean_np,sum_energy";

pub fn write_energy_csv<W: Write>(mut out: W, records: &[OccupationRecord]) -> std::io::Result<()> {
    writeln!(out, "{ENERGY_CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", csvfmt::row(&[r.tau, r.mean_ns, 2.0 * r.mean_np, r.sum_energy]))?;
    }
    Ok(())
}
