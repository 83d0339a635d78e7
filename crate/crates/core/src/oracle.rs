//! Brute-force reference: the two-mode Hamiltonian as a dense matrix on a
//! truncated product Fock grid, evolved by full diagonalization.
//!
//! Deliberately shares no index arithmetic with the block-diagonal path in
//! [`crate::dynamics`], so agreement between the two is evidence.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BlockState, NORM_TOL};
use crate::numkit::log_factorial;

/// Weight tolerated in the top decile of either index.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// `ψ[n_s][n_p]` on `0..=n_s_max × 0..=n_p_max`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTwoModeState {
    n_s_max: usize,
    n_p_max: usize,
    amps: Vec<C64>,
}

impl DenseTwoModeState {
    pub fn new(n_s_max: usize, n_p_max: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != (n_s_max + 1) * (n_p_max + 1) {
            return Err(Error::InvalidInput(format!(
                "dense state needs {} amplitudes, got {}",
                (n_s_max + 1) * (n_p_max + 1),
                amps.len()
            )));
        }
        let s = Self { n_s_max, n_p_max, amps };
        let norm = s.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized { norm });
        }
        Ok(s)
    }

    /// Normalized `|signal⟩ ⊗ |pump⟩`; the factors are zero-padded or must
    /// fit within the cutoffs.
    pub fn product(signal: &[C64], pump: &[C64], n_s_max: usize, n_p_max: usize) -> Result<Self> {
        if signal.len() > n_s_max + 1 || pump.len() > n_p_max + 1 {
            return Err(Error::InvalidInput("product factor exceeds the dense cutoff".into()));
        }
        let mut amps = vec![C64::new(0.0, 0.0); (n_s_max + 1) * (n_p_max + 1)];
        for (s, a) in signal.iter().enumerate() {
            for (p, b) in pump.iter().enumerate() {
                amps[s * (n_p_max + 1) + p] = a * b;
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidInput("product state is zero".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(n_s_max, n_p_max, amps)
    }

    /// Signal vacuum ⊗ coherent pump `|β⟩`, keeping pump levels up to
    /// `pump_levels` (inclusive), then renormalized.
    pub fn vacuum_coherent(beta: f64, pump_levels: usize, n_s_max: usize, n_p_max: usize) -> Result<Self> {
        let pump: Vec<C64> = (0..=pump_levels)
            .map(|n| {
                if beta == 0.0 {
                    return C64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0);
                }
                let log = -0.5 * beta * beta + n as f64 * beta.ln() - 0.5 * log_factorial(n as u64);
                C64::new(log.exp(), 0.0)
            })
            .collect();
        Self::product(&[C64::new(1.0, 0.0)], &pump, n_s_max, n_p_max)
    }

    pub fn n_s_max(&self) -> usize {
        self.n_s_max
    }

    pub fn n_p_max(&self) -> usize {
        self.n_p_max
    }

    pub fn get(&self, n_s: usize, n_p: usize) -> C64 {
        self.amps[n_s * (self.n_p_max + 1) + n_p]
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Squared weight at `n_s ≥ ⌈0.9(n_s_max+1)⌉` and at `n_p ≥ ⌈0.9(n_p_max+1)⌉`.
    pub fn top_decile_weights(&self) -> (f64, f64) {
        let edge = |max: usize| (9 * (max + 1)).div_ceil(10);
        let (es, ep) = (edge(self.n_s_max), edge(self.n_p_max));
        let mut w = (0.0, 0.0);
        for s in 0..=self.n_s_max {
            for p in 0..=self.n_p_max {
                let a = self.get(s, p).norm_sqr();
                if s >= es {
                    w.0 += a;
                }
                if p >= ep {
                    w.1 += a;
                }
            }
        }
        w
    }

    fn check_boundary(&self) -> Result<()> {
        let (ws, wp) = self.top_decile_weights();
        if ws > BOUNDARY_TOL {
            return Err(Error::BoundarySupport { axis: "n_s", weight: ws });
        }
        if wp > BOUNDARY_TOL {
            return Err(Error::BoundarySupport { axis: "n_p", weight: wp });
        }
        Ok(())
    }
}

/// `a²b† + a†²b` in units of ħγ over the flattened basis
/// `n_s·(n_p_max+1) + n_p`.
pub fn dense_hamiltonian(n_s_max: usize, n_p_max: usize) -> DMatrix<f64> {
    let stride = n_p_max + 1;
    let dim = (n_s_max + 1) * stride;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 2..=n_s_max {
        for p in 0..n_p_max {
            let from = s * stride + p;
            let to = (s - 2) * stride + p + 1;
            let v = ((s * (s - 1) * (p + 1)) as f64).sqrt();
            h[(to, from)] = v;
            h[(from, to)] = v;
        }
    }
    h
}

/// Dense `exp(−iτH)` propagator for fixed cutoffs.
pub struct DenseEvolver {
    n_s_max: usize,
    n_p_max: usize,
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl DenseEvolver {
    pub fn new(n_s_max: usize, n_p_max: usize) -> Self {
        let eigen = SymmetricEigen::new(dense_hamiltonian(n_s_max, n_p_max));
        Self { n_s_max, n_p_max, eigen }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.eigen.eigenvalues.as_slice()
    }

    pub fn evolve(&self, psi0: &DenseTwoModeState, tau: f64) -> Result<DenseTwoModeState> {
        if psi0.n_s_max != self.n_s_max || psi0.n_p_max != self.n_p_max {
            return Err(Error::InvalidInput("state and evolver cutoffs differ".into()));
        }
        psi0.check_boundary()?;
        let v = &self.eigen.eigenvectors;
        let dim = v.nrows();
        let coeffs: Vec<C64> = (0..dim)
            .map(|j| {
                let proj: C64 = (0..dim).map(|i| psi0.amps[i] * v[(i, j)]).sum();
                proj * C64::from_polar(1.0, -tau * self.eigen.eigenvalues[j])
            })
            .collect();
        let amps = (0..dim).map(|i| (0..dim).map(|j| coeffs[j] * v[(i, j)]).sum()).collect();
        let out = DenseTwoModeState {
            n_s_max: self.n_s_max,
            n_p_max: self.n_p_max,
            amps,
        };
        out.check_boundary()?;
        Ok(out)
    }
}

pub fn dense_evolve(psi0: &DenseTwoModeState, tau: f64) -> Result<DenseTwoModeState> {
    DenseEvolver::new(psi0.n_s_max, psi0.n_p_max).evolve(psi0, tau)
}

/// `⟨a|b⟩`, mapping block entry `(N, k)` to `(n_s = N − 2k, n_p = k)`.
pub fn overlap(a: &DenseTwoModeState, b: &BlockState) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (&total, block) in b.blocks() {
        for (k, amp) in block.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (s, p) = (total - 2 * k, k);
            if s > a.n_s_max || p > a.n_p_max {
                return Err(Error::InvalidInput(format!(
                    "block entry (N={total}, k={k}) lies outside the dense cutoffs ({}, {})",
                    a.n_s_max, a.n_p_max
                )));
            }
            acc += a.get(s, p).conj() * amp;
        }
    }
    Ok(acc)
}

/// Eigenvalues of the sector `n_s + 2n_p = total`, built and diagonalized
/// densely; ascending.
pub fn dense_sector_eigenvalues(total: usize) -> Vec<f64> {
    let states: Vec<(usize, usize)> = (0..=total / 2).map(|p| (total - 2 * p, p)).collect();
    let dim = states.len();
    let mut h = DMatrix::zeros(dim, dim);
    for (i, &(s, p)) in states.iter().enumerate() {
        if s >= 2 {
            let j = states.iter().position(|&st| st == (s - 2, p + 1)).expect("sector closed");
            let v = ((s * (s - 1) * (p + 1)) as f64).sqrt();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_elements() {
        assert_eq!(dense_hamiltonian(0, 0).shape(), (1, 1));
        assert_eq!(dense_hamiltonian(0, 0)[(0, 0)], 0.0);
        let h = dense_hamiltonian(4, 2);
        // |2,0⟩ ↔ |0,1⟩
        assert!((h[(1, 2 * 3)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn hamiltonian_conserves_total() {
        let (ns, np) = (9, 5);
        let h = dense_hamiltonian(ns, np);
        let total = |i: usize| i / (np + 1) + 2 * (i % (np + 1));
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                if h[(i, j)] != 0.0 {
                    assert_eq!(total(i), total(j));
                }
            }
        }
    }

    #[test]
    fn vacuum_is_stationary() {
        let psi = DenseTwoModeState::product(&[C64::new(1.0, 0.0)], &[C64::new(1.0, 0.0)], 6, 3).unwrap();
        for tau in [0.0, 0.7, 3.0] {
            let out = dense_evolve(&psi, tau).unwrap();
            assert!((out.get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity_and_norm_kept() {
        let psi = DenseTwoModeState::vacuum_coherent(0.8, 8, 20, 10).unwrap();
        let ev = DenseEvolver::new(20, 10);
        let same = ev.evolve(&psi, 0.0).unwrap();
        assert!(psi.amps.iter().zip(&same.amps).all(|(a, b)| (a - b).norm() < 1e-12));
        let later = ev.evolve(&psi, 1.3).unwrap();
        assert!((later.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn boundary_guard_trips() {
        let psi = DenseTwoModeState::vacuum_coherent(1.5, 10, 20, 10).unwrap();
        assert!(matches!(dense_evolve(&psi, 0.1), Err(Error::BoundarySupport { axis: "n_p", .. })));
    }

    #[test]
    fn rejects_unnormalized() {
        let amps = vec![C64::new(0.5, 0.0); 4];
        assert!(DenseTwoModeState::new(1, 1, amps.clone()).is_ok());
        assert!(matches!(
            DenseTwoModeState::new(1, 1, vec![C64::new(1.0, 0.0); 4]),
            Err(Error::Unnormalized { .. })
        ));
        assert!(DenseTwoModeState::new(2, 1, amps).is_err());
    }

    #[test]
    fn sector_eigenvalues_small() {
        assert_eq!(dense_sector_eigenvalues(0), vec![0.0]);
        let e = dense_sector_eigenvalues(2);
        assert!((e[0] + 2f64.sqrt()).abs() < 1e-14 && (e[1] - 2f64.sqrt()).abs() < 1e-14);
        let e = dense_sector_eigenvalues(4);
        for (a, b) in e.iter().zip([-4.0, 0.0, 4.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
