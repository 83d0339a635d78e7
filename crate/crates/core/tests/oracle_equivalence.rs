//! Block-diagonal evolution against the dense product-grid oracle.

use catsim::dynamics::{block_spectrum, evolve, SpectrumCache};
use catsim::hilbert::{initial_block_state, pump_cutoff};
use catsim::oracle::{dense_sector_eigenvalues, overlap, DenseEvolver, DenseTwoModeState};

// β = 1.5 with a 1e-11 tail keeps the pump at n_p ≤ 18, clear of the top
// decile of a 40 × 20 grid.
const BETA: f64 = 1.5;
const EPS: f64 = 1e-11;
const N_S_MAX: usize = 40;
const N_P_MAX: usize = 20;

fn dense_initial() -> DenseTwoModeState {
    DenseTwoModeState::vacuum_coherent(BETA, pump_cutoff(BETA, EPS), N_S_MAX, N_P_MAX).unwrap()
}

#[test]
fn initial_states_coincide() {
    assert!(pump_cutoff(BETA, EPS) <= 18);
    let s0 = initial_block_state(BETA, EPS).unwrap();
    // the block state keeps its truncated norm; the dense one is renormalized
    let ov = overlap(&dense_initial(), &s0).unwrap() / s0.norm_sqr().sqrt();
    assert!((ov.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn evolved_states_agree() {
    let s0 = initial_block_state(BETA, EPS).unwrap();
    let dense0 = dense_initial();
    let evolver = DenseEvolver::new(N_S_MAX, N_P_MAX);
    let cache = SpectrumCache::new();
    for tau in [0.25, 0.5, 1.0] {
        let dense = evolver.evolve(&dense0, tau).unwrap();
        let block = evolve(&s0, tau, &cache).unwrap();
        let ov = overlap(&dense, &block).unwrap();
        assert!(ov.norm() >= 1.0 - 1e-8, "tau {tau}: |overlap| = {}", ov.norm());
        assert!((ov - num_complex::Complex64::new(ov.norm(), 0.0)).norm() < 1e-8, "tau {tau}: phase drift {ov}");
    }
}

#[test]
fn block_spectra_match_dense_sectors() {
    for total in [1, 2, 7, 20, 51, 100] {
        let fast = block_spectrum(total).unwrap();
        let dense = dense_sector_eigenvalues(total);
        let scale = dense.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fast.eigenvalues().iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-12 * scale, "N = {total}: {a} vs {b}");
        }
    }
}
