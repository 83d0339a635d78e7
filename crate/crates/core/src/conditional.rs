//! Heralding on a zero-photon pump measurement: the success probability
//! p₀(τ), the optimal measurement time, the conditional signal state, and
//! closed-form evaluators of the empirical fit laws.
//!
//! The fit-law evaluators share no code with the simulation path; the tests
//! use each as a check on the other.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvfmt;
use crate::dynamics::block_edge_spectrum;
use crate::error::{Error, Result};
use crate::hilbert::{initial_block_state, FockVector, DEFAULT_EPS_TAIL};
use crate::numkit::minimize_scalar;

/// β range over which the fit laws were established.
pub const FIT_VALIDITY: (f64, f64) = (2.0, 100.0);

pub fn in_fit_range(beta: f64) -> bool {
    (FIT_VALIDITY.0..=FIT_VALIDITY.1).contains(&beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitLawConstants {
    pub b_t: f64,
    pub c_t: f64,
    pub d_t: f64,
    pub b_p: f64,
    pub c_p: f64,
    pub d_p: f64,
    pub a_r: f64,
    pub b_r: f64,
    pub c_r: f64,
    pub d_r: f64,
}

impl Default for FitLawConstants {
    fn default() -> Self {
        Self {
            b_t: 1.70,
            c_t: 1.16,
            d_t: 0.84,
            b_p: 2.56,
            c_p: 1.95,
            d_p: 1.02,
            a_r: -0.35,
            b_r: 0.14,
            c_r: 0.13,
            d_r: 2.40,
        }
    }
}

/// `b_t / (1 + c_t β)^{d_t}`. Not clamped outside [`FIT_VALIDITY`].
pub fn tau_opt_fit(beta: f64, c: &FitLawConstants) -> f64 {
    c.b_t / (1.0 + c.c_t * beta).powf(c.d_t)
}

/// `b_p / (1 + c_p β)^{d_p}`.
pub fn p_zero_fit(beta: f64, c: &FitLawConstants) -> f64 {
    c.b_p / (1.0 + c.c_p * beta).powf(c.d_p)
}

/// `a_r + b_r / (1 + c_r β)^{d_r}`.
pub fn xi_prep_fit(beta: f64, c: &FitLawConstants) -> f64 {
    c.a_r + c.b_r / (1.0 + c.c_r * beta).powf(c.d_r)
}

struct HeraldBlock {
    total: usize,
    eigenvalues: Vec<f64>,
    /// `χ_0^{Nj} χ_{N/2}^{Nj} ψ_N(0)`: the initial amplitude sits at
    /// `k = N/2`, and only the `k = 0` component is read out.
    weights: Vec<f64>,
}

impl HeraldBlock {
    fn pump_vacuum_amplitude(&self, tau: f64) -> C64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| C64::from_polar(w, -tau * l))
            .sum()
    }
}

/// Evaluates the `n_p = 0` slice of the evolved signal-vacuum ⊗ `|β⟩` state
/// at arbitrary τ without building the full two-mode state.
pub struct HeraldPropagator {
    beta: f64,
    norm_sqr: f64,
    max_total: usize,
    blocks: Vec<HeraldBlock>,
}

impl HeraldPropagator {
    pub fn new(beta: f64, eps_tail: f64) -> Result<Self> {
        let initial = initial_block_state(beta, eps_tail)?;
        let entries: Vec<(usize, C64)> = initial
            .blocks()
            .iter()
            .map(|(&n, b)| (n, b[n / 2]))
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .collect();
        let blocks = entries
            .par_iter()
            .map(|&(total, amp)| {
                let edge = block_edge_spectrum(total)?;
                let weights = edge.first.iter().zip(&edge.last).map(|(f, l)| f * l * amp.re).collect();
                Ok(HeraldBlock {
                    total,
                    eigenvalues: edge.eigenvalues,
                    weights,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beta,
            norm_sqr: initial.norm_sqr(),
            max_total: initial.max_total(),
            blocks,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p0(&self, tau: f64) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.pump_vacuum_amplitude(tau).norm_sqr())
            .sum::<f64>()
            / self.norm_sqr
    }

    /// Unnormalized conditional signal state and its probability.
    pub fn conditional_state(&self, tau: f64) -> (FockVector, f64) {
        let mut amps = vec![C64::new(0.0, 0.0); self.max_total + 1];
        for b in &self.blocks {
            amps[b.total] = b.pump_vacuum_amplitude(tau);
        }
        let psi = FockVector::new(amps);
        let p0 = psi.norm_sqr() / self.norm_sqr;
        (psi, p0)
    }
}

pub fn p_zero_curve(beta: f64, tau_grid: &[f64], eps_tail: f64) -> Result<Vec<(f64, f64)>> {
    let herald = HeraldPropagator::new(beta, eps_tail)?;
    Ok(tau_grid.par_iter().map(|&t| (t, herald.p0(t))).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeraldResult {
    pub beta: f64,
    pub tau_opt: f64,
    pub p0: f64,
    /// Normalized conditional signal state at `tau_opt`.
    #[serde(rename = "state")]
    pub psi_raw: FockVector,
    /// `false` when β lies outside the fit-law validity range.
    #[serde(skip_serializing, default = "default_true")]
    pub in_fit_range: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy)]
pub struct TauSearch {
    pub samples: usize,
    /// Window is `(0, window_factor · tau_opt_fit(β)]`.
    pub window_factor: f64,
    pub tol: f64,
    pub eps_tail: f64,
}

impl Default for TauSearch {
    fn default() -> Self {
        Self {
            samples: 400,
            window_factor: 2.5,
            tol: 1e-10,
            eps_tail: DEFAULT_EPS_TAIL,
        }
    }
}

pub fn find_tau_opt(beta: f64) -> Result<HeraldResult> {
    find_tau_opt_with(beta, &TauSearch::default())
}

/// Global maximum of p₀ on the search window: coarse grid, then Brent
/// refinement on the two cells around the best sample.
pub fn find_tau_opt_with(beta: f64, search: &TauSearch) -> Result<HeraldResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("tau_opt search needs beta > 0, got {beta}")));
    }
    let herald = HeraldPropagator::new(beta, search.eps_tail)?;
    let window = search.window_factor * tau_opt_fit(beta, &FitLawConstants::default());
    let n = search.samples.max(3);
    let taus: Vec<f64> = (1..=n).map(|i| window * i as f64 / n as f64).collect();
    let curve: Vec<(f64, f64)> = taus.par_iter().map(|&t| (t, herald.p0(t))).collect();

    let best = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if best == n - 1 {
        return Err(Error::TauSearch {
            reason: format!("p0 still rising at the window edge tau = {window}"),
            curve,
        });
    }
    let lo = if best == 0 { 0.0 } else { taus[best - 1] };
    let hi = taus[best + 1];
    let refined = minimize_scalar(|t| -herald.p0(t), (lo, hi), search.tol).map_err(|e| Error::TauSearch {
        reason: e.to_string(),
        curve: curve.clone(),
    })?;
    let tau_opt = if -refined.value >= curve[best].1 { refined.x } else { taus[best] };

    let (raw, p0) = herald.conditional_state(tau_opt);
    let (psi_raw, _) = raw.normalize()?;
    Ok(HeraldResult {
        beta,
        tau_opt,
        p0,
        psi_raw,
        in_fit_range: in_fit_range(beta),
    })
}

pub const PCURVE_CSV_HEADER: &str = "tau,p0";

pub fn write_pcurve_csv<W: Write>(mut out: W, curve: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "{PCURVE_CSV_HEADER}")?;
    for &(t, p) in curve {
        writeln!(out, "{}", csvfmt::row(&[t, p]))?;
    }
    Ok(())
}
