//! Single-mode continuous-variable operations on Fock vectors: even cat
//! states, phase-space rotation, squeezing, fidelity and Wigner functions,
//! plus the closed-form amplitude and energy relations used to seed and
//! check the cat-matching search.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditional::{xi_prep_fit, FitLawConstants};
use crate::csvfmt;
use crate::error::{Error, Result};
use crate::hilbert::FockVector;
use crate::numkit::{eigh_tridiagonal, log_factorial, maximize_sampled, EigenDecomposition, TridiagonalSym};

/// Truncation budget for cat states.
pub const CAT_TAIL: f64 = 1e-12;
/// Largest tolerated weight in the top padding levels after a squeeze.
pub const SQUEEZE_EDGE_TOL: f64 = 1e-6;
const SQUEEZE_EDGE_LEVELS: usize = 16;
/// Edge weight below which the padded truncation is taken as exact.
const SQUEEZE_EDGE_TIGHT: f64 = 1e-20;
const SQUEEZE_MAX_DIM: usize = 16_384;
/// Riemann-sum normalization tolerance for Wigner grids.
pub const WIGNER_NORM_TOL: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatSpec {
    pub alpha: f64,
}

impl CatSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("cat amplitude must be positive, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// `K = 2(1 + e^{-2α²})`.
    pub fn normalization(&self) -> f64 {
        2.0 * (1.0 + (-2.0 * self.alpha * self.alpha).exp())
    }

    /// Smallest `n_max` whose truncated norm reaches `1 − CAT_TAIL`.
    pub fn cutoff(&self) -> usize {
        let amps = cat_amplitudes(self.alpha, usize::MAX / 4, Some(CAT_TAIL));
        amps.len() - 1
    }
}

/// Even-cat amplitudes. With `stop_tail`, stops as soon as the accumulated
/// norm reaches `1 − stop_tail` (or at `n_max`).
fn cat_amplitudes(alpha: f64, n_max: usize, stop_tail: Option<f64>) -> Vec<C64> {
    let log_alpha = alpha.ln();
    let log_k = (2.0 * (1.0 + (-2.0 * alpha * alpha).exp())).ln();
    let mut amps = Vec::new();
    let mut acc = 0.0;
    for n in 0..=n_max {
        if n % 2 == 1 {
            amps.push(C64::new(0.0, 0.0));
            continue;
        }
        let log_mag = 2f64.ln() - 0.5 * alpha * alpha + n as f64 * log_alpha - 0.5 * log_factorial(n as u64) - 0.5 * log_k;
        let a = log_mag.exp();
        amps.push(C64::new(a, 0.0));
        acc += a * a;
        if let Some(tail) = stop_tail {
            if acc >= 1.0 - tail && n as f64 > alpha * alpha {
                break;
            }
        }
    }
    amps
}

pub fn cat_state(spec: CatSpec, n_max: usize) -> Result<FockVector> {
    let psi = FockVector::new(cat_amplitudes(spec.alpha, n_max, None));
    if psi.norm_sqr() < 1.0 - CAT_TAIL {
        return Err(Error::CutoffTooSmall(format!(
            "cat(alpha = {}) needs n_max >= {}, got {n_max}",
            spec.alpha,
            spec.cutoff()
        )));
    }
    Ok(psi)
}

/// `R(θ)`: amplitude `n` picks up `e^{-inθ}`.
pub fn rotate(psi: &FockVector, theta: f64) -> FockVector {
    let amps = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, a)| a * C64::from_polar(1.0, -(n as f64 * theta).rem_euclid(TAU)))
        .collect();
    FockVector::new(amps)
}

/// One parity sector of the squeeze generator: `a²` couples `m` and `m+2`
/// with `√((m+1)(m+2))`.
struct ParityBlock {
    indices: Vec<usize>,
    eigen: Option<EigenDecomposition>,
}

impl ParityBlock {
    fn new(parity: usize, dim: usize) -> Result<Self> {
        let indices: Vec<usize> = (parity..dim).step_by(2).collect();
        let eigen = if indices.len() > 1 {
            let off = indices[..indices.len() - 1]
                .iter()
                .map(|&m| (((m + 1) * (m + 2)) as f64).sqrt())
                .collect();
            Some(eigh_tridiagonal(&TridiagonalSym::with_zero_diagonal(off)?)?)
        } else {
            None
        };
        Ok(Self { indices, eigen })
    }

    /// `exp(½ξ(a² − a†²))` restricted to this sector. With
    /// `D = diag(e^{iπm/4})` and `T` the coupling matrix, the generator is
    /// `½ξ·i·D T D†`, so the exponential is `D V e^{iξΛ/2} Vᵀ D†`.
    fn apply(&self, xi: f64, input: &[C64], out: &mut [C64]) {
        let Some(eig) = &self.eigen else {
            for &m in &self.indices {
                out[m] = input[m];
            }
            return;
        };
        let phase = |m: usize| C64::from_polar(1.0, FRAC_PI_4 * (m % 8) as f64);
        let u: Vec<C64> = self.indices.iter().map(|&m| input[m] * phase(m).conj()).collect();
        let dim = u.len();
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let v = eig.eigenvector(j);
            let proj: C64 = v.iter().zip(&u).map(|(&vk, &uk)| uk * vk).sum();
            *c = proj * C64::from_polar(1.0, 0.5 * xi * eig.eigenvalues()[j]);
        }
        let mut w = vec![C64::new(0.0, 0.0); dim];
        for (j, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (wk, &vk) in w.iter_mut().zip(eig.eigenvector(j)) {
                *wk += c * vk;
            }
        }
        for (slot, &m) in self.indices.iter().enumerate() {
            out[m] = w[slot] * phase(m);
        }
    }
}

struct SqueezeBasis {
    even: ParityBlock,
    odd: ParityBlock,
}

/// Squeeze operator `S(ξ) = exp(½(ξ* a² − ξ a†²))` for real ξ, with the
/// generator's spectral decomposition cached per working dimension.
#[derive(Default)]
pub struct Squeezer {
    cache: Mutex<HashMap<usize, Arc<SqueezeBasis>>>,
}

impl Squeezer {
    pub fn new() -> Self {
        Self::default()
    }

    fn basis(&self, dim: usize) -> Result<Arc<SqueezeBasis>> {
        if let Some(b) = self.cache.lock().expect("squeezer cache poisoned").get(&dim) {
            return Ok(b.clone());
        }
        let (even, odd) = rayon::join(|| ParityBlock::new(0, dim), || ParityBlock::new(1, dim));
        let basis = Arc::new(SqueezeBasis { even: even?, odd: odd? });
        self.cache.lock().expect("squeezer cache poisoned").insert(dim, basis.clone());
        Ok(basis)
    }

    /// Working dimension for an input: twice its effective support plus 32.
    pub fn padded_dim(psi: &FockVector) -> usize {
        2 * effective_support(psi) + 32
    }

    /// Squeeze on the padded dimension, doubling it while the top levels
    /// still carry more than [`SQUEEZE_EDGE_TIGHT`] of the weight.
    pub fn squeeze(&self, psi: &FockVector, xi: f64) -> Result<FockVector> {
        let mut dim = Self::padded_dim(psi);
        loop {
            let out = self.squeeze_unchecked(psi, xi, dim)?;
            if edge_weight(&out) <= SQUEEZE_EDGE_TIGHT * psi.norm_sqr() {
                return Ok(out);
            }
            if 2 * dim > SQUEEZE_MAX_DIM {
                return check_edge(out, psi, xi);
            }
            dim *= 2;
        }
    }

    /// Squeeze on an explicit working dimension (at least the input's).
    pub fn squeeze_in(&self, psi: &FockVector, xi: f64, dim: usize) -> Result<FockVector> {
        check_edge(self.squeeze_unchecked(psi, xi, dim)?, psi, xi)
    }

    fn squeeze_unchecked(&self, psi: &FockVector, xi: f64, dim: usize) -> Result<FockVector> {
        if !xi.is_finite() {
            return Err(Error::InvalidInput(format!("squeeze parameter must be finite, got {xi}")));
        }
        let input = psi.resized(dim.max(psi.dim()));
        if xi == 0.0 {
            return Ok(input);
        }
        let dim = input.dim();
        let basis = self.basis(dim)?;
        let mut out = vec![C64::new(0.0, 0.0); dim];
        basis.even.apply(xi, input.amplitudes(), &mut out);
        basis.odd.apply(xi, input.amplitudes(), &mut out);
        Ok(FockVector::new(out))
    }
}

fn check_edge(out: FockVector, input: &FockVector, xi: f64) -> Result<FockVector> {
    let edge = edge_weight(&out);
    if edge > SQUEEZE_EDGE_TOL * input.norm_sqr().max(f64::MIN_POSITIVE) {
        return Err(Error::CutoffTooSmall(format!(
            "squeeze by {xi} leaves weight {edge:.3e} in the top {SQUEEZE_EDGE_LEVELS} of {} levels",
            out.dim()
        )));
    }
    Ok(out)
}

fn edge_weight(psi: &FockVector) -> f64 {
    let a = psi.amplitudes();
    a[a.len().saturating_sub(SQUEEZE_EDGE_LEVELS)..].iter().map(|a| a.norm_sqr()).sum()
}

fn shared_squeezer() -> &'static Squeezer {
    static SHARED: OnceLock<Squeezer> = OnceLock::new();
    SHARED.get_or_init(Squeezer::new)
}

/// One past the last level carrying non-negligible weight.
fn effective_support(psi: &FockVector) -> usize {
    let total = psi.norm_sqr();
    let mut tail = 0.0;
    for (n, a) in psi.amplitudes().iter().enumerate().rev() {
        tail += a.norm_sqr();
        if tail > 1e-30 * total {
            return n + 1;
        }
    }
    1
}

/// `S(ξ)ψ` using a process-wide basis cache.
pub fn squeeze(psi: &FockVector, xi: f64) -> Result<FockVector> {
    shared_squeezer().squeeze(psi, xi)
}

/// `|⟨a|b⟩|²`; both inputs must be normalized.
pub fn fidelity(a: &FockVector, b: &FockVector) -> Result<f64> {
    a.require_normalized()?;
    b.require_normalized()?;
    Ok(a.inner(b).norm_sqr().min(1.0))
}

/// Which way the π/4 undo-rotation turns phase space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationSign {
    /// `R†(π/4)`: multiplies amplitude `n` by `e^{+inπ/4}`.
    Adjoint,
    /// `R(π/4)`: the mirror-image convention.
    Forward,
}

impl RotationSign {
    fn angle(self) -> f64 {
        match self {
            RotationSign::Adjoint => -FRAC_PI_4,
            RotationSign::Forward => FRAC_PI_4,
        }
    }
}

/// `S†(ξ) R†(π/4) ψ_raw`.
pub fn prepare_psi_out(psi_raw: &FockVector, xi: f64) -> Result<FockVector> {
    prepare_psi_out_with(psi_raw, xi, RotationSign::Adjoint, shared_squeezer())
}

pub fn prepare_psi_out_with(psi_raw: &FockVector, xi: f64, sign: RotationSign, squeezer: &Squeezer) -> Result<FockVector> {
    psi_raw.require_normalized()?;
    squeezer.squeeze(&rotate(psi_raw, sign.angle()), -xi)
}

/// `α_prep = e^{ξ}√(2β² − sinh²ξ)`, defined for ξ ≤ 0.
pub fn alpha_prep(beta: f64, xi: f64) -> Result<f64> {
    if xi > 0.0 {
        return Err(Error::Domain(format!("alpha_prep needs xi <= 0, got {xi}")));
    }
    let arg = 2.0 * beta * beta - xi.sinh().powi(2);
    if !(arg >= 0.0) {
        return Err(Error::Domain(format!("2 beta^2 - sinh^2 xi = {arg} < 0 (beta = {beta}, xi = {xi})")));
    }
    Ok(xi.exp() * arg.sqrt())
}

/// The paper's closed form for ⟨n⟩ after the anti-squeeze:
/// `2β²e^{2ξ} − tanh(2α²) sinh²ξ e^{2ξ}`.
pub fn mean_photons_after_antisqueeze(beta: f64, xi: f64, alpha: f64) -> f64 {
    let e2 = (2.0 * xi).exp();
    2.0 * beta * beta * e2 - (2.0 * alpha * alpha).tanh() * xi.sinh().powi(2) * e2
}

/// The paper's energy of an even cat squeezed with `ξ = −r`:
/// `tanh(2α²)(α²e^{2r} + sinh²r)`.
pub fn squeezed_cat_energy(alpha: f64, r: f64) -> f64 {
    (2.0 * alpha * alpha).tanh() * (alpha * alpha * (2.0 * r).exp() + r.sinh().powi(2))
}

/// Exact `⟨n⟩` of `S(−r)|cat(α)⟩` from `⟨n⟩_cat = α² tanh α²` and
/// `⟨a²⟩_cat = α²`: `cosh 2r · α² tanh α² + sinh²r + sinh 2r · α²`.
pub fn squeezed_cat_energy_exact(alpha: f64, r: f64) -> f64 {
    let a2 = alpha * alpha;
    (2.0 * r).cosh() * a2 * a2.tanh() + r.sinh().powi(2) + (2.0 * r).sinh() * a2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatMatch {
    pub xi: f64,
    pub alpha: f64,
    pub fidelity: f64,
    pub sign: RotationSign,
    /// Fidelity at the fit-law initial guess, same sign.
    pub initial_fidelity: f64,
}

/// Search window half-width around the fit-law squeeze guess.
const XI_WINDOW: f64 = 0.3;
const XI_SAMPLES: usize = 13;
const ALPHA_SAMPLES: usize = 25;

fn best_alpha(psi_out: &FockVector, alpha0: f64) -> Result<(f64, f64)> {
    let dim = psi_out.n_max();
    let overlap = |alpha: f64| {
        let cat = FockVector::new(cat_amplitudes(alpha, dim, None));
        cat.inner(psi_out).norm_sqr()
    };
    let m = maximize_sampled(overlap, 0.5 * alpha0, 1.5 * alpha0, ALPHA_SAMPLES, 1e-10)?;
    Ok((m.x, m.value))
}

fn match_with_sign(psi_raw: &FockVector, xi0: f64, alpha0: f64, sign: RotationSign, sq: &Squeezer) -> Result<CatMatch> {
    let initial = {
        let out = prepare_psi_out_with(psi_raw, xi0, sign, sq)?;
        let cat = FockVector::new(cat_amplitudes(alpha0, out.n_max(), None));
        cat.inner(&out).norm_sqr()
    };
    let lo = xi0 - XI_WINDOW;
    let hi = (xi0 + XI_WINDOW).min(0.0);
    let mut failure = None;
    let mut score = |xi: f64| match prepare_psi_out_with(psi_raw, xi, sign, sq).and_then(|o| best_alpha(&o, alpha0)) {
        Ok((_, f)) => f,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let outer = maximize_sampled(&mut score, lo, hi, XI_SAMPLES, 1e-8);
    let outer = match (outer, failure) {
        (Ok(m), None) => m,
        (_, Some(e)) | (Err(e), None) => {
            return Err(Error::CatMatch {
                reason: e.to_string(),
                initial_fidelity: initial,
            })
        }
    };
    let out = prepare_psi_out_with(psi_raw, outer.x, sign, sq)?;
    let (alpha, fidelity) = best_alpha(&out, alpha0).map_err(|e| Error::CatMatch {
        reason: e.to_string(),
        initial_fidelity: initial,
    })?;
    Ok(CatMatch {
        xi: outer.x,
        alpha,
        fidelity,
        sign,
        initial_fidelity: initial,
    })
}

/// Best `(ξ*, α*)` such that `S†(ξ*) R†(π/4) ψ_raw` matches `cat(α*)`,
/// starting from the fit-law squeeze and the closed-form amplitude. Both
/// rotation senses are tried; the better one wins.
pub fn optimize_cat_match(psi_raw: &FockVector, beta: f64) -> Result<CatMatch> {
    psi_raw.require_normalized()?;
    let xi0 = xi_prep_fit(beta, &FitLawConstants::default());
    let alpha0 = alpha_prep(beta, xi0)?;
    let sq = shared_squeezer();
    let (a, f) = rayon::join(
        || match_with_sign(psi_raw, xi0, alpha0, RotationSign::Adjoint, sq),
        || match_with_sign(psi_raw, xi0, alpha0, RotationSign::Forward, sq),
    );
    match (a, f) {
        (Ok(a), Ok(f)) => Ok(if f.fidelity > a.fidelity { f } else { a }),
        (Ok(m), Err(_)) | (Err(_), Ok(m)) => Ok(m),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Symmetric square grid `[-range, range]²` with `points` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerGridSpec {
    pub range: f64,
    pub points: usize,
}

impl WignerGridSpec {
    pub fn axis(&self) -> Vec<f64> {
        let h = 2.0 * self.range / (self.points - 1) as f64;
        (0..self.points).map(|i| -self.range + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major: `values[i * p.len() + j]` is `W(x_i, p_j)`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p.len() + j]
    }

    pub fn cell_area(&self) -> f64 {
        (self.x[1] - self.x[0]) * (self.p[1] - self.p[0])
    }

    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `∫ W dp` at each `x_i`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = self.p[1] - self.p[0];
        self.values.chunks(self.p.len()).map(|row| row.iter().sum::<f64>() * dp).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `W(x, p)` with `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`, normalized to
/// unit phase-space integral (vacuum peak `1/π`).
pub fn wigner_point(psi: &FockVector, x: f64, p: f64) -> f64 {
    let c = &psi.amplitudes()[..effective_support(psi)];
    let dim = c.len();
    let a = C64::new(x, p) / 2f64.sqrt();
    let r2 = x * x + p * p;

    // Row m = 0 in log-magnitude: W_0n = (2A)^n / √n! · e^{-r²}/π.
    let log_two_a = (2.0 * a.norm()).ln();
    let arg_a = a.arg();
    let mut row: Vec<C64> = (0..dim)
        .map(|n| {
            if n == 0 {
                return C64::new((-r2).exp() / PI, 0.0);
            }
            if a.norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let log_mag = -r2 - PI.ln() + n as f64 * log_two_a - 0.5 * log_factorial(n as u64);
            C64::from_polar(log_mag.exp(), n as f64 * arg_a)
        })
        .collect();

    let rho = |m: usize, n: usize| c[m] * c[n].conj();
    let mut w = rho(0, 0).re * row[0].re;
    for (n, r) in row.iter().enumerate().skip(1) {
        w += 2.0 * (rho(0, n) * r).re;
    }
    for m in 1..dim {
        let sm = (m as f64).sqrt();
        let mut prev_diag = row[m];
        row[m] = (2.0 * a.conj() * prev_diag - sm * row[m - 1]) / sm;
        w += rho(m, m).re * row[m].re;
        for n in m + 1..dim {
            let next = (2.0 * a * row[n - 1] - sm * prev_diag) / (n as f64).sqrt();
            prev_diag = row[n];
            row[n] = next;
            w += 2.0 * (rho(m, n) * row[n]).re;
        }
    }
    w
}

/// Wigner function on a grid; fails if the grid misses probability mass.
pub fn wigner(psi: &FockVector, spec: &WignerGridSpec) -> Result<WignerGrid> {
    psi.require_normalized()?;
    if !(spec.range > 0.0) || spec.points < 3 {
        return Err(Error::InvalidInput(format!(
            "Wigner grid needs range > 0 and at least 3 points, got {spec:?}"
        )));
    }
    let x = spec.axis();
    let p = x.clone();
    let values: Vec<f64> = x
        .par_iter()
        .flat_map_iter(|&xi| p.iter().map(move |&pj| wigner_point(psi, xi, pj)))
        .collect();
    let grid = WignerGrid { x, p, values };
    let total = grid.riemann_sum();
    if (total - 1.0).abs() > WIGNER_NORM_TOL {
        return Err(Error::CutoffTooSmall(format!(
            "Wigner grid of half-width {} integrates to {total:.6}; enlarge the range or refine the grid",
            spec.range
        )));
    }
    Ok(grid)
}

/// Position-space wavefunction `ψ(x) = Σ c_n φ_n(x)`, via the Hermite
/// function recurrence.
pub fn position_wavefunction(psi: &FockVector, x: f64) -> C64 {
    let c = &psi.amplitudes()[..effective_support(psi)];
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    let mut sum = c[0] * cur;
    for (n, cn) in c.iter().enumerate().skip(1) {
        let k = (n - 1) as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * x * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        sum += cn * cur;
    }
    sum
}

pub const WIGNER_CSV_HEADER: &str = "x,p,w";

pub fn write_wigner_csv<W: Write>(mut out: W, grid: &WignerGrid) -> std::io::Result<()> {
    writeln!(out, "{WIGNER_CSV_HEADER}")?;
    for (i, &x) in grid.x.iter().enumerate() {
        for (j, &p) in grid.p.iter().enumerate() {
            writeln!(out, "{}", csvfmt::row(&[x, p, grid.at(i, j)]))?;
        }
    }
    Ok(())
}


#[cfg(test)]
mod pipeline_tests {
    use super::*;
    use crate::conditional::find_tau_opt;

    #[test]
    fn beta3_cat_match() {
        let herald = find_tau_opt(3.0).unwrap();
        let m = optimize_cat_match(&herald.psi_raw, 3.0).unwrap();
        let out = prepare_psi_out_with(&herald.psi_raw, m.xi, m.sign, &Squeezer::new()).unwrap();
        // The closed form assumes ⟨n⟩ = 2β² before the anti-squeeze; the
        // conditional state carries less, so the two differ by a few percent.
        let direct = out.mean_photon_number();
        let closed = mean_photons_after_antisqueeze(3.0, m.xi, m.alpha);
        assert!((closed / direct - 1.0).abs() < 0.06, "closed {closed}, direct {direct}");
        assert!((direct / (m.alpha * m.alpha) - 1.0).abs() < 0.01);
        assert_eq!(m.sign, RotationSign::Adjoint);
        assert!(m.fidelity >= 0.997);
        assert!(m.fidelity >= m.initial_fidelity);
        assert!((m.xi + 0.287).abs() < 0.03);
        assert!((m.alpha / 3.178 - 1.0).abs() < 0.03);
    }

    #[test]
    fn raw_state_lobes_on_the_diagonal() {
        let herald = find_tau_opt(3.0).unwrap();
        let psi = &herald.psi_raw;
        // R(π/4) turns the real-axis lobes onto the x = −p diagonal.
        let ridge = |sx: f64, sp: f64| {
            (0..=110)
                .map(|i| 2.5 + 0.05 * i as f64)
                .flat_map(|d| [1.0, -1.0].map(|s| s * d / 2f64.sqrt()))
                .map(|u| wigner_point(psi, sx * u, sp * u))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let along = ridge(1.0, -1.0);
        let across = ridge(1.0, 1.0);
        assert!(along > 0.05 && along > 20.0 * across.abs(), "along {along}, across {across}");
        let grid = wigner(psi, &WignerGridSpec { range: 9.0, points: 91 }).unwrap();
        assert!(grid.min() < 0.0);
    }
}
