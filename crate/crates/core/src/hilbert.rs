//! State containers and basic observables.
//!
//! Two-mode states are stored per total-quanta block: block `N` holds the
//! amplitudes of `|N − 2k⟩_s ⊗ |k⟩_p` for `k = 0..=N/2`, so `k` is the pump
//! photon number and `N − 2k` the signal photon number. Blocks that carry no
//! amplitude (all odd `N` for a vacuum signal) are simply absent.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::special::log_poisson_pmf;

pub const DEFAULT_EPS_TAIL: f64 = 1e-12;

/// Tolerance on |‖ψ‖ − 1| for a vector to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

/// Single-mode state over photon numbers `0..=n_max`.
///
/// Vectors that come out of a projection are usually sub-normalized; they
/// carry `is_normalized() == false` rather than being rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FockVectorJson", try_from = "FockVectorJson")]
pub struct FockVector {
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl FockVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty(), "a Fock vector needs at least the vacuum entry");
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Self {
            normalized: (norm - 1.0).abs() <= NORM_TOL,
            amplitudes,
        }
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Number state `|n⟩` in a space of dimension `n_max + 1`.
    pub fn number_state(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max);
        let mut amps = vec![C64::new(0.0, 0.0); n_max + 1];
        amps[n] = C64::new(1.0, 0.0);
        Self::new(amps)
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::number_state(0, n_max)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Errors with [`Error::Unnormalized`] unless the vector is normalized.
    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::Unnormalized { norm: self.norm() })
        }
    }

    /// Unit-norm copy together with the original squared norm.
    pub fn normalize(&self) -> Result<(FockVector, f64)> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) {
            return Err(Error::ZeroProbability);
        }
        let inv = 1.0 / n2.sqrt();
        Ok((Self::new(self.amplitudes.iter().map(|a| a * inv).collect()), n2))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨n̂⟩ divided by the squared norm.
    pub fn mean_photon_number(&self) -> f64 {
        let num: f64 = self.amplitudes.iter().enumerate().map(|(n, a)| n as f64 * a.norm_sqr()).sum();
        num / self.norm_sqr()
    }

    /// ⟨self|other⟩; the shorter vector is treated as zero-padded.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// One past the index of the last nonzero amplitude.
    pub fn support_len(&self) -> usize {
        self.amplitudes.iter().rposition(|a| a.norm_sqr() > 0.0).map_or(1, |i| i + 1)
    }

    /// Copy resized to `dim` entries (truncating or zero-padding).
    pub fn resized(&self, dim: usize) -> FockVector {
        let mut amps = self.amplitudes.clone();
        amps.resize(dim.max(1), C64::new(0.0, 0.0));
        Self::new(amps)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FockVectorJson {
    n_max: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<FockVector> for FockVectorJson {
    fn from(v: FockVector) -> Self {
        Self {
            n_max: v.n_max(),
            re: v.amplitudes.iter().map(|a| a.re).collect(),
            im: v.amplitudes.iter().map(|a| a.im).collect(),
        }
    }
}

impl TryFrom<FockVectorJson> for FockVector {
    type Error = String;

    fn try_from(j: FockVectorJson) -> std::result::Result<Self, String> {
        if j.re.len() != j.n_max + 1 || j.im.len() != j.n_max + 1 {
            return Err(format!(
                "expected {} entries in re/im, got {}/{}",
                j.n_max + 1,
                j.re.len(),
                j.im.len()
            ));
        }
        Ok(FockVector::new(j.re.into_iter().zip(j.im).map(|(r, i)| C64::new(r, i)).collect()))
    }
}

/// Two-mode pure state in the block representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "BlockStateJson", try_from = "BlockStateJson")]
pub struct BlockState {
    beta: f64,
    eps_tail: f64,
    blocks: BTreeMap<usize, Vec<C64>>,
}

impl BlockState {
    /// Block `N` must have exactly `N/2 + 1` entries.
    pub fn from_blocks(beta: f64, eps_tail: f64, blocks: BTreeMap<usize, Vec<C64>>) -> Result<Self> {
        for (&n, amps) in &blocks {
            if amps.len() != n / 2 + 1 {
                return Err(Error::InvalidInput(format!(
                    "block N = {n} has {} entries, expected {}",
                    amps.len(),
                    n / 2 + 1
                )));
            }
        }
        Ok(Self { beta, eps_tail, blocks })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps_tail(&self) -> f64 {
        self.eps_tail
    }

    pub fn blocks(&self) -> &BTreeMap<usize, Vec<C64>> {
        &self.blocks
    }

    pub fn block(&self, total: usize) -> Option<&[C64]> {
        self.blocks.get(&total).map(Vec::as_slice)
    }

    /// Largest allocated `N`.
    pub fn max_total(&self) -> usize {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }

    /// Amplitude of `|n_s = N − 2k⟩ ⊗ |n_p = k⟩`; zero for unallocated blocks.
    pub fn amplitude(&self, total: usize, k: usize) -> C64 {
        self.blocks
            .get(&total)
            .and_then(|b| b.get(k).copied())
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.values().flatten().map(|a| a.norm_sqr()).sum()
    }

    /// ℓ² distance, treating missing blocks as zero.
    pub fn distance(&self, other: &BlockState) -> f64 {
        let mut keys: Vec<usize> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|n| {
                (0..=n / 2)
                    .map(|k| (self.amplitude(n, k) - other.amplitude(n, k)).norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn with_blocks(&self, blocks: BTreeMap<usize, Vec<C64>>) -> Self {
        Self {
            beta: self.beta,
            eps_tail: self.eps_tail,
            blocks,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockStateJson {
    beta: f64,
    eps_tail: f64,
    blocks: BTreeMap<String, BlockJson>,
}

impl From<BlockState> for BlockStateJson {
    fn from(s: BlockState) -> Self {
        Self {
            beta: s.beta,
            eps_tail: s.eps_tail,
            blocks: s
                .blocks
                .into_iter()
                .map(|(n, amps)| {
                    (
                        n.to_string(),
                        BlockJson {
                            re: amps.iter().map(|a| a.re).collect(),
                            im: amps.iter().map(|a| a.im).collect(),
                        },
                    )
                })
                .collect(),
        }
    }
}

impl TryFrom<BlockStateJson> for BlockState {
    type Error = String;

    fn try_from(j: BlockStateJson) -> std::result::Result<Self, String> {
        let mut blocks = BTreeMap::new();
        for (key, b) in j.blocks {
            let n: usize = key.parse().map_err(|_| format!("block key {key:?} is not an integer"))?;
            if b.re.len() != b.im.len() {
                return Err(format!("block {n}: re/im length mismatch"));
            }
            blocks.insert(n, b.re.into_iter().zip(b.im).map(|(r, i)| C64::new(r, i)).collect());
        }
        BlockState::from_blocks(j.beta, j.eps_tail, blocks).map_err(|e| e.to_string())
    }
}

/// Signal/pump occupations at one instant. `sum_energy = mean_ns + 2 mean_np`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationRecord {
    pub tau: f64,
    pub mean_ns: f64,
    pub mean_np: f64,
    pub sum_energy: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!("beta must be real and >= 0, got {beta}")));
    }
    Ok(())
}

/// Coherent state `|β⟩` truncated to `0..=n_max`, built from log-weights.
pub fn coherent_amplitudes(beta: f64, n_max: usize) -> Result<FockVector> {
    check_beta(beta)?;
    let mean = beta * beta;
    let amps = (0..=n_max as u64)
        .map(|n| C64::new((0.5 * log_poisson_pmf(mean, n)).exp(), 0.0))
        .collect();
    Ok(FockVector::new(amps))
}

/// Smallest `n_p_max` whose Poisson(β²) tail beyond it is at most `eps_tail`.
pub fn pump_cutoff(beta: f64, eps_tail: f64) -> usize {
    let mean = beta * beta;
    if mean == 0.0 {
        return 0;
    }
    // Far enough out that the remainder is negligible against any sane eps.
    let limit = (mean + 40.0 * mean.sqrt() + 200.0).ceil() as usize;
    let mut tail = 0.0_f64;
    // tail accumulates P(n) for n > m, summed from the top down.
    for m in (0..limit).rev() {
        tail += log_poisson_pmf(mean, m as u64 + 1).exp();
        if tail > eps_tail {
            return m + 1;
        }
    }
    0
}

/// Largest total-quanta number `N_max = 2 n_p_max` needed for the initial
/// state at tolerance `eps_tail`.
pub fn choose_cutoff(beta: f64, eps_tail: f64) -> usize {
    2 * pump_cutoff(beta, eps_tail)
}

/// Signal vacuum ⊗ pump coherent state `|β⟩`, truncated at `choose_cutoff`.
pub fn initial_block_state(beta: f64, eps_tail: f64) -> Result<BlockState> {
    check_beta(beta)?;
    if !(eps_tail > 0.0) {
        return Err(Error::InvalidInput(format!("eps_tail must be positive, got {eps_tail}")));
    }
    let np_max = pump_cutoff(beta, eps_tail);
    let coherent = coherent_amplitudes(beta, np_max)?;
    let blocks = coherent
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(m, &amp)| {
            let mut block = vec![C64::new(0.0, 0.0); m + 1];
            block[m] = amp;
            (2 * m, block)
        })
        .collect();
    BlockState::from_blocks(beta, eps_tail, blocks)
}

/// `(⟨n_s⟩, ⟨n_p⟩)` normalized by the state's squared norm.
pub fn mean_occupations(state: &BlockState) -> Result<(f64, f64)> {
    let mut norm = 0.0;
    let mut ns = 0.0;
    let mut np = 0.0;
    for (&n, block) in state.blocks() {
        for (k, a) in block.iter().enumerate() {
            let p = a.norm_sqr();
            norm += p;
            ns += (n - 2 * k) as f64 * p;
            np += k as f64 * p;
        }
    }
    if !(norm > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok((ns / norm, np / norm))
}

/// Photon-number distribution of the signal mode, indices `0..=N_max`.
pub fn signal_distribution(state: &BlockState) -> Vec<f64> {
    let mut dist = vec![0.0; state.max_total() + 1];
    for (&n, block) in state.blocks() {
        for (k, a) in block.iter().enumerate() {
            dist[n - 2 * k] += a.norm_sqr();
        }
    }
    let total: f64 = dist.iter().sum();
    if total > 0.0 {
        dist.iter_mut().for_each(|p| *p /= total);
    }
    dist
}

/// Probability of finding the pump in vacuum.
pub fn pump_vacuum_probability(state: &BlockState) -> f64 {
    let k0: f64 = state.blocks().values().map(|b| b[0].norm_sqr()).sum();
    k0 / state.norm_sqr()
}

/// Project onto `n_p = 0`. Returns the (unnormalized) signal state, with
/// `ψ(n_s = N) = c_{N,0}`, and the heralding probability.
pub fn extract_signal_if_pump_vacuum(state: &BlockState) -> Result<(FockVector, f64)> {
    let mut amps = vec![C64::new(0.0, 0.0); state.max_total() + 1];
    for (&n, block) in state.blocks() {
        amps[n] = block[0];
    }
    let psi = FockVector::new(amps);
    let total = state.norm_sqr();
    let p0 = psi.norm_sqr() / total;
    if !(p0 > 0.0) {
        return Err(Error::ZeroProbability);
    }
    Ok((psi, p0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_tail_direct(mean: f64, m: usize) -> f64 {
        // Σ_{n>m} e^{-μ} μ^n / n!, with the factorial built up in f64.
        let mut term = (-mean).exp();
        let mut tail = 0.0;
        for n in 1..400 {
            term *= mean / n as f64;
            if n > m {
                tail += term;
            }
        }
        tail
    }

    #[test]
    fn coherent_vacuum_and_poisson_weight() {
        let v = coherent_amplitudes(0.0, 5).unwrap();
        assert_eq!(v.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        let c = coherent_amplitudes(1.0, 30).unwrap();
        assert!((c.amplitudes()[0].norm_sqr() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(coherent_amplitudes(-1.0, 3).is_err());
    }

    #[test]
    fn coherent_tail_respects_cutoff() {
        let n = choose_cutoff(5.0, 1e-12) / 2;
        let c = coherent_amplitudes(5.0, n).unwrap();
        assert!(c.norm_sqr() >= 1.0 - 1e-12);
        assert!(c.norm_sqr() <= 1.0 + 1e-14);
    }

    #[test]
    fn cutoff_is_minimal() {
        assert_eq!(choose_cutoff(0.0, 1e-3), 0);
        assert_eq!(choose_cutoff(0.0, 1e-15), 0);
        for beta in [0.5, 1.0, 2.0, 5.0] {
            let mean = beta * beta;
            let m = pump_cutoff(beta, 1e-12);
            assert!(poisson_tail_direct(mean, m) <= 1e-12 * (1.0 + 1e-6), "beta {beta}");
            assert!(poisson_tail_direct(mean, m - 1) > 1e-12, "beta {beta}");
        }
        // Frozen from direct summation.
        assert_eq!(pump_cutoff(1.0, 1e-12), 14);
        assert_eq!(choose_cutoff(1.0, 1e-12), 28);
    }

    #[test]
    fn initial_state_layout() {
        let s = initial_block_state(0.0, 1e-12).unwrap();
        assert_eq!(s.blocks().len(), 1);
        assert_eq!(s.amplitude(0, 0), C64::new(1.0, 0.0));

        let s = initial_block_state(2.0, 1e-12).unwrap();
        assert!(s.blocks().keys().all(|n| n % 2 == 0));
        let p = s.amplitude(8, 4).norm_sqr();
        let want = (-4.0_f64).exp() * 256.0 / 24.0;
        assert!((p - want).abs() < 1e-14);
        assert!((p - 0.195_366_814_813_165).abs() < 1e-12);
        for (&n, b) in s.blocks() {
            for (k, a) in b.iter().enumerate() {
                if k != n / 2 {
                    assert_eq!(a.norm(), 0.0);
                }
            }
        }
        let norm = s.norm_sqr();
        assert!((1.0 - 1e-12..=1.0 + 1e-14).contains(&norm));
    }

    #[test]
    fn occupations_of_initial_state() {
        let (ns, np) = mean_occupations(&initial_block_state(5.0, 1e-12).unwrap()).unwrap();
        assert_eq!(ns, 0.0);
        assert!((np - 25.0).abs() < 1e-9);
        let (ns, np) = mean_occupations(&initial_block_state(0.0, 1e-12).unwrap()).unwrap();
        assert_eq!((ns, np), (0.0, 0.0));
    }

    #[test]
    fn marginal_of_hand_built_state() {
        // (|2⟩_s|0⟩_p + |0⟩_s|1⟩_p)/√2 lives in block N = 2.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut blocks = BTreeMap::new();
        blocks.insert(2, vec![C64::new(h, 0.0), C64::new(0.0, h)]);
        let s = BlockState::from_blocks(0.0, 1e-12, blocks).unwrap();
        let d = signal_distribution(&s);
        assert_eq!(d.len(), 3);
        assert!((d[0] - 0.5).abs() < 1e-15 && d[1] == 0.0 && (d[2] - 0.5).abs() < 1e-15);
        let (psi, p0) = extract_signal_if_pump_vacuum(&s).unwrap();
        assert!((p0 - 0.5).abs() < 1e-15);
        assert!(!psi.is_normalized());
        assert_eq!(psi.amplitudes()[2], C64::new(h, 0.0));
    }

    #[test]
    fn initial_distribution_is_vacuum() {
        let d = signal_distribution(&initial_block_state(3.0, 1e-12).unwrap());
        assert!((d[0] - 1.0).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herald_of_initial_state() {
        for beta in [0.5, 1.0, 2.0] {
            let s = initial_block_state(beta, 1e-12).unwrap();
            let (psi, p0) = extract_signal_if_pump_vacuum(&s).unwrap();
            let want = (-beta * beta).exp() / s.norm_sqr();
            assert!((p0 - want).abs() < 1e-15);
            assert!(psi.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        }
        let (psi, p0) = extract_signal_if_pump_vacuum(&initial_block_state(0.0, 1e-12).unwrap()).unwrap();
        assert_eq!(p0, 1.0);
        assert!(psi.is_normalized());
    }

    #[test]
    fn zero_herald_is_flagged() {
        let mut blocks = BTreeMap::new();
        blocks.insert(2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let s = BlockState::from_blocks(1.0, 1e-12, blocks).unwrap();
        assert!(matches!(extract_signal_if_pump_vacuum(&s), Err(Error::ZeroProbability)));
    }

    #[test]
    fn block_lengths_are_validated() {
        let mut blocks = BTreeMap::new();
        blocks.insert(4, vec![C64::new(1.0, 0.0); 2]);
        assert!(BlockState::from_blocks(1.0, 1e-12, blocks).is_err());
    }

    #[test]
    fn json_schema() {
        let v = FockVector::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j, serde_json::json!({"n_max": 1, "re": [0.6, 0.0], "im": [0.0, 0.8]}));
        let back: FockVector = serde_json::from_value(j).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<FockVector>(r#"{"n_max": 3, "re": [1.0], "im": [0.0]}"#).is_err());

        let s = initial_block_state(1.0, 1e-6).unwrap();
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["beta"], 1.0);
        assert!(j["blocks"]["4"]["re"].as_array().unwrap().len() == 3);
        let back: BlockState = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
    }
}
