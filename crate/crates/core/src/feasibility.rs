//! Physical-units estimate of the coupling rate, the resonator relaxation
//! time and the heralded preparation time on a χ⁽²⁾ microresonator.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::conditional::{in_fit_range, tau_opt_fit, FitLawConstants};
use crate::error::{Error, Result};

/// CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// F/m
    pub eps0: f64,
    /// m/s
    pub c: f64,
}

impl PhysicalConstants {
    pub const SI: Self = Self {
        hbar: 1.054_571_817e-34,
        eps0: 8.854_187_812_8e-12,
        c: 299_792_458.0,
    };

    /// The same constants in a system where one metre is `per_meter` length
    /// units and one second is `per_second` time units (mass and current
    /// unchanged).
    pub fn rescaled(&self, per_meter: f64, per_second: f64) -> Self {
        let (l, t) = (per_meter, per_second);
        Self {
            hbar: self.hbar * l * l / t,
            eps0: self.eps0 * t.powi(4) / l.powi(3),
            c: self.c * l / t,
        }
    }
}

/// Resonator and material parameters, SI unless rescaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformParams {
    /// Second-order nonlinearity, m/V.
    pub chi2: f64,
    pub n_s: f64,
    pub n_p: f64,
    /// Signal wavelength, m.
    pub wavelength_s: f64,
    /// Mode volume, m³.
    pub mode_volume: f64,
    pub q: f64,
    pub beta: f64,
}

impl Default for PlatformParams {
    /// Lithium niobate near 1.55 μm: χ⁽²⁾ taken as d₃₃ ≈ 19.5 pm/V,
    /// extraordinary indices n_e(1.55 μm) ≈ 2.14 and n_e(0.775 μm) ≈ 2.18,
    /// a 10⁻¹⁵ m³ mode volume, Q = 10⁸ and β = 10.
    fn default() -> Self {
        Self {
            chi2: 19.5e-12,
            n_s: 2.14,
            n_p: 2.18,
            wavelength_s: 1.55e-6,
            mode_volume: 1e-15,
            q: 1e8,
            beta: 10.0,
        }
    }
}

impl PlatformParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("chi2", self.chi2, true),
            ("n_s", self.n_s, false),
            ("n_p", self.n_p, false),
            ("wavelength_s", self.wavelength_s, false),
            ("mode_volume", self.mode_volume, false),
            ("q", self.q, false),
            ("beta", self.beta, false),
        ];
        for (name, v, zero_ok) in fields {
            if !v.is_finite() || v < 0.0 || (v == 0.0 && !zero_ok) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn omega_s(&self, k: &PhysicalConstants) -> f64 {
        2.0 * PI * k.c / self.wavelength_s
    }

    pub fn omega_p(&self, k: &PhysicalConstants) -> f64 {
        2.0 * self.omega_s(k)
    }

    /// Lengths and times re-expressed in another unit system.
    pub fn rescaled(&self, per_meter: f64, per_second: f64) -> Self {
        let (l, t) = (per_meter, per_second);
        Self {
            // m/V = kg⁻¹ m⁻¹ s³ A
            chi2: self.chi2 * t.powi(3) / l,
            wavelength_s: self.wavelength_s * l,
            mode_volume: self.mode_volume * l.powi(3),
            ..*self
        }
    }
}

/// `γ = χ⁽²⁾ω_s / (4√2 n_s² n_p) · √(ħω_p / (V ε₀))`, in inverse time units.
pub fn coupling_rate_with(p: &PlatformParams, k: &PhysicalConstants) -> f64 {
    let ws = p.omega_s(k);
    let wp = p.omega_p(k);
    p.chi2 * ws / (4.0 * SQRT_2 * p.n_s * p.n_s * p.n_p) * (k.hbar * wp / (p.mode_volume * k.eps0)).sqrt()
}

pub fn coupling_rate(p: &PlatformParams) -> f64 {
    coupling_rate_with(p, &PhysicalConstants::SI)
}

/// `t* = Q / ω_s`.
pub fn relaxation_time(p: &PlatformParams) -> f64 {
    p.q / p.omega_s(&PhysicalConstants::SI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparationVerdict {
    pub t_opt: f64,
    pub t_star: f64,
    pub feasible: bool,
    /// `t* / t_opt`.
    pub margin: f64,
}

/// Heralding time `τ_opt(β)/γ` from the fit law, compared with `t*`.
pub fn preparation_time(p: &PlatformParams) -> PreparationVerdict {
    preparation_time_at(p.beta, coupling_rate(p), relaxation_time(p))
}

pub fn preparation_time_at(beta: f64, gamma: f64, t_star: f64) -> PreparationVerdict {
    let t_opt = tau_opt_fit(beta, &FitLawConstants::default()) / gamma;
    PreparationVerdict {
        t_opt,
        t_star,
        feasible: t_opt < t_star,
        margin: t_star / t_opt,
    }
}

/// JSON document emitted by `catsim feasibility`.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    /// s⁻¹
    pub gamma: f64,
    /// s
    pub t_star: f64,
    /// s
    pub t_opt: f64,
    pub feasible: bool,
    pub margin: f64,
    pub beta_in_fit_range: bool,
    pub inputs: ReportInputs,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportInputs {
    pub chi2_m_per_v: f64,
    pub n_s: f64,
    pub n_p: f64,
    pub wavelength_s_m: f64,
    pub mode_volume_m3: f64,
    pub q: f64,
    pub beta: f64,
}

pub fn report(p: &PlatformParams) -> Result<FeasibilityReport> {
    p.validate()?;
    let v = preparation_time(p);
    Ok(FeasibilityReport {
        gamma: coupling_rate(p),
        t_star: v.t_star,
        t_opt: v.t_opt,
        feasible: v.feasible,
        margin: v.margin,
        beta_in_fit_range: in_fit_range(p.beta),
        inputs: ReportInputs {
            chi2_m_per_v: p.chi2,
            n_s: p.n_s,
            n_p: p.n_p,
            wavelength_s_m: p.wavelength_s,
            mode_volume_m3: p.mode_volume,
            q: p.q,
            beta: p.beta,
        },
    })
}
