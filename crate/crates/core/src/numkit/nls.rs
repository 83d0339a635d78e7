//! Nonlinear least squares for the three saturating power-law models.
//!
//! Damped Gauss–Newton (Levenberg–Marquardt with Nielsen's damping update)
//! on central-difference Jacobians. If the Jacobian turns non-finite or the
//! iteration stalls, a Nelder–Mead polish on the sum of squares takes over.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::minimize::nelder_mead;
use crate::error::{Error, Result};

/// Functional forms used for the empirical fit laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitLaw {
    /// `b / (1 + c x)^d`
    TauOpt,
    /// `b / (1 + c x)^d`
    PZero,
    /// `a + b / (1 + c x)^d`
    XiPrep,
}

impl FitLaw {
    pub fn param_count(self) -> usize {
        match self {
            FitLaw::TauOpt | FitLaw::PZero => 3,
            FitLaw::XiPrep => 4,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitLaw::TauOpt => &["b_t", "c_t", "d_t"],
            FitLaw::PZero => &["b_p", "c_p", "d_p"],
            FitLaw::XiPrep => &["a_r", "b_r", "c_r", "d_r"],
        }
    }

    pub fn evaluate(self, params: &[f64], x: f64) -> f64 {
        match self {
            FitLaw::TauOpt | FitLaw::PZero => params[0] / (1.0 + params[1] * x).powf(params[2]),
            FitLaw::XiPrep => params[0] + params[1] / (1.0 + params[2] * x).powf(params[3]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LevenbergMarquardt,
    NelderMead,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitModel {
    pub law: FitLaw,
    pub params: Vec<f64>,
    /// ‖r‖₂ over all data points.
    pub residual_norm: f64,
    pub rms: f64,
    pub iterations: usize,
    pub method: FitMethod,
}

impl FitModel {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.law.evaluate(&self.params, x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NlsOptions {
    pub max_iter: usize,
    /// Relative step and gradient tolerance.
    pub tol: f64,
    /// Extra jittered starts tried only when the first attempt fails.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-14,
            restarts: 8,
            seed: 0x5eed,
        }
    }
}

pub fn nls_fit(law: FitLaw, data: &[(f64, f64)], initial: &[f64]) -> Result<FitModel> {
    nls_fit_with(law, data, initial, &NlsOptions::default())
}

pub fn nls_fit_with(law: FitLaw, data: &[(f64, f64)], initial: &[f64], opts: &NlsOptions) -> Result<FitModel> {
    let np = law.param_count();
    if initial.len() != np {
        return Err(Error::InvalidInput(format!(
            "{law:?} takes {np} parameters, got {}",
            initial.len()
        )));
    }
    if data.len() < 2 * np {
        return Err(Error::InvalidInput(format!(
            "need at least {} data points for {np} parameters, got {}",
            2 * np,
            data.len()
        )));
    }
    if let Some(index) = data.iter().position(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite { what: "fit data", index });
    }

    let first = fit_from(law, data, initial, opts);
    if let Ok(ref m) = first {
        if m.residual_norm.is_finite() {
            return first;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<FitModel> = None;
    let mut last_err = first.err();
    for _ in 0..opts.restarts {
        let start: Vec<f64> = initial
            .iter()
            .map(|&p| p * (1.0 + rng.gen_range(-0.3..0.3)) + rng.gen_range(-1e-2..1e-2))
            .collect();
        match fit_from(law, data, &start, opts) {
            Ok(m) if best.as_ref().is_none_or(|b| m.residual_norm < b.residual_norm) => best = Some(m),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or(Error::FitFailed {
            reason: "no restart produced a finite residual".into(),
            last_params: initial.to_vec(),
        })
    })
}

fn residuals(law: FitLaw, data: &[(f64, f64)], params: &[f64]) -> DVector<f64> {
    DVector::from_iterator(data.len(), data.iter().map(|&(x, y)| law.evaluate(params, x) - y))
}

fn half_cost(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

fn jacobian(law: FitLaw, data: &[(f64, f64)], params: &[f64]) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(data.len(), params.len());
    let mut p = params.to_vec();
    for k in 0..params.len() {
        let h = 1e-6 * params[k].abs().max(1e-3);
        p[k] = params[k] + h;
        let up = residuals(law, data, &p);
        p[k] = params[k] - h;
        let down = residuals(law, data, &p);
        p[k] = params[k];
        jac.set_column(k, &((up - down) / (2.0 * h)));
    }
    jac
}

fn finish(law: FitLaw, data: &[(f64, f64)], params: Vec<f64>, iterations: usize, method: FitMethod) -> FitModel {
    let r = residuals(law, data, &params);
    let residual_norm = r.norm();
    FitModel {
        law,
        rms: residual_norm / (data.len() as f64).sqrt(),
        params,
        residual_norm,
        iterations,
        method,
    }
}

fn fit_from(law: FitLaw, data: &[(f64, f64)], initial: &[f64], opts: &NlsOptions) -> Result<FitModel> {
    let mut x = DVector::from_column_slice(initial);
    let mut r = residuals(law, data, x.as_slice());
    let mut cost = half_cost(&r);
    if !cost.is_finite() {
        return Err(Error::FitFailed {
            reason: "non-finite residual at the initial guess".into(),
            last_params: initial.to_vec(),
        });
    }

    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut stalled = true;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        if cost <= 1e-32 {
            stalled = false;
            break;
        }
        let jac = jacobian(law, data, x.as_slice());
        if jac.iter().any(|v| !v.is_finite()) {
            break;
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() <= opts.tol * cost.max(1e-300).sqrt() * 1e-2 {
            stalled = false;
            break;
        }
        let diag_floor = jtj.diagonal().amax().max(1e-300) * 1e-12;
        let scaling = jtj.diagonal().map(|d| d.max(diag_floor));
        if mu < 0.0 {
            mu = 1e-3 * jtj.diagonal().amax();
        }

        let a = &jtj + DMatrix::from_diagonal(&(scaling.clone() * mu));
        let Some(step) = a.lu().solve(&(-&g)) else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        if step.norm() <= opts.tol * (x.norm() + opts.tol) {
            stalled = false;
            break;
        }
        let candidate = &x + &step;
        let r_new = residuals(law, data, candidate.as_slice());
        let cost_new = half_cost(&r_new);
        let predicted = 0.5 * step.dot(&(step.component_mul(&scaling) * mu - &g));
        let rho = if cost_new.is_finite() && predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };
        if rho > 0.0 {
            let rel_drop = (cost - cost_new) / cost;
            x = candidate;
            r = r_new;
            cost = cost_new;
            mu *= (1.0_f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if rel_drop < 1e-15 {
                stalled = false;
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                break;
            }
        }
    }

    if !stalled {
        return Ok(finish(law, data, x.as_slice().to_vec(), iterations, FitMethod::LevenbergMarquardt));
    }

    // Fallback: simplex polish from the best LM iterate.
    let scale: Vec<f64> = x.iter().map(|p| 0.05 * p.abs().max(1e-2)).collect();
    let simplex = nelder_mead(
        |p| half_cost(&residuals(law, data, p)),
        x.as_slice(),
        &scale,
        1e-16,
        20_000,
    );
    if !simplex.value.is_finite() {
        return Err(Error::FitFailed {
            reason: "Levenberg–Marquardt stalled and Nelder–Mead found no finite residual".into(),
            last_params: simplex.x,
        });
    }
    Ok(finish(law, data, simplex.x, iterations + simplex.iterations, FitMethod::NelderMead))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(law: FitLaw, params: &[f64], xs: impl Iterator<Item = f64>) -> Vec<(f64, f64)> {
        xs.map(|x| (x, law.evaluate(params, x))).collect()
    }

    #[test]
    fn recovers_exact_power_law() {
        let truth = [1.70, 1.16, 0.84];
        let data = synthetic(FitLaw::TauOpt, &truth, (0..30).map(|i| 2.0 + 18.0 * i as f64 / 29.0));
        let fit = nls_fit(FitLaw::TauOpt, &data, &[1.0, 1.0, 1.0]).unwrap();
        for (got, want) in fit.params.iter().zip(truth) {
            assert!((got - want).abs() < 1e-6, "{:?}", fit.params);
        }
        assert!(fit.residual_norm < 1e-10);
    }

    #[test]
    fn recovers_offset_law() {
        let truth = [-0.35, 0.14, 0.13, 2.40];
        let data = synthetic(FitLaw::XiPrep, &truth, (0..40).map(|i| 2.0 + 2.0 * i as f64));
        let fit = nls_fit(FitLaw::XiPrep, &data, &[-0.3, 0.2, 0.1, 2.0]).unwrap();
        assert!(fit.residual_norm < 1e-9, "{fit:?}");
        assert!((fit.params[0] + 0.35).abs() < 1e-4);
    }

    #[test]
    fn constant_data_is_fit_exactly() {
        let data: Vec<(f64, f64)> = (0..12).map(|i| (2.0 + i as f64, 0.5)).collect();
        let fit = nls_fit(FitLaw::XiPrep, &data, &[-0.35, 0.14, 0.13, 2.4]).unwrap();
        assert!(fit.residual_norm < 1e-8, "{fit:?}");
        for &(x, _) in &data {
            assert!((fit.evaluate(x) - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn too_few_points() {
        let data = vec![(1.0, 1.0); 5];
        assert!(matches!(
            nls_fit(FitLaw::PZero, &data, &[1.0, 1.0, 1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn non_finite_start_reports_last_iterate() {
        // (1 + c x) < 0 for every x with c = -10, so the power is NaN.
        let data: Vec<(f64, f64)> = (0..8).map(|i| (1.0 + i as f64, 1.0)).collect();
        let opts = NlsOptions { restarts: 0, ..Default::default() };
        match nls_fit_with(FitLaw::PZero, &data, &[1.0, -10.0, 0.5], &opts) {
            Err(Error::FitFailed { last_params, .. }) => assert_eq!(last_params, vec![1.0, -10.0, 0.5]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
