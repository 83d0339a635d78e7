//! Derivative-free minimizers: Brent's golden-section/parabolic search for
//! scalars and a plain Nelder–Mead simplex for the least-squares fallback.

use crate::error::{Error, Result};

pub const DEFAULT_X_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimize `f` on `[lo, hi]` to an absolute x-tolerance `tol`.
///
/// Fails if the minimizer ends up pinned to either end of the interval, i.e.
/// the interval does not bracket an interior minimum.
pub fn minimize_scalar<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }

    const GOLD: f64 = 0.381_966_011_250_105_1; // (3 - √5) / 2
    const MAX_ITER: usize = 500;

    let mut eval = |x: f64, count: &mut usize| -> Result<f64> {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            return Err(Error::NonFinite { what: "objective", index: *count });
        }
        Ok(v)
    };
    let mut evaluations = 0;

    let (mut a, mut b) = (lo, hi);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x, &mut evaluations)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut d = 0.0_f64;
    let mut step = 0.0_f64;

    for _ in 0..MAX_ITER {
        let mid = 0.5 * (a + b);
        let tol1 = tol + f64::EPSILON.sqrt() * 1e-3 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            let edge = 2.0 * tol.max(1e-12 * (hi - lo));
            if x - lo <= edge || hi - x <= edge {
                // Compare with the endpoint itself before declaring failure.
                let f_edge = if x - lo <= edge { eval(lo, &mut evaluations)? } else { eval(hi, &mut evaluations)? };
                if f_edge <= fx {
                    return Err(Error::NoBracketedMinimum { lo, hi, x });
                }
            }
            return Ok(ScalarMinimum { x, value: fx, evaluations });
        }

        let mut use_golden = true;
        if step.abs() > tol1 {
            // Parabolic fit through x, w, v.
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let prev = step;
            if p.abs() < (0.5 * q * prev).abs() && p > q * (a - x) && p < q * (b - x) {
                step = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            step = if x >= mid { a - x } else { b - x };
            d = GOLD * step;
        }

        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = eval(u, &mut evaluations)?;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::NoConvergence { routine: "minimize_scalar", iterations: MAX_ITER })
}

/// Maximize `f` over `[lo, hi]` by sampling `samples` evenly spaced points and
/// refining the best one with [`minimize_scalar`] on its neighbouring cell.
///
/// The refinement only runs if the best sample is interior.
pub fn maximize_sampled<F>(mut f: F, lo: f64, hi: f64, samples: usize, tol: f64) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    if samples < 3 {
        return Err(Error::InvalidInput("need at least 3 samples".into()));
    }
    let h = (hi - lo) / (samples - 1) as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 0..samples {
        let y = f(lo + h * i as f64);
        if y > best.1 {
            best = (i, y);
        }
    }
    let (i, y) = best;
    if i == 0 || i == samples - 1 {
        return Err(Error::NoBracketedMinimum { lo, hi, x: lo + h * i as f64 });
    }
    let cell = (lo + h * (i - 1) as f64, lo + h * (i + 1) as f64);
    let refined = minimize_scalar(|x| -f(x), cell, tol)?;
    let (x, value) = if -refined.value >= y { (refined.x, -refined.value) } else { (lo + h * i as f64, y) };
    Ok(ScalarMinimum { x, value, evaluations: samples + refined.evaluations })
}

#[derive(Debug, Clone)]
pub struct SimplexMinimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead with the standard coefficients (1, 2, ½, ½).
pub fn nelder_mead<F>(mut f: F, start: &[f64], scale: &[f64], f_tol: f64, max_iter: usize) -> SimplexMinimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if scale[i] != 0.0 { scale[i] } else { 1e-3 };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        if spread <= f_tol * (values[0].abs() + f_tol) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] { along(0.5) } else { along(-0.5) };
            let fc = eval(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = best.iter().zip(&simplex[i]).map(|(b, p)| b + 0.5 * (p - b)).collect();
                    values[i] = eval(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    SimplexMinimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quadratic() {
        let m = minimize_scalar(|x| (x - 2.0).powi(2), (0.0, 5.0), 1e-10).unwrap();
        assert!((m.x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn cosine() {
        let m = minimize_scalar(f64::cos, (2.0, 4.0), 1e-10).unwrap();
        assert!((m.x - PI).abs() < 1e-8);
        assert!((m.value + 1.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_function_has_no_bracketed_minimum() {
        let err = minimize_scalar(|x| x, (0.0, 1.0), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NoBracketedMinimum { .. }));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(minimize_scalar(|x| x * x, (1.0, 0.0), 1e-10).is_err());
        assert!(minimize_scalar(|x| x * x, (-1.0, 1.0), 0.0).is_err());
        assert!(minimize_scalar(|_| f64::NAN, (-1.0, 1.0), 1e-8).is_err());
    }

    #[test]
    fn sampled_maximum() {
        let m = maximize_sampled(|x| (-(x - 0.3).powi(2)).exp(), 0.0, 1.0, 50, 1e-12).unwrap();
        assert!((m.x - 0.3).abs() < 1e-8);
        assert!(maximize_sampled(|x| x, 0.0, 1.0, 50, 1e-12).is_err());
    }

    #[test]
    fn rosenbrock_simplex() {
        let r = nelder_mead(
            |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            1e-14,
            5000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }
}
