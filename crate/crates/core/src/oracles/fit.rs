use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

const ASYMPTOTE: f64 = 0.25;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t1: f64,
    pub stderr: f64,
    pub amplitude: f64,
    pub rss: f64,
    pub iterations: usize,
}

fn residuals(times: &[f64], ys: &[f64], a: f64, k: f64) -> (Vec<f64>, f64) {
    let r: Vec<f64> = times
        .iter()
        .zip(ys)
        .map(|(t, y)| y - (a * (-k * t).exp() + ASYMPTOTE))
        .collect();
    let rss = r.iter().map(|v| v * v).sum();
    (r, rss)
}

fn normal_equations(times: &[f64], r: &[f64], a: f64, k: f64) -> (Matrix2<f64>, Vector2<f64>) {
    let mut jtj = Matrix2::zeros();
    let mut jtr = Vector2::zeros();
    for (t, ri) in times.iter().zip(r) {
        let e = (-k * t).exp();
        let g = Vector2::new(e, -a * t * e);
        jtj += g * g.transpose();
        jtr += g * *ri;
    }
    (jtj, jtr)
}

/// Log-linear guess for `(a, k)` from points away from the asymptote.
fn initial_guess(times: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(ys)
        .filter(|(_, y)| (*y - ASYMPTOTE).abs() > 1e-9)
        .map(|(t, y)| (*t, (y - ASYMPTOTE).abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (st, sl) = pts.iter().fold((0.0, 0.0), |(a, b), (t, l)| (a + t, b + l));
    let (mt, ml) = (st / m, sl / m);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, l) in &pts {
        num += (t - mt) * (l - ml);
        den += (t - mt) * (t - mt);
    }
    if den == 0.0 {
        return None;
    }
    let slope = num / den;
    let k = if slope < 0.0 { -slope } else { 1.0 / (mt.abs() + 1.0) };
    let sign = (ys[0] - ASYMPTOTE).signum();
    Some((sign * (ml - slope * mt).exp(), k))
}

/// Least-squares fit of `a · exp(−t/T1) + 1/4` by Levenberg–Marquardt on
/// `(a, 1/T1)`. The standard error comes from `(JᵀJ)⁻¹ · RSS / (m − 2)`.
pub fn fit_decay_time(times: &[f64], populations: &[f64]) -> Result<DecayFit> {
    if times.len() != populations.len() {
        return Err(SimError::Argument(format!(
            "{} times for {} populations",
            times.len(),
            populations.len()
        )));
    }
    if times.len() < 5 {
        return Err(SimError::Argument(format!(
            "decay fit needs at least 5 points, got {}",
            times.len()
        )));
    }
    if let Some(y) = populations
        .iter()
        .find(|y| !(0.0..=1.0).contains(*y))
    {
        return Err(SimError::Argument(format!("population {y} outside [0, 1]")));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(SimError::Argument("non-finite time".into()));
    }

    let (mut a, mut k) = initial_guess(times, populations).ok_or_else(|| {
        SimError::Fit("curve sits on the asymptote; no decay to fit".into())
    })?;
    let (mut r, mut rss) = residuals(times, populations, a, k);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let (jtj, jtr) = normal_equations(times, &r, a, k);
        let damped = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * mu;
        let Some(step) = damped.lu().solve(&jtr) else {
            break;
        };
        let (na, nk) = (a + step[0], k + step[1]);
        let (nr, nrss) = residuals(times, populations, na, nk);
        if nrss.is_finite() && nrss <= rss {
            let small = step[0].abs() <= 1e-13 * (1.0 + a.abs())
                && step[1].abs() <= 1e-13 * (1.0 + k.abs());
            a = na;
            k = nk;
            r = nr;
            let flat = rss - nrss <= 1e-30 + 1e-15 * rss;
            rss = nrss;
            mu = (mu * 0.3).max(1e-12);
            if small || (flat && step.norm() < 1e-9 * (1.0 + k.abs())) {
                converged = true;
                break;
            }
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                converged = rss < 1e-24;
                break;
            }
        }
    }
    if !converged || !(k > 0.0) || !k.is_finite() {
        return Err(SimError::Fit(format!(
            "decay fit did not converge after {iterations} iterations (a = {a}, rate = {k}, rss = {rss:e})"
        )));
    }

    let (jtj, _) = normal_equations(times, &r, a, k);
    let dof = (times.len() - 2) as f64;
    let var_k = jtj
        .try_inverse()
        .map(|inv| inv[(1, 1)] * rss / dof)
        .ok_or_else(|| SimError::Fit("singular fit covariance".into()))?;
    Ok(DecayFit {
        t1: 1.0 / k,
        stderr: var_k.max(0.0).sqrt() / (k * k),
        amplitude: a,
        rss,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let times: Vec<f64> = (0..25).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = times.iter().map(|t| 0.75 * (-t / 5.0).exp() + 0.25).collect();
        let fit = fit_decay_time(&times, &ys).unwrap();
        assert!((fit.t1 - 5.0).abs() < 1e-6, "{fit:?}");
        assert!((fit.amplitude - 0.75).abs() < 1e-6);
    }

    #[test]
    fn rising_curve() {
        let times: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = times.iter().map(|t| 0.25 - 0.25 * (-t / 3.0).exp()).collect();
        let fit = fit_decay_time(&times, &ys).unwrap();
        assert!((fit.t1 - 3.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_data_has_positive_stderr() {
        let times: Vec<f64> = (0..30).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = times
            .iter()
            .enumerate()
            .map(|(i, t)| 0.5 * (-t / 4.0).exp() + 0.25 + if i % 2 == 0 { 0.01 } else { -0.01 })
            .collect();
        let fit = fit_decay_time(&times, &ys).unwrap();
        assert!(fit.stderr > 0.0);
        assert!((fit.t1 - 4.0).abs() < 4.0 * fit.stderr + 0.2);
    }

    #[test]
    fn argument_errors() {
        assert!(fit_decay_time(&[0.0, 1.0], &[0.5, 0.4]).is_err());
        assert!(fit_decay_time(&[0.0; 5], &[0.5; 4]).is_err());
        assert!(fit_decay_time(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.5; 5]).is_err());
        assert!(matches!(
            fit_decay_time(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.25; 5]),
            Err(SimError::Fit(_))
        ));
    }
}
