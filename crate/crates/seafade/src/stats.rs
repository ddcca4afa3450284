//! Quantile extraction, quantile-quantile goodness-of-fit metrics (R², MSE)
//! against reference laws, Weibull maximum-likelihood fitting, and empirical
//! PDF estimation.

use statrs::distribution::{ContinuousCDF, Gamma, Normal};

use crate::error::{Error, Result};

/// Reference law for a quantile comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetLaw {
    /// Gamma with the given shape and scale.
    Gamma { shape: f64, scale: f64 },
    StdNormal,
    /// Rayleigh with per-component scale σ.
    Rayleigh { sigma: f64 },
    /// Weibull with shape and scale fitted to the samples by maximum
    /// likelihood before comparing.
    WeibullFitted,
}

/// Result of one quantile comparison.
#[derive(Debug, Clone)]
pub struct QqReport {
    pub variable: String,
    /// Human-readable law description, fitted parameters included.
    pub law: String,
    pub r_squared: f64,
    pub mse: f64,
    pub n_samples: usize,
    /// (probability, empirical, theoretical) triples over the grid.
    pub pairs: Vec<(f64, f64, f64)>,
}

/// 199 evenly spaced probabilities 0.005, 0.010, ..., 0.995.
pub fn default_prob_grid() -> Vec<f64> {
    (1..200).map(|i| i as f64 * 0.005).collect()
}

/// Linear-interpolation empirical quantiles (the (n-1)p convention) at the
/// given sorted probabilities.
pub fn empirical_quantiles(samples: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Stats(format!(
            "need at least 2 samples for quantiles, got {}",
            samples.len()
        )));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Stats("probabilities must lie in [0, 1]".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN samples"));
    let n = sorted.len();
    Ok(probs
        .iter()
        .map(|&p| {
            let pos = p * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        })
        .collect())
}

fn theoretical_quantile(law: &TargetLaw, fitted: Option<(f64, f64)>, p: f64) -> f64 {
    match law {
        TargetLaw::Gamma { shape, scale } => {
            // statrs parameterizes Gamma by rate = 1/scale.
            Gamma::new(*shape, 1.0 / *scale)
                .expect("valid gamma parameters")
                .inverse_cdf(p)
        }
        TargetLaw::StdNormal => Normal::new(0.0, 1.0).unwrap().inverse_cdf(p),
        TargetLaw::Rayleigh { sigma } => sigma * (-2.0 * (1.0 - p).ln()).sqrt(),
        TargetLaw::WeibullFitted => {
            let (k, lambda) = fitted.expect("weibull fit performed");
            lambda * (-(1.0 - p).ln()).powf(1.0 / k)
        }
    }
}

/// Compares empirical quantiles on the default grid against a reference law.
/// R² = 1 - SS_res/SS_tot with the theoretical quantiles as predictions of
/// the empirical ones; MSE is the mean squared quantile difference.
pub fn qq_metrics(variable: &str, samples: &[f64], law: TargetLaw) -> Result<QqReport> {
    let probs = default_prob_grid();
    let emp = empirical_quantiles(samples, &probs)?;

    let spread = emp.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - emp.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(spread > 0.0) {
        return Err(Error::Stats(format!(
            "degenerate sample set for {variable}: zero quantile spread"
        )));
    }

    let fitted = match law {
        TargetLaw::WeibullFitted => Some(weibull_mle(samples)?),
        _ => None,
    };
    let theo: Vec<f64> = probs
        .iter()
        .map(|&p| theoretical_quantile(&law, fitted, p))
        .collect();

    let mean_emp = emp.iter().sum::<f64>() / emp.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (e, t) in emp.iter().zip(&theo) {
        ss_res += (e - t) * (e - t);
        ss_tot += (e - mean_emp) * (e - mean_emp);
    }
    let law_desc = match (law, fitted) {
        (TargetLaw::Gamma { shape, scale }, _) => format!("gamma(shape={shape:.4},scale={scale:.6})"),
        (TargetLaw::StdNormal, _) => "normal(0,1)".to_string(),
        (TargetLaw::Rayleigh { sigma }, _) => format!("rayleigh(sigma={sigma:.6})"),
        (TargetLaw::WeibullFitted, Some((k, l))) => {
            format!("weibull(shape={k:.4},scale={l:.6e})")
        }
        (TargetLaw::WeibullFitted, None) => unreachable!(),
    };
    Ok(QqReport {
        variable: variable.to_string(),
        law: law_desc,
        r_squared: 1.0 - ss_res / ss_tot,
        mse: ss_res / emp.len() as f64,
        n_samples: samples.len(),
        pairs: probs
            .into_iter()
            .zip(emp)
            .zip(theo)
            .map(|((p, e), t)| (p, e, t))
            .collect(),
    })
}

/// Maximum-likelihood Weibull fit via Newton iteration on the profile
/// likelihood of the shape; the scale then follows in closed form:
/// λ = (Σ t_i^k / n)^{1/k}. Non-positive samples are ignored (delays can
/// touch zero through the reflection).
pub fn weibull_mle(samples: &[f64]) -> Result<(f64, f64)> {
    let data: Vec<f64> = samples.iter().copied().filter(|t| *t > 0.0).collect();
    if data.len() < 2 {
        return Err(Error::Stats("weibull fit needs >= 2 positive samples".into()));
    }
    let n = data.len() as f64;
    let ln_t: Vec<f64> = data.iter().map(|t| t.ln()).collect();
    let mean_ln: f64 = ln_t.iter().sum::<f64>() / n;

    let mut k = 1.2_f64;
    for _ in 0..100 {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (t, lt) in data.iter().zip(&ln_t) {
            let tk = t.powf(k);
            s0 += tk;
            s1 += tk * lt;
            s2 += tk * lt * lt;
        }
        // f(k) = 1/k + mean(ln t) - s1/s0, f'(k) = -1/k² - (s2 s0 - s1²)/s0².
        let f = 1.0 / k + mean_ln - s1 / s0;
        let fp = -1.0 / (k * k) - (s2 * s0 - s1 * s1) / (s0 * s0);
        let step = f / fp;
        let next = (k - step).clamp(k / 3.0, k * 3.0);
        if !next.is_finite() || next <= 0.0 {
            return Err(Error::Stats("weibull shape iteration diverged".into()));
        }
        let done = (next - k).abs() < 1e-12 * k;
        k = next;
        if done {
            break;
        }
    }
    let s0: f64 = data.iter().map(|t| t.powf(k)).sum();
    let lambda = (s0 / n).powf(1.0 / k);
    if !(k.is_finite() && lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Stats("weibull fit did not converge".into()));
    }
    Ok((k, lambda))
}

/// Normalized histogram: returns (bin centers, densities); densities sum to
/// 1/binwidth-normalized unity.
pub fn empirical_pdf(samples: &[f64], n_bins: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::Stats("empirical pdf of an empty sample set".into()));
    }
    if n_bins == 0 {
        return Err(Error::Stats("need at least one bin".into()));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &s in samples {
        let idx = (((s - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let centers = (0..n_bins)
        .map(|i| lo + (i as f64 + 0.5) * width)
        .collect();
    let density = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    Ok((centers, density))
}
