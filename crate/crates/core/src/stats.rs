//! One-sample Kolmogorov–Smirnov test, used for time-rescaling diagnostics.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// `sup |F_n(x) − F(x)|`.
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Tests `samples` against the continuous distribution function `cdf`.
///
/// The p-value uses the asymptotic Kolmogorov law with Stephens'
/// small-sample correction `(√n + 0.12 + 0.11/√n) D`.
pub fn ks_test<T: Real, F>(samples: &[T], cdf: F) -> KsResult
where
    F: Fn(f64) -> f64,
{
    let n = samples.len();
    if n == 0 {
        return KsResult {
            statistic: 0.0,
            p_value: 1.0,
            n,
        };
    }
    let mut xs: Vec<f64> = samples.iter().map(|v| v.to_f64_lossy()).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    let root = nf.sqrt();
    let p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
    KsResult {
        statistic: d,
        p_value,
        n,
    }
}
