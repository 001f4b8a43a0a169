//! Population (T → ∞) quantities by spectral quadrature.
//!
//! With `C̄(ω) = Λ / |1 − φ̄(iω)|²` the asymptotic Gram matrix and
//! cross-covariance are
//!
//! ```text
//! R*   = (1/2π) ∫ q̄(iω) C̄(ω) q̄(−iω)ᵀ dω
//! R*_o = (1/2π) ∫ q̄(iω) C̄(ω) φ̄(−iω)   dω
//! ```
//!
//! For the Laguerre basis the substitution `ω = β tan θ` maps the real line
//! onto `(−π/2, π/2)` and turns the all-pass factor into `e^{−2ijθ}`, so
//!
//! ```text
//! R*_jk = (2/π) ∫₀^{π/2} cos(2(j−k)θ) C̄(β tan θ) dθ
//! ```
//!
//! a symmetric Toeplitz matrix with a bounded, smooth integrand on a finite
//! interval: no truncation of the frequency axis is needed. Conjugate
//! symmetry of the integrand reduces the range to `θ ≥ 0`. The Erlang
//! quantities follow by the exact congruence `R*_g = L R*_h Lᵀ`,
//! `R*_{g,o} = L R*_{h,o}`.

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{erlang_transform, BasisFamily, KernelBasis};
use crate::error::{HawkesError, Result};
use crate::linalg;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scalar::Real;
use crate::simulate::TrueKernel;
use crate::statespace::StateSpaceModel;

/// Erlang Gram matrices with a larger condition number are reported as
/// indefinite in double precision rather than as a number.
pub const MAX_REPORTABLE_CONDITION: f64 = 1e15;

/// A true kernel described through its Laplace transform.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpectrum<T> {
    /// `φ(t) = Γ β e^{-βt}`, `φ̄(s) = Γβ / (s + β)`.
    Exponential { gamma: T, beta: T },
    /// `φ(t) = Σ a_k e^{-b_k t}`, `φ̄(s) = Σ a_k / (s + b_k)`; pairs are `(a_k, b_k)`.
    ExponentialMixture(Vec<(T, T)>),
    /// `φ(t) = αᵀ q(t)`.
    Basis { alpha: Array1<T>, basis: KernelBasis<T> },
}

impl<T: Real> KernelSpectrum<T> {
    /// `φ̄(iω)`.
    pub fn eval(&self, omega: T) -> Complex<T> {
        let s = Complex::new(T::zero(), omega);
        match self {
            KernelSpectrum::Exponential { gamma, beta } => Complex::from(*gamma * *beta) / (s + *beta),
            KernelSpectrum::ExponentialMixture(terms) => {
                terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(a, b)| {
                    acc + Complex::from(a) / (s + b)
                })
            }
            KernelSpectrum::Basis { alpha, basis } => basis
                .laplace(omega)
                .iter()
                .zip(alpha.iter())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (q, &a)| acc + *q * a),
        }
    }

    /// `Γ = φ̄(0)`.
    pub fn branching_ratio(&self) -> T {
        match self {
            KernelSpectrum::Exponential { gamma, .. } => *gamma,
            KernelSpectrum::ExponentialMixture(terms) => terms.iter().fold(T::zero(), |acc, &(a, b)| acc + a / b),
            KernelSpectrum::Basis { alpha, basis } => basis.mass().dot(alpha),
        }
    }

    /// `φ(t)`.
    pub fn eval_time(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        match self {
            KernelSpectrum::Exponential { gamma, beta } => *gamma * *beta * (-*beta * t).exp(),
            KernelSpectrum::ExponentialMixture(terms) => {
                terms.iter().fold(T::zero(), |acc, &(a, b)| acc + a * (-b * t).exp())
            }
            KernelSpectrum::Basis { alpha, basis } => basis.eval(t).dot(alpha),
        }
    }
}

impl<T: Real> From<TrueKernel<T>> for KernelSpectrum<T> {
    fn from(k: TrueKernel<T>) -> Self {
        match k {
            TrueKernel::Exponential { gamma, beta } => KernelSpectrum::Exponential { gamma, beta },
            TrueKernel::Basis { alpha, basis } => KernelSpectrum::Basis { alpha, basis },
        }
    }
}

/// A stationary Hawkes process described in the frequency domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel<T> {
    kernel: KernelSpectrum<T>,
    lambda: T,
}

impl<T: Real> SpectralModel<T> {
    /// `lambda` is the stationary rate `Λ`.
    pub fn new(kernel: KernelSpectrum<T>, lambda: T) -> Result<Self> {
        let gamma = kernel.branching_ratio();
        if !(gamma >= T::zero() && gamma < T::one()) {
            return Err(HawkesError::param(
                "gamma",
                format!("stationarity requires 0 <= Γ < 1, got {gamma}"),
            ));
        }
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(HawkesError::param(
                "lambda",
                format!("stationary rate must be > 0, got {lambda}"),
            ));
        }
        if let KernelSpectrum::ExponentialMixture(terms) = &kernel {
            if terms.is_empty() || terms.iter().any(|&(_, b)| !(b > T::zero())) {
                return Err(HawkesError::param(
                    "mixture",
                    "need at least one term, every decay rate > 0",
                ));
            }
        }
        Ok(Self { kernel, lambda })
    }

    /// Builds the model from the background rate, `Λ = c₀ / (1 − Γ)`.
    pub fn from_background(kernel: KernelSpectrum<T>, c0: T) -> Result<Self> {
        let gamma = kernel.branching_ratio();
        let lambda = c0 / (T::one() - gamma);
        Self::new(kernel, lambda)
    }

    pub fn exponential(gamma: T, beta: T, lambda: T) -> Result<Self> {
        if !(beta > T::zero()) {
            return Err(HawkesError::param(
                "beta",
                format!("decay rate must be > 0, got {beta}"),
            ));
        }
        Self::new(KernelSpectrum::Exponential { gamma, beta }, lambda)
    }

    pub fn kernel(&self) -> &KernelSpectrum<T> {
        &self.kernel
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn gamma(&self) -> T {
        self.kernel.branching_ratio()
    }

    /// `C̄(ω) = Λ / |1 − φ̄(iω)|²`.
    pub fn covariance_spectrum(&self, omega: T) -> T {
        self.lambda / (Complex::from(T::one()) - self.kernel.eval(omega)).norm_sqr()
    }
}

/// A spectral integral together with its quadrature error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralIntegral<A, T> {
    pub value: A,
    pub error: T,
}

struct LaguerreMoments<T> {
    toeplitz: Vec<T>,
    cross: Option<Vec<T>>,
    error: T,
}

fn laguerre_moments<T: Real>(
    spec: &SpectralModel<T>,
    beta: T,
    order: usize,
    with_cross: bool,
    opts: QuadratureOptions<T>,
) -> LaguerreMoments<T> {
    let pi = T::PI();
    let two = T::two();
    let scale = two / pi;
    let cross_scale = (two * beta).sqrt() / pi;
    let dim = if with_cross { 2 * order } else { order };
    let tol = opts.abs_tol / scale.max(cross_scale);
    let q = integrate(
        |theta: T| {
            let omega = beta * theta.tan();
            let c = spec.covariance_spectrum(omega);
            let mut out = Vec::with_capacity(dim);
            for d in 0..order {
                out.push((two * T::from_usize_lossy(d) * theta).cos() * c);
            }
            if with_cross {
                let phi = spec.kernel.eval(omega).conj();
                let sec = T::one() / theta.cos();
                for j in 0..order {
                    let angle = -(two * T::from_usize_lossy(j) + T::one()) * theta;
                    let rot = Complex::new(angle.cos(), angle.sin());
                    out.push((rot * phi).re * sec * c);
                }
            }
            out
        },
        T::zero(),
        pi / two,
        dim,
        QuadratureOptions { abs_tol: tol, ..opts },
    );
    let toeplitz = q.value[..order].iter().map(|&v| v * scale).collect();
    let cross = with_cross.then(|| q.value[order..].iter().map(|&v| v * cross_scale).collect());
    LaguerreMoments {
        toeplitz,
        cross,
        error: q.error * scale.max(cross_scale),
    }
}

fn toeplitz<T: Real>(tau: &[T], order: usize) -> Array2<T> {
    Array2::from_shape_fn((order, order), |(i, j)| tau[i.abs_diff(j)])
}

fn congruence<T: Real>(basis: &KernelBasis<T>, r_h: Array2<T>) -> Result<Array2<T>> {
    match basis.family() {
        BasisFamily::Laguerre => Ok(r_h),
        BasisFamily::Erlang => {
            let l = erlang_transform(basis.order(), basis.beta())?.l;
            Ok(linalg::symmetrize(l.dot(&r_h).dot(&l.t()).view()))
        }
    }
}

fn map_cross<T: Real>(basis: &KernelBasis<T>, c_h: Array1<T>) -> Result<Array1<T>> {
    match basis.family() {
        BasisFamily::Laguerre => Ok(c_h),
        BasisFamily::Erlang => Ok(erlang_transform(basis.order(), basis.beta())?.l.dot(&c_h)),
    }
}

pub fn spectral_gram_with_options<T: Real>(
    spec: &SpectralModel<T>,
    basis: &KernelBasis<T>,
    opts: QuadratureOptions<T>,
) -> Result<SpectralIntegral<Array2<T>, T>> {
    let m = laguerre_moments(spec, basis.beta(), basis.order(), false, opts);
    let value = congruence(basis, toeplitz(&m.toeplitz, basis.order()))?;
    Ok(SpectralIntegral { value, error: m.error })
}

/// Asymptotic Gram matrix `R*` at the default tolerance `1e-9`.
pub fn spectral_gram<T: Real>(spec: &SpectralModel<T>, basis: &KernelBasis<T>) -> Result<Array2<T>> {
    Ok(spectral_gram_with_options(spec, basis, QuadratureOptions::default())?.value)
}

pub fn spectral_cross_with_options<T: Real>(
    spec: &SpectralModel<T>,
    basis: &KernelBasis<T>,
    opts: QuadratureOptions<T>,
) -> Result<SpectralIntegral<Array1<T>, T>> {
    let m = laguerre_moments(spec, basis.beta(), basis.order(), true, opts);
    let value = map_cross(basis, Array1::from(m.cross.expect("cross moments requested")))?;
    Ok(SpectralIntegral { value, error: m.error })
}

/// Asymptotic cross-covariance `R*_o`, the limit of `ŝ_T`.
pub fn spectral_cross<T: Real>(spec: &SpectralModel<T>, basis: &KernelBasis<T>) -> Result<Array1<T>> {
    Ok(spectral_cross_with_options(spec, basis, QuadratureOptions::default())?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticResult<T> {
    pub r_star: Array2<T>,
    pub r_star_cross: Array1<T>,
    pub alpha_star: Array1<T>,
    pub c_star: T,
    pub gamma_star: T,
    pub eig_min: T,
    pub eig_max: T,
    pub cond: T,
    pub lambda: T,
    pub basis: KernelBasis<T>,
    pub quadrature_error: T,
}

/// Pseudo-true parameters `α* = R*⁻¹ R*_o`, `c* = Λ(1 − Γ*)`.
pub fn pseudo_true<T: Real>(spec: &SpectralModel<T>, basis: &KernelBasis<T>) -> Result<AsymptoticResult<T>> {
    pseudo_true_with_options(spec, basis, QuadratureOptions::default())
}

pub fn pseudo_true_with_options<T: Real>(
    spec: &SpectralModel<T>,
    basis: &KernelBasis<T>,
    opts: QuadratureOptions<T>,
) -> Result<AsymptoticResult<T>> {
    let p = basis.order();
    let m = laguerre_moments(spec, basis.beta(), p, true, opts);
    let r_star = congruence(basis, toeplitz(&m.toeplitz, p))?;
    let r_star_cross = map_cross(basis, Array1::from(m.cross.expect("cross moments requested")))?;
    let eig = linalg::symmetric_eigenvalues(r_star.view());
    let (eig_min, eig_max) = (eig[0], eig[p - 1]);
    let degenerate = || HawkesError::DegenerateGram {
        min_eigenvalue: eig_min.to_f64_lossy(),
        max_eigenvalue: eig_max.to_f64_lossy(),
    };
    if !(eig_min > T::zero()) {
        return Err(degenerate());
    }
    let alpha_star = linalg::solve_spd(r_star.view(), r_star_cross.view()).ok_or_else(degenerate)?;
    let gamma_star = basis.mass().dot(&alpha_star);
    let lambda = spec.lambda();
    Ok(AsymptoticResult {
        c_star: lambda * (T::one() - gamma_star),
        r_star,
        r_star_cross,
        alpha_star,
        gamma_star,
        eig_min,
        eig_max,
        cond: eig_max / eig_min,
        lambda,
        basis: *basis,
        quadrature_error: m.error,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopCheck<T> {
    /// Eigenvalues of `A + B α*ᵀ`.
    pub eigenvalues: Vec<Complex<T>>,
    pub is_hurwitz: bool,
}

/// Stability of the closed loop `A_cl = A + B α*ᵀ`.
pub fn closed_loop_check<T: Real>(
    result: &AsymptoticResult<T>,
    model: &StateSpaceModel<T>,
) -> Result<ClosedLoopCheck<T>> {
    let a_cl = closed_loop_matrix(result, model)?;
    let eigenvalues = linalg::eigenvalues(a_cl.view())?;
    let is_hurwitz = eigenvalues.iter().all(|z| z.re < T::zero());
    Ok(ClosedLoopCheck {
        eigenvalues,
        is_hurwitz,
    })
}

fn closed_loop_matrix<T: Real>(result: &AsymptoticResult<T>, model: &StateSpaceModel<T>) -> Result<Array2<T>> {
    let p = model.order();
    if result.alpha_star.len() != p {
        return Err(HawkesError::InvalidInput(format!(
            "pseudo-true weights of length {} for a model of order {p}",
            result.alpha_star.len()
        )));
    }
    let b = model.b();
    let feedback = Array2::from_shape_fn((p, p), |(i, j)| b[i] * result.alpha_star[j]);
    Ok(&model.a() + &feedback)
}

/// `‖A_cl R* + R* A_clᵀ + Λ BBᵀ‖_F`, zero in exact arithmetic.
pub fn closed_loop_lyapunov_residual<T: Real>(result: &AsymptoticResult<T>, model: &StateSpaceModel<T>) -> Result<T> {
    let a_cl = closed_loop_matrix(result, model)?;
    let b = model.b();
    let p = model.order();
    let bbt = Array2::from_shape_fn((p, p), |(i, j)| b[i] * b[j] * result.lambda);
    let res = a_cl.dot(&result.r_star) + result.r_star.dot(&a_cl.t()) + bbt;
    Ok(linalg::frobenius_norm(res.view()))
}

/// One row of the Laguerre-versus-Erlang conditioning comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningRow<T> {
    pub order: usize,
    pub cond_laguerre: T,
    /// `None` when `R*_g` is numerically indefinite or its condition number
    /// exceeds [`MAX_REPORTABLE_CONDITION`].
    pub cond_erlang: Option<T>,
    /// `((1 + Γ)/(1 − Γ))²`, an upper bound on `cond_laguerre`.
    pub bound_laguerre: T,
    /// `4^{P−1} ((1 − Γ)/(1 + Γ))²`, a lower bound on `cond_erlang`.
    pub bound_erlang: T,
    pub sigma_min_sq_l: T,
    pub sigma_max_sq_l: T,
    pub eig_min_laguerre: T,
    pub eig_max_laguerre: T,
}

/// Conditioning of `R*_h` and `R*_g = L R*_h Lᵀ` across model orders, with
/// the corresponding analytic bounds. Orders are processed in parallel; the
/// output follows the order of `orders`.
pub fn conditioning_study<T: Real>(
    spec: &SpectralModel<T>,
    beta: T,
    orders: &[usize],
) -> Result<Vec<ConditioningRow<T>>> {
    conditioning_study_with_options(spec, beta, orders, QuadratureOptions::default())
}

pub fn conditioning_study_with_options<T: Real>(
    spec: &SpectralModel<T>,
    beta: T,
    orders: &[usize],
    opts: QuadratureOptions<T>,
) -> Result<Vec<ConditioningRow<T>>> {
    if orders.contains(&0) {
        return Err(HawkesError::param("P", "model orders must be at least 1"));
    }
    KernelBasis::laguerre(beta, 1)?;
    let Some(&max_order) = orders.iter().max() else {
        return Ok(Vec::new());
    };
    let moments = laguerre_moments(spec, beta, max_order, false, opts);
    let gamma = spec.gamma();
    let one = T::one();
    let bound_laguerre = ((one + gamma) / (one - gamma)).powi(2);
    orders
        .par_iter()
        .map(|&p| {
            let r_h = toeplitz(&moments.toeplitz[..p], p);
            let eig_h = linalg::symmetric_eigenvalues(r_h.view());
            let l = erlang_transform(p, beta)?.l;
            let r_g = linalg::symmetrize(l.dot(&r_h).dot(&l.t()).view());
            let eig_g = linalg::symmetric_eigenvalues(r_g.view());
            let cond_g = eig_g[p - 1] / eig_g[0];
            let cond_erlang = (eig_g[0] > T::zero() && cond_g <= T::lit(MAX_REPORTABLE_CONDITION)).then_some(cond_g);
            let sv = linalg::singular_values(l.view());
            let four_pow = T::lit(4.0).powi(p as i32 - 1);
            Ok(ConditioningRow {
                order: p,
                cond_laguerre: eig_h[p - 1] / eig_h[0],
                cond_erlang,
                bound_laguerre,
                bound_erlang: four_pow / bound_laguerre,
                sigma_min_sq_l: sv[p - 1] * sv[p - 1],
                sigma_max_sq_l: sv[0] * sv[0],
                eig_min_laguerre: eig_h[0],
                eig_max_laguerre: eig_h[p - 1],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn exp_spec() -> SpectralModel<f64> {
        SpectralModel::exponential(0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn poisson_gram_is_scaled_identity() {
        let spec = SpectralModel::exponential(0.0, 1.0, 2.5).unwrap();
        for p in [1, 4, 15] {
            let r = spectral_gram(&spec, &KernelBasis::laguerre(0.7, p).unwrap()).unwrap();
            for i in 0..p {
                for j in 0..p {
                    let e: f64 = if i == j { 2.5 } else { 0.0 };
                    assert!((r[[i, j]] - e).abs() < 1e-8);
                }
            }
            let c = spectral_cross(&spec, &KernelBasis::laguerre(0.7, p).unwrap()).unwrap();
            assert!(c.iter().all(|v: &f64| v.abs() < 1e-12));
        }
    }

    #[test]
    fn gram_matches_unmapped_frequency_integral() {
        // Independent route: integrate h̄(iω) C̄ h̄(iω)^H over ω directly,
        // split at ω = 1 and mapped with ω = 1/u on the tail.
        let spec = exp_spec();
        let basis = KernelBasis::laguerre(1.3, 4).unwrap();
        let r = spectral_gram(&spec, &basis).unwrap();
        let entries = |omega: f64| -> Vec<f64> {
            let hb = basis.laplace(omega);
            let c = spec.covariance_spectrum(omega);
            let mut out = Vec::new();
            for i in 0..4 {
                for j in 0..4 {
                    out.push((hb[i] * hb[j].conj()).re * c / std::f64::consts::PI);
                }
            }
            out
        };
        let opts = QuadratureOptions {
            abs_tol: 1e-11,
            max_intervals: 20_000,
        };
        let head = integrate(entries, 0.0, 1.0, 16, opts);
        let tail = integrate(
            |u: f64| entries(1.0 / u).into_iter().map(|v| v / (u * u)).collect(),
            1e-12,
            1.0,
            16,
            opts,
        );
        for i in 0..4 {
            for j in 0..4 {
                let k = i * 4 + j;
                assert!((head.value[k] + tail.value[k] - r[[i, j]]).abs() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn erlang_gram_is_congruent() {
        let spec = exp_spec();
        for p in 1..=8 {
            let lag = KernelBasis::laguerre(1.0, p).unwrap();
            let rh = spectral_gram(&spec, &lag).unwrap();
            let rg = spectral_gram(&spec, &lag.with_family(BasisFamily::Erlang)).unwrap();
            let l = erlang_transform(p, 1.0).unwrap().l;
            let mapped = l.dot(&rh).dot(&l.t());
            let rel = linalg::frobenius_norm((&mapped - &rg).view()) / linalg::frobenius_norm(rg.view());
            assert!(rel < 1e-8);
        }
    }

    #[test]
    fn laguerre_eigenvalues_within_bounds() {
        let spec = exp_spec();
        for p in 1..=15 {
            let r = spectral_gram(&spec, &KernelBasis::laguerre(1.0, p).unwrap()).unwrap();
            let eig = linalg::symmetric_eigenvalues(r.view());
            assert!(eig[0] >= 4.0 / 9.0 && eig[p - 1] <= 4.0, "P={p}: {eig}");
        }
    }

    #[test]
    fn in_class_cross_is_gram_column() {
        let spec = exp_spec();
        let basis = KernelBasis::laguerre(1.0, 6).unwrap();
        let r = spectral_gram(&spec, &basis).unwrap();
        let c = spectral_cross(&spec, &basis).unwrap();
        let alpha0 = 0.5 * 0.5f64.sqrt();
        for j in 0..6 {
            assert!((c[j] - alpha0 * r[[j, 0]]).abs() < 1e-7);
        }
    }

    #[test]
    fn pseudo_true_recovers_in_class_truth() {
        let spec = SpectralModel::from_background(KernelSpectrum::Exponential { gamma: 0.5, beta: 1.0 }, 0.5).unwrap();
        let res = pseudo_true(&spec, &KernelBasis::laguerre(1.0, 3).unwrap()).unwrap();
        assert_relative_eq!(res.alpha_star[0], 0.5 * 0.5f64.sqrt(), epsilon = 1e-6);
        assert!(res.alpha_star[1].abs() < 1e-6 && res.alpha_star[2].abs() < 1e-6);
        assert_relative_eq!(res.c_star, 0.5, epsilon = 1e-6);
        assert_relative_eq!(res.gamma_star, 0.5, epsilon = 1e-6);

        // the basis kernel with different weights is also in class
        let basis = KernelBasis::laguerre(2.0, 3).unwrap();
        let alpha = array![0.3, 0.15, 0.05];
        let spec = SpectralModel::from_background(
            KernelSpectrum::Basis {
                alpha: alpha.clone(),
                basis,
            },
            1.0,
        )
        .unwrap();
        let res = pseudo_true(&spec, &KernelBasis::laguerre(2.0, 5).unwrap()).unwrap();
        for j in 0..5 {
            let e: f64 = if j < 3 { alpha[j] } else { 0.0 };
            assert!((res.alpha_star[j] - e).abs() < 1e-6);
        }
    }

    #[test]
    fn pseudo_true_poisson() {
        let spec = SpectralModel::exponential(0.0, 1.0, 3.0).unwrap();
        let res = pseudo_true(&spec, &KernelBasis::laguerre(1.0, 4).unwrap()).unwrap();
        assert!(res.alpha_star.iter().all(|v: &f64| v.abs() < 1e-12));
        assert_relative_eq!(res.c_star, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_class_projection_improves_with_order() {
        // φ(t) = 0.1 e^{-0.4t} + 0.6 e^{-3t} is outside every finite Laguerre span at β = 1.
        let terms = vec![(0.1, 0.4), (0.6, 3.0)];
        let kernel = KernelSpectrum::ExponentialMixture(terms);
        let gamma = kernel.branching_ratio();
        assert_relative_eq!(gamma, 0.45, epsilon = 1e-15);
        let spec = SpectralModel::from_background(kernel.clone(), 0.5).unwrap();
        let mut last_err = f64::INFINITY;
        for p in 1..=8 {
            let basis = KernelBasis::laguerre(1.0, p).unwrap();
            let res = pseudo_true(&spec, &basis).unwrap();
            assert!(res.gamma_star >= 0.0 && res.gamma_star < 1.0);
            let q = crate::quadrature::integrate_scalar(
                |t: f64| (basis.eval(t).dot(&res.alpha_star) - kernel.eval_time(t)).powi(2),
                0.0,
                80.0,
                QuadratureOptions {
                    abs_tol: 1e-13,
                    max_intervals: 10_000,
                },
            );
            assert!(
                q.value[0] < last_err,
                "P={p}: L2 error {} not below {last_err}",
                q.value[0]
            );
            last_err = q.value[0];
        }
    }

    #[test]
    fn conditioning_study_respects_bounds() {
        let spec = exp_spec();
        let orders: Vec<usize> = (1..=12).collect();
        let rows = conditioning_study(&spec, 1.0, &orders).unwrap();
        assert_eq!(rows.iter().map(|r| r.order).collect::<Vec<_>>(), orders);
        for row in &rows {
            assert_relative_eq!(row.bound_laguerre, 9.0, epsilon = 1e-12);
            assert!(row.cond_laguerre <= 9.0);
            if let Some(c) = row.cond_erlang {
                assert!(c >= row.bound_erlang, "P={}: {c} < {}", row.order, row.bound_erlang);
            }
            let p = row.order as i32;
            assert!(row.sigma_min_sq_l <= 0.5 * 4f64.powi(-(p - 1)) * (1.0 + 1e-12));
            assert!(row.sigma_max_sq_l >= 0.5 * (1.0 - 1e-12));
        }
        let p6 = &rows[5];
        assert_relative_eq!(p6.bound_erlang, 1024.0 / 9.0, epsilon = 1e-9);
        assert!(p6.cond_erlang.unwrap() >= 113.7);
    }

    #[test]
    fn sigma_bound_example() {
        let l = erlang_transform(5, 2.0).unwrap().l;
        let sv = linalg::singular_values(l.view());
        assert!(sv[4] * sv[4] <= 1.0 / 256.0);
    }

    #[test]
    fn closed_loop_is_stable() {
        let spec = exp_spec();
        let basis = KernelBasis::laguerre(1.0, 3).unwrap();
        let model = StateSpaceModel::new(basis);
        let res = pseudo_true(&spec, &basis).unwrap();
        let check = closed_loop_check(&res, &model).unwrap();
        assert!(check.is_hurwitz, "{:?}", check.eigenvalues);
        assert!(closed_loop_lyapunov_residual(&res, &model).unwrap() < 1e-6);

        let poisson = SpectralModel::exponential(0.0, 1.0, 1.0).unwrap();
        let res = pseudo_true(&poisson, &basis).unwrap();
        let check = closed_loop_check(&res, &model).unwrap();
        for z in &check.eigenvalues {
            // a 3x3 Jordan block perturbs eigenvalues by O(ε^{1/3})
            assert!((z.re + 1.0).abs() < 1e-4 && z.im.abs() < 1e-4, "{z}");
        }
    }

    #[test]
    fn tighter_tolerance_changes_less_than_reported_error() {
        let spec = exp_spec();
        let basis = KernelBasis::laguerre(1.0, 6).unwrap();
        let coarse = spectral_gram_with_options(
            &spec,
            &basis,
            QuadratureOptions {
                abs_tol: 1e-6,
                max_intervals: 4000,
            },
        )
        .unwrap();
        let fine = spectral_gram_with_options(
            &spec,
            &basis,
            QuadratureOptions {
                abs_tol: 5e-7,
                max_intervals: 4000,
            },
        )
        .unwrap();
        for (a, b) in coarse.value.iter().zip(fine.value.iter()) {
            assert!((a - b).abs() <= coarse.error);
        }
    }

    #[test]
    fn rejects_nonstationary() {
        assert!(SpectralModel::exponential(1.0, 1.0, 1.0).is_err());
        assert!(SpectralModel::exponential(0.5, 1.0, 0.0).is_err());
        assert!(SpectralModel::new(KernelSpectrum::ExponentialMixture(vec![(0.5, -1.0)]), 1.0).is_err());
    }
}
