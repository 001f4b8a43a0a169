//! Centered least-squares identification of the excitation kernel.
//!
//! The memory regressor `χ̃(t) = Σ_{t_r < t} q(t − t_r)` obeys
//! `dχ̃ = A χ̃ dt + B dÑ`, so it is carried exactly from event to event by the
//! matrix exponential. Time averages follow from integrating the same
//! equation, and the empirical Gram matrix is the solution of a Lyapunov
//! equation; no time grid is ever used.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::Serialize;

use crate::basis::KernelBasis;
use crate::error::{HawkesError, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::statespace::StateSpaceModel;
use crate::stream::EventStream;

/// Smallest admissible eigenvalue ratio for a Gram matrix to count as
/// positive definite.
pub const PD_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Condition numbers beyond this trigger an ill-conditioning warning.
pub const ILL_CONDITIONED_WARNING: f64 = 1e10;

/// Regressor values at the event times and the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorTrajectory<T> {
    /// `χ̃(t_r)` just before each event (row `r`); the first row is zero.
    pub chi_pre: Array2<T>,
    /// `χ̃(t_r+) = χ̃(t_r) + B`.
    pub chi_post: Array2<T>,
    /// `χ̃(T)`.
    pub chi_t: Array1<T>,
    /// `χ̄_T = (1/T) ∫₀ᵀ χ̃(t) dt`.
    pub chi_bar: Array1<T>,
    /// `Λ̂_T = n / T`.
    pub lambda_hat: T,
    pub horizon: T,
}

impl<T: Real> RegressorTrajectory<T> {
    pub fn n_events(&self) -> usize {
        self.chi_pre.nrows()
    }
}

/// Everything the CLS solve needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem<T> {
    pub r_hat: Array2<T>,
    pub s_hat: Array1<T>,
    pub lambda_hat: T,
    pub chi_bar: Array1<T>,
    pub d_t: Array2<T>,
    /// Extremal eigenvalues of `r_hat`.
    pub eig_min: T,
    pub eig_max: T,
    pub n_events: usize,
    pub horizon: T,
}

impl<T: Real> GramSystem<T> {
    /// `J(α) = ½ αᵀ R̂ α − αᵀ ŝ`.
    pub fn objective(&self, alpha: ArrayView1<'_, T>) -> T {
        T::half() * alpha.dot(&self.r_hat.dot(&alpha)) - alpha.dot(&self.s_hat)
    }

    pub fn condition_number(&self) -> T {
        self.eig_max / self.eig_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    pub condition_number: T,
    pub n_events: usize,
    pub horizon: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HawkesEstimate<T> {
    pub alpha_hat: Array1<T>,
    pub c_hat: T,
    pub gamma_hat: T,
    pub lambda_hat: T,
    pub basis: KernelBasis<T>,
    pub diagnostics: Diagnostics<T>,
}

/// Conditions worth reporting about an estimate. None of them invalidates it.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimateWarning<T> {
    /// `Γ̂ ≥ 1`: the fitted process is not stationary.
    NonStationary {
        gamma_hat: T,
    },
    /// The fitted kernel takes a negative value.
    NegativeKernel {
        t: T,
        value: T,
    },
    NonPositiveBackground {
        c_hat: T,
    },
    IllConditioned {
        condition_number: T,
    },
}

impl<T: Real> std::fmt::Display for EstimateWarning<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimateWarning::NonStationary { gamma_hat } => {
                write!(f, "estimated branching ratio {gamma_hat} >= 1 (non-stationary fit)")
            }
            EstimateWarning::NegativeKernel { t, value } => {
                write!(f, "fitted kernel is negative ({value:e}) at t = {t}")
            }
            EstimateWarning::NonPositiveBackground { c_hat } => {
                write!(f, "estimated background rate {c_hat} is not positive")
            }
            EstimateWarning::IllConditioned { condition_number } => {
                write!(
                    f,
                    "Gram matrix is ill-conditioned (condition number {condition_number:e})"
                )
            }
        }
    }
}

impl<T: Real> HawkesEstimate<T> {
    /// `φ̂(t) = α̂ᵀ q(t)`.
    pub fn fitted_kernel(&self, t: T) -> T {
        self.basis.eval(t).dot(&self.alpha_hat)
    }

    pub fn warnings(&self) -> Vec<EstimateWarning<T>> {
        let mut out = Vec::new();
        if self.gamma_hat >= T::one() {
            out.push(EstimateWarning::NonStationary {
                gamma_hat: self.gamma_hat,
            });
        }
        if self.c_hat <= T::zero() {
            out.push(EstimateWarning::NonPositiveBackground { c_hat: self.c_hat });
        }
        let step = T::lit(1e-2) / self.basis.beta();
        let mut worst: Option<(T, T)> = None;
        for k in 0..=5000usize {
            let t = step * T::from_usize_lossy(k);
            let v = self.fitted_kernel(t);
            if v < T::zero() && worst.is_none_or(|(_, w)| v < w) {
                worst = Some((t, v));
            }
        }
        if let Some((t, value)) = worst {
            out.push(EstimateWarning::NegativeKernel { t, value });
        }
        if self.diagnostics.condition_number > T::lit(ILL_CONDITIONED_WARNING) {
            out.push(EstimateWarning::IllConditioned {
                condition_number: self.diagnostics.condition_number,
            });
        }
        out
    }
}

/// Runs the regressor recursion over the stream.
pub fn propagate_regressors<T: Real>(
    stream: &EventStream<T>,
    model: &StateSpaceModel<T>,
) -> Result<RegressorTrajectory<T>> {
    let n = stream.len();
    if n == 0 {
        return Err(HawkesError::InvalidInput(
            "the event stream is empty; at least one event is required".into(),
        ));
    }
    let horizon = stream.horizon();
    let times = stream.times();
    if times[n - 1] > horizon {
        return Err(HawkesError::InvalidInput(
            "events beyond the observation horizon".into(),
        ));
    }
    let p = model.order();
    let b = model.b();
    let mut chi_pre = Array2::<T>::zeros((n, p));
    let mut chi_post = Array2::<T>::zeros((n, p));
    let mut state = Array1::<T>::zeros(p);
    let mut prev = times[0];
    for (r, &t) in times.iter().enumerate() {
        if r > 0 {
            state = model.propagate(state.view(), t - prev);
        }
        chi_pre.row_mut(r).assign(&state);
        state += &b;
        chi_post.row_mut(r).assign(&state);
        prev = t;
    }
    let chi_t = model.propagate(state.view(), horizon - prev);
    let nf = T::from_usize_lossy(n);
    let drift = &chi_t - &(&b * nf);
    let chi_bar = model.solve_a(drift.view()) / horizon;
    Ok(RegressorTrajectory {
        chi_pre,
        chi_post,
        chi_t,
        chi_bar,
        lambda_hat: nf / horizon,
        horizon,
    })
}

/// `ŝ_T = (1/T) Σ_r χ̃(t_r) − Λ̂_T χ̄_T`, summed over pre-jump regressors.
pub fn empirical_cross_covariance<T: Real>(traj: &RegressorTrajectory<T>) -> Array1<T> {
    let sum = traj.chi_pre.sum_axis(Axis(0));
    sum / traj.horizon - &traj.chi_bar * traj.lambda_hat
}

fn outer<T: Real>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> Array2<T> {
    let col = a.insert_axis(Axis(1));
    let row = b.insert_axis(Axis(0));
    col.dot(&row)
}

/// Solves for `R̂_T` from
/// `A R̂ + R̂ Aᵀ + Λ̂ BBᵀ + B ŝᵀ + ŝ Bᵀ + D_T = 0`.
pub fn empirical_gram<T: Real>(
    traj: &RegressorTrajectory<T>,
    model: &StateSpaceModel<T>,
    s_hat: ArrayView1<'_, T>,
) -> Result<GramSystem<T>> {
    let p = model.order();
    if s_hat.len() != p || traj.chi_bar.len() != p {
        return Err(HawkesError::InvalidInput(format!(
            "dimension mismatch: model order {p}, ŝ of length {}, χ̄ of length {}",
            s_hat.len(),
            traj.chi_bar.len()
        )));
    }
    let inv_t = T::one() / traj.horizon;
    let b = model.b();
    let tail = &traj.chi_t - &traj.chi_bar;
    let d_t = (outer(traj.chi_bar.view(), traj.chi_bar.view()) - outer(tail.view(), tail.view())) * inv_t;
    let q = outer(b, b) * traj.lambda_hat + outer(b, s_hat) + outer(s_hat, b) + &d_t;
    let q = linalg::symmetrize(q.view());
    let r_hat = model.solve_lyapunov(q.view())?;
    let eig = linalg::symmetric_eigenvalues(r_hat.view());
    let eig_min = eig[0];
    let eig_max = eig[p - 1];
    if !(eig_min > T::lit(PD_RELATIVE_TOLERANCE) * eig_max.abs()) {
        return Err(HawkesError::DegenerateGram {
            min_eigenvalue: eig_min.to_f64_lossy(),
            max_eigenvalue: eig_max.to_f64_lossy(),
        });
    }
    Ok(GramSystem {
        r_hat,
        s_hat: s_hat.to_owned(),
        lambda_hat: traj.lambda_hat,
        chi_bar: traj.chi_bar.clone(),
        d_t,
        eig_min,
        eig_max,
        n_events: traj.n_events(),
        horizon: traj.horizon,
    })
}

/// `α̂ = R̂⁻¹ ŝ` by Cholesky, then `ĉ = Λ̂ − χ̄ᵀ α̂` and `Γ̂ = massᵀ α̂`.
pub fn cls_estimate<T: Real>(gram: &GramSystem<T>, basis: &KernelBasis<T>) -> Result<HawkesEstimate<T>> {
    if gram.s_hat.len() != basis.order() {
        return Err(HawkesError::InvalidInput(format!(
            "Gram system of order {} does not match basis of order {}",
            gram.s_hat.len(),
            basis.order()
        )));
    }
    let alpha_hat = linalg::solve_spd(gram.r_hat.view(), gram.s_hat.view()).ok_or(HawkesError::DegenerateGram {
        min_eigenvalue: gram.eig_min.to_f64_lossy(),
        max_eigenvalue: gram.eig_max.to_f64_lossy(),
    })?;
    let c_hat = gram.lambda_hat - gram.chi_bar.dot(&alpha_hat);
    let gamma_hat = basis.mass().dot(&alpha_hat);
    Ok(HawkesEstimate {
        alpha_hat,
        c_hat,
        gamma_hat,
        lambda_hat: gram.lambda_hat,
        basis: *basis,
        diagnostics: Diagnostics {
            condition_number: gram.condition_number(),
            n_events: gram.n_events,
            horizon: gram.horizon,
        },
    })
}

/// Full pipeline: realization, regressors, `ŝ`, `R̂`, CLS solve.
pub fn estimate_from_stream<T: Real>(stream: &EventStream<T>, basis: &KernelBasis<T>) -> Result<HawkesEstimate<T>> {
    let model = StateSpaceModel::new(*basis);
    let traj = propagate_regressors(stream, &model)?;
    let s_hat = empirical_cross_covariance(&traj);
    let gram = empirical_gram(&traj, &model, s_hat.view())?;
    cls_estimate(&gram, basis)
}

/// Intermediate quantities of [`estimate_from_stream`], for diagnostics.
pub fn gram_from_stream<T: Real>(stream: &EventStream<T>, basis: &KernelBasis<T>) -> Result<GramSystem<T>> {
    let model = StateSpaceModel::new(*basis);
    let traj = propagate_regressors(stream, &model)?;
    let s_hat = empirical_cross_covariance(&traj);
    empirical_gram(&traj, &model, s_hat.view())
}
