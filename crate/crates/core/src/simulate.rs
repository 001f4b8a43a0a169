//! Reproducible stationary Hawkes simulation by thinning.
//!
//! Two kernel classes are supported: the exponential kernel
//! `φ(t) = Γ β e^{-βt}` and basis expansions `φ(t) = αᵀ q(t)` whose
//! coefficients may be sign-indefinite as long as `φ` itself is nonnegative.
//! Every stream starts from an empty history at `t = 0`.

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::basis::KernelBasis;
use crate::error::{HawkesError, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::statespace::StateSpaceModel;
use crate::stream::EventStream;

/// Refuse simulations expected to produce more events than this.
pub const MAX_EXPECTED_EVENTS: f64 = 1e8;

/// Kernel values below this are treated as rounding noise in the
/// nonnegativity check.
const NEGATIVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum TrueKernel<T> {
    /// `φ(t) = Γ β e^{-βt}`.
    Exponential { gamma: T, beta: T },
    /// `φ(t) = αᵀ q(t)`.
    Basis { alpha: Array1<T>, basis: KernelBasis<T> },
}

impl<T: Real> TrueKernel<T> {
    /// `Γ = ∫₀^∞ φ(t) dt`.
    pub fn branching_ratio(&self) -> T {
        match self {
            TrueKernel::Exponential { gamma, .. } => *gamma,
            TrueKernel::Basis { alpha, basis } => basis.mass().dot(alpha),
        }
    }

    pub fn eval(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        match self {
            TrueKernel::Exponential { gamma, beta } => *gamma * *beta * (-*beta * t).exp(),
            TrueKernel::Basis { alpha, basis } => basis.eval(t).dot(alpha),
        }
    }
}

/// Background rate plus excitation kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesModel<T> {
    background: T,
    kernel: TrueKernel<T>,
}

impl<T: Real> HawkesModel<T> {
    pub fn new(background: T, kernel: TrueKernel<T>) -> Result<Self> {
        if !(background > T::zero()) || !background.is_finite() {
            return Err(HawkesError::param(
                "c0",
                format!("background rate must be > 0, got {background}"),
            ));
        }
        match &kernel {
            TrueKernel::Exponential { gamma, beta } => {
                if !(*beta > T::zero()) || !beta.is_finite() {
                    return Err(HawkesError::param(
                        "beta",
                        format!("decay rate must be > 0, got {beta}"),
                    ));
                }
                if !(*gamma >= T::zero()) {
                    return Err(HawkesError::param(
                        "gamma",
                        format!("branching ratio must be >= 0, got {gamma}"),
                    ));
                }
            }
            TrueKernel::Basis { alpha, basis } => {
                if alpha.len() != basis.order() {
                    return Err(HawkesError::param(
                        "alpha",
                        format!("{} weights given for a basis of order {}", alpha.len(), basis.order()),
                    ));
                }
                check_nonnegative(alpha.view(), basis)?;
            }
        }
        let gamma = kernel.branching_ratio();
        if !(gamma < T::one()) {
            return Err(HawkesError::param(
                "gamma",
                format!("stationarity requires branching ratio Γ < 1, got {gamma}"),
            ));
        }
        Ok(Self { background, kernel })
    }

    pub fn exponential(c0: T, gamma: T, beta: T) -> Result<Self> {
        Self::new(c0, TrueKernel::Exponential { gamma, beta })
    }

    pub fn with_basis(c: T, alpha: Array1<T>, basis: KernelBasis<T>) -> Result<Self> {
        Self::new(c, TrueKernel::Basis { alpha, basis })
    }

    pub fn background(&self) -> T {
        self.background
    }

    pub fn kernel(&self) -> &TrueKernel<T> {
        &self.kernel
    }

    pub fn branching_ratio(&self) -> T {
        self.kernel.branching_ratio()
    }

    /// `Λ = c₀ / (1 − Γ)`.
    pub fn stationary_rate(&self) -> T {
        self.background / (T::one() - self.branching_ratio())
    }

    pub fn simulate(&self, horizon: T, seed: u64) -> Result<EventStream<T>> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(HawkesError::param(
                "T",
                format!("horizon must be finite and > 0, got {horizon}"),
            ));
        }
        let expected = (self.stationary_rate() * horizon).to_f64_lossy();
        if expected > MAX_EXPECTED_EVENTS {
            return Err(HawkesError::TooManyEvents {
                expected,
                limit: MAX_EXPECTED_EVENTS,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let times = match &self.kernel {
            TrueKernel::Exponential { gamma, beta } => {
                thin_exponential(self.background, *gamma, *beta, horizon, &mut rng)
            }
            TrueKernel::Basis { alpha, basis } => thin_basis(self.background, alpha.view(), basis, horizon, &mut rng),
        };
        EventStream::new(times, horizon, seed)
    }

    /// Compensator increments `∫_{t_{r-1}}^{t_r} λ(u) du`, `t_0 = 0`, under
    /// this model with an empty pre-sample history. For the true model these
    /// are i.i.d. unit exponentials.
    pub fn compensator_increments(&self, stream: &EventStream<T>) -> Vec<T> {
        let mut out = Vec::with_capacity(stream.len());
        let mut prev = T::zero();
        match &self.kernel {
            TrueKernel::Exponential { gamma, beta } => {
                // memory Σ Γβ e^{-β(t - t_r)} just after the previous event
                let mut memory = T::zero();
                for &t in stream.times() {
                    let dt = t - prev;
                    let decay = (-*beta * dt).exp();
                    out.push(self.background * dt + memory * (T::one() - decay) / *beta);
                    memory = memory * decay + *gamma * *beta;
                    prev = t;
                }
            }
            TrueKernel::Basis { alpha, basis } => {
                let model = StateSpaceModel::new(*basis);
                let mut chi = Array1::<T>::zeros(basis.order());
                for &t in stream.times() {
                    let dt = t - prev;
                    let integral = model.integrate_propagator(chi.view(), dt);
                    out.push(self.background * dt + alpha.dot(&integral));
                    chi = model.propagate(chi.view(), dt) + model.b();
                    prev = t;
                }
            }
        }
        out
    }
}

fn check_nonnegative<T: Real>(alpha: ArrayView1<'_, T>, basis: &KernelBasis<T>) -> Result<()> {
    let beta = basis.beta();
    let step = T::lit(1e-3) / beta;
    let steps = 50_000usize;
    let slack = T::lit(NEGATIVITY_SLACK);
    for k in 0..=steps {
        let t = step * T::from_usize_lossy(k);
        let v = basis.eval(t).dot(&alpha);
        if v < -slack {
            return Err(HawkesError::param(
                "alpha",
                format!("kernel αᵀq(t) is negative ({v:e}) at t = {t}; the intensity must stay nonnegative"),
            ));
        }
    }
    Ok(())
}

fn exp1<T: Real>(rng: &mut ChaCha8Rng) -> T {
    let e: f64 = rng.sample(Exp1);
    T::lit(e)
}

fn uniform<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.random::<f64>())
}

/// Ogata thinning for the exponential kernel. Between events the intensity
/// only decays, so its value at the current time dominates the future.
fn thin_exponential<T: Real>(c0: T, gamma: T, beta: T, horizon: T, rng: &mut ChaCha8Rng) -> Vec<T> {
    let jump = gamma * beta;
    let mut times = Vec::new();
    let mut t = T::zero();
    let mut memory = T::zero();
    loop {
        let bound = c0 + memory;
        let candidate = t + exp1::<T>(rng) / bound;
        if candidate > horizon {
            break;
        }
        memory *= (-beta * (candidate - t)).exp();
        t = candidate;
        if uniform::<T>(rng) * bound <= c0 + memory {
            if times.last().is_some_and(|&last| t <= last) {
                continue;
            }
            times.push(t);
            memory += jump;
        }
    }
    times
}

/// Thinning with a windowed dominating rate for `φ = αᵀq`.
///
/// Over a window `[t, t + δ]` the excitation obeys
/// `|αᵀ e^{As} χ(t)| ≤ ‖α‖ ‖χ(t)‖ Σ_{k<P} (‖N‖_F s)^k / k!`, using
/// `e^{As} = e^{-βs} e^{Ns}` with nilpotent `N`. The window length is
/// `1 / (c + λ(t))` capped at `1/β`.
fn thin_basis<T: Real>(
    c: T,
    alpha: ArrayView1<'_, T>,
    basis: &KernelBasis<T>,
    horizon: T,
    rng: &mut ChaCha8Rng,
) -> Vec<T> {
    let model = StateSpaceModel::new(*basis);
    let p = basis.order();
    let alpha_norm = linalg::euclidean_norm(alpha);
    let n_norm = linalg::frobenius_norm(model.nilpotent_part().view());
    let growth = |delta: T| {
        let x = n_norm * delta;
        let mut term = T::one();
        let mut sum = T::one();
        for k in 1..p {
            term = term * x / T::from_usize_lossy(k);
            sum += term;
        }
        sum
    };
    let cap = T::one() / basis.beta();

    let mut times = Vec::new();
    let mut chi = Array1::<T>::zeros(p);
    let mut t = T::zero();
    while t < horizon {
        let now = (c + alpha.dot(&chi)).max(T::zero());
        let delta = (T::one() / (c + now)).min(cap);
        let bound = c + alpha_norm * linalg::euclidean_norm(chi.view()) * growth(delta);
        let wait = exp1::<T>(rng) / bound;
        if wait > delta {
            let step = delta.min(horizon - t);
            chi = model.propagate(chi.view(), step);
            t += step;
            continue;
        }
        let candidate = t + wait;
        if candidate > horizon {
            break;
        }
        chi = model.propagate(chi.view(), wait);
        t = candidate;
        let intensity = (c + alpha.dot(&chi)).max(T::zero());
        debug_assert!(
            intensity <= bound * (T::one() + T::lit(1e-9)),
            "dominating rate violated"
        );
        if uniform::<T>(rng) * bound <= intensity {
            if times.last().is_some_and(|&last| t <= last) {
                continue;
            }
            times.push(t);
            chi += &model.b();
        }
    }
    times
}

/// Simulates the exponential-kernel model `λ(t) = c₀ + Σ Γβ e^{-β(t - t_r)}`.
pub fn simulate_exponential<T: Real>(c0: T, gamma: T, beta: T, horizon: T, seed: u64) -> Result<EventStream<T>> {
    HawkesModel::exponential(c0, gamma, beta)?.simulate(horizon, seed)
}

/// Simulates `λ(t) = c + Σ αᵀq(t − t_r)`.
pub fn simulate_laguerre<T: Real>(
    c: T,
    alpha: Array1<T>,
    basis: KernelBasis<T>,
    horizon: T,
    seed: u64,
) -> Result<EventStream<T>> {
    HawkesModel::with_basis(c, alpha, basis)?.simulate(horizon, seed)
}
