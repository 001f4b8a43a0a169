//! Orthonormal Laguerre and Erlang kernel bases.
//!
//! The Laguerre functions are `h_j(t) = w(t) u_j(t)` with weight
//! `w(t) = β e^{-βt}` and orthonormal polynomials `u_j` generated by a
//! three-term recursion. The sign convention makes every `h_j` integrate to
//! `+√(2/β)`, i.e. odd orders are flipped relative to the classical
//! definition. The Erlang functions `g_j(t) = β e^{-βt} (βt)^j / j!` are
//! probability densities and span the same space: `g = L h` for a lower
//! triangular `L`.
//!
//! Binomial coefficients are built by multiplicative recurrence in the working
//! precision, which stays accurate well past the orders used here (in `f64`
//! the closed forms start losing digits around order 25).

use ndarray::{Array1, Array2};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Laguerre,
    Erlang,
}

impl std::fmt::Display for BasisFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisFamily::Laguerre => f.write_str("laguerre"),
            BasisFamily::Erlang => f.write_str("erlang"),
        }
    }
}

/// A finite causal basis `q(t) = [q_0(t), …, q_{P-1}(t)]` sharing the decay rate `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBasis<T> {
    family: BasisFamily,
    beta: T,
    order: usize,
}

fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta > T::zero() && beta.is_finite() {
        Ok(())
    } else {
        Err(HawkesError::param(
            "beta",
            format!("decay rate must be finite and > 0, got {beta}"),
        ))
    }
}

impl<T: Real> KernelBasis<T> {
    pub fn new(family: BasisFamily, beta: T, order: usize) -> Result<Self> {
        check_beta(beta)?;
        if order == 0 {
            return Err(HawkesError::param("P", "model order must be at least 1"));
        }
        Ok(Self { family, beta, order })
    }

    pub fn laguerre(beta: T, order: usize) -> Result<Self> {
        Self::new(BasisFamily::Laguerre, beta, order)
    }

    pub fn erlang(beta: T, order: usize) -> Result<Self> {
        Self::new(BasisFamily::Erlang, beta, order)
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Number of basis functions `P`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Same decay rate and order in another family.
    pub fn with_family(&self, family: BasisFamily) -> Self {
        Self { family, ..*self }
    }

    /// Evaluates `h(t)` or `g(t)`. The basis is causal: `t < 0` gives zeros.
    pub fn eval(&self, t: T) -> Array1<T> {
        if t < T::zero() {
            return Array1::zeros(self.order);
        }
        let weight = self.beta * (-self.beta * t).exp();
        let mut out = match self.family {
            BasisFamily::Laguerre => laguerre_polys_unchecked(t, self.beta, self.order),
            BasisFamily::Erlang => erlang_polys(t, self.beta, self.order),
        };
        out.mapv_inplace(|v| v * weight);
        out
    }

    /// Laplace transform evaluated on the imaginary axis, `q̄(iω)`.
    pub fn laplace(&self, omega: T) -> Array1<Complex<T>> {
        let s = Complex::new(T::zero(), omega);
        let beta = Complex::new(self.beta, T::zero());
        let mut out = Array1::from_elem(self.order, Complex::new(T::zero(), T::zero()));
        match self.family {
            BasisFamily::Laguerre => {
                let all_pass = (beta - s) / (beta + s);
                let mut cur = Complex::new((T::two() * self.beta).sqrt(), T::zero()) / (s + beta);
                for v in out.iter_mut() {
                    *v = cur;
                    cur *= all_pass;
                }
            }
            BasisFamily::Erlang => {
                let ratio = beta / (s + beta);
                let mut cur = ratio;
                for v in out.iter_mut() {
                    *v = cur;
                    cur *= ratio;
                }
            }
        }
        out
    }

    /// `∫₀^∞ q_j(t) dt` for each basis function.
    pub fn mass(&self) -> Array1<T> {
        match self.family {
            BasisFamily::Laguerre => Array1::from_elem(self.order, (T::two() / self.beta).sqrt()),
            BasisFamily::Erlang => Array1::ones(self.order),
        }
    }
}

/// One row of the three-term recursion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionCoeffs<T> {
    pub rho: T,
    pub kappa: T,
    pub gamma: T,
}

/// `(ρ_j, κ_j, γ_j) = (2β/(j+1), (2j+1)/(j+1), j/(j+1))`.
pub fn recursion_coeffs<T: Real>(j: usize, beta: T) -> Result<RecursionCoeffs<T>> {
    check_beta(beta)?;
    Ok(coeffs_unchecked(j, beta))
}

#[inline]
fn coeffs_unchecked<T: Real>(j: usize, beta: T) -> RecursionCoeffs<T> {
    let jf = T::from_usize_lossy(j);
    let j1 = jf + T::one();
    RecursionCoeffs {
        rho: T::two() * beta / j1,
        kappa: (T::two() * jf + T::one()) / j1,
        gamma: jf / j1,
    }
}

/// The orthonormal Laguerre polynomials `u_0(t), …, u_{P-1}(t)` by forward recursion.
pub fn laguerre_polys<T: Real>(t: T, beta: T, order: usize) -> Result<Array1<T>> {
    check_beta(beta)?;
    Ok(laguerre_polys_unchecked(t, beta, order))
}

pub(crate) fn laguerre_polys_unchecked<T: Real>(t: T, beta: T, order: usize) -> Array1<T> {
    let mut u = Array1::zeros(order);
    if order == 0 {
        return u;
    }
    u[0] = (T::two() / beta).sqrt();
    // u_{-1} ≡ 0
    let mut prev = T::zero();
    for j in 0..order - 1 {
        let c = coeffs_unchecked(j, beta);
        let next = (c.rho * t - c.kappa) * u[j] - c.gamma * prev;
        prev = u[j];
        u[j + 1] = next;
    }
    u
}

fn erlang_polys<T: Real>(t: T, beta: T, order: usize) -> Array1<T> {
    let bt = beta * t;
    let mut v = Array1::zeros(order);
    let mut cur = T::one();
    for (j, slot) in v.iter_mut().enumerate() {
        *slot = cur;
        cur = cur * bt / T::from_usize_lossy(j + 1);
    }
    v
}

/// The symmetric tridiagonal Jacobi matrix `J_m` of the Laguerre recursion.
pub fn jacobi_matrix<T: Real>(m: usize, beta: T) -> Result<Array2<T>> {
    check_beta(beta)?;
    if m == 0 {
        return Err(HawkesError::param("m", "Jacobi matrix dimension must be at least 1"));
    }
    let mut j = Array2::zeros((m, m));
    for i in 0..m {
        let c = coeffs_unchecked(i, beta);
        j[[i, i]] = c.kappa / c.rho;
        if i + 1 < m {
            let off = T::one() / c.rho;
            j[[i, i + 1]] = off;
            j[[i + 1, i]] = off;
        }
    }
    Ok(j)
}

/// Pascal triangle rows `C(n, k)` for `n < size`, built multiplicatively.
pub(crate) fn binomial_table<T: Real>(size: usize) -> Array2<T> {
    let mut c = Array2::zeros((size, size));
    for n in 0..size {
        let mut cur = T::one();
        c[[n, 0]] = cur;
        for k in 1..=n {
            cur = cur * T::from_usize_lossy(n - k + 1) / T::from_usize_lossy(k);
            c[[n, k]] = cur.round();
        }
    }
    c
}

/// The change of basis `g = L h` and its closed-form inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct ErlangTransform<T> {
    pub l: Array2<T>,
    pub l_inverse: Array2<T>,
}

pub fn erlang_transform<T: Real>(order: usize, beta: T) -> Result<ErlangTransform<T>> {
    check_beta(beta)?;
    if order == 0 {
        return Err(HawkesError::param("P", "model order must be at least 1"));
    }
    let binom = binomial_table::<T>(order);
    let scale = (beta / T::two()).sqrt();
    let inv_scale = T::one() / scale;
    let mut l = Array2::zeros((order, order));
    let mut l_inverse = Array2::zeros((order, order));
    let mut pow_i = T::one();
    for i in 0..order {
        let mut pow_j = T::one();
        for j in 0..=i {
            l[[i, j]] = scale * binom[[i, j]] / pow_i;
            let sign = if (i - j) % 2 == 0 { T::one() } else { -T::one() };
            l_inverse[[i, j]] = inv_scale * sign * pow_j * binom[[i, j]];
            pow_j *= T::two();
        }
        pow_i *= T::two();
    }
    Ok(ErlangTransform { l, l_inverse })
}
