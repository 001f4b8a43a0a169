//! Continuous-time realizations `ḣ = A h, h(0) = B` of the kernel bases.
//!
//! Both realizations have `A = -βI + N` with `N` strictly lower triangular,
//! so `N^P = 0` and the matrix exponential is an exact finite sum. The same
//! structure turns the Lyapunov equation into a forward sweep with the fixed
//! divisor `2β`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::basis::{BasisFamily, KernelBasis};
use crate::error::{HawkesError, Result};
use crate::linalg;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel<T> {
    a: Array2<T>,
    b: Array1<T>,
    basis: KernelBasis<T>,
}

impl<T: Real> StateSpaceModel<T> {
    pub fn new(basis: KernelBasis<T>) -> Self {
        let p = basis.order();
        let beta = basis.beta();
        let mut a = Array2::<T>::zeros((p, p));
        let mut b = Array1::<T>::zeros(p);
        match basis.family() {
            BasisFamily::Laguerre => {
                let two_beta = T::two() * beta;
                let root = two_beta.sqrt();
                for i in 0..p {
                    a[[i, i]] = -beta;
                    for j in 0..i {
                        // the d-th subdiagonal carries (-1)^{d+1} 2β
                        a[[i, j]] = if (i - j) % 2 == 1 { two_beta } else { -two_beta };
                    }
                    b[i] = if i % 2 == 0 { root } else { -root };
                }
            }
            BasisFamily::Erlang => {
                for i in 0..p {
                    a[[i, i]] = -beta;
                    if i > 0 {
                        a[[i, i - 1]] = beta;
                    }
                }
                b[0] = beta;
            }
        }
        Self { a, b, basis }
    }

    pub fn a(&self) -> ArrayView2<'_, T> {
        self.a.view()
    }

    pub fn b(&self) -> ArrayView1<'_, T> {
        self.b.view()
    }

    pub fn basis(&self) -> &KernelBasis<T> {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    /// The strictly lower triangular part `N = A + βI`.
    pub fn nilpotent_part(&self) -> Array2<T> {
        let mut n = self.a.clone();
        let beta = self.basis.beta();
        for i in 0..n.nrows() {
            n[[i, i]] += beta;
        }
        n
    }

    /// `e^{A dt} = e^{-β dt} Σ_{k<P} (N dt)^k / k!`.
    ///
    /// # Panics
    /// If `dt` is negative.
    pub fn expm(&self, dt: T) -> Array2<T> {
        assert!(dt >= T::zero(), "expm requires dt >= 0");
        let p = self.order();
        let n = self.nilpotent_part();
        let mut term = Array2::<T>::eye(p);
        let mut sum = term.clone();
        for k in 1..p {
            term = term.dot(&n) * (dt / T::from_usize_lossy(k));
            sum += &term;
        }
        sum * (-self.basis.beta() * dt).exp()
    }

    /// `e^{A dt} x` without forming the matrix.
    pub fn propagate(&self, x: ArrayView1<'_, T>, dt: T) -> Array1<T> {
        debug_assert!(dt >= T::zero());
        let p = self.order();
        let beta = self.basis.beta();
        let mut term = x.to_owned();
        let mut sum = term.clone();
        for k in 1..p {
            // term <- N term · dt / k, N = A + βI strictly lower triangular
            let mut next = Array1::<T>::zeros(p);
            for i in 0..p {
                let mut acc = T::zero();
                for j in 0..i {
                    acc += self.a[[i, j]] * term[j];
                }
                next[i] = acc * dt / T::from_usize_lossy(k);
            }
            term = next;
            sum += &term;
        }
        sum * (-beta * dt).exp()
    }

    /// `A⁻¹ x` by forward substitution.
    pub fn solve_a(&self, x: ArrayView1<'_, T>) -> Array1<T> {
        linalg::solve_lower_triangular(self.a.view(), x)
    }

    /// `∫₀^dt e^{As} x ds = A⁻¹ (e^{A dt} − I) x`.
    pub fn integrate_propagator(&self, x: ArrayView1<'_, T>, dt: T) -> Array1<T> {
        let moved = self.propagate(x, dt) - x;
        self.solve_a(moved.view())
    }

    /// Solves `A X + X Aᵀ + Q = 0` for symmetric `Q`.
    ///
    /// Entries are produced row by row for `i ≥ j`, each from already known
    /// entries; the upper triangle is a mirror copy, so the result is exactly
    /// symmetric.
    pub fn solve_lyapunov(&self, q: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let p = self.order();
        if q.dim() != (p, p) {
            return Err(HawkesError::InvalidInput(format!(
                "Lyapunov right-hand side must be {p}x{p}, got {:?}",
                q.dim()
            )));
        }
        let scale = q.iter().fold(T::one(), |acc, &v| acc.max(v.abs()));
        let asym = linalg::max_asymmetry(q);
        if asym > T::lit(1e-12) * scale {
            return Err(HawkesError::InvalidInput(format!(
                "Lyapunov right-hand side is not symmetric (asymmetry {asym:e})"
            )));
        }
        let a = &self.a;
        let mut x = Array2::<T>::zeros((p, p));
        for i in 0..p {
            for j in 0..=i {
                let mut acc = q[[i, j]];
                for k in 0..i {
                    acc += a[[i, k]] * x[[k, j]];
                }
                for k in 0..j {
                    acc += x[[i, k]] * a[[j, k]];
                }
                let v = acc / -(a[[i, i]] + a[[j, j]]);
                x[[i, j]] = v;
                x[[j, i]] = v;
            }
        }
        Ok(x)
    }

    /// `[B, AB, …, A^{P−1}B]`.
    pub fn controllability_matrix(&self) -> Array2<T> {
        let p = self.order();
        let mut c = Array2::<T>::zeros((p, p));
        let mut col = self.b.clone();
        for k in 0..p {
            c.column_mut(k).assign(&col);
            col = self.a.dot(&col);
        }
        c
    }

    /// Numerical rank of the controllability matrix at relative tolerance `1e-8`.
    ///
    /// The monomial Krylov columns grow geometrically, so the rank is taken
    /// on `[B, NB, …, N^{P−1}B]` with unit columns instead; it spans the same
    /// space because `A` and `N` differ by a multiple of the identity.
    pub fn controllability_rank(&self) -> usize {
        let p = self.order();
        let n = self.nilpotent_part();
        let mut k = Array2::<T>::zeros((p, p));
        let mut col = self.b.clone();
        for j in 0..p {
            let norm = linalg::euclidean_norm(col.view());
            if norm > T::zero() {
                col /= norm;
            }
            k.column_mut(j).assign(&col);
            col = n.dot(&col);
        }
        linalg::numerical_rank(k.view(), T::lit(1e-8))
    }
}
