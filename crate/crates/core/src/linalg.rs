//! Small dense linear-algebra kernels over [`Real`].
//!
//! Matrices here are at most a few dozen rows, so every routine favours
//! accuracy and clarity over blocking. Jacobi methods are used for the
//! symmetric eigenproblem and the SVD because they keep high relative accuracy
//! on the tiny singular values that the Erlang transform produces.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex;

use crate::error::{HawkesError, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

pub fn frobenius_norm<T: Real>(a: ArrayView2<'_, T>) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

pub fn euclidean_norm<T: Real>(v: ArrayView1<'_, T>) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Largest absolute asymmetry `max |a_ij - a_ji|`.
pub fn max_asymmetry<T: Real>(a: ArrayView2<'_, T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    worst
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize<T: Real>(a: ArrayView2<'_, T>) -> Array2<T> {
    let half = T::half();
    let mut out = a.to_owned();
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let m = (a[[i, j]] + a[[j, i]]) * half;
            out[[i, j]] = m;
            out[[j, i]] = m;
        }
    }
    out
}

/// Solves `L x = b` by forward substitution; `L` must be lower triangular
/// with a non-zero diagonal.
pub fn solve_lower_triangular<T: Real>(l: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = b.len();
    let mut x = Array1::zeros(n);
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[[i, k]] * x[k];
        }
        x[i] = acc / l[[i, i]];
    }
    x
}

/// Solves `Lᵀ x = b` for lower-triangular `L`.
fn solve_lower_transposed<T: Real>(l: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = b.len();
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut acc = b[i];
        for k in i + 1..n {
            acc -= l[[k, i]] * x[k];
        }
        x[i] = acc / l[[i, i]];
    }
    x
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a non-positive pivot appears.
pub fn cholesky<T: Real>(a: ArrayView2<'_, T>) -> Option<Array2<T>> {
    let n = a.nrows();
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Some(l)
}

/// Solves `A x = b` for symmetric positive definite `A` through its Cholesky
/// factor. No inverse is ever formed.
pub fn solve_spd<T: Real>(a: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Option<Array1<T>> {
    let l = cholesky(a)?;
    let y = solve_lower_triangular(l.view(), b);
    Some(solve_lower_transposed(l.view(), y.view()))
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues<T: Real>(a: ArrayView2<'_, T>) -> Array1<T> {
    let n = a.nrows();
    let mut m = symmetrize(a);
    let hundred = T::lit(100.0);
    for sweep in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let g = hundred * apq.abs();
                if sweep > 3 && m[[p, p]].abs() + g == m[[p, p]].abs() && m[[q, q]].abs() + g == m[[q, q]].abs() {
                    m[[p, q]] = T::zero();
                    m[[q, p]] = T::zero();
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * akp - s * akq;
                    m[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * apk - s * aqk;
                    m[[q, k]] = s * apk + c * aqk;
                }
                m[[p, q]] = T::zero();
                m[[q, p]] = T::zero();
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Array1::from(eig)
}

/// Singular values in descending order (one-sided Hestenes–Jacobi).
pub fn singular_values<T: Real>(a: ArrayView2<'_, T>) -> Array1<T> {
    let (rows, cols) = a.dim();
    let mut u = a.to_owned();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for k in 0..rows {
                    alpha += u[[k, p]] * u[[k, p]];
                    beta += u[[k, q]] * u[[k, q]];
                    gamma += u[[k, p]] * u[[k, q]];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::two() * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let (ukp, ukq) = (u[[k, p]], u[[k, q]]);
                    u[[k, p]] = c * ukp - s * ukq;
                    u[[k, q]] = s * ukp + c * ukq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = (0..cols)
        .map(|j| (0..rows).fold(T::zero(), |acc, k| acc + u[[k, j]] * u[[k, j]]).sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Array1::from(sv)
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn numerical_rank<T: Real>(a: ArrayView2<'_, T>, rel_tol: T) -> usize {
    let sv = singular_values(a);
    let Some(&top) = sv.first() else { return 0 };
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Eigenvalues of a general real square matrix, via reduction to upper
/// Hessenberg form followed by the shifted QR iteration.
pub fn eigenvalues<T: Real>(a: ArrayView2<'_, T>) -> Result<Vec<Complex<T>>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(HawkesError::InvalidInput("eigenvalues of a non-square matrix".into()));
    }
    // 1-based working copy keeps the index arithmetic of the textbook
    // algorithm intact.
    let mut h = Array2::<T>::zeros((n + 1, n + 1));
    for i in 0..n {
        for j in 0..n {
            h[[i + 1, j + 1]] = a[[i, j]];
        }
    }
    hessenberg_in_place(&mut h, n);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            h[[i, j]] = T::zero();
        }
    }
    let (wr, wi) = hessenberg_qr(&mut h, n)?;
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}

fn hessenberg_in_place<T: Real>(a: &mut Array2<T>, n: usize) {
    for m in 2..n {
        let mut x = T::zero();
        let mut i = m;
        for j in m..=n {
            if a[[j, m - 1]].abs() > x.abs() {
                x = a[[j, m - 1]];
                i = j;
            }
        }
        if i != m {
            for j in m - 1..=n {
                a.swap([i, j], [m, j]);
            }
            for j in 1..=n {
                a.swap([j, i], [j, m]);
            }
        }
        if x != T::zero() {
            for i in m + 1..=n {
                let mut y = a[[i, m - 1]];
                if y != T::zero() {
                    y /= x;
                    a[[i, m - 1]] = y;
                    for j in m..=n {
                        let amj = a[[m, j]];
                        a[[i, j]] -= y * amj;
                    }
                    for j in 1..=n {
                        let aji = a[[j, i]];
                        a[[j, m]] += y * aji;
                    }
                }
            }
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn hessenberg_qr<T: Real>(a: &mut Array2<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let zero = T::zero();
    let mut wr = vec![zero; n + 1];
    let mut wi = vec![zero; n + 1];
    let mut anorm = zero;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[[i, j]].abs();
        }
    }
    let sign = |x: T, y: T| if y >= zero { x.abs() } else { -x.abs() };
    let mut nn = n;
    let mut t = zero;
    let (mut p, mut q, mut r);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[[l - 1, l - 1]].abs() + a[[l, l]].abs();
                if s == zero {
                    s = anorm;
                }
                if a[[l, l - 1]].abs() + s == s {
                    a[[l, l - 1]] = zero;
                    break;
                }
                l -= 1;
            }
            x = a[[nn, nn]];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = zero;
                nn -= 1;
            } else {
                y = a[[nn - 1, nn - 1]];
                w = a[[nn, nn - 1]] * a[[nn - 1, nn]];
                if l == nn - 1 {
                    p = T::half() * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= zero {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != zero {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = zero;
                        wi[nn] = zero;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                } else {
                    if its == 60 {
                        return Err(HawkesError::InvalidInput("QR iteration failed to converge".into()));
                    }
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 1..=nn {
                            a[[i, i]] -= x;
                        }
                        let s = a[[nn, nn - 1]].abs() + a[[nn - 1, nn - 2]].abs();
                        x = T::lit(0.75) * s;
                        y = x;
                        w = T::lit(-0.4375) * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[[m, m]];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[[m + 1, m]] + a[[m, m + 1]];
                        q = a[[m + 1, m + 1]] - z - r - s;
                        r = a[[m + 2, m + 1]];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[[m, m - 1]].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[[m - 1, m - 1]].abs() + z.abs() + a[[m + 1, m + 1]].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nn {
                        a[[i, i - 2]] = zero;
                        if i != m + 2 {
                            a[[i, i - 3]] = zero;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[[k, k - 1]];
                            q = a[[k + 1, k - 1]];
                            r = zero;
                            if k != nn - 1 {
                                r = a[[k + 2, k - 1]];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != zero {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != zero {
                            if k == m {
                                if l != m {
                                    a[[k, k - 1]] = -a[[k, k - 1]];
                                }
                            } else {
                                a[[k, k - 1]] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = a[[k, j]] + q * a[[k + 1, j]];
                                if k != nn - 1 {
                                    p += r * a[[k + 2, j]];
                                    a[[k + 2, j]] -= p * z;
                                }
                                a[[k + 1, j]] -= p * y;
                                a[[k, j]] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * a[[i, k]] + y * a[[i, k + 1]];
                                if k != nn - 1 {
                                    p += z * a[[i, k + 2]];
                                    a[[i, k + 2]] -= p * r;
                                }
                                a[[i, k + 1]] -= p * q;
                                a[[i, k]] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((wr, wi))
}
