//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions<T> {
    /// Target absolute error, applied to every component.
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-9),
            max_intervals: 4000,
        }
    }
}

/// Integral estimate together with its error estimate (max over components).
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    pub value: Vec<T>,
    pub error: T,
    pub intervals: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    value: Vec<T>,
    error: T,
}

fn gauss_kronrod<T: Real, F>(f: &mut F, a: T, b: T, dim: usize) -> Panel<T>
where
    F: FnMut(T) -> Vec<T>,
{
    let center = T::half() * (a + b);
    let half = T::half() * (b - a);
    let mut kronrod = vec![T::zero(); dim];
    let mut gauss = vec![T::zero(); dim];
    let mut accumulate = |x: T, wk: T, wg: Option<T>| {
        let fx = f(x);
        debug_assert_eq!(fx.len(), dim);
        for i in 0..dim {
            kronrod[i] += wk * fx[i];
            if let Some(wg) = wg {
                gauss[i] += wg * fx[i];
            }
        }
    };
    accumulate(center, T::lit(WGK[7]), Some(T::lit(WG[3])));
    for k in 0..7 {
        let dx = half * T::lit(XGK[k]);
        let wg = (k % 2 == 1).then(|| T::lit(WG[k / 2]));
        accumulate(center - dx, T::lit(WGK[k]), wg);
        accumulate(center + dx, T::lit(WGK[k]), wg);
    }
    let scale = half.abs();
    let mut error = T::zero();
    let value: Vec<T> = kronrod
        .iter()
        .zip(&gauss)
        .map(|(&k, &g)| {
            error = error.max(((k - g) * scale).abs());
            k * half
        })
        .collect();
    Panel { a, b, value, error }
}

/// Integrates the `dim`-component function `f` over `[a, b]`.
///
/// The panel with the largest error is bisected until the summed error
/// estimate drops below `abs_tol` or `max_intervals` panels exist.
pub fn integrate<T: Real, F>(mut f: F, a: T, b: T, dim: usize, opts: QuadratureOptions<T>) -> Quadrature<T>
where
    F: FnMut(T) -> Vec<T>,
{
    let mut panels = vec![gauss_kronrod(&mut f, a, b, dim)];
    loop {
        let total_error = panels.iter().fold(T::zero(), |acc, p| acc + p.error);
        if total_error <= opts.abs_tol || panels.len() >= opts.max_intervals {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite error"))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = T::half() * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval cannot be split further in this precision.
            panels.push(p);
            break;
        }
        panels.push(gauss_kronrod(&mut f, p.a, mid, dim));
        panels.push(gauss_kronrod(&mut f, mid, p.b, dim));
    }
    let mut value = vec![T::zero(); dim];
    let mut error = T::zero();
    for p in &panels {
        for (acc, v) in value.iter_mut().zip(&p.value) {
            *acc += *v;
        }
        error += p.error;
    }
    Quadrature {
        value,
        error,
        intervals: panels.len(),
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<T: Real, F>(mut f: F, a: T, b: T, opts: QuadratureOptions<T>) -> Quadrature<T>
where
    F: FnMut(T) -> T,
{
    integrate(|x| vec![f(x)], a, b, 1, opts)
}
