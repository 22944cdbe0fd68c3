//! Non-certified evaluation of the activation-count distribution and the
//! recurrence functional, generic over the scalar type.
//!
//! The activation recursion is written once over [`Numeric`] and shared by
//! floats and intervals. The functional `f(λ)` is assembled in factored form,
//! combining each term's `λ`-exponents before exponentiating, so large `λ`
//! never overflows.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::params::DriftParams;
use crate::scalar::{Numeric, Real};

/// Drift parameters in floating point. Built from an exact [`DriftParams`] or
/// directly from a float `p` (for bisection over real drifts).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumParams<T> {
    pub d: u32,
    pub p: T,
    pub p_star: T,
    pub p_hat: T,
    /// `ln Φ_d`.
    pub phi_exponent: T,
    pub lambda_rate: T,
}

impl<T: Real> NumParams<T> {
    /// `None` unless `d >= 2` and `1/(d+1) < p < 1/2`.
    pub fn new(d: u32, p: T) -> Option<Self> {
        if d < 2 {
            return None;
        }
        let one = T::one();
        let two = one + one;
        let dd = T::from_u32(d)?;
        if !(p > one / (dd + one) && p < one / two) {
            return None;
        }
        let p_star = p * (dd - one) / (dd - (dd + one) * p);
        let p_hat = p / (one - p);
        Some(NumParams {
            d,
            p,
            p_star,
            p_hat,
            phi_exponent: -(one - p_star) / dd,
            lambda_rate: (one - p_hat) / (dd - one),
        })
    }

    pub fn from_exact(params: &DriftParams) -> Self {
        let cvt = |r: &crate::Rational| T::from_f64_lossy(r.to_f64().unwrap_or(f64::NAN));
        NumParams {
            d: params.d,
            p: cvt(&params.p),
            p_star: cvt(&params.p_star),
            p_hat: cvt(&params.p_hat),
            phi_exponent: cvt(&params.phi_exponent),
            lambda_rate: cvt(&params.lambda_rate),
        }
    }

    /// `Φ_d`.
    pub fn phi(&self) -> T {
        self.phi_exponent.exp()
    }

    /// `Λ_d(λ)`.
    pub fn lambda_factor(&self, lambda: T) -> T {
        (-self.lambda_rate * lambda).exp()
    }
}

/// Rows of Pascal's triangle `0..n` as big integers.
pub fn binomial_rows(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut row = vec![BigUint::from(1u8); k + 1];
        for i in 1..k {
            row[i] = &rows[k - 1][i - 1] + &rows[k - 1][i];
        }
        rows.push(row);
    }
    rows
}

/// Values of the diagonal family `s_{k+1,k}(x, y)` for `k = 0..n`.
///
/// `s_{1,0} = 1` and `s_{k+1,k} = 1 - Σ_{i<k} C(k,i) (x y^{i+1})^{k-i} s_{i+1,i}`.
pub fn diagonal_values<N: Numeric>(n: usize, x: &N, y: &N) -> Vec<N> {
    let binom = binomial_rows(n.max(1));
    let one = x.one_like();
    let mut diag: Vec<N> = Vec::with_capacity(n);
    if n == 0 {
        return diag;
    }
    // bases[i] = x y^{i+1}
    let mut bases: Vec<N> = Vec::with_capacity(n);
    let mut y_pow = y.clone();
    for _ in 0..n {
        bases.push(x.clone() * y_pow.clone());
        y_pow = y_pow * y.clone();
    }
    diag.push(one.clone());
    for k in 1..n {
        let mut acc = one.clone();
        for i in 0..k {
            let term = x.integer_like(&binom[k][i]) * bases[i].powu((k - i) as u64) * diag[i].clone();
            acc = acc - term;
        }
        diag.push(acc);
    }
    diag
}

/// `P(U = u)` for `u = 0..d` as `s_{d,u}(x, y)`.
pub fn pmf_from_xy<N: Numeric>(d: u32, x: &N, y: &N) -> Vec<N> {
    let d = d as usize;
    let diag = diagonal_values(d, x, y);
    let binom = binomial_rows(d);
    let mut probs = Vec::with_capacity(d);
    for u in 0..d.saturating_sub(1) {
        let base = x.clone() * y.powu(u as u64 + 1);
        probs.push(x.integer_like(&binom[d - 1][u]) * base.powu((d - 1 - u) as u64) * diag[u].clone());
    }
    if d >= 1 {
        probs.push(diag[d - 1].clone());
    }
    probs
}

/// Activation-count distribution at `λ`.
pub fn pmf<T: Real>(np: &NumParams<T>, lambda: T) -> Vec<T> {
    pmf_from_xy(np.d, &np.phi(), &np.lambda_factor(lambda))
}

/// Exponent of `λ` multiplying the diagonal factor of the `u`-th summand of
/// `f`; nonpositive for every `u`.
fn lambda_exponent<T: Real>(np: &NumParams<T>, u: u32) -> T {
    let one = T::one();
    let d = np.d;
    let uu = T::from_u32(u).unwrap();
    if u + 1 == d {
        one - np.p_hat * T::from_u32(d).unwrap()
    } else {
        let k = T::from_u32((u + 1) * (d - 1 - u)).unwrap();
        one - np.p_hat * (one + uu) - np.lambda_rate * k
    }
}

/// `f(λ) = E[exp(λ - p* - p̂ (1+U) λ)]`.
pub fn f_value<T: Real>(np: &NumParams<T>, lambda: T) -> T {
    if lambda.is_infinite() {
        return g_at_zero(np);
    }
    let d = np.d as usize;
    let x = np.phi();
    let y = np.lambda_factor(lambda);
    let diag = diagonal_values(d, &x, &y);
    let binom = binomial_rows(d);
    let mut sum = T::zero();
    for u in 0..d {
        let decay = (lambda * lambda_exponent(np, u as u32)).exp();
        let term = if u + 1 == d {
            decay * diag[u]
        } else {
            x.integer_like(&binom[d - 1][u]) * x.powi((d - 1 - u) as i32) * decay * diag[u]
        };
        sum = sum + term;
    }
    (-np.p_star).exp() * sum
}

/// `lim_{λ→∞} f(λ) = e^{-p*} Φ_d^{d-1}`.
pub fn g_at_zero<T: Real>(np: &NumParams<T>) -> T {
    (-np.p_star + np.phi_exponent * T::from_u32(np.d - 1).unwrap()).exp()
}

/// `g(y) = f(-scale · ln y)` on `[0, 1]`.
pub fn g_value<T: Real>(np: &NumParams<T>, y: T, scale: T) -> T {
    if y <= T::zero() {
        return g_at_zero(np);
    }
    f_value(np, -scale * y.ln())
}

/// Numeric maximum of `g` on `(0, 1]` with its location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum<T> {
    pub value: T,
    pub y: T,
    pub lambda: T,
}

/// Maximizes `g` over `(0,1]` in the canonical scale `Λ_d = y`.
///
/// A dense grid with step `1e-3`, extended by log-spaced points down to
/// `1e-12`, locates the best cell; golden-section search then refines it.
pub fn maximize_g<T: Real>(np: &NumParams<T>) -> Maximum<T> {
    let scale = T::one() / np.lambda_rate;
    let eval = |y: T| g_value(np, y, scale);
    let mut grid: Vec<T> = (4..=12).rev().map(|k| T::from_f64_lossy(10f64.powi(-k))).collect();
    grid.extend((1..=1000).map(|i| T::from_f64_lossy(i as f64 * 1e-3)));
    let values: Vec<T> = grid.iter().map(|&y| eval(y)).collect();
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0usize, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let lo = if best == 0 { T::zero() } else { grid[best - 1] };
    let hi = if best + 1 < grid.len() { grid[best + 1] } else { grid[best] };
    let (y_ref, v_ref) = golden_max(&eval, lo, hi, 200);
    let (y, value) = if v_ref > values[best] { (y_ref, v_ref) } else { (grid[best], values[best]) };
    Maximum { value, y, lambda: -scale * y.ln() }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, iters: usize) -> (T, T) {
    let ratio = T::from_f64_lossy((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - ratio * (b - a);
    let mut e = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fe = f(e);
    for _ in 0..iters {
        if (b - a).abs() <= T::epsilon() * (T::one() + a.abs()) {
            break;
        }
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + ratio * (b - a);
            fe = f(e);
        }
    }
    if fc > fe { (c, fc) } else { (e, fe) }
}
