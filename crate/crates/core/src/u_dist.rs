//! Exact distribution of the star-process activation count `U(d, p, λ)`.
//!
//! `P(U = u) = s_{d,u}(Φ_d, Λ_d)` where the `s_{d,u}` are bivariate
//! polynomials with rational coefficients defined by a short recursion. Only
//! the diagonal `s_{u+1,u}` is ever referenced recursively, so only it is
//! memoized; off-diagonal entries are a single monomial shift of it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{exp_enclosure, Dyadic, Interval};
use crate::numeric::{binomial_rows, pmf_from_xy};
use crate::params::DriftParams;
use crate::scalar::{Numeric, Real};
use crate::Rational;

/// Sparse polynomial in `x, y` with exact rational coefficients, keyed by
/// `(x-exponent, y-exponent)`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BivarPoly {
    pub fn zero() -> Self {
        BivarPoly::default()
    }

    pub fn one() -> Self {
        BivarPoly::monomial(Rational::one(), 0, 0)
    }

    pub fn monomial(c: Rational, i: u32, j: u32) -> Self {
        let mut p = BivarPoly::zero();
        p.add_term(c, i, j);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms as `((i, j), c)` in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn max_y_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn max_x_degree(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    fn add_term(&mut self, c: Rational, i: u32, j: u32) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn add(&self, other: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(c.clone(), i, j);
        }
        out
    }

    pub fn sub(&self, other: &BivarPoly) -> BivarPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(-c.clone(), i, j);
        }
        out
    }

    pub fn mul(&self, other: &BivarPoly) -> BivarPoly {
        let mut out = BivarPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                out.add_term(c1 * c2, i1 + i2, j1 + j2);
            }
        }
        out
    }

    /// `c · x^i · y^j · self`.
    pub fn shift(&self, c: &Rational, i: u32, j: u32) -> BivarPoly {
        let mut out = BivarPoly::zero();
        if c.is_zero() {
            return out;
        }
        for (&(a, b), v) in &self.terms {
            out.terms.insert((a + i, b + j), v * c);
        }
        out
    }

    /// Exact value at rational `(x, y)`.
    pub fn eval_rational(&self, x: &Rational, y: &Rational) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (&(i, j), c)| {
            acc + c * num_traits::pow(x.clone(), i as usize) * num_traits::pow(y.clone(), j as usize)
        })
    }

    /// Value at `(x, y)` in any [`Numeric`] carrier.
    pub fn eval<N: Numeric + FromRational>(&self, x: &N, y: &N) -> N {
        let mut acc: Option<N> = None;
        for (&(i, j), c) in &self.terms {
            let term = N::from_rational_like(x, c) * x.powu(i as u64) * y.powu(j as u64);
            acc = Some(match acc {
                None => term,
                Some(a) => a + term,
            });
        }
        acc.unwrap_or_else(|| x.one_like() - x.one_like())
    }
}

impl fmt::Display for BivarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if i > 0 {
                write!(f, "·x^{i}")?;
            }
            if j > 0 {
                write!(f, "·y^{j}")?;
            }
        }
        Ok(())
    }
}

/// Conversion of exact rational constants into an evaluation carrier.
pub trait FromRational: Sized {
    fn from_rational_like(like: &Self, r: &Rational) -> Self;
}

impl<T: Real> FromRational for T {
    fn from_rational_like(_: &Self, r: &Rational) -> Self {
        T::from_f64_lossy(r.to_f64().unwrap_or(f64::NAN))
    }
}

impl FromRational for Interval {
    fn from_rational_like(like: &Self, r: &Rational) -> Self {
        Interval::from_rational(r, like.precision())
    }
}

static DIAGONAL: Mutex<Vec<Arc<BivarPoly>>> = Mutex::new(Vec::new());

/// `s_{k+1,k}`, computed at most once per `k` across threads.
fn diagonal(k: usize) -> Arc<BivarPoly> {
    let mut memo = DIAGONAL.lock().unwrap_or_else(|e| e.into_inner());
    if memo.is_empty() {
        memo.push(Arc::new(BivarPoly::one()));
    }
    if memo.len() <= k {
        let binom = binomial_rows(k + 1);
        for m in memo.len()..=k {
            let mut acc = BivarPoly::one();
            for i in 0..m {
                let c = Rational::from_integer(BigInt::from(binom[m][i].clone()));
                let e = (m - i) as u32;
                acc = acc.sub(&memo[i].shift(&c, e, (i as u32 + 1) * e));
            }
            memo.push(Arc::new(acc));
        }
    }
    Arc::clone(&memo[k])
}

/// The polynomial `s_{d,u}(x, y)` with `P(U(d,p,λ) = u) = s_{d,u}(Φ_d, Λ_d)`.
pub fn s_poly(d: u32, u: u32) -> Result<BivarPoly> {
    if d < 1 || u >= d {
        return Err(Error::Index { d, u });
    }
    if u == d - 1 {
        return Ok((*diagonal(u as usize)).clone());
    }
    let binom = num_integer::binomial(BigUint::from(d - 1), BigUint::from(u));
    let e = d - 1 - u;
    Ok(diagonal(u as usize).shift(&Rational::from_integer(binom.into()), e, (u + 1) * e))
}

/// Activation-count distribution `P(U = u)`, `u = 0..d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UPmf<T> {
    pub d: u32,
    #[serde(with = "crate::serde_util::rational_str")]
    pub p: Rational,
    pub lambda: f64,
    pub probs: Vec<T>,
}

impl<T: Real> UPmf<T> {
    pub fn cdf(&self) -> Vec<T> {
        self.probs
            .iter()
            .scan(T::zero(), |acc, &v| {
                *acc = *acc + v;
                Some(*acc)
            })
            .collect()
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (u, &v)| acc + T::from_usize(u).unwrap() * v)
    }
}

fn exact_lambda(lambda: f64) -> Result<Rational> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(Dyadic::from_f64(lambda).expect("finite").to_rational())
}

/// Certified enclosures of `P(U = u)` at working precision `prec`, with `λ`
/// taken as the exact value of the given float.
pub fn u_pmf_interval(params: &DriftParams, lambda: f64, prec: u32) -> Result<Vec<Interval>> {
    let lam = exact_lambda(lambda)?;
    Ok(pmf_intervals(params, &lam, prec))
}

pub(crate) fn pmf_intervals(params: &DriftParams, lambda: &Rational, prec: u32) -> Vec<Interval> {
    let x = exp_enclosure(&params.phi_exponent, prec);
    let y = exp_enclosure(&(-&params.lambda_rate * lambda), prec);
    pmf_from_xy(params.d, &x, &y)
}

const PMF_TOLERANCE: f64 = 1e-14;
const START_PRECISION: u32 = 128;
const MAX_PRECISION: u32 = 4096;

/// Activation-count distribution at `λ`: midpoints of certified enclosures,
/// each within `1e-14` of the exact probability.
pub fn u_pmf(params: &DriftParams, lambda: f64) -> Result<UPmf<f64>> {
    u_pmf_as::<f64>(params, lambda)
}

/// As [`u_pmf`], converted to the scalar type `T`.
pub fn u_pmf_as<T: Real>(params: &DriftParams, lambda: f64) -> Result<UPmf<T>> {
    let lam = exact_lambda(lambda)?;
    let mut prec = START_PRECISION;
    loop {
        let enclosures = pmf_intervals(params, &lam, prec);
        if enclosures.iter().all(|iv| iv.width_f64() < PMF_TOLERANCE) {
            return Ok(UPmf {
                d: params.d,
                p: params.p.clone(),
                lambda,
                probs: enclosures.iter().map(|iv| T::from_f64_lossy(iv.mid_f64())).collect(),
            });
        }
        if prec >= MAX_PRECISION {
            return Err(Error::ResourceExhausted(format!("pmf enclosure wider than {PMF_TOLERANCE} at {prec} bits")));
        }
        prec *= 2;
    }
}

/// Certified check that `U(d+1, p, λ)` stochastically dominates `U(d, p, λ)`:
/// `P(U_{d+1} <= k) <= P(U_d <= k)` for every `k = 0..d`.
///
/// Undecided comparisons trigger precision doubling; an undecided comparison
/// at the precision cap is reported as [`Error::ResourceExhausted`].
pub fn u_cdf_dominates(params_d: &DriftParams, params_d1: &DriftParams, lambda: f64) -> Result<bool> {
    if params_d1.d != params_d.d + 1 || params_d1.p != params_d.p {
        return Err(Error::ArityMismatch { expected: params_d.d + 1, got: params_d1.d });
    }
    let lam = exact_lambda(lambda)?;
    let d = params_d.d as usize;
    let mut prec = START_PRECISION;
    'escalate: loop {
        let small = cumulative(&pmf_intervals(params_d, &lam, prec));
        let large = cumulative(&pmf_intervals(params_d1, &lam, prec));
        for k in 0..d {
            // P(U_d <= d-1) = 1 exactly
            let upper_ref = if k + 1 == d { Interval::one(prec) } else { small[k].clone() };
            if large[k].hi() <= upper_ref.lo() {
                continue;
            }
            if large[k].lo() > upper_ref.hi() {
                return Ok(false);
            }
            if prec >= MAX_PRECISION {
                return Err(Error::ResourceExhausted(format!("cdf comparison at k = {k} undecided at {prec} bits")));
            }
            prec *= 2;
            continue 'escalate;
        }
        return Ok(true);
    }
}

fn cumulative(probs: &[Interval]) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::with_capacity(probs.len());
    for pr in probs {
        let next = match out.last() {
            Some(prev) => prev + pr,
            None => pr.clone(),
        };
        out.push(next);
    }
    out
}

/// Largest coefficient magnitude of `s_{d,u}`; a cheap size diagnostic.
pub fn max_abs_coefficient(poly: &BivarPoly) -> Rational {
    poly.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(Rational::zero)
}
