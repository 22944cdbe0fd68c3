//! The recurrence functional `f(λ)` and its polynomial form `g(y)`.
//!
//! With `p = a/b` and the substitution `λ = -c ln y`, `c = (b-a)(d-1)`,
//! `f(λ) = g(y)` where `g` is a polynomial in `y` with nonnegative integer
//! exponents and coefficients that are finite sums `Σ c_i e^{q_i}` with
//! rational `c_i, q_i`. [`build_g`] assembles `g` exactly; [`FactoredG`]
//! evaluates the same function through the activation recursion, which is
//! both cheaper and far better conditioned in interval arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{exp_enclosure, Interval};
use crate::numeric::{self, binomial_rows, diagonal_values, NumParams};
use crate::params::{derive_params, DriftParams};
use crate::scalar::Numeric;
use crate::serde_util::rational_to_string;
use crate::u_dist::s_poly;
use crate::Rational;

/// Exact formal sum `Σ c · e^q` keyed by the exponent `q`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpRational {
    terms: BTreeMap<Rational, Rational>,
}

impl ExpRational {
    pub fn zero() -> Self {
        ExpRational::default()
    }

    /// The single term `c · e^q`.
    pub fn term(c: Rational, q: Rational) -> Self {
        let mut out = ExpRational::zero();
        out.add_term(c, q);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(q, c)` pairs in increasing `q`.
    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, c: Rational, q: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(q.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&q);
        }
    }

    pub fn add(&self, other: &ExpRational) -> ExpRational {
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add_term(c.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExpRational) -> ExpRational {
        let mut out = self.clone();
        for (q, c) in &other.terms {
            out.add_term(-c.clone(), q.clone());
        }
        out
    }

    pub fn mul(&self, other: &ExpRational) -> ExpRational {
        let mut out = ExpRational::zero();
        for (q1, c1) in &self.terms {
            for (q2, c2) in &other.terms {
                out.add_term(c1 * c2, q1 + q2);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> ExpRational {
        if k.is_zero() {
            return ExpRational::zero();
        }
        ExpRational { terms: self.terms.iter().map(|(q, c)| (q.clone(), c * k)).collect() }
    }

    /// Certified enclosure, with exponentials drawn from `cache`.
    pub fn enclose(&self, cache: &mut ExpCache) -> Interval {
        let prec = cache.precision();
        self.terms.iter().fold(Interval::zero(prec), |acc, (q, c)| {
            acc + Interval::from_rational(c, prec) * cache.exp(q)
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(q, c)| c.to_f64().unwrap_or(f64::NAN) * q.to_f64().unwrap_or(f64::NAN).exp())
            .sum()
    }
}

impl fmt::Display for ExpRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(q, c)| format!("{}·e^({})", rational_to_string(c), rational_to_string(q)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for ExpRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            c: String,
            q: String,
        }
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (q, c) in &self.terms {
            seq.serialize_element(&Term { c: rational_to_string(c), q: rational_to_string(q) })?;
        }
        seq.end()
    }
}

/// Memoized enclosures of `e^q` at a fixed working precision.
#[derive(Clone, Debug)]
pub struct ExpCache {
    prec: u32,
    map: HashMap<Rational, Interval>,
}

impl ExpCache {
    pub fn new(prec: u32) -> Self {
        ExpCache { prec, map: HashMap::new() }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn exp(&mut self, q: &Rational) -> Interval {
        if let Some(v) = self.map.get(q) {
            return v.clone();
        }
        let v = exp_enclosure(q, self.prec);
        self.map.insert(q.clone(), v.clone());
        v
    }
}

/// Where an [`ExpPoly`] came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub d: u32,
    #[serde(serialize_with = "big_str")]
    pub a: BigInt,
    #[serde(serialize_with = "big_str")]
    pub b: BigInt,
    #[serde(serialize_with = "big_str")]
    pub c: BigInt,
    /// How many times [`g_derivative`] has been applied.
    pub derivative_order: u32,
}

fn big_str<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl Provenance {
    pub fn params(&self) -> Result<DriftParams> {
        derive_params(self.d, &Rational::new(self.a.clone(), self.b.clone()))
    }
}

/// Polynomial in `y` with [`ExpRational`] coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpPoly {
    coeffs: BTreeMap<u64, ExpRational>,
    provenance: Option<Provenance>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    /// Builds from `(exponent, coefficient)` pairs, merging repeats.
    pub fn from_terms(terms: impl IntoIterator<Item = (u64, ExpRational)>) -> Self {
        let mut out = ExpPoly::zero();
        for (k, c) in terms {
            out.add_at(k, &c);
        }
        out
    }

    fn add_at(&mut self, k: u64, c: &ExpRational) {
        let slot = self.coeffs.entry(k).or_default();
        *slot = slot.add(c);
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Smallest exponent carrying a nonzero coefficient.
    pub fn min_exponent(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    pub fn coeff(&self, k: u64) -> ExpRational {
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    /// `(exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &ExpRational)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// `Σ_k c_k`, the exact value at `y = 1`.
    pub fn value_at_one(&self) -> ExpRational {
        self.coeffs.values().fold(ExpRational::zero(), |acc, c| acc.add(c))
    }

    /// The polynomial divided by `y^k` (every exponent must be `>= k`).
    pub fn deflate(&self, k: u64) -> ExpPoly {
        assert!(self.min_exponent().is_none_or(|m| m >= k));
        ExpPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e - k, c.clone())).collect(),
            provenance: None,
        }
    }

    /// Enclosures of the coefficients, highest exponent first.
    pub fn enclose_coefficients(&self, cache: &mut ExpCache) -> Vec<(u64, Interval)> {
        self.coeffs.iter().rev().map(|(&k, c)| (k, c.enclose(cache))).collect()
    }

    /// Double-precision value; for diagnostics only (large alternating
    /// coefficients make this inaccurate for larger `d`).
    pub fn eval_f64(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev: Option<u64> = None;
        for (&k, c) in self.coeffs.iter().rev() {
            if let Some(pk) = prev {
                acc *= y.powi((pk - k) as i32);
            }
            acc += c.to_f64();
            prev = Some(k);
        }
        if let Some(pk) = prev {
            acc *= y.powi(pk as i32);
        }
        acc
    }
}

/// Sparse Horner evaluation over any [`Numeric`] carrier given coefficient
/// values ordered by decreasing exponent. Uses `0^0 = 1`.
pub fn horner<N: Numeric>(coeffs: &[(u64, N)], y: &N) -> N {
    let mut acc: Option<N> = None;
    let mut prev = 0u64;
    for (k, c) in coeffs {
        acc = Some(match acc {
            None => c.clone(),
            Some(a) => a * y.powu(prev - k) + c.clone(),
        });
        prev = *k;
    }
    match acc {
        None => y.one_like() - y.one_like(),
        Some(a) => a * y.powu(prev),
    }
}

impl Serialize for ExpPoly {
    /// `[{"k": exponent, "terms": [{"c": .., "q": ..}]}]` in increasing `k`.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Row<'a>(u64, &'a ExpRational);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("k", &self.0)?;
                m.serialize_entry("terms", self.1)?;
                m.end()
            }
        }
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for (&k, c) in &self.coeffs {
            seq.serialize_element(&Row(k, c))?;
        }
        seq.end()
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|(k, c)| format!("[{c}]·y^{k}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `f(λ) = E[exp(λ - p* - p̂(1+U)λ)]` in double precision.
pub fn f_value(params: &DriftParams, lambda: f64) -> f64 {
    numeric::f_value(&NumParams::<f64>::from_exact(params), lambda)
}

fn big_to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::InvalidConfig(format!("drift numerator/denominator {v} too large")))
}

/// Exact assembly of `g(y) = e^{-p*} Σ_u y^{(d-1)((u+2)a-b)} s_{d,u}(Φ_d, y^{b-2a})`.
pub fn build_g(params: &DriftParams) -> Result<ExpPoly> {
    let d = params.d;
    let a = big_to_i64(params.a())?;
    let b = big_to_i64(params.b())?;
    let beta = b - 2 * a;
    let mut g = ExpPoly::zero();
    for u in 0..d {
        let s = s_poly(d, u)?;
        let base = (d as i64 - 1) * ((u as i64 + 2) * a - b);
        for (&(i, j), coef) in s.terms() {
            let total = base + j as i64 * beta;
            if total < 0 {
                return Err(Error::NegativeExponent(total));
            }
            let q = Rational::from_integer(BigInt::from(i)) * &params.phi_exponent - &params.p_star;
            g.add_at(total as u64, &ExpRational::term(coef.clone(), q));
        }
    }
    g.provenance = Some(Provenance {
        d,
        a: params.a().clone(),
        b: params.b().clone(),
        c: params.c.to_integer(),
        derivative_order: 0,
    });
    Ok(g)
}

/// Formal derivative in `y`.
pub fn g_derivative(g: &ExpPoly) -> ExpPoly {
    let coeffs = g
        .coeffs
        .iter()
        .filter(|(&k, _)| k > 0)
        .map(|(&k, c)| (k - 1, c.scale(&Rational::from_integer(BigInt::from(k)))))
        .collect();
    let provenance = g.provenance.clone().map(|mut p| {
        p.derivative_order += 1;
        p
    });
    ExpPoly { coeffs, provenance }
}

/// `g` written through the activation recursion:
/// `g(y) = e^{-p*} Σ_u K_u y^{n_u} s_{u+1,u}(Φ_d, y^{b-2a})`, where
/// `K_u = C(d-1,u) Φ_d^{d-1-u}` for `u <= d-2`, `K_{d-1} = 1`, and `n_u >= 0`
/// collects all remaining powers of `y`.
#[derive(Clone, Debug)]
pub struct FactoredG {
    params: DriftParams,
    beta: u64,
    n_u: Vec<u64>,
    binom: Vec<BigUint>,
}

impl FactoredG {
    pub fn new(params: &DriftParams) -> Result<Self> {
        let d = params.d as i64;
        let a = big_to_i64(params.a())?;
        let b = big_to_i64(params.b())?;
        let mut n_u = Vec::with_capacity(d as usize);
        for u in 0..d {
            // total y-power outside the diagonal factor
            let n = if u == d - 1 {
                (d - 1) * ((d + 1) * a - b)
            } else {
                (d - 1) * ((u + 2) * a - b) + (b - 2 * a) * (u + 1) * (d - 1 - u)
            };
            if n < 0 {
                return Err(Error::NegativeExponent(n));
            }
            n_u.push(n as u64);
        }
        let binom = binomial_rows(params.d as usize).pop().unwrap_or_default();
        Ok(FactoredG { params: params.clone(), beta: (b - 2 * a) as u64, n_u, binom })
    }

    pub fn params(&self) -> &DriftParams {
        &self.params
    }

    /// Interval constants `(Φ_d, e^{-p*})` at precision `prec`.
    pub fn constants(&self, prec: u32) -> (Interval, Interval) {
        (exp_enclosure(&self.params.phi_exponent, prec), exp_enclosure(&-self.params.p_star.clone(), prec))
    }

    /// `g(y)` with constants `x = Φ_d` and `pref = e^{-p*}` lifted into `N`.
    pub fn eval<N: Numeric>(&self, x: &N, pref: &N, y: &N) -> N {
        let d = self.params.d as usize;
        let diag = diagonal_values(d, x, &y.powu(self.beta));
        let mut sum: Option<N> = None;
        for u in 0..d {
            let mut term = y.powu(self.n_u[u]) * diag[u].clone();
            if u + 1 < d {
                term = x.integer_like(&self.binom[u]) * x.powu((d - 1 - u) as u64) * term;
            }
            sum = Some(match sum {
                None => term,
                Some(s) => s + term,
            });
        }
        pref.clone() * sum.expect("d >= 2")
    }
}

/// Certified enclosure of `f(λ)` at an exact rational `λ >= 0`.
pub fn f_enclosure(params: &DriftParams, lambda: &Rational, prec: u32) -> Interval {
    let d = params.d as usize;
    let x = exp_enclosure(&params.phi_exponent, prec);
    let y = exp_enclosure(&(-&params.lambda_rate * lambda), prec);
    let diag = diagonal_values(d, &x, &y);
    let binom = binomial_rows(d).pop().unwrap_or_default();
    let one = Rational::one();
    let mut sum = Interval::zero(prec);
    for u in 0..d {
        let uu = Rational::from_integer(BigInt::from(u));
        let expo = if u + 1 == d {
            &one - &params.p_hat * Rational::from_integer(BigInt::from(d))
        } else {
            let k = Rational::from_integer(BigInt::from((u + 1) * (d - 1 - u)));
            &one - &params.p_hat * (&one + &uu) - &params.lambda_rate * k
        };
        let mut term = exp_enclosure(&(expo * lambda), prec) * diag[u].clone();
        if u + 1 < d {
            term = Interval::from_integer(&binom[u], prec) * x.powu((d - 1 - u) as u64) * term;
        }
        sum = sum + term;
    }
    exp_enclosure(&-params.p_star.clone(), prec) * sum
}

/// Exact `g(0) = e^{-p*} Φ_d^{d-1}` as a single exponential.
pub fn g_at_zero_exact(params: &DriftParams) -> ExpRational {
    let q = Rational::from_integer(BigInt::from(params.d - 1)) * &params.phi_exponent - &params.p_star;
    ExpRational::term(Rational::one(), q)
}

/// Largest coefficient magnitude bound `Σ_k Σ |c| e^q` (double precision).
pub fn coefficient_mass(g: &ExpPoly) -> f64 {
    g.coeffs
        .values()
        .flat_map(|c| c.terms())
        .map(|(q, c)| c.abs().to_f64().unwrap_or(f64::INFINITY) * q.to_f64().unwrap_or(0.0).exp())
        .sum()
}
