//! Exact drift parameters of the self-similar frog model.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::serde_util::rational_str;
use crate::{Error, Rational, Result};

/// All exact quantities derived from an arity `d` and a drift `p = a/b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DriftParams {
    pub d: u32,
    #[serde(with = "rational_str")]
    pub p: Rational,
    /// First-step rootward probability `p(d-1) / (d - (d+1)p)`.
    #[serde(with = "rational_str")]
    pub p_star: Rational,
    /// Continuing rootward probability `p / (1-p)`.
    #[serde(with = "rational_str")]
    pub p_hat: Rational,
    /// `q` with `Φ_d = e^q`, equal to `(2a-b)/(bd-ad-a)`.
    #[serde(with = "rational_str")]
    pub phi_exponent: Rational,
    /// `(1 - p_hat)/(d-1)`, so that `Λ_d = e^{-lambda_rate λ}`.
    #[serde(with = "rational_str")]
    pub lambda_rate: Rational,
    /// Change-of-variables scale `(b-a)(d-1)`.
    #[serde(with = "rational_str")]
    pub c: Rational,
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Derives exact parameters; rejects `p` outside the open interval
/// `(1/(d+1), 1/2)`.
pub fn derive_params(d: u32, p: &Rational) -> Result<DriftParams> {
    if d < 2 {
        return Err(Error::InvalidArity(d, 2));
    }
    let lower = Rational::new(BigInt::one(), BigInt::from(d + 1));
    let upper = Rational::new(BigInt::one(), BigInt::from(2));
    if *p <= lower || *p >= upper {
        return Err(Error::OutOfRange { d, p: p.clone() });
    }
    let dd = int(d as i64);
    let one = Rational::one();
    let p_star = p * (&dd - &one) / (&dd - (&dd + &one) * p);
    let p_hat = p / (&one - p);
    let phi_exponent = -(&one - &p_star) / &dd;
    let lambda_rate = (&one - &p_hat) / (&dd - &one);
    let a = p.numer();
    let b = p.denom();
    let c = Rational::from_integer((b - a) * BigInt::from(d - 1));
    Ok(DriftParams { d, p: p.clone(), p_star, p_hat, phi_exponent, lambda_rate, c })
}

impl DriftParams {
    /// Numerator `a` of `p = a/b` in lowest terms.
    pub fn a(&self) -> &BigInt {
        self.p.numer()
    }

    /// Denominator `b` of `p = a/b` in lowest terms.
    pub fn b(&self) -> &BigInt {
        self.p.denom()
    }

    /// `(a, b)` as machine integers, when they fit.
    pub fn ab_i64(&self) -> Option<(i64, i64)> {
        Some((self.a().to_i64()?, self.b().to_i64()?))
    }

    pub fn p_f64(&self) -> f64 {
        self.p.to_f64().unwrap_or(f64::NAN)
    }

    /// Same drift at arity `d + 1`, if still in range.
    pub fn with_arity(&self, d: u32) -> Result<DriftParams> {
        derive_params(d, &self.p)
    }

    /// `λ = -c ln y` maps `y ∈ (0,1]` to `λ ∈ [0,∞)`.
    pub fn lambda_of_y(&self, y: f64) -> f64 {
        -self.c.to_f64().unwrap_or(f64::NAN) * y.ln()
    }
}

impl std::fmt::Display for DriftParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "d={}, p={}", self.d, crate::serde_util::rational_to_string(&self.p))
    }
}

/// True when `r` is strictly between `1/(d+1)` and `1/2`.
pub fn in_drift_range(d: u32, r: &Rational) -> bool {
    !r.is_zero()
        && *r > Rational::new(BigInt::one(), BigInt::from(d + 1))
        && *r < Rational::new(BigInt::one(), BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn d2_two_fifths_by_hand() {
        let prm = derive_params(2, &rat(2, 5)).unwrap();
        assert_eq!(prm.p_star, rat(1, 2));
        assert_eq!(prm.p_hat, rat(2, 3));
        assert_eq!(prm.phi_exponent, rat(-1, 4));
        assert_eq!(prm.lambda_rate, rat(1, 3));
        assert_eq!(prm.c, rat(3, 1));
    }

    #[test]
    fn d13_table_value() {
        let prm = derive_params(13, &rat(11, 54)).unwrap();
        assert_eq!(prm.p_star, rat(33, 137));
    }

    #[test]
    fn boundaries_rejected() {
        assert!(matches!(derive_params(2, &rat(1, 3)), Err(Error::OutOfRange { .. })));
        assert!(matches!(derive_params(2, &rat(1, 2)), Err(Error::OutOfRange { .. })));
        assert!(matches!(derive_params(5, &rat(1, 6)), Err(Error::OutOfRange { .. })));
        assert!(matches!(derive_params(1, &rat(1, 3)), Err(Error::InvalidArity(1, 2))));
    }

    proptest! {
        #[test]
        fn derived_identities(d in 2u32..40, num in 1i64..10_000) {
            // map num to a rational strictly inside (1/(d+1), 1/2)
            let lo = rat(1, d as i64 + 1);
            let hi = rat(1, 2);
            let t = rat(num, 10_001);
            let p = &lo + (&hi - &lo) * t;
            let prm = derive_params(d, &p).unwrap();
            let one = Rational::one();
            let dd = int(d as i64);
            prop_assert_eq!(&prm.p_hat * (&one - &p), p.clone());
            prop_assert_eq!(&prm.p_star * (&dd - (&dd + &one) * &p), &p * (&dd - &one));
            prop_assert_eq!(prm.phi_exponent.clone(), -(&one - &prm.p_star) / &dd);
            let a = int(p.numer().to_i64().unwrap());
            let b = int(p.denom().to_i64().unwrap());
            let two = int(2);
            let ab_form = (&two * &a - &b) / (&b * &dd - &a * &dd - &a);
            prop_assert_eq!(prm.phi_exponent.clone(), ab_form);
            prop_assert!(prm.p_star > Rational::zero() && prm.p_star < one);
            prop_assert!(prm.p_hat > Rational::zero() && prm.p_hat < Rational::one());
            prop_assert!(prm.lambda_rate > Rational::zero());
            prop_assert!(prm.phi_exponent < Rational::zero());
        }
    }
}
