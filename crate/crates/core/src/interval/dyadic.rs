//! Arbitrary-precision binary floats `m * 2^e` with directed rounding.
//!
//! Every operation that can lose information takes a target precision (in
//! significand bits) and a [`Round`] direction. Exact operations (negation,
//! scaling by powers of two, exact sums used for midpoints) take neither.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Rounding direction for inexact operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// A dyadic rational `mantissa * 2^exponent`, kept with an odd mantissa
/// (or a zero mantissa and zero exponent).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    /// Exact conversion; returns `None` for NaN or infinities.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Some(Dyadic::new(BigInt::from(m) * sign, e))
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    fn top(&self) -> i64 {
        self.exp + self.bits() as i64
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Exact multiplication by `2^k`.
    pub fn ldexp(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let bits = self.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let floor = &self.mant >> shift;
        let mant = match dir {
            Round::Down => floor,
            Round::Up => {
                if (&floor << shift) == self.mant {
                    floor
                } else {
                    floor + 1
                }
            }
        };
        Dyadic::new(mant, self.exp + shift as i64)
    }

    /// Exact sum. Cost grows with the exponent gap between the operands.
    pub fn add_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub_exact(&self, other: &Dyadic) -> Dyadic {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Sum rounded in direction `dir`.
    ///
    /// When one operand lies entirely below the rounding position of the
    /// other it is replaced by a one-sided bound of magnitude `2^limit`, so
    /// the result stays a valid directed bound without materializing a huge
    /// aligned mantissa.
    pub fn add(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() {
            return other.round(prec, dir);
        }
        if other.is_zero() {
            return self.round(prec, dir);
        }
        let (big, small) = if self.top() >= other.top() {
            (self, other)
        } else {
            (other, self)
        };
        let limit = big.top() - prec as i64 - 4;
        if small.top() < limit {
            let toward_dir = match dir {
                Round::Down => small.is_negative(),
                Round::Up => small.is_positive(),
            };
            if !toward_dir {
                return big.round(prec, dir);
            }
            let nudge = if small.is_negative() {
                Dyadic::pow2(limit).neg()
            } else {
                Dyadic::pow2(limit)
            };
            return big.add_exact(&nudge).round(prec, dir);
        }
        self.add_exact(other).round(prec, dir)
    }

    pub fn sub(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.add(&other.neg(), prec, dir)
    }

    pub fn mul(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.mul_exact(other).round(prec, dir)
    }

    /// Quotient rounded in direction `dir`. Panics on division by zero.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "dyadic division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let extra = (prec as i64 + 2 + other.bits() as i64 - self.bits() as i64).max(0);
        let num = &self.mant << extra as u64;
        let (q, r) = num.div_mod_floor(&other.mant);
        let q = if dir == Round::Up && !r.is_zero() { q + 1 } else { q };
        Dyadic::new(q, self.exp - other.exp - extra).round(prec, dir)
    }

    /// Directed conversion from an exact rational.
    pub fn from_rational(r: &Rational, prec: u32, dir: Round) -> Dyadic {
        let num = Dyadic::new(r.numer().clone(), 0);
        let den = Dyadic::new(r.denom().clone(), 0);
        num.div(&den, prec, dir)
    }

    /// Exact conversion to a rational.
    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as u64)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Nearest-ish `f64` (rounds toward zero at 64 bits first).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits();
        let (m, e) = if bits > 64 {
            let shift = bits - 64;
            (&self.mant >> shift, self.exp + shift as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        scale_f64(mf, e)
    }

    /// `f64` bound in direction `dir`: `to_f64_dir(Down) <= self <= to_f64_dir(Up)`.
    pub fn to_f64_dir(&self, dir: Round) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, dir);
        let mf = r.mant.to_f64().unwrap_or(f64::NAN);
        let v = scale_f64(mf, r.exp);
        // Underflow to zero or overflow to infinity can break the bound.
        match dir {
            Round::Down if v == 0.0 && self.is_negative() => -f64::from_bits(1),
            Round::Up if v == 0.0 && self.is_positive() => f64::from_bits(1),
            Round::Down if v.is_infinite() && v > 0.0 => f64::MAX,
            Round::Up if v.is_infinite() && v < 0.0 => f64::MIN,
            _ => v,
        }
    }

    /// Midpoint `(a + b) / 2`, exact.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        a.add_exact(b).ldexp(-1)
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b { a.clone() } else { b.clone() }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b { a.clone() } else { b.clone() }
    }
}

fn scale_f64(m: f64, e: i64) -> f64 {
    // Split the scaling so intermediate powers stay finite.
    let mut v = m;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (ta, tb) = (self.top(), other.top());
        if ta != tb {
            let mag = ta.cmp(&tb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn f64_roundtrip() {
        for v in [0.0, 1.0, -2.5, 0.1, 1e-300, 5e-324, 1.7e308] {
            assert_eq!(Dyadic::from_f64(v).unwrap().to_f64(), v);
        }
        assert!(Dyadic::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn rounding_brackets_one_third() {
        let third = rat(1, 3);
        let lo = Dyadic::from_rational(&third, 64, Round::Down);
        let hi = Dyadic::from_rational(&third, 64, Round::Up);
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(hi.bits() <= 64 && lo.bits() <= 64);
        let gap = hi.sub_exact(&lo).to_rational();
        assert!(gap <= rat(1, 1) / Rational::from_integer(BigInt::one() << 64u32));
    }

    #[test]
    fn far_apart_sum_stays_directed() {
        let one = Dyadic::one();
        let tiny = Dyadic::pow2(-5000);
        let down = one.add(&tiny, 53, Round::Down);
        let up = one.add(&tiny, 53, Round::Up);
        assert_eq!(down, one);
        assert!(up > one);
        let down = one.sub(&tiny, 53, Round::Down);
        assert!(down < one);
        assert_eq!(one.sub(&tiny, 53, Round::Up), one);
    }

    proptest! {
        #[test]
        fn directed_ops_bracket_exact(a in -1.0e6f64..1.0e6, b in -1.0e6f64..1.0e6, prec in 8u32..80) {
            let x = Dyadic::from_f64(a).unwrap();
            let y = Dyadic::from_f64(b).unwrap();
            let exact_sum = x.to_rational() + y.to_rational();
            prop_assert!(x.add(&y, prec, Round::Down).to_rational() <= exact_sum);
            prop_assert!(x.add(&y, prec, Round::Up).to_rational() >= exact_sum);
            let exact_prod = x.to_rational() * y.to_rational();
            prop_assert!(x.mul(&y, prec, Round::Down).to_rational() <= exact_prod);
            prop_assert!(x.mul(&y, prec, Round::Up).to_rational() >= exact_prod);
            if !y.is_zero() {
                let exact_q = x.to_rational() / y.to_rational();
                prop_assert!(x.div(&y, prec, Round::Down).to_rational() <= exact_q);
                prop_assert!(x.div(&y, prec, Round::Up).to_rational() >= exact_q);
            }
        }

        #[test]
        fn ordering_matches_rationals(a in -1.0e3f64..1.0e3, b in -1.0e3f64..1.0e3) {
            let x = Dyadic::from_f64(a).unwrap();
            let y = Dyadic::from_f64(b).unwrap();
            prop_assert_eq!(x.cmp(&y), x.to_rational().cmp(&y.to_rational()));
        }
    }
}
