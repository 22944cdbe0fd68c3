//! Outward-rounded interval arithmetic over [`Dyadic`] endpoints.
//!
//! An [`Interval`] carries the working precision its endpoints are rounded
//! to. Binary operations use the larger precision of their operands.

mod dyadic;
mod exp;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;

use crate::Rational;

pub use dyadic::{Dyadic, Round};
pub use exp::exp_enclosure;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    /// Builds `[lo, hi]`, rounding outward to `prec` bits. Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
            prec,
        }
    }

    pub fn point(v: Dyadic, prec: u32) -> Self {
        Interval::new(v.clone(), v, prec)
    }

    pub fn zero(prec: u32) -> Self {
        Interval { lo: Dyadic::zero(), hi: Dyadic::zero(), prec }
    }

    pub fn one(prec: u32) -> Self {
        Interval { lo: Dyadic::one(), hi: Dyadic::one(), prec }
    }

    /// Tightest `prec`-bit enclosure of an exact rational.
    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(r, prec, Round::Down),
            hi: Dyadic::from_rational(r, prec, Round::Up),
            prec,
        }
    }

    pub fn from_integer(n: &BigUint, prec: u32) -> Self {
        let v = Dyadic::new(n.clone().into(), 0);
        Interval::point(v, prec)
    }

    /// Enclosure of an `f64` value (exact when it fits in `prec` bits).
    pub fn from_f64(v: f64, prec: u32) -> Option<Self> {
        Dyadic::from_f64(v).map(|d| Interval::point(d, prec))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Re-round to a different precision (outward).
    pub fn with_precision(&self, prec: u32) -> Self {
        Interval::new(self.lo.clone(), self.hi.clone(), prec)
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub_exact(&self.lo)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64_dir(Round::Up)
    }

    pub fn midpoint(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        self.midpoint().to_f64()
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_rational(&self, r: &Rational) -> bool {
        self.lo.to_rational() <= *r && *r <= self.hi.to_rational()
    }

    pub fn contains_f64(&self, v: f64) -> bool {
        Dyadic::from_f64(v).is_some_and(|d| self.contains(&d))
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.lo.is_negative()
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: Dyadic::min(&self.lo, &other.lo),
            hi: Dyadic::max(&self.hi, &other.hi),
            prec: self.prec.max(other.prec),
        }
    }

    /// Intersection; `None` when disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = Dyadic::max(&self.lo, &other.lo);
        let hi = Dyadic::min(&self.hi, &other.hi);
        (lo <= hi).then(|| Interval { lo, hi, prec: self.prec.max(other.prec) })
    }

    /// Split at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.midpoint();
        (
            Interval { lo: self.lo.clone(), hi: m.clone(), prec: self.prec },
            Interval { lo: m, hi: self.hi.clone(), prec: self.prec },
        )
    }

    /// Unrounded construction for boxes whose endpoints must stay exact.
    pub(crate) fn exact(lo: Dyadic, hi: Dyadic, prec: u32) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo, hi, prec }
    }

    pub fn lo_point(&self) -> Interval {
        Interval { lo: self.lo.clone(), hi: self.lo.clone(), prec: self.prec }
    }

    pub fn hi_point(&self) -> Interval {
        Interval { lo: self.hi.clone(), hi: self.hi.clone(), prec: self.prec }
    }

    pub fn mid_point(&self) -> Interval {
        let m = self.midpoint();
        Interval { lo: m.clone(), hi: m, prec: self.prec }
    }

    /// Multiplication by a positive integer divisor, `self / n`.
    pub fn div_u64(&self, n: u64) -> Interval {
        assert!(n > 0);
        let d = Dyadic::from_i64(n as i64);
        Interval {
            lo: self.lo.div(&d, self.prec, Round::Down),
            hi: self.hi.div(&d, self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn sqr(&self) -> Interval {
        let p = self.prec;
        if self.is_nonnegative() {
            Interval { lo: self.lo.mul(&self.lo, p, Round::Down), hi: self.hi.mul(&self.hi, p, Round::Up), prec: p }
        } else if !self.hi.is_positive() {
            Interval { lo: self.hi.mul(&self.hi, p, Round::Down), hi: self.lo.mul(&self.lo, p, Round::Up), prec: p }
        } else {
            let m = Dyadic::max(&self.lo.abs(), &self.hi.abs());
            Interval { lo: Dyadic::zero(), hi: m.mul(&m, p, Round::Up), prec: p }
        }
    }

    /// `self^n` with the convention `x^0 = 1` (including `x = 0`).
    pub fn powu(&self, n: u64) -> Interval {
        if n == 0 {
            return Interval::one(self.prec);
        }
        if self.is_nonnegative() {
            return Interval {
                lo: pow_dyadic(&self.lo, n, self.prec, Round::Down),
                hi: pow_dyadic(&self.hi, n, self.prec, Round::Up),
                prec: self.prec,
            };
        }
        if n % 2 == 0 {
            let a = self.lo.abs();
            let b = self.hi.abs();
            if !self.hi.is_positive() {
                return Interval::new(
                    pow_dyadic(&b, n, self.prec, Round::Down),
                    pow_dyadic(&a, n, self.prec, Round::Up),
                    self.prec,
                );
            }
            let m = Dyadic::max(&a, &b);
            return Interval { lo: Dyadic::zero(), hi: pow_dyadic(&m, n, self.prec, Round::Up), prec: self.prec };
        }
        // Odd powers are monotone.
        Interval {
            lo: odd_pow_signed(&self.lo, n, self.prec, Round::Down),
            hi: odd_pow_signed(&self.hi, n, self.prec, Round::Up),
            prec: self.prec,
        }
    }

    pub fn abs_max(&self) -> Dyadic {
        Dyadic::max(&self.lo.abs(), &self.hi.abs())
    }
}

/// `x^n` for `x >= 0`, rounded in direction `dir`.
fn pow_dyadic(x: &Dyadic, n: u64, prec: u32, dir: Round) -> Dyadic {
    debug_assert!(!x.is_negative());
    if x.is_zero() {
        return Dyadic::zero();
    }
    let mut result = Dyadic::one();
    let mut base = x.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base, prec, dir);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base, prec, dir);
        }
    }
    result
}

fn odd_pow_signed(x: &Dyadic, n: u64, prec: u32, dir: Round) -> Dyadic {
    if x.is_negative() {
        pow_dyadic(&x.abs(), n, prec, dir.flip()).neg()
    } else {
        pow_dyadic(x, n, prec, dir)
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        let p = self.prec.max(rhs.prec);
        Interval { lo: self.lo.add(&rhs.lo, p, Round::Down), hi: self.hi.add(&rhs.hi, p, Round::Up), prec: p }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        let p = self.prec.max(rhs.prec);
        Interval { lo: self.lo.sub(&rhs.hi, p, Round::Down), hi: self.hi.sub(&rhs.lo, p, Round::Up), prec: p }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let p = self.prec.max(rhs.prec);
        let (a, b, c, d) = (&self.lo, &self.hi, &rhs.lo, &rhs.hi);
        if !a.is_negative() && !c.is_negative() {
            return Interval { lo: a.mul(c, p, Round::Down), hi: b.mul(d, p, Round::Up), prec: p };
        }
        if !a.is_negative() && !d.is_positive() {
            return Interval { lo: b.mul(c, p, Round::Down), hi: a.mul(d, p, Round::Up), prec: p };
        }
        if !c.is_negative() && !b.is_positive() {
            return Interval { lo: a.mul(d, p, Round::Down), hi: b.mul(c, p, Round::Up), prec: p };
        }
        if !c.is_negative() {
            // self straddles zero, rhs nonnegative
            return Interval { lo: a.mul(d, p, Round::Down), hi: b.mul(d, p, Round::Up), prec: p };
        }
        if !a.is_negative() {
            return Interval { lo: b.mul(c, p, Round::Down), hi: b.mul(d, p, Round::Up), prec: p };
        }
        let products = [(a, c), (a, d), (b, c), (b, d)];
        let lo = products.iter().map(|(x, y)| x.mul(y, p, Round::Down)).min().unwrap();
        let hi = products.iter().map(|(x, y)| x.mul(y, p, Round::Up)).max().unwrap();
        Interval { lo, hi, prec: p }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, rhs: Interval) -> Interval {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, rhs: &Interval) -> Interval {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo.to_f64_dir(Round::Down), self.hi.to_f64_dir(Round::Up))
    }
}
