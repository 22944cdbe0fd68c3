//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value with its first and second derivative in one
//! variable. Over [`Interval`](crate::Interval) it yields enclosures of
//! `g`, `g'` and `g''` over a whole box in a single pass.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigUint;

use crate::scalar::Numeric;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<N> {
    pub v: N,
    pub d1: N,
    pub d2: N,
}

impl<N: Numeric> Jet<N> {
    pub fn constant(v: N) -> Self {
        let zero = v.one_like() - v.one_like();
        Jet { d1: zero.clone(), d2: zero, v }
    }

    /// The independent variable at `v`.
    pub fn variable(v: N) -> Self {
        let one = v.one_like();
        let zero = one.clone() - one.clone();
        Jet { v, d1: one, d2: zero }
    }
}

impl<N: Numeric> Add for Jet<N> {
    type Output = Jet<N>;
    fn add(self, rhs: Jet<N>) -> Jet<N> {
        Jet { v: self.v + rhs.v, d1: self.d1 + rhs.d1, d2: self.d2 + rhs.d2 }
    }
}

impl<N: Numeric> Sub for Jet<N> {
    type Output = Jet<N>;
    fn sub(self, rhs: Jet<N>) -> Jet<N> {
        Jet { v: self.v - rhs.v, d1: self.d1 - rhs.d1, d2: self.d2 - rhs.d2 }
    }
}

impl<N: Numeric> Mul for Jet<N> {
    type Output = Jet<N>;
    fn mul(self, rhs: Jet<N>) -> Jet<N> {
        let two = self.v.integer_like(&BigUint::from(2u8));
        let d2 = self.v.clone() * rhs.d2.clone()
            + two * self.d1.clone() * rhs.d1.clone()
            + self.d2.clone() * rhs.v.clone();
        let d1 = self.v.clone() * rhs.d1 + self.d1 * rhs.v.clone();
        Jet { v: self.v * rhs.v, d1, d2 }
    }
}

impl<N: Numeric> Numeric for Jet<N> {
    fn one_like(&self) -> Self {
        Jet::constant(self.v.one_like())
    }

    fn integer_like(&self, n: &BigUint) -> Self {
        Jet::constant(self.v.integer_like(n))
    }

    fn powu(&self, n: u64) -> Self {
        match n {
            0 => self.one_like(),
            1 => self.clone(),
            _ => {
                // (v^n)' = n v^{n-1} v',  (v^n)'' = n(n-1) v^{n-2} v'^2 + n v^{n-1} v''
                let nn = self.v.integer_like(&BigUint::from(n));
                let nn1 = self.v.integer_like(&BigUint::from(n * (n - 1)));
                let p2 = self.v.powu(n - 2);
                let p1 = p2.clone() * self.v.clone();
                let p0 = p1.clone() * self.v.clone();
                let d1 = nn.clone() * p1.clone() * self.d1.clone();
                let d2 = nn1 * p2 * self.d1.clone() * self.d1.clone() + nn * p1 * self.d2.clone();
                Jet { v: p0, d1, d2 }
            }
        }
    }
}
