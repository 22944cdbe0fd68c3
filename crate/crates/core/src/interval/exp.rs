use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{Dyadic, Interval, Round};
use crate::Rational;

/// Certified enclosure of `e^q` for exact rational `q`.
///
/// The argument is halved `k` times until `|r| <= 1/2`, `e^r` is summed as a
/// Taylor series with the Lagrange remainder `2 |r|^(N+1) / (N+1)!` added as
/// a symmetric error term (valid because `e^ξ < 2` for `|ξ| <= 1/2`), and the
/// result is squared `k` times. Guard bits cover the error amplification of
/// the squarings, so the returned width is at most `2^-(prec-4) * e^q`.
pub fn exp_enclosure(q: &Rational, prec: u32) -> Interval {
    let prec = prec.max(16);
    if q.is_zero() {
        return Interval::one(prec);
    }
    let halvings = reduction_steps(q);
    let work = prec + halvings + 24;
    let r = q / Rational::from_integer(BigInt::from(1u8) << halvings);
    let r = Interval::from_rational(&r, work);
    let r_abs = r.abs_max();

    let mut sum = Interval::one(work);
    let mut term = Interval::one(work);
    let mut term_bound = Dyadic::one();
    let stop = Dyadic::pow2(-(work as i64) - 8);
    let mut n: u64 = 1;
    loop {
        term = (&term * &r).div_u64(n);
        sum = &sum + &term;
        term_bound = term_bound.mul(&r_abs, work, Round::Up).div(&Dyadic::from_i64(n as i64), work, Round::Up);
        // |r|^(n+1)/(n+1)! <= term_bound * |r| / (n+1)
        let next = term_bound
            .mul(&r_abs, work, Round::Up)
            .div(&Dyadic::from_i64(n as i64 + 1), work, Round::Up);
        if next <= stop || r_abs.is_zero() {
            let rem = next.ldexp(1);
            sum = &sum + &Interval::exact(rem.neg(), rem, work);
            break;
        }
        n += 1;
    }

    let mut acc = sum;
    for _ in 0..halvings {
        acc = acc.sqr();
    }
    acc.with_precision(prec)
}

/// Smallest `k` with `|q| / 2^k <= 1/2`.
fn reduction_steps(q: &Rational) -> u32 {
    let a = q.abs();
    let half = Rational::new(BigInt::from(1), BigInt::from(2));
    let mut k = 0u32;
    let mut scaled = a;
    while scaled > half {
        scaled /= Rational::from_integer(BigInt::from(2));
        k += 1;
    }
    k
}
