//! Serialization helpers: rationals as `"a/b"` strings, dyadics as exact
//! mantissa/exponent pairs with an `f64` rendering.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::interval::Dyadic;
use crate::{Error, Rational};

pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"a/b"`, `"a"` or a plain decimal literal such as `"0.25"` (exactly).
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n = BigInt::from_str(&digits).map_err(|_| bad())?;
        let d = BigInt::from(10).pow(frac.len() as u32);
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad())
}

pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rational_to_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Dyadic", 3)?;
        st.serialize_field("mantissa", &self.mantissa().to_string())?;
        st.serialize_field("exponent", &self.exponent())?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Dyadic, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            mantissa: String,
            exponent: i64,
        }
        let raw = Raw::deserialize(d)?;
        let m = BigInt::from_str(&raw.mantissa).map_err(serde::de::Error::custom)?;
        Ok(Dyadic::new(m, raw.exponent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_decimal() {
        assert_eq!(parse_rational("55/159").unwrap(), Rational::new(55.into(), 159.into()));
        assert_eq!(parse_rational("4/10").unwrap(), Rational::new(2.into(), 5.into()));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new((-3).into(), 2.into()));
        assert_eq!(parse_rational("3").unwrap(), Rational::from_integer(3.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn dyadic_json_roundtrip() {
        let d = Dyadic::new(BigInt::from(-12345), -77);
        let json = serde_json::to_string(&d).unwrap();
        let back: Dyadic = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
