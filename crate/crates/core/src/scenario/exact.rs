//! Exact probabilities: parsing and canonical printing of rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Parse `"num/den"`, an integer, or a decimal such as `"-0.125"` or
/// `"2.5e-3"` into an exact rational.
pub fn parse_ratio(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty()
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(format!("not a number: {s:?}"));
    }
    let digits = format!("{int}{frac}");
    let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
    if neg {
        num = -num;
    }
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    let r = if shift >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-shift) as usize))
    };
    Ok(r)
}

/// Exact value of the shortest decimal that round-trips to `v`.
pub fn ratio_from_f64(v: f64) -> BigRational {
    assert!(v.is_finite(), "non-finite probability {v}");
    parse_ratio(&format!("{v}")).expect("f64 display is a decimal")
}

/// `"num/den"`, or just `"num"` for integers.
pub fn ratio_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}

/// Serde bridge: serializes as a canonical rational string, accepts JSON
/// numbers or strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Exact(pub BigRational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ratio_to_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Exact;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a \"num/den\" string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exact, E> {
                Ok(Exact(BigRational::from_integer(v.into())))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exact, E> {
                Ok(Exact(BigRational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exact, E> {
                if !v.is_finite() {
                    return Err(E::custom("non-finite number"));
                }
                Ok(Exact(ratio_from_f64(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exact, E> {
                parse_ratio(v).map(Exact).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_accepted_forms() {
        assert_eq!(parse_ratio("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_ratio("2/6").unwrap(), ratio(1, 3));
        assert_eq!(parse_ratio("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_ratio("-.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_ratio("25e-2").unwrap(), ratio(1, 4));
        assert_eq!(parse_ratio("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_ratio("1.5E1").unwrap(), ratio(15, 1));
        for bad in ["", "1/0", "abc", ".", "1.2.3", "1/x"] {
            assert!(parse_ratio(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn float_conversion_uses_shortest_decimal() {
        assert_eq!(ratio_from_f64(0.1), ratio(1, 10));
        assert_eq!(ratio_from_f64(0.3), ratio(3, 10));
        assert_eq!(ratio_from_f64(1.0), ratio(1, 1));
    }

    #[test]
    fn canonical_strings() {
        assert_eq!(ratio_to_string(&ratio(2, 4)), "1/2");
        assert_eq!(ratio_to_string(&ratio(0, 7)), "0");
        assert_eq!(ratio_to_string(&ratio(-3, 1)), "-3");
    }
}
