//! Exact rationals and their JSON form `{"num": "...", "den": "..."}`.

use num::bigint::BigInt;
use num::{BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `(n-1)!!` for even `n`, zero for odd `n`.
pub fn double_factorial_pairs(n: u32) -> BigInt {
    if n % 2 == 1 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    let mut k = n as i64 - 1;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Serialize, Deserialize)]
struct RatJson {
    num: String,
    den: String,
}

pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    RatJson { num: r.numer().to_string(), den: r.denom().to_string() }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
    let j = RatJson::deserialize(d)?;
    let num: BigInt = j.num.parse().map_err(serde::de::Error::custom)?;
    let den: BigInt = j.den.parse().map_err(serde::de::Error::custom)?;
    if den.is_zero() {
        return Err(serde::de::Error::custom("zero denominator"));
    }
    Ok(Rat::new(num, den))
}

/// Wrapper giving [`Rat`] a serde implementation where a field attribute is unavailable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatSer(#[serde(with = "crate::rational")] pub Rat);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_pairs(2), BigInt::from(1));
        assert_eq!(double_factorial_pairs(6), BigInt::from(15));
        assert_eq!(double_factorial_pairs(12), BigInt::from(10395));
        assert_eq!(double_factorial_pairs(5), BigInt::zero());
    }

    #[test]
    fn json_roundtrip() {
        let r = RatSer(frac(-18, 4));
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"num":"-9","den":"2"}"#);
        let back: RatSer = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
