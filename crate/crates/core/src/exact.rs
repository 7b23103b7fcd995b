//! Exact rational helpers on top of `num`'s big integers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serializer;

pub type Rational = BigRational;

pub fn int(x: u64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

pub fn frac(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(x: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(x.clone()))
}

pub fn pow(x: &Rational, e: u64) -> Rational {
    let mut acc = Rational::one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// Natural log of a positive big integer, valid far beyond the f64 range.
pub fn ln_bigint(x: &BigInt) -> f64 {
    assert!(x > &BigInt::zero(), "log of non-positive integer");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln(x: &Rational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| ln(x).exp())
}

/// `num/den` text form used in JSON and CSV output.
pub fn display(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Serializes a rational as its `num/den` string.
pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&display(x))
}
