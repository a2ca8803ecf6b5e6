//! Exact decimal numbers for thresholds and data facts.
//!
//! Values are held as arbitrary-precision rationals so that comparisons made
//! during entailment never depend on binary floating-point rounding.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::{BigRational, Integer, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a decimal literal: {0:?}")]
pub struct ParseDecimalError(pub String);

/// An exact decimal rational such as `29999.5` or `-1.25e3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(BigRational);

impl Decimal {
    pub fn from_integer(value: i64) -> Self {
        Decimal(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Nearest `f64`; used only when exact values leave the entailment layer.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl FromStr for Decimal {
    type Err = ParseDecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let text = s.trim();
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(pos) => {
                let exp: i32 = text[pos + 1..].parse().map_err(|_| err())?;
                (&text[..pos], exp)
            }
            None => (text, 0),
        };
        let (negative, unsigned) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = match unsigned.split_once('.') {
            Some((i, f)) => (i, f),
            None => (unsigned, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if unsigned.ends_with('.') || unsigned.starts_with('.') {
            return Err(err());
        }
        if exponent.unsigned_abs() > 4096 {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: BigInt = digits.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let scale = exponent - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            BigRational::from_integer(numer * num::pow(ten, scale as usize))
        } else {
            BigRational::new(numer, num::pow(ten, scale.unsigned_abs() as usize))
        };
        Ok(Decimal(value))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = &self.0;
        if value.is_negative() {
            write!(f, "-")?;
        }
        let abs = value.abs();
        let (int_part, mut rem) = abs.numer().div_rem(abs.denom());
        write!(f, "{int_part}")?;
        if rem.is_zero() {
            return Ok(());
        }
        // Denominators come from powers of ten, so the expansion terminates.
        // Non-terminating values (never produced by parsing) are cut at 64 digits.
        write!(f, ".")?;
        let ten = BigInt::from(10);
        let denom = abs.denom();
        for _ in 0..64 {
            rem *= &ten;
            let (digit, r) = rem.div_rem(denom);
            write!(f, "{digit}")?;
            rem = r;
            if rem.is_zero() {
                break;
            }
        }
        Ok(())
    }
}

impl Default for Decimal {
    fn default() -> Self {
        Decimal(BigRational::zero())
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<BigRational> for Decimal {
    fn from(value: BigRational) -> Self {
        Decimal(value)
    }
}
