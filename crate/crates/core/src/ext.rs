//! Extended reals for ratios whose denominator can vanish.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A ratio value that stays total on degenerate inputs.
///
/// Serialized as a plain number when finite, otherwise as one of the strings
/// `"inf"`, `"-inf"` or `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
    Undefined,
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Undefined => ExtReal::Undefined,
        }
    }
}

impl ExtReal {
    /// `num / den` with 0/0 mapped to `Undefined` and x/0 to a signed infinity.
    pub fn ratio(num: f64, den: f64) -> Self {
        if den == 0.0 {
            if num == 0.0 {
                ExtReal::Undefined
            } else if num > 0.0 {
                ExtReal::PosInf
            } else {
                ExtReal::NegInf
            }
        } else {
            ExtReal::from_f64(num / den)
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x.is_nan() {
            ExtReal::Undefined
        } else if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// IEEE view: infinities map to `±inf`, `Undefined` to NaN.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Undefined => f64::NAN,
        }
    }

    pub fn is_defined(self) -> bool {
        !matches!(self, ExtReal::Undefined)
    }

    pub fn abs(self) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x.abs()),
            ExtReal::NegInf | ExtReal::PosInf => ExtReal::PosInf,
            ExtReal::Undefined => ExtReal::Undefined,
        }
    }

    /// Round a finite value to `digits` significant digits.
    pub fn round_sig(self, digits: usize) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(round_sig(x, digits)),
            other => other,
        }
    }

    /// Fixed-point rendering used by the table writers.
    pub fn fixed(self, decimals: usize) -> String {
        match self {
            ExtReal::Finite(x) => {
                let s = format!("{x:.decimals$}");
                // no "-0.00"
                if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
                    s[1..].to_string()
                } else {
                    s
                }
            }
            ExtReal::PosInf => "inf".to_string(),
            ExtReal::NegInf => "-inf".to_string(),
            ExtReal::Undefined => "undef".to_string(),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => match f.precision() {
                Some(p) => write!(f, "{x:.p$}"),
                None => write!(f, "{x}"),
            },
            ExtReal::PosInf => f.write_str("inf"),
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Undefined => f.write_str("undefined"),
        }
    }
}

pub(crate) fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let prec = digits.saturating_sub(1);
    format!("{x:.prec$e}").parse().unwrap_or(x)
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => serializer.serialize_str("inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
            ExtReal::Undefined => serializer.serialize_str("undefined"),
        }
    }
}

struct ExtRealVisitor;

impl Visitor<'_> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\", \"undefined\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
        Ok(ExtReal::from_f64(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
        Ok(ExtReal::Finite(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
        Ok(ExtReal::Finite(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
        match v {
            "inf" => Ok(ExtReal::PosInf),
            "-inf" => Ok(ExtReal::NegInf),
            "undefined" => Ok(ExtReal::Undefined),
            other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtRealVisitor)
    }
}
