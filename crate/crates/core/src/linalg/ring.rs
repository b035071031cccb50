use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every matrix entry is stored as an exact rational; the ring decides which
/// values are legal and how sums and products are normalized.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn big(v: BigInt) -> Scalar {
    BigRational::from_integer(v)
}

/// Coefficient ring of a module. Only the three desk-computable instances.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Ring {
    Integers,
    Rationals,
    IntegersMod(u64),
}

impl Ring {
    pub fn modulus(&self) -> Option<u64> {
        match self {
            Ring::IntegersMod(m) => Some(*m),
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            Ring::Integers => false,
            Ring::Rationals => true,
            Ring::IntegersMod(m) => is_prime(*m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Ring::IntegersMod(m) if *m < 2 => Err(Error::InvalidRing(format!("Z/{m}: modulus must be at least 2"))),
            _ => Ok(()),
        }
    }

    /// Canonical representative of `x`, or an error if `x` is not an element.
    pub fn element(&self, x: Scalar) -> Result<Scalar> {
        match self {
            Ring::Rationals => Ok(x),
            Ring::Integers => {
                if x.is_integer() {
                    Ok(x)
                } else {
                    Err(Error::NotInRing { value: x.to_string(), ring: self.clone() })
                }
            }
            Ring::IntegersMod(m) => {
                if !x.is_integer() {
                    return Err(Error::NotInRing { value: x.to_string(), ring: self.clone() });
                }
                Ok(big(x.to_integer().mod_floor(&BigInt::from(*m))))
            }
        }
    }

    /// Reduces a value already known to be integral (or rational over Q).
    pub(crate) fn reduce(&self, x: Scalar) -> Scalar {
        match self {
            Ring::IntegersMod(m) => big(x.to_integer().mod_floor(&BigInt::from(*m))),
            _ => x,
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a + b)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.reduce(-a)
    }

    pub fn is_unit(&self, a: &Scalar) -> bool {
        match self {
            Ring::Integers => a.abs().is_one(),
            Ring::Rationals => !a.is_zero(),
            Ring::IntegersMod(m) => a.to_integer().gcd(&BigInt::from(*m)).is_one(),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if !self.is_unit(a) {
            return None;
        }
        match self {
            Ring::Integers | Ring::Rationals => Some(a.recip()),
            Ring::IntegersMod(m) => {
                let m = BigInt::from(*m);
                let e = a.to_integer().extended_gcd(&m);
                Some(big(e.x.mod_floor(&m)))
            }
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Rationals => write!(f, "Q"),
            Ring::IntegersMod(m) => write!(f, "Z/{m}"),
        }
    }
}

impl FromStr for Ring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let ring = match s {
            "Z" => Ring::Integers,
            "Q" => Ring::Rationals,
            _ => {
                let m = s
                    .strip_prefix("Z/")
                    .and_then(|m| m.parse::<u64>().ok())
                    .ok_or_else(|| Error::InvalidRing(format!("unrecognized ring '{s}' (expected Z, Q or Z/m)")))?;
                Ring::IntegersMod(m)
            }
        };
        ring.validate()?;
        Ok(ring)
    }
}

impl TryFrom<String> for Ring {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Ring> for String {
    fn from(r: Ring) -> String {
        r.to_string()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parses "12", "-3" or "3/2".
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact number: '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(big(s.parse().map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rings() {
        assert_eq!("Z".parse::<Ring>().unwrap(), Ring::Integers);
        assert_eq!("Z/6".parse::<Ring>().unwrap(), Ring::IntegersMod(6));
        assert!("Z/1".parse::<Ring>().is_err());
        assert!("R".parse::<Ring>().is_err());
    }

    #[test]
    fn modular_inverse() {
        let r = Ring::IntegersMod(10);
        assert_eq!(r.inv(&int(3)), Some(int(7)));
        assert_eq!(r.inv(&int(4)), None);
        assert_eq!(r.element(int(-1)).unwrap(), int(9));
    }

    #[test]
    fn integers_reject_fractions() {
        assert!(Ring::Integers.element(parse_scalar("3/2").unwrap()).is_err());
        assert!(Ring::Rationals.element(parse_scalar("3/2").unwrap()).is_ok());
    }
}
