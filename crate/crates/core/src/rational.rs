//! Exact rationals in the unit interval and the bound representation of
//! upward-closed indexed edge families.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number, always kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(Rational64);

impl Rat {
    pub const ZERO: Rat = Rat(Rational64::new_raw(0, 1));
    pub const ONE: Rat = Rat(Rational64::new_raw(1, 1));

    pub fn new(numer: i64, denom: i64) -> Result<Rat, Error> {
        if denom == 0 {
            return Err(Error::Rational(format!("{numer}/0")));
        }
        Ok(Rat(Rational64::new(numer, denom)))
    }

    /// Panics on a zero denominator; for literals in code and tests.
    pub fn frac(numer: i64, denom: i64) -> Rat {
        Rat::new(numer, denom).expect("nonzero denominator")
    }

    pub fn int(n: i64) -> Rat {
        Rat(Rational64::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn in_unit_interval(&self) -> bool {
        !self.0.is_negative() && self.0 <= Rational64::one()
    }

    /// `min(self + other, 1)`.
    pub fn capped_add(self, other: Rat) -> Rat {
        let s = self.0 + other.0;
        if s > Rational64::one() {
            Rat::ONE
        } else {
            Rat(s)
        }
    }

    pub fn abs_diff(self, other: Rat) -> Rat {
        Rat((self.0 - other.0).abs())
    }

    pub fn checked_sub(self, other: Rat) -> Rat {
        Rat(self.0 - other.0)
    }

    pub fn half(self) -> Rat {
        Rat(self.0 / Rational64::from_integer(2))
    }

    pub fn plus(self, other: Rat) -> Rat {
        Rat(self.0 + other.0)
    }

    /// Parses `p/q`, `p`, and requires the value to lie in `[0, 1]`.
    pub fn parse_unit(s: &str) -> Result<Rat, Error> {
        let r: Rat = s.parse()?;
        if !r.in_unit_interval() {
            return Err(Error::Rational(format!("{s} is outside [0,1]")));
        }
        Ok(r)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat, Error> {
        let s = s.trim();
        let bad = || Error::Rational(s.to_string());
        match s.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                Rat::new(p, q)
            }
            None => Ok(Rat::int(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Canonical representative of an upward-closed family of indexed edges.
///
/// A closed bound `v` stands for `{q | q >= v}`, an open bound for
/// `{q | q > v}`. Smaller families are weaker; the archimedean closure turns
/// an open bound into the closed bound with the same value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bound {
    pub value: Rat,
    pub strict: bool,
}

impl Bound {
    pub fn closed(value: Rat) -> Bound {
        Bound { value, strict: false }
    }

    pub fn open(value: Rat) -> Bound {
        Bound { value, strict: true }
    }

    /// A bound is empty when it describes no index in `[0, 1]`.
    pub fn is_empty(&self) -> bool {
        self.strict && self.value >= Rat::ONE
    }

    /// Whether every index of `other` is also an index of `self`.
    pub fn implies(&self, other: &Bound) -> bool {
        match self.value.cmp(&other.value) {
            Ordering::Less => true,
            Ordering::Equal => !self.strict || other.strict,
            Ordering::Greater => false,
        }
    }

    /// Whether the closed index `q` belongs to the family.
    pub fn admits(&self, q: Rat) -> bool {
        self.implies(&Bound::closed(q))
    }

    /// The stronger of two bounds.
    pub fn meet(self, other: Bound) -> Bound {
        if self.implies(&other) {
            self
        } else {
            other
        }
    }

    /// The weaker of two bounds.
    pub fn join(self, other: Bound) -> Bound {
        if self.implies(&other) {
            other
        } else {
            self
        }
    }

    /// Family of capped sums `min(a + b, 1)`.
    pub fn capped_add(self, other: Bound) -> Bound {
        let s = self.value.plus(other.value);
        if s >= Rat::ONE {
            Bound::closed(Rat::ONE)
        } else {
            Bound { value: s, strict: self.strict || other.strict }
        }
    }
}

impl From<Rat> for Bound {
    fn from(r: Rat) -> Bound {
        Bound::closed(r)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strict {
            write!(f, ">{}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Bound, Error> {
        let s = s.trim();
        let (strict, rest) = match s.strip_prefix('>') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let value = Rat::parse_unit(rest)?;
        let b = Bound { value, strict };
        if b.is_empty() {
            return Err(Error::Rational(format!("{s} denotes an empty family")));
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_lowest_terms() {
        assert_eq!(Rat::frac(2, 4).to_string(), "1/2");
        assert_eq!(Rat::frac(0, 7).to_string(), "0");
        assert_eq!(Rat::frac(3, 3).to_string(), "1");
        assert_eq!("6/8".parse::<Rat>().unwrap(), Rat::frac(3, 4));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Rat::parse_unit("3/2").is_err());
        assert!(Rat::parse_unit("-1/2").is_err());
        assert!(Rat::parse_unit("1/0").is_err());
        assert!(">1".parse::<Bound>().is_err());
    }

    #[test]
    fn capped_sums() {
        assert_eq!(Rat::frac(2, 5).capped_add(Rat::frac(1, 2)), Rat::frac(9, 10));
        assert_eq!(Rat::frac(3, 4).capped_add(Rat::frac(1, 2)), Rat::ONE);
        let b = Bound::open(Rat::frac(1, 4)).capped_add(Bound::closed(Rat::frac(1, 4)));
        assert_eq!(b, Bound::open(Rat::frac(1, 2)));
        let c = Bound::open(Rat::frac(1, 2)).capped_add(Bound::closed(Rat::frac(1, 2)));
        assert_eq!(c, Bound::closed(Rat::ONE));
    }

    #[test]
    fn implication_order() {
        let half = Rat::frac(1, 2);
        assert!(Bound::closed(half).implies(&Bound::open(half)));
        assert!(!Bound::open(half).implies(&Bound::closed(half)));
        assert!(Bound::open(Rat::frac(1, 4)).implies(&Bound::closed(half)));
        assert!(Bound::open(half).admits(Rat::frac(3, 4)));
        assert!(!Bound::open(half).admits(half));
    }
}
