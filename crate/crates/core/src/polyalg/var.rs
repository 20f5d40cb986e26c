use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exponent of a single variable. Only [`Var::T`] may carry non-integer or
/// negative exponents.
pub type Exponent = Ratio<i64>;

/// The fixed variable alphabet. Declaration order is the canonical term order.
///
/// `X(0)`/`X(1)` print as `x`/`y`; higher map coordinates as `x3`, `x4`, ….
/// `S(0)` is the flow parameter `s`; `S(1)`, `S(2)` are the `s1`, `s2` used by
/// group-law identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    Alpha(u8),
    X(u8),
    T,
    S(u8),
    Xi,
}

impl Var {
    pub fn x() -> Self {
        Var::X(0)
    }

    pub fn y() -> Self {
        Var::X(1)
    }

    pub fn s() -> Self {
        Var::S(0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Alpha(i) => write!(f, "a{}", u32::from(*i) + 1),
            Var::X(0) => f.write_str("x"),
            Var::X(1) => f.write_str("y"),
            Var::X(i) => write!(f, "x{}", u32::from(*i) + 1),
            Var::T => f.write_str("t"),
            Var::S(0) => f.write_str("s"),
            Var::S(i) => write!(f, "s{i}"),
            Var::Xi => f.write_str("xi"),
        }
    }
}

impl FromStr for Var {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let index = |digits: &str| -> Result<u8, String> {
            let v: u8 = digits.parse().map_err(|_| format!("bad variable `{s}`"))?;
            if v == 0 {
                return Err(format!("variable indices start at 1: `{s}`"));
            }
            Ok(v - 1)
        };
        match s {
            "x" => Ok(Var::X(0)),
            "y" => Ok(Var::X(1)),
            "t" => Ok(Var::T),
            "s" => Ok(Var::S(0)),
            "xi" => Ok(Var::Xi),
            "a" | "alpha" => Ok(Var::Alpha(0)),
            _ => {
                if let Some(rest) = s.strip_prefix("alpha") {
                    Ok(Var::Alpha(index(rest)?))
                } else if let Some(rest) = s.strip_prefix('a') {
                    Ok(Var::Alpha(index(rest)?))
                } else if let Some(rest) = s.strip_prefix('x') {
                    Ok(Var::X(index(rest)?))
                } else if let Some(rest) = s.strip_prefix('s') {
                    let v: u8 = rest.parse().map_err(|_| format!("bad variable `{s}`"))?;
                    Ok(Var::S(v))
                } else {
                    Err(format!("unknown variable `{s}`"))
                }
            }
        }
    }
}

/// Degree of a polynomial in one variable; the zero polynomial has degree
/// [`Degree::NegInfinity`], which orders below every finite degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(Exponent),
}

impl Degree {
    pub fn finite(self) -> Option<Exponent> {
        match self {
            Degree::Finite(e) => Some(e),
            Degree::NegInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Degree::Finite(_))
    }

    pub fn shift(self, by: Exponent) -> Self {
        match self {
            Degree::Finite(e) => Degree::Finite(e + by),
            Degree::NegInfinity => Degree::NegInfinity,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in [
            Var::Alpha(0),
            Var::Alpha(2),
            Var::X(0),
            Var::X(1),
            Var::X(3),
            Var::T,
            Var::S(0),
            Var::S(1),
            Var::S(2),
            Var::Xi,
        ] {
            assert_eq!(v.to_string().parse::<Var>().unwrap(), v);
        }
        assert_eq!("x1".parse::<Var>().unwrap(), Var::X(0));
        assert_eq!("x2".parse::<Var>().unwrap(), Var::X(1));
        assert!("q".parse::<Var>().is_err());
    }

    #[test]
    fn neg_infinity_is_below_everything() {
        assert!(Degree::NegInfinity < Degree::Finite(Exponent::from_integer(-1000)));
    }
}
