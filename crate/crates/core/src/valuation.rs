use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;

/// A precision-honest valuation: either an exact (arbitrary-size) integer,
/// a lower bound "the valuation is >= B but the exact value is unknown at
/// the current precision", or +infinity for the exact zero element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtValuation {
    Finite(BigInt),
    LowerBound(BigInt),
    PlusInfinity,
}

impl ExtValuation {
    pub fn finite<T: Into<BigInt>>(v: T) -> Self {
        ExtValuation::Finite(v.into())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ExtValuation::Finite(_))
    }

    pub fn exact(&self) -> Option<&BigInt> {
        match self {
            ExtValuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Every value the valuation could take is >= this bound.
    pub fn floor_bound(&self) -> Option<&BigInt> {
        match self {
            ExtValuation::Finite(v) | ExtValuation::LowerBound(v) => Some(v),
            ExtValuation::PlusInfinity => None,
        }
    }

    /// Valuation of a sum/product accumulator: exactness is contagious only
    /// while both sides are exact, +infinity absorbs (exact zero factor).
    pub fn add(&self, other: &ExtValuation) -> ExtValuation {
        use ExtValuation::*;
        match (self, other) {
            (PlusInfinity, _) | (_, PlusInfinity) => PlusInfinity,
            (Finite(a), Finite(b)) => Finite(a + b),
            (Finite(a), LowerBound(b))
            | (LowerBound(a), Finite(b))
            | (LowerBound(a), LowerBound(b)) => LowerBound(a + b),
        }
    }

    /// True if the valuation is provably >= `bound`.
    pub fn provably_at_least(&self, bound: &BigInt) -> bool {
        match self {
            ExtValuation::Finite(v) | ExtValuation::LowerBound(v) => v >= bound,
            ExtValuation::PlusInfinity => true,
        }
    }
}

impl fmt::Display for ExtValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValuation::Finite(v) => write!(f, "{v}"),
            ExtValuation::LowerBound(b) => write!(f, ">={b}"),
            ExtValuation::PlusInfinity => write!(f, "+inf"),
        }
    }
}

impl Serialize for ExtValuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An exponent that is either known exactly or only bounded from above
/// (the companion of [`ExtValuation::LowerBound`]: subtracting a lower
/// bound yields an upper bound).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExponentBound {
    Exact(BigInt),
    AtMost(BigInt),
}

impl ExponentBound {
    pub fn is_negative(&self) -> bool {
        match self {
            ExponentBound::Exact(v) => v.is_negative(),
            ExponentBound::AtMost(b) => b.is_negative(),
        }
    }

    /// `self` is provably strictly less than `other`.
    pub fn provably_less(&self, other: &ExponentBound) -> bool {
        match (self, other) {
            (ExponentBound::Exact(a), ExponentBound::Exact(b)) => a < b,
            (ExponentBound::AtMost(a), ExponentBound::Exact(b)) => a < b,
            // `other` only carries an upper bound; nothing below it is provable.
            (_, ExponentBound::AtMost(_)) => false,
        }
    }
}

impl fmt::Display for ExponentBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentBound::Exact(v) => write!(f, "{v}"),
            ExponentBound::AtMost(b) => write!(f, "<={b}"),
        }
    }
}

impl Serialize for ExponentBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// p-adic valuation of a nonzero integer; None for zero.
pub fn vp_int(x: &BigInt, p: u64) -> Option<BigInt> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut m = x.abs();
    let mut v = BigInt::zero();
    // Square the divisor while it still divides, then fall back to single steps.
    let mut pow = p.clone();
    let mut step = BigInt::one();
    loop {
        let (q, r) = num::Integer::div_rem(&m, &pow);
        if r.is_zero() {
            m = q;
            v += &step;
            let next = &pow * &pow;
            if next <= m {
                pow = next;
                step *= 2;
            }
        } else if step.is_one() {
            break;
        } else {
            pow = p.clone();
            step = BigInt::one();
        }
    }
    Some(v)
}

/// Smallest power p^e as BigInt (e must be modest; callers guard size).
pub fn pow_p(p: u64, e: u64) -> BigInt {
    BigInt::from(p).pow(e as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vp_basic() {
        assert_eq!(vp_int(&BigInt::from(12), 2), Some(BigInt::from(2)));
        assert_eq!(vp_int(&BigInt::from(-243), 3), Some(BigInt::from(5)));
        assert_eq!(vp_int(&BigInt::from(7), 5), Some(BigInt::zero()));
        assert_eq!(vp_int(&BigInt::zero(), 2), None);
        let big = BigInt::from(2).pow(100) * 3;
        assert_eq!(vp_int(&big, 2), Some(BigInt::from(100)));
    }

    #[test]
    fn ext_valuation_add() {
        let f = ExtValuation::finite(3);
        let lb = ExtValuation::LowerBound(BigInt::from(10));
        assert_eq!(f.add(&f), ExtValuation::finite(6));
        assert_eq!(f.add(&lb), ExtValuation::LowerBound(BigInt::from(13)));
        assert_eq!(f.add(&ExtValuation::PlusInfinity), ExtValuation::PlusInfinity);
    }

    #[test]
    fn exponent_bound_order() {
        let e = |v: i64| ExponentBound::Exact(BigInt::from(v));
        let m = |v: i64| ExponentBound::AtMost(BigInt::from(v));
        assert!(e(-5).provably_less(&e(0)));
        assert!(m(-100).provably_less(&e(-50)));
        assert!(!e(-100).provably_less(&m(-50)));
        assert!(m(-1).is_negative());
        assert!(!e(0).is_negative());
    }
}
