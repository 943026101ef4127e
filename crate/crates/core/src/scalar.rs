use crate::config::Config;
use crate::dense::DensePAdic;
use crate::error::{Error, Result};
use crate::sparse::SparsePAdic;
use crate::valuation::ExtValuation;
use num::bigint::BigInt;
use num::{Signed, Zero};

/// A scalar in either representation. Dense scalars carry capped digit
/// expansions (exact when built from a rational); sparse scalars keep the
/// support exponents of a {0,1}-digit number symbolically.
#[derive(Clone, Debug)]
pub enum PAdicScalar {
    Dense(DensePAdic),
    Sparse(SparsePAdic),
}

impl PAdicScalar {
    pub fn from_integer(config: &Config, n: impl Into<BigInt>) -> Self {
        PAdicScalar::Dense(DensePAdic::from_integer(config, n))
    }

    pub fn from_rational(config: &Config, num: BigInt, den: BigInt) -> Result<Self> {
        Ok(PAdicScalar::Dense(DensePAdic::from_rational(config, num, den)?))
    }

    pub fn lebras(config: &Config, p: u64, depth: usize) -> Result<Self> {
        if p != config.prime {
            return Err(Error::PrimeMismatch(config.prime, p));
        }
        Ok(PAdicScalar::Sparse(SparsePAdic::lebras(p, depth)?))
    }

    /// Parse a scalar literal:
    /// "rat:<num>/<den>", "int:<n>", "sparse:[k1,k2,...]",
    /// "lebras:<p>,<depth>", "digits:v=<v>;[d0,d1,...]".
    pub fn parse(config: &Config, literal: &str) -> Result<Self> {
        let lit = literal.trim();
        if let Some(body) = lit.strip_prefix("rat:") {
            let (num, den) = body
                .split_once('/')
                .ok_or_else(|| Error::Parse(format!("rat literal needs '/': {lit}")))?;
            let num: BigInt = num.trim().parse().map_err(|_| Error::Parse(format!("bad numerator: {num}")))?;
            let den: BigInt = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator: {den}")))?;
            return Self::from_rational(config, num, den);
        }
        if let Some(body) = lit.strip_prefix("int:") {
            let n: BigInt = body
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer: {body}")))?;
            return Ok(Self::from_integer(config, n));
        }
        if let Some(body) = lit.strip_prefix("sparse:") {
            let inner = body
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("sparse literal needs [..]: {lit}")))?;
            let mut exps = Vec::new();
            for part in inner.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let k: BigInt = part.parse().map_err(|_| Error::Parse(format!("bad exponent: {part}")))?;
                exps.push(k);
            }
            return Ok(PAdicScalar::Sparse(SparsePAdic::from_support(config.prime, exps)?));
        }
        if let Some(body) = lit.strip_prefix("lebras:") {
            let (p, depth) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("lebras literal needs '<p>,<depth>': {lit}")))?;
            let p: u64 = p.trim().parse().map_err(|_| Error::Parse(format!("bad prime: {p}")))?;
            let depth: usize = depth
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad depth: {depth}")))?;
            return Self::lebras(config, p, depth);
        }
        if let Some(body) = lit.strip_prefix("digits:") {
            let (v, ds) = body
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("digits literal needs ';': {lit}")))?;
            let v = v
                .trim()
                .strip_prefix("v=")
                .ok_or_else(|| Error::Parse(format!("digits literal needs 'v=': {lit}")))?;
            let v: BigInt = v.trim().parse().map_err(|_| Error::Parse(format!("bad valuation: {v}")))?;
            let inner = ds
                .trim()
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::Parse(format!("digits literal needs [..]: {lit}")))?;
            let mut digits = Vec::new();
            for part in inner.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let d: u64 = part.parse().map_err(|_| Error::Parse(format!("bad digit: {part}")))?;
                digits.push(d);
            }
            return Ok(PAdicScalar::Dense(DensePAdic::from_digits(config, v, &digits)?));
        }
        Err(Error::Parse(format!("unknown scalar literal: {lit}")))
    }

    pub fn prime(&self) -> u64 {
        match self {
            PAdicScalar::Dense(d) => d.prime(),
            PAdicScalar::Sparse(s) => s.prime(),
        }
    }

    pub fn is_lebras(&self) -> bool {
        matches!(self, PAdicScalar::Sparse(s) if s.has_infinite_tail())
    }

    pub fn valuation(&self) -> ExtValuation {
        match self {
            PAdicScalar::Dense(d) => d.valuation(),
            PAdicScalar::Sparse(s) => s.valuation(),
        }
    }

    /// v(lambda - j) under the reduction cap B.
    pub fn valuation_of_difference(&self, j: &BigInt, b: u64) -> ExtValuation {
        match self {
            PAdicScalar::Dense(d) => d.valuation_of_difference(j, b),
            PAdicScalar::Sparse(s) => s.valuation_of_difference(j),
        }
    }

    /// Exact integer value when the scalar is a known integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        match self {
            PAdicScalar::Dense(d) => d.as_integer(),
            PAdicScalar::Sparse(s) => {
                if s.has_infinite_tail() {
                    return None;
                }
                let cfg = Config { prime: s.prime(), precision: 64 };
                s.to_dense(&cfg).ok().and_then(|d| d.as_integer())
            }
        }
    }

    /// True when lambda is exactly a nonnegative integer.
    pub fn is_nonneg_integer(&self) -> bool {
        self.as_integer().map_or(false, |n| !n.is_negative())
    }

    /// lambda - n.
    pub fn shift(&self, n: &BigInt, config: &Config) -> Result<PAdicScalar> {
        match self {
            PAdicScalar::Dense(d) => {
                let nn = DensePAdic::from_integer(config, n.clone());
                Ok(PAdicScalar::Dense(d.sub(&nn)?))
            }
            PAdicScalar::Sparse(s) => {
                if n.is_zero() {
                    return Ok(self.clone());
                }
                Ok(PAdicScalar::Sparse(s.sub_integer(n)?))
            }
        }
    }

    /// Dense view; fails for scalars whose support cannot be expanded.
    pub fn to_dense(&self, config: &Config) -> Result<DensePAdic> {
        match self {
            PAdicScalar::Dense(d) => {
                if d.prime() != config.prime {
                    return Err(Error::PrimeMismatch(config.prime, d.prime()));
                }
                Ok(d.clone())
            }
            PAdicScalar::Sparse(s) => s.to_dense(config),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PAdicScalar::Dense(d) => match d.exact_rational() {
                Some(r) => format!("{r}"),
                None => d.describe(),
            },
            PAdicScalar::Sparse(s) => {
                let supp: Vec<String> = s.support().iter().map(|k| k.to_string()).collect();
                let tail = if s.has_infinite_tail() { ", ..." } else { "" };
                format!("sum p^k, k in {{{}{}}}", supp.join(", "), tail)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u64) -> Config {
        Config::new(p, 128).unwrap()
    }

    #[test]
    fn parse_all_forms() {
        let c = cfg(5);
        let r = PAdicScalar::parse(&c, "rat:1/5").unwrap();
        assert_eq!(r.valuation(), ExtValuation::finite(-1));
        let i = PAdicScalar::parse(&c, "int:-7").unwrap();
        assert_eq!(i.as_integer(), Some(BigInt::from(-7)));
        let s = PAdicScalar::parse(&c, "sparse:[1, 3, 9]").unwrap();
        assert_eq!(s.valuation(), ExtValuation::finite(1));
        let c2 = cfg(2);
        let l = PAdicScalar::parse(&c2, "lebras:2,3").unwrap();
        assert!(l.is_lebras());
        let d = PAdicScalar::parse(&c, "digits:v=-1;[2,1,1]").unwrap();
        assert_eq!(d.valuation(), ExtValuation::finite(-1));
    }

    #[test]
    fn parse_rejects_garbage() {
        let c = cfg(3);
        assert!(PAdicScalar::parse(&c, "rat:1").is_err());
        assert!(PAdicScalar::parse(&c, "frob:9").is_err());
        assert!(PAdicScalar::parse(&c, "lebras:2,3").is_err()); // prime mismatch
        assert!(PAdicScalar::parse(&c, "digits:v=0;[5]").is_err()); // digit >= p
    }

    #[test]
    fn nonneg_integer_detection() {
        let c = cfg(2);
        assert!(PAdicScalar::parse(&c, "int:5").unwrap().is_nonneg_integer());
        assert!(PAdicScalar::parse(&c, "int:0").unwrap().is_nonneg_integer());
        assert!(!PAdicScalar::parse(&c, "int:-1").unwrap().is_nonneg_integer());
        assert!(!PAdicScalar::parse(&c, "rat:1/3").unwrap().is_nonneg_integer());
        // sparse 2^1 + 2^3 = 10, a nonnegative integer
        assert!(PAdicScalar::parse(&c, "sparse:[1,3]").unwrap().is_nonneg_integer());
        assert!(!PAdicScalar::parse(&c, "lebras:2,4").unwrap().is_nonneg_integer());
    }

    #[test]
    fn shift_dense_and_sparse() {
        let c = cfg(2);
        let l = PAdicScalar::parse(&c, "lebras:2,3").unwrap();
        let s = l.shift(&BigInt::from(4), &c).unwrap();
        assert_eq!(s.valuation(), ExtValuation::finite(16));
        let r = PAdicScalar::parse(&cfg(3), "rat:1/2").unwrap();
        let r1 = r.shift(&BigInt::from(1), &cfg(3)).unwrap();
        if let PAdicScalar::Dense(d) = r1 {
            assert_eq!(
                d.exact_rational().unwrap(),
                &num::BigRational::new(BigInt::from(-1), BigInt::from(2))
            );
        } else {
            panic!("expected dense");
        }
    }
}
