use crate::config::Config;
use crate::error::{Error, Result};
use crate::valuation::{vp_int, ExtValuation};
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

/// Capped-precision p-adic scalar in relative-precision form: p^v * u where
/// the unit u is known modulo p^prec. Scalars built from exact rationals
/// keep the rational alongside, so arithmetic on them never loses digits;
/// scalars built from raw digits propagate precision honestly.
#[derive(Clone, Debug)]
pub struct DensePAdic {
    p: u64,
    cap: usize,
    repr: Option<Unit>,
    exact: Option<BigRational>,
}

#[derive(Clone, Debug)]
struct Unit {
    val: BigInt,
    /// unit part, 0 < unit < p^prec, not divisible by p
    unit: BigUint,
    prec: usize,
}

fn pmod(p: u64, e: usize) -> BigUint {
    BigUint::from(p).pow(e as u32)
}

fn modinv(a: &BigUint, modulus: &BigUint) -> BigUint {
    // extended Euclid over BigInt
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = r1;
        r1 = r2;
        let t2 = &t0 - &q * &t1;
        t0 = t1;
        t1 = t2;
    }
    debug_assert!(r0.is_one(), "inverse of a non-unit");
    let t = t0.mod_floor(&m);
    t.to_biguint().unwrap()
}

impl DensePAdic {
    pub fn zero(config: &Config) -> Self {
        DensePAdic {
            p: config.prime,
            cap: config.precision,
            repr: None,
            exact: Some(BigRational::zero()),
        }
    }

    pub fn from_integer(config: &Config, n: impl Into<BigInt>) -> Self {
        Self::from_rational(config, n.into(), BigInt::one()).expect("unit denominator")
    }

    /// Hensel-style base-p expansion of num/den.
    pub fn from_rational(config: &Config, num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let exact = BigRational::new(num, den);
        Ok(Self::from_exact(config, exact))
    }

    fn from_exact(config: &Config, exact: BigRational) -> Self {
        let p = config.prime;
        let cap = config.precision;
        if exact.is_zero() {
            return DensePAdic { p, cap, repr: None, exact: Some(exact) };
        }
        let vn = vp_int(exact.numer(), p).unwrap();
        let vd = vp_int(exact.denom(), p).unwrap();
        let val = &vn - &vd;
        let modulus = pmod(p, cap);
        let pv_n = BigInt::from(p).pow(u32::try_from(&vn).expect("numerator valuation fits u32"));
        let pv_d = BigInt::from(p).pow(u32::try_from(&vd).expect("denominator valuation fits u32"));
        let un = (exact.numer() / pv_n).mod_floor(&BigInt::from(modulus.clone()));
        let ud = (exact.denom() / pv_d).mod_floor(&BigInt::from(modulus.clone()));
        let un = un.to_biguint().unwrap();
        let ud = ud.to_biguint().unwrap();
        let unit = (un * modinv(&ud, &modulus)) % &modulus;
        DensePAdic {
            p,
            cap,
            repr: Some(Unit { val, unit, prec: cap }),
            exact: Some(exact),
        }
    }

    /// Raw digit constructor: value p^val * (d0 + d1 p + ...), d0 != 0.
    /// No exact rational is attached, so precision propagates honestly.
    pub fn from_digits(config: &Config, val: impl Into<BigInt>, digits: &[u64]) -> Result<Self> {
        let p = config.prime;
        if digits.is_empty() || digits[0] == 0 {
            return Err(Error::Parse("leading digit must be nonzero".into()));
        }
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::Parse(format!("digit out of range for p={p}")));
        }
        if digits.len() > config.precision {
            return Err(Error::CapExceeded(format!(
                "{} digits exceed precision cap {}",
                digits.len(),
                config.precision
            )));
        }
        let mut unit = BigUint::zero();
        for &d in digits.iter().rev() {
            unit = unit * p + d;
        }
        Ok(DensePAdic {
            p,
            cap: config.precision,
            repr: Some(Unit { val: val.into(), unit, prec: digits.len() }),
            exact: None,
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.repr.is_none()
    }

    pub fn exact_rational(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// Exact integer value, when the scalar is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.exact.as_ref()?;
        if r.denom().is_one() {
            Some(r.numer().clone())
        } else {
            None
        }
    }

    pub fn valuation(&self) -> ExtValuation {
        match &self.repr {
            None => ExtValuation::PlusInfinity,
            Some(u) => ExtValuation::Finite(u.val.clone()),
        }
    }

    pub fn known_precision(&self) -> usize {
        self.repr.as_ref().map_or(self.cap, |u| u.prec)
    }

    /// First `n` base-p digits of the unit part (padded with zeros only up
    /// to the known precision).
    pub fn digits(&self, n: usize) -> Vec<u64> {
        match &self.repr {
            None => vec![],
            Some(u) => {
                let n = n.min(u.prec);
                let mut out = Vec::with_capacity(n);
                let mut m = u.unit.clone();
                let p = BigUint::from(self.p);
                for _ in 0..n {
                    let (q, r) = m.div_rem(&p);
                    out.push(u64::try_from(&r).unwrap());
                    m = q;
                }
                out
            }
        }
    }

    fn config(&self) -> Config {
        Config { prime: self.p, precision: self.cap }
    }

    fn check_same(&self, other: &DensePAdic) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn add(&self, other: &DensePAdic) -> Result<DensePAdic> {
        self.check_same(other)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return Ok(Self::from_exact(&self.config(), a + b));
        }
        match (&self.repr, &other.repr) {
            (None, _) => Ok(other.clone()),
            (_, None) => Ok(self.clone()),
            (Some(a), Some(b)) => {
                let v = a.val.clone().min(b.val.clone());
                // absolute precision of each operand, relative to p^v
                let abs_a = &a.val - &v + BigInt::from(a.prec);
                let abs_b = &b.val - &v + BigInt::from(b.prec);
                let abs = abs_a.min(abs_b);
                let abs = usize::try_from(&abs).map_err(|_| Error::PrecisionLoss)?;
                if abs == 0 {
                    return Err(Error::PrecisionLoss);
                }
                let modulus = pmod(self.p, abs);
                let shift = |u: &Unit| -> BigUint {
                    let s = u32::try_from(&u.val - &v).expect("shift fits");
                    (&u.unit * BigUint::from(self.p).pow(s)) % &modulus
                };
                let s = (shift(a) + shift(b)) % &modulus;
                if s.is_zero() {
                    // all known digits cancelled
                    return Err(Error::PrecisionLoss);
                }
                let t = vp_int(&BigInt::from(s.clone()), self.p).unwrap();
                let t = usize::try_from(&t).unwrap();
                if t >= abs {
                    return Err(Error::PrecisionLoss);
                }
                let unit = &s / pmod(self.p, t);
                Ok(DensePAdic {
                    p: self.p,
                    cap: self.cap,
                    repr: Some(Unit { val: v + BigInt::from(t), unit, prec: abs - t }),
                    exact: None,
                })
            }
        }
    }

    pub fn neg(&self) -> DensePAdic {
        if let Some(e) = &self.exact {
            return Self::from_exact(&self.config(), -e.clone());
        }
        match &self.repr {
            None => self.clone(),
            Some(u) => {
                let modulus = pmod(self.p, u.prec);
                let unit = &modulus - (&u.unit % &modulus);
                DensePAdic {
                    p: self.p,
                    cap: self.cap,
                    repr: Some(Unit { val: u.val.clone(), unit, prec: u.prec }),
                    exact: None,
                }
            }
        }
    }

    pub fn sub(&self, other: &DensePAdic) -> Result<DensePAdic> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &DensePAdic) -> Result<DensePAdic> {
        self.check_same(other)?;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return Ok(Self::from_exact(&self.config(), a * b));
        }
        match (&self.repr, &other.repr) {
            (None, _) | (_, None) => Ok(DensePAdic {
                p: self.p,
                cap: self.cap,
                repr: None,
                exact: Some(BigRational::zero()),
            }),
            (Some(a), Some(b)) => {
                let prec = a.prec.min(b.prec);
                let modulus = pmod(self.p, prec);
                let unit = (&a.unit * &b.unit) % &modulus;
                Ok(DensePAdic {
                    p: self.p,
                    cap: self.cap,
                    repr: Some(Unit { val: &a.val + &b.val, unit, prec }),
                    exact: None,
                })
            }
        }
    }

    pub fn inv(&self) -> Result<DensePAdic> {
        if let Some(e) = &self.exact {
            if e.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(Self::from_exact(&self.config(), e.recip()));
        }
        match &self.repr {
            None => Err(Error::DivisionByZero),
            Some(u) => {
                let modulus = pmod(self.p, u.prec);
                let unit = modinv(&(&u.unit % &modulus), &modulus);
                Ok(DensePAdic {
                    p: self.p,
                    cap: self.cap,
                    repr: Some(Unit { val: -&u.val, unit, prec: u.prec }),
                    exact: None,
                })
            }
        }
    }

    pub fn div(&self, other: &DensePAdic) -> Result<DensePAdic> {
        self.mul(&other.inv()?)
    }

    pub fn add_integer(&self, n: &BigInt) -> Result<DensePAdic> {
        let other = DensePAdic::from_rational(&self.config(), n.clone(), BigInt::one())?;
        self.add(&other)
    }

    pub fn mul_integer(&self, n: &BigInt) -> Result<DensePAdic> {
        let other = DensePAdic::from_rational(&self.config(), n.clone(), BigInt::one())?;
        self.mul(&other)
    }

    /// The scalar reduced mod p^B as an integer in [0, p^B), valid only for
    /// nonnegative valuation. Returns the effective cap actually achieved.
    pub fn reduce_mod(&self, b: u64) -> Result<(BigInt, u64)> {
        match &self.repr {
            None => Ok((BigInt::zero(), b)),
            Some(u) => {
                if u.val.is_negative() {
                    return Err(Error::CapExceeded("negative valuation has no integer reduction".into()));
                }
                let v = u64::try_from(&u.val).map_err(|_| Error::CapExceeded("valuation too large".into()))?;
                let b_eff = b.min(v + u.prec as u64);
                if v >= b_eff {
                    return Ok((BigInt::zero(), b_eff));
                }
                let modulus = pmod(self.p, (b_eff - v) as usize);
                let red = (&u.unit % modulus) * BigUint::from(self.p).pow(v as u32);
                Ok((BigInt::from(red), b_eff))
            }
        }
    }

    /// v(self - j) computed by reducing mod p^B and subtracting; exact when
    /// below the (effective) cap, a lower bound otherwise, +inf on exact hit.
    pub fn valuation_of_difference(&self, j: &BigInt, b: u64) -> ExtValuation {
        // exact-zero decision is available for rational-backed scalars
        if let Some(e) = &self.exact {
            if e.denom().is_one() && e.numer() == j {
                return ExtValuation::PlusInfinity;
            }
        }
        let neg_val = match &self.repr {
            None => None,
            Some(u) if u.val.is_negative() => Some(u.val.clone()),
            _ => None,
        };
        if self.repr.is_none() {
            // 0 - j
            return match vp_int(&-j, self.p) {
                None => ExtValuation::PlusInfinity,
                Some(v) => ExtValuation::Finite(v),
            };
        }
        if let Some(v) = neg_val {
            // |lambda| > 1 while |j| <= 1: ultrametric equality
            return ExtValuation::Finite(v);
        }
        match self.reduce_mod(b) {
            Err(_) => ExtValuation::LowerBound(BigInt::zero()),
            Ok((c, b_eff)) => {
                let modulus = BigInt::from(self.p).pow(u32::try_from(b_eff).unwrap_or(u32::MAX));
                let d = (c - j).mod_floor(&modulus);
                if d.is_zero() {
                    ExtValuation::LowerBound(BigInt::from(b_eff))
                } else {
                    ExtValuation::Finite(vp_int(&d, self.p).unwrap())
                }
            }
        }
    }
}

/// Agreement to the common known precision (exact rationals compare exactly).
impl PartialEq for DensePAdic {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p {
            return false;
        }
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return a == b;
        }
        match (&self.repr, &other.repr) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                if a.val != b.val {
                    return false;
                }
                let prec = a.prec.min(b.prec);
                let m = pmod(self.p, prec);
                (&a.unit % &m) == (&b.unit % &m)
            }
            _ => false,
        }
    }
}

impl DensePAdic {
    /// Decimal-ish display for reports: valuation plus leading digits.
    pub fn describe(&self) -> String {
        match &self.repr {
            None => "0".into(),
            Some(u) => {
                let digits = self.digits(8.min(u.prec));
                let ds: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
                format!("p^{} * ({}...)", u.val, ds.join(","))
            }
        }
    }

}
