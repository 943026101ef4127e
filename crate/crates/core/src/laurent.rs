use crate::config::Config;
use crate::dense::DensePAdic;
use crate::error::{Error, Result};
use crate::valuation::ExtValuation;
use num::bigint::BigInt;
use std::collections::BTreeMap;

/// Hard cap on coefficient windows; operations whose result would escape
/// [-MAX_WINDOW, MAX_WINDOW] fail unless explicitly clipped.
pub const MAX_WINDOW: i64 = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingTag {
    /// power series on the closed unit disk (no negative exponents)
    Disk,
    /// Laurent series convergent on the annulus |p|^n <= |x| <= 1
    AnnulusLevel(u32),
    /// truncation of a series on the punctured disk
    PuncturedDiskTruncated,
}

impl std::fmt::Display for RingTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RingTag::Disk => write!(f, "disk"),
            RingTag::AnnulusLevel(n) => write!(f, "annulus:{n}"),
            RingTag::PuncturedDiskTruncated => write!(f, "punctured"),
        }
    }
}

/// Finite-window Laurent element sum c_k x^k with exact coefficients.
#[derive(Clone, Debug)]
pub struct LaurentElement {
    config: Config,
    coeffs: BTreeMap<i64, DensePAdic>,
    pub tag: RingTag,
    /// set when an operation dropped coefficients to stay inside a window,
    /// or when the element was declared a truncation of an infinite series
    pub truncated: bool,
}

impl LaurentElement {
    pub fn zero(config: &Config, tag: RingTag) -> Self {
        LaurentElement { config: config.clone(), coeffs: BTreeMap::new(), tag, truncated: false }
    }

    pub fn from_coeffs(
        config: &Config,
        tag: RingTag,
        entries: Vec<(i64, DensePAdic)>,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in entries {
            if c.prime() != config.prime {
                return Err(Error::PrimeMismatch(config.prime, c.prime()));
            }
            if k.abs() > MAX_WINDOW {
                return Err(Error::WindowOverflow { lo: k, hi: k });
            }
            if k < 0 && tag == RingTag::Disk {
                return Err(Error::IncompatibleTags(
                    "disk".into(),
                    format!("negative exponent {k}"),
                ));
            }
            if !c.is_zero() {
                coeffs.insert(k, c);
            }
        }
        Ok(LaurentElement { config: config.clone(), coeffs, tag, truncated: false })
    }

    pub fn monomial(config: &Config, k: i64, c: DensePAdic, tag: RingTag) -> Result<Self> {
        Self::from_coeffs(config, tag, vec![(k, c)])
    }

    pub fn one(config: &Config, tag: RingTag) -> Self {
        let c = DensePAdic::from_integer(config, 1);
        Self::monomial(config, 0, c, tag).expect("constant fits any tag")
    }

    pub fn constant(config: &Config, c: DensePAdic, tag: RingTag) -> Self {
        Self::monomial(config, 0, c, tag).expect("constant fits any tag")
    }

    pub fn mark_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn coeff(&self, k: i64) -> Option<&DensePAdic> {
        self.coeffs.get(&k)
    }

    pub fn support(&self) -> impl Iterator<Item = (&i64, &DensePAdic)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        let lo = *self.coeffs.keys().next()?;
        let hi = *self.coeffs.keys().last()?;
        Some((lo, hi))
    }

    fn join_tags(&self, other: &LaurentElement) -> Result<RingTag> {
        if self.tag == other.tag {
            return Ok(self.tag.clone());
        }
        // a disk element embeds in every larger ring
        match (&self.tag, &other.tag) {
            (RingTag::Disk, t) | (t, RingTag::Disk) => Ok(t.clone()),
            (a, b) => Err(Error::IncompatibleTags(a.to_string(), b.to_string())),
        }
    }

    pub fn add(&self, other: &LaurentElement) -> Result<LaurentElement> {
        let tag = self.join_tags(other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            match coeffs.remove(k) {
                None => {
                    coeffs.insert(*k, c.clone());
                }
                Some(existing) => {
                    let s = existing.add(c)?;
                    if !s.is_zero() {
                        coeffs.insert(*k, s);
                    }
                }
            }
        }
        Ok(LaurentElement {
            config: self.config.clone(),
            coeffs,
            tag,
            truncated: self.truncated || other.truncated,
        })
    }

    pub fn neg(&self) -> LaurentElement {
        let coeffs = self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect();
        LaurentElement { config: self.config.clone(), coeffs, tag: self.tag.clone(), truncated: self.truncated }
    }

    pub fn sub(&self, other: &LaurentElement) -> Result<LaurentElement> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &DensePAdic) -> Result<LaurentElement> {
        let mut coeffs = BTreeMap::new();
        for (k, a) in &self.coeffs {
            let s = a.mul(c)?;
            if !s.is_zero() {
                coeffs.insert(*k, s);
            }
        }
        Ok(LaurentElement {
            config: self.config.clone(),
            coeffs,
            tag: self.tag.clone(),
            truncated: self.truncated,
        })
    }

    pub fn mul(&self, other: &LaurentElement) -> Result<LaurentElement> {
        self.mul_impl(other, None)
    }

    /// Product with coefficients outside [lo, hi] dropped; the result is
    /// flagged truncated if anything was dropped.
    pub fn mul_clipped(&self, other: &LaurentElement, lo: i64, hi: i64) -> Result<LaurentElement> {
        self.mul_impl(other, Some((lo, hi)))
    }

    fn mul_impl(&self, other: &LaurentElement, clip: Option<(i64, i64)>) -> Result<LaurentElement> {
        let tag = self.join_tags(other)?;
        if let (Some((alo, ahi)), Some((blo, bhi))) = (self.window(), other.window()) {
            let (lo, hi) = (alo + blo, ahi + bhi);
            if clip.is_none() && (lo < -MAX_WINDOW || hi > MAX_WINDOW) {
                return Err(Error::WindowOverflow { lo, hi });
            }
        }
        let mut coeffs: BTreeMap<i64, DensePAdic> = BTreeMap::new();
        let mut dropped = false;
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                let k = ka + kb;
                if let Some((lo, hi)) = clip {
                    if k < lo || k > hi {
                        dropped = true;
                        continue;
                    }
                }
                let term = ca.mul(cb)?;
                match coeffs.remove(&k) {
                    None => {
                        if !term.is_zero() {
                            coeffs.insert(k, term);
                        }
                    }
                    Some(existing) => {
                        let s = existing.add(&term)?;
                        if !s.is_zero() {
                            coeffs.insert(k, s);
                        }
                    }
                }
            }
        }
        Ok(LaurentElement {
            config: self.config.clone(),
            coeffs,
            tag,
            truncated: self.truncated || other.truncated || dropped,
        })
    }

    /// d/dx: c_k x^k -> k c_k x^{k-1}.
    pub fn derive(&self) -> LaurentElement {
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            if *k == 0 {
                continue;
            }
            let d = c.mul_integer(&BigInt::from(*k)).expect("same prime");
            if !d.is_zero() {
                coeffs.insert(k - 1, d);
            }
        }
        LaurentElement {
            config: self.config.clone(),
            coeffs,
            tag: self.tag.clone(),
            truncated: self.truncated,
        }
    }

    /// Gauss norm exponent at level n: the norm is p^(-e) with
    /// e = min_k (v(c_k) + n*max(-k, 0) ... ) i.e. negative exponents are
    /// weighted by |x|^k evaluated at |x| = |p|^n on the inner boundary.
    pub fn level_norm(&self, n: u32) -> ExtValuation {
        let mut best: Option<BigInt> = None;
        for (k, c) in &self.coeffs {
            let v = match c.valuation() {
                ExtValuation::Finite(v) => v,
                ExtValuation::LowerBound(v) => v,
                ExtValuation::PlusInfinity => continue,
            };
            let e = if *k < 0 { v + BigInt::from(n as i64) * BigInt::from(*k) } else { v };
            best = Some(match best {
                None => e,
                Some(b) => b.min(e),
            });
        }
        match best {
            None => ExtValuation::PlusInfinity,
            Some(e) => ExtValuation::Finite(e),
        }
    }
}

impl PartialEq for LaurentElement {
    fn eq(&self, other: &Self) -> bool {
        if self.coeffs.len() != other.coeffs.len() {
            return false;
        }
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .all(|((ka, ca), (kb, cb))| ka == kb && ca == cb)
    }
}

/// Per-level decay verdict for the inverse-limit ring on the punctured disk.
#[derive(Clone, Debug)]
pub struct LevelVerdict {
    pub level: u32,
    /// (s, margin) for negative support x^{-s}: margin = v(c_{-s}) - n*s
    pub margins: Vec<(i64, BigInt)>,
    pub passes: bool,
}

impl LaurentElement {
    /// Bounded-evidence membership for the punctured-disk limit ring: at
    /// each level n the decay margins v(c_{-s}) - n*s must be strictly
    /// increasing over the last half of the materialized tail. Complete
    /// (untruncated) elements are finite sums and pass every level.
    pub fn membership_in_o_u(&self, n_max: u32) -> Result<Vec<LevelVerdict>> {
        if self.tag != RingTag::PuncturedDiskTruncated {
            return Err(Error::IncompatibleTags(
                self.tag.to_string(),
                "punctured".into(),
            ));
        }
        let neg: Vec<(i64, BigInt)> = self
            .coeffs
            .range(..0)
            .rev()
            .filter_map(|(k, c)| c.valuation().exact().map(|v| (-k, v.clone())))
            .collect();
        // neg is ordered by increasing s = -k
        let mut out = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let margins: Vec<(i64, BigInt)> = neg
                .iter()
                .map(|(s, v)| (*s, v - BigInt::from(n as i64) * BigInt::from(*s)))
                .collect();
            let passes = if !self.truncated {
                true
            } else {
                let tail = &margins[margins.len() / 2..];
                tail.windows(2).all(|w| w[0].1 < w[1].1)
            };
            out.push(LevelVerdict { level: n, margins, passes });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn cfg(p: u64) -> Config {
        Config::new(p, 64).unwrap()
    }

    fn xk(c: &Config, k: i64, n: i64, tag: RingTag) -> LaurentElement {
        LaurentElement::monomial(c, k, DensePAdic::from_integer(c, n), tag).unwrap()
    }

    #[test]
    fn disk_rejects_negative_support() {
        let c = cfg(2);
        assert!(LaurentElement::monomial(&c, -1, DensePAdic::from_integer(&c, 1), RingTag::Disk)
            .is_err());
    }

    #[test]
    fn one_plus_x_times_one_minus_x() {
        let c = cfg(5);
        let one = LaurentElement::one(&c, RingTag::Disk);
        let x = xk(&c, 1, 1, RingTag::Disk);
        let a = one.add(&x).unwrap();
        let b = one.sub(&x).unwrap();
        let prod = a.mul(&b).unwrap();
        let expect = one.sub(&xk(&c, 2, 1, RingTag::Disk)).unwrap();
        assert_eq!(prod, expect);
        assert_eq!(prod.level_norm(0), ExtValuation::finite(0));
    }

    #[test]
    fn annulus_norm_of_x_inverse() {
        let c = cfg(5);
        for n in 0..4u32 {
            let xi = xk(&c, -1, 1, RingTag::AnnulusLevel(n));
            assert_eq!(xi.level_norm(n), ExtValuation::finite(-(n as i64)));
        }
        // 5 * x^{-2} at level 1: exponent 1 - 2 = -1
        let e = LaurentElement::monomial(
            &c,
            -2,
            DensePAdic::from_integer(&c, 5),
            RingTag::AnnulusLevel(1),
        )
        .unwrap();
        assert_eq!(e.level_norm(1), ExtValuation::finite(-1));
    }

    #[test]
    fn derive_basics() {
        let c = cfg(3);
        let x2 = xk(&c, 2, 1, RingTag::Disk);
        let d = x2.derive();
        assert_eq!(d, xk(&c, 1, 2, RingTag::Disk));
        let xi = xk(&c, -1, 1, RingTag::PuncturedDiskTruncated);
        assert_eq!(xi.derive(), xk(&c, -2, -1, RingTag::PuncturedDiskTruncated));
        let one = LaurentElement::one(&c, RingTag::Disk);
        assert!(one.derive().is_zero());
    }

    #[test]
    fn leibniz_rule() {
        let c = cfg(3);
        let one = LaurentElement::one(&c, RingTag::PuncturedDiskTruncated);
        let a = xk(&c, 2, 2, RingTag::PuncturedDiskTruncated).add(&one).unwrap();
        let b = xk(&c, -1, 1, RingTag::PuncturedDiskTruncated)
            .add(&xk(&c, 3, 5, RingTag::PuncturedDiskTruncated))
            .unwrap();
        let lhs = a.mul(&b).unwrap().derive();
        let rhs = a.derive().mul(&b).unwrap().add(&a.mul(&b.derive()).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn gauss_norm_multiplicative() {
        let c = cfg(5);
        let a = xk(&c, -1, 5, RingTag::AnnulusLevel(2))
            .add(&xk(&c, 1, 3, RingTag::AnnulusLevel(2)))
            .unwrap();
        let b = xk(&c, -2, 25, RingTag::AnnulusLevel(2))
            .add(&xk(&c, 0, 1, RingTag::AnnulusLevel(2)))
            .unwrap();
        let prod = a.mul(&b).unwrap();
        for n in 0..=4u32 {
            let (va, vb, vp) = (a.level_norm(n), b.level_norm(n), prod.level_norm(n));
            assert_eq!(vp, va.add(&vb), "level {n}");
        }
    }

    #[test]
    fn window_overflow_detected() {
        let c = cfg(2);
        let big = xk(&c, 800, 1, RingTag::Disk);
        assert!(matches!(big.mul(&big), Err(Error::WindowOverflow { .. })));
        let clipped = big.mul_clipped(&big, 0, 1024).unwrap();
        assert!(clipped.truncated);
        assert!(clipped.is_zero());
    }

    #[test]
    fn membership_decay_example() {
        // sum_{s<=8} p^{2s} x^{-s}: margins (2-n)s; passes n = 0,1, fails 2
        let c = cfg(2);
        let mut e = LaurentElement::zero(&c, RingTag::PuncturedDiskTruncated);
        for s in 0..=8i64 {
            let coeff =
                DensePAdic::from_rational(&c, BigInt::from(4).pow(s as u32), BigInt::one())
                    .unwrap();
            e = e
                .add(
                    &LaurentElement::monomial(&c, -s, coeff, RingTag::PuncturedDiskTruncated)
                        .unwrap(),
                )
                .unwrap();
        }
        let e = e.mark_truncated();
        let report = e.membership_in_o_u(3).unwrap();
        assert!(report[0].passes);
        assert!(report[1].passes);
        assert!(!report[2].passes);
        assert!(!report[3].passes);
    }

    #[test]
    fn membership_finite_polynomial_passes() {
        let c = cfg(2);
        let e = xk(&c, -3, 1, RingTag::PuncturedDiskTruncated)
            .add(&xk(&c, -1, 2, RingTag::PuncturedDiskTruncated))
            .unwrap();
        let report = e.membership_in_o_u(4).unwrap();
        assert!(report.iter().all(|v| v.passes));
    }

    #[test]
    fn rho_monotone_in_level() {
        let c = cfg(3);
        let e = xk(&c, -2, 1, RingTag::PuncturedDiskTruncated)
            .add(&xk(&c, -5, 9, RingTag::PuncturedDiskTruncated))
            .unwrap();
        let mut prev: Option<BigInt> = None;
        for n in 0..6u32 {
            let v = e.level_norm(n).exact().cloned().unwrap();
            if let Some(p) = prev {
                assert!(v <= p);
            }
            prev = Some(v);
        }
    }
}
