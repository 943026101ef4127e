use crate::config::Config;
use crate::dense::DensePAdic;
use crate::error::{Error, Result};
use crate::laurent::{LaurentElement, RingTag};
use crate::valuation::ExtValuation;
use num::bigint::BigInt;
use num::One;
use std::collections::BTreeMap;

/// Order cap for operator composition.
pub const MAX_ORDER: u32 = 64;

/// Differential operator sum g_i(x) d^i with disk-series coefficients.
#[derive(Clone, Debug)]
pub struct OperatorElement {
    config: Config,
    coeffs: BTreeMap<u32, LaurentElement>,
    /// declared truncation of an infinite-order operator
    pub truncated: bool,
}

fn binomial(i: u32, k: u32) -> BigInt {
    let mut b = BigInt::one();
    for t in 0..k {
        b = b * BigInt::from(i - t) / BigInt::from(t + 1);
    }
    b
}

impl OperatorElement {
    pub fn zero(config: &Config) -> Self {
        OperatorElement { config: config.clone(), coeffs: BTreeMap::new(), truncated: false }
    }

    pub fn identity(config: &Config) -> Self {
        Self::from_terms(config, vec![(0, LaurentElement::one(config, RingTag::Disk))])
            .expect("identity is order 0")
    }

    /// The derivation d^i.
    pub fn d_power(config: &Config, i: u32) -> Result<Self> {
        Self::from_terms(config, vec![(i, LaurentElement::one(config, RingTag::Disk))])
    }

    /// Multiplication by a disk series, as an order-zero operator.
    pub fn multiplication(g: LaurentElement) -> Result<Self> {
        let config = g.config().clone();
        Self::from_terms(&config, vec![(0, g)])
    }

    pub fn from_terms(config: &Config, terms: Vec<(u32, LaurentElement)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (i, g) in terms {
            if i > MAX_ORDER {
                return Err(Error::CapExceeded(format!("operator order {i} > {MAX_ORDER}")));
            }
            if g.tag != RingTag::Disk {
                return Err(Error::IncompatibleTags(g.tag.to_string(), "disk".into()));
            }
            if g.is_zero() {
                continue;
            }
            match coeffs.remove(&i) {
                None => {
                    coeffs.insert(i, g);
                }
                Some(existing) => {
                    let s = existing.add(&g)?;
                    if !s.is_zero() {
                        coeffs.insert(i, s);
                    }
                }
            }
        }
        Ok(OperatorElement { config: config.clone(), coeffs, truncated: false })
    }

    /// Constant-coefficient operator sum c_i d^i.
    pub fn constant_coefficient(config: &Config, terms: Vec<(u32, DensePAdic)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(i, c)| (i, LaurentElement::constant(config, c, RingTag::Disk)))
            .collect();
        Self::from_terms(config, terms)
    }

    pub fn mark_truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn coeff(&self, i: u32) -> Option<&LaurentElement> {
        self.coeffs.get(&i)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &LaurentElement)> {
        self.coeffs.iter()
    }

    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().last().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.coeffs.values().all(|g| g.window().map_or(true, |(lo, hi)| lo == 0 && hi == 0))
    }

    pub fn add(&self, other: &OperatorElement) -> Result<OperatorElement> {
        let mut terms: Vec<(u32, LaurentElement)> =
            self.coeffs.iter().map(|(i, g)| (*i, g.clone())).collect();
        terms.extend(other.coeffs.iter().map(|(i, g)| (*i, g.clone())));
        let mut out = Self::from_terms(&self.config, terms)?;
        out.truncated = self.truncated || other.truncated;
        Ok(out)
    }

    /// Composition via d^i (g .) = sum_k binom(i,k) g^(k) d^(i-k).
    pub fn compose(&self, other: &OperatorElement) -> Result<OperatorElement> {
        let mut terms: Vec<(u32, LaurentElement)> = Vec::new();
        for (i, g) in &self.coeffs {
            for (j, h) in &other.coeffs {
                if i + j > MAX_ORDER {
                    return Err(Error::CapExceeded(format!(
                        "composed order {} > {MAX_ORDER}",
                        i + j
                    )));
                }
                let mut h_deriv = h.clone();
                for k in 0..=*i {
                    let coeff = binomial(*i, k);
                    let scaled = h_deriv.scale(&DensePAdic::from_integer(&self.config, coeff))?;
                    let term = g.mul(&scaled)?;
                    terms.push((i - k + j, term));
                    if k < *i {
                        h_deriv = h_deriv.derive();
                    }
                }
            }
        }
        let mut out = Self::from_terms(&self.config, terms)?;
        out.truncated = self.truncated || other.truncated;
        Ok(out)
    }

    pub fn apply(&self, a: &LaurentElement) -> Result<LaurentElement> {
        let mut out = LaurentElement::zero(&self.config, a.tag.clone());
        for (i, g) in &self.coeffs {
            let mut d = a.clone();
            for _ in 0..*i {
                d = d.derive();
            }
            out = out.add(&g.mul(&d)?)?;
        }
        Ok(out)
    }

    /// Norm exponent at level n: min_i (v_Gauss(g_i) - n*i).
    pub fn level_norm(&self, n: u32) -> ExtValuation {
        let mut best: Option<BigInt> = None;
        for (i, g) in &self.coeffs {
            let v = match g.level_norm(0) {
                ExtValuation::Finite(v) | ExtValuation::LowerBound(v) => v,
                ExtValuation::PlusInfinity => continue,
            };
            let e = v - BigInt::from(n as u64) * BigInt::from(*i);
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

/// Per-level convergence-trend verdicts for the completed operator ring.
#[derive(Clone, Debug)]
pub struct DHatMembershipReport {
    pub verdicts: Vec<DHatLevelVerdict>,
}

#[derive(Clone, Debug)]
pub struct DHatLevelVerdict {
    pub level: u32,
    /// (i, margin) with margin = v_Gauss(g_i) - n*i
    pub margins: Vec<(u32, BigInt)>,
    pub passes: bool,
}

impl OperatorElement {
    /// Level-by-level membership evidence: v(g_i) - n*i must be strictly
    /// increasing over the last half of the materialized tail at every
    /// level n. Complete finite-order operators pass trivially; declared
    /// truncations need at least 8 materialized terms.
    pub fn dhat_membership(&self, n_max: u32) -> Result<DHatMembershipReport> {
        if self.truncated && self.coeffs.len() < 8 {
            return Err(Error::TailTooShort { need: 8, got: self.coeffs.len() });
        }
        let vals: Vec<(u32, BigInt)> = self
            .coeffs
            .iter()
            .filter_map(|(i, g)| g.level_norm(0).exact().map(|v| (*i, v.clone())))
            .collect();
        let mut verdicts = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let margins: Vec<(u32, BigInt)> = vals
                .iter()
                .map(|(i, v)| (*i, v - BigInt::from(n as u64) * BigInt::from(*i)))
                .collect();
            let passes = if !self.truncated {
                true
            } else {
                let tail = &margins[margins.len() / 2..];
                tail.windows(2).all(|w| w[0].1 < w[1].1)
            };
            verdicts.push(DHatLevelVerdict { level: n, margins, passes });
        }
        Ok(DHatMembershipReport { verdicts })
    }
}

impl PartialEq for OperatorElement {
    fn eq(&self, other: &Self) -> bool {
        if self.coeffs.len() != other.coeffs.len() {
            return false;
        }
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .all(|((ia, ga), (ib, gb))| ia == ib && ga == gb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn cfg(p: u64) -> Config {
        Config::new(p, 64).unwrap()
    }

    fn x_mult(c: &Config, k: i64) -> OperatorElement {
        let g = LaurentElement::monomial(c, k, DensePAdic::from_integer(c, 1), RingTag::Disk)
            .unwrap();
        OperatorElement::multiplication(g).unwrap()
    }

    #[test]
    fn commutator_d_x() {
        // d (x .) = x d + 1
        let c = cfg(5);
        let d = OperatorElement::d_power(&c, 1).unwrap();
        let x = x_mult(&c, 1);
        let dx = d.compose(&x).unwrap();
        let xd = x.compose(&d).unwrap();
        let expect = xd.add(&OperatorElement::identity(&c)).unwrap();
        assert_eq!(dx, expect);
    }

    #[test]
    fn d2_x2_expansion() {
        // d^2 (x^2 .) = x^2 d^2 + 4x d + 2
        let c = cfg(5);
        let d2 = OperatorElement::d_power(&c, 2).unwrap();
        let x2 = x_mult(&c, 2);
        let got = d2.compose(&x2).unwrap();
        let mut expect = x_mult(&c, 2).compose(&OperatorElement::d_power(&c, 2).unwrap()).unwrap();
        let four_x = LaurentElement::monomial(&c, 1, DensePAdic::from_integer(&c, 4), RingTag::Disk)
            .unwrap();
        expect = expect
            .add(&OperatorElement::from_terms(&c, vec![(1, four_x)]).unwrap())
            .unwrap();
        expect = expect
            .add(&OperatorElement::constant_coefficient(&c, vec![(0, DensePAdic::from_integer(&c, 2))]).unwrap())
            .unwrap();
        assert_eq!(got, expect);
    }

    #[test]
    fn identity_neutral() {
        let c = cfg(3);
        let p = x_mult(&c, 2).compose(&OperatorElement::d_power(&c, 3).unwrap()).unwrap();
        let id = OperatorElement::identity(&c);
        assert_eq!(p.compose(&id).unwrap(), p);
        assert_eq!(id.compose(&p).unwrap(), p);
    }

    #[test]
    fn ladder_identity() {
        // [d, x^k] = k x^{k-1}
        let c = cfg(2);
        let d = OperatorElement::d_power(&c, 1).unwrap();
        for k in 1..=10i64 {
            let xk = x_mult(&c, k);
            let lhs = d.compose(&xk).unwrap().add(&xk.compose(&d).unwrap().neg_test()).unwrap();
            let expect = OperatorElement::from_terms(
                &c,
                vec![(
                    0,
                    LaurentElement::monomial(
                        &c,
                        k - 1,
                        DensePAdic::from_integer(&c, k),
                        RingTag::Disk,
                    )
                    .unwrap(),
                )],
            )
            .unwrap();
            assert_eq!(lhs, expect, "k={k}");
        }
    }

    impl OperatorElement {
        fn neg_test(&self) -> OperatorElement {
            let terms = self.coeffs.iter().map(|(i, g)| (*i, g.neg())).collect();
            OperatorElement::from_terms(&self.config, terms).unwrap()
        }
    }

    #[test]
    fn apply_examples() {
        let c = cfg(3);
        // (x d)(x^3) = 3 x^3
        let xd = x_mult(&c, 1).compose(&OperatorElement::d_power(&c, 1).unwrap()).unwrap();
        let x3 = LaurentElement::monomial(&c, 3, DensePAdic::from_integer(&c, 1), RingTag::Disk)
            .unwrap();
        let got = xd.apply(&x3).unwrap();
        assert_eq!(
            got.coeff(3).unwrap().as_integer(),
            Some(BigInt::from(3))
        );
        // d(x^{-1}) = -x^{-2}
        let d = OperatorElement::d_power(&c, 1).unwrap();
        let xi = LaurentElement::monomial(
            &c,
            -1,
            DensePAdic::from_integer(&c, 1),
            RingTag::PuncturedDiskTruncated,
        )
        .unwrap();
        let got = d.apply(&xi).unwrap();
        assert_eq!(got.coeff(-2).unwrap().as_integer(), Some(BigInt::from(-1)));
        // (p d^2)(x^2) = 2p at p = 3: valuation 1
        let pd2 = OperatorElement::constant_coefficient(
            &c,
            vec![(2, DensePAdic::from_integer(&c, 3))],
        )
        .unwrap();
        let x2 = LaurentElement::monomial(&c, 2, DensePAdic::from_integer(&c, 1), RingTag::Disk)
            .unwrap();
        let got = pd2.apply(&x2).unwrap();
        assert_eq!(got.level_norm(0), ExtValuation::finite(1));
    }

    #[test]
    fn level_norm_examples() {
        let c5 = cfg(5);
        let d = OperatorElement::d_power(&c5, 1).unwrap();
        for n in 0..4u32 {
            assert_eq!(d.level_norm(n), ExtValuation::finite(-(n as i64)));
        }
        // |p^2 d|_1 = 2 - 1
        let p2d = OperatorElement::constant_coefficient(
            &c5,
            vec![(1, DensePAdic::from_integer(&c5, 25))],
        )
        .unwrap();
        assert_eq!(p2d.level_norm(1), ExtValuation::finite(1));
        let x = x_mult(&c5, 1);
        for n in 0..4u32 {
            assert_eq!(x.level_norm(n), ExtValuation::finite(0));
        }
    }

    #[test]
    fn associativity_on_samples() {
        let c = cfg(3);
        let p = x_mult(&c, 1).compose(&OperatorElement::d_power(&c, 2).unwrap()).unwrap();
        let q = OperatorElement::d_power(&c, 1)
            .unwrap()
            .add(&x_mult(&c, 2))
            .unwrap();
        let a = LaurentElement::monomial(&c, 4, DensePAdic::from_integer(&c, 2), RingTag::Disk)
            .unwrap()
            .add(&LaurentElement::one(&c, RingTag::Disk))
            .unwrap();
        let lhs = p.compose(&q).unwrap().apply(&a).unwrap();
        let rhs = p.apply(&q.apply(&a).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn dhat_trends() {
        let c = cfg(2);
        // g_i = p^{i^2}: margins i^2 - n*i increase eventually
        let quad = OperatorElement::constant_coefficient(
            &c,
            (0..12u32)
                .map(|i| {
                    (i, DensePAdic::from_integer(&c, BigInt::from(2).pow(i * i)))
                })
                .collect(),
        )
        .unwrap()
        .mark_truncated();
        let rep = quad.dhat_membership(4).unwrap();
        assert!(rep.verdicts.iter().all(|v| v.passes));
        // g_i = p^{2i}: margins (2-n)i
        let lin = OperatorElement::constant_coefficient(
            &c,
            (0..12u32)
                .map(|i| (i, DensePAdic::from_integer(&c, BigInt::from(2).pow(2 * i))))
                .collect(),
        )
        .unwrap()
        .mark_truncated();
        let rep = lin.dhat_membership(3).unwrap();
        assert!(rep.verdicts[0].passes);
        assert!(rep.verdicts[1].passes);
        assert!(!rep.verdicts[2].passes);
        assert!(!rep.verdicts[3].passes);
        // complete finite-order operator passes everything
        let fin = OperatorElement::d_power(&c, 3).unwrap();
        assert!(fin.dhat_membership(4).unwrap().verdicts.iter().all(|v| v.passes));
    }

    #[test]
    fn dhat_tail_too_short() {
        let c = cfg(2);
        let small = OperatorElement::d_power(&c, 2).unwrap().mark_truncated();
        assert!(matches!(
            small.dhat_membership(2),
            Err(Error::TailTooShort { .. })
        ));
    }

    #[test]
    fn constant_coefficient_commutes() {
        let c = cfg(5);
        let p = OperatorElement::constant_coefficient(
            &c,
            vec![(0, DensePAdic::from_integer(&c, 3)), (2, DensePAdic::from_integer(&c, 5))],
        )
        .unwrap();
        let q = OperatorElement::constant_coefficient(
            &c,
            vec![(1, DensePAdic::from_integer(&c, 7))],
        )
        .unwrap();
        assert_eq!(p.compose(&q).unwrap(), q.compose(&p).unwrap());
        assert!(p.is_constant_coefficient());
    }

    #[test]
    fn submultiplicative_norms() {
        let c = cfg(3);
        let p = x_mult(&c, 1).compose(&OperatorElement::d_power(&c, 2).unwrap()).unwrap();
        let q = OperatorElement::constant_coefficient(
            &c,
            vec![(1, DensePAdic::from_integer(&c, 9))],
        )
        .unwrap();
        let pq = p.compose(&q).unwrap();
        for n in 0..4u32 {
            let (a, b, ab) = (
                p.level_norm(n).exact().cloned().unwrap(),
                q.level_norm(n).exact().cloned().unwrap(),
                pq.level_norm(n).exact().cloned().unwrap(),
            );
            assert!(ab >= a + b, "level {n}");
        }
        let z = OperatorElement::zero(&c);
        assert_eq!(z.level_norm(0), ExtValuation::PlusInfinity);
        assert!(BigInt::zero().is_zero());
    }
}
