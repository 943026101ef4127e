use crate::error::{Error, Result};
use crate::scalar::PAdicScalar;
use crate::sparse::SparsePAdic;
use crate::valuation::{ExponentBound, ExtValuation};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Margin a witness sequence must clear at the end of the horizon before we
/// report it. Small enough to be reachable at I = 8, large enough that a
/// flat sequence never qualifies.
pub const MARGIN_THRESHOLD: i64 = 8;

/// Prefix valuations V_i = v(prod_{j<i}(lambda - j)) for i = 1..I.
#[derive(Clone, Debug)]
pub struct ProductProfile {
    pub horizon: usize,
    /// V_1 .. V_I
    pub values: Vec<ExtValuation>,
    /// Some(j) when lambda - j = 0 exactly.
    pub zero_hit: Option<usize>,
}

pub fn product_profile(lambda: &PAdicScalar, horizon: usize, cap: u64) -> ProductProfile {
    let mut values = Vec::with_capacity(horizon);
    let mut acc = ExtValuation::Finite(BigInt::zero());
    let mut zero_hit = None;
    for j in 0..horizon {
        let v = lambda.valuation_of_difference(&BigInt::from(j), cap);
        if v == ExtValuation::PlusInfinity && zero_hit.is_none() {
            zero_hit = Some(j);
        }
        acc = acc.add(&v);
        values.push(acc.clone());
    }
    ProductProfile { horizon, values, zero_hit }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeVerdict {
    PositiveInteger,
    PositiveWitness { r: u64, margins: Vec<BigInt> },
    NoWitnessUpTo { r_max: u64, horizon: usize },
}

/// Classification output; `proven_type_zero` is set only for scalars built
/// by the tower constructor, never from the finite search itself.
#[derive(Clone, Debug)]
pub struct ClassifyReport {
    pub verdict: TypeVerdict,
    pub proven_type_zero: bool,
    pub horizon: usize,
    pub r_max: u64,
}

/// Margins i*r - V_i for i = 1..I, when every prefix valuation is exact.
/// A witness requires the whole sequence to be strictly increasing (so the
/// trend cannot be an artifact of where the window ends) and the final
/// margin to clear MARGIN_THRESHOLD.
pub fn witness_margins(
    profile: &ProductProfile,
    r: u64,
) -> Option<Vec<BigInt>> {
    let mut margins = Vec::with_capacity(profile.horizon);
    for (idx, v) in profile.values.iter().enumerate() {
        let i = BigInt::from(idx + 1);
        let v = v.exact()?;
        margins.push(i * BigInt::from(r) - v);
    }
    Some(margins)
}

fn margins_witness(margins: &[BigInt]) -> bool {
    if margins.len() < 2 {
        return false;
    }
    if margins.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    *margins.last().unwrap() > BigInt::from(MARGIN_THRESHOLD)
}

pub fn classify_positive_type(
    lambda: &PAdicScalar,
    horizon: usize,
    r_max: u64,
    cap: u64,
) -> Result<ClassifyReport> {
    if horizon < 8 {
        return Err(Error::InsufficientHorizon { min: 8, got: horizon });
    }
    let profile = product_profile(lambda, horizon, cap);
    let proven_type_zero = lambda.is_lebras();
    if profile.zero_hit.is_some() {
        return Ok(ClassifyReport {
            verdict: TypeVerdict::PositiveInteger,
            proven_type_zero,
            horizon,
            r_max,
        });
    }
    for r in 0..=r_max {
        if let Some(margins) = witness_margins(&profile, r) {
            if margins_witness(&margins) {
                return Ok(ClassifyReport {
                    verdict: TypeVerdict::PositiveWitness { r, margins },
                    proven_type_zero,
                    horizon,
                    r_max,
                });
            }
        }
    }
    Ok(ClassifyReport {
        verdict: TypeVerdict::NoWitnessUpTo { r_max, horizon },
        proven_type_zero,
        horizon,
        r_max,
    })
}

/// One row of the tower divergence table: exponents r*m_j - k_{j+1}.
#[derive(Clone, Debug)]
pub struct DivergenceRow {
    pub r: u64,
    /// (j, exponent) pairs for j = 1..depth
    pub entries: Vec<(usize, ExponentBound)>,
    pub strictly_decreasing: bool,
}

/// |pi^{r m_j} / (lambda - m_j)| = |p|^{r m_j - k_{j+1}}: the exponents must
/// run to -infinity in j for every fixed r, which is what forces the
/// sequence out of every disk of convergence.
pub fn lebras_divergence_check(
    lambda: &SparsePAdic,
    r_list: &[u64],
    depth: usize,
) -> Result<Vec<DivergenceRow>> {
    let usable = depth
        .min(lambda.materializable_partial_sums())
        .min(lambda.materialized_depth());
    if usable < 1 {
        return Err(Error::InsufficientDepth { requested: depth, materialized: usable });
    }
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let mut entries = Vec::new();
        for j in 1..=usable {
            let m_j = lambda.partial_sum(j)?;
            let spike = lambda.sub_partial_sum(j)?.valuation();
            let e = match spike {
                ExtValuation::Finite(k) => ExponentBound::Exact(BigInt::from(r) * &m_j - k),
                ExtValuation::LowerBound(k) => ExponentBound::AtMost(BigInt::from(r) * &m_j - k),
                ExtValuation::PlusInfinity => {
                    return Err(Error::InsufficientDepth { requested: j, materialized: usable })
                }
            };
            entries.push((j, e));
        }
        let strictly_decreasing =
            entries.windows(2).all(|w| w[1].1.provably_less(&w[0].1));
        rows.push(DivergenceRow { r, entries, strictly_decreasing });
    }
    Ok(rows)
}

/// Window estimate of the convergence radius exponent: max of v(lambda-i)/i.
#[derive(Clone, Debug)]
pub struct TypeEstimate {
    pub horizon: usize,
    /// (i, v(lambda - i)) for i = 0..I-1, exact entries only
    pub ratios: Vec<(usize, BigInt)>,
    pub radius_bound: Option<BigRational>,
    /// single-difference witness: smallest r whose margins i*r - v(lambda-i)
    /// over i = 0..I-1 strictly increase and clear the threshold. Indexing
    /// from 0 makes the two criteria consume the same valuations v(lambda-j),
    /// j < I, so witness existence matches the product criterion exactly:
    /// both need r > max of those valuations (the jump into the spike always
    /// starts from a valuation-zero predecessor).
    pub witness: Option<(u64, Vec<BigInt>)>,
}

pub fn type_estimate(
    lambda: &PAdicScalar,
    horizon: usize,
    r_max: u64,
    cap: u64,
) -> Result<TypeEstimate> {
    if horizon < 2 {
        return Err(Error::InsufficientHorizon { min: 2, got: horizon });
    }
    if let Some(n) = lambda.as_integer() {
        if !n.is_negative() && n <= BigInt::from(horizon) {
            return Err(Error::AllExcluded);
        }
    }
    let mut vals = Vec::new();
    let mut radius_bound: Option<BigRational> = None;
    for i in 0..horizon {
        let v = lambda.valuation_of_difference(&BigInt::from(i), cap);
        if let Some(v) = v.exact() {
            if i > 0 {
                let ratio = BigRational::new(v.clone(), BigInt::from(i));
                radius_bound = Some(match radius_bound {
                    None => ratio.clone(),
                    Some(m) => m.max(ratio.clone()),
                });
            }
            vals.push((i, v.clone()));
        }
    }
    if vals.is_empty() {
        return Err(Error::AllExcluded);
    }
    let witness = (0..=r_max).find_map(|r| {
        if vals.len() < horizon {
            return None; // inexact entries break the trend rule
        }
        let margins: Vec<BigInt> = vals
            .iter()
            .map(|(i, v)| BigInt::from(*i) * BigInt::from(r) - v)
            .collect();
        if margins_witness(&margins) {
            Some((r, margins))
        } else {
            None
        }
    });
    Ok(TypeEstimate { horizon, ratios: vals, radius_bound, witness })
}

/// Agreement report between the partial-product criterion and the
/// single-difference criterion over a common search box.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub product_witness: Option<u64>,
    pub difference_witness: Option<u64>,
    pub agree: bool,
}

pub fn equivalence_probe(
    lambda: &PAdicScalar,
    horizon: usize,
    r_max: u64,
    cap: u64,
) -> Result<EquivalenceReport> {
    let product = classify_positive_type(lambda, horizon, r_max, cap)?;
    let product_witness = match &product.verdict {
        TypeVerdict::PositiveInteger => Some(0),
        TypeVerdict::PositiveWitness { r, .. } => Some(*r),
        TypeVerdict::NoWitnessUpTo { .. } => None,
    };
    let difference_witness = match type_estimate(lambda, horizon, r_max, cap) {
        Ok(est) => est.witness.map(|(r, _)| r),
        // integer case: the difference criterion excludes i = lambda and the
        // sequence terminates; integers are positive type by fiat
        Err(Error::AllExcluded) => Some(0),
        Err(e) => return Err(e),
    };
    Ok(EquivalenceReport {
        agree: product_witness.is_some() == difference_witness.is_some(),
        product_witness,
        difference_witness,
    })
}

/// Coefficientwise check of the power-series identity
///   sum_i x^i / (lambda (1-lambda) ... (i-lambda))
///     = e^x * sum_i (-x)^i / (i! (lambda - i))
/// in exact rationals, up to order N. Returns the residuals (all must be 0).
pub fn kedlaya_identity_check(lambda: &BigRational, order: usize) -> Result<Vec<BigRational>> {
    for i in 0..=order {
        if lambda == &BigRational::from(BigInt::from(i)) {
            return Err(Error::Pole(i as i64));
        }
    }
    // LHS coefficient of x^i: 1 / (lambda * prod_{t=1..i} (t - lambda))
    let mut lhs = Vec::with_capacity(order + 1);
    let mut denom = lambda.clone();
    lhs.push(denom.recip());
    for t in 1..=order {
        denom *= BigRational::from(BigInt::from(t)) - lambda;
        lhs.push(denom.recip());
    }
    // RHS = e^x * sum_i (-x)^i / (i! (lambda - i)); coefficient of x^n is
    // the convolution sum_{i<=n} (-1)^i / (i! (lambda - i) (n-i)!)
    let mut fact = vec![BigRational::one(); order + 1];
    for i in 1..=order {
        fact[i] = &fact[i - 1] * BigRational::from(BigInt::from(i));
    }
    let mut residuals = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut rhs = BigRational::zero();
        for i in 0..=n {
            let sign = if i % 2 == 0 { BigRational::one() } else { -BigRational::one() };
            let term = sign
                / (&fact[i] * (lambda - BigRational::from(BigInt::from(i))) * &fact[n - i]);
            rhs += term;
        }
        residuals.push(&lhs[n] - rhs);
    }
    Ok(residuals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;

    fn cfg(p: u64) -> Config {
        Config::new(p, 256).unwrap()
    }

    fn parse(p: u64, lit: &str) -> PAdicScalar {
        PAdicScalar::parse(&cfg(p), lit).unwrap()
    }

    #[test]
    fn profile_integer_zero_hit() {
        let l = parse(2, "int:5");
        let prof = product_profile(&l, 10, 64);
        assert_eq!(prof.zero_hit, Some(5));
    }

    #[test]
    fn profile_one_fifth() {
        // v(1/5 - j) = -1 for every j at p = 5, so V_i = -i
        let l = parse(5, "rat:1/5");
        let prof = product_profile(&l, 8, 64);
        for (idx, v) in prof.values.iter().enumerate() {
            assert_eq!(v, &ExtValuation::finite(-((idx + 1) as i64)));
        }
        assert_eq!(prof.zero_hit, None);
    }

    #[test]
    fn profile_lebras_frozen() {
        // oracle: digit arithmetic on the exact head 2^2 + 2^16 mod 2^40;
        // v(lambda - j) for j = 0..4 is 2, 0, 1, 0, 16
        let l = parse(2, "lebras:2,3");
        let prof = product_profile(&l, 5, 40);
        let expect: [i64; 5] = [2, 2, 3, 3, 19];
        for (v, e) in prof.values.iter().zip(expect) {
            assert_eq!(v, &ExtValuation::finite(e));
        }
    }

    #[test]
    fn classify_integers_positive() {
        let rep = classify_positive_type(&parse(2, "int:7"), 16, 4, 64).unwrap();
        assert_eq!(rep.verdict, TypeVerdict::PositiveInteger);
        assert!(!rep.proven_type_zero);
    }

    #[test]
    fn classify_one_fifth_r0() {
        let rep = classify_positive_type(&parse(5, "rat:1/5"), 32, 4, 64).unwrap();
        match rep.verdict {
            TypeVerdict::PositiveWitness { r, ref margins } => {
                assert_eq!(r, 0);
                // margins i*0 - (-i) = i
                assert_eq!(margins[0], BigInt::from(1));
                assert_eq!(margins[31], BigInt::from(32));
            }
            ref v => panic!("unexpected verdict {v:?}"),
        }
    }

    #[test]
    fn classify_lebras_no_witness() {
        let rep = classify_positive_type(&parse(2, "lebras:2,4"), 64, 8, 1 << 20).unwrap();
        assert!(matches!(rep.verdict, TypeVerdict::NoWitnessUpTo { .. }));
        assert!(rep.proven_type_zero);
    }

    #[test]
    fn classify_small_horizon_errors() {
        assert!(matches!(
            classify_positive_type(&parse(5, "rat:1/5"), 4, 2, 64),
            Err(Error::InsufficientHorizon { .. })
        ));
    }

    #[test]
    fn divergence_table_p2() {
        let l = SparsePAdic::lebras(2, 4).unwrap();
        let rows = lebras_divergence_check(&l, &[0, 1, 8], 4).unwrap();
        // r=1, j=1: 1*4 - 16 = -12
        let r1 = &rows[1];
        assert_eq!(r1.entries[0].1, ExponentBound::Exact(BigInt::from(-12)));
        // r=8, j=2: 8*65540 - 2^32
        let r8 = &rows[2];
        assert_eq!(
            r8.entries[1].1,
            ExponentBound::Exact(BigInt::from(524320i64) - BigInt::from(4294967296i64))
        );
        // r=0, j=1: -16
        assert_eq!(rows[0].entries[0].1, ExponentBound::Exact(BigInt::from(-16)));
        for row in &rows {
            assert!(row.strictly_decreasing, "r={}", row.r);
        }
    }

    #[test]
    fn estimate_one_fifth() {
        let est = type_estimate(&parse(5, "rat:1/5"), 16, 4, 64).unwrap();
        assert!(est.ratios.iter().all(|(_, v)| v == &BigInt::from(-1)));
        // constant valuation: r = 1 is the least slope beating every jump
        assert_eq!(est.witness.as_ref().map(|(r, _)| *r), Some(1));
    }

    #[test]
    fn estimate_half_p3() {
        // oracle: brute force v_3(1 - 2i); spikes where 2i = 1 mod 3^k
        let est = type_estimate(&parse(3, "rat:1/2"), 81, 6, 256).unwrap();
        let spike = est.ratios.iter().map(|(_, v)| v.clone()).max().unwrap();
        // 2i = 1 mod 81 at i = 41: v = 4 within the window
        assert_eq!(spike, BigInt::from(4));
        assert_eq!(est.witness.as_ref().map(|(r, _)| *r), Some(5));
    }

    #[test]
    fn estimate_lebras_spike() {
        let est = type_estimate(&parse(2, "lebras:2,3"), 20, 2, 1 << 17).unwrap();
        let max = est.ratios.iter().map(|(_, v)| v.clone()).max().unwrap();
        assert_eq!(max, BigInt::from(16)); // at i = 4
        assert!(est.witness.is_none());
    }

    #[test]
    fn estimate_excludes_integers() {
        assert!(matches!(
            type_estimate(&parse(2, "int:3"), 16, 2, 64),
            Err(Error::AllExcluded)
        ));
    }

    #[test]
    fn probe_agreement() {
        for (p, lit) in [(3, "rat:1/2"), (2, "int:3"), (5, "rat:1/5")] {
            let rep = equivalence_probe(&parse(p, lit), 128, 6, 1 << 10).unwrap();
            assert!(rep.agree, "{lit}");
            assert!(rep.product_witness.is_some(), "{lit}");
        }
        let rep = equivalence_probe(&parse(2, "lebras:2,4"), 64, 6, 1 << 20).unwrap();
        assert!(rep.agree);
        assert!(rep.product_witness.is_none());
        assert!(rep.difference_witness.is_none());
    }

    #[test]
    fn kedlaya_residuals_zero() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let res = kedlaya_identity_check(&half, 10).unwrap();
        assert!(res.iter().all(|r| r.is_zero()));
        // hand check at order 1: both coefficients are 1/(lambda(1-lambda)) = 4
        let res1 = kedlaya_identity_check(&half, 1).unwrap();
        assert!(res1.iter().all(|r| r.is_zero()));
        let seven_thirds = BigRational::new(BigInt::from(7), BigInt::from(3));
        let res0 = kedlaya_identity_check(&seven_thirds, 0).unwrap();
        assert!(res0[0].is_zero());
    }

    #[test]
    fn kedlaya_pole_detected() {
        let three = BigRational::from(BigInt::from(3));
        assert!(matches!(kedlaya_identity_check(&three, 10), Err(Error::Pole(3))));
    }
}
