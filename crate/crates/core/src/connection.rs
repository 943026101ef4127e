use crate::classify::{classify_positive_type, TypeVerdict};
use crate::config::Config;
use crate::dense::DensePAdic;
use crate::error::{Error, Result};
use crate::laurent::{LaurentElement, RingTag};
use crate::scalar::PAdicScalar;
use crate::valuation::{ExponentBound, ExtValuation};
use crate::weyl::{DHatMembershipReport, OperatorElement};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;

/// Element of the rank-one module on the punctured disk: a finite sum
/// sum c_k x^k * x^lambda with exact coefficients.
#[derive(Clone, Debug)]
pub struct NLambdaElement {
    lambda: DensePAdic,
    coeffs: BTreeMap<i64, DensePAdic>,
}

impl NLambdaElement {
    /// The generator x^lambda.
    pub fn generator(config: &Config, lambda: DensePAdic) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, DensePAdic::from_integer(config, 1));
        NLambdaElement { lambda, coeffs }
    }

    pub fn from_coeffs(lambda: DensePAdic, entries: Vec<(i64, DensePAdic)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (k, c) in entries {
            if !c.is_zero() {
                coeffs.insert(k, c);
            }
        }
        NLambdaElement { lambda, coeffs }
    }

    pub fn lambda(&self) -> &DensePAdic {
        &self.lambda
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

    /// Laurent view (coefficients of x^k against the generator).
    pub fn to_laurent(&self, config: &Config) -> Result<LaurentElement> {
        LaurentElement::from_coeffs(
            config,
            RingTag::PuncturedDiskTruncated,
            self.coeffs.iter().map(|(k, c)| (*k, c.clone())).collect(),
        )
    }

    /// Action of an operator: d * (x^k x^lambda) = (lambda + k) x^{k-1} x^lambda,
    /// extended by coefficient multiplication.
    pub fn apply(&self, op: &OperatorElement) -> Result<NLambdaElement> {
        let config = op.config();
        let mut out: BTreeMap<i64, DensePAdic> = BTreeMap::new();
        for (i, g) in op.terms() {
            for (k, c) in &self.coeffs {
                // d^i on x^k x^lambda: prod_{t<i} (lambda + k - t), degree k - i
                let mut factor = DensePAdic::from_integer(config, 1);
                for t in 0..*i {
                    let shift = BigInt::from(*k) - BigInt::from(t);
                    factor = factor.mul(&self.lambda.add_integer(&shift)?)?;
                }
                if factor.is_zero() {
                    continue;
                }
                let dropped = c.mul(&factor)?;
                for (m, a) in g.support() {
                    let pos = k - i64::from(*i) + m;
                    let term = dropped.mul(a)?;
                    let cur = match out.remove(&pos) {
                        None => term,
                        Some(existing) => existing.add(&term)?,
                    };
                    if !cur.is_zero() {
                        out.insert(pos, cur);
                    }
                }
            }
        }
        Ok(NLambdaElement { lambda: self.lambda.clone(), coeffs: out })
    }
}

impl PartialEq for NLambdaElement {
    fn eq(&self, other: &Self) -> bool {
        self.lambda == other.lambda
            && self.coeffs.len() == other.coeffs.len()
            && self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .all(|((ka, ca), (kb, cb))| ka == kb && ca == cb)
    }
}

/// Rank-one b-function data for P = d acting on the generator:
/// P (x^{-s} x^lambda) = (lambda - s) x^{-s-1} x^lambda, so b(s) = lambda - s
/// with the single root lambda. A nonnegative-integer lambda would zero b on
/// the naturals, so the generator is shifted and the root moves to -1.
#[derive(Clone, Debug)]
pub struct BFunctionData {
    pub roots: Vec<PAdicScalar>,
    /// generator x^{-shift} x^lambda used to avoid roots in Z>=0
    pub generator_shift: BigInt,
}

pub fn bfunction_rank_one(lambda: &PAdicScalar, config: &Config) -> Result<BFunctionData> {
    if let Some(n) = lambda.as_integer() {
        if !n.is_negative() {
            // root lambda - (n + 1) = -1
            let shift = &n + 1;
            let root = lambda.shift(&shift, config)?;
            return Ok(BFunctionData { roots: vec![root], generator_shift: shift });
        }
    }
    Ok(BFunctionData { roots: vec![lambda.clone()], generator_shift: BigInt::zero() })
}

#[derive(Clone, Debug)]
pub enum SufficientR {
    /// r such that pi^{jr} d^j / prod_{s<j} b(s) is bounded at the level,
    /// together with the validated exponents j*r - n*j - V_j.
    Radius { r: BigInt, r_second: BigInt, validations: Vec<(usize, BigInt)> },
    /// some root did not classify as positive type within the box
    NoWitness { root_index: usize },
}

/// Internal classification box used on b-function roots.
const ROOT_CLASSIFY_RMAX: u64 = 16;

pub fn sufficient_r(
    bdata: &BFunctionData,
    level: u32,
    j_max: usize,
    cap: u64,
) -> Result<SufficientR> {
    let horizon = j_max.max(8);
    for (idx, root) in bdata.roots.iter().enumerate() {
        let rep = classify_positive_type(root, horizon, ROOT_CLASSIFY_RMAX, cap)?;
        if matches!(rep.verdict, TypeVerdict::NoWitnessUpTo { .. }) {
            return Ok(SufficientR::NoWitness { root_index: idx });
        }
    }
    // V_j = sum over roots of sum_{s<j} v(s - root)
    let mut v = BigInt::zero();
    let mut r_second = BigInt::zero();
    let mut prefix = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let s = BigInt::from(j - 1);
        for root in &bdata.roots {
            match root.valuation_of_difference(&s, cap) {
                ExtValuation::Finite(w) => v += w,
                ExtValuation::LowerBound(_) => {
                    return Err(Error::CapExceeded(format!(
                        "valuation of b({s}) not exact at cap {cap}"
                    )))
                }
                ExtValuation::PlusInfinity => {
                    return Err(Error::LambdaHitsInteger(j as i64 - 1))
                }
            }
        }
        prefix.push(v.clone());
        // smallest integer slope covering V_j: ceil(V_j / j)
        let need = v.div_ceil(&BigInt::from(j));
        if need > r_second {
            r_second = need;
        }
    }
    // r' = -n for P = d; r = max(0, r'' - r')
    let r = (&r_second + BigInt::from(level)).max(BigInt::zero());
    let mut validations = Vec::with_capacity(j_max);
    for (j, vj) in prefix.iter().enumerate() {
        let j = j + 1;
        let e = BigInt::from(j) * (&r - BigInt::from(level)) - vj;
        if e.is_negative() {
            return Err(Error::CapExceeded(format!("validation failed at j = {j}")));
        }
        validations.push((j, e));
    }
    Ok(SufficientR::Radius { r, r_second, validations })
}

/// Solve sum g_s d^s (x^lambda) = target for the constant coefficients g_s.
/// target must be supported in nonpositive powers; g_s = c_{-s} / prod_{j<s}(lambda - j).
pub fn theta_preimage(
    lambda: &DensePAdic,
    target: &LaurentElement,
    n_max: u32,
) -> Result<(OperatorElement, DHatMembershipReport)> {
    let config = target.config().clone();
    if let Some((_, hi)) = target.window() {
        if hi > 0 {
            return Err(Error::Parse("target has positive-power support".into()));
        }
    }
    let max_s = target.window().map_or(0, |(lo, _)| -lo);
    let mut product = DensePAdic::from_integer(&config, 1);
    let mut terms = Vec::new();
    for s in 0..=max_s {
        if s > 0 {
            let factor = lambda.add_integer(&BigInt::from(-(s - 1)))?;
            if factor.is_zero() {
                return Err(Error::LambdaHitsInteger(s - 1));
            }
            product = product.mul(&factor)?;
        }
        if let Some(c) = target.coeff(-s) {
            let g = c.div(&product)?;
            terms.push((s as u32, g));
        }
    }
    let mut op = OperatorElement::constant_coefficient(&config, terms)?;
    if target.truncated {
        op = op.mark_truncated();
    }
    // round trip: the operator must reproduce the target on the window
    let gen = NLambdaElement::generator(&config, lambda.clone());
    let back = gen.apply(&op)?.to_laurent(&config)?;
    let target_plain = LaurentElement::from_coeffs(
        &config,
        RingTag::PuncturedDiskTruncated,
        target.support().map(|(k, c)| (*k, c.clone())).collect(),
    )?;
    if back != target_plain {
        return Err(Error::ConflictingEvidence);
    }
    let membership = op.dhat_membership(n_max)?;
    Ok((op, membership))
}

/// Collapse a general operator to constant coefficients on the generator:
/// h_t = sum_{j>=t} g_{j-t, j} prod_{u=t}^{j-1} (lambda - u), which matches
/// P on x^lambda in all nonpositive powers.
pub fn constant_reduction(
    op: &OperatorElement,
    lambda: &DensePAdic,
    t_max: u32,
) -> Result<Vec<DensePAdic>> {
    let config = op.config().clone();
    match lambda.valuation() {
        ExtValuation::Finite(v) if v.is_negative() => {
            return Err(Error::InvalidConfig("reduction needs |lambda| <= 1".into()))
        }
        _ => {}
    }
    let order = op.order().unwrap_or(0);
    let mut out = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        let mut h = DensePAdic::zero(&config);
        let mut product = DensePAdic::from_integer(&config, 1);
        for j in t..=order.max(t) {
            if j > t {
                let factor = lambda.add_integer(&-BigInt::from(j - 1))?;
                product = product.mul(&factor)?;
            }
            let Some(g) = op.coeff(j) else { continue };
            let Some(c) = g.coeff(i64::from(j - t)) else { continue };
            h = h.add(&c.mul(&product)?)?;
        }
        out.push(h);
    }
    Ok(out)
}

/// One step of the divergence chain: at slope r the index i_r carries the
/// spike, j_r fixes eps_r = |pi|^{r j_r}, and g is the preimage coefficient
/// pi^{(2 i_r - j_r) r} / prod_{j < i_r} (lambda - j).
#[derive(Clone, Debug)]
pub struct WitnessStep {
    pub r: u64,
    pub i: BigInt,
    pub j: BigInt,
    /// r * j
    pub eps_exponent: BigInt,
    /// (2 i - j) r, the coefficient exponent of m at x^{-i}
    pub m_coeff_exponent: BigInt,
    /// V_i = v(prod_{j<i}(lambda - j))
    pub product_valuation: ExtValuation,
    pub g_exponent: ExponentBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessVerdict {
    DivergenceWitnessed,
    NoWitnessInBox,
}

#[derive(Clone, Debug)]
pub struct MembershipTrend {
    pub level: u32,
    pub margins: Vec<(BigInt, BigInt)>,
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub verdict: WitnessVerdict,
    pub steps: Vec<WitnessStep>,
    pub r_max: u64,
    pub i_max: u64,
    /// decay trends of the assembled element m at each level
    pub membership: Vec<MembershipTrend>,
}

fn prefix_valuation(lambda: &PAdicScalar, n: &BigInt, cap: u64) -> Result<ExtValuation> {
    match lambda {
        PAdicScalar::Sparse(s) => s.prefix_valuation_sum(n),
        PAdicScalar::Dense(_) => {
            let nn = u64::try_from(n)
                .map_err(|_| Error::CapExceeded("dense prefix horizon".into()))?;
            let mut acc = ExtValuation::Finite(BigInt::zero());
            for j in 0..nn {
                acc = acc.add(&lambda.valuation_of_difference(&BigInt::from(j), cap));
            }
            Ok(acc)
        }
    }
}

/// Search the inductive chain from the divergence construction: for each
/// r = 1..r_max pick the smallest admissible i_r with a strictly more
/// negative preimage exponent. Taking j_r = i_r - 1 maximizes the slack in
/// eps_r, so admissibility reduces to g < 0, g strictly decreasing, and
/// i_r increasing; the eps inequalities follow and are stored explicitly.
pub fn divergence_witness(
    lambda: &PAdicScalar,
    r_max: u64,
    i_max: u64,
    cap: u64,
) -> Result<WitnessReport> {
    if r_max < 1 {
        return Err(Error::InvalidConfig("r_max must be >= 1".into()));
    }
    let mut report = WitnessReport {
        verdict: WitnessVerdict::NoWitnessInBox,
        steps: Vec::new(),
        r_max,
        i_max,
        membership: Vec::new(),
    };
    if lambda.is_nonneg_integer() {
        return Ok(report);
    }
    // candidate spike positions: all small integers, plus (for sparse
    // lambda) the indices one past each expandable partial sum, where the
    // construction's margins concentrate
    let mut candidates: Vec<BigInt> = (2..=i_max).map(BigInt::from).collect();
    if let PAdicScalar::Sparse(s) = lambda {
        for t in 1..=s.materializable_partial_sums() {
            let c = s.partial_sum(t)? + 1;
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
        candidates.sort();
    }
    let mut prev_i = BigInt::one();
    let mut prev_g: Option<ExponentBound> = None;
    for r in 1..=r_max {
        let mut found = None;
        for i in &candidates {
            if i <= &prev_i {
                continue;
            }
            let v = prefix_valuation(lambda, i, cap)?;
            let j: BigInt = i - 1;
            let m_coeff = (BigInt::from(2) * i - &j) * BigInt::from(r);
            let g = match &v {
                ExtValuation::Finite(v) => ExponentBound::Exact(&m_coeff - v),
                ExtValuation::LowerBound(b) => ExponentBound::AtMost(&m_coeff - b),
                ExtValuation::PlusInfinity => continue,
            };
            if !g.is_negative() {
                continue;
            }
            if let Some(pg) = &prev_g {
                if !g.provably_less(pg) {
                    continue;
                }
            }
            found = Some(WitnessStep {
                r,
                i: i.clone(),
                j: j.clone(),
                eps_exponent: BigInt::from(r) * &j,
                m_coeff_exponent: m_coeff,
                product_valuation: v,
                g_exponent: g,
            });
            break;
        }
        match found {
            Some(step) => {
                prev_i = step.i.clone();
                prev_g = Some(step.g_exponent.clone());
                report.steps.push(step);
            }
            None => return Ok(report),
        }
    }
    // decay trends of m = sum_r pi^{(2 i_r - j_r) r} x^{-i_r}
    for n in 0..=r_max as u32 {
        let margins: Vec<(BigInt, BigInt)> = report
            .steps
            .iter()
            .map(|s| (s.i.clone(), &s.m_coeff_exponent - BigInt::from(n as u64) * &s.i))
            .collect();
        let tail = &margins[margins.len() / 2..];
        let passes = tail.windows(2).all(|w| w[0].1 < w[1].1);
        report.membership.push(MembershipTrend { level: n, margins, passes });
    }
    report.verdict = WitnessVerdict::DivergenceWitnessed;
    Ok(report)
}

/// Recheck a stored witness from its own data: the eps chain, the coefficient
/// identities, and the g-exponent requirements.
pub fn verify_witness(report: &WitnessReport) -> bool {
    if report.verdict != WitnessVerdict::DivergenceWitnessed {
        return false;
    }
    if report.steps.is_empty() || report.steps.len() != report.r_max as usize {
        return false;
    }
    let mut prev: Option<&WitnessStep> = None;
    for (idx, s) in report.steps.iter().enumerate() {
        if s.r != idx as u64 + 1 {
            return false;
        }
        // eps_r > 0 and j < i
        if s.eps_exponent != BigInt::from(s.r) * &s.j || s.j < BigInt::one() || s.j >= s.i {
            return false;
        }
        if s.m_coeff_exponent != (BigInt::from(2) * &s.i - &s.j) * BigInt::from(s.r) {
            return false;
        }
        // g = m_coeff - V and g < 0 (the margin condition |pi^{2ri}/prod| > eps_r
        // is equivalent given j = i - 1)
        let recomputed = match &s.product_valuation {
            ExtValuation::Finite(v) => ExponentBound::Exact(&s.m_coeff_exponent - v),
            ExtValuation::LowerBound(b) => ExponentBound::AtMost(&s.m_coeff_exponent - b),
            ExtValuation::PlusInfinity => return false,
        };
        if recomputed != s.g_exponent || !s.g_exponent.is_negative() {
            return false;
        }
        if let Some(p) = prev {
            // eps strictly decreasing, indices increasing, g strictly decreasing
            if s.eps_exponent <= p.eps_exponent || s.i <= p.i {
                return false;
            }
            if !s.g_exponent.provably_less(&p.g_exponent) {
                return false;
            }
        }
        prev = Some(s);
    }
    true
}

/// Search box for the consolidated probe.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub horizon: usize,
    pub r_max: u64,
    pub i_max: u64,
    pub n_max: u32,
    pub j_max: usize,
    pub cap: u64,
    /// chain length for the divergence search
    pub witness_r_max: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            horizon: 64,
            r_max: 8,
            i_max: 256,
            n_max: 3,
            j_max: 32,
            cap: 1 << 20,
            witness_r_max: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProbeVerdict {
    /// sufficient radii per level n = 0..n_max
    CoadmissibleEvidence { r_per_level: Vec<(u32, BigInt)> },
    DivergenceWitnessed(WitnessReport),
    Inconclusive,
}

pub fn coadmissibility_probe(
    lambda: &PAdicScalar,
    config: &Config,
    probe: &ProbeConfig,
) -> Result<ProbeVerdict> {
    let classify = classify_positive_type(lambda, probe.horizon, probe.r_max, probe.cap)?;
    let positive = !matches!(classify.verdict, TypeVerdict::NoWitnessUpTo { .. });
    let mut evidence = None;
    if positive {
        let bdata = bfunction_rank_one(lambda, config)?;
        let mut per_level = Vec::new();
        let mut all = true;
        for n in 0..=probe.n_max {
            match sufficient_r(&bdata, n, probe.j_max, probe.cap)? {
                SufficientR::Radius { r, .. } => per_level.push((n, r)),
                SufficientR::NoWitness { .. } => {
                    all = false;
                    break;
                }
            }
        }
        if all {
            evidence = Some(per_level);
        }
    }
    let witness = divergence_witness(lambda, probe.witness_r_max, probe.i_max, probe.cap)?;
    let witnessed = witness.verdict == WitnessVerdict::DivergenceWitnessed;
    match (evidence, witnessed) {
        (Some(_), true) => Err(Error::ConflictingEvidence),
        (Some(r_per_level), false) => Ok(ProbeVerdict::CoadmissibleEvidence { r_per_level }),
        (None, true) => Ok(ProbeVerdict::DivergenceWitnessed(witness)),
        (None, false) => Ok(ProbeVerdict::Inconclusive),
    }
}
