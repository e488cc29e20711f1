//! Combinatorial pseudorandomness for permutation families: capture search,
//! restriction-quasiregularity, variance-quasirandomness, the implications
//! between them, density-increment bootstrapping, and extra-agreement search.
//!
//! All verdicts are exact and exhaustive. Witness tie-breaking is always the
//! lexicographic order on (sorted domain, then images), sizes ascending where
//! several sizes compete, so results are reproducible across runs and thread
//! counts.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::{PartialBijection, PermFamily, Permutation};
use crate::spectral::FunctionOnSn;

/// Upper bound on the number of candidate bijections a single exhaustive
/// check is allowed to enumerate.
pub const CANDIDATE_BUDGET: u64 = 5_000_000;

fn big(n: usize) -> BigInt {
    BigInt::from(n)
}

fn rat(num: usize, den: usize) -> BigRational {
    BigRational::new(big(num), big(den))
}

/// A comparison threshold that is either an exact rational or an exact
/// multiple of a square root, compared by squaring (no floating point).
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Rational(BigRational),
    /// coeff * sqrt(radicand), with coeff >= 0.
    SqrtMultiple { coeff: BigRational, radicand: usize },
}

impl Threshold {
    pub fn sqrt(radicand: usize) -> Threshold {
        Threshold::SqrtMultiple {
            coeff: BigRational::one(),
            radicand,
        }
    }

    pub fn sqrt_times(coeff: BigRational, radicand: usize) -> Threshold {
        Threshold::SqrtMultiple { coeff, radicand }
    }

    /// x >= self, exactly.
    pub fn reached_by(&self, x: &BigRational) -> bool {
        match self {
            Threshold::Rational(a) => x >= a,
            Threshold::SqrtMultiple { coeff, radicand } => {
                if radicand.is_zero() || coeff.is_zero() {
                    return !x.is_negative();
                }
                if x.is_negative() {
                    return false;
                }
                x * x >= coeff * coeff * BigRational::from_integer(big(*radicand))
            }
        }
    }

    /// self <= x, exactly. Identical to `reached_by`; named for readability
    /// at call sites that gate on an upper bound for the threshold itself.
    pub fn at_most(&self, x: &BigRational) -> bool {
        self.reached_by(x)
    }

    pub fn scale(&self, k: &BigRational) -> Threshold {
        match self {
            Threshold::Rational(a) => Threshold::Rational(a * k),
            Threshold::SqrtMultiple { coeff, radicand } => Threshold::SqrtMultiple {
                coeff: coeff * k,
                radicand: *radicand,
            },
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            Threshold::Rational(a) => rational_to_f64(a),
            Threshold::SqrtMultiple { coeff, radicand } => {
                rational_to_f64(coeff) * (*radicand as f64).sqrt()
            }
        }
    }
}

impl From<BigRational> for Threshold {
    fn from(a: BigRational) -> Threshold {
        Threshold::Rational(a)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Rational(a) => write!(f, "{a}"),
            Threshold::SqrtMultiple { coeff, radicand } => {
                write!(f, "{coeff}*sqrt({radicand})")
            }
        }
    }
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Captureable,
    Quasiregular,
    Quasirandom,
}

/// Outcome of one exhaustive pseudorandomness check.
///
/// `witness` is present exactly when the verdict is the failure direction
/// (a capturing bijection, or a restriction breaking quasiregularity);
/// `attained` is the extremal measure, ratio, or normalized variance found,
/// reproducible by re-evaluating the witness.
#[derive(Debug, Clone)]
pub struct PseudorandomnessReport {
    pub kind: ReportKind,
    pub size_parameter: usize,
    pub threshold: Threshold,
    pub verdict: bool,
    pub witness: Option<PartialBijection>,
    pub attained: BigRational,
}

/// Bitset acceleration for membership counting: one bit per (point, image)
/// pair, so agreement and disagreement with a partial bijection are popcount
/// tests. Requires n^2 <= 128.
struct FamilyMasks {
    n: usize,
    fam: Vec<u128>,
    amb: Vec<u128>,
}

fn perm_mask(p: &Permutation, n: usize) -> u128 {
    let mut m = 0u128;
    for (x, &y) in p.images().iter().enumerate() {
        m |= 1u128 << (x * n + y as usize);
    }
    m
}

fn pb_mask(pi: &PartialBijection, n: usize) -> u128 {
    let mut m = 0u128;
    for (x, y) in pi.pairs() {
        m |= 1u128 << (x * n + y);
    }
    m
}

impl FamilyMasks {
    fn new(f: &PermFamily) -> Result<FamilyMasks> {
        let n = f.n();
        if n * n > 128 {
            return Err(Error::ResourceLimit(format!(
                "bitset counting supports n <= 11, got n = {n}"
            )));
        }
        let amb = f
            .ambient()
            .members()?
            .iter()
            .map(|p| perm_mask(p, n))
            .collect();
        let fam = f.members().map(|p| perm_mask(p, n)).collect();
        Ok(FamilyMasks { n, fam, amb })
    }

    /// (|F ∩ agree(π)|, |ambient ∩ agree(π)|).
    fn counts_agreeing(&self, pi: &PartialBijection) -> (usize, usize) {
        let pm = pb_mask(pi, self.n);
        let k = pi.len() as u32;
        let fam = self
            .fam
            .iter()
            .filter(|&&m| (m & pm).count_ones() == k)
            .count();
        let amb = self
            .amb
            .iter()
            .filter(|&&m| (m & pm).count_ones() == k)
            .count();
        (fam, amb)
    }

    /// (|F ∩ disagree-everywhere(π)|, |ambient ∩ disagree-everywhere(π)|).
    fn counts_disagreeing(&self, pi: &PartialBijection) -> (usize, usize) {
        let pm = pb_mask(pi, self.n);
        let fam = self.fam.iter().filter(|&&m| m & pm == 0).count();
        let amb = self.amb.iter().filter(|&&m| m & pm == 0).count();
        (fam, amb)
    }
}

/// All partial bijections of the given size with domain in
/// [n] \ avoid_dom and range in [n] \ avoid_ran, in lexicographic order on
/// (sorted domain, then images). Points are 0-indexed.
pub fn partial_bijections_avoiding(
    n: usize,
    size: usize,
    avoid_dom: &BTreeSet<usize>,
    avoid_ran: &BTreeSet<usize>,
) -> Result<Vec<PartialBijection>> {
    let free_dom: Vec<usize> = (0..n).filter(|x| !avoid_dom.contains(x)).collect();
    let free_ran: Vec<usize> = (0..n).filter(|y| !avoid_ran.contains(y)).collect();
    if size > free_dom.len() || size > free_ran.len() {
        return Ok(Vec::new());
    }
    let count = count_bijections(free_dom.len(), free_ran.len(), size);
    if count > CANDIDATE_BUDGET {
        return Err(Error::ResourceLimit(format!(
            "candidate enumeration would produce {count} bijections (budget {CANDIDATE_BUDGET})"
        )));
    }
    let mut out = Vec::with_capacity(count as usize);
    for dom in free_dom.iter().combinations(size) {
        for img in free_ran.iter().permutations(size) {
            let pairs = dom.iter().zip(img.iter()).map(|(&&x, &&y)| (x, y));
            out.push(PartialBijection::from_pairs(pairs)?);
        }
    }
    Ok(out)
}

fn count_bijections(free_dom: usize, free_ran: usize, size: usize) -> u64 {
    let mut c = 1u64;
    // C(free_dom, size) * free_ran * (free_ran - 1) * ... saturating.
    for i in 0..size {
        c = c
            .saturating_mul((free_dom - i) as u64)
            .saturating_mul((free_ran - i) as u64)
            / ((i + 1) as u64);
    }
    c
}

fn constrained_points(f: &PermFamily) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let merged = f.ambient().merged_agree();
    (
        merged.domain().into_iter().collect(),
        merged.range().into_iter().collect(),
    )
}

/// Capture search: is some bijection of size at most `s` (avoiding the
/// ambient agreement constraints, the empty bijection included) able to
/// push the family's measure down to `eps` by forbidding all agreement
/// with it? The witness is the lexicographically least capturing bijection
/// of minimum size.
pub fn check_captureable(
    f: &PermFamily,
    s: usize,
    eps: &BigRational,
) -> Result<PseudorandomnessReport> {
    let n = f.n();
    let masks = FamilyMasks::new(f)?;
    let (avoid_dom, avoid_ran) = constrained_points(f);
    if s > n - avoid_dom.len() {
        return Err(Error::InvalidInput(format!(
            "capture size {s} exceeds the {} unconstrained points",
            n - avoid_dom.len()
        )));
    }
    let mut min_measure: Option<BigRational> = None;
    for size in 0..=s {
        for pi in partial_bijections_avoiding(n, size, &avoid_dom, &avoid_ran)? {
            let (fam, amb) = masks.counts_disagreeing(&pi);
            // An empty restricted ambient forces an empty restricted family;
            // the measure is taken as zero.
            let mu = if amb == 0 {
                BigRational::zero()
            } else {
                rat(fam, amb)
            };
            if &mu <= eps {
                return Ok(PseudorandomnessReport {
                    kind: ReportKind::Captureable,
                    size_parameter: s,
                    threshold: Threshold::Rational(eps.clone()),
                    verdict: true,
                    witness: Some(pi),
                    attained: mu,
                });
            }
            if min_measure.as_ref().is_none_or(|m| &mu < m) {
                min_measure = Some(mu);
            }
        }
    }
    Ok(PseudorandomnessReport {
        kind: ReportKind::Captureable,
        size_parameter: s,
        threshold: Threshold::Rational(eps.clone()),
        verdict: false,
        witness: None,
        attained: min_measure.unwrap_or_else(BigRational::zero),
    })
}

/// Worst measure-boost ratio mu(F(pi))/mu(F) over all bijections pi of size
/// exactly `s` avoiding the ambient agreement constraints, with the first
/// (lexicographic) bijection attaining it. Candidates whose restricted
/// ambient class is empty are skipped.
pub fn worst_restriction_ratio(
    f: &PermFamily,
    s: usize,
) -> Result<(BigRational, Option<PartialBijection>)> {
    let masks = FamilyMasks::new(f)?;
    let (avoid_dom, avoid_ran) = constrained_points(f);
    let fam_total = masks.fam.len();
    let amb_total = masks.amb.len();
    if fam_total == 0 {
        return Err(Error::DegenerateInput(
            "quasiregularity of a measure-zero family".into(),
        ));
    }
    let mut worst: Option<(BigRational, PartialBijection)> = None;
    for pi in partial_bijections_avoiding(f.n(), s, &avoid_dom, &avoid_ran)? {
        let (fam, amb) = masks.counts_agreeing(&pi);
        if amb == 0 {
            continue;
        }
        let ratio = BigRational::new(big(fam) * big(amb_total), big(amb) * big(fam_total));
        if worst.as_ref().is_none_or(|(w, _)| &ratio > w) {
            worst = Some((ratio, pi));
        }
    }
    match worst {
        Some((r, pi)) => Ok((r, Some(pi))),
        None => Ok((BigRational::zero(), None)),
    }
}

/// Quasiregularity check for a family: no size-`s` restriction may boost the
/// measure by a factor of `alpha` or more.
pub fn check_quasiregular(
    f: &PermFamily,
    s: usize,
    alpha: &Threshold,
) -> Result<PseudorandomnessReport> {
    let (ratio, arg) = worst_restriction_ratio(f, s)?;
    let verdict = !alpha.reached_by(&ratio);
    Ok(PseudorandomnessReport {
        kind: ReportKind::Quasiregular,
        size_parameter: s,
        threshold: alpha.clone(),
        verdict,
        witness: if verdict { None } else { arg },
        attained: ratio,
    })
}

/// Worst conditional-expectation boost ratio E[f(pi)]/E[f] over size-`s`
/// bijections, for a fractional function.
pub fn worst_restriction_ratio_fn(
    f: &FunctionOnSn,
    s: usize,
) -> Result<(BigRational, Option<PartialBijection>)> {
    let n = f.n();
    if n * n > 128 {
        return Err(Error::ResourceLimit(format!(
            "bitset counting supports n <= 11, got n = {n}"
        )));
    }
    let expectation = f.expectation()?;
    if expectation.is_zero() {
        return Err(Error::DegenerateInput(
            "quasiregularity of a zero-expectation function".into(),
        ));
    }
    let amb_members = f.ambient().members()?;
    let amb_masks: Vec<u128> = amb_members.iter().map(|p| perm_mask(p, n)).collect();
    let support: Vec<(u128, BigRational)> = f
        .support()
        .map(|(p, v)| (perm_mask(p, n), v.clone()))
        .collect();
    let merged = f.ambient().merged_agree();
    let avoid_dom: BTreeSet<usize> = merged.domain().into_iter().collect();
    let avoid_ran: BTreeSet<usize> = merged.range().into_iter().collect();
    let mut worst: Option<(BigRational, PartialBijection)> = None;
    for pi in partial_bijections_avoiding(n, s, &avoid_dom, &avoid_ran)? {
        let pm = pb_mask(&pi, n);
        let k = pi.len() as u32;
        let amb = amb_masks
            .iter()
            .filter(|&&m| (m & pm).count_ones() == k)
            .count();
        if amb == 0 {
            continue;
        }
        let num: BigRational = support
            .iter()
            .filter(|(m, _)| (m & pm).count_ones() == k)
            .map(|(_, v)| v)
            .sum();
        // ratio = (num / amb) / (sum / amb_total)
        let cond = num / BigRational::from_integer(big(amb));
        let ratio = cond / (&expectation);
        if worst.as_ref().is_none_or(|(w, _)| &ratio > w) {
            worst = Some((ratio, pi));
        }
    }
    match worst {
        Some((r, pi)) => Ok((r, Some(pi))),
        None => Ok((BigRational::zero(), None)),
    }
}

/// Quasiregularity check for a fractional function on a restriction class.
pub fn check_quasiregular_fn(
    f: &FunctionOnSn,
    s: usize,
    alpha: &Threshold,
) -> Result<PseudorandomnessReport> {
    let (ratio, arg) = worst_restriction_ratio_fn(f, s)?;
    let verdict = !alpha.reached_by(&ratio);
    Ok(PseudorandomnessReport {
        kind: ReportKind::Quasiregular,
        size_parameter: s,
        threshold: alpha.clone(),
        verdict,
        witness: if verdict { None } else { arg },
        attained: ratio,
    })
}

/// Quasirandomness check: the exact variance of the conditional expectation
/// E[f(pi)] over a uniformly random bijection pi between r-element subsets
/// must be at most eps * (E[f])^2. The function must live on the full S_n.
pub fn check_quasirandom(
    f: &FunctionOnSn,
    r: usize,
    eps: &BigRational,
) -> Result<PseudorandomnessReport> {
    let n = f.n();
    if !f.ambient().agree_constraints().is_empty()
        || !f.ambient().disagree_constraints().is_empty()
    {
        return Err(Error::Contract(
            "quasirandomness is defined for functions on the full S_n".into(),
        ));
    }
    if n * n > 128 {
        return Err(Error::ResourceLimit(format!(
            "bitset counting supports n <= 11, got n = {n}"
        )));
    }
    let expectation = f.expectation()?;
    if expectation.is_zero() {
        return Err(Error::DegenerateInput(
            "quasirandomness of a zero-expectation function".into(),
        ));
    }
    let support: Vec<(u128, BigRational)> = f
        .support()
        .map(|(p, v)| (perm_mask(p, n), v.clone()))
        .collect();
    let stabilizer = crate::perm::factorial(n - r);
    let denom = BigRational::from_integer(BigInt::from(stabilizer));

    let empty = BTreeSet::new();
    let candidates = partial_bijections_avoiding(n, r, &empty, &empty)?;
    let mut var_sum = BigRational::zero();
    for pi in &candidates {
        let pm = pb_mask(pi, n);
        let k = pi.len() as u32;
        let num: BigRational = support
            .iter()
            .filter(|(m, _)| (m & pm).count_ones() == k)
            .map(|(_, v)| v)
            .sum();
        let dev = num / &denom - &expectation;
        var_sum += &dev * &dev;
    }
    let variance = var_sum / BigRational::from_integer(big(candidates.len()));
    let attained = &variance / (&expectation * &expectation);
    Ok(PseudorandomnessReport {
        kind: ReportKind::Quasirandom,
        size_parameter: r,
        threshold: Threshold::Rational(eps.clone()),
        verdict: &attained <= eps,
        witness: None,
        attained,
    })
}

/// A (s, 1+eps)-quasiregular [0,1]-valued function is (s, 2*eps + eps^2)-
/// quasirandom. Verifies the hypothesis first (contract error if it fails),
/// then runs the exact variance check; a `false` return is a bug.
pub fn quasiregular_implies_quasirandom_check(
    f: &FunctionOnSn,
    s: usize,
    eps: &BigRational,
) -> Result<bool> {
    if eps.is_negative() || eps >= &BigRational::one() {
        return Err(Error::Contract(format!(
            "quasiregularity margin must lie in [0,1), got {eps}"
        )));
    }
    for (_, v) in f.support() {
        if v.is_negative() || v > &BigRational::one() {
            return Err(Error::Contract(
                "the implication requires values in [0,1]".into(),
            ));
        }
    }
    // The variance bound only consumes E[f(pi)] <= (1 + eps) E[f], so the
    // hypothesis is verified non-strictly; a ratio of exactly 1 + eps (for
    // example any constant function at eps = 0) still qualifies.
    let bound = BigRational::one() + eps;
    let (ratio, _) = worst_restriction_ratio_fn(f, s)?;
    if ratio > bound {
        return Err(Error::Contract(format!(
            "hypothesis not established: restriction ratio {ratio} exceeds {bound}"
        )));
    }
    let derived = BigRational::from_integer(big(2)) * eps + eps * eps;
    Ok(check_quasirandom(f, s, &derived)?.verdict)
}

/// A (1,beta)-quasiregular family of measure above delta cannot be captured
/// at level delta/2 by up to `cap_size` constraints, provided
/// cap_size <= (n - b) / (2 beta). Verifies the hypotheses (contract error
/// otherwise), then runs the exhaustive capture search; must return true.
pub fn quasiregular_implies_uncaptureable_check(
    h: &PermFamily,
    beta: &Threshold,
    delta: &BigRational,
    cap_size: usize,
    b: usize,
) -> Result<bool> {
    let n = h.n();
    let reg = check_quasiregular(h, 1, beta)?;
    if !reg.verdict {
        return Err(Error::Contract(format!(
            "hypothesis not established: restriction ratio {} reaches {beta}",
            reg.attained
        )));
    }
    if &h.measure()? <= delta {
        return Err(Error::Contract(format!(
            "hypothesis not established: measure is not above {delta}"
        )));
    }
    if n < b
        || !beta
            .scale(&BigRational::from_integer(big(2 * cap_size)))
            .at_most(&BigRational::from_integer(big(n - b)))
    {
        return Err(Error::Contract(format!(
            "capture size {cap_size} exceeds (n - b) / (2 * {beta})"
        )));
    }
    let half_delta = delta / BigRational::from_integer(big(2));
    Ok(!check_captureable(h, cap_size, &half_delta)?.verdict)
}

/// Report for `restrict_disagree_preserves`: quasiregularity degradation and
/// measure retention after forbidding agreement with one bijection.
#[derive(Debug, Clone)]
pub struct DisagreeRestrictionReport {
    pub pre_measure: BigRational,
    pub post_measure: BigRational,
    /// post / pre.
    pub retention: BigRational,
    /// Guaranteed lower bound on retention (approximate display value).
    pub guaranteed_retention: f64,
    /// Worst restriction ratio of the restricted family.
    pub attained_ratio: BigRational,
    /// Guaranteed upper threshold for the ratio (approximate display value).
    pub guaranteed_ratio: f64,
    pub restricted: PermFamily,
    pub pass: bool,
}

/// Forbidding agreement with a bijection pi degrades (s,alpha)-
/// quasiregularity only mildly and keeps most of the measure:
/// for s = 1 (requires alpha >= 1 and alpha <= (n-b)/(4 |pi|)) the restricted
/// family is (1, 2 alpha)-quasiregular with retention >= 1/2; for s >= 2
/// (requires 1 <= alpha <= 2 and n >= |pi|^2 + b) it is
/// (s, (1 + 4/sqrt(n-b)) alpha)-quasiregular with retention
/// >= 1 - 2/sqrt(n-b). All comparisons are exact (squared where irrational).
pub fn restrict_disagree_preserves(
    h: &PermFamily,
    pi: &PartialBijection,
    s: usize,
    alpha: &BigRational,
    b: usize,
) -> Result<DisagreeRestrictionReport> {
    let n = h.n();
    let r = pi.len();
    let one = BigRational::one();
    if n <= b {
        return Err(Error::Contract(format!(
            "constraint budget b = {b} leaves no free points in [{n}]"
        )));
    }
    if s == 1 {
        if alpha < &one || alpha * BigRational::from_integer(big(4 * r.max(1))) > rat(n - b, 1) {
            return Err(Error::Contract(format!(
                "need 1 <= alpha <= (n-b)/(4r), got alpha = {alpha}"
            )));
        }
    } else {
        if alpha < &one || alpha > &rat(2, 1) {
            return Err(Error::Contract(format!(
                "need 1 <= alpha <= 2, got alpha = {alpha}"
            )));
        }
        if n < r * r + b {
            return Err(Error::Contract(format!(
                "need n >= |pi|^2 + b = {}, got n = {n}",
                r * r + b
            )));
        }
    }
    let reg = check_quasiregular(h, s, &Threshold::Rational(alpha.clone()))?;
    if !reg.verdict {
        return Err(Error::Contract(format!(
            "hypothesis not established: restriction ratio {} reaches {alpha}",
            reg.attained
        )));
    }
    let pre = h.measure()?;
    let restricted = if pi.is_empty() {
        h.clone()
    } else {
        h.restrict(&[], std::slice::from_ref(pi))?
    };
    let post = restricted.measure()?;
    let retention = &post / &pre;
    let (ratio, _) = worst_restriction_ratio(&restricted, s)?;

    let nb = BigRational::from_integer(big(n - b));
    let (retention_ok, ratio_ok, guaranteed_retention, guaranteed_ratio);
    if s == 1 {
        retention_ok = retention >= rat(1, 2);
        let bound = BigRational::from_integer(big(2)) * alpha;
        ratio_ok = ratio < bound;
        guaranteed_retention = 0.5;
        guaranteed_ratio = rational_to_f64(&bound);
    } else {
        // retention >= 1 - 2/sqrt(n-b), ratio < (1 + 4/sqrt(n-b)) alpha.
        retention_ok = if retention >= one {
            true
        } else {
            let gap = &one - &retention;
            &gap * &gap * &nb <= rat(4, 1)
        };
        let rel = &ratio / alpha;
        ratio_ok = if rel <= one {
            true
        } else {
            let excess = &rel - &one;
            &excess * &excess * &nb < rat(16, 1)
        };
        let root = ((n - b) as f64).sqrt();
        guaranteed_retention = 1.0 - 2.0 / root;
        guaranteed_ratio = (1.0 + 4.0 / root) * rational_to_f64(alpha);
    }
    Ok(DisagreeRestrictionReport {
        pre_measure: pre,
        post_measure: post,
        retention,
        guaranteed_retention,
        attained_ratio: ratio,
        guaranteed_ratio,
        restricted,
        pass: retention_ok && ratio_ok,
    })
}

/// Whether hypothesis gates that fail should abort (the default) or merely
/// be recorded, for desk-scale demonstrations below the asymptotic
/// thresholds. Postconditions are always re-verified either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatePolicy {
    Enforce,
    Waive,
}

#[derive(Debug, Clone)]
pub struct GateCheck {
    pub description: String,
    pub satisfied: bool,
}

pub(crate) fn gate(
    gates: &mut Vec<GateCheck>,
    policy: GatePolicy,
    description: String,
    satisfied: bool,
) -> Result<()> {
    gates.push(GateCheck {
        description: description.clone(),
        satisfied,
    });
    if !satisfied && policy == GatePolicy::Enforce {
        return Err(Error::Contract(format!("hypothesis gate failed: {description}")));
    }
    Ok(())
}

/// Outcome of a density-increment bootstrap on a pair of families.
#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    /// Agreement extension adjoined to the first family (and forbidden to
    /// the second).
    pub pi3: PartialBijection,
    /// Agreement extension adjoined to the second family (and forbidden to
    /// the first).
    pub pi4: PartialBijection,
    pub family1: PermFamily,
    pub family2: PermFamily,
    pub gates: Vec<GateCheck>,
}

/// The mutual-blocking hypothesis: wherever one family's agreement
/// constraint maps x to y without the other's agreement constraint touching
/// x or y, the other family must already forbid (x,y) via a disagreement
/// constraint.
pub fn mutual_blocking_holds(f1: &PermFamily, f2: &PermFamily) -> bool {
    let check = |a: &PermFamily, b: &PermFamily| {
        let pa = a.ambient().merged_agree().clone();
        let pb = b.ambient().merged_agree().clone();
        let blocked = pa.pairs().all(|(x, y)| {
            if pb.image_of(x).is_some() || pb.preimage_of(y).is_some() {
                return true;
            }
            b.ambient()
                .disagree_constraints()
                .iter()
                .any(|d| d.image_of(x) == Some(y))
        });
        blocked
    };
    check(f1, f2) && check(f2, f1)
}

fn constraint_budget(f: &PermFamily) -> usize {
    f.ambient().merged_agree().len()
        + f.ambient()
            .disagree_constraints()
            .iter()
            .map(|d| d.len())
            .sum::<usize>()
}

/// Lexicographically least size-`step` bijection whose agreement restriction
/// boosts the family's measure by the threshold factor or more, if any.
fn first_boosting_restriction(
    f: &PermFamily,
    step: usize,
    factor: &Threshold,
) -> Result<Option<PartialBijection>> {
    let masks = FamilyMasks::new(f)?;
    let (avoid_dom, avoid_ran) = constrained_points(f);
    let fam_total = masks.fam.len();
    let amb_total = masks.amb.len();
    if fam_total == 0 {
        return Err(Error::DegenerateInput(
            "density increment on a measure-zero family".into(),
        ));
    }
    for pi in partial_bijections_avoiding(f.n(), step, &avoid_dom, &avoid_ran)? {
        let (fam, amb) = masks.counts_agreeing(&pi);
        if amb == 0 {
            continue;
        }
        let ratio = BigRational::new(big(fam) * big(amb_total), big(amb) * big(fam_total));
        if factor.reached_by(&ratio) {
            return Ok(Some(pi));
        }
    }
    Ok(None)
}

/// Repeatedly adjoin the least boosting restriction until none remains.
/// `max_pairs` bounds |domain| of the accumulated extension; exceeding it is
/// an internal invariant violation given the hypotheses.
fn density_increment_loop(
    f: &PermFamily,
    step: usize,
    factor: &Threshold,
    max_pairs: usize,
) -> Result<(PartialBijection, PermFamily)> {
    let mut cur = f.clone();
    let mut acc = PartialBijection::empty();
    while let Some(pi) = first_boosting_restriction(&cur, step, factor)? {
        if acc.len() + step > max_pairs {
            return Err(Error::Contract(format!(
                "internal invariant violated: density increment exceeded {max_pairs} pairs"
            )));
        }
        acc = acc.union(&pi)?;
        cur = cur.restrict(std::slice::from_ref(&pi), &[])?;
    }
    Ok((acc, cur))
}

fn restrict_both(
    f: &PermFamily,
    agree: &PartialBijection,
    disagree: &PartialBijection,
) -> Result<PermFamily> {
    let agrees: Vec<PartialBijection> = if agree.is_empty() {
        vec![]
    } else {
        vec![agree.clone()]
    };
    let disagrees: Vec<PartialBijection> = if disagree.is_empty() {
        vec![]
    } else {
        vec![disagree.clone()]
    };
    f.restrict(&agrees, &disagrees)
}

fn power_rat(base: usize, exp: usize) -> BigRational {
    BigRational::from_integer(big(base).pow(exp as u32))
}

/// Turn a pair of (s, n^-r)-uncaptureable families into a pair of
/// (1, 2 sqrt(n))-quasiregular families of measure above n^-r / 2, by
/// alternately adjoining single-point agreement extensions (pi3 to the first
/// family, pi4 to the second) and forbidding them to the other family.
/// Postconditions, including preservation of the agreement count between
/// the two merged agreement constraints, are re-verified exactly.
pub fn bootstrap_uncap_to_quasiregular(
    f1: &PermFamily,
    f2: &PermFamily,
    r: usize,
    s: usize,
    policy: GatePolicy,
) -> Result<BootstrapOutcome> {
    let n = f1.n();
    if f2.n() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: f2.n(),
        });
    }
    if r == 0 {
        return Err(Error::InvalidInput("need r >= 1".into()));
    }
    let mut gates = Vec::new();
    let b = constraint_budget(f1).max(constraint_budget(f2));
    gate(
        &mut gates,
        policy,
        format!("s >= 2r - 1 (s = {s}, r = {r})"),
        s >= 2 * r - 1,
    )?;
    // n >= 8 r sqrt(n) + 2r + b, compared by squaring.
    let slack_ok = n >= 2 * r + b && {
        let d = (n - 2 * r - b) as u128;
        d * d >= 64 * (r as u128) * (r as u128) * (n as u128)
    };
    gate(
        &mut gates,
        policy,
        format!("n >= 8r*sqrt(n) + 2r + b (n = {n}, r = {r}, b = {b})"),
        slack_ok,
    )?;
    gate(
        &mut gates,
        policy,
        "mutual blocking between the two agreement constraints".into(),
        mutual_blocking_holds(f1, f2),
    )?;
    let eps = BigRational::new(BigInt::one(), big(n).pow(r as u32));
    for (i, f) in [f1, f2].iter().enumerate() {
        gate(
            &mut gates,
            policy,
            format!("family {} is ({s}, n^-{r})-uncaptureable", i + 1),
            !check_captureable(f, s, &eps)?.verdict,
        )?;
    }

    let sqrt_n = Threshold::sqrt(n);
    let max_pairs = 2 * r - 1;
    let (pi3, _) = density_increment_loop(f1, 1, &sqrt_n, max_pairs)?;
    let f2_blocked = restrict_both(f2, &PartialBijection::empty(), &pi3)?;
    let (pi4, _) = density_increment_loop(&f2_blocked, 1, &sqrt_n, max_pairs)?;

    let out1 = restrict_both(f1, &pi3, &pi4)?;
    let out2 = restrict_both(f2, &pi4, &pi3)?;

    let two_sqrt_n = Threshold::sqrt_times(rat(2, 1), n);
    let floor = power_rat(n, r).recip() / BigRational::from_integer(big(2));
    verify_bootstrap_postconditions(
        f1, f2, &pi3, &pi4, &out1, &out2, 1, &two_sqrt_n, &floor,
    )?;
    Ok(BootstrapOutcome {
        pi3,
        pi4,
        family1: out1,
        family2: out2,
        gates,
    })
}

fn verify_bootstrap_postconditions(
    f1: &PermFamily,
    f2: &PermFamily,
    pi3: &PartialBijection,
    pi4: &PartialBijection,
    out1: &PermFamily,
    out2: &PermFamily,
    s: usize,
    alpha: &Threshold,
    measure_floor: &BigRational,
) -> Result<()> {
    for (i, out) in [out1, out2].iter().enumerate() {
        if &out.measure()? <= measure_floor {
            return Err(Error::Contract(format!(
                "postcondition failed: family {} measure not above {measure_floor}",
                i + 1
            )));
        }
        let (ratio, _) = worst_restriction_ratio(out, s)?;
        if alpha.reached_by(&ratio) {
            return Err(Error::Contract(format!(
                "postcondition failed: family {} restriction ratio {ratio} reaches {alpha}",
                i + 1
            )));
        }
    }
    let p1 = f1.ambient().merged_agree();
    let p2 = f2.ambient().merged_agree();
    let before = p1.intersection_size(p2);
    let after = p1.union(pi3)?.intersection_size(&p2.union(pi4)?);
    if before != after {
        return Err(Error::Contract(format!(
            "postcondition failed: agreement count changed from {before} to {after}"
        )));
    }
    Ok(())
}

/// Turn a pair of (N, c n^-r)-uncaptureable families into a pair of
/// (s, 1 + 2 eps)-quasiregular families of measure above c n^-r / 2, by
/// adjoining size-s agreement extensions. The domain bound on each extension
/// is b' = (r log n - log c) s / log(1 + eps).
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_uncap_to_s_quasiregular(
    f1: &PermFamily,
    f2: &PermFamily,
    r: usize,
    s: usize,
    eps: &BigRational,
    cap_size: usize,
    c: &BigRational,
    policy: GatePolicy,
) -> Result<BootstrapOutcome> {
    let n = f1.n();
    if f2.n() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: f2.n(),
        });
    }
    if eps <= &BigRational::zero() || eps >= &BigRational::one() {
        return Err(Error::InvalidInput(format!(
            "need 0 < eps < 1, got {eps}"
        )));
    }
    if c <= &BigRational::zero() || s == 0 {
        return Err(Error::InvalidInput("need c > 0 and s >= 1".into()));
    }
    let mut gates = Vec::new();
    let b = constraint_budget(f1).max(constraint_budget(f2));
    let eps_f = rational_to_f64(eps);
    let c_f = rational_to_f64(c);
    let b_prime = (r as f64 * (n as f64).ln() - c_f.ln()) * s as f64 / (1.0 + eps_f).ln();
    gate(
        &mut gates,
        policy,
        format!("N >= b' (N = {cap_size}, b' = {b_prime:.3})"),
        cap_size as f64 >= b_prime,
    )?;
    let room = n as f64 - b as f64 - b_prime;
    gate(
        &mut gates,
        policy,
        format!("eps >= 8/sqrt(n - b - b') (eps = {eps_f:.4})"),
        room > 0.0 && eps_f >= 8.0 / room.sqrt(),
    )?;
    gate(
        &mut gates,
        policy,
        format!("n >= b'^2 + b' + b (n = {n})"),
        n as f64 >= b_prime * b_prime + b_prime + b as f64,
    )?;
    gate(
        &mut gates,
        policy,
        "mutual blocking between the two agreement constraints".into(),
        mutual_blocking_holds(f1, f2),
    )?;
    let uncap_eps = c * power_rat(n, r).recip();
    for (i, f) in [f1, f2].iter().enumerate() {
        gate(
            &mut gates,
            policy,
            format!("family {} is ({cap_size}, c*n^-{r})-uncaptureable", i + 1),
            !check_captureable(f, cap_size, &uncap_eps)?.verdict,
        )?;
    }

    // Step budget: after ceil(M) boosts by a factor of 1 + eps the measure
    // would exceed 1, so fewer than M extensions can ever be adjoined.
    let m_steps = (r as f64 * (n as f64).ln() - c_f.ln()) / (1.0 + eps_f).ln();
    let max_pairs = (m_steps.ceil() as usize) * s;
    let factor = Threshold::Rational(BigRational::one() + eps);
    let (pi3, _) = density_increment_loop(f1, s, &factor, max_pairs)?;
    let f2_blocked = restrict_both(f2, &PartialBijection::empty(), &pi3)?;
    let (pi4, _) = density_increment_loop(&f2_blocked, s, &factor, max_pairs)?;

    let out1 = restrict_both(f1, &pi3, &pi4)?;
    let out2 = restrict_both(f2, &pi4, &pi3)?;

    let alpha = Threshold::Rational(BigRational::one() + eps + eps);
    let floor = uncap_eps / BigRational::from_integer(big(2));
    verify_bootstrap_postconditions(f1, f2, &pi3, &pi4, &out1, &out2, s, &alpha, &floor)?;
    Ok(BootstrapOutcome {
        pi3,
        pi4,
        family1: out1,
        family2: out2,
        gates,
    })
}

/// Find a size-`t` bijection pi, with domain the first t fully unconstrained
/// points and range disjoint from both families' constraint ranges, whose
/// agreement restriction keeps at least a (1 - 4 eps) fraction of each
/// family's measure. The restricted families are then certified
/// (s - t, 1 + 8 eps)-quasiregular. Search is deterministic: range tuples in
/// lexicographic order, first satisfying tuple returned.
pub fn find_extra_agreements(
    h1: &PermFamily,
    h2: &PermFamily,
    t: usize,
    s: usize,
    eps: &BigRational,
    c0: &BigRational,
) -> Result<PartialBijection> {
    let n = h1.n();
    if h2.n() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: h2.n(),
        });
    }
    if t > s || t == 0 {
        return Err(Error::Contract(format!("need 1 <= t <= s, got t = {t}, s = {s}")));
    }
    if eps.is_negative() || eps >= &rat(3, 32) {
        return Err(Error::Contract(format!(
            "need 0 <= eps < 3/32, got {eps}"
        )));
    }
    let b = [h1, h2]
        .iter()
        .flat_map(|h| {
            std::iter::once(h.ambient().merged_agree().len()).chain(
                h.ambient().disagree_constraints().iter().map(|d| d.len()),
            )
        })
        .max()
        .unwrap_or(0);
    if eps < &(c0 * rat(b * t, n)) {
        return Err(Error::Contract(format!(
            "need eps >= c0*b*t/n = {}, got {eps}",
            c0 * rat(b * t, n)
        )));
    }
    let alpha = Threshold::Rational(BigRational::one() + eps);
    for (i, h) in [h1, h2].iter().enumerate() {
        let reg = check_quasiregular(h, s, &alpha)?;
        if !reg.verdict {
            return Err(Error::Contract(format!(
                "family {} is not quasiregular at ({s}, 1 + {eps})",
                i + 1
            )));
        }
    }

    let mut blocked_dom: BTreeSet<usize> = BTreeSet::new();
    let mut blocked_ran: BTreeSet<usize> = BTreeSet::new();
    for h in [h1, h2] {
        blocked_dom.extend(h.ambient().merged_agree().domain());
        blocked_ran.extend(h.ambient().merged_agree().range());
        for d in h.ambient().disagree_constraints() {
            blocked_dom.extend(d.domain());
            blocked_ran.extend(d.range());
        }
    }
    let s0: Vec<usize> = (0..n).filter(|x| !blocked_dom.contains(x)).take(t).collect();
    if s0.len() < t {
        return Err(Error::DegenerateInput(
            "fewer unconstrained points than requested agreements".into(),
        ));
    }

    let masks1 = FamilyMasks::new(h1)?;
    let masks2 = FamilyMasks::new(h2)?;
    let mu_floor = |masks: &FamilyMasks| {
        // (1 - 4 eps) * |F| / |ambient|, cleared of denominators later.
        (BigRational::one() - rat(4, 1) * eps)
            * BigRational::new(big(masks.fam.len()), big(masks.amb.len()))
    };
    let floor1 = mu_floor(&masks1);
    let floor2 = mu_floor(&masks2);

    for img in (0..n).permutations(t) {
        if img.iter().any(|y| blocked_ran.contains(y)) {
            continue;
        }
        let pi = PartialBijection::from_pairs(s0.iter().copied().zip(img.iter().copied()))?;
        let ok = |masks: &FamilyMasks, floor: &BigRational| {
            let (fam, amb) = masks.counts_agreeing(&pi);
            amb > 0 && &rat(fam, amb) >= floor
        };
        if !(ok(&masks1, &floor1) && ok(&masks2, &floor2)) {
            continue;
        }
        // Measure conditions hold; the quasiregularity of the restrictions
        // is forced, so a failure here is a bug. A size-0 restriction never
        // moves the measure, so t = s needs no re-check.
        if s > t {
            let post_alpha = Threshold::Rational(BigRational::one() + rat(8, 1) * eps);
            for (i, h) in [h1, h2].iter().enumerate() {
                let restricted = h.restrict(std::slice::from_ref(&pi), &[])?;
                let reg = check_quasiregular(&restricted, s - t, &post_alpha)?;
                if !reg.verdict {
                    return Err(Error::Contract(format!(
                        "internal invariant violated: restricted family {} ratio {} reaches {post_alpha}",
                        i + 1,
                        reg.attained
                    )));
                }
            }
        }
        return Ok(pi);
    }
    Err(Error::ExistenceFailure(
        "no agreement extension meets both measure conditions".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{all_permutations, RestrictionClass};
    use rand::{Rng, SeedableRng};

    fn pb(pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::from_one_indexed(pairs).unwrap()
    }

    fn family_where(n: usize, keep: impl FnMut(&Permutation) -> bool) -> PermFamily {
        PermFamily::from_members(
            RestrictionClass::full(n),
            all_permutations(n).unwrap().into_iter().filter(keep),
        )
        .unwrap()
    }

    #[test]
    fn full_family_is_uncaptureable() {
        let f = family_where(4, |_| true);
        let rep = check_captureable(&f, 2, &rat(1, 3)).unwrap();
        assert!(!rep.verdict);
        assert!(rep.witness.is_none());
        assert_eq!(rep.attained, BigRational::one());
    }

    #[test]
    fn star_is_captured_by_its_center() {
        let f = family_where(4, |p| p.image(0) == 0);
        let rep = check_captureable(&f, 1, &BigRational::zero()).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.witness.unwrap(), pb(&[(1, 1)]));
        assert!(rep.attained.is_zero());
    }

    #[test]
    fn fixed_point_union_captured_by_identity_pairs() {
        let f = family_where(5, |p| p.image(0) == 0 || p.image(1) == 1);
        let rep = check_captureable(&f, 2, &BigRational::zero()).unwrap();
        assert!(rep.verdict);
        let w = rep.witness.unwrap();
        assert_eq!(w, pb(&[(1, 1), (2, 2)]));
        // Reproducibility: re-evaluating the witness recovers `attained`.
        let restricted = f.restrict(&[], std::slice::from_ref(&w)).unwrap();
        assert_eq!(restricted.measure().unwrap(), rep.attained);
    }

    #[test]
    fn full_family_is_quasiregular() {
        let f = family_where(4, |_| true);
        let rep = check_quasiregular(&f, 1, &Threshold::Rational(rat(3, 2))).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.attained, BigRational::one());
    }

    #[test]
    fn star_quasiregular_exactly_above_ratio_four() {
        let f = family_where(4, |p| p.image(0) == 0);
        let at4 = check_quasiregular(&f, 1, &Threshold::Rational(rat(4, 1))).unwrap();
        assert!(!at4.verdict);
        assert_eq!(at4.attained, rat(4, 1));
        assert_eq!(at4.witness.unwrap(), pb(&[(1, 1)]));
        let at5 = check_quasiregular(&f, 1, &Threshold::Rational(rat(5, 1))).unwrap();
        assert!(at5.verdict);
        assert!(at5.witness.is_none());
    }

    #[test]
    fn constant_function_is_quasiregular_and_quasirandom() {
        let f = FunctionOnSn::constant(4, rat(2, 7)).unwrap();
        let reg = check_quasiregular_fn(&f, 2, &Threshold::Rational(rat(11, 10))).unwrap();
        assert!(reg.verdict);
        assert_eq!(reg.attained, BigRational::one());
        let qr = check_quasirandom(&f, 1, &BigRational::zero()).unwrap();
        assert!(qr.verdict);
        assert!(qr.attained.is_zero());
    }

    #[test]
    fn star_indicator_variance_ratio_is_one() {
        let f = FunctionOnSn::indicator(&family_where(4, |p| p.image(0) == 0));
        let rep = check_quasirandom(&f, 1, &BigRational::one()).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.attained, BigRational::one());
    }

    fn seeded_family(n: usize, seed: u64) -> PermFamily {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        family_where(n, |_| rng.gen_bool(0.5))
    }

    #[test]
    fn quasirandomness_is_monotone_in_the_restriction_size() {
        let f = FunctionOnSn::indicator(&seeded_family(5, 7));
        let one = check_quasirandom(&f, 1, &BigRational::one()).unwrap();
        let two = check_quasirandom(&f, 2, &BigRational::one()).unwrap();
        assert!(one.attained <= two.attained);
    }

    #[test]
    fn quasiregular_functions_are_quasirandom() {
        let c = FunctionOnSn::constant(4, rat(1, 3)).unwrap();
        assert!(quasiregular_implies_quasirandom_check(&c, 1, &BigRational::zero()).unwrap());

        let f = FunctionOnSn::indicator(&seeded_family(5, 11));
        let (ratio, _) = worst_restriction_ratio_fn(&f, 1).unwrap();
        let eps = (&ratio - BigRational::one()).max(BigRational::zero()) + rat(1, 1000);
        assert!(eps < BigRational::one());
        assert!(quasiregular_implies_quasirandom_check(&f, 1, &eps).unwrap());
    }

    #[test]
    fn quasirandom_implication_rejects_unverified_hypotheses() {
        let f = FunctionOnSn::indicator(&family_where(4, |p| p.image(0) == 0));
        let err = quasiregular_implies_quasirandom_check(&f, 1, &rat(1, 2)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn quasiregular_families_are_uncaptureable() {
        let full = family_where(5, |_| true);
        let beta = Threshold::Rational(rat(2, 1));
        assert!(
            quasiregular_implies_uncaptureable_check(&full, &beta, &rat(1, 2), 1, 0).unwrap()
        );

        let dense = seeded_family(5, 3);
        let (ratio, _) = worst_restriction_ratio(&dense, 1).unwrap();
        assert!(ratio < rat(2, 1), "seed produced a lopsided family");
        let delta = dense.measure().unwrap() / rat(2, 1);
        assert!(
            quasiregular_implies_uncaptureable_check(&dense, &beta, &delta, 1, 0).unwrap()
        );

        let err =
            quasiregular_implies_uncaptureable_check(&full, &beta, &rat(2, 1), 1, 0).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    fn full_class_family(n: usize, agree: &[(usize, usize)]) -> PermFamily {
        let ambient = RestrictionClass::new(n, vec![pb(agree)], vec![]).unwrap();
        PermFamily::full(ambient).unwrap()
    }

    #[test]
    fn empty_disagreement_restriction_is_a_no_op() {
        let h = full_class_family(6, &[(1, 1)]);
        let rep =
            restrict_disagree_preserves(&h, &PartialBijection::empty(), 1, &rat(5, 4), 1)
                .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.retention, BigRational::one());
    }

    #[test]
    fn single_disagreement_keeps_most_of_a_full_class() {
        // A full class stays full relative to its shrunken ambient class.
        let h = full_class_family(6, &[(1, 1)]);
        let rep = restrict_disagree_preserves(&h, &pb(&[(2, 3)]), 1, &rat(5, 4), 1).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.retention, BigRational::one());

        let wide = restrict_disagree_preserves(&h, &pb(&[(2, 3)]), 2, &rat(3, 2), 1).unwrap();
        assert!(wide.pass);

        // A dense but not full family loses a computable sliver of measure.
        let dense = family_where(6, |p| !(p.image(0) == 0 && p.image(1) == 1));
        let rep = restrict_disagree_preserves(&dense, &pb(&[(2, 3)]), 1, &rat(5, 4), 0).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.retention, rat(144, 145));
    }

    #[test]
    fn disagreement_restriction_rejects_out_of_range_alpha() {
        let h = full_class_family(6, &[(1, 1)]);
        let err = restrict_disagree_preserves(&h, &pb(&[(2, 3)]), 1, &rat(3, 1), 1).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    fn concentrated_pair() -> (PermFamily, PermFamily) {
        // Members map point 2 to 2 or 3; the (2 -> 2) star holds half the mass.
        let f = family_where(6, |p| p.image(1) == 1 || p.image(1) == 2);
        (f.clone(), f)
    }

    #[test]
    fn bootstrap_to_quasiregular_leaves_balanced_families_alone() {
        let f = family_where(6, |_| true);
        let out = bootstrap_uncap_to_quasiregular(&f, &f, 1, 1, GatePolicy::Waive).unwrap();
        assert!(out.pi3.is_empty());
        assert!(out.pi4.is_empty());
        assert_eq!(out.family1.measure().unwrap(), BigRational::one());
    }

    #[test]
    fn bootstrap_to_quasiregular_extends_along_the_density_spike() {
        let (f1, f2) = concentrated_pair();
        let out = bootstrap_uncap_to_quasiregular(&f1, &f2, 1, 1, GatePolicy::Waive).unwrap();
        assert_eq!(out.pi3, pb(&[(2, 2)]));
        assert_eq!(out.pi4, pb(&[(2, 3)]));
        assert_eq!(out.family1.measure().unwrap(), BigRational::one());
        assert_eq!(out.family2.measure().unwrap(), BigRational::one());
        assert!(out.gates.iter().any(|g| !g.satisfied));
    }

    #[test]
    fn bootstrap_to_quasiregular_enforces_the_size_gate() {
        let f = family_where(6, |_| true);
        let err = bootstrap_uncap_to_quasiregular(&f, &f, 1, 1, GatePolicy::Enforce).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn bootstrap_to_s_quasiregular_leaves_balanced_families_alone() {
        let f = family_where(6, |_| true);
        let out = bootstrap_uncap_to_s_quasiregular(
            &f,
            &f,
            1,
            1,
            &rat(1, 2),
            2,
            &rat(1, 4),
            GatePolicy::Waive,
        )
        .unwrap();
        assert!(out.pi3.is_empty());
        assert!(out.pi4.is_empty());
    }

    #[test]
    fn bootstrap_to_s_quasiregular_extends_along_the_density_spike() {
        let (f1, f2) = concentrated_pair();
        let out = bootstrap_uncap_to_s_quasiregular(
            &f1,
            &f2,
            1,
            1,
            &rat(1, 2),
            2,
            &rat(1, 4),
            GatePolicy::Waive,
        )
        .unwrap();
        assert_eq!(out.pi3, pb(&[(2, 2)]));
        assert_eq!(out.pi4, pb(&[(2, 3)]));
    }

    #[test]
    fn bootstrap_to_s_quasiregular_enforces_the_margin_gate() {
        let f = family_where(6, |_| true);
        let err = bootstrap_uncap_to_s_quasiregular(
            &f,
            &f,
            1,
            1,
            &rat(1, 2),
            8,
            &rat(1, 4),
            GatePolicy::Enforce,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn extra_agreements_on_full_families_take_the_first_free_pair() {
        let h = family_where(5, |_| true);
        let pi = find_extra_agreements(&h, &h, 1, 2, &rat(1, 16), &rat(1, 1)).unwrap();
        assert_eq!(pi, pb(&[(1, 1)]));
    }

    #[test]
    fn extra_agreements_on_a_near_uniform_pair() {
        let h1 = family_where(7, |p| !(p.image(0) == 0 && p.image(1) == 1));
        let h2 = family_where(7, |p| !(p.image(0) == 1 && p.image(1) == 0));
        let pi = find_extra_agreements(&h1, &h2, 1, 2, &rat(1, 16), &rat(1, 1)).unwrap();
        assert_eq!(pi, pb(&[(1, 1)]));
        let restricted = h1.restrict(std::slice::from_ref(&pi), &[]).unwrap();
        assert_eq!(restricted.measure().unwrap(), rat(5, 6));
    }

    #[test]
    fn extra_agreements_reject_an_oversized_margin() {
        let h = family_where(5, |_| true);
        let err = find_extra_agreements(&h, &h, 1, 2, &rat(3, 32), &rat(1, 1)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn sampling_distribution_matches_the_class_sizes() {
        // The restriction-class sizes over a fixed domain sum to the parent
        // class size, so the induced sampling weights form a distribution,
        // and most of its mass lies on range tuples clear of the blocked
        // points.
        let h = full_class_family(6, &[(6, 6)]);
        use num::BigUint;
        let parent = h.ambient().size();
        let mut total = BigUint::zero();
        for y in 0..5usize {
            let cls = h
                .ambient()
                .extended(&[PartialBijection::singleton(0, y)], &[])
                .unwrap();
            total += cls.size();
        }
        // The blocked range point contributes nothing, so the feasible
        // tuples already exhaust the parent class: all the mass is good.
        assert_eq!(total, parent);
    }
}
