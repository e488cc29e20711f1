//! Functions on S_n, projection norms onto the isotypic components,
//! the normalized derangement adjacency operator, algebraic quasirandomness,
//! and the exact spectral-gap decomposition for cross-disagreement-free
//! pairs. Everything is exact rational arithmetic.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::{all_permutations, factorial, PermFamily, Permutation, RestrictionClass};
use crate::rep::{
    derangement_count, derangement_eigenvalue, dimension_hook, l_star_ge, partitions_of,
    CharacterTable, CycleType, Partition,
};

/// Pairwise loops over supports are capped at this many iterations.
const PAIR_BUDGET: u64 = 40_000_000;
const DENSE_LIMIT: usize = 8;

/// A [0,1]-valued (or, after operators, general rational-valued) function on
/// a restriction class; absent values are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionOnSn {
    ambient: RestrictionClass,
    values: BTreeMap<Permutation, BigRational>,
}

impl FunctionOnSn {
    pub fn new(
        ambient: RestrictionClass,
        values: BTreeMap<Permutation, BigRational>,
    ) -> Result<Self> {
        for (p, _) in &values {
            if !ambient.contains(p) {
                return Err(Error::InvalidInput(format!(
                    "support point {p} lies outside the ambient class"
                )));
            }
        }
        let mut values = values;
        values.retain(|_, v| !v.is_zero());
        Ok(FunctionOnSn { ambient, values })
    }

    pub fn indicator(family: &PermFamily) -> FunctionOnSn {
        FunctionOnSn {
            ambient: family.ambient().clone(),
            values: family
                .members()
                .map(|m| (m.clone(), BigRational::one()))
                .collect(),
        }
    }

    pub fn constant(n: usize, c: BigRational) -> Result<FunctionOnSn> {
        let ambient = RestrictionClass::full(n);
        if c.is_zero() {
            return Ok(FunctionOnSn {
                ambient,
                values: BTreeMap::new(),
            });
        }
        let values = all_permutations(n)?
            .into_iter()
            .map(|p| (p, c.clone()))
            .collect();
        Ok(FunctionOnSn { ambient, values })
    }

    pub fn n(&self) -> usize {
        self.ambient.n()
    }

    pub fn ambient(&self) -> &RestrictionClass {
        &self.ambient
    }

    pub fn value(&self, sigma: &Permutation) -> BigRational {
        self.values.get(sigma).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Permutation, &BigRational)> {
        self.values.iter()
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    pub fn expectation(&self) -> Result<BigRational> {
        let size = self.ambient.size();
        if size.is_zero() {
            return Err(Error::InfeasibleClass(
                "expectation over an empty restriction class".into(),
            ));
        }
        let sum: BigRational = self.values.values().sum();
        Ok(sum / BigRational::from_integer(BigInt::from(size)))
    }

    /// E[f(π)] = mean of f over class members agreeing with π everywhere.
    pub fn conditional_expectation(&self, pi: &crate::perm::PartialBijection) -> Result<BigRational> {
        let restricted = self.ambient.extended(std::slice::from_ref(pi), &[])?;
        let size = restricted.size();
        if size.is_zero() {
            return Err(Error::InfeasibleClass(format!(
                "no class member extends {pi}"
            )));
        }
        let sum: BigRational = self
            .values
            .iter()
            .filter(|(p, _)| pi.agrees_everywhere(p))
            .map(|(_, v)| v)
            .sum();
        Ok(sum / BigRational::from_integer(BigInt::from(size)))
    }

    fn require_full_ambient(&self, what: &str) -> Result<()> {
        if !self.ambient.agree_constraints().is_empty()
            || !self.ambient.disagree_constraints().is_empty()
        {
            return Err(Error::Contract(format!(
                "{what} requires a function on the full S_n"
            )));
        }
        Ok(())
    }
}

/// ⟨f,g⟩ = (1/n!) Σ_σ f(σ)g(σ).
pub fn inner_product(f: &FunctionOnSn, g: &FunctionOnSn) -> Result<BigRational> {
    if f.n() != g.n() {
        return Err(Error::SizeMismatch {
            left: f.n(),
            right: g.n(),
        });
    }
    f.require_full_ambient("inner product")?;
    g.require_full_ambient("inner product")?;
    let mut sum = BigRational::zero();
    for (p, v) in &f.values {
        if let Some(w) = g.values.get(p) {
            sum += v * w;
        }
    }
    Ok(sum / BigRational::from_integer(BigInt::from(factorial(f.n()))))
}

/// Σ_{σ,π ∈ support} f(σ)g(π), grouped by the cycle type of σπ⁻¹.
/// This is the single quadratic pass every projection quantity reuses.
pub fn class_autocorrelation(
    f: &FunctionOnSn,
    g: &FunctionOnSn,
) -> Result<BTreeMap<Partition, BigRational>> {
    if f.n() != g.n() {
        return Err(Error::SizeMismatch {
            left: f.n(),
            right: g.n(),
        });
    }
    let pairs = f.values.len() as u64 * g.values.len() as u64;
    if pairs > PAIR_BUDGET || f.n() > DENSE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "autocorrelation budget exceeded: {} support pairs at n = {}",
            pairs,
            f.n()
        )));
    }
    let mut acc: BTreeMap<Partition, BigRational> = BTreeMap::new();
    for (sigma, fv) in &f.values {
        let sigma_images = sigma.images();
        for (pi, gv) in &g.values {
            // cycle type of σπ⁻¹ without materializing the product
            let inv = pi.inverse();
            let prod: Vec<u8> = inv
                .images()
                .iter()
                .map(|&x| sigma_images[x as usize])
                .collect();
            let perm = Permutation::from_images(prod).unwrap();
            let t = CycleType::of(&perm).0.clone();
            *acc.entry(t).or_insert_with(BigRational::zero) += fv * gv;
        }
    }
    Ok(acc)
}

/// ⟨P_α f, P_α g⟩ = (f^α/(n!)²) Σ_{σ,π} f(σ)g(π) χ_α(σπ⁻¹), by polarization
/// of the projection identity.
pub fn projection_inner(
    f: &FunctionOnSn,
    g: &FunctionOnSn,
    alpha: &Partition,
) -> Result<BigRational> {
    let corr = class_autocorrelation(f, g)?;
    projection_inner_from_corr(&corr, alpha, f.n())
}

fn projection_inner_from_corr(
    corr: &BTreeMap<Partition, BigRational>,
    alpha: &Partition,
    n: usize,
) -> Result<BigRational> {
    let table = CharacterTable::for_n(n)?;
    let mut sum = BigRational::zero();
    for (t, mass) in corr {
        let chi = table.value(alpha, &CycleType(t.clone()));
        sum += mass * BigRational::from_integer(chi.clone());
    }
    let nf = BigInt::from(factorial(n));
    let f_alpha = BigInt::from(dimension_hook(alpha));
    Ok(sum * BigRational::new(f_alpha, &nf * &nf))
}

/// ‖P_α f‖².
pub fn projection_norm_sq(f: &FunctionOnSn, alpha: &Partition) -> Result<BigRational> {
    f.require_full_ambient("projection")?;
    projection_inner(f, f, alpha)
}

#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub expectation: BigRational,
    pub norms: BTreeMap<Partition, BigRational>,
}

impl SpectralProfile {
    pub fn norm_sq(&self, alpha: &Partition) -> BigRational {
        self.norms.get(alpha).cloned().unwrap_or_else(BigRational::zero)
    }
}

/// Full profile {α → ‖P_α f‖²}; Parseval is asserted before returning.
pub fn spectral_profile(f: &FunctionOnSn) -> Result<SpectralProfile> {
    f.require_full_ambient("spectral profile")?;
    let n = f.n();
    let corr = class_autocorrelation(f, f)?;
    let mut norms = BTreeMap::new();
    let mut total = BigRational::zero();
    for alpha in partitions_of(n) {
        let v = projection_inner_from_corr(&corr, &alpha, n)?;
        if v.is_negative() {
            return Err(Error::Contract(format!(
                "negative projection norm at α = {alpha}"
            )));
        }
        total += &v;
        norms.insert(alpha, v);
    }
    let norm_f = inner_product(f, f)?;
    if total != norm_f {
        return Err(Error::Contract(format!(
            "Parseval failed: Σ‖P_α f‖² = {total} but ‖f‖² = {norm_f}"
        )));
    }
    Ok(SpectralProfile {
        expectation: f.expectation()?,
        norms,
    })
}

/// (Af)(σ) = (1/d_n) Σ_{δ ∈ D_n} f(σδ); output is a general rational-valued
/// function and may leave [0,1].
pub fn apply_derangement_operator(f: &FunctionOnSn) -> Result<FunctionOnSn> {
    f.require_full_ambient("derangement operator")?;
    let n = f.n();
    if n > DENSE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "derangement operator capped at n <= {DENSE_LIMIT}"
        )));
    }
    let derangements: Vec<Permutation> = all_permutations(n)?
        .into_iter()
        .filter(|p| p.is_derangement())
        .collect();
    let dn = BigRational::from_integer(BigInt::from(derangement_count(n)));
    if dn.is_zero() {
        return Err(Error::DegenerateInput("d_n = 0: no derangements".into()));
    }
    let mut out: BTreeMap<Permutation, BigRational> = BTreeMap::new();
    for (tau, v) in &f.values {
        let share = v / &dn;
        for delta in &derangements {
            // σδ = τ  ⟺  σ = τδ⁻¹
            let sigma = tau.compose(&delta.inverse()).unwrap();
            *out.entry(sigma).or_insert_with(BigRational::zero) += &share;
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(FunctionOnSn {
        ambient: RestrictionClass::full(n),
        values: out,
    })
}

/// ⟨f₁, A f₂⟩; zero exactly when no everywhere-disagreeing cross pair
/// carries positive product mass.
pub fn cross_disagreement_pairing(f1: &FunctionOnSn, f2: &FunctionOnSn) -> Result<BigRational> {
    inner_product(f1, &apply_derangement_operator(f2)?)
}

#[derive(Debug, Clone)]
pub struct QuasirandomnessWitness {
    pub alpha: Partition,
    pub ratio: BigRational,
}

/// Def of algebraic (r,ε)-quasirandomness: ‖P_α f‖² ≤ ε f^α (E f)² for every
/// α ≠ (n) with α₁ ≥ n − r. Returns the violating α and ratio on failure.
pub fn is_algebraically_quasirandom(
    f: &FunctionOnSn,
    r: usize,
    eps: &BigRational,
) -> Result<(bool, Option<QuasirandomnessWitness>)> {
    let e = f.expectation()?;
    if e.is_zero() {
        return Err(Error::DegenerateInput(
            "algebraic quasirandomness undefined for E[f] = 0".into(),
        ));
    }
    let n = f.n();
    let corr = class_autocorrelation(f, f)?;
    let e2 = &e * &e;
    for alpha in l_star_ge(n, n.saturating_sub(r)) {
        let norm = projection_inner_from_corr(&corr, &alpha, n)?;
        let f_alpha = BigRational::from_integer(BigInt::from(dimension_hook(&alpha)));
        let bound = eps * &f_alpha * &e2;
        if norm > bound {
            let ratio = norm / (f_alpha * e2);
            return Ok((false, Some(QuasirandomnessWitness { alpha, ratio })));
        }
    }
    Ok((true, None))
}

#[derive(Debug, Clone)]
pub struct SpectralGapReport {
    pub e1: BigRational,
    pub e2: BigRational,
    /// Σ_{α ∈ L*(≥ n−r)} λ_α ⟨P_α f₁, P_α f₂⟩.
    pub head_block: BigRational,
    /// Σ_{α ∈ L(< n−r)} λ_α ⟨P_α f₁, P_α f₂⟩.
    pub tail_block: BigRational,
    /// e1·e2 + head + tail, which must be exactly 0.
    pub balance: BigRational,
    /// Σ_α |⟨P_α f₁, P_α f₂⟩| ≤ ‖f₁‖‖f₂‖, checked as squared comparison.
    pub cauchy_schwarz_ok: bool,
}

/// The exact decomposition 0 = E[f₁]E[f₂] + Σ_{α≠(n)} λ_α ⟨P_α f₁, P_α f₂⟩,
/// valid whenever ⟨f₁, A f₂⟩ = 0, split into the two partition blocks.
pub fn verify_spectral_gap_argument(
    f1: &FunctionOnSn,
    f2: &FunctionOnSn,
    r: usize,
) -> Result<SpectralGapReport> {
    let pairing = cross_disagreement_pairing(f1, f2)?;
    if !pairing.is_zero() {
        return Err(Error::Contract(format!(
            "cross-disagreement pairing is {pairing}, not 0"
        )));
    }
    let n = f1.n();
    let corr = class_autocorrelation(f1, f2)?;
    let e1 = f1.expectation()?;
    let e2 = f2.expectation()?;
    let mut head = BigRational::zero();
    let mut tail = BigRational::zero();
    let mut abs_sum = BigRational::zero();
    for alpha in partitions_of(n) {
        if alpha.len() == 1 {
            continue; // α = (n): λ = 1, ⟨P f₁, P f₂⟩ = E f₁ E f₂, the lead term
        }
        let ip = projection_inner_from_corr(&corr, &alpha, n)?;
        abs_sum += ip.abs();
        let lam = derangement_eigenvalue(&alpha)?;
        let term = lam * ip;
        if alpha.first_part() + r >= n {
            head += term;
        } else {
            tail += term;
        }
    }
    let balance = &e1 * &e2 + &head + &tail;
    // Σ|⟨P_α f₁,P_α f₂⟩| over α ≠ (n) plus the (n) term equals ≤ ‖f₁‖‖f₂‖.
    let lead = &e1 * &e2;
    let total_abs = abs_sum + lead.abs();
    let n1 = inner_product(f1, f1)?;
    let n2 = inner_product(f2, f2)?;
    let cauchy_schwarz_ok = &total_abs * &total_abs <= n1 * n2;
    Ok(SpectralGapReport {
        e1,
        e2,
        head_block: head,
        tail_block: tail,
        balance,
        cauchy_schwarz_ok,
    })
}

/// Eigenvalues of the normalized everywhere-disagreement adjacency matrix
/// (entry 1/d_n when two permutations disagree everywhere), by dense
/// symmetric diagonalization, sorted ascending. Floating point: use the
/// exact character-sum route for anything but cross-validation.
pub fn derangement_spectrum_numeric(n: usize) -> Result<Vec<f64>> {
    if n > 5 {
        return Err(Error::ResourceLimit(format!(
            "dense diagonalization supports n <= 5, got n = {n}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(
            "no permutations without fixed points below n = 2".into(),
        ));
    }
    let perms = all_permutations(n)?;
    let m = perms.len();
    let dn = perms.iter().filter(|p| p.fixed_points() == 0).count() as f64;
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            if crate::perm::agreements(&perms[i], &perms[j])? == 0 {
                a[(i, j)] = 1.0 / dn;
                a[(j, i)] = 1.0 / dn;
            }
        }
    }
    let mut vals: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{Junta, PartialBijection};

    fn pt(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn pb(pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::from_one_indexed(pairs).unwrap()
    }

    fn star_indicator(n: usize, x: usize, y: usize) -> FunctionOnSn {
        let fam = Junta::new(n, vec![pb(&[(x, y)])]).as_family().unwrap();
        FunctionOnSn::indicator(&fam)
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn constant_profile() {
        let f = FunctionOnSn::constant(4, BigRational::one()).unwrap();
        let prof = spectral_profile(&f).unwrap();
        assert_eq!(prof.norm_sq(&pt(&[4])), BigRational::one());
        for p in partitions_of(4) {
            if p != pt(&[4]) {
                assert!(prof.norm_sq(&p).is_zero(), "α = {p}");
            }
        }
    }

    #[test]
    fn star_profile() {
        let f = star_indicator(4, 1, 1);
        let prof = spectral_profile(&f).unwrap();
        assert_eq!(prof.norm_sq(&pt(&[4])), rat(1, 16));
        assert_eq!(prof.norm_sq(&pt(&[3, 1])), rat(3, 16));
        assert!(prof.norm_sq(&pt(&[2, 2])).is_zero());
        assert!(prof.norm_sq(&pt(&[2, 1, 1])).is_zero());
        assert!(prof.norm_sq(&pt(&[1, 1, 1, 1])).is_zero());
        let total: BigRational = prof.norms.values().sum();
        assert_eq!(total, rat(1, 4));
    }

    #[test]
    fn sign_shift_profile() {
        // (1 + sgn)/2 has mass 1/4 on (n) and 1/4 on (1^n).
        let n = 4;
        let values: BTreeMap<Permutation, BigRational> = all_permutations(n)
            .unwrap()
            .into_iter()
            .filter(|p| p.sign() == 1)
            .map(|p| (p, BigRational::one()))
            .collect();
        let f = FunctionOnSn::new(RestrictionClass::full(n), values).unwrap();
        let prof = spectral_profile(&f).unwrap();
        assert_eq!(prof.norm_sq(&pt(&[4])), rat(1, 4));
        assert_eq!(prof.norm_sq(&pt(&[1, 1, 1, 1])), rat(1, 4));
        assert!(prof.norm_sq(&pt(&[3, 1])).is_zero());
    }

    #[test]
    fn derangement_operator_basics() {
        let one = FunctionOnSn::constant(4, BigRational::one()).unwrap();
        let a_one = apply_derangement_operator(&one).unwrap();
        for (_, v) in a_one.support() {
            assert_eq!(*v, BigRational::one());
        }
        assert_eq!(a_one.support_size(), 24);

        let mut values = BTreeMap::new();
        values.insert(Permutation::identity(4), BigRational::one());
        let delta = FunctionOnSn::new(RestrictionClass::full(4), values).unwrap();
        let a_delta = apply_derangement_operator(&delta).unwrap();
        assert_eq!(a_delta.support_size(), 9);
        for (p, v) in a_delta.support() {
            assert!(p.is_derangement());
            assert_eq!(*v, rat(1, 9));
        }
        // E[Af] = E[f]
        assert_eq!(
            a_delta.expectation().unwrap(),
            delta.expectation().unwrap()
        );
    }

    #[test]
    fn pairing_examples() {
        let star = star_indicator(4, 1, 1);
        assert!(cross_disagreement_pairing(&star, &star).unwrap().is_zero());

        let mut v1 = BTreeMap::new();
        v1.insert(Permutation::identity(4), BigRational::one());
        let f1 = FunctionOnSn::new(RestrictionClass::full(4), v1).unwrap();
        let mut v2 = BTreeMap::new();
        v2.insert(
            Permutation::from_one_indexed(&[2, 3, 4, 1]).unwrap(),
            BigRational::one(),
        );
        let f2 = FunctionOnSn::new(RestrictionClass::full(4), v2).unwrap();
        assert_eq!(
            cross_disagreement_pairing(&f1, &f2).unwrap(),
            rat(1, 24 * 9)
        );

        let one = FunctionOnSn::constant(4, BigRational::one()).unwrap();
        assert_eq!(
            cross_disagreement_pairing(&one, &one).unwrap(),
            BigRational::one()
        );
    }

    #[test]
    fn operator_self_adjoint_and_spectral() {
        // ⟨f, Ag⟩ = ⟨Af, g⟩ = Σ λ_α ⟨P_α f, P_α g⟩ on a couple of fixed f, g.
        let f = star_indicator(4, 1, 2);
        let g = star_indicator(4, 2, 2);
        let lhs = inner_product(&f, &apply_derangement_operator(&g).unwrap()).unwrap();
        let lhs2 = inner_product(&apply_derangement_operator(&f).unwrap(), &g).unwrap();
        assert_eq!(lhs, lhs2);
        let mut rhs = BigRational::zero();
        for alpha in partitions_of(4) {
            rhs += derangement_eigenvalue(&alpha).unwrap()
                * projection_inner(&f, &g, &alpha).unwrap();
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn algebraic_quasirandomness_star() {
        let f = star_indicator(4, 1, 1);
        // ratio at (3,1) is exactly 1: fails below ε = 1, passes at 1.
        let (ok, wit) = is_algebraically_quasirandom(&f, 1, &rat(1, 2)).unwrap();
        assert!(!ok);
        let w = wit.unwrap();
        assert_eq!(w.alpha, pt(&[3, 1]));
        assert_eq!(w.ratio, BigRational::one());
        let (ok2, _) = is_algebraically_quasirandom(&f, 1, &BigRational::one()).unwrap();
        assert!(ok2);
        // constants pass with ε = 0
        let c = FunctionOnSn::constant(4, rat(1, 2)).unwrap();
        let (ok3, _) = is_algebraically_quasirandom(&c, 2, &BigRational::zero()).unwrap();
        assert!(ok3);
    }

    #[test]
    fn spectral_gap_star_instance() {
        let f = star_indicator(4, 1, 1);
        let rep = verify_spectral_gap_argument(&f, &f, 1).unwrap();
        assert_eq!(rep.e1, rat(1, 4));
        // 1/16 + (−1/3)(3/16) = 0
        assert_eq!(rep.head_block, rat(-1, 16));
        assert!(rep.tail_block.is_zero());
        assert!(rep.balance.is_zero());
        assert!(rep.cauchy_schwarz_ok);
    }

    #[test]
    fn spectral_gap_rejects_nonzero_pairing() {
        let one = FunctionOnSn::constant(4, BigRational::one()).unwrap();
        assert!(matches!(
            verify_spectral_gap_argument(&one, &one, 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn pairing_zero_iff_intersecting() {
        // For an indicator f of F: ⟨f, Af⟩ = 0 ⟺ F is 1-intersecting.
        let families: Vec<PermFamily> = vec![
            Junta::new(4, vec![pb(&[(1, 1)])]).as_family().unwrap(),
            Junta::new(4, vec![pb(&[(1, 1)]), pb(&[(2, 2)])])
                .as_family()
                .unwrap(),
            PermFamily::from_members(
                RestrictionClass::full(4),
                vec![
                    Permutation::identity(4),
                    Permutation::from_one_indexed(&[2, 3, 4, 1]).unwrap(),
                ],
            )
            .unwrap(),
        ];
        for fam in families {
            let f = FunctionOnSn::indicator(&fam);
            let zero = cross_disagreement_pairing(&f, &f).unwrap().is_zero();
            assert_eq!(zero, fam.is_t_intersecting(1), "family size {}", fam.size());
        }
    }
}
