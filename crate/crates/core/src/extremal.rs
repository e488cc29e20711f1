//! Exact extremal computations at desk scale: the agreement Cayley graph on
//! S_n, exact maximum intersecting / intersection-free families by branch
//! and bound, the Hoffman ratio certificate, an exact count of star members
//! agreeing with an outside permutation in a prescribed number of places,
//! candidate extremal families beyond the star, and stability gaps.

use std::collections::BTreeSet;

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::{
    agreements, all_permutations, factorial, PartialBijection, PermFamily, Permutation,
    RestrictionClass,
};
use crate::pseudorandom::partial_bijections_avoiding;
use crate::rep::{
    binomial, cayley_eigenvalue, derangement_count, generator_count, partitions_of,
};

/// The graph on S_n joining two permutations exactly when they agree in
/// exactly `a` places; a Cayley graph generated by the permutations with
/// exactly `a` fixed points. Intersection-free families (no pair agreeing in
/// exactly `a` places) are its independent sets.
#[derive(Debug, Clone)]
pub struct AgreementGraph {
    n: usize,
    a: usize,
    generators: Vec<Permutation>,
}

impl AgreementGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forbidden_agreements(&self) -> usize {
        self.a
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn degree(&self) -> usize {
        self.generators.len()
    }

    pub fn adjacent(&self, p: &Permutation, q: &Permutation) -> Result<bool> {
        Ok(p != q && agreements(p, q)? == self.a)
    }
}

pub fn build_agreement_graph(n: usize, a: usize) -> Result<AgreementGraph> {
    if a > n {
        return Err(Error::InvalidInput(format!(
            "cannot forbid {a} agreements on a ground set of size {n}"
        )));
    }
    let generators: Vec<Permutation> = all_permutations(n)?
        .into_iter()
        .filter(|p| p.fixed_points() == a)
        .collect();
    let expected = generator_count(n, a);
    if BigUint::from(generators.len()) != expected {
        return Err(Error::Contract(format!(
            "generator count {} disagrees with C({n},{a}) * d_{} = {expected}",
            generators.len(),
            n - a
        )));
    }
    Ok(AgreementGraph { n, a, generators })
}

/// Fixed-width bitset over the vertex list.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(len: usize) -> Bits {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|w| *w != 0)
            .map(|i| i * 64 + self.0[i].trailing_zeros() as usize)
    }

    fn subtract(&mut self, other: &Bits) {
        for (w, o) in self.0.iter_mut().zip(&other.0) {
            *w &= !o;
        }
    }
}

fn branch_and_bound(
    adj: &[Bits],
    chosen: &mut Vec<usize>,
    cands: Bits,
    best: &mut (usize, Vec<usize>),
) {
    if chosen.len() > best.0 {
        *best = (chosen.len(), chosen.clone());
    }
    if chosen.len() + cands.count() <= best.0 {
        return;
    }
    let Some(v) = cands.first() else { return };
    let mut with_v = cands.clone();
    with_v.clear(v);
    with_v.subtract(&adj[v]);
    chosen.push(v);
    branch_and_bound(adj, chosen, with_v, best);
    chosen.pop();
    let mut without_v = cands;
    without_v.clear(v);
    branch_and_bound(adj, chosen, without_v, best);
}

/// Exact maximum independent set of the agreement graph, by branch and
/// bound over the full vertex set. With `symmetry` the set is required to
/// contain the identity, which is sound for the maximum size because the
/// graph is vertex-transitive: any independent set translates to one
/// through the identity. Exhaustive up to n = 5; n = 6 only with
/// `allow_slow`.
pub fn max_independent_family(
    g: &AgreementGraph,
    symmetry: bool,
    allow_slow: bool,
) -> Result<(usize, PermFamily)> {
    let limit = if allow_slow { 6 } else { 5 };
    if g.n > limit {
        return Err(Error::ResourceLimit(format!(
            "exact independent-set search supports n <= {limit}, got n = {}",
            g.n
        )));
    }
    let verts = all_permutations(g.n)?;
    let m = verts.len();
    if g.degree() == 0 {
        let fam = PermFamily::full(RestrictionClass::full(g.n))?;
        return Ok((m, fam));
    }
    let mut adj = vec![Bits::empty(m); m];
    for i in 0..m {
        for j in (i + 1)..m {
            if g.adjacent(&verts[i], &verts[j])? {
                adj[i].set(j);
                adj[j].set(i);
            }
        }
    }
    let mut all = Bits::empty(m);
    for i in 0..m {
        all.set(i);
    }
    let mut best = (0usize, Vec::new());
    let mut chosen = Vec::new();
    if symmetry {
        // The identity is vertex 0 in lexicographic order.
        let mut cands = all;
        cands.clear(0);
        cands.subtract(&adj[0]);
        chosen.push(0);
        branch_and_bound(&adj, &mut chosen, cands, &mut best);
    } else {
        branch_and_bound(&adj, &mut chosen, all, &mut best);
    }
    let members: BTreeSet<Permutation> =
        best.1.iter().map(|&i| verts[i].clone()).collect();
    for p in &members {
        for q in &members {
            if g.adjacent(p, q)? {
                return Err(Error::Contract(
                    "search produced a dependent witness".into(),
                ));
            }
        }
    }
    let fam = PermFamily::new(RestrictionClass::full(g.n), members)?;
    Ok((best.0, fam))
}

/// The ratio bound: independent sets have size at most
/// n! * (-lambda_min) / (1 - lambda_min), with lambda_min the smallest
/// normalized eigenvalue. An edgeless graph gives the trivial bound n!.
pub fn hoffman_bound(g: &AgreementGraph) -> Result<BigRational> {
    let total = BigRational::from_integer(BigInt::from(factorial(g.n)));
    if g.degree() == 0 {
        return Ok(total);
    }
    let mut min: Option<BigRational> = None;
    for alpha in partitions_of(g.n) {
        let lambda = cayley_eigenvalue(&alpha, g.a)?;
        if min.as_ref().is_none_or(|m| &lambda < m) {
            min = Some(lambda);
        }
    }
    let lambda_min = min.expect("at least one partition");
    if !lambda_min.is_negative() {
        return Ok(total);
    }
    let one = BigRational::one();
    Ok(total * (-&lambda_min) / (one - lambda_min))
}

/// Greedy/Turán baseline: every graph of maximum degree d has an
/// independent set of at least n!/(d+1) vertices.
pub fn turan_lower_bound(g: &AgreementGraph) -> BigUint {
    let total = factorial(g.n);
    let d1 = BigUint::from(g.degree() + 1);
    (&total + &d1 - BigUint::one()) / d1
}

fn falling_factorial(base: isize, v: usize) -> BigUint {
    let mut out = BigUint::one();
    for i in 0..v {
        let term = base - i as isize;
        if term <= 0 {
            return BigUint::zero();
        }
        out *= BigUint::from(term as usize);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarAgreementCount {
    /// Closed-form lower bound on the number of members of the canonical
    /// t-star agreeing with rho in exactly t - 1 places.
    pub formula: BigUint,
    /// Exact count by enumeration.
    pub exact: BigUint,
    /// Fixed points of rho inside [t].
    pub s: usize,
    /// Points outside [t] that rho maps into [t].
    pub v: usize,
}

/// Counts the permutations fixing 1..t pointwise that agree with `rho` in
/// exactly t - 1 places, against the closed-form lower bound
/// C(n-t-v, t-s-1) * (n-2t+s+1)_(v) * d_{n-2t+s-v+1}. The count can exceed
/// the bound only when v > 0; equality is exact for v = 0.
pub fn count_agreeing_in_star(rho: &Permutation, t: usize) -> Result<StarAgreementCount> {
    let n = rho.n();
    if t == 0 || t > n {
        return Err(Error::InvalidInput(format!(
            "star size t = {t} out of range for n = {n}"
        )));
    }
    if (0..t).all(|i| rho.image(i) == i) {
        return Err(Error::Contract(
            "the permutation lies in the star itself".into(),
        ));
    }
    let s = (0..t).filter(|&i| rho.image(i) == i).count();
    let v = (t..n).filter(|&x| rho.image(x) < t).count();

    let base = n as isize - 2 * t as isize + s as isize + 1;
    let d_index = base - v as isize;
    let formula = match (n.checked_sub(t + v), d_index) {
        (Some(free), d) if d >= 0 => {
            binomial(free, t - s - 1)
                * falling_factorial(base, v)
                * derangement_count(d as usize)
        }
        _ => BigUint::zero(),
    };

    let mut exact = 0usize;
    for sigma in all_permutations(n)? {
        if (0..t).any(|i| sigma.image(i) != i) {
            continue;
        }
        if agreements(&sigma, rho)? == t - 1 {
            exact += 1;
        }
    }
    let exact = BigUint::from(exact);
    if exact < formula {
        return Err(Error::Contract(format!(
            "exact count {exact} fell below the closed form {formula}"
        )));
    }
    if v == 0 && exact != formula {
        return Err(Error::Contract(format!(
            "closed form should be exact at v = 0: {formula} vs {exact}"
        )));
    }
    Ok(StarAgreementCount { formula, exact, s, v })
}

/// Size of the candidate extremal family {sigma : sigma has at least t + i
/// fixed points among 1..t+2i}, computed both by enumeration and by
/// inclusion-exclusion; the two counts must agree.
pub fn conjecture_family_size(n: usize, t: usize, i: usize) -> Result<BigUint> {
    let m = t + 2 * i;
    if t == 0 || m > n {
        return Err(Error::InvalidInput(format!(
            "need 1 <= t and t + 2i <= n, got t = {t}, i = {i}, n = {n}"
        )));
    }
    let k = t + i;
    // Permutations with exactly j fixed points inside the window of size m:
    // choose the j points, then derange the window remainder within [n - j].
    let mut by_formula = BigInt::zero();
    for j in k..=m {
        let mut inner = BigInt::zero();
        for l in 0..=(m - j) {
            let term = BigInt::from(binomial(m - j, l) * factorial(n - j - l));
            if l % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        by_formula += BigInt::from(binomial(m, j)) * inner;
    }
    let by_formula = by_formula
        .to_biguint()
        .ok_or_else(|| Error::Contract("negative inclusion-exclusion total".into()))?;

    let by_enumeration = BigUint::from(
        all_permutations(n)?
            .iter()
            .filter(|p| (0..m).filter(|&x| p.image(x) == x).count() >= k)
            .count(),
    );
    if by_formula != by_enumeration {
        return Err(Error::Contract(format!(
            "inclusion-exclusion {by_formula} disagrees with enumeration \
             {by_enumeration}"
        )));
    }
    Ok(by_formula)
}

/// Finds a t-star minimizing the number of family members outside it,
/// scanning all C(n,t)^2 t! stars; ties break lexicographically.
pub fn stability_gap(f: &PermFamily, t: usize) -> Result<(PartialBijection, usize)> {
    let empty = BTreeSet::new();
    let mut best: Option<(usize, PartialBijection)> = None;
    for star in partial_bijections_avoiding(f.n(), t, &empty, &empty)? {
        let gap = f
            .members()
            .filter(|m| !star.agrees_everywhere(m))
            .count();
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, star));
        }
    }
    let (gap, star) =
        best.ok_or_else(|| Error::DegenerateInput("no t-star exists".into()))?;
    Ok((star, gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degree_formula_matches_enumeration_up_to_n7() {
        for n in 1..=7 {
            let perms = all_permutations(n).unwrap();
            for a in 0..=n {
                let counted = perms.iter().filter(|p| p.fixed_points() == a).count();
                assert_eq!(BigUint::from(counted), generator_count(n, a));
            }
        }
    }

    #[test]
    fn small_graph_degrees() {
        assert_eq!(build_agreement_graph(4, 0).unwrap().degree(), 9);
        assert_eq!(build_agreement_graph(5, 1).unwrap().degree(), 45);
        assert_eq!(build_agreement_graph(5, 4).unwrap().degree(), 0);
    }

    #[test]
    fn max_intersecting_family_n4() {
        let g = build_agreement_graph(4, 0).unwrap();
        let (size, fam) = max_independent_family(&g, true, false).unwrap();
        assert_eq!(size, 6);
        assert_eq!(fam.size(), 6);
        // A maximum family at n = 4 is a coset of a point stabilizer.
        let (_, gap) = stability_gap(&fam, 1).unwrap();
        assert_eq!(gap, 0);
    }

    #[test]
    fn max_intersecting_family_n5() {
        let g = build_agreement_graph(5, 0).unwrap();
        let (size, fam) = max_independent_family(&g, true, false).unwrap();
        assert_eq!(size, 24);
        let (_, gap) = stability_gap(&fam, 1).unwrap();
        assert_eq!(gap, 0);
    }

    #[test]
    fn edgeless_graph_has_everything_independent() {
        let g = build_agreement_graph(4, 3).unwrap();
        let (size, fam) = max_independent_family(&g, false, false).unwrap();
        assert_eq!(size, 24);
        assert_eq!(fam.size(), 24);
        assert_eq!(
            hoffman_bound(&g).unwrap(),
            BigRational::from_integer(BigInt::from(24))
        );
    }

    #[test]
    fn hoffman_bound_is_tight_for_derangement_graphs() {
        for (n, expect) in [(4usize, 6usize), (5, 24)] {
            let g = build_agreement_graph(n, 0).unwrap();
            let bound = hoffman_bound(&g).unwrap();
            assert_eq!(bound, BigRational::from_integer(BigInt::from(expect)));
            let (size, _) = max_independent_family(&g, true, false).unwrap();
            assert_eq!(BigRational::from_integer(BigInt::from(size)), bound);
        }
    }

    #[test]
    fn hoffman_bound_dominates_search_and_turan_is_below() {
        for (n, a) in [(4usize, 0usize), (4, 1), (5, 0)] {
            let g = build_agreement_graph(n, a).unwrap();
            let bound = hoffman_bound(&g).unwrap();
            let (size, _) = max_independent_family(&g, true, false).unwrap();
            assert!(BigRational::from_integer(BigInt::from(size)) <= bound);
            assert!(turan_lower_bound(&g) <= BigUint::from(size));
        }
    }

    #[test]
    fn search_rejects_large_n() {
        let g = build_agreement_graph(6, 0).unwrap();
        let err = max_independent_family(&g, true, false).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn star_agreement_count_basic_example() {
        let rho = Permutation::from_one_indexed(&[2, 1, 3, 4, 5, 6]).unwrap();
        let out = count_agreeing_in_star(&rho, 2).unwrap();
        assert_eq!(out.s, 0);
        assert_eq!(out.v, 0);
        assert_eq!(out.formula, BigUint::from(8u32));
        assert_eq!(out.exact, BigUint::from(8u32));
    }

    #[test]
    fn star_agreement_count_rejects_star_members() {
        let rho = Permutation::from_one_indexed(&[1, 2, 4, 3, 5]).unwrap();
        let err = count_agreeing_in_star(&rho, 2).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn star_agreement_count_derangement_t1() {
        let rho = Permutation::from_one_indexed(&[2, 3, 4, 5, 1]).unwrap();
        let out = count_agreeing_in_star(&rho, 1).unwrap();
        assert_eq!(out.v, 1);
        assert!(out.exact >= out.formula);
    }

    #[test]
    fn star_agreement_count_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut done = 0;
        while done < 100 {
            let n = rng.gen_range(3..=7);
            let t = rng.gen_range(1..=n.min(3));
            let mut images: Vec<usize> = (1..=n).collect();
            images.shuffle(&mut rng);
            let rho = Permutation::from_one_indexed(&images).unwrap();
            if (0..t).all(|i| rho.image(i) == i) {
                continue;
            }
            // count_agreeing_in_star verifies exact >= formula internally.
            count_agreeing_in_star(&rho, t).unwrap();
            done += 1;
        }
    }

    #[test]
    fn conjecture_family_reduces_to_the_star_at_i0() {
        for (n, t) in [(5usize, 1usize), (5, 2), (6, 3)] {
            assert_eq!(conjecture_family_size(n, t, 0).unwrap(), factorial(n - t));
        }
    }

    #[test]
    fn conjecture_family_sizes_small_cases() {
        assert_eq!(conjecture_family_size(6, 1, 1).unwrap(), BigUint::from(60u32));
        let brute = all_permutations(5)
            .unwrap()
            .iter()
            .filter(|p| (0..4).filter(|&x| p.image(x) == x).count() >= 3)
            .count();
        assert_eq!(conjecture_family_size(5, 2, 1).unwrap(), BigUint::from(brute));
    }

    #[test]
    fn stability_gap_detects_stars_and_near_stars() {
        let star_class =
            RestrictionClass::new(5, vec![PartialBijection::singleton(0, 0)], vec![])
                .unwrap();
        let star = PermFamily::full(star_class).unwrap();
        let (witness, gap) = stability_gap(&star, 1).unwrap();
        assert_eq!(gap, 0);
        assert_eq!(witness, PartialBijection::singleton(0, 0));

        let mut members: BTreeSet<Permutation> =
            star.members().cloned().collect();
        let removed = members.iter().next().cloned().unwrap();
        members.remove(&removed);
        members.insert(Permutation::from_one_indexed(&[3, 1, 2, 4, 5]).unwrap());
        let near = PermFamily::new(RestrictionClass::full(5), members).unwrap();
        let (_, gap) = stability_gap(&near, 1).unwrap();
        assert_eq!(gap, 1);
    }

    #[test]
    fn intersection_free_means_independent() {
        let g = build_agreement_graph(4, 1).unwrap();
        let perms = all_permutations(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let members: BTreeSet<Permutation> = perms
                .iter()
                .filter(|_| rng.gen_bool(0.2))
                .cloned()
                .collect();
            let fam = PermFamily::new(RestrictionClass::full(4), members.clone()).unwrap();
            let mut independent = true;
            for p in &members {
                for q in &members {
                    if g.adjacent(p, q).unwrap() {
                        independent = false;
                    }
                }
            }
            assert_eq!(fam.is_intersection_free(1), independent);
        }
    }
}
