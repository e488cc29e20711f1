//! Permutations of [n], partial bijections, restriction classes, families
//! with exact rational measure, and juntas.
//!
//! Points are 0-indexed internally and 1-indexed in all I/O and error text.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigInt, BigRational, BigUint, One, Zero};

use crate::error::{Error, Result};

/// Hard ceiling for full enumeration of S_n (n! members).
pub const ENUMERATION_LIMIT: usize = 9;

/// A permutation of [n], stored as a flat image array (0-indexed).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u8>,
}

impl Permutation {
    pub fn from_images(images: Vec<u8>) -> Result<Self> {
        let n = images.len();
        if n == 0 || n > 64 {
            return Err(Error::InvalidInput(format!(
                "permutation length {n} out of range 1..=64"
            )));
        }
        let mut seen = vec![false; n];
        for &y in &images {
            if (y as usize) >= n || seen[y as usize] {
                return Err(Error::InvalidInput(format!(
                    "image array {:?} is not a bijection of [{}]",
                    images.iter().map(|&v| v as usize + 1).collect::<Vec<_>>(),
                    n
                )));
            }
            seen[y as usize] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds from a 1-indexed image list, as used in JSON I/O.
    pub fn from_one_indexed(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&y| y == 0 || y > images.len()) {
            return Err(Error::InvalidInput(format!(
                "1-indexed image array {images:?} has entries outside [{}]",
                images.len()
            )));
        }
        Self::from_images(images.iter().map(|&y| (y - 1) as u8).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n as u8).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn image(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn one_indexed(&self) -> Vec<usize> {
        self.images.iter().map(|&y| y as usize + 1).collect()
    }

    /// (self ∘ other)(x) = self(other(x)).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&x| self.images[x as usize]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.n()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u8;
        }
        Permutation { images: inv }
    }

    pub fn fixed_points(&self) -> usize {
        self.images
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x == y as usize)
            .count()
    }

    pub fn is_derangement(&self) -> bool {
        self.fixed_points() == 0
    }

    /// Cycle lengths, sorted in nonincreasing order.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut lens = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.images[x] as usize;
            }
            lens.push(len);
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    pub fn sign(&self) -> i64 {
        let transpositions: usize = self.cycle_lengths().iter().map(|l| l - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.one_indexed()
                .iter()
                .map(|y| y.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Number of points where `a` and `b` agree.
pub fn agreements(a: &Permutation, b: &Permutation) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a.images()
        .iter()
        .zip(b.images())
        .filter(|(x, y)| x == y)
        .count())
}

/// All of S_n in lexicographic order of image arrays.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "enumeration of S_{n} exceeds the n <= {ENUMERATION_LIMIT} ceiling"
        )));
    }
    let mut out = Vec::new();
    let mut images = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, images: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Permutation>) {
        if images.len() == n {
            out.push(Permutation {
                images: images.clone(),
            });
            return;
        }
        for y in 0..n {
            if !used[y] {
                used[y] = true;
                images.push(y as u8);
                rec(n, images, used, out);
                images.pop();
                used[y] = false;
            }
        }
    }
    rec(n, &mut images, &mut used, &mut out);
    Ok(out)
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// An injective map between subsets of [n], stored as (x, y) pairs sorted by x.
///
/// Ordering is lexicographic on (sorted domain, then corresponding images),
/// which is the tie-breaking rule used by every witness search.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PartialBijection {
    pairs: Vec<(u8, u8)>,
}

impl PartialBijection {
    pub fn empty() -> Self {
        PartialBijection { pairs: Vec::new() }
    }

    pub fn singleton(x: usize, y: usize) -> Self {
        PartialBijection {
            pairs: vec![(x as u8, y as u8)],
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Result<Self> {
        let mut pairs: Vec<(u8, u8)> = Vec::new();
        for (x, y) in iter {
            pairs.push((x as u8, y as u8));
        }
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Conflict {
                    x: w[0].0 as usize + 1,
                    y1: w[0].1 as usize + 1,
                    y2: w[1].1 as usize + 1,
                });
            }
        }
        let mut ys: Vec<u8> = pairs.iter().map(|&(_, y)| y).collect();
        ys.sort_unstable();
        for w in ys.windows(2) {
            if w[0] == w[1] {
                let mut xs = pairs.iter().filter(|&&(_, y)| y == w[0]).map(|&(x, _)| x);
                let x1 = xs.next().unwrap();
                return Err(Error::InvalidInput(format!(
                    "partial bijection not injective: y = {} has two preimages starting at x = {}",
                    w[0] as usize + 1,
                    x1 as usize + 1
                )));
            }
        }
        Ok(PartialBijection { pairs })
    }

    /// Builds from 1-indexed [x, y] pairs, as used in JSON I/O.
    pub fn from_one_indexed(pairs: &[(usize, usize)]) -> Result<Self> {
        if pairs.iter().any(|&(x, y)| x == 0 || y == 0) {
            return Err(Error::InvalidInput(
                "1-indexed pair contains a zero coordinate".into(),
            ));
        }
        Self::from_pairs(pairs.iter().map(|&(x, y)| (x - 1, y - 1)))
    }

    pub fn one_indexed(&self) -> Vec<(usize, usize)> {
        self.pairs
            .iter()
            .map(|&(x, y)| (x as usize + 1, y as usize + 1))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|&(x, y)| (x as usize, y as usize))
    }

    pub fn domain(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(x, _)| x as usize).collect()
    }

    pub fn range(&self) -> Vec<usize> {
        let mut ys: Vec<usize> = self.pairs.iter().map(|&(_, y)| y as usize).collect();
        ys.sort_unstable();
        ys
    }

    pub fn image_of(&self, x: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(px, _)| px as usize == x)
            .map(|&(_, y)| y as usize)
    }

    pub fn preimage_of(&self, y: usize) -> Option<usize> {
        self.pairs
            .iter()
            .find(|&&(_, py)| py as usize == y)
            .map(|&(x, _)| x as usize)
    }

    pub fn max_point(&self) -> Option<usize> {
        self.pairs
            .iter()
            .map(|&(x, y)| (x as usize).max(y as usize))
            .max()
    }

    pub fn union(&self, other: &PartialBijection) -> Result<PartialBijection> {
        Self::from_pairs(self.pairs().chain(other.pairs()))
    }

    /// Pairs shared by both bijections.
    pub fn intersection(&self, other: &PartialBijection) -> PartialBijection {
        PartialBijection {
            pairs: self
                .pairs
                .iter()
                .filter(|p| other.pairs.contains(p))
                .copied()
                .collect(),
        }
    }

    pub fn intersection_size(&self, other: &PartialBijection) -> usize {
        self.intersection(other).len()
    }

    /// True iff σ(x) = y for every pair (x, y).
    pub fn agrees_everywhere(&self, sigma: &Permutation) -> bool {
        self.pairs
            .iter()
            .all(|&(x, y)| sigma.image(x as usize) == y as usize)
    }

    /// True iff σ(x) ≠ y for every pair (x, y).
    pub fn disagrees_everywhere(&self, sigma: &Permutation) -> bool {
        self.pairs
            .iter()
            .all(|&(x, y)| sigma.image(x as usize) != y as usize)
    }

    pub fn inverse(&self) -> PartialBijection {
        let mut pairs: Vec<(u8, u8)> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        PartialBijection { pairs }
    }

    /// Drops every pair whose x lies in `xs`.
    pub fn without_domain_points(&self, xs: &BTreeSet<usize>) -> PartialBijection {
        PartialBijection {
            pairs: self
                .pairs
                .iter()
                .filter(|&&(x, _)| !xs.contains(&(x as usize)))
                .copied()
                .collect(),
        }
    }

    /// The key used for witness tie-breaking: sorted domain first, then the
    /// corresponding images in domain order.
    fn order_key(&self) -> (Vec<u8>, Vec<u8>) {
        (
            self.pairs.iter().map(|&(x, _)| x).collect(),
            self.pairs.iter().map(|&(_, y)| y).collect(),
        )
    }
}

impl PartialOrd for PartialBijection {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PartialBijection {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for PartialBijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "{{}}");
        }
        write!(
            f,
            "{{{}}}",
            self.one_indexed()
                .iter()
                .map(|(x, y)| format!("{x}->{y}"))
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

/// The ambient set S_n(π₁,…,π_l, σ̄₁,…,σ̄_m): permutations agreeing with every
/// agree-constraint pointwise and disagreeing with every disagree-constraint
/// at every point of its domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionClass {
    n: usize,
    agree: Vec<PartialBijection>,
    disagree: Vec<PartialBijection>,
    merged_agree: PartialBijection,
}

impl RestrictionClass {
    pub fn full(n: usize) -> Self {
        RestrictionClass {
            n,
            agree: Vec::new(),
            disagree: Vec::new(),
            merged_agree: PartialBijection::empty(),
        }
    }

    pub fn new(
        n: usize,
        agree: Vec<PartialBijection>,
        disagree: Vec<PartialBijection>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        let mut merged = PartialBijection::empty();
        for a in &agree {
            merged = merged.union(a).map_err(|e| {
                Error::InfeasibleClass(format!("agree constraints conflict: {e}"))
            })?;
        }
        for c in agree.iter().chain(disagree.iter()) {
            if let Some(p) = c.max_point() {
                if p >= n {
                    return Err(Error::InvalidInput(format!(
                        "constraint point {} exceeds n = {n}",
                        p + 1
                    )));
                }
            }
        }
        for d in &disagree {
            for (x, y) in d.pairs() {
                if merged.image_of(x) == Some(y) {
                    return Err(Error::InfeasibleClass(format!(
                        "point {}->{} is required both to agree and to disagree",
                        x + 1,
                        y + 1
                    )));
                }
            }
        }
        Ok(RestrictionClass {
            n,
            agree,
            disagree,
            merged_agree: merged,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agree_constraints(&self) -> &[PartialBijection] {
        &self.agree
    }

    pub fn disagree_constraints(&self) -> &[PartialBijection] {
        &self.disagree
    }

    /// Union of all agree constraints.
    pub fn merged_agree(&self) -> &PartialBijection {
        &self.merged_agree
    }

    pub fn contains(&self, sigma: &Permutation) -> bool {
        sigma.n() == self.n
            && self.merged_agree.agrees_everywhere(sigma)
            && self.disagree.iter().all(|d| d.disagrees_everywhere(sigma))
    }

    pub fn extended(
        &self,
        more_agree: &[PartialBijection],
        more_disagree: &[PartialBijection],
    ) -> Result<RestrictionClass> {
        let mut agree = self.agree.clone();
        agree.extend(more_agree.iter().cloned());
        let mut disagree = self.disagree.clone();
        disagree.extend(more_disagree.iter().cloned());
        RestrictionClass::new(self.n, agree, disagree)
    }

    /// Exact |R|: direct enumeration for n ≤ 9, inclusion–exclusion over the
    /// disagree-constraint pairs (rook-polynomial style) beyond that.
    pub fn size(&self) -> BigUint {
        if self.n <= ENUMERATION_LIMIT {
            self.size_enumerated()
        } else {
            self.size_inclusion_exclusion()
        }
    }

    pub fn size_enumerated(&self) -> BigUint {
        let perms = all_permutations(self.n).expect("n within enumeration limit");
        BigUint::from(perms.iter().filter(|p| self.contains(p)).count())
    }

    pub fn size_inclusion_exclusion(&self) -> BigUint {
        // After fixing the agree points, the class is counted as permutations
        // of the free domain onto the free range avoiding a set of forbidden
        // positions: sum over partial matchings inside the forbidden set.
        let fixed = &self.merged_agree;
        let m = self.n - fixed.len();
        let dom: BTreeSet<usize> = fixed.domain().into_iter().collect();
        let ran: BTreeSet<usize> = fixed.range().into_iter().collect();
        let mut forbidden: BTreeSet<(usize, usize)> = BTreeSet::new();
        for d in &self.disagree {
            for (x, y) in d.pairs() {
                if dom.contains(&x) || ran.contains(&y) {
                    // Vacuous: x already mapped elsewhere, or y already taken.
                    continue;
                }
                forbidden.insert((x, y));
            }
        }
        let forbidden: Vec<(usize, usize)> = forbidden.into_iter().collect();
        // r[k] = number of k-subsets of forbidden pairs with distinct x and y.
        let mut rook = vec![BigUint::zero(); forbidden.len() + 1];
        fn count_matchings(
            pairs: &[(usize, usize)],
            idx: usize,
            used_x: &mut BTreeSet<usize>,
            used_y: &mut BTreeSet<usize>,
            size: usize,
            rook: &mut [BigUint],
        ) {
            rook[size] += BigUint::one();
            for i in idx..pairs.len() {
                let (x, y) = pairs[i];
                if !used_x.contains(&x) && !used_y.contains(&y) {
                    used_x.insert(x);
                    used_y.insert(y);
                    count_matchings(pairs, i + 1, used_x, used_y, size + 1, rook);
                    used_x.remove(&x);
                    used_y.remove(&y);
                }
            }
        }
        count_matchings(
            &forbidden,
            0,
            &mut BTreeSet::new(),
            &mut BTreeSet::new(),
            0,
            &mut rook,
        );
        let mut total = BigInt::zero();
        for (k, r) in rook.iter().enumerate() {
            if k > m {
                break;
            }
            let term = BigInt::from(r.clone()) * BigInt::from(factorial(m - k));
            if k % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total.to_biguint().unwrap_or_else(BigUint::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.size().is_zero()
    }

    /// All members; requires n within the enumeration limit.
    pub fn members(&self) -> Result<Vec<Permutation>> {
        let perms = all_permutations(self.n)?;
        Ok(perms.into_iter().filter(|p| self.contains(p)).collect())
    }
}

/// Exact size of the restriction class (exposed as a free function for
/// callers that only need the count).
pub fn restriction_class_size(r: &RestrictionClass) -> BigUint {
    r.size()
}

/// A set of permutations inside a restriction class, with exact measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermFamily {
    ambient: RestrictionClass,
    members: BTreeSet<Permutation>,
}

impl PermFamily {
    pub fn new(ambient: RestrictionClass, members: BTreeSet<Permutation>) -> Result<Self> {
        for m in &members {
            if !ambient.contains(m) {
                return Err(Error::InvalidInput(format!(
                    "member {m} lies outside the ambient restriction class"
                )));
            }
        }
        Ok(PermFamily { ambient, members })
    }

    pub fn from_members<I: IntoIterator<Item = Permutation>>(
        ambient: RestrictionClass,
        members: I,
    ) -> Result<Self> {
        Self::new(ambient, members.into_iter().collect())
    }

    /// The whole ambient class as a family (μ = 1).
    pub fn full(ambient: RestrictionClass) -> Result<Self> {
        let members = ambient.members()?;
        Ok(PermFamily {
            ambient,
            members: members.into_iter().collect(),
        })
    }

    pub fn empty(ambient: RestrictionClass) -> Self {
        PermFamily {
            ambient,
            members: BTreeSet::new(),
        }
    }

    pub fn ambient(&self) -> &RestrictionClass {
        &self.ambient
    }

    pub fn n(&self) -> usize {
        self.ambient.n()
    }

    pub fn members(&self) -> impl Iterator<Item = &Permutation> {
        self.members.iter()
    }

    pub fn member_set(&self) -> &BTreeSet<Permutation> {
        &self.members
    }

    pub fn contains(&self, sigma: &Permutation) -> bool {
        self.members.contains(sigma)
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn measure(&self) -> Result<BigRational> {
        let ambient_size = self.ambient.size();
        if ambient_size.is_zero() {
            return Err(Error::InfeasibleClass(
                "measure over an empty restriction class".into(),
            ));
        }
        Ok(BigRational::new(
            BigInt::from(self.members.len()),
            BigInt::from(ambient_size),
        ))
    }

    /// F(more_agree, more_disagree‾): members filtered, ambient extended.
    pub fn restrict(
        &self,
        more_agree: &[PartialBijection],
        more_disagree: &[PartialBijection],
    ) -> Result<PermFamily> {
        let ambient = self.ambient.extended(more_agree, more_disagree)?;
        let members = self
            .members
            .iter()
            .filter(|m| ambient.contains(m))
            .cloned()
            .collect();
        Ok(PermFamily { ambient, members })
    }

    pub fn is_t_intersecting(&self, t: usize) -> bool {
        let v: Vec<&Permutation> = self.members.iter().collect();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                if agreements(v[i], v[j]).unwrap() < t {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_intersection_free(&self, t_minus_1: usize) -> bool {
        let v: Vec<&Permutation> = self.members.iter().collect();
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                if agreements(v[i], v[j]).unwrap() == t_minus_1 {
                    return false;
                }
            }
        }
        true
    }
}

/// ⟨π₁,…,π_l⟩: permutations agreeing everywhere with at least one generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Junta {
    n: usize,
    generators: Vec<PartialBijection>,
}

impl Junta {
    pub fn new(n: usize, mut generators: Vec<PartialBijection>) -> Self {
        generators.sort();
        generators.dedup();
        Junta { n, generators }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PartialBijection] {
        &self.generators
    }

    pub fn contains(&self, sigma: &Permutation) -> bool {
        self.generators.iter().any(|g| g.agrees_everywhere(sigma))
    }

    /// max(#generators, max generator domain size).
    pub fn complexity(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.len())
            .max()
            .unwrap_or(0)
            .max(self.generators.len())
    }

    /// Exact size by inclusion–exclusion over generator unions; conflicting
    /// unions contribute 0.
    pub fn size_inclusion_exclusion(&self) -> BigUint {
        let l = self.generators.len();
        let mut total = BigInt::zero();
        for mask in 1u64..(1u64 << l) {
            let mut merged = PartialBijection::empty();
            let mut ok = true;
            for (i, g) in self.generators.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    match merged.union(g) {
                        Ok(u) => merged = u,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let term = BigInt::from(factorial(self.n - merged.len()));
            if mask.count_ones() % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
        total.to_biguint().unwrap_or_else(BigUint::zero)
    }

    pub fn size_enumerated(&self) -> Result<BigUint> {
        let perms = all_permutations(self.n)?;
        Ok(BigUint::from(
            perms.iter().filter(|p| self.contains(p)).count(),
        ))
    }

    pub fn size(&self) -> BigUint {
        if self.n <= ENUMERATION_LIMIT {
            self.size_enumerated().expect("within limit")
        } else {
            self.size_inclusion_exclusion()
        }
    }

    /// The junta as a family over the full S_n.
    pub fn as_family(&self) -> Result<PermFamily> {
        let ambient = RestrictionClass::full(self.n);
        let members = all_permutations(self.n)?
            .into_iter()
            .filter(|p| self.contains(p))
            .collect();
        Ok(PermFamily { ambient, members })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_one_indexed(v).unwrap()
    }

    fn pb(pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::from_one_indexed(pairs).unwrap()
    }

    #[test]
    fn agreements_examples() {
        let id = Permutation::identity(4);
        assert_eq!(agreements(&id, &id).unwrap(), 4);
        assert_eq!(agreements(&perm(&[2, 1, 3, 4]), &id).unwrap(), 2);
        assert_eq!(
            agreements(&perm(&[2, 3, 4, 1]), &perm(&[2, 3, 1, 4])).unwrap(),
            2
        );
        assert!(matches!(
            agreements(&id, &Permutation::identity(5)),
            Err(Error::SizeMismatch { left: 4, right: 5 })
        ));
    }

    #[test]
    fn agreements_translation_invariant() {
        let perms = all_permutations(4).unwrap();
        let a = &perms[5];
        let b = &perms[17];
        let rho = &perms[9];
        let theta = &perms[20];
        let base = agreements(a, b).unwrap();
        let la = rho.compose(&a.compose(theta).unwrap()).unwrap();
        let lb = rho.compose(&b.compose(theta).unwrap()).unwrap();
        assert_eq!(agreements(&la, &lb).unwrap(), base);
    }

    #[test]
    fn intersecting_predicates() {
        let star = Junta::new(4, vec![pb(&[(1, 1)])]).as_family().unwrap();
        assert!(star.is_t_intersecting(1));
        let f = PermFamily::from_members(
            RestrictionClass::full(4),
            vec![Permutation::identity(4), perm(&[2, 1, 4, 3])],
        )
        .unwrap();
        assert!(!f.is_intersection_free(0));
        let g = PermFamily::from_members(
            RestrictionClass::full(4),
            vec![Permutation::identity(4), perm(&[2, 3, 4, 1])],
        )
        .unwrap();
        assert!(g.is_intersection_free(1));
    }

    #[test]
    fn class_sizes() {
        assert_eq!(RestrictionClass::full(4).size(), BigUint::from(24u32));
        let star = RestrictionClass::new(4, vec![pb(&[(1, 1)])], vec![]).unwrap();
        assert_eq!(star.size(), BigUint::from(6u32));
        let derangements = RestrictionClass::new(
            4,
            vec![],
            vec![pb(&[(1, 1), (2, 2), (3, 3), (4, 4)])],
        )
        .unwrap();
        assert_eq!(derangements.size(), BigUint::from(9u32));
    }

    #[test]
    fn class_size_ie_matches_enumeration() {
        for n in 3..=6 {
            let classes = vec![
                RestrictionClass::full(n),
                RestrictionClass::new(n, vec![pb(&[(1, 2)])], vec![pb(&[(2, 1), (3, 3)])])
                    .unwrap(),
                RestrictionClass::new(
                    n,
                    vec![],
                    vec![pb(&[(1, 1), (2, 2)]), pb(&[(1, 2), (2, 1)])],
                )
                .unwrap(),
            ];
            for c in classes {
                assert_eq!(c.size_enumerated(), c.size_inclusion_exclusion(), "n={n}");
            }
        }
    }

    #[test]
    fn measures() {
        let full = PermFamily::full(RestrictionClass::full(4)).unwrap();
        assert_eq!(full.measure().unwrap(), BigRational::from_integer(1.into()));
        let star = Junta::new(4, vec![pb(&[(1, 1)])]).as_family().unwrap();
        assert_eq!(
            star.measure().unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        let amb = RestrictionClass::new(4, vec![pb(&[(1, 1)])], vec![]).unwrap();
        let f = PermFamily::from_members(amb, vec![Permutation::identity(4)]).unwrap();
        assert_eq!(f.measure().unwrap(), BigRational::new(1.into(), 6.into()));
    }

    #[test]
    fn restrict_examples() {
        let full = PermFamily::full(RestrictionClass::full(4)).unwrap();
        let r = full.restrict(&[pb(&[(1, 2)])], &[]).unwrap();
        assert_eq!(r.size(), 6);
        assert_eq!(r.measure().unwrap(), BigRational::from_integer(1.into()));

        let star = PermFamily::full(
            RestrictionClass::new(4, vec![pb(&[(1, 1)])], vec![]).unwrap(),
        )
        .unwrap();
        let r2 = star.restrict(&[], &[pb(&[(2, 2)])]).unwrap();
        assert_eq!(r2.size(), 4);
        assert_eq!(r2.measure().unwrap(), BigRational::from_integer(1.into()));

        let bad = star.restrict(&[], &[pb(&[(1, 1)])]);
        assert!(matches!(bad, Err(Error::InfeasibleClass(_))));
    }

    #[test]
    fn junta_sizes() {
        assert_eq!(
            Junta::new(4, vec![pb(&[(1, 1)])]).size(),
            BigUint::from(6u32)
        );
        assert_eq!(
            Junta::new(4, vec![pb(&[(1, 1)]), pb(&[(1, 2)])]).size(),
            BigUint::from(12u32)
        );
        assert_eq!(
            Junta::new(4, vec![pb(&[(1, 1)]), pb(&[(2, 2)])]).size(),
            BigUint::from(10u32)
        );
    }

    #[test]
    fn junta_ie_matches_enumeration() {
        for n in 4..=6 {
            let juntas = vec![
                Junta::new(n, vec![pb(&[(1, 1)]), pb(&[(2, 2)]), pb(&[(1, 2), (2, 1)])]),
                Junta::new(n, vec![pb(&[(1, 2), (2, 3)]), pb(&[(3, 1)])]),
            ];
            for j in juntas {
                assert_eq!(j.size_enumerated().unwrap(), j.size_inclusion_exclusion());
            }
        }
    }

    #[test]
    fn union_examples() {
        assert_eq!(
            pb(&[(1, 2)]).union(&pb(&[(3, 4)])).unwrap(),
            pb(&[(1, 2), (3, 4)])
        );
        assert_eq!(pb(&[(1, 2)]).union(&pb(&[(1, 2)])).unwrap(), pb(&[(1, 2)]));
        assert!(matches!(
            pb(&[(1, 2)]).union(&pb(&[(1, 3)])),
            Err(Error::Conflict { x: 1, y1: 2, y2: 3 })
        ));
    }

    #[test]
    fn bijection_ordering_is_domain_then_images() {
        // Domains compare before images: {1->5, 2->1} < {1->4, 3->1}.
        let a = pb(&[(1, 5), (2, 1)]);
        let b = pb(&[(1, 4), (3, 1)]);
        assert!(a < b);
    }

    #[test]
    fn t_intersecting_implies_intersection_free() {
        let j = Junta::new(5, vec![pb(&[(1, 1), (2, 2)])]);
        let f = j.as_family().unwrap();
        assert!(f.is_t_intersecting(2));
        assert!(f.is_intersection_free(1));
    }
}
