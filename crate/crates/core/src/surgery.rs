//! Matching surgery on pairs of constrained families.
//!
//! A pair of families F1 ⊆ S_n(ρ1, τ̄1), F2 ⊆ S_n(ρ2, τ̄2) is viewed through
//! four bipartite matchings between a domain copy X and a range copy Y of
//! [n]: M_i = ρ_i and N_i = τ_i. Edges shared between the two sides are
//! harmless ("type 1"); the remaining edges of M1 ∪ M2 form disjoint paths
//! and cycles, which the eliminators below remove one by one. Each
//! elimination translates one family by a cycle permutation θ so that both
//! agreement constraints coincide on the affected points, deletes those
//! points, and relabels the survivors order-preservingly. Every structural
//! guarantee of each elimination is re-verified on the output; a failure is
//! reported as a contract error rather than trusted.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::{
    agreements, PartialBijection, PermFamily, Permutation, RestrictionClass,
};
use crate::pseudorandom::{
    check_quasiregular, check_quasiregular_fn, gate, GateCheck, GatePolicy, Threshold,
};
use crate::spectral::FunctionOnSn;

fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

fn one_ix(x: usize) -> usize {
    x + 1
}

/// Union of all disagreement constraints of a family's ambient class. The
/// constraints must be mutually consistent (a common extension exists).
pub fn merged_disagreement(f: &PermFamily) -> Result<PartialBijection> {
    let mut tau = PartialBijection::empty();
    for d in f.ambient().disagree_constraints() {
        tau = tau.union(d).map_err(|e| {
            Error::InvalidInput(format!(
                "disagreement constraints do not merge into one matching: {e}"
            ))
        })?;
    }
    Ok(tau)
}

/// The pairs of `a` that avoid `b` entirely: a(x) = y with x outside the
/// domain of `b` and y outside its range.
pub fn exclusive_pairs(a: &PartialBijection, b: &PartialBijection) -> PartialBijection {
    let bd: BTreeSet<usize> = b.domain().into_iter().collect();
    let br: BTreeSet<usize> = b.range().into_iter().collect();
    PartialBijection::from_pairs(
        a.pairs().filter(|(x, y)| !bd.contains(x) && !br.contains(y)),
    )
    .expect("sub-matching of a matching")
}

/// The four matchings carried by a pair of constrained families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingQuadruple {
    pub n: usize,
    /// Agreement constraint of family i, as a matching X -> Y.
    pub m1: PartialBijection,
    pub m2: PartialBijection,
    /// Merged disagreement constraint of family i.
    pub n1: PartialBijection,
    pub n2: PartialBijection,
}

pub fn quadruple_of(f1: &PermFamily, f2: &PermFamily) -> Result<MatchingQuadruple> {
    if f1.n() != f2.n() {
        return Err(Error::SizeMismatch {
            left: f1.n(),
            right: f2.n(),
        });
    }
    Ok(MatchingQuadruple {
        n: f1.n(),
        m1: f1.ambient().merged_agree().clone(),
        m2: f2.ambient().merged_agree().clone(),
        n1: merged_disagreement(f1)?,
        n2: merged_disagreement(f2)?,
    })
}

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub failures: Vec<String>,
}

impl CompatibilityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn edge_in(pb: &PartialBijection, x: usize, y: usize) -> bool {
    pb.image_of(x) == Some(y)
}

/// Structural compatibility of the four matchings:
/// - M_i and N_i are vertex-disjoint;
/// - every N_i edge is also an M_{3-i} edge;
/// - every M_i edge either is an edge of M_{3-i} ∪ N_{3-i} (type 1), or is
///   vertex-disjoint from N_{3-i} (type 2).
pub fn validate_good_properties(q: &MatchingQuadruple) -> CompatibilityReport {
    let mut failures = Vec::new();
    let sides = [(1usize, &q.m1, &q.n1, &q.m2, &q.n2), (2, &q.m2, &q.n2, &q.m1, &q.n1)];
    for (i, m, nn, mo, no) in sides {
        let md: BTreeSet<usize> = m.domain().into_iter().collect();
        let mr: BTreeSet<usize> = m.range().into_iter().collect();
        for (x, y) in nn.pairs() {
            if md.contains(&x) {
                failures.push(format!(
                    "M{i} and N{i} share the domain vertex x = {}",
                    one_ix(x)
                ));
            }
            if mr.contains(&y) {
                failures.push(format!(
                    "M{i} and N{i} share the range vertex y = {}",
                    one_ix(y)
                ));
            }
            if !edge_in(mo, x, y) {
                failures.push(format!(
                    "N{i} edge {} -> {} is not an edge of M{}",
                    one_ix(x),
                    one_ix(y),
                    3 - i
                ));
            }
        }
        let nod: BTreeSet<usize> = no.domain().into_iter().collect();
        let nor: BTreeSet<usize> = no.range().into_iter().collect();
        for (x, y) in m.pairs() {
            let type1 = edge_in(mo, x, y) || edge_in(no, x, y);
            if !type1 && (nod.contains(&x) || nor.contains(&y)) {
                failures.push(format!(
                    "M{i} edge {} -> {} is neither shared with the other side nor \
                     vertex-disjoint from N{}",
                    one_ix(x),
                    one_ix(y),
                    3 - i
                ));
            }
        }
    }
    CompatibilityReport { failures }
}

/// Which side of the bipartite graph each endpoint of a path lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathEnds {
    BothDomain,
    BothRange,
    Mixed,
}

/// A maximal path of type-2 edges, stored as its alternating vertex
/// sequence. For BothDomain paths `xs` is one longer than `ys` and the edge
/// xs[j]-ys[j] belongs to M1 (the canonical orientation); for BothRange
/// paths `ys` is one longer; Mixed paths have equal lengths and start at the
/// domain-side endpoint, with first and last edges owned by `owner`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type2Path {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
    /// Owner (1 or 2) of the edges xs[j]-ys[j].
    pub owner: u8,
    pub ends: PathEnds,
}

impl Type2Path {
    pub fn edge_count(&self) -> usize {
        self.xs.len() + self.ys.len() - 1
    }
}

/// A cycle of type-2 edges: xs[j]-ys[j] is an M1 edge, xs[j+1]-ys[j] an M2
/// edge (cyclically), with xs[0] the smallest domain vertex on the cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Type2Cycle {
    pub xs: Vec<usize>,
    pub ys: Vec<usize>,
}

impl Type2Cycle {
    pub fn edge_count(&self) -> usize {
        2 * self.xs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClassification {
    /// Type-1 edges as (owner, x, y); an edge shared by M1 and M2 appears
    /// once per owner.
    pub type1: BTreeSet<(u8, usize, usize)>,
    pub cycles: Vec<Type2Cycle>,
    pub paths: Vec<Type2Path>,
}

impl EdgeClassification {
    pub fn total_edges(&self) -> usize {
        self.type1.len()
            + self.cycles.iter().map(Type2Cycle::edge_count).sum::<usize>()
            + self.paths.iter().map(Type2Path::edge_count).sum::<usize>()
    }
}

/// Splits the edges of M1 ∪ M2 into type-1 edges and the paths and cycles
/// formed by the rest.
pub fn classify_edges(q: &MatchingQuadruple) -> Result<EdgeClassification> {
    let mut type1 = BTreeSet::new();
    // Type-2 edges per owner, indexed from both sides.
    let mut t2x = [BTreeMap::new(), BTreeMap::new()];
    let mut t2y = [BTreeMap::new(), BTreeMap::new()];
    for (i, m, mo, no) in [(0usize, &q.m1, &q.m2, &q.n2), (1, &q.m2, &q.m1, &q.n1)] {
        for (x, y) in m.pairs() {
            if edge_in(mo, x, y) || edge_in(no, x, y) {
                type1.insert((i as u8 + 1, x, y));
            } else {
                t2x[i].insert(x, y);
                t2y[i].insert(y, x);
            }
        }
    }
    let degree_x = |x: usize| {
        t2x[0].contains_key(&x) as usize + t2x[1].contains_key(&x) as usize
    };
    let degree_y = |y: usize| {
        t2y[0].contains_key(&y) as usize + t2y[1].contains_key(&y) as usize
    };

    // Walk a path from an endpoint. `on_x` says whether the current vertex
    // is on the domain side; `owner` is the owner index (0/1) of the next
    // edge to traverse.
    let mut used: BTreeSet<(u8, usize, usize)> = BTreeSet::new();
    let mut raw_paths: Vec<(Vec<usize>, Vec<usize>, u8, bool)> = Vec::new();
    let walk = |start: usize, start_on_x: bool, first_owner: usize,
                    used: &mut BTreeSet<(u8, usize, usize)>| {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut v = start;
        let mut on_x = start_on_x;
        let mut owner = first_owner;
        loop {
            if on_x {
                xs.push(v);
            } else {
                ys.push(v);
            }
            let next = if on_x {
                t2x[owner].get(&v).copied()
            } else {
                t2y[owner].get(&v).copied()
            };
            let Some(w) = next else { break };
            let (x, y) = if on_x { (v, w) } else { (w, v) };
            if !used.insert((owner as u8 + 1, x, y)) {
                break;
            }
            v = w;
            on_x = !on_x;
            owner = 1 - owner;
        }
        (xs, ys)
    };

    // Endpoints are degree-1 vertices of the type-2 subgraph.
    let x_points: BTreeSet<usize> =
        t2x[0].keys().chain(t2x[1].keys()).copied().collect();
    let y_points: BTreeSet<usize> =
        t2y[0].keys().chain(t2y[1].keys()).copied().collect();
    for &x in &x_points {
        if degree_x(x) != 1 {
            continue;
        }
        let owner = usize::from(!t2x[0].contains_key(&x));
        let (fx, fy) = (x, t2x[owner][&x]);
        if used.contains(&(owner as u8 + 1, fx, fy)) {
            continue;
        }
        let (xs, ys) = walk(x, true, owner, &mut used);
        raw_paths.push((xs, ys, owner as u8 + 1, true));
    }
    for &y in &y_points {
        if degree_y(y) != 1 {
            continue;
        }
        let owner = usize::from(!t2y[0].contains_key(&y));
        let (fx, fy) = (t2y[owner][&y], y);
        if used.contains(&(owner as u8 + 1, fx, fy)) {
            continue;
        }
        let (xs, ys) = walk(y, false, owner, &mut used);
        raw_paths.push((xs, ys, owner as u8 + 1, false));
    }

    let mut paths = Vec::new();
    for (mut xs, mut ys, mut first_owner, started_on_x) in raw_paths {
        let ends = match (xs.len() + ys.len()) % 2 {
            0 => PathEnds::Mixed,
            _ if xs.len() > ys.len() => PathEnds::BothDomain,
            _ => PathEnds::BothRange,
        };
        let edge_count = xs.len() + ys.len() - 1;
        let last_owner = if edge_count % 2 == 1 {
            first_owner
        } else {
            3 - first_owner
        };
        let canonical = match ends {
            // Orient so the edges xs[j]-ys[j] belong to M1.
            PathEnds::BothDomain | PathEnds::BothRange => first_owner == 1,
            // Orient from the domain-side endpoint.
            PathEnds::Mixed => started_on_x,
        };
        if !canonical {
            xs.reverse();
            ys.reverse();
            first_owner = last_owner;
        }
        let owner = match ends {
            PathEnds::Mixed => first_owner,
            _ => 1,
        };
        paths.push(Type2Path { xs, ys, owner, ends });
    }
    paths.sort_by_key(|p| (p.ends, p.xs.first().copied(), p.ys.first().copied()));

    // Remaining unused type-2 edges lie on cycles; every cycle vertex has
    // one edge of each owner.
    let mut cycles = Vec::new();
    for &x0 in &x_points {
        let Some(&y0) = t2x[0].get(&x0) else { continue };
        if used.contains(&(1, x0, y0)) {
            continue;
        }
        if degree_x(x0) != 2 {
            continue;
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut x = x0;
        loop {
            let y = *t2x[0].get(&x).ok_or_else(|| {
                Error::Contract(format!(
                    "type-2 subgraph is not a disjoint union of paths and cycles \
                     near x = {}",
                    one_ix(x)
                ))
            })?;
            used.insert((1, x, y));
            xs.push(x);
            ys.push(y);
            let xn = *t2y[1].get(&y).ok_or_else(|| {
                Error::Contract(format!(
                    "type-2 subgraph is not a disjoint union of paths and cycles \
                     near y = {}",
                    one_ix(y)
                ))
            })?;
            used.insert((2, xn, y));
            if xn == x0 {
                break;
            }
            x = xn;
        }
        // Rotate so the smallest domain vertex comes first.
        let pos = xs
            .iter()
            .enumerate()
            .min_by_key(|(_, v)| **v)
            .map(|(i, _)| i)
            .unwrap();
        xs.rotate_left(pos);
        ys.rotate_left(pos);
        cycles.push(Type2Cycle { xs, ys });
    }
    cycles.sort_by_key(|c| c.xs[0]);

    let cls = EdgeClassification { type1, cycles, paths };
    if cls.total_edges() != q.m1.len() + q.m2.len() {
        return Err(Error::Contract(
            "edge classification does not partition the matching edges".into(),
        ));
    }
    Ok(cls)
}

fn map_constraints(
    class: &RestrictionClass,
    fx: impl Fn(usize) -> usize + Copy,
    fy: impl Fn(usize) -> usize + Copy,
) -> Result<RestrictionClass> {
    let map = |pb: &PartialBijection| {
        PartialBijection::from_pairs(pb.pairs().map(|(x, y)| (fx(x), fy(y))))
    };
    let agree = class
        .agree_constraints()
        .iter()
        .map(&map)
        .collect::<Result<Vec<_>>>()?;
    let disagree = class
        .disagree_constraints()
        .iter()
        .map(&map)
        .collect::<Result<Vec<_>>>()?;
    RestrictionClass::new(class.n(), agree, disagree)
}

/// theta . F = {theta . sigma}: the range side is renamed by theta.
pub fn left_translate(f: &PermFamily, theta: &Permutation) -> Result<PermFamily> {
    let ambient = map_constraints(f.ambient(), |x| x, |y| theta.image(y))?;
    let members = f
        .members()
        .map(|m| theta.compose(m))
        .collect::<Result<BTreeSet<_>>>()?;
    PermFamily::new(ambient, members)
}

/// F . theta = {sigma . theta}: the domain side is renamed by theta^{-1}.
pub fn right_translate(f: &PermFamily, theta: &Permutation) -> Result<PermFamily> {
    let inv = theta.inverse();
    let ambient = map_constraints(f.ambient(), |x| inv.image(x), |y| y)?;
    let members = f
        .members()
        .map(|m| m.compose(theta))
        .collect::<Result<BTreeSet<_>>>()?;
    PermFamily::new(ambient, members)
}

/// The family of inverses, swapping the roles of domain and range.
pub fn invert_family(f: &PermFamily) -> Result<PermFamily> {
    let amb = f.ambient();
    let agree = amb.agree_constraints().iter().map(|a| a.inverse()).collect();
    let disagree = amb
        .disagree_constraints()
        .iter()
        .map(|d| d.inverse())
        .collect();
    let ambient = RestrictionClass::new(amb.n(), agree, disagree)?;
    PermFamily::new(ambient, f.members().map(|m| m.inverse()).collect())
}

fn cycle_permutation(n: usize, points: &[usize]) -> Result<Permutation> {
    let mut images: Vec<usize> = (0..n).collect();
    for (i, &p) in points.iter().enumerate() {
        images[p] = points[(i + 1) % points.len()];
    }
    Permutation::from_images(images.into_iter().map(|v| v as u8).collect())
}

fn relabel_map(n: usize, deleted: &BTreeSet<usize>) -> Vec<Option<usize>> {
    let mut map = vec![None; n];
    let mut next = 0usize;
    for (x, slot) in map.iter_mut().enumerate() {
        if !deleted.contains(&x) {
            *slot = Some(next);
            next += 1;
        }
    }
    map
}

/// Removes the matched pairs (x_j, y_j) from a family whose agreement
/// constraint contains all of them, relabelling the surviving domain and
/// range points order-preservingly onto [n - k].
fn delete_and_relabel(
    f: &PermFamily,
    pairs: &[(usize, usize)],
) -> Result<(PermFamily, Vec<Option<usize>>, Vec<Option<usize>>)> {
    let n = f.n();
    let merged = f.ambient().merged_agree();
    for &(x, y) in pairs {
        if merged.image_of(x) != Some(y) {
            return Err(Error::Contract(format!(
                "cannot delete {} -> {}: the pair is not forced by the agreement \
                 constraint",
                one_ix(x),
                one_ix(y)
            )));
        }
    }
    let del_x: BTreeSet<usize> = pairs.iter().map(|&(x, _)| x).collect();
    let del_y: BTreeSet<usize> = pairs.iter().map(|&(_, y)| y).collect();
    if del_x.len() != pairs.len() || del_y.len() != pairs.len() {
        return Err(Error::InvalidInput("repeated deletion points".into()));
    }
    let x_map = relabel_map(n, &del_x);
    let y_map = relabel_map(n, &del_y);
    let np = n - pairs.len();

    let map_pb = |pb: &PartialBijection| -> Result<PartialBijection> {
        let mut kept = Vec::new();
        for (x, y) in pb.pairs() {
            match (x_map[x], y_map[y]) {
                (Some(a), Some(b)) => kept.push((a, b)),
                (None, None) => {}
                _ => {
                    return Err(Error::Contract(format!(
                        "constraint pair {} -> {} straddles the deleted block",
                        one_ix(x),
                        one_ix(y)
                    )))
                }
            }
        }
        PartialBijection::from_pairs(kept)
    };
    let agree = f
        .ambient()
        .agree_constraints()
        .iter()
        .map(map_pb)
        .collect::<Result<Vec<_>>>()?;
    let disagree = f
        .ambient()
        .disagree_constraints()
        .iter()
        .map(map_pb)
        .collect::<Result<Vec<_>>>()?;
    let ambient = RestrictionClass::new(np, agree, disagree)?;

    let mut members = BTreeSet::new();
    for m in f.members() {
        let mut images = vec![0u8; np];
        for x in 0..n {
            if let Some(a) = x_map[x] {
                let b = y_map[m.image(x)].ok_or_else(|| {
                    Error::Contract(format!(
                        "member maps the surviving point {} into the deleted block",
                        one_ix(x)
                    ))
                })?;
                images[a] = b as u8;
            }
        }
        members.insert(Permutation::from_images(images)?);
    }
    Ok((PermFamily::new(ambient, members)?, x_map, y_map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Cycle,
    EvenPath,
    OddPaths,
}

/// A replayable record of one elimination, carrying everything needed to
/// pull permutations of the reduced ground set back to the original one.
#[derive(Debug, Clone)]
pub struct SurgeryStep {
    pub kind: StepKind,
    pub n_before: usize,
    pub n_after: usize,
    /// True when the step ran on inverted families (path endpoints on the
    /// range side).
    pub interchanged: bool,
    /// Translations applied, in the possibly-inverted frame.
    pub left2: Option<Permutation>,
    pub right1: Option<Permutation>,
    pub right2: Option<Permutation>,
    /// Deleted matched pairs, and the order-preserving relabellings of the
    /// surviving domain / range points onto [n_after].
    pub deleted: Vec<(usize, usize)>,
    pub x_map: Vec<Option<usize>>,
    pub y_map: Vec<Option<usize>>,
}

impl SurgeryStep {
    fn unrelabel(&self, sigma: &Permutation) -> Result<Permutation> {
        if sigma.n() != self.n_after {
            return Err(Error::SizeMismatch {
                left: sigma.n(),
                right: self.n_after,
            });
        }
        let mut y_inv = vec![0usize; self.n_after];
        for (y, &slot) in self.y_map.iter().enumerate() {
            if let Some(b) = slot {
                y_inv[b] = y;
            }
        }
        let mut images = vec![0u8; self.n_before];
        for x in 0..self.n_before {
            if let Some(a) = self.x_map[x] {
                images[x] = y_inv[sigma.image(a)] as u8;
            }
        }
        for &(x, y) in &self.deleted {
            images[x] = y as u8;
        }
        Permutation::from_images(images)
    }

    /// Pulls a pair from the reduced families back to the original ones,
    /// undoing the relabelling, the deletions, and the translations.
    pub fn lift_pair(
        &self,
        sigma1: &Permutation,
        sigma2: &Permutation,
    ) -> Result<(Permutation, Permutation)> {
        let (mut a, mut b) = if self.interchanged {
            (sigma1.inverse(), sigma2.inverse())
        } else {
            (sigma1.clone(), sigma2.clone())
        };
        a = self.unrelabel(&a)?;
        b = self.unrelabel(&b)?;
        if let Some(th) = &self.left2 {
            b = th.inverse().compose(&b)?;
        }
        if let Some(th) = &self.right1 {
            a = a.compose(&th.inverse())?;
        }
        if let Some(th) = &self.right2 {
            b = b.compose(&th.inverse())?;
        }
        if self.interchanged {
            a = a.inverse();
            b = b.inverse();
        }
        Ok((a, b))
    }
}

#[derive(Debug, Clone)]
pub struct SurgeryOutcome {
    pub family1: PermFamily,
    pub family2: PermFamily,
    pub quadruple: MatchingQuadruple,
    pub step: SurgeryStep,
    pub gates: Vec<GateCheck>,
}

fn check_common_hypotheses(
    f1: &PermFamily,
    f2: &PermFamily,
    t: usize,
    s: usize,
    eta: &BigRational,
) -> Result<MatchingQuadruple> {
    if t == 0 {
        return Err(Error::InvalidInput("t must be at least 1".into()));
    }
    if !eta.is_positive() {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    let q = quadruple_of(f1, f2)?;
    let report = validate_good_properties(&q);
    if !report.pass() {
        return Err(Error::Contract(format!(
            "matching compatibility fails: {}",
            report.failures.join("; ")
        )));
    }
    if q.m1.intersection_size(&q.m2) != t - 1 {
        return Err(Error::Contract(format!(
            "agreement constraints share {} pairs, expected t - 1 = {}",
            q.m1.intersection_size(&q.m2),
            t - 1
        )));
    }
    let alpha = Threshold::Rational(BigRational::one() + eta);
    for (i, f) in [(1, f1), (2, f2)] {
        let rep = check_quasiregular(f, s, &alpha)?;
        if !rep.verdict {
            return Err(Error::Contract(format!(
                "family {i} is not ({s}, 1+eta)-quasiregular: ratio {} at {:?}",
                rep.attained, rep.witness
            )));
        }
    }
    Ok(q)
}

/// Multiset fingerprints of an edge classification, for before/after
/// comparisons: type-1 edge count, cycle lengths, path (length, ends).
fn classification_shape(
    cls: &EdgeClassification,
) -> (usize, BTreeMap<usize, usize>, BTreeMap<(usize, PathEnds), usize>) {
    let mut cyc = BTreeMap::new();
    for c in &cls.cycles {
        *cyc.entry(c.edge_count()).or_insert(0) += 1;
    }
    let mut pat = BTreeMap::new();
    for p in &cls.paths {
        *pat.entry((p.edge_count(), p.ends)).or_insert(0) += 1;
    }
    (cls.type1.len(), cyc, pat)
}

struct BulletCheck<'a> {
    t: usize,
    s: usize,
    /// Allowed quasiregularity factor of the outputs, 1 + eta_out.
    alpha_out: BigRational,
    deleted: usize,
    /// Expected growth of each disagreement constraint's domain.
    tau_growth: [usize; 2],
    /// Exact measure preservation, or retention of at least one half.
    measure_equal: bool,
    old_measures: [BigRational; 2],
    old_quadruple: &'a MatchingQuadruple,
}

fn verify_elimination_bullets(
    new1: &PermFamily,
    new2: &PermFamily,
    chk: &BulletCheck,
) -> Result<MatchingQuadruple> {
    let q = quadruple_of(new1, new2)?;
    let old = chk.old_quadruple;
    if q.n != old.n - chk.deleted {
        return Err(Error::Contract("wrong ground-set size after deletion".into()));
    }
    for (i, m_new, m_old, n_new, n_old) in [
        (1usize, &q.m1, &old.m1, &q.n1, &old.n1),
        (2, &q.m2, &old.m2, &q.n2, &old.n2),
    ] {
        if m_new.len() + chk.deleted != m_old.len() {
            return Err(Error::Contract(format!(
                "agreement constraint of family {i} has {} pairs, expected {}",
                m_new.len(),
                m_old.len() - chk.deleted
            )));
        }
        if n_new.len() != n_old.len() + chk.tau_growth[i - 1] {
            return Err(Error::Contract(format!(
                "disagreement constraint of family {i} has {} pairs, expected {}",
                n_new.len(),
                n_old.len() + chk.tau_growth[i - 1]
            )));
        }
    }
    if q.m1.intersection_size(&q.m2) != chk.t - 1 {
        return Err(Error::Contract(
            "agreement overlap is no longer exactly t - 1".into(),
        ));
    }
    let half = BigRational::new(big(1), big(2));
    for (i, f, old_mu) in [(1, new1, &chk.old_measures[0]), (2, new2, &chk.old_measures[1])] {
        let mu = f.measure()?;
        if chk.measure_equal {
            if &mu != old_mu {
                return Err(Error::Contract(format!(
                    "measure of family {i} changed: {old_mu} -> {mu}"
                )));
            }
        } else if mu < &half * old_mu {
            return Err(Error::Contract(format!(
                "measure of family {i} fell below half: {old_mu} -> {mu}"
            )));
        }
    }
    let alpha = Threshold::Rational(chk.alpha_out.clone());
    for (i, f) in [(1, new1), (2, new2)] {
        let rep = check_quasiregular(f, chk.s, &alpha)?;
        if !rep.verdict {
            return Err(Error::Contract(format!(
                "family {i} lost quasiregularity after surgery: ratio {}",
                rep.attained
            )));
        }
    }
    let report = validate_good_properties(&q);
    if !report.pass() {
        return Err(Error::Contract(format!(
            "matching compatibility lost after surgery: {}",
            report.failures.join("; ")
        )));
    }
    Ok(q)
}

/// Removes one cycle of type-2 edges, of length 2k. Family 2 is
/// left-translated by the cycle (y_1 y_2 ... y_k) so that both agreement
/// constraints send x_j to y_j; those k matched pairs are then deleted and
/// the survivors relabelled onto [n - k]. Measures are preserved exactly and
/// both families stay (s, 1+eta)-quasiregular.
pub fn eliminate_cycle(
    f1: &PermFamily,
    f2: &PermFamily,
    t: usize,
    s: usize,
    eta: &BigRational,
    cycle: &Type2Cycle,
) -> Result<SurgeryOutcome> {
    let q = check_common_hypotheses(f1, f2, t, s, eta)?;
    let cls = classify_edges(&q)?;
    if !cls.cycles.contains(cycle) {
        return Err(Error::Contract(
            "the requested cycle is not a type-2 cycle of the current matchings".into(),
        ));
    }
    let k = cycle.xs.len();
    let theta = cycle_permutation(q.n, &cycle.ys)?;
    let f2t = left_translate(f2, &theta)?;
    let pairs: Vec<(usize, usize)> = cycle
        .xs
        .iter()
        .copied()
        .zip(cycle.ys.iter().copied())
        .collect();
    let (new1, x_map, y_map) = delete_and_relabel(f1, &pairs)?;
    let (new2, _, _) = delete_and_relabel(&f2t, &pairs)?;

    let chk = BulletCheck {
        t,
        s,
        alpha_out: BigRational::one() + eta,
        deleted: k,
        tau_growth: [0, 0],
        measure_equal: true,
        old_measures: [f1.measure()?, f2.measure()?],
        old_quadruple: &q,
    };
    let new_q = verify_elimination_bullets(&new1, &new2, &chk)?;
    let (t1_old, mut cyc_old, pat_old) = classification_shape(&cls);
    let (t1_new, cyc_new, pat_new) = classification_shape(&classify_edges(&new_q)?);
    let count = cyc_old.entry(2 * k).or_insert(0);
    *count -= 1;
    cyc_old.retain(|_, v| *v > 0);
    if t1_new != t1_old || cyc_new != cyc_old || pat_new != pat_old {
        return Err(Error::Contract(
            "surgery changed components other than the eliminated cycle".into(),
        ));
    }

    let step = SurgeryStep {
        kind: StepKind::Cycle,
        n_before: q.n,
        n_after: q.n - k,
        interchanged: false,
        left2: Some(theta),
        right1: None,
        right2: None,
        deleted: pairs,
        x_map,
        y_map,
    };
    Ok(SurgeryOutcome {
        family1: new1,
        family2: new2,
        quadruple: new_q,
        step,
        gates: Vec::new(),
    })
}

/// Removes one even-length path of type-2 edges. For a path with both
/// endpoints on the domain side, the family whose matching does not own the
/// edges xs[j]-ys[j] is right-translated by (x_1 ... x_{k+1}); paths with
/// both endpoints on the range side are handled by inverting every
/// permutation, eliminating, and inverting back.
pub fn eliminate_even_path(
    f1: &PermFamily,
    f2: &PermFamily,
    t: usize,
    s: usize,
    eta: &BigRational,
    path: &Type2Path,
) -> Result<SurgeryOutcome> {
    if path.ends == PathEnds::Mixed {
        return Err(Error::Contract(
            "odd-length path passed to the even-path eliminator".into(),
        ));
    }
    let q = check_common_hypotheses(f1, f2, t, s, eta)?;
    if path.ends == PathEnds::BothRange {
        let g1 = invert_family(f1)?;
        let g2 = invert_family(f2)?;
        let flipped = Type2Path {
            xs: path.ys.clone(),
            ys: path.xs.clone(),
            owner: path.owner,
            ends: PathEnds::BothDomain,
        };
        let mut out = eliminate_even_path(&g1, &g2, t, s, eta, &flipped)?;
        out.family1 = invert_family(&out.family1)?;
        out.family2 = invert_family(&out.family2)?;
        out.quadruple = quadruple_of(&out.family1, &out.family2)?;
        out.step.interchanged = true;
        return Ok(out);
    }
    let cls = classify_edges(&q)?;
    if !cls.paths.contains(path) {
        return Err(Error::Contract(
            "the requested path is not a type-2 path of the current matchings".into(),
        ));
    }
    let k = path.ys.len();
    let theta = cycle_permutation(q.n, &path.xs)?;
    let f2t = right_translate(f2, &theta)?;
    let pairs: Vec<(usize, usize)> = path.xs[..k]
        .iter()
        .copied()
        .zip(path.ys.iter().copied())
        .collect();
    let (new1, x_map, y_map) = delete_and_relabel(f1, &pairs)?;
    let (new2, _, _) = delete_and_relabel(&f2t, &pairs)?;

    let chk = BulletCheck {
        t,
        s,
        alpha_out: BigRational::one() + eta,
        deleted: k,
        tau_growth: [0, 0],
        measure_equal: true,
        old_measures: [f1.measure()?, f2.measure()?],
        old_quadruple: &q,
    };
    let new_q = verify_elimination_bullets(&new1, &new2, &chk)?;
    let (t1_old, cyc_old, mut pat_old) = classification_shape(&cls);
    let (t1_new, cyc_new, pat_new) = classification_shape(&classify_edges(&new_q)?);
    let count = pat_old.entry((2 * k, PathEnds::BothDomain)).or_insert(0);
    *count -= 1;
    pat_old.retain(|_, v| *v > 0);
    if t1_new != t1_old || cyc_new != cyc_old || pat_new != pat_old {
        return Err(Error::Contract(
            "surgery changed components other than the eliminated path".into(),
        ));
    }

    let step = SurgeryStep {
        kind: StepKind::EvenPath,
        n_before: q.n,
        n_after: q.n - k,
        interchanged: false,
        left2: None,
        right1: None,
        right2: Some(theta),
        deleted: pairs,
        x_map,
        y_map,
    };
    Ok(SurgeryOutcome {
        family1: new1,
        family2: new2,
        quadruple: new_q,
        step,
        gates: Vec::new(),
    })
}

/// Removes every odd-length path of type-2 edges in one batch. Paths whose
/// end edges belong to matching i are collected into group i; family 2 is
/// right-translated by the product of the domain-side cycles of group 1 and
/// family 1 by the product for group 2. Before translating, each family
/// receives one extra disagreement pair per path of the opposite group,
/// which after translation and deletion realises the path's surviving edge
/// as a shared (type-1) edge. Measures can shrink, but by less than half,
/// and quasiregularity degrades from (s, 1+eta) to (s, 1+3eta) at worst.
///
/// The size gate n >= b + max(Q^2, 16/eta^2) (with b the largest total
/// constraint domain) is recorded and, under `GatePolicy::Enforce`, required.
pub fn eliminate_odd_paths(
    f1: &PermFamily,
    f2: &PermFamily,
    t: usize,
    s: usize,
    eta: &BigRational,
    policy: GatePolicy,
) -> Result<SurgeryOutcome> {
    if eta > &BigRational::one() {
        return Err(Error::InvalidInput("eta must lie in (0, 1]".into()));
    }
    let q = check_common_hypotheses(f1, f2, t, s, eta)?;
    let cls = classify_edges(&q)?;
    let odd: Vec<&Type2Path> = cls
        .paths
        .iter()
        .filter(|p| p.ends == PathEnds::Mixed)
        .collect();
    let big_q = odd.len();
    let b = (q.m1.len() + q.n1.len()).max(q.m2.len() + q.n2.len());
    let mut gates = Vec::new();
    let slack = BigRational::from_integer(big(q.n.saturating_sub(b)));
    let gate_ok = slack >= BigRational::from_integer(big(big_q * big_q))
        && &slack * eta * eta >= BigRational::from_integer(big(16));
    gate(
        &mut gates,
        policy,
        format!(
            "n >= b + max(Q^2, 16/eta^2) with n = {}, b = {b}, Q = {big_q}, eta = {eta}",
            q.n
        ),
        gate_ok,
    )?;

    let group1: Vec<&Type2Path> = odd.iter().filter(|p| p.owner == 1).copied().collect();
    let group2: Vec<&Type2Path> = odd.iter().filter(|p| p.owner == 2).copied().collect();
    let product = |paths: &[&Type2Path]| -> Result<Option<Permutation>> {
        if paths.iter().all(|p| p.xs.len() == 1) {
            return Ok(None);
        }
        let mut theta = Permutation::identity(q.n);
        for p in paths {
            theta = cycle_permutation(q.n, &p.xs)?.compose(&theta)?;
        }
        Ok(Some(theta))
    };
    let theta2 = product(&group1)?; // applied to family 2
    let theta1 = product(&group2)?; // applied to family 1

    let adjoin = |paths: &[&Type2Path]| -> Result<Option<PartialBijection>> {
        if paths.is_empty() {
            return Ok(None);
        }
        PartialBijection::from_pairs(
            paths
                .iter()
                .map(|p| (p.xs[0], *p.ys.last().expect("nonempty path"))),
        )
        .map(Some)
    };
    let adj1 = adjoin(&group2)?;
    let adj2 = adjoin(&group1)?;
    let restrict = |f: &PermFamily, adj: &Option<PartialBijection>| -> Result<PermFamily> {
        match adj {
            Some(pb) => f.restrict(&[], std::slice::from_ref(pb)),
            None => Ok(f.clone()),
        }
    };
    let f1r = restrict(f1, &adj1)?;
    let f2r = restrict(f2, &adj2)?;
    let f1t = match &theta1 {
        Some(th) => right_translate(&f1r, th)?,
        None => f1r,
    };
    let f2t = match &theta2 {
        Some(th) => right_translate(&f2r, th)?,
        None => f2r,
    };

    let mut pairs = Vec::new();
    for p in &odd {
        let k = p.xs.len() - 1;
        for j in 0..k {
            pairs.push((p.xs[j], p.ys[j]));
        }
    }
    let (new1, x_map, y_map) = delete_and_relabel(&f1t, &pairs)?;
    let (new2, _, _) = delete_and_relabel(&f2t, &pairs)?;

    let three = BigRational::from_integer(big(3));
    let chk = BulletCheck {
        t,
        s,
        alpha_out: BigRational::one() + three * eta,
        deleted: pairs.len(),
        tau_growth: [group2.len(), group1.len()],
        measure_equal: false,
        old_measures: [f1.measure()?, f2.measure()?],
        old_quadruple: &q,
    };
    let new_q = verify_elimination_bullets(&new1, &new2, &chk)?;
    let (t1_old, cyc_old, mut pat_old) = classification_shape(&cls);
    let (t1_new, cyc_new, pat_new) = classification_shape(&classify_edges(&new_q)?);
    pat_old.retain(|(_, ends), _| *ends != PathEnds::Mixed);
    if t1_new != t1_old + big_q || cyc_new != cyc_old || pat_new != pat_old {
        return Err(Error::Contract(
            "odd paths were not each replaced by a single shared edge".into(),
        ));
    }

    let step = SurgeryStep {
        kind: StepKind::OddPaths,
        n_before: q.n,
        n_after: q.n - pairs.len(),
        interchanged: false,
        left2: None,
        right1: theta1,
        right2: theta2,
        deleted: pairs,
        x_map,
        y_map,
    };
    Ok(SurgeryOutcome {
        family1: new1,
        family2: new2,
        quadruple: new_q,
        step,
        gates,
    })
}

fn transposition(n: usize, a: usize, b: usize) -> Result<Permutation> {
    let mut images: Vec<u8> = (0..n as u8).collect();
    images.swap(a, b);
    Permutation::from_images(images)
}

fn check_fixing_inputs(pi1: &PartialBijection, pi2: &PartialBijection) -> Result<()> {
    let d1: BTreeSet<usize> = pi1.domain().into_iter().collect();
    let r1: BTreeSet<usize> = pi1.range().into_iter().collect();
    if pi2.pairs().any(|(x, y)| d1.contains(&x) || r1.contains(&y)) {
        return Err(Error::InvalidInput(
            "the two constraints must have disjoint domains and ranges".into(),
        ));
    }
    Ok(())
}

/// Turns a permutation that disagrees everywhere with pi2 into one agreeing
/// with it, by composing with one transposition per pair of pi2: for the
/// pair (i, j), sigma becomes (j sigma(i)) . sigma. Agreements with pi1 are
/// untouched, and the individual transposition steps commute.
pub fn fixing_operator(
    pi1: &PartialBijection,
    pi2: &PartialBijection,
    sigma: &Permutation,
) -> Result<Permutation> {
    check_fixing_inputs(pi1, pi2)?;
    let n = sigma.n();
    let source = RestrictionClass::new(n, vec![pi1.clone()], vec![pi2.clone()])?;
    if !source.contains(sigma) {
        return Err(Error::Contract(format!(
            "{sigma} does not agree with the first constraint while avoiding the \
             second"
        )));
    }
    let mut tau = sigma.clone();
    for (i, j) in pi2.pairs() {
        let s = tau.image(i);
        if s != j {
            tau = transposition(n, j, s)?.compose(&tau)?;
        }
    }
    let target = RestrictionClass::new(
        n,
        vec![pi1.clone(), pi2.clone()],
        vec![],
    )?;
    if !target.contains(&tau) {
        return Err(Error::Contract(
            "fixing operator output violates the target constraints".into(),
        ));
    }
    Ok(tau)
}

/// Averages a family over the fibers of the fixing operator: the result is
/// a fractional function on the class agreeing with both constraints, whose
/// value at tau is the fraction of the fiber over tau lying in the family.
/// Fiber sizes are checked to be constant, so the expectation equals the
/// family's measure exactly.
pub fn quotient_fraction(f: &PermFamily) -> Result<FunctionOnSn> {
    let pi1 = f.ambient().merged_agree().clone();
    let pi2 = merged_disagreement(f)?;
    check_fixing_inputs(&pi1, &pi2)?;
    let n = f.n();
    let target = RestrictionClass::new(n, vec![pi1.clone(), pi2.clone()], vec![])?;
    let mut fiber_sizes: BTreeMap<Permutation, usize> = BTreeMap::new();
    let mut hits: BTreeMap<Permutation, usize> = BTreeMap::new();
    for sigma in f.ambient().members()? {
        let tau = fixing_operator(&pi1, &pi2, &sigma)?;
        *fiber_sizes.entry(tau.clone()).or_insert(0) += 1;
        if f.contains(&sigma) {
            *hits.entry(tau).or_insert(0) += 1;
        }
    }
    let targets = target.members()?;
    if fiber_sizes.len() != targets.len()
        || targets.iter().any(|t| !fiber_sizes.contains_key(t))
    {
        return Err(Error::Contract(
            "fixing operator is not onto the target class".into(),
        ));
    }
    let sizes: BTreeSet<usize> = fiber_sizes.values().copied().collect();
    if sizes.len() > 1 {
        return Err(Error::Contract(format!(
            "fiber sizes are not constant: {sizes:?}"
        )));
    }
    let values: BTreeMap<Permutation, BigRational> = fiber_sizes
        .iter()
        .map(|(tau, &size)| {
            let h = hits.get(tau).copied().unwrap_or(0);
            (tau.clone(), BigRational::new(big(h), big(size)))
        })
        .filter(|(_, v)| !v.is_zero())
        .collect();
    let out = FunctionOnSn::new(target, values)?;
    if out.expectation()? != f.measure()? {
        return Err(Error::Contract(
            "quotient expectation differs from the family measure".into(),
        ));
    }
    Ok(out)
}

/// For families F (agreeing with pi1, avoiding pi2) and G (avoiding pi1,
/// agreeing with pi2) in which every member of F intersects every member of
/// G, the fiber averages f and g satisfy f(sigma1) g(sigma2) = 0 whenever
/// sigma1 and sigma2 agree only on the two constraint domains; and if both
/// families are (s, alpha)-quasiregular, so are f and g. The intersection
/// hypothesis is verified by brute force; both conclusions are then checked
/// exhaustively and the result returned.
pub fn cross_intersection_transfer_check(
    f: &PermFamily,
    g: &PermFamily,
    s: usize,
    alpha: &Threshold,
) -> Result<bool> {
    let pi1 = f.ambient().merged_agree().clone();
    let pi2 = merged_disagreement(f)?;
    if g.ambient().merged_agree() != &pi2 || merged_disagreement(g)? != pi1 {
        return Err(Error::InvalidInput(
            "the two families must swap agreement and disagreement constraints".into(),
        ));
    }
    for a in f.members() {
        for b in g.members() {
            if agreements(a, b)? == 0 {
                return Err(Error::Contract(format!(
                    "families are not cross-intersecting: {a} and {b} are disjoint"
                )));
            }
        }
    }
    let ft = quotient_fraction(f)?;
    let gt = quotient_fraction(g)?;
    let dom: BTreeSet<usize> = pi1
        .domain()
        .into_iter()
        .chain(pi2.domain())
        .collect();
    let members = ft.ambient().members()?;
    for s1 in &members {
        if ft.value(s1).is_zero() {
            continue;
        }
        for s2 in &members {
            if gt.value(s2).is_zero() {
                continue;
            }
            let only_forced = (0..f.n())
                .filter(|&x| s1.image(x) == s2.image(x))
                .all(|x| dom.contains(&x));
            if only_forced {
                return Ok(false);
            }
        }
    }
    let fam_quasi = !f.is_empty()
        && !g.is_empty()
        && check_quasiregular(f, s, alpha)?.verdict
        && check_quasiregular(g, s, alpha)?.verdict;
    if fam_quasi {
        for fun in [&ft, &gt] {
            if !fun.expectation()?.is_zero()
                && !check_quasiregular_fn(fun, s, alpha)?.verdict
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pb(pairs: &[(usize, usize)]) -> PartialBijection {
        PartialBijection::from_one_indexed(pairs).unwrap()
    }

    fn full_family(
        n: usize,
        agree: &[(usize, usize)],
        disagree: &[&[(usize, usize)]],
    ) -> PermFamily {
        let ds = disagree.iter().map(|d| pb(d)).collect();
        let class = RestrictionClass::new(n, vec![pb(agree)], ds).unwrap();
        PermFamily::full(class).unwrap()
    }

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn identical_matchings_are_all_type_one() {
        let f1 = full_family(5, &[(1, 1), (2, 2)], &[]);
        let f2 = full_family(5, &[(1, 1), (2, 2)], &[]);
        let q = quadruple_of(&f1, &f2).unwrap();
        assert!(validate_good_properties(&q).pass());
        let cls = classify_edges(&q).unwrap();
        assert_eq!(cls.type1.len(), 4);
        assert!(cls.cycles.is_empty());
        assert!(cls.paths.is_empty());
    }

    #[test]
    fn four_cycle_is_classified() {
        let q = MatchingQuadruple {
            n: 6,
            m1: pb(&[(1, 1), (2, 2)]),
            m2: pb(&[(2, 1), (1, 2)]),
            n1: PartialBijection::empty(),
            n2: PartialBijection::empty(),
        };
        assert!(validate_good_properties(&q).pass());
        let cls = classify_edges(&q).unwrap();
        assert!(cls.type1.is_empty());
        assert!(cls.paths.is_empty());
        assert_eq!(cls.cycles.len(), 1);
        let c = &cls.cycles[0];
        assert_eq!(c.edge_count(), 4);
        assert_eq!(c.xs, vec![0, 1]);
        assert_eq!(c.ys, vec![0, 1]);
    }

    #[test]
    fn shared_vertex_between_m_and_n_is_reported() {
        let q = MatchingQuadruple {
            n: 5,
            m1: pb(&[(1, 1)]),
            m2: pb(&[(1, 2)]),
            n1: pb(&[(1, 2)]),
            n2: PartialBijection::empty(),
        };
        let report = validate_good_properties(&q);
        assert!(!report.pass());
        assert!(report.failures.iter().any(|f| f.contains("x = 1")));
    }

    #[test]
    fn mixed_instance_classification_partitions_all_edges() {
        // One shared edge, one even path, one four-cycle.
        let q = MatchingQuadruple {
            n: 9,
            m1: pb(&[(1, 1), (2, 2), (4, 4), (6, 6)]),
            m2: pb(&[(1, 1), (3, 2), (6, 4), (4, 6)]),
            n1: PartialBijection::empty(),
            n2: PartialBijection::empty(),
        };
        assert!(validate_good_properties(&q).pass());
        let cls = classify_edges(&q).unwrap();
        assert_eq!(cls.type1.len(), 2);
        assert_eq!(cls.cycles.len(), 1);
        assert_eq!(cls.cycles[0].edge_count(), 4);
        assert_eq!(cls.paths.len(), 1);
        let p = &cls.paths[0];
        assert_eq!(p.ends, PathEnds::BothDomain);
        assert_eq!(p.edge_count(), 2);
        assert_eq!(p.xs, vec![1, 2]);
        assert_eq!(p.ys, vec![1]);
        assert_eq!(cls.total_edges(), q.m1.len() + q.m2.len());
    }

    #[test]
    fn cycle_elimination_preserves_measures_and_lifts() {
        let f1 = full_family(6, &[(1, 1), (2, 2)], &[]);
        let f2 = full_family(6, &[(2, 1), (1, 2)], &[]);
        let q = quadruple_of(&f1, &f2).unwrap();
        let cls = classify_edges(&q).unwrap();
        let eta = rational(1, 2);
        let out = eliminate_cycle(&f1, &f2, 1, 2, &eta, &cls.cycles[0]).unwrap();
        assert_eq!(out.family1.n(), 4);
        assert_eq!(out.family1.measure().unwrap(), f1.measure().unwrap());
        assert_eq!(out.family2.measure().unwrap(), f2.measure().unwrap());
        assert!(validate_good_properties(&out.quadruple).pass());

        // Plant a disagreeing pair downstream and pull it back.
        let s1 = Permutation::from_one_indexed(&[1, 2, 3, 4]).unwrap();
        let s2 = Permutation::from_one_indexed(&[2, 3, 4, 1]).unwrap();
        assert_eq!(agreements(&s1, &s2).unwrap(), 0);
        assert!(out.family1.contains(&s1));
        assert!(out.family2.contains(&s2));
        let (l1, l2) = out.step.lift_pair(&s1, &s2).unwrap();
        assert!(f1.contains(&l1));
        assert!(f2.contains(&l2));
        assert_eq!(agreements(&l1, &l2).unwrap(), 0);
    }

    #[test]
    fn cycle_elimination_rejects_a_stale_cycle() {
        let f1 = full_family(6, &[(1, 1), (2, 2)], &[]);
        let f2 = full_family(6, &[(2, 1), (1, 2)], &[]);
        let bogus = Type2Cycle {
            xs: vec![2, 3],
            ys: vec![2, 3],
        };
        let err = eliminate_cycle(&f1, &f2, 1, 2, &rational(1, 2), &bogus).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn even_path_elimination_domain_endpoints() {
        let f1 = full_family(6, &[(1, 1)], &[]);
        let f2 = full_family(6, &[(2, 1)], &[]);
        let q = quadruple_of(&f1, &f2).unwrap();
        let cls = classify_edges(&q).unwrap();
        assert_eq!(cls.paths.len(), 1);
        let eta = rational(1, 2);
        let out = eliminate_even_path(&f1, &f2, 1, 2, &eta, &cls.paths[0]).unwrap();
        assert_eq!(out.family1.n(), 5);
        assert_eq!(out.family1.measure().unwrap(), f1.measure().unwrap());
        assert_eq!(out.family2.measure().unwrap(), f2.measure().unwrap());
        assert!(out.quadruple.m1.is_empty());
        assert!(out.quadruple.m2.is_empty());

        let s1 = Permutation::from_one_indexed(&[1, 2, 3, 4, 5]).unwrap();
        let s2 = Permutation::from_one_indexed(&[2, 3, 4, 5, 1]).unwrap();
        let (l1, l2) = out.step.lift_pair(&s1, &s2).unwrap();
        assert!(f1.contains(&l1));
        assert!(f2.contains(&l2));
        assert_eq!(agreements(&l1, &l2).unwrap(), 0);
    }

    #[test]
    fn even_path_elimination_range_endpoints() {
        let f1 = full_family(6, &[(1, 1)], &[]);
        let f2 = full_family(6, &[(1, 2)], &[]);
        let q = quadruple_of(&f1, &f2).unwrap();
        let cls = classify_edges(&q).unwrap();
        assert_eq!(cls.paths.len(), 1);
        assert_eq!(cls.paths[0].ends, PathEnds::BothRange);
        let eta = rational(1, 2);
        let out = eliminate_even_path(&f1, &f2, 1, 2, &eta, &cls.paths[0]).unwrap();
        assert!(out.step.interchanged);
        assert_eq!(out.family1.n(), 5);
        assert_eq!(out.family1.measure().unwrap(), f1.measure().unwrap());
        assert_eq!(out.family2.measure().unwrap(), f2.measure().unwrap());

        let s1 = Permutation::from_one_indexed(&[1, 2, 3, 4, 5]).unwrap();
        let s2 = Permutation::from_one_indexed(&[2, 3, 4, 5, 1]).unwrap();
        let (l1, l2) = out.step.lift_pair(&s1, &s2).unwrap();
        assert!(f1.contains(&l1));
        assert!(f2.contains(&l2));
        assert_eq!(agreements(&l1, &l2).unwrap(), 0);
    }

    #[test]
    fn odd_path_rejected_by_even_path_eliminator() {
        let f1 = full_family(6, &[(1, 1), (2, 2)], &[]);
        let f2 = full_family(6, &[(2, 1)], &[]);
        let q = quadruple_of(&f1, &f2).unwrap();
        let cls = classify_edges(&q).unwrap();
        assert_eq!(cls.paths.len(), 1);
        assert_eq!(cls.paths[0].ends, PathEnds::Mixed);
        let err =
            eliminate_even_path(&f1, &f2, 1, 2, &rational(1, 2), &cls.paths[0]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn single_short_odd_path_becomes_shared_edge() {
        // One stranded agreement edge of family 1, no deletions needed.
        let f1 = full_family(6, &[(1, 1)], &[]);
        let class2 = RestrictionClass::full(6);
        let f2 = PermFamily::full(class2).unwrap();
        let out = eliminate_odd_paths(&f1, &f2, 1, 2, &rational(1, 2), GatePolicy::Waive)
            .unwrap();
        assert_eq!(out.family1.n(), 6);
        assert_eq!(out.quadruple.n2, pb(&[(1, 1)]));
        let cls = classify_edges(&out.quadruple).unwrap();
        assert_eq!(cls.type1.len(), 1);
        assert!(cls.paths.is_empty());
        // Exactly the permutations hitting the new forbidden pair are lost.
        assert_eq!(
            out.family2.measure().unwrap(),
            BigRational::from_integer(BigInt::from(1))
        );
        assert!(!out.gates.iter().all(|g| g.satisfied));
    }

    #[test]
    fn length_three_odd_path_is_eliminated_with_deletion() {
        let f1 = full_family(6, &[(1, 1), (2, 2)], &[]);
        let f2 = full_family(6, &[(2, 1)], &[]);
        let out = eliminate_odd_paths(&f1, &f2, 1, 2, &rational(1, 2), GatePolicy::Waive)
            .unwrap();
        assert_eq!(out.family1.n(), 5);
        assert_eq!(out.quadruple.m1, pb(&[(1, 1)]));
        assert!(out.quadruple.m2.is_empty());
        assert_eq!(out.quadruple.n2, pb(&[(1, 1)]));
        let cls = classify_edges(&out.quadruple).unwrap();
        assert_eq!(cls.type1.len(), 1);
        assert!(cls.paths.is_empty() && cls.cycles.is_empty());

        // Lift a disagreeing pair; the surviving shared edge forces both
        // lifted permutations through the old path's last edge.
        let s1 = Permutation::from_one_indexed(&[1, 3, 2, 5, 4]).unwrap();
        let s2 = Permutation::from_one_indexed(&[2, 1, 4, 3, 5]).unwrap();
        assert!(out.family1.contains(&s1));
        assert!(out.family2.contains(&s2));
        assert_eq!(agreements(&s1, &s2).unwrap(), 0);
        let (l1, l2) = out.step.lift_pair(&s1, &s2).unwrap();
        assert!(f1.contains(&l1));
        assert!(f2.contains(&l2));
        assert_eq!(agreements(&l1, &l2).unwrap(), 0);
    }

    #[test]
    fn odd_path_batch_without_odd_paths_is_identity() {
        let f1 = full_family(6, &[(1, 1)], &[]);
        let f2 = full_family(6, &[(2, 1)], &[]);
        let out = eliminate_odd_paths(&f1, &f2, 1, 2, &rational(1, 2), GatePolicy::Waive)
            .unwrap();
        assert_eq!(out.family1, f1);
        assert_eq!(out.family2, f2);
        assert!(out.step.deleted.is_empty());
    }

    #[test]
    fn odd_path_size_gate_is_enforced() {
        let f1 = full_family(6, &[(1, 1)], &[]);
        let f2 = PermFamily::full(RestrictionClass::full(6)).unwrap();
        let err = eliminate_odd_paths(&f1, &f2, 1, 2, &rational(1, 2), GatePolicy::Enforce)
            .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn fixing_operator_single_transposition() {
        let sigma = Permutation::from_one_indexed(&[2, 1, 3]).unwrap();
        let out =
            fixing_operator(&PartialBijection::empty(), &pb(&[(1, 1)]), &sigma).unwrap();
        assert_eq!(out, Permutation::identity(3));
    }

    #[test]
    fn fixing_operator_with_empty_second_constraint_is_identity_map() {
        let sigma = Permutation::from_one_indexed(&[3, 1, 2]).unwrap();
        let out = fixing_operator(&pb(&[(2, 1)]), &PartialBijection::empty(), &sigma)
            .unwrap();
        assert_eq!(out, sigma);
    }

    #[test]
    fn fixing_operator_rejects_out_of_class_input() {
        let sigma = Permutation::identity(3);
        let err = fixing_operator(&PartialBijection::empty(), &pb(&[(1, 1)]), &sigma)
            .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn fixing_steps_commute() {
        let pi2 = pb(&[(1, 1), (2, 2)]);
        let class = RestrictionClass::new(5, vec![], vec![pi2.clone()]).unwrap();
        for sigma in class.members().unwrap() {
            let forward = fixing_operator(&PartialBijection::empty(), &pi2, &sigma).unwrap();
            // Apply the two transpositions in the opposite order by hand.
            let mut tau = sigma.clone();
            for (i, j) in pi2.pairs().collect::<Vec<_>>().into_iter().rev() {
                let s = tau.image(i);
                if s != j {
                    tau = transposition(5, j, s).unwrap().compose(&tau).unwrap();
                }
            }
            assert_eq!(forward, tau);
        }
    }

    #[test]
    fn fixing_operator_has_constant_fibers_small_n() {
        for n in 3..=5 {
            let pi1 = if n == 5 { pb(&[(5, 5)]) } else { PartialBijection::empty() };
            let pi2 = pb(&[(1, 2)]);
            let source = RestrictionClass::new(n, vec![pi1.clone()], vec![pi2.clone()])
                .unwrap();
            let mut fibers: BTreeMap<Permutation, usize> = BTreeMap::new();
            for sigma in source.members().unwrap() {
                let tau = fixing_operator(&pi1, &pi2, &sigma).unwrap();
                *fibers.entry(tau).or_insert(0) += 1;
            }
            let target =
                RestrictionClass::new(n, vec![pi1, pi2], vec![]).unwrap();
            assert_eq!(fibers.len(), target.members().unwrap().len());
            let sizes: BTreeSet<usize> = fibers.values().copied().collect();
            assert_eq!(sizes.len(), 1);
        }
    }

    #[test]
    fn quotient_of_singleton_family() {
        let class =
            RestrictionClass::new(3, vec![], vec![pb(&[(1, 1)])]).unwrap();
        let member = Permutation::from_one_indexed(&[2, 1, 3]).unwrap();
        let f = PermFamily::new(class, [member].into()).unwrap();
        let ft = quotient_fraction(&f).unwrap();
        assert_eq!(ft.value(&Permutation::identity(3)), rational(1, 2));
        assert_eq!(
            ft.value(&Permutation::from_one_indexed(&[1, 3, 2]).unwrap()),
            BigRational::zero()
        );
        assert_eq!(ft.expectation().unwrap(), rational(1, 4));
    }

    #[test]
    fn quotient_of_full_and_empty_families() {
        let class =
            RestrictionClass::new(4, vec![pb(&[(4, 4)])], vec![pb(&[(1, 1)])]).unwrap();
        let full = PermFamily::full(class.clone()).unwrap();
        let ft = quotient_fraction(&full).unwrap();
        for (_, v) in ft.support() {
            assert_eq!(v, &BigRational::one());
        }
        assert_eq!(ft.expectation().unwrap(), BigRational::one());
        let empty = PermFamily::empty(class);
        let gt = quotient_fraction(&empty).unwrap();
        assert_eq!(gt.support_size(), 0);
    }

    #[test]
    fn cross_intersection_transfer_on_a_common_star() {
        let n = 5;
        let pi1 = pb(&[(1, 1)]);
        let pi2 = pb(&[(2, 2)]);
        let fc = RestrictionClass::new(n, vec![pi1.clone()], vec![pi2.clone()]).unwrap();
        let gc = RestrictionClass::new(n, vec![pi2], vec![pi1]).unwrap();
        let star = |p: &Permutation| p.image(2) == 2; // sigma(3) = 3
        let f =
            PermFamily::from_members(fc.clone(), fc.members().unwrap().into_iter().filter(star))
                .unwrap();
        let g =
            PermFamily::from_members(gc.clone(), gc.members().unwrap().into_iter().filter(star))
                .unwrap();
        assert!(!f.is_empty() && !g.is_empty());
        let alpha = Threshold::Rational(rational(5, 1));
        assert!(cross_intersection_transfer_check(&f, &g, 1, &alpha).unwrap());
    }

    #[test]
    fn non_cross_intersecting_pair_fails_the_hypothesis_gate() {
        let n = 5;
        let pi1 = pb(&[(1, 1)]);
        let pi2 = pb(&[(2, 2)]);
        let fc = RestrictionClass::new(n, vec![pi1.clone()], vec![pi2.clone()]).unwrap();
        let gc = RestrictionClass::new(n, vec![pi2], vec![pi1]).unwrap();
        let f = PermFamily::full(fc).unwrap();
        let g = PermFamily::full(gc).unwrap();
        let err = cross_intersection_transfer_check(
            &f,
            &g,
            1,
            &Threshold::Rational(rational(5, 1)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn exclusive_pairs_filters_shared_points() {
        let a = pb(&[(1, 1), (2, 2), (3, 4)]);
        let b = pb(&[(2, 5), (6, 4)]);
        assert_eq!(exclusive_pairs(&a, &b), pb(&[(1, 1)]));
    }
}
