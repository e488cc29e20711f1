//! Partitions, tableaux counting, Kostka numbers, permutation and
//! irreducible characters of S_n, derangement numbers, and the normalized
//! eigenvalues of agreement Cayley graphs.
//!
//! Irreducible characters are computed through the determinantal expansion
//! into permutation characters; a rim-hook recursion is kept alongside as an
//! independent cross-check. Characters are stored per cycle type only.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::perm::{all_permutations, factorial, Permutation};

pub const TABLEAUX_LIMIT: usize = 12;

/// A partition of n: weakly decreasing positive parts. Ordering is the
/// lexicographic order on part sequences (missing parts compare as 0).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "{parts:?} is not a weakly decreasing sequence of positive parts"
            )));
        }
        Ok(Partition { parts })
    }

    /// Builds from an unsorted multiset of positive parts.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        if parts.is_empty() {
            return Err(Error::InvalidInput("empty partition".into()));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn first_part(&self) -> usize {
        self.parts[0]
    }

    pub fn part(&self, i: usize) -> usize {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn transpose(&self) -> Partition {
        let cols = self.parts[0];
        let parts = (0..cols)
            .map(|c| self.parts.iter().filter(|&&p| p > c).count())
            .collect();
        Partition { parts }
    }

    pub fn hook_lengths(&self) -> Vec<usize> {
        let t = self.transpose();
        let mut hooks = Vec::new();
        for (i, &row) in self.parts.iter().enumerate() {
            for j in 0..row {
                hooks.push(row - j + t.parts[j] - i - 1);
            }
        }
        hooks
    }

    /// Rendered as "3+2+2", the form used in CSV output.
    pub fn render(&self) -> String {
        self.parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn parse(s: &str) -> Result<Partition> {
        let parts: std::result::Result<Vec<usize>, _> =
            s.split('+').map(|t| t.trim().parse::<usize>()).collect();
        match parts {
            Ok(p) => Partition::new(p),
            Err(_) => Err(Error::InvalidInput(format!("cannot parse partition {s:?}"))),
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.parts
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// All partitions of n in descending lexicographic order: (n) first,
/// (1,1,…,1) last.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                parts: current.clone(),
            });
            return;
        }
        for p in (1..=max.min(remaining)).rev() {
            current.push(p);
            rec(remaining - p, p, current, out);
            current.pop();
        }
    }
    rec(n, n, &mut current, &mut out);
    out
}

/// L_n(s): largest part exactly s.
pub fn l_eq(n: usize, s: usize) -> Vec<Partition> {
    partitions_of(n)
        .into_iter()
        .filter(|p| p.first_part() == s)
        .collect()
}

/// L_n(≥s): largest part at least s.
pub fn l_ge(n: usize, s: usize) -> Vec<Partition> {
    partitions_of(n)
        .into_iter()
        .filter(|p| p.first_part() >= s)
        .collect()
}

/// L_n(<s): largest part less than s.
pub fn l_lt(n: usize, s: usize) -> Vec<Partition> {
    partitions_of(n)
        .into_iter()
        .filter(|p| p.first_part() < s)
        .collect()
}

/// L*_n(≥s): largest part at least s, excluding the trivial partition (n).
pub fn l_star_ge(n: usize, s: usize) -> Vec<Partition> {
    l_ge(n, s)
        .into_iter()
        .filter(|p| p.len() > 1)
        .collect()
}

/// f^λ by the hook formula.
pub fn dimension_hook(lambda: &Partition) -> BigUint {
    let hooks: BigUint = lambda
        .hook_lengths()
        .iter()
        .map(|&h| BigUint::from(h))
        .product();
    factorial(lambda.n()) / hooks
}

/// Number of standard λ-tableaux by backtracking; the independent oracle
/// for dimension_hook.
pub fn count_standard_tableaux(lambda: &Partition) -> Result<BigUint> {
    let n = lambda.n();
    if n > TABLEAUX_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "standard-tableaux backtracking capped at n <= {TABLEAUX_LIMIT}, got n = {n}"
        )));
    }
    // Fill 1..n in increasing order; each value extends some row whose length
    // is below both the shape bound and the row above.
    fn rec(shape: &[usize], fill: &mut Vec<usize>, placed: usize, n: usize) -> u64 {
        if placed == n {
            return 1;
        }
        let mut total = 0;
        for r in 0..shape.len() {
            if fill[r] < shape[r] && (r == 0 || fill[r] < fill[r - 1]) {
                fill[r] += 1;
                total += rec(shape, fill, placed + 1, n);
                fill[r] -= 1;
            }
        }
        total
    }
    let mut fill = vec![0usize; lambda.len()];
    Ok(BigUint::from(rec(lambda.parts(), &mut fill, 0, n)))
}

/// Kostka number K_{λ,μ}: semistandard λ-tableaux of content μ, counted by
/// backtracking over row fillings.
pub fn kostka(lambda: &Partition, mu: &Partition) -> Result<BigUint> {
    if lambda.n() != mu.n() {
        return Err(Error::SizeMismatch {
            left: lambda.n(),
            right: mu.n(),
        });
    }
    if mu > lambda {
        return Ok(BigUint::zero());
    }
    // Place values 1..k row by row; rows weakly increase so each row is
    // determined by how many copies of each value it holds; columns strictly
    // increase, which is checked against the previous row's prefix counts.
    let shape = lambda.parts().to_vec();
    let content = mu.parts().to_vec();
    let k = content.len();

    // rows[r][v] = multiplicity of value v in row r.
    fn check_columns(shape: &[usize], rows: &[Vec<usize>], r: usize) -> bool {
        if r == 0 {
            return true;
        }
        // Column c of row r holds the value at position c; strict increase
        // means: for every prefix length p, the number of entries in row r
        // with value <= v placed in the first p columns must not exceed the
        // entries of row r-1 with value <= v-1 in those columns. Equivalent
        // cumulative check: for each value v, (# of <= v in row r) placed at
        // column c requires row r-1 column c entry <= v-1, i.e.
        // cum_{r}(v) <= cum_{r-1}(v-1) for all v, where cum counts entries
        // with value <= v.
        let _ = shape;
        let k = rows[r].len();
        let mut cum_prev = 0usize;
        let mut cum_here = 0usize;
        for v in 0..k {
            cum_here += rows[r][v];
            if cum_here > if v == 0 { 0 } else { cum_prev } {
                return false;
            }
            cum_prev += rows[r - 1][v];
        }
        true
    }

    fn rec(
        shape: &[usize],
        content: &[usize],
        remaining: &mut Vec<usize>,
        rows: &mut Vec<Vec<usize>>,
        r: usize,
        count: &mut u64,
    ) {
        if r == shape.len() {
            *count += 1;
            return;
        }
        // Choose multiplicities for row r: values >= r only (column strict),
        // summing to shape[r].
        fn choose(
            shape: &[usize],
            content: &[usize],
            remaining: &mut Vec<usize>,
            rows: &mut Vec<Vec<usize>>,
            r: usize,
            v: usize,
            left: usize,
            count: &mut u64,
        ) {
            let k = content.len();
            if v == k {
                if left == 0 && check_columns(shape, rows, r) {
                    rec(shape, content, remaining, rows, r + 1, count);
                }
                return;
            }
            let max = remaining[v].min(left);
            for m in 0..=max {
                if v < r && m > 0 {
                    break; // value v+1 cannot appear below row v+1
                }
                rows[r][v] = m;
                remaining[v] -= m;
                choose(shape, content, remaining, rows, r, v + 1, left - m, count);
                remaining[v] += m;
                rows[r][v] = 0;
            }
        }
        choose(shape, content, remaining, rows, r, 0, shape[r], count);
    }

    let mut remaining = content.clone();
    let mut rows = vec![vec![0usize; k]; shape.len()];
    let mut count = 0u64;
    rec(&shape, &content, &mut remaining, &mut rows, 0, &mut count);
    Ok(BigUint::from(count))
}

/// A conjugacy class of S_n, recorded by its cycle-length partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycleType(pub Partition);

impl CycleType {
    pub fn of(sigma: &Permutation) -> CycleType {
        CycleType(Partition::from_unsorted(sigma.cycle_lengths()).expect("nonempty"))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn num_fixed_points(&self) -> usize {
        self.0.parts().iter().filter(|&&p| p == 1).count()
    }

    /// |class| = n! / ∏_ℓ ℓ^{m_ℓ} m_ℓ!.
    pub fn class_size(&self) -> BigUint {
        let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in self.0.parts() {
            *mult.entry(p).or_insert(0) += 1;
        }
        let mut denom = BigUint::one();
        for (l, m) in mult {
            denom *= BigUint::from(l).pow(m as u32) * factorial(m);
        }
        factorial(self.n()) / denom
    }

    pub fn sign(&self) -> i64 {
        let transpositions: usize = self.0.parts().iter().map(|p| p - 1).sum();
        if transpositions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// A canonical representative permutation with this cycle structure.
    pub fn representative(&self) -> Permutation {
        let mut images = Vec::with_capacity(self.n());
        let mut start = 0usize;
        for &len in self.0.parts() {
            for i in 0..len {
                images.push((start + (i + 1) % len) as u8);
            }
            start += len;
        }
        Permutation::from_images(images.into_iter().map(|v| v as u8).collect()).unwrap()
    }
}

/// ξ_β(σ): the number of β-tabloids fixed by σ, i.e. the number of ways to
/// distribute the cycles of σ over the rows with prescribed row sums.
pub fn permutation_character(beta: &Partition, c: &CycleType) -> Result<BigUint> {
    if beta.n() != c.n() {
        return Err(Error::SizeMismatch {
            left: beta.n(),
            right: c.n(),
        });
    }
    let cycles = c.0.parts().to_vec();
    let caps: Vec<usize> = beta.parts().to_vec();
    let mut memo: HashMap<(usize, Vec<usize>), BigUint> = HashMap::new();
    fn dp(
        cycles: &[usize],
        idx: usize,
        caps: &mut Vec<usize>,
        memo: &mut HashMap<(usize, Vec<usize>), BigUint>,
    ) -> BigUint {
        if idx == cycles.len() {
            return BigUint::one();
        }
        let key = (idx, caps.clone());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        let len = cycles[idx];
        for r in 0..caps.len() {
            if caps[r] >= len {
                caps[r] -= len;
                total += dp(cycles, idx + 1, caps, memo);
                caps[r] += len;
            }
        }
        memo.insert(key, total.clone());
        total
    }
    let mut caps = caps;
    Ok(dp(&cycles, 0, &mut caps, &mut memo))
}

/// Brute-force tabloid-fixing count (test oracle): enumerates all ordered
/// set partitions of [n] with block sizes β and counts those σ fixes.
pub fn permutation_character_bruteforce(beta: &Partition, sigma: &Permutation) -> Result<BigUint> {
    let n = beta.n();
    if n != sigma.n() {
        return Err(Error::SizeMismatch {
            left: n,
            right: sigma.n(),
        });
    }
    if n > 9 {
        return Err(Error::ResourceLimit("tabloid brute force capped at n <= 9".into()));
    }
    let shape = beta.parts().to_vec();
    let mut assignment = vec![usize::MAX; n];
    let mut counts = vec![0usize; shape.len()];
    fn rec(
        shape: &[usize],
        sigma: &Permutation,
        assignment: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        x: usize,
        total: &mut u64,
    ) {
        let n = assignment.len();
        if x == n {
            // Fixed tabloid: each row maps into itself.
            if (0..n).all(|i| assignment[sigma.image(i)] == assignment[i]) {
                *total += 1;
            }
            return;
        }
        for r in 0..shape.len() {
            if counts[r] < shape[r] {
                assignment[x] = r;
                counts[r] += 1;
                rec(shape, sigma, assignment, counts, x + 1, total);
                counts[r] -= 1;
                assignment[x] = usize::MAX;
            }
        }
    }
    let mut total = 0u64;
    rec(&shape, sigma, &mut assignment, &mut counts, 0, &mut total);
    Ok(BigUint::from(total))
}

/// An irreducible character, stored per cycle type, together with its signed
/// determinantal expansion χ_α = Σ_β c_β ξ_β.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterVector {
    pub alpha: Partition,
    pub values: BTreeMap<Partition, BigInt>,
    pub det_coeffs: BTreeMap<Partition, BigInt>,
}

impl CharacterVector {
    pub fn value(&self, c: &CycleType) -> &BigInt {
        &self.values[&c.0]
    }

    pub fn dimension(&self) -> BigUint {
        let id = Partition::new(vec![1; self.alpha.n()]).unwrap();
        self.values[&id].to_biguint().expect("dimension positive")
    }

    /// Σ_β |c_β| over the determinantal expansion.
    pub fn coeff_abs_sum(&self) -> BigUint {
        self.det_coeffs
            .values()
            .map(|c| c.abs().to_biguint().unwrap())
            .sum()
    }
}

const DETERMINANTAL_FULL_LIMIT: usize = 8;

/// The signed multiset of permutation characters in the determinantal
/// expansion of χ_α. `perms` enumerates the index permutations π; the
/// sequence α_i − i + π(i) is reordered with zeros deleted, and any negative
/// entry kills the term.
fn determinantal_coeffs(alpha: &Partition, perms: &[Permutation]) -> BTreeMap<Partition, BigInt> {
    let n = alpha.n();
    let mut coeffs: BTreeMap<Partition, BigInt> = BTreeMap::new();
    'outer: for pi in perms {
        let mut entries = Vec::with_capacity(n);
        for i in 0..n {
            let a = alpha.part(i) as i64 - (i as i64 + 1) + (pi.image(i) as i64 + 1);
            if a < 0 {
                continue 'outer;
            }
            entries.push(a as usize);
        }
        let beta = match Partition::from_unsorted(entries) {
            Ok(b) => b,
            Err(_) => continue,
        };
        debug_assert_eq!(beta.n(), n);
        let sign = BigInt::from(pi.sign());
        *coeffs.entry(beta).or_insert_with(BigInt::zero) += sign;
    }
    coeffs.retain(|_, c| !c.is_zero());
    coeffs
}

/// χ_α per cycle type via the determinantal formula. For n ≤ 8 the index
/// permutation ranges over all of S_n; for larger n the truncated sum is
/// available when α₁ ≥ n − r with small r (only permutations fixing
/// [n] \ [r+1] pointwise contribute).
pub fn irreducible_character(alpha: &Partition) -> Result<CharacterVector> {
    let n = alpha.n();
    let coeffs = if n <= DETERMINANTAL_FULL_LIMIT {
        determinantal_coeffs(alpha, &all_permutations(n)?)
    } else {
        let r = n - alpha.first_part();
        if r + 1 > DETERMINANTAL_FULL_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "determinantal formula needs n <= {DETERMINANTAL_FULL_LIMIT} or a first part >= n - {}",
                DETERMINANTAL_FULL_LIMIT - 1
            )));
        }
        // Embed S_{r+1} acting on the first r+1 indices into S_n.
        let small = all_permutations(r + 1)?;
        let embedded: Vec<Permutation> = small
            .iter()
            .map(|p| {
                let mut images: Vec<u8> = (0..n as u8).collect();
                for i in 0..(r + 1) {
                    images[i] = p.image(i) as u8;
                }
                Permutation::from_images(images).unwrap()
            })
            .collect();
        determinantal_coeffs(alpha, &embedded)
    };
    let mut values = BTreeMap::new();
    for p in partitions_of(n) {
        let c = CycleType(p.clone());
        let mut v = BigInt::zero();
        for (beta, coeff) in &coeffs {
            if !coeff.is_zero() {
                v += coeff * BigInt::from(permutation_character(beta, &c)?);
            }
        }
        values.insert(p, v);
    }
    Ok(CharacterVector {
        alpha: alpha.clone(),
        values,
        det_coeffs: coeffs,
    })
}

/// χ_α(cycle type) by the rim-hook recursion; the independent cross-check
/// for the determinantal path.
pub fn rim_hook_character(alpha: &Partition, c: &CycleType) -> Result<BigInt> {
    if alpha.n() != c.n() {
        return Err(Error::SizeMismatch {
            left: alpha.n(),
            right: c.n(),
        });
    }
    // Beta-set recursion: betas = {λ_i + (l - i)}; removing a rim hook of
    // length r moves one beta down by r if the target is free; the sign is
    // (-1)^{number of betas passed over}.
    fn rec(betas: &mut Vec<usize>, cycles: &[usize], memo: &mut HashMap<(Vec<usize>, usize), BigInt>) -> BigInt {
        if cycles.is_empty() {
            return BigInt::one();
        }
        let key = (betas.clone(), cycles.len());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let r = cycles[0];
        let rest = &cycles[1..];
        let mut total = BigInt::zero();
        for i in 0..betas.len() {
            let b = betas[i];
            if b >= r && !betas.contains(&(b - r)) {
                let passed = betas.iter().filter(|&&x| x < b && x > b - r).count();
                let mut next = betas.clone();
                next[i] = b - r;
                next.sort_unstable();
                let sub = rec(&mut next, rest, memo);
                if passed % 2 == 0 {
                    total += sub;
                } else {
                    total -= sub;
                }
            }
        }
        memo.insert(key, total.clone());
        total
    }
    let l = alpha.len();
    let mut betas: Vec<usize> = (0..l).map(|i| alpha.part(i) + (l - 1 - i)).collect();
    betas.sort_unstable();
    // Largest cycles first keeps the recursion shallow.
    let cycles = c.0.parts().to_vec();
    let mut memo = HashMap::new();
    Ok(rec(&mut betas, &cycles, &mut memo))
}

/// d_m = Σ_{j=0}^m (−1)^j m!/j!, with d_0 = 1.
pub fn derangement_count(m: usize) -> BigUint {
    let mut d = BigInt::one();
    for k in 1..=m {
        d = d * BigInt::from(k) + if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    }
    d.to_biguint().expect("derangement count nonnegative")
}

/// Σ_{σ ∈ D_m} sgn(σ) = (−1)^{m−1} (m−1).
pub fn signed_derangement_sum(m: usize) -> BigInt {
    if m == 0 {
        return BigInt::one(); // empty product convention, matches enumeration
    }
    let v = BigInt::from(m as i64 - 1);
    if m % 2 == 1 {
        v
    } else {
        -v
    }
}

/// The character table of S_n, cached per n.
#[derive(Debug)]
pub struct CharacterTable {
    pub n: usize,
    pub partitions: Vec<Partition>,
    chars: BTreeMap<Partition, CharacterVector>,
}

impl CharacterTable {
    pub fn build(n: usize) -> Result<CharacterTable> {
        let partitions = partitions_of(n);
        let mut chars = BTreeMap::new();
        for p in &partitions {
            chars.insert(p.clone(), irreducible_character(p)?);
        }
        Ok(CharacterTable {
            n,
            partitions,
            chars,
        })
    }

    pub fn for_n(n: usize) -> Result<Arc<CharacterTable>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CharacterTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        if let Some(t) = guard.get(&n) {
            return Ok(t.clone());
        }
        let t = Arc::new(CharacterTable::build(n)?);
        guard.insert(n, t.clone());
        Ok(t)
    }

    pub fn character(&self, alpha: &Partition) -> &CharacterVector {
        &self.chars[alpha]
    }

    pub fn value(&self, alpha: &Partition, c: &CycleType) -> &BigInt {
        self.chars[alpha].value(c)
    }
}

/// Normalized eigenvalue of Cay(S_n, D_n) at α:
/// λ_α = (1/(f^α d_n)) Σ_{σ ∈ D_n} χ_α(σ).
pub fn derangement_eigenvalue(alpha: &Partition) -> Result<BigRational> {
    cayley_eigenvalue(alpha, 0)
}

/// Normalized eigenvalue of the Cayley graph generated by all permutations
/// with exactly `a` fixed points.
pub fn cayley_eigenvalue(alpha: &Partition, a: usize) -> Result<BigRational> {
    let n = alpha.n();
    let table = CharacterTable::for_n(n)?;
    let degree = generator_count(n, a);
    if degree.is_zero() {
        return Err(Error::DegenerateInput(format!(
            "no permutation of [{n}] has exactly {a} fixed points; graph is edgeless"
        )));
    }
    let mut sum = BigInt::zero();
    for p in partitions_of(n) {
        let c = CycleType(p);
        if c.num_fixed_points() != a {
            continue;
        }
        sum += BigInt::from(c.class_size()) * table.value(alpha, &c);
    }
    let f = BigInt::from(dimension_hook(alpha));
    Ok(BigRational::new(sum, f * BigInt::from(degree)))
}

/// Number of permutations of [n] with exactly a fixed points: C(n,a)·d_{n−a}.
pub fn generator_count(n: usize, a: usize) -> BigUint {
    if a > n {
        return BigUint::zero();
    }
    binomial(n, a) * derangement_count(n - a)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[derive(Debug, Clone)]
pub struct EigenvalueBoundRow {
    pub partition: Partition,
    pub dimension: BigUint,
    pub lambda: BigRational,
    pub bound_ok: bool,
}

#[derive(Debug, Clone)]
pub struct EigenvalueBoundReport {
    pub n: usize,
    pub r: usize,
    pub rows: Vec<EigenvalueBoundRow>,
    /// max |λ_α| over L(< n−r).
    pub max_abs_low: Option<BigRational>,
    /// max |λ_α| over L*(≥ n−r).
    pub max_abs_high_star: Option<BigRational>,
    pub all_bounds_hold: bool,
}

/// Checks |λ_α| ≤ (1/f^α)√(n!/d_n) for every α ⊢ n (exactly, by squaring)
/// and reports the two block maxima used in the spectral-gap estimates.
pub fn eigenvalue_bound_check(n: usize, r: usize) -> Result<EigenvalueBoundReport> {
    if n > 9 {
        return Err(Error::ResourceLimit("eigenvalue bound check capped at n <= 9".into()));
    }
    if n < 2 {
        return Err(Error::DegenerateInput("need n >= 2 for the derangement graph".into()));
    }
    let rhs = BigRational::new(
        BigInt::from(factorial(n)),
        BigInt::from(derangement_count(n)),
    );
    let mut rows = Vec::new();
    let mut max_low: Option<BigRational> = None;
    let mut max_high: Option<BigRational> = None;
    let mut all_ok = true;
    for p in partitions_of(n) {
        let lambda = derangement_eigenvalue(&p)?;
        let f = dimension_hook(&p);
        // |λ| ≤ (1/f)√(n!/d_n)  ⟺  (λ f)² ≤ n!/d_n.
        let lf = &lambda * BigRational::from_integer(BigInt::from(f.clone()));
        let ok = &lf * &lf <= rhs;
        all_ok &= ok;
        let abs = lambda.abs();
        if p.first_part() < n - r {
            if max_low.as_ref().map_or(true, |m| &abs > m) {
                max_low = Some(abs.clone());
            }
        } else if p.len() > 1 {
            if max_high.as_ref().map_or(true, |m| &abs > m) {
                max_high = Some(abs.clone());
            }
        }
        rows.push(EigenvalueBoundRow {
            partition: p,
            dimension: f,
            lambda,
            bound_ok: ok,
        });
    }
    Ok(EigenvalueBoundReport {
        n,
        r,
        rows,
        max_abs_low: max_low,
        max_abs_high_star: max_high,
        all_bounds_hold: all_ok,
    })
}
