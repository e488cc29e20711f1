//! Weak regularity for permutation families: every family splits into a
//! bounded-complexity junta of uncaptureable slices plus a small remainder,
//! constructed by a capture-and-branch tree.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::perm::{factorial, PartialBijection, PermFamily, Junta};
use crate::pseudorandom::check_captureable;

/// Enumeration budget for the decomposition (the tree re-counts restriction
/// classes at every node).
pub const DECOMPOSE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Captureable node; branches on the points of its capturing bijection
    /// (childless when the capturing bijection is empty).
    Internal,
    /// Uncaptureable node: its label joins the junta.
    Good,
    /// Depth-r node, abandoned to the remainder bound.
    Bad,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub label: PartialBijection,
    pub kind: NodeKind,
    /// The capturing bijection, present exactly on internal nodes.
    pub capture: Option<PartialBijection>,
    pub children: Vec<usize>,
}

/// The labelled rooted tree produced by the capture-and-branch construction.
/// Node 0 is the root, labelled by the empty bijection; each child extends
/// its parent's label by one pair of the parent's capturing bijection.
#[derive(Debug, Clone)]
pub struct DecompositionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecompositionTree {
    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.kind != NodeKind::Internal)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Indented text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(0, 0, &mut out);
        out
    }

    fn render_node(&self, idx: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[idx];
        let tag = match node.kind {
            NodeKind::Internal => "internal",
            NodeKind::Good => "good",
            NodeKind::Bad => "bad",
        };
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{} [{tag}]", node.label));
        if let Some(c) = &node.capture {
            out.push_str(&format!(" capture {c}"));
        }
        out.push('\n');
        for &ch in &node.children {
            self.render_node(ch, depth + 1, out);
        }
    }
}

/// A family split into a junta of uncaptureable slices plus a remainder.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub junta: Junta,
    /// Good-leaf label -> the slice it captures, a family over the label's
    /// restriction class.
    pub slices: BTreeMap<PartialBijection, PermFamily>,
    /// Members of the original family outside the junta, over the full S_n.
    pub remainder: PermFamily,
    pub tree: DecompositionTree,
}

/// Capture-and-branch decomposition. At each node labelled by a partial
/// bijection sigma, the restricted family F(sigma) is tested for capture at
/// level (s, n^-r). Uncaptureable nodes become good leaves; captureable
/// nodes branch one child per point of the (lexicographically least,
/// minimum-size) capturing bijection; depth-r nodes are bad. The junta is
/// generated by the good-leaf labels.
pub fn decompose(f: &PermFamily, r: usize, s: usize) -> Result<Decomposition> {
    let n = f.n();
    if n > DECOMPOSE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "decomposition supports n <= {DECOMPOSE_LIMIT}, got n = {n}"
        )));
    }
    if r == 0 || s == 0 {
        return Err(Error::InvalidInput("need r >= 1 and s >= 1".into()));
    }
    if !f.ambient().agree_constraints().is_empty()
        || !f.ambient().disagree_constraints().is_empty()
    {
        return Err(Error::InvalidInput(
            "decomposition expects a family over the unrestricted S_n".into(),
        ));
    }
    let eps = BigRational::new(BigInt::one(), BigInt::from(n).pow(r as u32));

    let mut nodes: Vec<TreeNode> = vec![TreeNode {
        label: PartialBijection::empty(),
        kind: NodeKind::Internal,
        capture: None,
        children: Vec::new(),
    }];
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut slices = BTreeMap::new();

    while let Some(idx) = queue.pop_front() {
        let label = nodes[idx].label.clone();
        if label.len() == r {
            nodes[idx].kind = NodeKind::Bad;
            continue;
        }
        let sub = if label.is_empty() {
            f.clone()
        } else {
            f.restrict(std::slice::from_ref(&label), &[])?
        };
        let rep = check_captureable(&sub, s, &eps)?;
        if !rep.verdict {
            nodes[idx].kind = NodeKind::Good;
            slices.insert(label, sub);
            continue;
        }
        let pi = rep.witness.expect("captureable verdicts carry a witness");
        for (x, y) in pi.pairs() {
            let child_label = label.union(&PartialBijection::from_pairs([(x, y)])?)?;
            let child = nodes.len();
            nodes.push(TreeNode {
                label: child_label,
                kind: NodeKind::Internal,
                capture: None,
                children: Vec::new(),
            });
            nodes[idx].children.push(child);
            queue.push_back(child);
        }
        nodes[idx].capture = Some(pi);
    }

    let junta = Junta::new(n, slices.keys().cloned().collect());
    let remainder = PermFamily::from_members(
        f.ambient().clone(),
        f.members().filter(|m| !junta.contains(m)).cloned(),
    )?;
    Ok(Decomposition {
        junta,
        slices,
        remainder,
        tree: DecompositionTree { nodes },
    })
}

/// Independent verification report for a decomposition.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    /// Every junta generator has domain size strictly below r.
    pub domain_bound_ok: bool,
    /// Every slice is (s, n^-r)-uncaptureable under a fresh capture search.
    pub slices_ok: bool,
    /// First failing slice, with the capturing bijection found.
    pub failing_slice: Option<(PartialBijection, PartialBijection)>,
    /// Tree shape: at most s children per node, depth (= label size) at
    /// most r, at most s^r leaves, child labels extend parent labels.
    pub tree_ok: bool,
    pub leaves: usize,
    pub bad_leaves: usize,
    pub internal_nodes: usize,
    /// max(#generators, ceil(mu(F \ J) * n^r)): the constant this instance
    /// witnesses for the complexity and remainder bounds together.
    pub c_attained: usize,
    /// mu(F \ J) * n^r.
    pub remainder_scaled: BigRational,
    /// mu(F \ J) <= #bad * (n-r)!/n! + #internal * n^-r.
    pub accounting_ok: bool,
    pub accounting_bound: BigRational,
    pub pass: bool,
}

/// Re-checks the decomposition from scratch: domain bounds, fresh capture
/// searches on every slice, tree shape, and the union-bound remainder
/// accounting. The original family is reconstructed as the union of the
/// slices and the remainder.
pub fn verify_decomposition(d: &Decomposition, r: usize, s: usize) -> Result<DecompositionReport> {
    let n = d.remainder.n();
    let eps = BigRational::new(BigInt::one(), BigInt::from(n).pow(r as u32));

    let domain_bound_ok = d.junta.generators().iter().all(|g| g.len() < r);

    let mut slices_ok = true;
    let mut failing_slice = None;
    for (label, slice) in &d.slices {
        let rep = check_captureable(slice, s, &eps)?;
        if rep.verdict {
            slices_ok = false;
            failing_slice = Some((label.clone(), rep.witness.unwrap()));
            break;
        }
    }

    let tree = &d.tree;
    let mut tree_ok = !tree.nodes.is_empty() && tree.nodes[0].label.is_empty();
    for (idx, node) in tree.nodes.iter().enumerate() {
        if node.children.len() > s || node.label.len() > r {
            tree_ok = false;
        }
        if (node.kind == NodeKind::Internal) != node.capture.is_some() {
            tree_ok = false;
        }
        for &ch in &node.children {
            let child = &tree.nodes[ch];
            if child.label.len() != node.label.len() + 1
                || child.label.intersection_size(&node.label) != node.label.len()
            {
                tree_ok = false;
            }
            if ch <= idx {
                tree_ok = false;
            }
        }
    }
    let leaves = tree.count(NodeKind::Good) + tree.count(NodeKind::Bad);
    if leaves > s.pow(r as u32) {
        tree_ok = false;
    }
    let bad_leaves = tree.count(NodeKind::Bad);
    let internal_nodes = tree.count(NodeKind::Internal);

    let remainder_measure = if d.remainder.is_empty() {
        BigRational::zero()
    } else {
        d.remainder.measure()?
    };
    let n_to_r = BigRational::from_integer(BigInt::from(n).pow(r as u32));
    let remainder_scaled = &remainder_measure * &n_to_r;
    let c_attained = d
        .junta
        .generators()
        .len()
        .max(remainder_scaled.ceil().to_integer().try_into().unwrap_or(usize::MAX));

    // Every remainder member either agrees with a bad-leaf label (measure
    // at most (n-r)!/n! per leaf) or disagrees everywhere with some
    // internal node's capturing bijection while agreeing with its label
    // (measure at most n^-r per node).
    let star_measure = BigRational::new(
        BigInt::from(factorial(n.saturating_sub(r))),
        BigInt::from(factorial(n)),
    );
    let accounting_bound = BigRational::from_integer(BigInt::from(bad_leaves)) * star_measure
        + BigRational::from_integer(BigInt::from(internal_nodes)) * n_to_r.recip();
    let accounting_ok = remainder_measure <= accounting_bound;

    let pass = domain_bound_ok && slices_ok && tree_ok && accounting_ok;
    Ok(DecompositionReport {
        domain_bound_ok,
        slices_ok,
        failing_slice,
        tree_ok,
        leaves,
        bad_leaves,
        internal_nodes,
        c_attained,
        remainder_scaled,
        accounting_ok,
        accounting_bound,
        pass,
    })
}

/// True iff every junta generator has domain size at least t and every pair
/// of generators agrees on at least t points, which makes the junta itself
/// t-intersecting as a set of permutations.
pub fn t_intersecting_junta_check(j: &Junta, t: usize) -> bool {
    let gens = j.generators();
    if gens.iter().any(|g| g.len() < t) {
        return false;
    }
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            if a.intersection_size(b) < t {
                return false;
            }
        }
    }
    true
}
