//! Canonical partitions of sets of small order, guided by the node's tangle.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::canonical::bounds::BoundTable;
use crate::canonical::context::NodeContext;
use crate::connfn::{kappa_min, ConnFn};
use crate::error::{Error, Result};
use crate::f2linalg::VertexSet;

/// Sub-families of this size or less are checked exhaustively for the union
/// bound in the disjoint case; larger families are checked on a prefix.
const UNION_CHECK_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SmallCase {
    /// `X` is small enough to be split into singletons.
    Singletons,
    /// Two members of the family cross inside `X`: the parts are the atoms.
    Atoms,
    /// The family is disjoint inside `X`: one part per member plus the rest.
    Disjoint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallPartition {
    pub case: SmallCase,
    /// Order of the separations used, when a family was computed.
    pub level: Option<usize>,
    pub parts: Vec<VertexSet>,
}

/// The complements `Y = A↓ ∖ Z` of the largest good separations `Z ⊂ X` of
/// least order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YFamily {
    pub level: usize,
    pub members: Vec<VertexSet>,
}

fn precheck(ctx: &NodeContext, x: VertexSet) -> Result<usize> {
    let f = ctx.down();
    if !x.is_subset(ctx.ground().without(ctx.c0())) {
        return Err(Error::Precondition(format!("{x} is not a set of non-c0 elements")));
    }
    let k1 = f.kappa(x);
    if k1 >= ctx.bounds().small_threshold() {
        return Err(Error::Precondition(format!("order {k1} of {x} is not small")));
    }
    Ok(k1)
}

/// All good separations of order `l` in the search space: rightmost minimum
/// `(Z0, X̄ ∪ {x})`-separations `Z` with `|Z0| <= l`, `x ∈ X ∖ Z0`, `Z`
/// good of order `l`, and `κ↓min(Z, X̄) = l`.
pub fn good_separations(ctx: &NodeContext, x: VertexSet, l: usize) -> Result<Vec<VertexSet>> {
    let f = ctx.down();
    let xbar = ctx.ground() - x;
    let k2 = ctx.k0() + f.kappa(x);
    if l > k2 {
        return Ok(Vec::new());
    }
    let elems = x.to_vec();
    let mut found = BTreeSet::new();
    for size in 0..=l.min(elems.len()) {
        for z0 in elems.iter().copied().combinations(size) {
            let z0: VertexSet = z0.into_iter().collect();
            for v in (x - z0).iter() {
                let z = kappa_min(f, z0, xbar.with(v))?.rightmost;
                if found.contains(&z) || !BoundTable::is_good(k2, l, z.len(), x.len()) {
                    continue;
                }
                if f.kappa(z) == l && kappa_min(f, z, xbar)?.order == l {
                    found.insert(z);
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// The family `𝒴` for `X`: the least order `l` admitting a good separation,
/// and the complements of the largest such separations.
pub fn compute_y_family(ctx: &NodeContext, x: VertexSet) -> Result<YFamily> {
    let k1 = precheck(ctx, x)?;
    let k2 = ctx.k0() + k1;
    if x.len() < 6 * k2 {
        return Err(Error::Precondition(format!("|X| = {} is below 6 k2 = {}", x.len(), 6 * k2)));
    }
    for l in 0..=k1 {
        let zs = good_separations(ctx, x, l)?;
        let Some(m) = zs.iter().map(|z| z.len()).max() else { continue };
        let zs: Vec<VertexSet> = zs.into_iter().filter(|z| z.len() == m).collect();
        check_small_overlaps(x, k2, l, &zs)?;
        let mut members: Vec<VertexSet> = zs.iter().map(|&z| ctx.ground() - z).collect();
        members.sort_by(|a, b| a.size_lex_cmp(b));
        return Ok(YFamily { level: l, members });
    }
    Err(Error::Invariant(format!("no good separation of {x} exists")))
}

/// Two distinct largest good separations that do not cover `X` overlap in
/// fewer than `p(l)^3 |X|` elements.
fn check_small_overlaps(x: VertexSet, k2: usize, l: usize, zs: &[VertexSet]) -> Result<()> {
    for (i, &a) in zs.iter().enumerate() {
        for &b in &zs[i + 1..] {
            // p(l)^3 = 2^(-3^(k2 + 1 - l))
            if (a | b) != x && BoundTable::at_least_p_fraction(k2 + 1, l, (a & b).len(), x.len()) {
                return Err(Error::Invariant(format!("separations {a} and {b} overlap too much")));
            }
        }
    }
    Ok(())
}

/// Canonical partition of a set `X ⊆ A↓ ∖ {c0}` of small order.
pub fn partition_small(ctx: &NodeContext, x: VertexSet) -> Result<SmallPartition> {
    if x.len() < 2 {
        return Err(Error::Precondition(format!("{x} has fewer than two elements")));
    }
    let k1 = precheck(ctx, x)?;
    let k = ctx.k();
    if x.len() < 6 * (k + k1) {
        let parts = x.iter().map(VertexSet::singleton).collect();
        return Ok(SmallPartition { case: SmallCase::Singletons, level: None, parts });
    }
    let fam = compute_y_family(ctx, x)?;
    let xbar = ctx.ground() - x;
    let crossing = fam
        .members
        .iter()
        .tuple_combinations()
        .any(|(&a, &b)| !(a & b).is_subset(xbar));
    let mut parts = if crossing {
        let mut atoms = vec![x];
        for &y in &fam.members {
            atoms = atoms.into_iter().flat_map(|p| [p & y, p - y]).filter(|p| !p.is_empty()).collect();
        }
        atoms
    } else {
        let covered = fam.members.iter().fold(VertexSet::EMPTY, |acc, &y| acc | (y & x));
        std::iter::once(x - covered)
            .chain(fam.members.iter().map(|&y| y & x))
            .filter(|p| !p.is_empty())
            .collect()
    };
    parts.sort_by(|a, b| a.size_lex_cmp(b));
    let out = SmallPartition {
        case: if crossing { SmallCase::Atoms } else { SmallCase::Disjoint },
        level: Some(fam.level),
        parts,
    };
    check_partition(ctx, x, k1, &fam, &out)?;
    Ok(out)
}

fn check_partition(ctx: &NodeContext, x: VertexSet, k1: usize, fam: &YFamily, p: &SmallPartition) -> Result<()> {
    let f = ctx.down();
    let fail = |msg: String| Err(Error::Invariant(format!("small partition of {x}: {msg}")));
    let union = p.parts.iter().fold(VertexSet::EMPTY, |acc, &q| acc | q);
    let total: usize = p.parts.iter().map(|q| q.len()).sum();
    if union != x || total != x.len() || p.parts.len() < 2 {
        return fail("not a proper partition".into());
    }
    let k2 = ctx.k0() + k1;
    match p.case {
        SmallCase::Singletons => {}
        SmallCase::Atoms => {
            let bound = 2 * k1 * fam.members.len();
            for &q in &p.parts {
                if f.kappa(q) > bound.max(ctx.k()) {
                    return fail(format!("atom {q} has order {} > {bound}", f.kappa(q)));
                }
                if !BoundTable::shrinks_by_f1(k2, q.len(), x.len()) {
                    return fail(format!("atom {q} is too large"));
                }
            }
        }
        SmallCase::Disjoint => {
            let xbar = ctx.ground() - x;
            let rest = x - fam.members.iter().fold(VertexSet::EMPTY, |acc, &y| acc | (y - xbar));
            if f.kappa(rest) > k1 {
                return fail(format!("remainder {rest} has order {} > {k1}", f.kappa(rest)));
            }
            let pieces: Vec<VertexSet> = fam.members.iter().map(|&y| y & x).collect();
            for &q in &pieces {
                if !BoundTable::shrinks_by_f1(k2, q.len(), x.len()) {
                    return fail(format!("part {q} is too large"));
                }
            }
            let limit = pieces.len().min(UNION_CHECK_LIMIT);
            for mask in 1u64..(1 << limit) {
                let u = (0..limit).filter(|i| mask >> i & 1 == 1).fold(VertexSet::EMPTY, |acc, i| acc | pieces[i]);
                if f.kappa(u) > 2 * k1 {
                    return fail(format!("union {u} has order {} > {}", f.kappa(u), 2 * k1));
                }
            }
        }
    }
    Ok(())
}
