//! Canonical splits of sets of large order, via independent sets of the
//! polymatroid `Y ↦ κ↓min(Y, X)` on the outside of `X`.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::canonical::context::NodeContext;
use crate::connfn::{kappa_min, ConnFn, FromFn};
use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::f2linalg::{cut_rank_within, Graph, VertexSet};

/// Default cap on the number of complete tuples enumerated per set.
pub const TUPLE_CAP: usize = 500_000;

/// Cap on the number of per-part order combinations tried by the tuple
/// classifier.
pub const ORDER_CAP: usize = 40_320;

/// The integer polymatroid `λ(Y) = κmin(Y, X)` on the complement of `X`.
pub struct Polymatroid<'a> {
    f: &'a dyn ConnFn,
    x: VertexSet,
}

impl<'a> Polymatroid<'a> {
    pub fn new(f: &'a dyn ConnFn, x: VertexSet) -> Self {
        Polymatroid { f, x }
    }

    pub fn ground(&self) -> VertexSet {
        self.f.ground() - self.x
    }

    pub fn lambda(&self, y: VertexSet) -> Result<usize> {
        Ok(kappa_min(self.f, y, self.x)?.order)
    }

    /// `r(Y) = min over Z ⊆ Y of λ(Z) + |Y ∖ Z|`.
    pub fn rank(&self, y: VertexSet) -> Result<usize> {
        let mut best = usize::MAX;
        for z in y.subsets() {
            best = best.min(self.lambda(z)? + (y - z).len());
        }
        Ok(best)
    }

    /// `Y` is independent iff `|Z| <= λ(Z)` for every `Z ⊆ Y`.
    pub fn is_independent(&self, y: VertexSet) -> Result<bool> {
        for z in y.subsets() {
            if z.len() > self.lambda(z)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Subsets of the sequence `order`, in lexicographic order of their
/// position lists (the empty set first).
fn lex_subsets(order: &[usize]) -> Vec<VertexSet> {
    let n = order.len();
    let mut lists: Vec<Vec<usize>> = (0u64..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    lists.sort();
    lists.into_iter().map(|l| l.into_iter().map(|i| order[i]).collect()).collect()
}

/// The separation `Z` for an independent set `Y` (listed in the order
/// `order`): the leftmost minimum `(Z0, Y ∖ Z0)`-separation for the
/// lexicographically first `Z0 ⊆ Y` with `κ(Z) < min(|Y ∩ Z|, |Y ∖ Z|)`.
pub fn find_split(f: &dyn ConnFn, order: &[usize]) -> Result<VertexSet> {
    let y: VertexSet = order.iter().copied().collect();
    for z0 in lex_subsets(order) {
        let z = kappa_min(f, z0, y - z0)?.leftmost;
        if f.kappa(z) < (y & z).len().min((y - z).len()) {
            return Ok(z);
        }
    }
    Err(Error::Invariant(format!("no qualifying separation for the independent set {y}")))
}

/// The equivalence classes of complete tuples of distinct elements of
/// `A↓ ∖ X`, keyed by the classifier.
#[derive(Clone, Debug)]
pub struct TupleClasses {
    /// Number of distinct columns of the cut matrix between `X` and its
    /// complement.
    pub columns: usize,
    pub tuple_len: usize,
    /// `(key, lexicographically least member, class size)`, ordered by key.
    pub classes: Vec<(Vec<u64>, Vec<usize>, usize)>,
}

fn columns_of(ctx: &NodeContext, x: VertexSet, e: usize) -> Vec<u64> {
    let rows = ctx.reduced_expand(x);
    ctx.reduced_element(e).iter().map(|v| (ctx.graph().neighbours(v) & rows).0).collect()
}

/// Classifier key of a tuple: two tuples are equivalent iff their keys are
/// equal. The key is the least encoding, over all choices of orders within
/// the parts, of the part sizes, the columns towards `X` (condition (i))
/// and the adjacency between different parts (condition (ii)).
pub fn tuple_key(ctx: &NodeContext, x: VertexSet, w: &[usize]) -> Result<Vec<u64>> {
    let parts: Vec<VertexSet> = w.iter().map(|&e| ctx.reduced_element(e)).collect();
    parts_key(ctx.graph(), ctx.reduced_expand(x), &parts)
}

/// [`tuple_key`] on explicit vertex parts, with `rows` the expansion of `X`.
pub fn parts_key(g: &Graph, rows: VertexSet, parts: &[VertexSet]) -> Result<Vec<u64>> {
    let parts: Vec<Vec<usize>> = parts.iter().map(|p| p.to_vec()).collect();
    let combos: usize = parts.iter().map(|p| (1..=p.len()).product::<usize>()).product();
    if combos > ORDER_CAP {
        return Err(Error::SearchCap { free: combos, cap: ORDER_CAP });
    }
    let mut best: Option<Vec<u64>> = None;
    for choice in order_choices(&parts) {
        let seq: Vec<(usize, usize)> =
            choice.iter().enumerate().flat_map(|(i, o)| o.iter().map(move |&v| (i, v))).collect();
        let mut key: Vec<u64> = parts.iter().map(|p| p.len() as u64).collect();
        key.extend(seq.iter().map(|&(_, v)| (g.neighbours(v) & rows).0));
        let mut word = 0u64;
        let mut bit = 0;
        for (a, &(pa, va)) in seq.iter().enumerate() {
            for &(pb, vb) in &seq[a + 1..] {
                if pa != pb {
                    word |= (g.has_edge(va, vb) as u64) << bit;
                    bit += 1;
                    if bit == 64 {
                        key.push(word);
                        word = 0;
                        bit = 0;
                    }
                }
            }
        }
        key.push(word);
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    Ok(best.unwrap_or_default())
}

/// Every choice of one linear order per part (a single empty choice when
/// there are no parts).
fn order_choices(parts: &[Vec<usize>]) -> Vec<Vec<Vec<usize>>> {
    if parts.is_empty() {
        return vec![Vec::new()];
    }
    parts
        .iter()
        .map(|p| p.iter().copied().permutations(p.len()).collect::<Vec<_>>())
        .multi_cartesian_product()
        .collect()
}

/// Enumerates the complete tuples for `X` and groups them into classes.
pub fn equiv_classes(ctx: &NodeContext, x: VertexSet, cap: usize) -> Result<TupleClasses> {
    let xbar = ctx.ground() - x;
    let outside: Vec<usize> = xbar.to_vec();
    let mut all_columns: Vec<u64> = outside.iter().flat_map(|&e| columns_of(ctx, x, e)).collect();
    all_columns.sort_unstable();
    all_columns.dedup();
    let columns = all_columns.len();
    let tuple_len = columns.min(outside.len());
    let mut classes: BTreeMap<Vec<u64>, (Vec<usize>, usize)> = BTreeMap::new();
    let mut seen = 0usize;
    for combo in outside.iter().copied().combinations(tuple_len) {
        let mut cols: Vec<u64> = combo.iter().flat_map(|&e| columns_of(ctx, x, e)).collect();
        cols.sort_unstable();
        cols.dedup();
        if cols.len() != columns {
            continue;
        }
        for tuple in combo.iter().copied().permutations(tuple_len) {
            seen += 1;
            if seen > cap {
                return Err(Error::SearchCap { free: seen, cap });
            }
            let key = tuple_key(ctx, x, &tuple)?;
            let entry = classes.entry(key).or_insert_with(|| (tuple.clone(), 0));
            if tuple < entry.0 {
                entry.0 = tuple;
            }
            entry.1 += 1;
        }
    }
    let classes = classes.into_iter().map(|(k, (rep, n))| (k, rep, n)).collect();
    Ok(TupleClasses { columns, tuple_len, classes })
}

/// `κ↓` restricted to `X ∪ W`: the cut rank inside the subgraph induced by
/// the (twin-reduced) expansion of `X ∪ W`.
pub fn restricted_function<'a>(
    ctx: &'a NodeContext,
    x: VertexSet,
    w: VertexSet,
) -> FromFn<impl Fn(VertexSet) -> usize + Send + Sync + 'a> {
    let support = ctx.reduced_expand(x | w);
    FromFn::new(x | w, move |z: VertexSet| cut_rank_within(ctx.graph(), support, ctx.reduced_expand(z)))
}

/// How a split was found: the independent set (in tuple order) and the
/// separation `Z` it induced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitWitness {
    pub independent: Vec<usize>,
    pub z: VertexSet,
}

/// The split of `X` obtained from one complete tuple.
pub fn split_for_tuple(ctx: &NodeContext, x: VertexSet, tuple: &[usize]) -> Result<(VertexSet, VertexSet)> {
    let wit = split_witness(ctx, x, tuple)?;
    Ok((x & wit.z, x - wit.z))
}

pub fn split_witness(ctx: &NodeContext, x: VertexSet, tuple: &[usize]) -> Result<SplitWitness> {
    let w: VertexSet = tuple.iter().copied().collect();
    let fi = restricted_function(ctx, x, w);
    let lambda = Polymatroid::new(&fi, x);
    let size = 3 * ctx.k() + 1;
    let candidates: Vec<usize> = tuple.iter().copied().filter(|&e| e != ctx.c0()).collect();
    let mut chosen = None;
    for combo in candidates.iter().copied().combinations(size) {
        let y: VertexSet = combo.iter().copied().collect();
        if lambda.is_independent(y)? {
            chosen = Some(combo);
            break;
        }
    }
    let order = chosen.ok_or_else(|| Error::Invariant(format!("no independent set of size {size} outside {x}")))?;
    let z = find_split(&fi, &order)?;
    Ok(SplitWitness { independent: order, z })
}

/// A canonical family of partitions of `X` into two sets of smaller order,
/// one per class of complete tuples (duplicates removed).
pub fn split_big(ctx: &NodeContext, x: VertexSet, cap: usize) -> Result<Vec<(VertexSet, VertexSet)>> {
    let f = ctx.down();
    let k1 = f.kappa(x);
    if k1 < ctx.bounds().small_threshold() {
        return Err(Error::Precondition(format!("order {k1} of {x} is small")));
    }
    let classes = equiv_classes(ctx, x, cap)?;
    let mut out: Vec<(VertexSet, VertexSet)> = Vec::new();
    for (_, rep, _) in &classes.classes {
        let (a, b) = split_for_tuple(ctx, x, rep)?;
        if a.is_empty() || b.is_empty() || f.kappa(a) >= k1 || f.kappa(b) >= k1 {
            return Err(Error::Invariant(format!("split {a} | {b} of {x} does not lower the order")));
        }
        let pair = if a <= b { (a, b) } else { (b, a) };
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    if out.is_empty() {
        return Err(Error::Invariant(format!("no complete tuple for {x}")));
    }
    Ok(out)
}

/// The partial decomposition below a set of large order: the root has cone
/// `X`; for each split there is a child with cone `X` whose two children
/// are the recursively built trees for the halves. Sets of small order
/// become leaves.
pub fn big_subtree(ctx: &NodeContext, x: VertexSet, cap: usize) -> Result<Decomposition> {
    let mut d = Decomposition::new(ctx.ground());
    let root = d.add_node(x);
    grow_big(ctx, x, cap, &mut d, root)?;
    Ok(d)
}

fn grow_big(ctx: &NodeContext, x: VertexSet, cap: usize, d: &mut Decomposition, node: usize) -> Result<()> {
    if ctx.down().kappa(x) < ctx.bounds().small_threshold() {
        return Ok(());
    }
    for (a, b) in split_big(ctx, x, cap)? {
        let mid = d.add_node(x);
        d.add_edge(node, mid);
        for half in [a, b] {
            let c = d.add_node(half);
            d.add_edge(mid, c);
            grow_big(ctx, half, cap, d, c)?;
        }
    }
    Ok(())
}
