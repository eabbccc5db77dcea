//! Connectivity functions, contractions, minimum separations and free sets.

use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::f2linalg::{cut_rank_within, Graph, VertexSet};

/// Largest number of free elements an exhaustive separation search will
/// enumerate (2^22 candidate sets).
pub const EXHAUSTIVE_CAP: usize = 22;

/// A symmetric submodular set function `kappa: 2^A -> N` with `kappa(∅) = 0`.
///
/// `ground()` is the set `A`, encoded as a mask; elements outside it are
/// never queried.
pub trait ConnFn: Send + Sync {
    fn ground(&self) -> VertexSet;
    fn kappa(&self, x: VertexSet) -> usize;

    fn ground_size(&self) -> usize {
        self.ground().len()
    }

    fn complement(&self, x: VertexSet) -> VertexSet {
        x.complement_in(self.ground())
    }
}

impl<F: ConnFn + ?Sized> ConnFn for &F {
    fn ground(&self) -> VertexSet {
        (**self).ground()
    }
    fn kappa(&self, x: VertexSet) -> usize {
        (**self).kappa(x)
    }
}

impl<F: ConnFn + ?Sized> ConnFn for Arc<F> {
    fn ground(&self) -> VertexSet {
        (**self).ground()
    }
    fn kappa(&self, x: VertexSet) -> usize {
        (**self).kappa(x)
    }
}

/// Cache for set-function values. Dense when the ground set is a prefix
/// `{0..n-1}` with small `n`, a concurrent hash map otherwise. Values are
/// stored for the representative of `{X, complement X}` not containing the
/// largest ground element, which halves the table.
enum Memo {
    Dense(Vec<AtomicU8>),
    Sparse(DashMap<u64, u16>),
}

const DENSE_LIMIT: usize = 22;
const UNKNOWN: u8 = 0xFF;

impl Memo {
    fn for_ground(ground: VertexSet) -> Memo {
        let n = ground.len();
        if n >= 1 && n <= DENSE_LIMIT && ground == VertexSet::full(n) {
            let size = 1usize << (n - 1);
            Memo::Dense((0..size).map(|_| AtomicU8::new(UNKNOWN)).collect())
        } else {
            Memo::Sparse(DashMap::new())
        }
    }

    #[inline]
    fn get_or(&self, key: u64, compute: impl FnOnce() -> usize) -> usize {
        match self {
            Memo::Dense(v) => {
                let slot = &v[key as usize];
                let cached = slot.load(Ordering::Relaxed);
                if cached != UNKNOWN {
                    return cached as usize;
                }
                let val = compute();
                if val < UNKNOWN as usize {
                    slot.store(val as u8, Ordering::Relaxed);
                }
                val
            }
            Memo::Sparse(m) => {
                if let Some(v) = m.get(&key) {
                    return *v as usize;
                }
                let val = compute();
                m.insert(key, val as u16);
                val
            }
        }
    }
}

#[inline]
fn symmetric_key(ground: VertexSet, x: VertexSet) -> u64 {
    let x = x & ground;
    match ground.max() {
        Some(top) if x.contains(top) => (ground - x).0,
        _ => x.0,
    }
}

/// The cut-rank function of a graph, optionally restricted to the subgraph
/// induced by a support set. Memoized.
pub struct CutRank {
    graph: Arc<Graph>,
    support: VertexSet,
    memo: Memo,
}

impl CutRank {
    pub fn new(graph: Arc<Graph>) -> Self {
        let support = graph.vertices();
        Self::induced(graph, support)
    }

    /// `rho` of the induced subgraph `G[support]`, as a function on `2^support`.
    pub fn induced(graph: Arc<Graph>, support: VertexSet) -> Self {
        let support = support & graph.vertices();
        CutRank { memo: Memo::for_ground(support), graph, support }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }
}

impl ConnFn for CutRank {
    fn ground(&self) -> VertexSet {
        self.support
    }

    #[inline]
    fn kappa(&self, x: VertexSet) -> usize {
        let key = symmetric_key(self.support, x);
        self.memo
            .get_or(key, || cut_rank_within(&self.graph, self.support, VertexSet(key)))
    }
}

/// An arbitrary set function given by a closure; mostly useful in tests.
pub struct FromFn<F> {
    ground: VertexSet,
    f: F,
}

impl<F: Fn(VertexSet) -> usize + Send + Sync> FromFn<F> {
    pub fn new(ground: VertexSet, f: F) -> Self {
        FromFn { ground, f }
    }
}

impl<F: Fn(VertexSet) -> usize + Send + Sync> ConnFn for FromFn<F> {
    fn ground(&self) -> VertexSet {
        self.ground
    }
    fn kappa(&self, x: VertexSet) -> usize {
        (self.f)(x & self.ground)
    }
}

/// The contraction of a connectivity function along disjoint parts.
///
/// Elements of the contracted ground set are numbered: first the
/// uncontracted elements `B` in ascending order, then `c_0` (if a designated
/// part `C_0` was given; it may expand to the empty set), then `c_1..c_m`.
pub struct Contraction<F> {
    base: F,
    expansion: Vec<VertexSet>,
    b_len: usize,
    has_c0: bool,
    ground: VertexSet,
    memo: Memo,
}

impl<F: ConnFn> Contraction<F> {
    pub fn new(base: F, c0: Option<VertexSet>, parts: &[VertexSet]) -> Result<Self> {
        let base_ground = base.ground();
        let mut used = VertexSet::EMPTY;
        let all_parts = c0.iter().chain(parts.iter());
        for (i, &p) in all_parts.enumerate() {
            if !p.is_subset(base_ground) {
                return Err(Error::Precondition(format!("part {p} is not inside the ground set")));
            }
            if p.intersects(used) {
                return Err(Error::Overlap(p.to_string(), used.to_string()));
            }
            let is_c0 = c0.is_some() && i == 0;
            if p.is_empty() && !is_c0 {
                return Err(Error::Precondition("only C_0 may be empty".into()));
            }
            used |= p;
        }
        let b = base_ground - used;
        let mut expansion: Vec<VertexSet> = b.iter().map(VertexSet::singleton).collect();
        let b_len = expansion.len();
        if let Some(c) = c0 {
            expansion.push(c);
        }
        expansion.extend_from_slice(parts);
        if expansion.len() > 64 {
            return Err(Error::GroundTooLarge(expansion.len()));
        }
        let ground = VertexSet::full(expansion.len());
        Ok(Contraction { base, b_len, has_c0: c0.is_some(), memo: Memo::for_ground(ground), ground, expansion })
    }

    pub fn base(&self) -> &F {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.expansion.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expansion.is_empty()
    }

    /// Contracted elements standing for uncontracted base elements.
    pub fn b_elements(&self) -> VertexSet {
        VertexSet::full(self.b_len)
    }

    pub fn c0(&self) -> Option<usize> {
        self.has_c0.then_some(self.b_len)
    }

    /// The element `c_i` for `i >= 1`.
    pub fn c(&self, i: usize) -> usize {
        assert!(i >= 1);
        self.b_len + self.has_c0 as usize + i - 1
    }

    pub fn part_count(&self) -> usize {
        self.expansion.len() - self.b_len - self.has_c0 as usize
    }

    /// Expansion `{e}↑` of a single contracted element.
    pub fn expand_element(&self, e: usize) -> VertexSet {
        self.expansion[e]
    }

    /// `X↑`: the union of the expansions of the elements of `X`.
    #[inline]
    pub fn expand(&self, x: VertexSet) -> VertexSet {
        let mut out = VertexSet::EMPTY;
        for e in x.iter() {
            out |= self.expansion[e];
        }
        out
    }

    /// Elements whose expansion meets `y`.
    pub fn touching(&self, y: VertexSet) -> VertexSet {
        (0..self.expansion.len())
            .filter(|&e| self.expansion[e].intersects(y))
            .collect()
    }

    /// The contracted set whose expansion is exactly `y`, if `y` is a union of
    /// parts. Empty-expanding elements (an empty `C_0`) are never included.
    pub fn project(&self, y: VertexSet) -> Option<VertexSet> {
        let mut out = VertexSet::EMPTY;
        let mut covered = VertexSet::EMPTY;
        for (e, &p) in self.expansion.iter().enumerate() {
            if p.is_empty() {
                continue;
            }
            if p.is_subset(y) {
                out.insert(e);
                covered |= p;
            } else if p.intersects(y) {
                return None;
            }
        }
        (covered == y).then_some(out)
    }
}

impl<F: ConnFn> ConnFn for Contraction<F> {
    fn ground(&self) -> VertexSet {
        self.ground
    }

    #[inline]
    fn kappa(&self, x: VertexSet) -> usize {
        let key = symmetric_key(self.ground, x);
        self.memo.get_or(key, || self.base.kappa(self.expand(VertexSet(key))))
    }
}

/// Result of a minimum-separation query between disjoint `X` and `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparationQuery {
    pub order: usize,
    /// The unique inclusion-minimal minimum `(X, Y)`-separation.
    pub leftmost: VertexSet,
    /// The unique inclusion-maximal minimum `(X, Y)`-separation.
    pub rightmost: VertexSet,
}

/// Strategy for minimising `kappa` over the interval `[X, complement Y]`.
pub trait SepMinimizer: Send + Sync {
    fn min_separation(&self, f: &dyn ConnFn, x: VertexSet, y: VertexSet) -> Result<SeparationQuery>;
}

/// Enumerates every `Z` with `X ⊆ Z ⊆ complement(Y)`. The minimisers of a
/// submodular function form a lattice, so intersecting (resp. uniting) all of
/// them yields the leftmost (resp. rightmost) minimum separation.
#[derive(Clone, Copy, Debug)]
pub struct Exhaustive {
    pub cap: usize,
}

impl Default for Exhaustive {
    fn default() -> Self {
        Exhaustive { cap: EXHAUSTIVE_CAP }
    }
}

impl SepMinimizer for Exhaustive {
    fn min_separation(&self, f: &dyn ConnFn, x: VertexSet, y: VertexSet) -> Result<SeparationQuery> {
        if x.intersects(y) {
            return Err(Error::Overlap(x.to_string(), y.to_string()));
        }
        let ground = f.ground();
        let free = ground - x - y;
        if free.len() > self.cap {
            return Err(Error::SearchCap { free: free.len(), cap: self.cap });
        }
        let mut best = usize::MAX;
        let mut left = VertexSet::EMPTY;
        let mut right = VertexSet::EMPTY;
        for s in free.subsets() {
            let z = x | s;
            let v = f.kappa(z);
            if v < best {
                best = v;
                left = z;
                right = z;
            } else if v == best {
                left &= z;
                right |= z;
            }
        }
        Ok(SeparationQuery { order: best, leftmost: left, rightmost: right })
    }
}

/// `kappa_min(X, Y)` together with the leftmost and rightmost minimum
/// separations, using the exhaustive minimiser.
pub fn kappa_min(f: &dyn ConnFn, x: VertexSet, y: VertexSet) -> Result<SeparationQuery> {
    Exhaustive::default().min_separation(f, x, y)
}

/// A set `Y ⊆ X` with `kappa_min(Y, complement X) = kappa(X)` and
/// `|Y| <= kappa(X)`, grown greedily in ascending element order.
pub fn free_set(f: &dyn ConnFn, x: VertexSet) -> Result<VertexSet> {
    let target = f.kappa(x);
    let outside = f.complement(x);
    let mut y = VertexSet::EMPTY;
    let mut lambda = 0;
    for e in x.iter() {
        if lambda == target {
            break;
        }
        let l = kappa_min(f, y.with(e), outside)?.order;
        if l > lambda {
            lambda = l;
            y.insert(e);
        }
    }
    debug_assert_eq!(lambda, target);
    Ok(y)
}
