//! Tangles of a connectivity function: exhaustive enumeration up to a given
//! order, separations between tangles and sets, and triple covers.

use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::Serialize;

use crate::connfn::{ConnFn, Contraction, EXHAUSTIVE_CAP};
use crate::error::{Error, Result};
use crate::f2linalg::VertexSet;

/// A tangle, represented by its order and its inclusion-wise minimal members.
/// A set `X` is a member iff `kappa(X) < order` and `X` contains a minimal
/// member.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Tangle {
    pub order: usize,
    pub minimal: Vec<VertexSet>,
}

fn list_cmp(a: &[VertexSet], b: &[VertexSet]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.size_lex_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl Tangle {
    pub fn trivial() -> Self {
        Tangle { order: 0, minimal: Vec::new() }
    }

    fn normalized(order: usize, mut minimal: Vec<VertexSet>) -> Self {
        minimal.sort_by(|a, b| a.size_lex_cmp(b));
        minimal.dedup();
        Tangle { order, minimal }
    }

    #[inline]
    pub fn has_minimal_below(&self, x: VertexSet) -> bool {
        self.minimal.iter().any(|m| m.is_subset(x))
    }

    pub fn contains(&self, f: &dyn ConnFn, x: VertexSet) -> bool {
        f.kappa(x) < self.order && self.has_minimal_below(x)
    }

    /// The truncation to order `l`, computed from scratch by scanning all
    /// subsets of the ground set.
    pub fn truncate(&self, f: &dyn ConnFn, l: usize) -> Result<Tangle> {
        if l >= self.order {
            return Ok(self.clone());
        }
        let ground = f.ground();
        if ground.len() > EXHAUSTIVE_CAP {
            return Err(Error::SearchCap { free: ground.len(), cap: EXHAUSTIVE_CAP });
        }
        let members: Vec<VertexSet> = ground
            .subsets()
            .filter(|&x| f.kappa(x) < l && self.has_minimal_below(x))
            .collect();
        Ok(Tangle::normalized(l, minimal_sets(&members)))
    }

    /// Is `other` (of order at most ours) the truncation of `self`?
    pub fn extends(&self, f: &dyn ConnFn, other: &Tangle) -> bool {
        other.order <= self.order && other.minimal.iter().all(|&m| self.contains(f, m))
    }
}

/// Inclusion-minimal sets of a family.
pub fn minimal_sets(family: &[VertexSet]) -> Vec<VertexSet> {
    let mut sorted: Vec<VertexSet> = family.to_vec();
    sorted.sort_by_key(|s| s.len());
    sorted.dedup();
    let mut out: Vec<VertexSet> = Vec::new();
    for s in sorted {
        if !out.iter().any(|m| m.is_subset(s)) {
            out.push(s);
        }
    }
    out
}

/// All tangles of order at most `k`, indexed deterministically by
/// `(order, minimal-element list)`.
#[derive(Clone, Debug)]
pub struct TangleStore {
    k: usize,
    ground: VertexSet,
    tangles: Vec<Tangle>,
    /// Index of the truncation to order `ord - 1`.
    parent: Vec<Option<usize>>,
    has_child: Vec<bool>,
}

#[derive(Serialize)]
pub struct TangleJson {
    pub index: usize,
    pub order: usize,
    pub truncation: Option<usize>,
    pub maximal: bool,
    pub minimal: Vec<VertexSet>,
}

struct Extender {
    pairs: Vec<(VertexSet, VertexSet)>,
    out: Vec<Vec<VertexSet>>,
}

impl Extender {
    fn admissible(minimal: &[VertexSet], z: VertexSet) -> bool {
        if z.len() <= 1 {
            return false;
        }
        for (i, &a) in minimal.iter().enumerate() {
            let za = z & a;
            if za.is_empty() {
                return false;
            }
            for &b in &minimal[i..] {
                if (za & b).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    fn add(minimal: &[VertexSet], z: VertexSet) -> Vec<VertexSet> {
        let mut next: Vec<VertexSet> = minimal.iter().copied().filter(|m| !z.is_subset(*m)).collect();
        next.push(z);
        next
    }

    fn dfs(&mut self, idx: usize, minimal: Vec<VertexSet>) {
        if idx == self.pairs.len() {
            self.out.push(minimal);
            return;
        }
        let (x, xc) = self.pairs[idx];
        let fx = minimal.iter().any(|m| m.is_subset(x));
        let fc = minimal.iter().any(|m| m.is_subset(xc));
        match (fx, fc) {
            (true, true) => {}
            (true, false) | (false, true) => self.dfs(idx + 1, minimal),
            (false, false) => {
                for z in [x, xc] {
                    if Self::admissible(&minimal, z) {
                        let next = Self::add(&minimal, z);
                        self.dfs(idx + 1, next);
                    }
                }
            }
        }
    }
}

impl TangleStore {
    /// Enumerates all tangles of order at most `k` by extending each tangle of
    /// order `l - 1` over the sets of order exactly `l - 1`.
    pub fn enumerate(f: &dyn ConnFn, k: usize) -> Result<TangleStore> {
        let ground = f.ground();
        if ground.is_empty() {
            return Err(Error::EmptyGround);
        }
        if ground.len() > EXHAUSTIVE_CAP {
            return Err(Error::SearchCap { free: ground.len(), cap: EXHAUSTIVE_CAP });
        }
        // Bucket one representative of each complementary pair by order.
        let top = ground.max().unwrap();
        let mut by_order: Vec<Vec<(VertexSet, VertexSet)>> = Vec::new();
        for x in ground.subsets() {
            if x.contains(top) {
                continue;
            }
            let o = f.kappa(x);
            if o >= k {
                continue;
            }
            if by_order.len() <= o {
                by_order.resize(o + 1, Vec::new());
            }
            let xc = ground - x;
            let (small, large) = if x.size_lex_cmp(&xc) == Ordering::Greater { (xc, x) } else { (x, xc) };
            by_order[o].push((small, large));
        }
        for v in by_order.iter_mut() {
            v.sort_by(|a, b| a.0.size_lex_cmp(&b.0));
        }

        let mut levels: Vec<Vec<(Tangle, Option<usize>)>> = vec![vec![(Tangle::trivial(), None)]];
        for order in 1..=k {
            let prev = &levels[order - 1];
            let pairs = by_order.get(order - 1).cloned().unwrap_or_default();
            let mut found: Vec<(Tangle, Option<usize>)> = Vec::new();
            for (pi, (t, _)) in prev.iter().enumerate() {
                let mut ext = Extender { pairs: pairs.clone(), out: Vec::new() };
                ext.dfs(0, t.minimal.clone());
                for m in ext.out {
                    found.push((Tangle::normalized(order, m), Some(pi)));
                }
            }
            if found.is_empty() {
                break;
            }
            found.sort_by(|a, b| list_cmp(&a.0.minimal, &b.0.minimal));
            levels.push(found);
        }

        // Flatten with global indices.
        let mut tangles = Vec::new();
        let mut parent = Vec::new();
        let mut offset = vec![0usize; levels.len()];
        for (o, lvl) in levels.iter().enumerate() {
            offset[o] = tangles.len();
            for (t, p) in lvl {
                tangles.push(t.clone());
                parent.push(p.map(|p| offset[o - 1] + p));
            }
        }
        let mut has_child = vec![false; tangles.len()];
        for p in parent.iter().flatten() {
            has_child[*p] = true;
        }
        Ok(TangleStore { k, ground, tangles, parent, has_child })
    }

    /// The order bound `k`.
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn ground(&self) -> VertexSet {
        self.ground
    }

    /// Number of tangles of order at most `l`.
    pub fn size(&self, l: usize) -> usize {
        self.tangles.iter().filter(|t| t.order <= l).count()
    }

    pub fn len(&self) -> usize {
        self.tangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tangles.is_empty()
    }

    pub fn tangle(&self, i: usize) -> &Tangle {
        &self.tangles[i]
    }

    pub fn tangles(&self) -> &[Tangle] {
        &self.tangles
    }

    pub fn contains(&self, f: &dyn ConnFn, i: usize, x: VertexSet) -> bool {
        self.tangles[i].contains(f, x)
    }

    pub fn tangle_order(&self, i: usize) -> usize {
        self.tangles[i].order
    }

    pub fn max_order(&self) -> usize {
        self.tangles.iter().map(|t| t.order).max().unwrap_or(0)
    }

    pub fn count_by_order(&self) -> Vec<usize> {
        let mut v = vec![0; self.max_order() + 1];
        for t in &self.tangles {
            v[t.order] += 1;
        }
        v
    }

    /// Index of the truncation of tangle `i` to order `l` (`i` itself when
    /// `l >= ord`).
    pub fn truncation(&self, i: usize, l: usize) -> Result<usize> {
        if i >= self.tangles.len() {
            return Err(Error::InvalidIndex(i));
        }
        let mut j = i;
        while self.tangles[j].order > l {
            j = self.parent[j].expect("order > 0 has a parent");
        }
        Ok(j)
    }

    /// Is tangle `j` a truncation of tangle `i` (or equal to it)?
    pub fn is_truncation_of(&self, j: usize, i: usize) -> bool {
        let oj = self.tangles[j].order;
        oj <= self.tangles[i].order && self.truncation(i, oj).ok() == Some(j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.is_truncation_of(i, j) || self.is_truncation_of(j, i)
    }

    /// A tangle of order below the bound is maximal iff it has no extension
    /// in the store; tangles of the bound order are reported as maximal only
    /// relative to the store.
    pub fn is_maximal(&self, i: usize) -> bool {
        !self.has_child[i]
    }

    /// The `l`-maximal tangles: order exactly `l`, or maximal of smaller order.
    pub fn k_maximal(&self, l: usize) -> Vec<usize> {
        (0..self.tangles.len())
            .filter(|&i| {
                let o = self.tangles[i].order;
                o == l || (o < l && self.is_maximal(i))
            })
            .collect()
    }

    /// The leftmost minimum `(T_i, T_j)`-separation, or `None` when one
    /// tangle is a truncation of the other.
    pub fn separation(&self, f: &dyn ConnFn, i: usize, j: usize) -> Result<Option<VertexSet>> {
        if i >= self.tangles.len() {
            return Err(Error::InvalidIndex(i));
        }
        if j >= self.tangles.len() {
            return Err(Error::InvalidIndex(j));
        }
        if self.comparable(i, j) {
            return Ok(None);
        }
        Ok(tangle_separation(f, &self.tangles[i], &self.tangles[j]))
    }

    /// Index of the stored tangle of order `l` agreeing with a membership
    /// oracle on the minimal elements.
    pub fn find(&self, l: usize, oracle: &dyn Fn(VertexSet) -> bool) -> Option<usize> {
        (0..self.tangles.len())
            .find(|&i| self.tangles[i].order == l && self.tangles[i].minimal.iter().all(|&m| oracle(m)))
    }

    pub fn to_json(&self) -> Vec<TangleJson> {
        (0..self.tangles.len())
            .map(|i| TangleJson {
                index: i,
                order: self.tangles[i].order,
                truncation: self.parent[i],
                maximal: self.is_maximal(i),
                minimal: self.tangles[i].minimal.clone(),
            })
            .collect()
    }
}

/// Leftmost minimum `(T, T')`-separation by scanning all sets of order below
/// both tangle orders. `None` if the tangles are comparable.
pub fn tangle_separation(f: &dyn ConnFn, t: &Tangle, u: &Tangle) -> Option<VertexSet> {
    let bound = t.order.min(u.order);
    let ground = f.ground();
    let mut best = usize::MAX;
    let mut left = VertexSet::EMPTY;
    for a in &t.minimal {
        for z in (ground - *a).subsets() {
            let z = z | *a;
            let o = f.kappa(z);
            if o >= bound || o > best {
                continue;
            }
            if !u.has_minimal_below(ground - z) {
                continue;
            }
            if o < best {
                best = o;
                left = z;
            } else {
                left &= z;
            }
        }
    }
    (best != usize::MAX).then_some(left)
}

/// Leftmost minimum `(T, X)`-separation: the leftmost minimum-order member of
/// `T` disjoint from `X`. `None` if no member avoids `X`.
pub fn tangle_set_separation(f: &dyn ConnFn, t: &Tangle, x: VertexSet) -> Result<Option<VertexSet>> {
    // A member X admits no separation (it would be disjoint from another
    // member), so the answer is simply `None`.
    if t.contains(f, x) {
        return Ok(None);
    }
    let room = f.ground() - x;
    if room.len() > EXHAUSTIVE_CAP {
        return Err(Error::SearchCap { free: room.len(), cap: EXHAUSTIVE_CAP });
    }
    let mut best = usize::MAX;
    let mut left = VertexSet::EMPTY;
    for a in t.minimal.iter().filter(|a| a.is_subset(room)) {
        for z in (room - *a).subsets() {
            let z = z | *a;
            let o = f.kappa(z);
            if o >= t.order || o > best {
                continue;
            }
            if o < best {
                best = o;
                left = z;
            } else {
                left &= z;
            }
        }
    }
    Ok((best != usize::MAX).then_some(left))
}

/// Minimal members recomputed via leftmost minimum `(T, Y)`-separations for
/// all `Y` of size at most `ord(T)`: every minimal member arises this way
/// (take `Y` free in its complement), and minimality is then a filter.
pub fn minimal_elements(f: &dyn ConnFn, t: &Tangle) -> Result<Vec<VertexSet>> {
    let ground = f.ground();
    let mut found: Vec<VertexSet> = Vec::new();
    let elems: Vec<usize> = ground.iter().collect();
    let k = t.order;
    for size in 0..=k.min(elems.len()) {
        for combo in itertools::Itertools::combinations(elems.iter().copied(), size) {
            let y: VertexSet = combo.into_iter().collect();
            if t.contains(f, y) {
                continue;
            }
            if let Some(z) = tangle_set_separation(f, t, y)? {
                found.push(z);
            }
        }
    }
    let mut m = minimal_sets(&found);
    m.sort_by(|a, b| a.size_lex_cmp(b));
    Ok(m)
}

/// The contracted tangle `T↓ = {X : X↑ ∈ T}`, or `None` if some contracted
/// part is itself a member (then `T↓` would contain a singleton).
pub fn contract_tangle<F: ConnFn>(t: &Tangle, c: &Contraction<F>) -> Result<Option<Tangle>> {
    let base = c.base();
    for e in c.ground().iter() {
        let p = c.expand_element(e);
        if p.len() > 1 && t.contains(base, p) {
            return Ok(None);
        }
    }
    let ground = c.ground();
    if ground.len() > EXHAUSTIVE_CAP {
        return Err(Error::SearchCap { free: ground.len(), cap: EXHAUSTIVE_CAP });
    }
    let members: Vec<VertexSet> = ground
        .subsets()
        .filter(|&x| c.kappa(x) < t.order && t.has_minimal_below(c.expand(x)))
        .collect();
    Ok(Some(Tangle::normalized(t.order, minimal_sets(&members))))
}

/// `theta(0) = 0`, `theta(i+1) = theta(i) + 3^theta(i)`; `None` once the value
/// no longer fits a `u64`.
pub fn theta(i: usize) -> Option<u64> {
    let mut t: u64 = 0;
    for _ in 0..i {
        let p = 3u64.checked_pow(u32::try_from(t).ok()?)?;
        t = t.checked_add(p)?;
    }
    Some(t)
}

/// `theta(i)` as an exact big integer, for `i` small enough that the value is
/// representable (`theta(4) = 85 + 3^85`); `None` beyond.
pub fn theta_big(i: usize) -> Option<BigUint> {
    let mut t = BigUint::from(0u32);
    for _ in 0..i {
        let e: u32 = u32::try_from(&t).ok().filter(|&e| e <= 100_000)?;
        t = &t + BigUint::from(3u32).pow(e);
    }
    Some(t)
}

/// Is `|Q| <= theta(3k-2)` for a tangle of order `k >= 1`?
pub fn within_theta_bound(q_len: usize, order: usize) -> bool {
    if order == 0 {
        return q_len == 0;
    }
    match theta(3 * order - 2) {
        Some(b) => (q_len as u64) <= b,
        None => true,
    }
}

/// Does `Q` meet every triple intersection of members? Checking minimal
/// members suffices since members are closed upwards within the order bound.
pub fn verify_triple_cover(t: &Tangle, q: VertexSet) -> bool {
    let m = &t.minimal;
    for i in 0..m.len() {
        let a = m[i] & q;
        if a.is_empty() {
            return false;
        }
        for j in i..m.len() {
            let ab = a & m[j];
            if ab.is_empty() {
                return false;
            }
            for c in &m[j..] {
                if (ab & *c).is_empty() {
                    return false;
                }
            }
        }
    }
    true
}

/// The constructive triple cover: `Q_0 = ∅`, and `Q_{i+1}` adds, for every
/// triple `(X_1, X_2, X_3)` of subsets of `Q_i` with empty common
/// intersection, the smallest element of `Y_1 ∩ Y_2 ∩ Y_3`, where `Y_j` is
/// the leftmost minimum member of `T` with `Q_i ∩ Y_j ⊆ X_j`. Returns
/// `Q_{3k-2}`.
///
/// Ranging only over partitions of `Q_i` is not enough: the traces
/// `Q_i ∩ Y_j` of three members can overlap pairwise (the order-2 tangle of
/// `C_5` is a counterexample), so all seven non-full membership patterns per
/// element are used.
pub fn triple_cover(f: &dyn ConnFn, t: &Tangle) -> Result<VertexSet> {
    if t.order == 0 {
        return Ok(VertexSet::EMPTY);
    }
    let mut q = VertexSet::EMPTY;
    for _ in 0..(3 * t.order - 2) {
        let elems: Vec<usize> = q.iter().collect();
        let full = (1usize << elems.len()) - 1;
        let subset = |mask: usize| -> VertexSet {
            elems.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect()
        };
        // best[mask]: leftmost minimum member whose trace on Q lies in subset(mask)
        let mut best: Vec<Option<VertexSet>> = Vec::with_capacity(full + 1);
        for mask in 0..=full {
            let avoid = q - subset(mask);
            let y = if t.contains(f, avoid) { None } else { tangle_set_separation(f, t, avoid)? };
            best.push(y);
        }
        let mut add = VertexSet::EMPTY;
        for a in 0..=full {
            let Some(y1) = best[a] else { continue };
            for b in 0..=full {
                let Some(y2) = best[b] else { continue };
                let y12 = y1 & y2;
                let free = full & !(a & b);
                // all c with a & b & c = 0, i.e. c ⊆ free
                let mut c = free;
                loop {
                    if let Some(y3) = best[c] {
                        match (y12 & y3).min() {
                            Some(y) => add.insert(y),
                            None => {
                                return Err(Error::Invariant("tangle members with empty triple intersection".into()))
                            }
                        }
                    }
                    if c == 0 {
                        break;
                    }
                    c = (c - 1) & free;
                }
            }
        }
        q |= add;
    }
    Ok(q)
}

/// The inclusion-minimal triple intersections of minimal members; `Q` is a
/// triple cover iff it meets each of them.
pub fn triple_intersections(t: &Tangle) -> Vec<VertexSet> {
    let m = &t.minimal;
    let mut all = Vec::new();
    for i in 0..m.len() {
        for j in i..m.len() {
            let ab = m[i] & m[j];
            for c in &m[j..] {
                all.push(ab & *c);
            }
        }
    }
    minimal_sets(&all)
}

/// Outcome of enumerating triple covers for the canonical decomposition.
#[derive(Clone, Debug)]
pub struct CoverFamily {
    pub covers: Vec<VertexSet>,
    /// Set when the size cap prevented finding any cover (or, for
    /// `UpToCap`, when covers larger than the cap were skipped).
    pub cap_event: bool,
}

/// Which triple covers a decomposition inspects. Both policies produce a
/// family that depends only on the tangle, so the construction stays
/// canonical.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverPolicy {
    /// All triple covers of minimum size (if that size is within the cap).
    MinimumSize { cap: usize },
    /// All triple covers of size at most the cap.
    UpToCap { cap: usize },
}

impl Default for CoverPolicy {
    fn default() -> Self {
        CoverPolicy::MinimumSize { cap: 6 }
    }
}

pub fn triple_covers(t: &Tangle, universe: VertexSet, policy: CoverPolicy) -> CoverFamily {
    let hit = triple_intersections(t);
    let (cap, minimum_only) = match policy {
        CoverPolicy::MinimumSize { cap } => (cap, true),
        CoverPolicy::UpToCap { cap } => (cap, false),
    };
    let bound = if t.order == 0 {
        0
    } else {
        theta(3 * t.order - 2).map_or(usize::MAX, |b| b.min(usize::MAX as u64) as usize)
    };
    let limit = cap.min(bound).min(universe.len());
    let elems: Vec<usize> = universe.iter().collect();
    let mut covers = Vec::new();
    for size in 0..=limit {
        for combo in itertools::Itertools::combinations(elems.iter().copied(), size) {
            let q: VertexSet = combo.into_iter().collect();
            if hit.iter().all(|h| h.intersects(q)) {
                covers.push(q);
            }
        }
        if minimum_only && !covers.is_empty() {
            break;
        }
    }
    let cap_event = if minimum_only { covers.is_empty() } else { cap < bound.min(universe.len()) };
    CoverFamily { covers, cap_event }
}
