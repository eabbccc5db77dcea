//! `?`-block matrices: symmetric `{0,1,?}` matrices whose `?`-entries form
//! diagonal blocks, their partition rank, and canonical extension sets.
//!
//! Row and column indices are vertex IDs. A matrix lives on a `support`
//! (all vertices for associated matrices, fewer after [`dedupe`]); entries
//! outside the support are not part of the matrix.

use std::collections::HashMap;

use serde::Serialize;

use crate::decomp::Decomposition;
use crate::error::{Error, Result};
use crate::f2linalg::{rank_of_rows, Graph, VertexSet};

/// Exhaustive partition-rank evaluation is limited to this many `?`-indices.
pub const PARTITION_CAP: usize = 24;

/// Rows whose `?`-index has more elements than this are not expanded into
/// their extensions.
pub const EXTENSION_CAP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QEntry {
    Zero,
    One,
    Q,
}

#[derive(Clone, PartialEq, Eq)]
pub struct QBlockMatrix {
    support: VertexSet,
    /// `ones[v]` has bit `w` iff `p_vw = 1`; never set on `?` positions.
    ones: Vec<u64>,
    indices: Vec<VertexSet>,
    index_of: Vec<Option<usize>>,
}

impl std::fmt::Debug for QBlockMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QBlockMatrix(indices={:?})", self.indices)?;
        for v in self.support.iter() {
            let row: String = self
                .support
                .iter()
                .map(|w| match self.entry(v, w) {
                    QEntry::Zero => '0',
                    QEntry::One => '1',
                    QEntry::Q => '?',
                })
                .collect();
            writeln!(f, "  {v:>2}: {row}")?;
        }
        Ok(())
    }
}

impl QBlockMatrix {
    /// Builds a matrix from its 1-entries and `?`-indices. `ones` is indexed
    /// by vertex ID and may be longer than the support; bits on `?`
    /// positions or outside the support are rejected.
    pub fn new(support: VertexSet, ones: Vec<u64>, indices: Vec<VertexSet>) -> Result<Self> {
        let len = support.max().map_or(0, |m| m + 1);
        if ones.len() < len {
            return Err(Error::Precondition(format!("{} rows given for support {support}", ones.len())));
        }
        let mut index_of: Vec<Option<usize>> = vec![None; ones.len()];
        for (j, &i) in indices.iter().enumerate() {
            if i.is_empty() || !i.is_subset(support) {
                return Err(Error::Precondition(format!("?-index {i} is empty or leaves the support")));
            }
            for v in i.iter() {
                if index_of[v].is_some() {
                    return Err(Error::Overlap(i.to_string(), indices[index_of[v].unwrap()].to_string()));
                }
                index_of[v] = Some(j);
            }
        }
        let mut m = QBlockMatrix { support, ones, indices, index_of };
        for v in 0..m.ones.len() {
            if !support.contains(v) {
                m.ones[v] = 0;
                continue;
            }
            let row = VertexSet(m.ones[v]);
            if !row.is_subset(support) || row.intersects(m.qmask(v)) {
                return Err(Error::Precondition(format!("row {v} has 1-entries outside the support or on ?-entries")));
            }
            for w in row.iter() {
                if m.ones[w] >> v & 1 == 0 {
                    return Err(Error::Precondition(format!("matrix is not symmetric at ({v}, {w})")));
                }
            }
        }
        Ok(m)
    }

    /// The `?`-block matrix associated with node `t` of a treelike
    /// decomposition of `rho_G`: the child cones and the complement of the
    /// cone of `t` are the `?`-indices, all other entries copy adjacency.
    pub fn associated(g: &Graph, d: &Decomposition, t: usize) -> Result<Self> {
        if t >= d.len() {
            return Err(Error::InvalidIndex(t));
        }
        let cone = d.cone(t);
        let mut indices: Vec<VertexSet> = Vec::new();
        let mut seen = VertexSet::EMPTY;
        for &u in d.children(t) {
            let c = d.cone(u);
            if c.intersects(seen) {
                return Err(Error::Precondition(format!(
                    "children of node {t} do not have pairwise disjoint cones ({c} meets {seen})"
                )));
            }
            seen |= c;
            indices.push(c);
        }
        let outside = g.vertices() - cone;
        if !outside.is_empty() {
            indices.push(outside);
        }
        let mut ones = g.adjacency().to_vec();
        for &i in &indices {
            for v in i.iter() {
                ones[v] &= !i.0;
            }
        }
        QBlockMatrix::new(g.vertices(), ones, indices)
    }

    pub fn support(&self) -> VertexSet {
        self.support
    }

    pub fn indices(&self) -> &[VertexSet] {
        &self.indices
    }

    pub fn index_of(&self, v: usize) -> Option<usize> {
        self.index_of.get(v).copied().flatten()
    }

    /// The `?`-positions of row `v`.
    pub fn qmask(&self, v: usize) -> VertexSet {
        self.index_of(v).map_or(VertexSet::EMPTY, |j| self.indices[j])
    }

    pub fn ones(&self, v: usize) -> VertexSet {
        VertexSet(self.ones[v])
    }

    pub fn entry(&self, v: usize, w: usize) -> QEntry {
        if self.qmask(v).contains(w) {
            QEntry::Q
        } else if self.ones[v] >> w & 1 == 1 {
            QEntry::One
        } else {
            QEntry::Zero
        }
    }

    /// Do rows `v` and `w` have a common extension?
    pub fn compatible(&self, v: usize, w: usize) -> bool {
        let fixed = self.support - self.qmask(v) - self.qmask(w);
        (self.ones[v] ^ self.ones[w]) & fixed.0 == 0
    }

    /// Is the `{0,1}`-vector `x` (a word over the support) an extension of
    /// row `v`?
    pub fn is_extension(&self, x: u64, v: usize) -> bool {
        let fixed = self.support - self.qmask(v);
        x & !self.support.0 == 0 && (x ^ self.ones[v]) & fixed.0 == 0
    }

    /// All extensions of row `v`, in increasing order.
    pub fn extensions(&self, v: usize) -> Result<Vec<u64>> {
        let q = self.qmask(v);
        if q.len() > EXTENSION_CAP {
            return Err(Error::SearchCap { free: q.len(), cap: EXTENSION_CAP });
        }
        let mut out: Vec<u64> = q.subsets().map(|s| self.ones[v] | s.0).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Rank over GF(2) of the submatrix with rows in the indices `b` and
    /// columns in the indices `c` (given as positions in [`Self::indices`]).
    pub fn block_rank(&self, b: &[usize], c: &[usize]) -> usize {
        let cols = c.iter().fold(VertexSet::EMPTY, |a, &j| a | self.indices[j]);
        let rows = b.iter().fold(VertexSet::EMPTY, |a, &j| a | self.indices[j]);
        rank_of_rows(rows.iter().map(|v| self.ones[v] & cols.0))
    }

    /// The matrix with rows and columns renamed by `pi` (`pi[v]` is the new
    /// name of `v`); the indices keep their order.
    pub fn permute(&self, pi: &[usize]) -> QBlockMatrix {
        let mut ones = vec![0u64; pi.len().max(self.ones.len())];
        for v in self.support.iter() {
            ones[pi[v]] = VertexSet(self.ones[v]).map(pi).0;
        }
        let indices = self.indices.iter().map(|i| i.map(pi)).collect();
        QBlockMatrix::new(self.support.map(pi), ones, indices).expect("renaming preserves the block structure")
    }
}

/// The partition rank: the largest rank of `P_{B, B̄}` over all
/// bipartitions of the `?`-indices. Rows outside every index take no part.
pub fn partition_rank(p: &QBlockMatrix) -> Result<usize> {
    partition_rank_capped(p, PARTITION_CAP)
}

pub fn partition_rank_capped(p: &QBlockMatrix, cap: usize) -> Result<usize> {
    let m = p.indices.len();
    if m > cap {
        return Err(Error::SearchCap { free: m, cap });
    }
    if m < 2 {
        return Ok(0);
    }
    let all = p.indices.iter().fold(VertexSet::EMPTY, |a, &i| a | i);
    let mut best = 0;
    // rank(P_{B,B̄}) = rank(P_{B̄,B}), so the last index may stay in B̄
    for mask in 0u64..(1u64 << (m - 1)) {
        let rows = (0..m - 1).filter(|&j| mask >> j & 1 == 1).fold(VertexSet::EMPTY, |a, j| a | p.indices[j]);
        let cols = all - rows;
        best = best.max(rank_of_rows(rows.iter().map(|v| p.ones[v] & cols.0)));
    }
    Ok(best)
}

/// A matrix with repeated rows (and hence, by symmetry, repeated columns)
/// merged into the one with the smallest index.
#[derive(Clone, Debug)]
pub struct Deduped {
    pub matrix: QBlockMatrix,
    /// `rep[v]` is the surviving copy of row `v` (`v` itself if it survived);
    /// `usize::MAX` outside the support.
    pub rep: Vec<usize>,
}

impl Deduped {
    /// Copies the surviving coordinates of `x` to the merged ones.
    pub fn lift(&self, x: u64) -> u64 {
        self.rep
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r != usize::MAX && x >> r & 1 == 1)
            .fold(0, |acc, (v, _)| acc | 1u64 << v)
    }
}

pub fn dedupe(p: &QBlockMatrix) -> Deduped {
    let mut rep = vec![usize::MAX; p.ones.len()];
    let mut first: HashMap<(u64, Option<usize>), usize> = HashMap::new();
    for v in p.support.iter() {
        // rows with equal 1-entries and the same ?-index are equal rows;
        // rows with different ?-indices always differ somewhere
        rep[v] = *first.entry((p.ones[v], p.index_of(v))).or_insert(v);
    }
    let kept: VertexSet = p.support.iter().filter(|&v| rep[v] == v).collect();
    let ones: Vec<u64> = p.ones.iter().map(|&r| r & kept.0).collect();
    let indices: Vec<VertexSet> = p.indices.iter().map(|&i| i & kept).collect();
    let matrix = QBlockMatrix::new(kept, ones, indices).expect("merging equal rows keeps the block structure");
    Deduped { matrix, rep }
}

/// A canonical extension set: every row has an extension in `vectors`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionSet {
    /// Extension vectors over the support, in increasing numeric order.
    pub vectors: Vec<u64>,
    /// `members[v]` lists the positions in `vectors` of the extensions of
    /// row `v` (empty outside the support).
    pub members: Vec<Vec<usize>>,
    /// The partition-rank bound the construction used.
    pub k: usize,
    pub lonely_rows: usize,
    pub supported: usize,
}

impl ExtensionSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// The extension set of `P` for its own partition rank.
pub fn extension_set(p: &QBlockMatrix) -> Result<ExtensionSet> {
    let k = partition_rank(p)?;
    extension_set_for_rank(p, k)
}

/// All extensions of lonely rows together with all supported extensions,
/// computed on the deduplicated matrix and lifted back. A row is lonely if
/// fewer than `(k+1) 2^k` other rows are compatible with it; an extension is
/// supported if it extends at least `k+2` rows.
pub fn extension_set_for_rank(p: &QBlockMatrix, k: usize) -> Result<ExtensionSet> {
    if k >= 6 {
        return Err(Error::Precondition(format!("partition rank {k} is too large for extension sets")));
    }
    let dd = dedupe(p);
    let q = &dd.matrix;
    let block_cap = 1usize << k;
    for &i in q.indices() {
        if i.len() > block_cap {
            return Err(Error::Invariant(format!(
                "?-index {i} has {} distinct rows, more than 2^{k} (is the partition rank above {k}?)",
                i.len()
            )));
        }
    }
    let rows = q.support().to_vec();
    let g = (k + 1) << k;
    let mut count: HashMap<u64, usize> = HashMap::new();
    let mut chosen: Vec<u64> = Vec::new();
    let mut lonely_rows = 0;
    for &v in &rows {
        let ext = q.extensions(v)?;
        for &x in &ext {
            *count.entry(x).or_default() += 1;
        }
        let compatible = rows.iter().filter(|&&w| w != v && q.compatible(v, w)).count();
        if compatible < g {
            lonely_rows += 1;
            chosen.extend(ext);
        }
    }
    let supported: Vec<u64> = count.iter().filter(|&(_, &c)| c >= k + 2).map(|(&x, _)| x).collect();
    if supported.len() > block_cap {
        return Err(Error::Invariant(format!("{} supported extensions exceed 2^{k}", supported.len())));
    }
    let n_supported = supported.len();
    chosen.extend(supported);
    let mut vectors: Vec<u64> = chosen.into_iter().map(|x| dd.lift(x)).collect();
    vectors.sort_unstable();
    vectors.dedup();
    let mut members = vec![Vec::new(); p.ones.len()];
    for v in p.support().iter() {
        members[v] = (0..vectors.len()).filter(|&i| p.is_extension(vectors[i], v)).collect();
        if members[v].is_empty() {
            return Err(Error::Invariant(format!("row {v} has no extension in the extension set")));
        }
    }
    Ok(ExtensionSet { vectors, members, k, lonely_rows, supported: n_supported })
}
