//! Bit-packed GF(2) linear algebra, vertex sets and the cut-rank function.
//!
//! Ground sets are limited to 64 elements so that every subset fits in a
//! single machine word. That is far beyond what the exhaustive parts of the
//! pipeline can handle anyway.

use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, BitXor, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_GROUND: usize = 64;

/// A subset of a ground set `{0, .., n-1}` with `n <= 64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    #[inline]
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_GROUND);
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    #[inline]
    pub fn singleton(i: usize) -> Self {
        VertexSet(1u64 << i)
    }

    pub fn from_slice(items: &[usize]) -> Self {
        items.iter().copied().collect()
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        VertexSet(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        VertexSet(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: VertexSet) -> bool {
        self.0 & other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: VertexSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Complement relative to the ground set `{0, .., n-1}`.
    #[inline]
    pub fn complement(self, n: usize) -> Self {
        VertexSet(!self.0 & VertexSet::full(n).0)
    }

    /// Complement relative to an arbitrary ground mask.
    #[inline]
    pub fn complement_in(self, ground: VertexSet) -> Self {
        VertexSet(!self.0 & ground.0)
    }

    #[inline]
    pub fn min(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    #[inline]
    pub fn max(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros() as usize)
        }
    }

    /// Elements in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, starting with the empty set and ending with
    /// `self`, in increasing order of the underlying word.
    pub fn subsets(self) -> Subsets {
        Subsets { mask: self.0, cur: 0, done: false }
    }

    /// Order by size first, then lexicographically by the sorted element list.
    pub fn size_lex_cmp(&self, other: &VertexSet) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.lex_cmp(other))
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(&self, other: &VertexSet) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }

    /// Apply a vertex map to every element.
    pub fn map(self, f: &[usize]) -> VertexSet {
        self.iter().map(|i| f[i]).collect()
    }
}

pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

pub struct Subsets {
    mask: u64,
    cur: u64,
    done: bool,
}

impl Iterator for Subsets {
    type Item = VertexSet;

    #[inline]
    fn next(&mut self) -> Option<VertexSet> {
        if self.done {
            return None;
        }
        let out = self.cur;
        if out == self.mask {
            self.done = true;
        } else {
            self.cur = (self.cur.wrapping_sub(self.mask)) & self.mask;
        }
        Some(VertexSet(out))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl BitOr for VertexSet {
    type Output = VertexSet;
    #[inline]
    fn bitor(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 | rhs.0)
    }
}

impl BitOrAssign for VertexSet {
    #[inline]
    fn bitor_assign(&mut self, rhs: VertexSet) {
        self.0 |= rhs.0;
    }
}

impl BitAnd for VertexSet {
    type Output = VertexSet;
    #[inline]
    fn bitand(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & rhs.0)
    }
}

impl BitAndAssign for VertexSet {
    #[inline]
    fn bitand_assign(&mut self, rhs: VertexSet) {
        self.0 &= rhs.0;
    }
}

impl BitXor for VertexSet {
    type Output = VertexSet;
    #[inline]
    fn bitxor(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 ^ rhs.0)
    }
}

/// Set difference.
impl Sub for VertexSet {
    type Output = VertexSet;
    #[inline]
    fn sub(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & !rhs.0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// A simple undirected graph on at most 64 vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_GROUND {
            return Err(Error::GroundTooLarge(n));
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Builds a graph from adjacency words, symmetrising nothing: the caller
    /// must provide a valid symmetric loop-free adjacency.
    pub fn from_adjacency(adj: Vec<u64>) -> Result<Self> {
        let n = adj.len();
        if n > MAX_GROUND {
            return Err(Error::GroundTooLarge(n));
        }
        let mask = VertexSet::full(n).0;
        for (v, &row) in adj.iter().enumerate() {
            if row & !mask != 0 {
                return Err(Error::Precondition(format!("vertex {v} has a neighbour outside the graph")));
            }
            if row >> v & 1 == 1 {
                return Err(Error::Precondition(format!("self-loop at vertex {v}")));
            }
            for u in VertexSet(row).iter() {
                if adj[u] >> v & 1 == 0 {
                    return Err(Error::Precondition(format!("adjacency is not symmetric at {v},{u}")));
                }
            }
        }
        Ok(Graph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::Precondition(format!("edge {u}-{v} outside vertex range 0..{}", self.n)));
        }
        if u == v {
            return Err(Error::Precondition(format!("self-loop at vertex {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::Precondition(format!("duplicate edge {u}-{v}")));
        }
        self.adj[u] |= 1u64 << v;
        self.adj[v] |= 1u64 << u;
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> VertexSet {
        VertexSet(self.adj[v])
    }

    #[inline]
    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in VertexSet(self.adj[u]).iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// The graph `pi(G)`: vertex `v` becomes `pi[v]`.
    pub fn permute(&self, pi: &[usize]) -> Graph {
        let mut adj = vec![0u64; self.n];
        for v in 0..self.n {
            adj[pi[v]] = VertexSet(self.adj[v]).map(pi).0;
        }
        Graph { n: self.n, adj }
    }

    pub fn complement(&self) -> Graph {
        let full = VertexSet::full(self.n).0;
        let adj = (0..self.n).map(|v| !self.adj[v] & full & !(1u64 << v)).collect();
        Graph { n: self.n, adj }
    }

    /// Connected components, each as a vertex set, ordered by least vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = VertexSet::EMPTY;
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen.contains(s) {
                continue;
            }
            let mut comp = VertexSet::singleton(s);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VertexSet::EMPTY;
                for v in frontier.iter() {
                    next |= VertexSet(self.adj[v]);
                }
                frontier = next - comp;
                comp |= next;
            }
            seen |= comp;
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

/// A dense GF(2) matrix with at most 64 columns; row `i` is a word whose bit
/// `j` is the entry in column `j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct F2Matrix {
    pub rows: Vec<u64>,
    pub ncols: usize,
    /// External labels of the rows (vertex IDs for cut matrices).
    pub row_ids: Vec<usize>,
    /// External labels of the columns.
    pub col_ids: Vec<usize>,
}

impl F2Matrix {
    pub fn new(rows: Vec<u64>, ncols: usize) -> Self {
        assert!(ncols <= 64, "at most 64 columns are supported");
        let mask = VertexSet::full(ncols).0;
        assert!(rows.iter().all(|r| r & !mask == 0), "row longer than ncols");
        let row_ids = (0..rows.len()).collect();
        let col_ids = (0..ncols).collect();
        F2Matrix { rows, ncols, row_ids, col_ids }
    }

    pub fn from_bools(entries: &[Vec<bool>], ncols: usize) -> Self {
        let rows = entries
            .iter()
            .map(|r| r.iter().enumerate().fold(0u64, |acc, (j, &b)| acc | (b as u64) << j))
            .collect();
        F2Matrix::new(rows, ncols)
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn transpose(&self) -> F2Matrix {
        assert!(self.rows.len() <= 64, "transpose needs at most 64 rows");
        let mut t = vec![0u64; self.ncols];
        for (i, &r) in self.rows.iter().enumerate() {
            for j in VertexSet(r).iter() {
                t[j] |= 1u64 << i;
            }
        }
        F2Matrix {
            rows: t,
            ncols: self.rows.len(),
            row_ids: self.col_ids.clone(),
            col_ids: self.row_ids.clone(),
        }
    }
}

/// Row rank of a list of GF(2) row words.
pub fn rank_of_rows(rows: impl IntoIterator<Item = u64>) -> usize {
    // basis[b] holds a reduced vector whose highest set bit is b
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for mut r in rows {
        while r != 0 {
            let b = 63 - r.leading_zeros() as usize;
            if basis[b] == 0 {
                basis[b] = r;
                rank += 1;
                break;
            }
            r ^= basis[b];
        }
    }
    rank
}

pub fn f2_rank(m: &F2Matrix) -> usize {
    rank_of_rows(m.rows.iter().copied())
}

/// The `X x Y` biadjacency matrix of `g`, rows and columns in ascending
/// vertex order.
pub fn cut_matrix(g: &Graph, x: VertexSet, y: VertexSet) -> Result<F2Matrix> {
    if x.intersects(y) {
        return Err(Error::Overlap(x.to_string(), y.to_string()));
    }
    let cols: Vec<usize> = y.to_vec();
    let rows = x
        .iter()
        .map(|v| {
            cols.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &c)| acc | (g.has_edge(v, c) as u64) << j)
        })
        .collect();
    Ok(F2Matrix { rows, ncols: cols.len(), row_ids: x.to_vec(), col_ids: cols })
}

/// Cut rank of `x` in the subgraph induced by `support` (use the full vertex
/// set for the ordinary cut-rank function).
#[inline]
pub fn cut_rank_within(g: &Graph, support: VertexSet, x: VertexSet) -> usize {
    let x = x & support;
    let other = (support - x).0;
    rank_of_rows(x.iter().map(|v| g.adj[v] & other))
}

/// `rho_G(X)`: GF(2) rank of the biadjacency matrix between `X` and its
/// complement.
#[inline]
pub fn cut_rank(g: &Graph, x: VertexSet) -> usize {
    cut_rank_within(g, g.vertices(), x)
}
