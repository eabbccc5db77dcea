//! Directed (treelike) decompositions: validation, bags and width,
//! normalisation, conversion to and from branch decompositions, and the
//! directed tree decomposition distinguishing the maximal tangles.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::connfn::ConnFn;
use crate::error::{Error, Result};
use crate::f2linalg::VertexSet;
use crate::tangleset::TangleStore;

/// Default cap on the number of set evaluations per node (as a power of two).
pub const WIDTH_EVAL_CAP: usize = 22;

/// A directed graph with a cone at every node. Bags are derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    ground: VertexSet,
    cones: Vec<VertexSet>,
    children: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    /// TL.1–TL.3.
    Partial,
    /// TL.1–TL.4.
    Treelike,
    /// Treelike, `D` a directed tree and sibling cones disjoint.
    Tree,
    /// Treelike plus NTL.1–NTL.4.
    Normal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: &'static str,
    pub node: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(t) => write!(f, "{} violated at node {}: {}", self.axiom, t, self.detail),
            None => write!(f, "{} violated: {}", self.axiom, self.detail),
        }
    }
}

fn violation(axiom: &'static str, node: Option<usize>, detail: impl Into<String>) -> Violation {
    Violation { axiom, node, detail: detail.into() }
}

#[derive(Serialize)]
pub struct NodeJson {
    pub id: usize,
    pub cone: VertexSet,
    pub bag: VertexSet,
    pub children: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

#[derive(Serialize)]
pub struct DecompositionJson {
    pub ground: VertexSet,
    pub width: Option<usize>,
    pub nodes: Vec<NodeJson>,
}

impl Decomposition {
    pub fn new(ground: VertexSet) -> Self {
        Decomposition { ground, cones: Vec::new(), children: Vec::new() }
    }

    /// A root with cone `ground` and one singleton leaf per element.
    pub fn star(ground: VertexSet) -> Self {
        let mut d = Decomposition::new(ground);
        let r = d.add_node(ground);
        if ground.len() > 1 {
            for v in ground.iter() {
                let l = d.add_node(VertexSet::singleton(v));
                d.add_edge(r, l);
            }
        }
        d
    }

    pub fn ground(&self) -> VertexSet {
        self.ground
    }

    pub fn add_node(&mut self, cone: VertexSet) -> usize {
        self.cones.push(cone);
        self.children.push(Vec::new());
        self.cones.len() - 1
    }

    pub fn add_edge(&mut self, t: usize, u: usize) {
        if !self.children[t].contains(&u) {
            self.children[t].push(u);
        }
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn cone(&self, t: usize) -> VertexSet {
        self.cones[t]
    }

    pub fn cones(&self) -> &[VertexSet] {
        &self.cones
    }

    pub fn children(&self, t: usize) -> &[usize] {
        &self.children[t]
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn parents(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (t, cs) in self.children.iter().enumerate() {
            for &u in cs {
                p[u].push(t);
            }
        }
        p
    }

    pub fn roots(&self) -> Vec<usize> {
        let p = self.parents();
        (0..self.len()).filter(|&t| p[t].is_empty()).collect()
    }

    pub fn is_leaf(&self, t: usize) -> bool {
        self.children[t].is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&t| self.is_leaf(t)).collect()
    }

    pub fn bag(&self, t: usize) -> VertexSet {
        let below = self.children[t].iter().fold(VertexSet::EMPTY, |acc, &u| acc | self.cones[u]);
        self.cones[t] - below
    }

    /// Topological order (parents before children), or `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for cs in &self.children {
            for &u in cs {
                indeg[u] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n).rev().filter(|&t| indeg[t] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(t) = stack.pop() {
            order.push(t);
            for &u in self.children[t].iter().rev() {
                indeg[u] -= 1;
                if indeg[u] == 0 {
                    stack.push(u);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Checks the axioms of `level`; the first violation found is returned.
    pub fn validate(&self, level: Level) -> std::result::Result<(), Violation> {
        let n = self.len();
        for t in 0..n {
            if !self.cones[t].is_subset(self.ground) {
                return Err(violation("ground", Some(t), "cone leaves the ground set"));
            }
            for &u in &self.children[t] {
                if u >= n {
                    return Err(violation("structure", Some(t), format!("edge to missing node {u}")));
                }
            }
        }
        if self.topological_order().is_none() {
            return Err(violation("TL.1", None, "the graph has a cycle"));
        }
        for t in 0..n {
            for &u in &self.children[t] {
                if !self.cones[u].is_subset(self.cones[t]) {
                    return Err(violation("TL.2", Some(t), format!("child {u} has a larger cone")));
                }
            }
            let cs = &self.children[t];
            for (i, &a) in cs.iter().enumerate() {
                for &b in &cs[i + 1..] {
                    let (x, y) = (self.cones[a], self.cones[b]);
                    if x != y && x.intersects(y) {
                        return Err(violation("TL.3", Some(t), format!("children {a} and {b} cross")));
                    }
                }
            }
        }
        if level == Level::Partial {
            return Ok(());
        }
        if !self.cones.contains(&self.ground) {
            return Err(violation("TL.4", None, "no node has the full cone"));
        }
        if level == Level::Treelike {
            return Ok(());
        }
        if level == Level::Tree {
            let parents = self.parents();
            let roots = self.roots();
            if roots.len() != 1 || parents.iter().any(|p| p.len() > 1) {
                return Err(violation("tree", None, "not a directed tree"));
            }
            for t in 0..n {
                let cs = &self.children[t];
                for (i, &a) in cs.iter().enumerate() {
                    for &b in &cs[i + 1..] {
                        if self.cones[a].intersects(self.cones[b]) {
                            return Err(violation("tree", Some(t), format!("children {a} and {b} overlap")));
                        }
                    }
                }
            }
            return Ok(());
        }
        for t in 0..n {
            let bag = self.bag(t);
            if !self.is_leaf(t) && !bag.is_empty() {
                return Err(violation("NTL.1", Some(t), format!("inner node with bag {bag}")));
            }
            if self.is_leaf(t) && bag.len() != 1 {
                return Err(violation("NTL.2", Some(t), format!("leaf with bag {bag}")));
            }
            let cs = &self.children[t];
            let all_equal = cs.iter().all(|&u| self.cones[u] == self.cones[cs[0]]);
            let all_disjoint =
                cs.iter().enumerate().all(|(i, &a)| cs[i + 1..].iter().all(|&b| self.cones[a].is_disjoint(self.cones[b])));
            if !cs.is_empty() && !all_equal && !all_disjoint {
                return Err(violation("NTL.3", Some(t), "children mix equal and disjoint cones"));
            }
        }
        if self.roots().len() != 1 {
            return Err(violation("NTL.4", None, format!("{} roots", self.roots().len())));
        }
        Ok(())
    }

    /// Width at node `t`: the maximum of `kappa` over unions of a subset of
    /// the bag with a subset of the child cones.
    pub fn node_width(&self, f: &dyn ConnFn, t: usize, cap: usize) -> Result<usize> {
        let bag = self.bag(t);
        let mut cones: Vec<VertexSet> = self.children[t].iter().map(|&u| self.cones[u]).collect();
        cones.sort();
        cones.dedup();
        let exponent = bag.len() + cones.len();
        if exponent > cap {
            return Err(Error::WidthCap { node: t, exponent, cap });
        }
        let bag_elems = bag.to_vec();
        let mut best = 0;
        for mask in 0u64..(1u64 << exponent) {
            let mut x = VertexSet::EMPTY;
            for (i, &v) in bag_elems.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    x.insert(v);
                }
            }
            for (j, &c) in cones.iter().enumerate() {
                if mask >> (bag_elems.len() + j) & 1 == 1 {
                    x |= c;
                }
            }
            best = best.max(f.kappa(x));
        }
        Ok(best)
    }

    pub fn width(&self, f: &dyn ConnFn) -> Result<usize> {
        self.width_capped(f, WIDTH_EVAL_CAP)
    }

    pub fn width_capped(&self, f: &dyn ConnFn, cap: usize) -> Result<usize> {
        let mut w = 0;
        for t in 0..self.len() {
            w = w.max(self.node_width(f, t, cap)?);
        }
        Ok(w)
    }

    /// Keeps only the nodes satisfying `keep`, with edges among them.
    fn retain(&self, keep: &[bool]) -> Decomposition {
        let mut map = vec![usize::MAX; self.len()];
        let mut out = Decomposition::new(self.ground);
        for t in 0..self.len() {
            if keep[t] {
                map[t] = out.add_node(self.cones[t]);
            }
        }
        for t in 0..self.len() {
            if keep[t] {
                for &u in &self.children[t] {
                    if keep[u] {
                        out.add_edge(map[t], map[u]);
                    }
                }
            }
        }
        out
    }

    /// Normal form of a treelike decomposition with the same width.
    ///
    /// Nodes with empty cones are dropped first (they contribute nothing to
    /// any width and would otherwise be leaves with empty bags). Then bags are
    /// pushed into singleton leaves, children with repeated cones are grouped
    /// under fresh nodes, and roots without the full cone are removed
    /// before a fresh root is added. The last step is skipped when the input
    /// already has a unique root with the full cone.
    pub fn normalize(&self) -> Decomposition {
        self.normalize_with(true)
    }

    /// As [`Decomposition::normalize`], optionally leaving the roots alone.
    pub fn normalize_with(&self, fix_root: bool) -> Decomposition {
        self.normalize_impl(fix_root, false)
    }

    /// Normalizes everything below the roots: the roots keep their bags and
    /// are not replaced. Used for partial decompositions whose root bag is
    /// resolved elsewhere.
    pub fn normalize_keep_root_bag(&self) -> Decomposition {
        self.normalize_impl(false, true)
    }

    fn normalize_impl(&self, fix_root: bool, keep_root_bag: bool) -> Decomposition {
        let keep: Vec<bool> = self.cones.iter().map(|c| !c.is_empty()).collect();
        let mut d = self.retain(&keep);

        // bags of inner nodes and oversized leaf bags go to singleton leaves
        let n = d.len();
        let parents = d.parents();
        for t in 0..n {
            if keep_root_bag && parents[t].is_empty() {
                continue;
            }
            let bag = d.bag(t);
            if (!d.is_leaf(t) && !bag.is_empty()) || (d.is_leaf(t) && bag.len() > 1) {
                for x in bag.iter() {
                    let l = d.add_node(VertexSet::singleton(x));
                    d.add_edge(t, l);
                }
            }
        }

        // group children when equal and disjoint cones are mixed
        let n = d.len();
        for t in 0..n {
            let cs = d.children[t].clone();
            let mut groups: BTreeMap<VertexSet, Vec<usize>> = BTreeMap::new();
            for &u in &cs {
                groups.entry(d.cones[u]).or_default().push(u);
            }
            let repeated = groups.values().any(|g| g.len() > 1);
            if repeated && groups.len() > 1 {
                d.children[t].clear();
                for (cone, members) in groups {
                    let g = d.add_node(cone);
                    d.add_edge(t, g);
                    for u in members {
                        d.add_edge(g, u);
                    }
                }
            }
        }

        if !fix_root {
            return d;
        }
        let roots = d.roots();
        if roots.len() == 1 && d.cones[roots[0]] == d.ground {
            return d;
        }
        // repeatedly remove roots whose cone is not the full set
        let mut alive = vec![true; d.len()];
        let mut indeg = vec![0usize; d.len()];
        for cs in &d.children {
            for &u in cs {
                indeg[u] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..d.len()).filter(|&t| indeg[t] == 0 && d.cones[t] != d.ground).collect();
        while let Some(t) = stack.pop() {
            alive[t] = false;
            for &u in &d.children[t] {
                indeg[u] -= 1;
                if indeg[u] == 0 && d.cones[u] != d.ground {
                    stack.push(u);
                }
            }
        }
        let mut out = d.retain(&alive);
        let old_roots = out.roots();
        let r = out.add_node(out.ground);
        for t in old_roots {
            out.add_edge(r, t);
        }
        out
    }

    /// Unfolds a treelike decomposition into a directed tree decomposition
    /// (duplicating shared subtrees, then keeping one child per repeated
    /// cone). Exponential in general, so the node count is capped.
    pub fn unfold_to_tree(&self, node_cap: usize) -> Result<Decomposition> {
        let start = (0..self.len())
            .find(|&t| self.cones[t] == self.ground)
            .ok_or_else(|| Error::Precondition("no node with the full cone".into()))?;
        let mut out = Decomposition::new(self.ground);
        let root = out.add_node(self.ground);
        let mut stack = vec![(start, root)];
        while let Some((t, copy)) = stack.pop() {
            let mut seen: Vec<VertexSet> = Vec::new();
            for &u in &self.children[t] {
                if seen.contains(&self.cones[u]) {
                    continue;
                }
                seen.push(self.cones[u]);
                if out.len() >= node_cap {
                    return Err(Error::SearchCap { free: out.len(), cap: node_cap });
                }
                let c = out.add_node(self.cones[u]);
                out.add_edge(copy, c);
                stack.push((u, c));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self, f: Option<&dyn ConnFn>) -> Result<DecompositionJson> {
        self.to_json_capped(f, WIDTH_EVAL_CAP)
    }

    /// As [`Decomposition::to_json`], with the per-node evaluation cap
    /// `2^cap` for the widths.
    pub fn to_json_capped(&self, f: Option<&dyn ConnFn>, cap: usize) -> Result<DecompositionJson> {
        let mut nodes = Vec::with_capacity(self.len());
        let mut overall = None;
        for t in 0..self.len() {
            let width = match f {
                Some(f) => Some(self.node_width(f, t, cap)?),
                None => None,
            };
            if let Some(w) = width {
                overall = Some(overall.map_or(w, |o: usize| o.max(w)));
            }
            nodes.push(NodeJson { id: t, cone: self.cones[t], bag: self.bag(t), children: self.children[t].clone(), width });
        }
        Ok(DecompositionJson { ground: self.ground, width: overall, nodes })
    }
}

/// A cubic tree with the ground set in bijection with its leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchDecomposition {
    pub adj: Vec<Vec<usize>>,
    /// `leaf[v]` is the element at node `v`, for leaves.
    pub leaf: Vec<Option<usize>>,
}

impl BranchDecomposition {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn ground(&self) -> VertexSet {
        self.leaf.iter().flatten().copied().collect()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.len();
        let leaves: Vec<usize> = self.leaf.iter().flatten().copied().collect();
        let set: VertexSet = leaves.iter().copied().collect();
        if set.len() != leaves.len() {
            return Err("two leaves carry the same element".into());
        }
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        if n > 0 && edges != n - 1 {
            return Err("not a tree".into());
        }
        for v in 0..n {
            match (self.adj[v].len(), self.leaf[v]) {
                (d, Some(_)) if d <= 1 => {}
                (3, None) => {}
                (d, l) => return Err(format!("node {v} has degree {d} and label {l:?}")),
            }
        }
        // connectivity
        if n > 0 {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err("not connected".into());
            }
        }
        Ok(())
    }

    /// Elements on `t`'s side of the edge `{s, t}`.
    pub fn side(&self, s: usize, t: usize) -> VertexSet {
        let mut out = VertexSet::EMPTY;
        let mut stack = vec![(t, s)];
        while let Some((v, from)) = stack.pop() {
            if let Some(e) = self.leaf[v] {
                out.insert(e);
            }
            for &w in &self.adj[v] {
                if w != from {
                    stack.push((w, v));
                }
            }
        }
        out
    }

    pub fn width(&self, f: &dyn ConnFn) -> usize {
        let mut w = 0;
        for s in 0..self.len() {
            for &t in &self.adj[s] {
                w = w.max(f.kappa(self.side(s, t)));
            }
        }
        w
    }

    /// A caterpillar over the elements in ascending order.
    pub fn caterpillar(ground: VertexSet) -> BranchDecomposition {
        let elems = ground.to_vec();
        let n = elems.len();
        let mut adj: Vec<Vec<usize>> = Vec::new();
        let mut leaf: Vec<Option<usize>> = Vec::new();
        let new_node = |adj: &mut Vec<Vec<usize>>, leaf: &mut Vec<Option<usize>>, l: Option<usize>| {
            adj.push(Vec::new());
            leaf.push(l);
            adj.len() - 1
        };
        if n == 0 {
            return BranchDecomposition { adj, leaf };
        }
        if n <= 2 {
            let a = new_node(&mut adj, &mut leaf, Some(elems[0]));
            if n == 2 {
                let b = new_node(&mut adj, &mut leaf, Some(elems[1]));
                adj[a].push(b);
                adj[b].push(a);
            }
            return BranchDecomposition { adj, leaf };
        }
        // spine of n-2 inner nodes
        let spine: Vec<usize> = (0..n - 2).map(|_| new_node(&mut adj, &mut leaf, None)).collect();
        for w in spine.windows(2) {
            adj[w[0]].push(w[1]);
            adj[w[1]].push(w[0]);
        }
        let attach = |adj: &mut Vec<Vec<usize>>, leaf: &mut Vec<Option<usize>>, s: usize, e: usize| {
            let l = new_node(adj, leaf, Some(e));
            adj[s].push(l);
            adj[l].push(s);
        };
        attach(&mut adj, &mut leaf, spine[0], elems[0]);
        for (i, &s) in spine.iter().enumerate() {
            attach(&mut adj, &mut leaf, s, elems[i + 1]);
        }
        attach(&mut adj, &mut leaf, spine[n - 3], elems[n - 1]);
        BranchDecomposition { adj, leaf }
    }
}

/// Subdivides a canonical edge of a branch decomposition and directs the tree
/// away from the new root. The subdivided edge is the one whose two sides
/// have the lexicographically least pair of minimum elements.
pub fn branch_to_tree(b: &BranchDecomposition) -> Result<Decomposition> {
    let ground = b.ground();
    if ground.len() < 2 {
        return Err(Error::Precondition("branch decompositions need at least two elements".into()));
    }
    let mut best: Option<((usize, usize), (usize, usize))> = None;
    for s in 0..b.len() {
        for &t in &b.adj[s] {
            if s < t {
                let (x, y) = (b.side(t, s).min().unwrap(), b.side(s, t).min().unwrap());
                let key = (x.min(y), x.max(y));
                if best.map_or(true, |(k, _)| key < k) {
                    best = Some((key, (s, t)));
                }
            }
        }
    }
    let (_, (s0, t0)) = best.expect("a tree with two leaves has an edge");
    let mut d = Decomposition::new(ground);
    let r = d.add_node(ground);
    let mut stack = vec![(s0, t0, r), (t0, s0, r)];
    while let Some((v, from, parent)) = stack.pop() {
        let id = d.add_node(b.side(from, v));
        d.add_edge(parent, id);
        for &w in &b.adj[v] {
            if w != from {
                stack.push((w, v, id));
            }
        }
    }
    Ok(d)
}

/// Turns a directed tree decomposition into a branch decomposition of at
/// most the same width: normalise, splice out unary nodes, split nodes with
/// three or more children into halves (children ordered by their least
/// element), and finally undo the root subdivision.
pub fn tree_to_branch(d: &Decomposition) -> Result<BranchDecomposition> {
    if d.ground.len() < 2 {
        return Err(Error::Precondition("branch decompositions need at least two elements".into()));
    }
    d.validate(Level::Tree).map_err(|v| Error::Precondition(v.to_string()))?;
    let nd = d.normalize();

    // Build a binary tree as nested structure: each node is a leaf element or
    // a pair of subtrees.
    enum Bin {
        Leaf(usize),
        Pair(Box<Bin>, Box<Bin>),
    }
    fn build(nd: &Decomposition, t: usize) -> Bin {
        let mut cs: Vec<usize> = nd.children(t).to_vec();
        if cs.is_empty() {
            return Bin::Leaf(nd.cone(t).min().unwrap());
        }
        if cs.len() == 1 {
            return build(nd, cs[0]);
        }
        cs.sort_by_key(|&u| nd.cone(u).min());
        let subs: Vec<Bin> = cs.into_iter().map(|u| build(nd, u)).collect();
        fn split(mut v: Vec<Bin>) -> Bin {
            if v.len() == 1 {
                return v.pop().unwrap();
            }
            let right = v.split_off(v.len() / 2);
            Bin::Pair(Box::new(split(v)), Box::new(split(right)))
        }
        split(subs)
    }
    let root = nd.roots()[0];
    let bin = build(&nd, root);
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut leaf: Vec<Option<usize>> = Vec::new();
    fn emit(b: &Bin, adj: &mut Vec<Vec<usize>>, leaf: &mut Vec<Option<usize>>) -> usize {
        let id = adj.len();
        adj.push(Vec::new());
        match b {
            Bin::Leaf(e) => leaf.push(Some(*e)),
            Bin::Pair(l, r) => {
                leaf.push(None);
                for sub in [l, r] {
                    let c = emit(sub, adj, leaf);
                    adj[id].push(c);
                    adj[c].push(id);
                }
            }
        }
        id
    }
    match bin {
        Bin::Pair(l, r) => {
            let a = emit(&l, &mut adj, &mut leaf);
            let b = emit(&r, &mut adj, &mut leaf);
            adj[a].push(b);
            adj[b].push(a);
        }
        Bin::Leaf(_) => return Err(Error::Invariant("normal tree with one leaf and two elements".into())),
    }
    Ok(BranchDecomposition { adj, leaf })
}

/// A directed tree decomposition whose nodes are in bijection with a family
/// of mutually incomparable tangles (indices into a [`TangleStore`]).
#[derive(Clone, Debug)]
pub struct TangleTree {
    pub decomposition: Decomposition,
    /// `tangle[t]` is the store index of the tangle at node `t`.
    pub tangle: Vec<usize>,
    pub root: usize,
}

impl TangleTree {
    pub fn node_of(&self, tangle: usize) -> Option<usize> {
        self.tangle.iter().position(|&i| i == tangle)
    }

    pub fn parent(&self, t: usize) -> Option<usize> {
        (0..self.tangle.len()).find(|&s| self.decomposition.children(s).contains(&t))
    }

    /// Is `u` an ancestor of `t` (or `t` itself)?
    pub fn is_ancestor(&self, u: usize, t: usize) -> bool {
        let mut cur = Some(t);
        while let Some(c) = cur {
            if c == u {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    /// Post-hoc check of the two defining conditions of a directed tree
    /// decomposition for a tangle family.
    pub fn verify(&self, f: &dyn ConnFn, store: &TangleStore) -> Result<()> {
        let d = &self.decomposition;
        d.validate(Level::Tree).map_err(|v| Error::Invariant(format!("tangle tree: {v}")))?;
        let n = d.len();
        for t in 0..n {
            for u in 0..n {
                if self.is_ancestor(u, t) {
                    continue;
                }
                // some minimum (T_u, T_t)-separation contains the cone at u,
                // i.e. the cone avoids the leftmost minimum (T_t, T_u)-separation
                let sep = store
                    .separation(f, self.tangle[t], self.tangle[u])?
                    .ok_or_else(|| Error::Invariant("tangle tree holds comparable tangles".into()))?;
                if d.cone(u).intersects(sep) {
                    return Err(Error::Invariant(format!("tangle tree: DTD.1 fails for nodes {t}, {u}")));
                }
            }
        }
        for t in 0..n {
            if t == self.root {
                continue;
            }
            let ok = (0..n).filter(|&u| !self.is_ancestor(t, u)).any(|u| {
                matches!(store.separation(f, self.tangle[t], self.tangle[u]), Ok(Some(s)) if s == d.cone(t))
            });
            if !ok {
                return Err(Error::Invariant(format!("tangle tree: DTD.2 fails at node {t}")));
            }
        }
        Ok(())
    }
}

/// Canonical directed tree decomposition for the `l`-maximal tangles, rooted
/// at `root` (a store index).
///
/// Below a node with tangle `P` and cone `Γ`, every remaining tangle `T'` is
/// mapped to its leftmost minimum `(T', P)`-separation; the inclusion-maximal
/// ones become the child cones, the tangle realising a child cone exactly
/// becomes the child, and the construction recurses on the tangles whose
/// separations lie inside that cone. Any crossing or ambiguity is reported
/// as an error; the result is verified with [`TangleTree::verify`].
pub fn build_tangle_tree(f: &dyn ConnFn, store: &TangleStore, root: usize, l: usize) -> Result<TangleTree> {
    let family = store.k_maximal(l);
    if !family.contains(&root) {
        return Err(Error::Precondition(format!("tangle {root} is not {l}-maximal")));
    }
    let mut d = Decomposition::new(f.ground());
    let r = d.add_node(f.ground());
    let mut tangle = vec![root];
    let rest: Vec<usize> = family.iter().copied().filter(|&i| i != root).collect();
    let mut work = vec![(r, root, f.ground(), rest)];
    while let Some((node, p, cone, todo)) = work.pop() {
        if todo.is_empty() {
            continue;
        }
        let mut seps: Vec<(usize, VertexSet)> = Vec::with_capacity(todo.len());
        for &i in &todo {
            let s = store
                .separation(f, i, p)?
                .ok_or_else(|| Error::Invariant("tangle family is not an antichain".into()))?;
            if !s.is_subset(cone) {
                return Err(Error::Invariant(format!("separation {s} leaves the cone {cone}")));
            }
            seps.push((i, s));
        }
        let mut maximal: Vec<VertexSet> = Vec::new();
        for &(_, s) in &seps {
            if !seps.iter().any(|&(_, o)| s != o && s.is_subset(o)) && !maximal.contains(&s) {
                maximal.push(s);
            }
        }
        maximal.sort_by(|a, b| a.size_lex_cmp(b));
        for (i, a) in maximal.iter().enumerate() {
            for b in &maximal[i + 1..] {
                if a.intersects(*b) {
                    return Err(Error::Invariant(format!("crossing tangle separations {a} and {b}")));
                }
            }
        }
        for y in maximal {
            let exact: Vec<usize> = seps.iter().filter(|&&(_, s)| s == y).map(|&(i, _)| i).collect();
            if exact.len() != 1 {
                return Err(Error::Invariant(format!("{} tangles share the separation {y}", exact.len())));
            }
            let child_tangle = exact[0];
            let inside: Vec<usize> =
                seps.iter().filter(|&&(i, s)| i != child_tangle && s.is_subset(y)).map(|&(i, _)| i).collect();
            let c = d.add_node(y);
            d.add_edge(node, c);
            tangle.push(child_tangle);
            work.push((c, child_tangle, y, inside));
        }
    }
    let tree = TangleTree { decomposition: d, tangle, root: r };
    tree.verify(f, store)?;
    Ok(tree)
}

/// Ground sets larger than this are refused by [`exhaustive_branch_width`].
pub const EXHAUSTIVE_CAP: usize = 16;

/// Branch width of `f` by dynamic programming over all subsets: `best(X)` is
/// the least width of a rooted subcubic tree on `X` including the edge above
/// it. Ground sets of size at most one have width 0.
pub fn exhaustive_branch_width(f: &dyn ConnFn) -> Result<usize> {
    let elems = f.ground().to_vec();
    let m = elems.len();
    if m > EXHAUSTIVE_CAP {
        return Err(Error::OracleCap { n: m, cap: EXHAUSTIVE_CAP });
    }
    if m <= 1 {
        return Ok(0);
    }
    let expand = |mask: usize| -> VertexSet { (0..m).filter(|i| mask >> i & 1 == 1).map(|i| elems[i]).collect() };
    let full = (1usize << m) - 1;
    let mut best = vec![usize::MAX; 1 << m];
    for mask in 1..full {
        let own = f.kappa(expand(mask));
        if mask.count_ones() == 1 {
            best[mask] = own;
            continue;
        }
        // splits {Y, X∖Y} with the lowest bit of X in Y
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut inner = usize::MAX;
        let mut sub = rest;
        loop {
            let y = sub | low;
            if y != mask {
                inner = inner.min(best[y].max(best[mask ^ y]));
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask] = own.max(inner);
    }
    let rest = full ^ 1;
    let mut width = usize::MAX;
    let mut sub = rest;
    while sub != 0 {
        width = width.min(best[sub].max(best[full ^ sub]));
        sub = (sub - 1) & rest;
    }
    Ok(width)
}
