//! Canonical treelike decompositions of the cut-rank function.
//!
//! For every connected component, the maximal tangles are arranged in a
//! tangle tree. At each tangle-tree node the cut-rank function is contracted
//! along the child cones and the complement of the node's cone, the
//! contracted function is decomposed canonically ([`decompose_node`]), and
//! the node decompositions are glued along the contracted elements. Every
//! step depends only on the graph, so isomorphic graphs receive isomorphic
//! decompositions.

pub mod big;
pub mod bounds;
pub mod context;
pub mod node;
pub mod small;

use std::collections::HashMap;
use std::sync::Arc;

use crate::connfn::CutRank;
use crate::decomp::{build_tangle_tree, Decomposition, Level, TangleTree};
use crate::error::{Error, Result};
use crate::f2linalg::{Graph, VertexSet};
use crate::tangleset::TangleStore;

pub use big::{big_subtree, equiv_classes, find_split, split_big, Polymatroid};
pub use bounds::{BoundTable, BoundsReport};
pub use context::{make_context, reduce_parts, NodeContext};
pub use node::{decompose_node, NodeDecomposition, NodeOptions};
pub use small::{compute_y_family, partition_small, SmallCase, SmallPartition, YFamily};

/// A canonical decomposition together with what was learnt building it.
#[derive(Clone, Debug)]
pub struct CanonicalDecomposition {
    pub decomposition: Decomposition,
    /// The largest tangle order found, i.e. the branch width of the
    /// cut-rank function (0 for edgeless graphs).
    pub width_bound: usize,
    pub components: usize,
    /// Number of tangle-tree nodes, over all components and root tangles.
    pub tangle_nodes: usize,
    /// Whether the triple-cover cap bound anywhere.
    pub cap_events: usize,
}

/// Builds the canonical decomposition of `G`, failing with
/// [`Error::RankWidthExceeded`] if some component carries a tangle of order
/// `k + 1`.
pub fn canonical_decomposition(g: &Graph, k: usize) -> Result<CanonicalDecomposition> {
    canonical_decomposition_with(g, k, NodeOptions::default())
}

pub fn canonical_decomposition_with(g: &Graph, k: usize, opts: NodeOptions) -> Result<CanonicalDecomposition> {
    if g.n() == 0 {
        return Err(Error::EmptyGround);
    }
    let graph = Arc::new(g.clone());
    let mut out = CanonicalDecomposition {
        decomposition: Decomposition::new(g.vertices()),
        width_bound: 0,
        components: 0,
        tangle_nodes: 0,
        cap_events: 0,
    };
    let mut tops = Vec::new();
    for comp in g.components() {
        out.components += 1;
        if comp.len() == 1 {
            tops.push(out.decomposition.add_node(comp));
            continue;
        }
        let f = CutRank::induced(graph.clone(), comp);
        let store = TangleStore::enumerate(&f, k + 1)?;
        if store.max_order() > k {
            return Err(Error::RankWidthExceeded { which: "input graph".into(), k });
        }
        let bw = store.max_order();
        out.width_bound = out.width_bound.max(bw);
        let mut roots = Vec::new();
        for root in store.k_maximal(bw) {
            let tree = build_tangle_tree(&f, &store, root, bw)?;
            out.tangle_nodes += tree.decomposition.len();
            let mut p = Product { graph: &graph, support: comp, tree: &tree, store: &store, k: bw, opts, built: HashMap::new(), cap_events: 0 };
            roots.push(p.build(&mut out.decomposition, tree.root)?);
            out.cap_events += p.cap_events;
        }
        if roots.len() == 1 {
            tops.push(roots[0]);
        } else {
            let c = out.decomposition.add_node(comp);
            for r in roots {
                out.decomposition.add_edge(c, r);
            }
            tops.push(c);
        }
    }
    if tops.len() > 1 {
        let top = out.decomposition.add_node(g.vertices());
        for t in tops {
            out.decomposition.add_edge(top, t);
        }
    }
    out.decomposition = out.decomposition.normalize();
    out.decomposition
        .validate(Level::Normal)
        .map_err(|v| Error::Invariant(format!("canonical decomposition: {v}")))?;
    Ok(out)
}

/// The least `k` such that no component carries a tangle of order `k + 1`,
/// i.e. the rank width (0 for edgeless graphs).
pub fn detect_width(g: &Graph) -> Result<usize> {
    if g.n() == 0 {
        return Err(Error::EmptyGround);
    }
    let graph = Arc::new(g.clone());
    let mut width = 0;
    for comp in g.components() {
        if comp.len() == 1 {
            continue;
        }
        let f = CutRank::induced(graph.clone(), comp);
        let mut k = width.max(1);
        while TangleStore::enumerate(&f, k + 1)?.max_order() > k {
            k += 1;
        }
        width = k;
    }
    Ok(width)
}

/// The product construction for one tangle tree: each tangle-tree node
/// contributes its node decomposition (with cones expanded back to
/// vertices, and the root taking the node's cone), and a leaf `{c_i}` is
/// linked to the decomposition of the `i`-th child.
struct Product<'a> {
    graph: &'a Arc<Graph>,
    support: VertexSet,
    tree: &'a TangleTree,
    store: &'a TangleStore,
    k: usize,
    opts: NodeOptions,
    built: HashMap<usize, usize>,
    cap_events: usize,
}

impl Product<'_> {
    fn build(&mut self, out: &mut Decomposition, t1: usize) -> Result<usize> {
        if let Some(&r) = self.built.get(&t1) {
            return Ok(r);
        }
        let ctx = make_context(self.graph, self.support, self.tree, self.store, t1, self.k)?;
        let nd = decompose_node(&ctx, self.opts)?;
        self.cap_events += nd.cap_event as usize;
        let t2 = nd.decomposition.normalize_keep_root_bag();
        let roots = t2.roots();
        if roots.len() != 1 {
            return Err(Error::Invariant(format!("node decomposition has {} roots", roots.len())));
        }
        let cone1 = self.tree.decomposition.cone(t1);
        let ids: Vec<usize> = (0..t2.len())
            .map(|u| out.add_node(if u == roots[0] { cone1 } else { ctx.expand(t2.cone(u)) }))
            .collect();
        for u in 0..t2.len() {
            for &v in t2.children(u) {
                out.add_edge(ids[u], ids[v]);
            }
        }
        let children = self.tree.decomposition.children(t1).to_vec();
        for u in t2.leaves() {
            let e = match t2.cone(u).min() {
                Some(e) if t2.cone(u).len() == 1 => e,
                _ => continue,
            };
            if let Some(i) = (1..=children.len()).find(|&i| ctx.down().c(i) == e) {
                let r = self.build(out, children[i - 1])?;
                out.add_edge(ids[u], r);
            }
        }
        self.built.insert(t1, ids[roots[0]]);
        Ok(ids[roots[0]])
    }
}

#[cfg(test)]
mod tests;
