use std::sync::Arc;

use crate::canonical::bounds::BoundTable;
use crate::connfn::{ConnFn, Contraction, CutRank};
use crate::decomp::TangleTree;
use crate::error::{Error, Result};
use crate::f2linalg::{Graph, VertexSet};
use crate::tangleset::{Tangle, TangleStore};

/// Everything the decomposition of a single tangle-tree node needs: the
/// contraction of the graph's cut-rank function along the child cones and
/// the complement of the node's cone, and the tangle living at the node.
///
/// Elements of the contracted ground set `A↓` follow [`Contraction`]: the
/// uncontracted vertices `B` first, then `c_0`, then `c_1..c_m`.
pub struct NodeContext {
    graph: Arc<Graph>,
    support: VertexSet,
    down: Contraction<CutRank>,
    tangle: Tangle,
    k: usize,
    /// Twin-reduced expansion of each element of `A↓`.
    reduced: Vec<VertexSet>,
}

impl NodeContext {
    /// Builds and checks a context. `support` is the vertex set on which the
    /// cut-rank function lives (a connected component of `graph`), `k` the
    /// branch width of that function.
    pub fn new(
        graph: Arc<Graph>,
        support: VertexSet,
        c0: VertexSet,
        parts: &[VertexSet],
        tangle: Tangle,
        k: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Assumption("the width k must be at least 1".into()));
        }
        let base = CutRank::induced(graph.clone(), support);
        let check = |name: &str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Assumption(name.to_string()))
            }
        };
        check("tangle order k0 <= k", tangle.order <= k)?;
        check("tangle order k0 >= 1", tangle.order >= 1)?;
        for (i, &c) in std::iter::once(&c0).chain(parts).enumerate() {
            check(&format!("kappa(C_{i}) < k"), base.kappa(c) < k)?;
        }
        check("complement of C_0 is in T_0", tangle.contains(&base, support - c0))?;
        for (i, &c) in parts.iter().enumerate() {
            check(&format!("C_{} is not in T_0", i + 1), !tangle.contains(&base, c))?;
        }
        let down = Contraction::new(base, Some(c0), parts)?;
        let reduced_parts = reduce_parts(&graph, support, &std::iter::once(c0).chain(parts.iter().copied()).collect::<Vec<_>>());
        let mut reduced: Vec<VertexSet> = down.b_elements().iter().map(|e| down.expand_element(e)).collect();
        reduced.extend(reduced_parts);
        Ok(NodeContext { graph, support, down, tangle, k, reduced })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// The vertex set of the underlying cut-rank function.
    pub fn support(&self) -> VertexSet {
        self.support
    }

    /// The contracted function `κ↓`.
    pub fn down(&self) -> &Contraction<CutRank> {
        &self.down
    }

    /// `A↓`.
    pub fn ground(&self) -> VertexSet {
        self.down.ground()
    }

    /// The element `c_0`.
    pub fn c0(&self) -> usize {
        self.down.c0().expect("contexts always carry c_0")
    }

    pub fn tangle(&self) -> &Tangle {
        &self.tangle
    }

    pub fn k0(&self) -> usize {
        self.tangle.order
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bounds(&self) -> BoundTable {
        BoundTable::new(self.k)
    }

    pub fn part_count(&self) -> usize {
        self.down.part_count()
    }

    /// `Q∨`: the elements of `A↓` whose expansion meets `q`.
    pub fn q_vee(&self, q: VertexSet) -> VertexSet {
        self.down.touching(q)
    }

    pub fn expand(&self, x: VertexSet) -> VertexSet {
        self.down.expand(x)
    }

    /// Twin-reduced expansion of one element.
    pub fn reduced_element(&self, e: usize) -> VertexSet {
        self.reduced[e]
    }

    /// Twin-reduced expansion of a set of elements.
    pub fn reduced_expand(&self, x: VertexSet) -> VertexSet {
        x.iter().fold(VertexSet::EMPTY, |acc, e| acc | self.reduced[e])
    }
}

/// The context at node `t` of a tangle tree over the cut-rank function of
/// `G[support]`: `C_0` is the complement of the cone at `t`, the parts are
/// the child cones, and `T_0` is the tangle at `t`.
pub fn make_context(
    graph: &Arc<Graph>,
    support: VertexSet,
    tree: &TangleTree,
    store: &TangleStore,
    t: usize,
    k: usize,
) -> Result<NodeContext> {
    let d = &tree.decomposition;
    if t >= d.len() {
        return Err(Error::InvalidIndex(t));
    }
    let c0 = support - d.cone(t);
    let parts: Vec<VertexSet> = d.children(t).iter().map(|&u| d.cone(u)).collect();
    NodeContext::new(graph.clone(), support, c0, &parts, store.tangle(tree.tangle[t]).clone(), k)
}

/// Drops twins inside each part: vertices whose neighbourhoods outside the
/// part (within `support`) coincide are represented by the smallest one.
pub fn reduce_parts(g: &Graph, support: VertexSet, parts: &[VertexSet]) -> Vec<VertexSet> {
    parts
        .iter()
        .map(|&c| {
            let outside = support - c;
            let mut seen: Vec<VertexSet> = Vec::new();
            let mut kept = VertexSet::EMPTY;
            for v in c.iter() {
                let row = g.neighbours(v) & outside;
                if !seen.contains(&row) {
                    seen.push(row);
                    kept.insert(v);
                }
            }
            kept
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::build_tangle_tree;
    use crate::f2linalg::cut_rank_within;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vs(items: &[usize]) -> VertexSet {
        VertexSet::from_slice(items)
    }

    fn two_pentagons() -> Arc<Graph> {
        // two 5-cycles joined by the edge 0-5
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (5, 6), (6, 7), (7, 8), (8, 9), (9, 5), (0, 5)];
        Arc::new(Graph::from_edges(10, &edges).unwrap())
    }

    fn setup(g: &Arc<Graph>) -> (TangleStore, TangleTree, usize) {
        let f = CutRank::new(g.clone());
        let store = TangleStore::enumerate(&f, 3).unwrap();
        let k = store.max_order();
        let root = store.k_maximal(k)[0];
        let tree = build_tangle_tree(&f, &store, root, k).unwrap();
        (store, tree, k)
    }

    #[test]
    fn root_context_has_empty_c0() {
        let g = two_pentagons();
        let (store, tree, k) = setup(&g);
        let ctx = make_context(&g, g.vertices(), &tree, &store, tree.root, k).unwrap();
        assert!(ctx.down().expand_element(ctx.c0()).is_empty());
        assert_eq!(ctx.down().kappa(VertexSet::singleton(ctx.c0())), 0);
    }

    #[test]
    fn leaf_context_has_no_parts() {
        let g = two_pentagons();
        let (store, tree, k) = setup(&g);
        let d = &tree.decomposition;
        let leaf = d.leaves()[0];
        let ctx = make_context(&g, g.vertices(), &tree, &store, leaf, k).unwrap();
        assert_eq!(ctx.part_count(), 0);
        assert_eq!(ctx.ground().len(), d.cone(leaf).len() + 1);
    }

    #[test]
    fn non_root_context_contracts_the_rest() {
        let g = two_pentagons();
        let (store, tree, k) = setup(&g);
        let d = &tree.decomposition;
        assert!(d.len() >= 2, "the joined cycles carry two tangles");
        let t = (0..d.len()).find(|&t| t != tree.root).unwrap();
        let ctx = make_context(&g, g.vertices(), &tree, &store, t, k).unwrap();
        let c0 = g.vertices() - d.cone(t);
        assert_eq!(ctx.down().expand_element(ctx.c0()), c0);
        assert_eq!(ctx.down().kappa(VertexSet::singleton(ctx.c0())), cut_rank_within(&g, g.vertices(), c0));
    }

    #[test]
    fn context_rejects_violated_assumptions() {
        let g = two_pentagons();
        let (store, tree, k) = setup(&g);
        let tangle = store.tangle(tree.tangle[tree.root]).clone();
        // a co-singleton part lies in every tangle of order 2
        let err = NodeContext::new(g.clone(), g.vertices(), VertexSet::EMPTY, &[vs(&[0, 1, 2, 3, 4, 5, 6, 7, 8])], tangle, k);
        assert!(matches!(err, Err(Error::Assumption(_))));
    }

    #[test]
    fn reduce_parts_examples() {
        let k4 = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(reduce_parts(&k4, k4.vertices(), &[vs(&[0, 1, 2])]), vec![vs(&[0])]);
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(reduce_parts(&p4, p4.vertices(), &[vs(&[0, 3])]), vec![vs(&[0, 3])]);
    }

    #[test]
    fn reduced_parts_are_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(4..12);
            let mut g = Graph::new(n).unwrap();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
            let part: VertexSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let r = cut_rank_within(&g, g.vertices(), part);
            let red = reduce_parts(&g, g.vertices(), &[part])[0];
            assert!(red.is_subset(part));
            // a part of order r has at most 2^r distinct rows
            assert!(red.len() <= 1 << r);
            assert_eq!(cut_rank_within(&g, g.vertices() - (part - red), red), r);
        }
    }
}
