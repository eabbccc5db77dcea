use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::connfn::CutRank;
use crate::tangleset::{contract_tangle, verify_triple_cover, triple_covers};

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).unwrap()
}

fn complete(n: usize) -> Graph {
    let mut g = Graph::new(n).unwrap();
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

fn cycle(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(n, &edges)
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n).unwrap();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v).unwrap();
            }
        }
    }
    g
}

/// Interns `(cone, child signatures)` bottom-up.
fn signatures(d: &Decomposition, map: &dyn Fn(VertexSet) -> VertexSet, table: &mut HashMap<(VertexSet, Vec<usize>), usize>) -> Vec<usize> {
    let order = d.topological_order().unwrap();
    let mut sig = vec![usize::MAX; d.len()];
    for &t in order.iter().rev() {
        let mut cs: Vec<usize> = d.children(t).iter().map(|&u| sig[u]).collect();
        cs.sort_unstable();
        let key = (map(d.cone(t)), cs);
        let next = table.len();
        sig[t] = *table.entry(key).or_insert(next);
    }
    sig
}

/// Is there an isomorphism of directed graphs from `d1` to `d2` mapping
/// each cone `C` to `pi(C)`? Backtracking over signature classes.
fn isomorphic_under(d1: &Decomposition, d2: &Decomposition, pi: &[usize]) -> bool {
    if d1.len() != d2.len() || d1.edge_count() != d2.edge_count() {
        return false;
    }
    let mut table = HashMap::new();
    let s1 = signatures(d1, &|c| c.map(pi), &mut table);
    let s2 = signatures(d2, &|c| c, &mut table);
    let mut c1 = s1.clone();
    let mut c2 = s2.clone();
    c1.sort_unstable();
    c2.sort_unstable();
    if c1 != c2 {
        return false;
    }
    let order = d1.topological_order().unwrap();
    let p1 = d1.parents();
    let p2 = d2.parents();
    let mut h = vec![usize::MAX; d1.len()];
    let mut used = vec![false; d2.len()];
    fn go(
        i: usize,
        order: &[usize],
        d2: &Decomposition,
        s1: &[usize],
        s2: &[usize],
        p1: &[Vec<usize>],
        p2: &[Vec<usize>],
        h: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let t = order[i];
        for u in 0..d2.len() {
            if used[u] || s2[u] != s1[t] || p2[u].len() != p1[t].len() {
                continue;
            }
            if !p1[t].iter().all(|&p| d2.children(h[p]).contains(&u)) {
                continue;
            }
            h[t] = u;
            used[u] = true;
            if go(i + 1, order, d2, s1, s2, p1, p2, h, used) {
                return true;
            }
            used[u] = false;
        }
        false
    }
    go(0, &order, d2, &s1, &s2, &p1, &p2, &mut h, &mut used)
}

fn check_normal(g: &Graph, d: &Decomposition) {
    d.validate(Level::Normal).unwrap();
    let leaves: Vec<VertexSet> = d.leaves().iter().map(|&l| d.cone(l)).collect();
    for v in 0..g.n() {
        assert!(leaves.contains(&VertexSet::singleton(v)), "vertex {v} has no leaf");
    }
}

#[test]
fn edgeless_graphs_get_a_star() {
    for n in 1..6 {
        let g = Graph::new(n).unwrap();
        let c = canonical_decomposition(&g, 1).unwrap();
        assert_eq!(c.width_bound, 0);
        check_normal(&g, &c.decomposition);
        let f = CutRank::new(Arc::new(g.clone()));
        assert_eq!(c.decomposition.width(&f).unwrap(), 0);
        assert_eq!(c.decomposition.len(), if n == 1 { 1 } else { n + 1 });
    }
}

#[test]
fn complete_graphs_decompose() {
    for n in 2..=8 {
        let g = complete(n);
        let c = canonical_decomposition(&g, 1).unwrap();
        assert_eq!(c.width_bound, 1);
        check_normal(&g, &c.decomposition);
        let f = CutRank::new(Arc::new(g.clone()));
        assert!(c.decomposition.width(&f).unwrap() >= 1);
    }
}

#[test]
fn rank_width_excess_is_reported() {
    let err = canonical_decomposition(&cycle(6), 1).unwrap_err();
    assert!(matches!(err, Error::RankWidthExceeded { k: 1, .. }));
    assert!(canonical_decomposition(&cycle(6), 2).is_ok());
}

#[test]
fn assorted_graphs_validate() {
    let two_cycles = graph(10, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (5, 6), (6, 7), (7, 8), (8, 9), (9, 5), (0, 5)]);
    let disjoint = graph(7, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (5, 6), (6, 3)]);
    for g in [cycle(5), cycle(7), two_cycles, disjoint, complete(4)] {
        let c = canonical_decomposition(&g, 2).unwrap();
        check_normal(&g, &c.decomposition);
    }
}

#[test]
fn random_graphs_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(0.2..0.8);
        let g = random_graph(&mut rng, n, p);
        let c = canonical_decomposition(&g, 3).unwrap();
        check_normal(&g, &c.decomposition);
    }
}

#[test]
fn decompositions_are_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for round in 0..40 {
        let n = rng.gen_range(3..=8);
        let g = if round % 5 == 0 { cycle(n.max(5)) } else { random_graph(&mut rng, n, 0.45) };
        let mut pi: Vec<usize> = (0..g.n()).collect();
        pi.shuffle(&mut rng);
        let h = g.permute(&pi);
        let d = canonical_decomposition(&g, 3).unwrap().decomposition;
        let e = canonical_decomposition(&h, 3).unwrap().decomposition;
        assert!(isomorphic_under(&d, &e, &pi), "round {round}: {g:?} under {pi:?}");
    }
}

#[test]
fn node_decompositions_have_the_promised_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    while checked < 25 {
        let n = rng.gen_range(4..=8);
        let g = random_graph(&mut rng, n, 0.5);
        if !g.is_connected() {
            continue;
        }
        let g = Arc::new(g);
        let f = CutRank::new(g.clone());
        let store = TangleStore::enumerate(&f, 4).unwrap();
        let k = store.max_order();
        let root = store.k_maximal(k)[0];
        let tree = build_tangle_tree(&f, &store, root, k).unwrap();
        for t in 0..tree.decomposition.len() {
            let ctx = make_context(&g, g.vertices(), &tree, &store, t, k).unwrap();
            let nd = decompose_node(&ctx, NodeOptions::default()).unwrap();
            let d = &nd.decomposition;
            d.validate(Level::Treelike).unwrap();
            assert!(d.parents().iter().all(|p| p.len() <= 1), "not a directed tree");
            assert_eq!(d.cone(nd.root), ctx.ground());
            assert_eq!(d.bag(nd.root), VertexSet::singleton(ctx.c0()));
            for l in d.leaves() {
                assert!(d.cone(l).len() <= 1);
            }
            // every Q∨ is a triple cover of the contracted tangle
            let down_tangle = contract_tangle(ctx.tangle(), ctx.down()).unwrap();
            if let Some(td) = down_tangle {
                for q in triple_covers(ctx.tangle(), ctx.support(), Default::default()).covers {
                    assert!(verify_triple_cover(&td, ctx.q_vee(q)));
                }
            }
            // the normalized version keeps the root bag and is otherwise normal
            let norm = d.normalize_keep_root_bag();
            let leaves = norm.leaves().iter().fold(VertexSet::EMPTY, |a, &l| a | norm.cone(l));
            assert_eq!(leaves, ctx.ground().without(ctx.c0()));
            for u in 0..norm.len() {
                if norm.roots().contains(&u) {
                    assert_eq!(norm.bag(u), VertexSet::singleton(ctx.c0()));
                } else if norm.is_leaf(u) {
                    assert_eq!(norm.bag(u).len(), 1);
                } else {
                    assert!(norm.bag(u).is_empty());
                }
            }
            let width = d.width(ctx.down()).unwrap();
            assert!(width <= ctx.ground().len());
            checked += 1;
        }
    }
}

#[test]
fn two_element_node() {
    // a single edge: A↓ = {0, 1, c0}; the root, one cover node, and singletons
    let g = Arc::new(graph(2, &[(0, 1)]));
    let f = CutRank::new(g.clone());
    let store = TangleStore::enumerate(&f, 2).unwrap();
    let tree = build_tangle_tree(&f, &store, store.k_maximal(1)[0], 1).unwrap();
    let ctx = make_context(&g, g.vertices(), &tree, &store, tree.root, 1).unwrap();
    let nd = decompose_node(&ctx, NodeOptions::default()).unwrap();
    let norm = nd.decomposition.normalize_keep_root_bag();
    for l in norm.leaves() {
        assert_eq!(norm.cone(l).len(), 1);
    }
}

#[test]
fn detected_widths() {
    assert_eq!(detect_width(&Graph::new(4).unwrap()).unwrap(), 0);
    assert_eq!(detect_width(&complete(6)).unwrap(), 1);
    assert_eq!(detect_width(&cycle(6)).unwrap(), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.gen_range(1..=7);
        let g = random_graph(&mut rng, n, 0.5);
        let k = detect_width(&g).unwrap();
        assert!(canonical_decomposition(&g, k.max(1)).is_ok());
        if k > 1 {
            assert!(matches!(canonical_decomposition(&g, k - 1), Err(Error::RankWidthExceeded { .. })));
        }
    }
}
