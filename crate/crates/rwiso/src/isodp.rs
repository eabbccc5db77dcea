//! The coset-valued dynamic program over a pair of normal treelike
//! decompositions, and the end-to-end isomorphism computation.
//!
//! For every node `t` the boundary graph `G_t` consists of the cone of `t`
//! (blue) and one red vertex per adjacency type of the vertices outside the
//! cone. For a node pair `(t, t')` the program computes a coset `Λ(t, t')`
//! that contains every isomorphism `G_t -> G'_t'` respecting the
//! decompositions below `t` and `t'`, and consists of isomorphisms only.
//! With canonical decompositions the root cell is exactly `ISO(G, G')`.
//!
//! Cosets act on local indices: blue vertices in increasing order first,
//! then red vertices in increasing order of their type words.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use serde::Serialize;

use crate::canonical::{canonical_decomposition_with, NodeOptions};
use crate::decomp::{Decomposition, Level};
use crate::error::{Error, Result};
use crate::f2linalg::{Graph, VertexSet};
use crate::permgroup::{Coset, Perm, PermGroup};
use crate::qblock::{extension_set, ExtensionSet, QBlockMatrix};

/// Graphs larger than this are refused by [`brute_force_iso`].
pub const BRUTE_FORCE_CAP: usize = 10;

/// Search-tree nodes allowed when enumerating extension-set bijections for
/// one node pair.
pub const CHI_SEARCH_CAP: usize = 2_000_000;

const BLUE: u32 = 0;
const RED: u32 = u32::MAX;

/// `G_t`: the cone of `t` plus one red vertex per row of the matrix between
/// the outside and the cone.
#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    pub node: usize,
    pub blue: Vec<usize>,
    /// Types as words over vertex IDs (the neighbourhood inside the cone).
    pub red: Vec<u64>,
    pub graph: Graph,
    cone: VertexSet,
    pos: Vec<usize>,
}

impl BoundaryGraph {
    pub fn len(&self) -> usize {
        self.blue.len() + self.red.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cone(&self) -> VertexSet {
        self.cone
    }

    /// Local index of the blue vertex `v`.
    pub fn local(&self, v: usize) -> Option<usize> {
        self.pos.get(v).copied().filter(|&i| i != usize::MAX)
    }

    /// Local index of the red vertex with type `w`.
    pub fn red_local(&self, w: u64) -> Option<usize> {
        self.red.binary_search(&w).ok().map(|i| self.blue.len() + i)
    }

    pub fn colours(&self) -> Vec<u32> {
        (0..self.len()).map(|i| if i < self.blue.len() { BLUE } else { RED }).collect()
    }
}

pub fn boundary_graph(g: &Graph, d: &Decomposition, t: usize) -> Result<BoundaryGraph> {
    if t >= d.len() {
        return Err(Error::InvalidIndex(t));
    }
    let cone = d.cone(t);
    let blue = cone.to_vec();
    let mut red: Vec<u64> = (g.vertices() - cone).iter().map(|w| g.neighbours(w).0 & cone.0).collect();
    red.sort_unstable();
    red.dedup();
    let nb = blue.len();
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in blue.iter().enumerate() {
        pos[v] = i;
    }
    let mut local = Graph::new(nb + red.len())?;
    for (i, &v) in blue.iter().enumerate() {
        for (j, &w) in blue.iter().enumerate().skip(i + 1) {
            if g.has_edge(v, w) {
                local.add_edge(i, j)?;
            }
        }
        for (r, &w) in red.iter().enumerate() {
            if w >> v & 1 == 1 {
                local.add_edge(i, nb + r)?;
            }
        }
    }
    Ok(BoundaryGraph { node: t, blue, red, graph: local, cone, pos })
}

/// Is `psi` (images indexed by vertex) an isomorphism from `a` to `b`?
pub fn is_isomorphism(a: &Graph, b: &Graph, psi: &Perm) -> bool {
    a.n() == b.n()
        && psi.degree() == a.n()
        && (0..a.n()).all(|v| a.neighbours(v).map(psi.images()) == b.neighbours(psi.apply(v)))
}

/// All colour-preserving isomorphisms `a -> b`, by backtracking.
fn coloured_isos(a: &Graph, ca: &[u32], b: &Graph, cb: &[u32]) -> Coset {
    let n = a.n();
    if n != b.n() || a.edge_count() != b.edge_count() {
        return Coset::Empty;
    }
    struct Search<'a> {
        a: &'a Graph,
        b: &'a Graph,
        ca: &'a [u32],
        cb: &'a [u32],
        map: Vec<usize>,
        used: Vec<bool>,
        sigma: Option<Perm>,
        group: PermGroup,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize) {
            let n = self.map.len();
            if i == n {
                let psi = Perm::from_images(self.map.clone()).expect("a bijection");
                match &self.sigma {
                    None => self.sigma = Some(psi),
                    Some(s) => {
                        let h = s.inverse().then(&psi);
                        if !self.group.contains(&h) {
                            self.group = self.group.join(&[h]);
                        }
                    }
                }
                return;
            }
            for y in 0..n {
                if self.used[y] || self.cb[y] != self.ca[i] || self.b.degree(y) != self.a.degree(i) {
                    continue;
                }
                if (0..i).all(|j| self.a.has_edge(i, j) == self.b.has_edge(y, self.map[j])) {
                    self.map[i] = y;
                    self.used[y] = true;
                    self.go(i + 1);
                    self.used[y] = false;
                }
            }
        }
    }
    let mut s = Search { a, b, ca, cb, map: vec![0; n], used: vec![false; n], sigma: None, group: PermGroup::trivial(n) };
    s.go(0);
    match s.sigma {
        None => Coset::Empty,
        Some(sigma) => Coset::NonEmpty { sigma, group: s.group },
    }
}

/// `ISO(G, G')` by exhaustive search, for graphs with at most
/// [`BRUTE_FORCE_CAP`] vertices.
pub fn brute_force_iso(g1: &Graph, g2: &Graph) -> Result<Coset> {
    for g in [g1, g2] {
        if g.n() > BRUTE_FORCE_CAP {
            return Err(Error::OracleCap { n: g.n(), cap: BRUTE_FORCE_CAP });
        }
    }
    Ok(coloured_isos(g1, &vec![BLUE; g1.n()], g2, &vec![BLUE; g2.n()]))
}

/// The subcoset of `c` whose elements map every point `x` to a point of
/// colour `dom[x]` (colours of the target points are `cod`). Branches on
/// the image of the first point whose image is not yet fixed by the group.
fn colour_restrict(c: &Coset, dom: &[u32], cod: &[u32]) -> Result<Coset> {
    let (sigma, group) = match c {
        Coset::Empty => return Ok(Coset::Empty),
        Coset::NonEmpty { sigma, group } => (sigma, group),
    };
    let preserves = group.generators().iter().all(|g| (0..cod.len()).all(|y| cod[g.apply(y)] == cod[y]));
    let sigma_ok = (0..dom.len()).all(|x| cod[sigma.apply(x)] == dom[x]);
    if preserves {
        return Ok(if sigma_ok { c.clone() } else { Coset::Empty });
    }
    for x in 0..dom.len() {
        let orbit = group.orbit(sigma.apply(x));
        if orbit.len() == 1 {
            if cod[orbit[0]] != dom[x] {
                return Ok(Coset::Empty);
            }
            continue;
        }
        let mut acc = Coset::Empty;
        for a in orbit {
            if cod[a] == dom[x] {
                acc = acc.lub(&colour_restrict(&c.restrict(&[(x, a)]), dom, cod)?)?;
            }
        }
        return Ok(acc);
    }
    // every image is fixed, so the group is trivial on the points that matter
    Ok(if sigma_ok { c.clone() } else { Coset::Empty })
}

/// Per-decomposition data for the dynamic program.
struct Side<'a> {
    g: &'a Graph,
    d: &'a Decomposition,
    bg: Vec<BoundaryGraph>,
    sig: Vec<usize>,
    same_cone: Vec<bool>,
    ext: Vec<Option<Rc<ExtensionSet>>>,
}

type SigKey = (usize, usize, usize, bool, Vec<usize>);

impl<'a> Side<'a> {
    fn new(g: &'a Graph, d: &'a Decomposition, interner: &mut HashMap<SigKey, usize>) -> Result<Self> {
        if d.ground() != g.vertices() {
            return Err(Error::Precondition("decomposition is not over the vertex set of the graph".into()));
        }
        d.validate(Level::Normal)
            .map_err(|v| Error::Precondition(format!("decomposition is not normal: {v}")))?;
        let bg = (0..d.len()).map(|t| boundary_graph(g, d, t)).collect::<Result<Vec<_>>>()?;
        let mut same_cone = vec![false; d.len()];
        for (t, same) in same_cone.iter_mut().enumerate() {
            let cones: Vec<VertexSet> = d.children(t).iter().map(|&u| d.cone(u)).collect();
            *same = !cones.is_empty() && cones.iter().all(|&c| c == d.cone(t));
            if !*same {
                let mut seen = VertexSet::EMPTY;
                for c in cones {
                    if c.intersects(seen) {
                        return Err(Error::Precondition(format!("node {t} has overlapping child cones")));
                    }
                    seen |= c;
                }
            }
        }
        let order = d.topological_order().ok_or_else(|| Error::Precondition("decomposition has a cycle".into()))?;
        let mut sig = vec![0; d.len()];
        for &t in order.iter().rev() {
            let mut cs: Vec<usize> = d.children(t).iter().map(|&u| sig[u]).collect();
            cs.sort_unstable();
            let key = (bg[t].blue.len(), bg[t].red.len(), bg[t].graph.edge_count(), same_cone[t], cs);
            let next = interner.len();
            sig[t] = *interner.entry(key).or_insert(next);
        }
        Ok(Side { g, d, bg, sig, same_cone, ext: vec![None; d.len()] })
    }

    fn ext(&mut self, t: usize) -> Result<Rc<ExtensionSet>> {
        if let Some(e) = &self.ext[t] {
            return Ok(e.clone());
        }
        let p = QBlockMatrix::associated(self.g, self.d, t)?;
        let e = Rc::new(extension_set(&p)?);
        self.ext[t] = Some(e.clone());
        Ok(e)
    }

    fn root(&self) -> usize {
        self.d.roots()[0]
    }
}

/// Counters from one run of the dynamic program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DpStats {
    /// Node pairs evaluated.
    pub cells: usize,
    /// Outside bijections `φ` tried.
    pub phi: usize,
    /// Extension-set colourings tried.
    pub chi: usize,
}

/// The dynamic program for one pair of decompositions.
pub struct IsoDp<'a> {
    a: Side<'a>,
    b: Side<'a>,
    memo: HashMap<(usize, usize), Coset>,
    pub stats: DpStats,
}

impl<'a> IsoDp<'a> {
    pub fn new(g1: &'a Graph, d1: &'a Decomposition, g2: &'a Graph, d2: &'a Decomposition) -> Result<Self> {
        let mut interner = HashMap::new();
        let a = Side::new(g1, d1, &mut interner)?;
        let b = Side::new(g2, d2, &mut interner)?;
        Ok(IsoDp { a, b, memo: HashMap::new(), stats: DpStats::default() })
    }

    /// `Λ(r, r')` for the roots: a coset of maps `V(G) -> V(G')`.
    pub fn run(&mut self) -> Result<Coset> {
        let (r, s) = (self.a.root(), self.b.root());
        self.cell(r, s)
    }

    /// The boundary graphs of the two sides at `t` and `s`.
    pub fn boundary(&self, t: usize, s: usize) -> (&BoundaryGraph, &BoundaryGraph) {
        (&self.a.bg[t], &self.b.bg[s])
    }

    pub fn cell(&mut self, t: usize, s: usize) -> Result<Coset> {
        if let Some(c) = self.memo.get(&(t, s)) {
            return Ok(c.clone());
        }
        let c = self.compute(t, s)?;
        self.memo.insert((t, s), c.clone());
        Ok(c)
    }

    fn compute(&mut self, t: usize, s: usize) -> Result<Coset> {
        self.stats.cells += 1;
        if self.a.sig[t] != self.b.sig[s] {
            return Ok(Coset::Empty);
        }
        if self.a.d.is_leaf(t) {
            let (x, y) = (&self.a.bg[t], &self.b.bg[s]);
            return Ok(coloured_isos(&x.graph, &x.colours(), &y.graph, &y.colours()));
        }
        let ca = self.a.d.children(t).to_vec();
        let cb = self.b.d.children(s).to_vec();
        if self.a.same_cone[t] {
            if !self.b.same_cone[s] {
                return Ok(Coset::Empty);
            }
            let mut acc = Coset::Empty;
            for &u in &ca {
                for &v in &cb {
                    acc = acc.lub(&self.cell(u, v)?)?;
                }
            }
            return Ok(acc);
        }
        if self.b.same_cone[s] || ca.len() != cb.len() {
            return Ok(Coset::Empty);
        }
        self.combine(t, s, &ca, &cb)
    }

    /// Combines the child cells for children with disjoint cones: outside
    /// bijections, extension-set colourings, matching and generators.
    fn combine(&mut self, t: usize, s: usize, ca: &[usize], cb: &[usize]) -> Result<Coset> {
        let xa = self.a.ext(t)?;
        let xb = self.b.ext(s)?;
        if xa.len() != xb.len() {
            return Ok(Coset::Empty);
        }
        let (dom_colourings, cod) = self.colourings(t, s, &xa, &xb)?;
        if dom_colourings.is_empty() {
            return Ok(Coset::Empty);
        }
        let phis = outside_bijections(&self.a.bg[t].red, &self.b.bg[s].red);
        let m = ca.len();
        let mut cells = vec![vec![Coset::Empty; m]; m];
        for i in 0..m {
            for j in 0..m {
                cells[i][j] = self.cell(ca[i], cb[j])?;
            }
        }
        let mut result = Coset::Empty;
        for phi in &phis {
            self.stats.phi += 1;
            let mut with_phi = vec![vec![Coset::Empty; m]; m];
            for i in 0..m {
                for j in 0..m {
                    with_phi[i][j] = self.agree_outside(t, s, ca[i], cb[j], phi, &cells[i][j]);
                }
            }
            if with_phi.iter().any(|row| row.iter().all(Coset::is_empty)) {
                continue;
            }
            for dom in &dom_colourings {
                self.stats.chi += 1;
                let mut lam = vec![vec![Coset::Empty; m]; m];
                for i in 0..m {
                    for j in 0..m {
                        let (dc, cc) = self.child_colours(t, s, ca[i], cb[j], dom, &cod);
                        lam[i][j] = colour_restrict(&with_phi[i][j], &dc, &cc)?;
                    }
                }
                let l = self.assemble(t, s, ca, cb, phi, lam)?;
                result = result.lub(&l)?;
            }
        }
        Ok(result)
    }

    /// `Λ(u, u')_[φ]`: the elements whose action on the projected types
    /// agrees with `φ`.
    fn agree_outside(&self, t: usize, s: usize, u: usize, v: usize, phi: &[usize], c: &Coset) -> Coset {
        if c.is_empty() {
            return Coset::Empty;
        }
        let (ga, gb) = (&self.a.bg[t], &self.b.bg[s]);
        let (gu, gv) = (&self.a.bg[u], &self.b.bg[v]);
        let mut img = vec![usize::MAX; gu.len()];
        let mut hit = vec![false; gv.len()];
        let mut pairs = Vec::new();
        for (i, &w) in ga.red.iter().enumerate() {
            let p = gu.red_local(w & gu.cone().0).expect("a projected type is a type");
            let q = gv.red_local(gb.red[phi[i]] & gv.cone().0).expect("a projected type is a type");
            if img[p] == usize::MAX {
                if hit[q] {
                    return Coset::Empty;
                }
                img[p] = q;
                hit[q] = true;
                pairs.push((p, q));
            } else if img[p] != q {
                return Coset::Empty;
            }
        }
        c.restrict(&pairs)
    }

    /// Colours on the local indices of the children `u` and `v` induced by a
    /// colouring of the blue vertices of `t` and `s`.
    fn child_colours(&self, t: usize, s: usize, u: usize, v: usize, dom: &[u32], cod: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let (ga, gb) = (&self.a.bg[t], &self.b.bg[s]);
        let (gu, gv) = (&self.a.bg[u], &self.b.bg[v]);
        let dc = (0..gu.len())
            .map(|i| if i < gu.blue.len() { dom[ga.local(gu.blue[i]).unwrap()] } else { RED })
            .collect();
        let cc = (0..gv.len())
            .map(|i| if i < gv.blue.len() { cod[gb.local(gv.blue[i]).unwrap()] } else { RED })
            .collect();
        (dc, cc)
    }

    /// The distinct colourings of the blue vertices of `t` induced by the
    /// bijections `χ: Ext -> Ext'` that some colour-preserving bijection of
    /// the cones can match, together with the colouring of the blue
    /// vertices of `s`. The colour of a vertex records, for every extension
    /// vector, whether it extends the vertex's row and the vector's entry at
    /// the vertex; `ψ` agrees with `χ` iff it preserves these colours.
    fn colourings(&self, t: usize, s: usize, xa: &ExtensionSet, xb: &ExtensionSet) -> Result<(Vec<Vec<u32>>, Vec<u32>)> {
        let (ga, gb) = (&self.a.bg[t], &self.b.bg[s]);
        let m = xa.len();
        let member_mask = |x: &ExtensionSet, blue: &[usize]| -> Vec<u64> {
            let mut mask = vec![0u64; x.len()];
            for &v in blue {
                for &i in &x.members[v] {
                    mask[i] |= 1u64 << v;
                }
            }
            mask
        };
        let ma = member_mask(xa, &ga.blue);
        let mb = member_mask(xb, &gb.blue);
        let bits = |mask: &[u64], x: &ExtensionSet, i: usize, v: usize| -> u8 {
            (mask[i] >> v & 1) as u8 | ((x.vectors[i] >> v & 1) as u8) << 1
        };

        // exact colours of the target vertices
        let mut cod_ids: HashMap<Vec<u8>, u32> = HashMap::new();
        let cod: Vec<u32> = gb
            .blue
            .iter()
            .map(|&v| {
                let key: Vec<u8> = (0..m).map(|j| bits(&mb, xb, j, v)).collect();
                let next = cod_ids.len() as u32 + 1;
                *cod_ids.entry(key).or_insert(next)
            })
            .collect();

        // interchangeable vectors: same restriction to the cone and same
        // rows extended inside the cone
        let class_of = |mask: &[u64], x: &ExtensionSet, cone: VertexSet| -> Vec<usize> {
            let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
            (0..x.len())
                .map(|i| {
                    let next = ids.len();
                    *ids.entry((mask[i], x.vectors[i] & cone.0)).or_insert(next)
                })
                .collect()
        };
        let ra = class_of(&ma, xa, ga.cone());
        let rb = class_of(&mb, xb, gb.cone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&i| (ra[i], i));
        let n_classes_b = rb.iter().max().map_or(0, |&c| c + 1);
        let mut members_b: Vec<Vec<usize>> = vec![Vec::new(); n_classes_b];
        for j in 0..m {
            members_b[rb[j]].push(j);
        }

        struct Search<'s> {
            order: Vec<usize>,
            ra: Vec<usize>,
            members_b: Vec<Vec<usize>>,
            taken: Vec<usize>,
            chosen_class: Vec<usize>,
            chi: Vec<usize>,
            part_a: Vec<u32>,
            part_b: Vec<u32>,
            refine: HashMap<(u32, u8), u32>,
            a_bits: &'s dyn Fn(usize, usize) -> u8,
            b_bits: &'s dyn Fn(usize, usize) -> u8,
            blue_a: Vec<usize>,
            blue_b: Vec<usize>,
            steps: usize,
            found: Vec<Vec<usize>>,
        }
        impl Search<'_> {
            fn go(&mut self, depth: usize) -> Result<()> {
                self.steps += 1;
                if self.steps > CHI_SEARCH_CAP {
                    return Err(Error::SearchCap { free: self.order.len(), cap: CHI_SEARCH_CAP });
                }
                if depth == self.order.len() {
                    self.found.push(self.chi.clone());
                    return Ok(());
                }
                let i = self.order[depth];
                let lower = if depth > 0 && self.ra[self.order[depth - 1]] == self.ra[i] {
                    self.chosen_class[depth - 1]
                } else {
                    0
                };
                for c in lower..self.members_b.len() {
                    if self.taken[c] == self.members_b[c].len() {
                        continue;
                    }
                    let j = self.members_b[c][self.taken[c]];
                    let saved = (self.part_a.clone(), self.part_b.clone());
                    for (x, &v) in self.blue_a.iter().enumerate() {
                        let key = (self.part_a[x], (self.a_bits)(i, v));
                        let next = self.refine.len() as u32 + 1;
                        self.part_a[x] = *self.refine.entry(key).or_insert(next);
                    }
                    for (y, &v) in self.blue_b.iter().enumerate() {
                        let key = (self.part_b[y], (self.b_bits)(j, v));
                        let next = self.refine.len() as u32 + 1;
                        self.part_b[y] = *self.refine.entry(key).or_insert(next);
                    }
                    let mut sa = self.part_a.clone();
                    let mut sb = self.part_b.clone();
                    sa.sort_unstable();
                    sb.sort_unstable();
                    if sa == sb {
                        self.taken[c] += 1;
                        self.chosen_class[depth] = c;
                        self.chi[i] = j;
                        self.go(depth + 1)?;
                        self.taken[c] -= 1;
                    }
                    (self.part_a, self.part_b) = saved;
                }
                Ok(())
            }
        }
        let a_bits = |i: usize, v: usize| bits(&ma, xa, i, v);
        let b_bits = |j: usize, v: usize| bits(&mb, xb, j, v);
        let mut search = Search {
            order,
            ra,
            taken: vec![0; members_b.len()],
            members_b,
            chosen_class: vec![0; m],
            chi: vec![usize::MAX; m],
            part_a: vec![0; ga.blue.len()],
            part_b: vec![0; gb.blue.len()],
            refine: HashMap::new(),
            a_bits: &a_bits,
            b_bits: &b_bits,
            blue_a: ga.blue.clone(),
            blue_b: gb.blue.clone(),
            steps: 0,
            found: Vec::new(),
        };
        search.go(0)?;

        let mut doms: BTreeSet<Vec<u32>> = BTreeSet::new();
        'chi: for chi in &search.found {
            let mut dom = Vec::with_capacity(ga.blue.len());
            for &v in &ga.blue {
                let mut key = vec![0u8; m];
                for i in 0..m {
                    key[chi[i]] = bits(&ma, xa, i, v);
                }
                match cod_ids.get(&key) {
                    Some(&c) => dom.push(c),
                    None => continue 'chi,
                }
            }
            doms.insert(dom);
        }
        Ok((doms.into_iter().collect(), cod))
    }

    /// For a fixed `(φ, χ)`: close the admissibility relation,
    /// pick a least admissible bijection and assemble the generators.
    fn assemble(&self, t: usize, s: usize, ca: &[usize], cb: &[usize], phi: &[usize], mut lam: Vec<Vec<Coset>>) -> Result<Coset> {
        close_admissible(&mut lam);
        let adj: Vec<Vec<bool>> = lam.iter().map(|row| row.iter().map(|c| !c.is_empty()).collect()).collect();
        let alpha0 = match least_perfect_matching(&adj) {
            Some(a) => a,
            None => return Ok(Coset::Empty),
        };
        let (ga, gb) = (&self.a.bg[t], &self.b.bg[s]);
        let n = ga.len();
        let combine = |alpha: &[usize]| -> Perm {
            let mut img = vec![usize::MAX; n];
            for (i, &j) in phi.iter().enumerate() {
                img[ga.blue.len() + i] = gb.blue.len() + j;
            }
            for (i, &u) in ca.iter().enumerate() {
                let j = alpha[i];
                let psi = lam[i][j].witness().expect("admissible pairs are nonempty");
                let (gu, gv) = (&self.a.bg[u], &self.b.bg[cb[j]]);
                for (x, &v) in gu.blue.iter().enumerate() {
                    let y = psi.apply(x);
                    img[ga.local(v).unwrap()] = gb.local(gv.blue[y]).unwrap();
                }
            }
            Perm::from_images(img).expect("children partition the cone")
        };
        let psi0 = combine(&alpha0);
        if !is_isomorphism(&ga.graph, &gb.graph, &psi0) {
            return Err(Error::Invariant(format!("combined map at nodes ({t}, {s}) is not an isomorphism")));
        }
        let psi0_inv = psi0.inverse();
        let mut gens: Vec<Perm> = Vec::new();
        for alpha in near_bijections(&alpha0, &adj) {
            let h = psi0_inv.then(&combine(&alpha));
            if !h.is_identity() {
                gens.push(h);
            }
        }
        let mut lifted: Vec<(usize, Perm)> = Vec::new();
        for row in &lam {
            for (j, cell) in row.iter().enumerate() {
                if let Some(group) = cell.group() {
                    let gv = &self.b.bg[cb[j]];
                    for g in group.generators() {
                        let mut img: Vec<usize> = (0..n).collect();
                        for (x, &v) in gv.blue.iter().enumerate() {
                            img[gb.local(v).unwrap()] = gb.local(gv.blue[g.apply(x)]).unwrap();
                        }
                        let h = Perm::from_images(img).expect("a child automorphism fixes the cone");
                        if !h.is_identity() {
                            lifted.push((j, h));
                        }
                    }
                }
            }
        }
        debug_assert!(lifted.iter().all(|(j1, g1)| lifted
            .iter()
            .all(|(j2, g2)| j1 == j2 || g1.then(g2) == g2.then(g1))));
        gens.extend(lifted.into_iter().map(|(_, g)| g));
        if let Some(g) = gens.iter().find(|g| !is_isomorphism(&gb.graph, &gb.graph, g)) {
            return Err(Error::Invariant(format!("generator {g:?} at nodes ({t}, {s}) is not an automorphism")));
        }
        Coset::new(psi0, PermGroup::from_generators(n, gens)?)
    }
}

/// Bijections `W -> W'` between the red vertices that preserve degrees.
fn outside_bijections(wa: &[u64], wb: &[u64]) -> Vec<Vec<usize>> {
    if wa.len() != wb.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(wa.len());
    let mut used = vec![false; wb.len()];
    fn go(wa: &[u64], wb: &[u64], cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == wa.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..wb.len() {
            if !used[j] && wa[i].count_ones() == wb[j].count_ones() {
                used[j] = true;
                cur.push(j);
                go(wa, wb, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    go(wa, wb, &mut cur, &mut used, &mut out);
    out
}

/// Makes every pair joined by an alternating path admissible, with the
/// composed map `ν1 μ1⁻¹ ν2 … νt` as its single element.
fn close_admissible(lam: &mut [Vec<Coset>]) {
    let m = lam.len();
    let base: Vec<Vec<bool>> = lam.iter().map(|row| row.iter().map(|c| !c.is_empty()).collect()).collect();
    for start in 0..m {
        // breadth-first search over (left, right) alternations; `via[j]`
        // records the left node from which right node `j` was reached
        let mut via = vec![usize::MAX; m];
        let mut prev_right = vec![usize::MAX; m];
        let mut seen_left = vec![false; m];
        seen_left[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in 0..m {
                if base[i][j] && via[j] == usize::MAX {
                    via[j] = i;
                    for i2 in 0..m {
                        if base[i2][j] && !seen_left[i2] {
                            seen_left[i2] = true;
                            prev_right[i2] = j;
                            queue.push_back(i2);
                        }
                    }
                }
            }
        }
        for j in 0..m {
            if base[start][j] || via[j] == usize::MAX {
                continue;
            }
            // walk back: j <- via[j] = i_t <- prev_right[i_t] = j_{t-1} <- ...
            let mut steps = Vec::new();
            let (mut i, mut jj) = (via[j], j);
            loop {
                steps.push((i, jj));
                if i == start {
                    break;
                }
                let jp = prev_right[i];
                steps.push((i, jp));
                i = via[jp];
                jj = jp;
            }
            steps.reverse();
            // steps alternate ν (forward) and μ (backward) edges from start
            let mut map: Option<Perm> = None;
            for (k, &(i, jj)) in steps.iter().enumerate() {
                let w = lam[i][jj].witness().expect("path edges are nonempty").clone();
                let w = if k % 2 == 0 { w } else { w.inverse() };
                map = Some(match map {
                    None => w,
                    Some(p) => p.then(&w),
                });
            }
            lam[start][j] = Coset::single(map.expect("a path has an edge"));
        }
    }
}

/// Lexicographically least perfect matching (`alpha[i]` is the partner of
/// left node `i`), if there is one.
fn least_perfect_matching(adj: &[Vec<bool>]) -> Option<Vec<usize>> {
    let m = adj.len();
    let mut fixed: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        let found = (0..m).find(|&j| {
            adj[i][j] && !fixed.contains(&j) && {
                let mut trial = fixed.clone();
                trial.push(j);
                completes(adj, &trial)
            }
        });
        fixed.push(found?);
    }
    Some(fixed)
}

/// Can the partial matching of the first `fixed.len()` left nodes be
/// completed? Kuhn's augmenting paths on the rest.
fn completes(adj: &[Vec<bool>], fixed: &[usize]) -> bool {
    let m = adj.len();
    let mut owner = vec![usize::MAX; m];
    for (i, &j) in fixed.iter().enumerate() {
        owner[j] = i;
    }
    fn augment(i: usize, adj: &[Vec<bool>], owner: &mut [usize], seen: &mut [bool], frozen: usize) -> bool {
        for j in 0..adj.len() {
            if adj[i][j] && !seen[j] {
                seen[j] = true;
                if owner[j] == usize::MAX || (owner[j] >= frozen && augment(owner[j], adj, owner, seen, frozen)) {
                    owner[j] = i;
                    return true;
                }
            }
        }
        false
    }
    (fixed.len()..m).all(|i| augment(i, adj, &mut owner, &mut vec![false; m], fixed.len()))
}

/// Admissible bijections that differ from `alpha0` in at most three
/// positions (including `alpha0`).
fn near_bijections(alpha0: &[usize], adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let m = alpha0.len();
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    out.insert(alpha0.to_vec());
    let admissible = |a: &[usize]| (0..m).all(|i| adj[i][a[i]]);
    for x in 0..m {
        for y in x + 1..m {
            let mut a = alpha0.to_vec();
            a.swap(x, y);
            if admissible(&a) {
                out.insert(a);
            }
            for z in y + 1..m {
                for (p, q, r) in [(y, z, x), (z, x, y)] {
                    let mut a = alpha0.to_vec();
                    a[x] = alpha0[p];
                    a[y] = alpha0[q];
                    a[z] = alpha0[r];
                    if admissible(&a) {
                        out.insert(a);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Runs the dynamic program on two normal decompositions and returns the
/// root cell.
pub fn iso_coset(g1: &Graph, d1: &Decomposition, g2: &Graph, d2: &Decomposition) -> Result<Coset> {
    IsoDp::new(g1, d1, g2, d2)?.run()
}

/// The result of [`isomorphisms`].
#[derive(Clone, Debug)]
pub struct IsoOutcome {
    pub coset: Coset,
    pub stats: DpStats,
    /// Triple-cover cap events while building the two decompositions.
    pub cap_events: usize,
}

/// `ISO(G, G')` for graphs of rank width at most `k`.
pub fn isomorphisms(g1: &Graph, g2: &Graph, k: usize) -> Result<IsoOutcome> {
    isomorphisms_with(g1, g2, k, NodeOptions::default())
}

pub fn isomorphisms_with(g1: &Graph, g2: &Graph, k: usize, opts: NodeOptions) -> Result<IsoOutcome> {
    let name = |e: Error, which: &str| match e {
        Error::RankWidthExceeded { k, .. } => Error::RankWidthExceeded { which: which.into(), k },
        e => e,
    };
    let c1 = canonical_decomposition_with(g1, k, opts).map_err(|e| name(e, "first graph"))?;
    let c2 = canonical_decomposition_with(g2, k, opts).map_err(|e| name(e, "second graph"))?;
    let cap_events = c1.cap_events + c2.cap_events;
    if g1.n() != g2.n() || g1.edge_count() != g2.edge_count() {
        return Ok(IsoOutcome { coset: Coset::Empty, stats: DpStats::default(), cap_events });
    }
    let mut dp = IsoDp::new(g1, &c1.decomposition, g2, &c2.decomposition)?;
    let coset = dp.run()?;
    Ok(IsoOutcome { coset, stats: dp.stats, cap_events })
}
