//! Permutations, permutation groups with deterministic stabilizer chains,
//! and cosets `sigma·Gamma` of bijections between two finite sets.
//!
//! Composition is left to right: `a.then(&b)` first applies `a`, then `b`.
//! A coset `sigma·Gamma` from `V` to `V'` consists of the maps `x ↦ g(sigma(x))`
//! for `g ∈ Gamma ≤ Sym(V')`.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Checks bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::Precondition(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
        }
        Ok(Perm(images))
    }

    /// Builds a permutation from disjoint cycles.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut img: Vec<usize> = (0..n).collect();
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                if x >= n {
                    return Err(Error::InvalidIndex(x));
                }
                img[x] = c[(i + 1) % c.len()];
            }
        }
        Perm::from_images(img)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(self.0.iter().map(|&x| other.0[x]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x] = i;
        }
        Perm(inv)
    }

    /// Smallest point not fixed.
    pub fn first_moved(&self) -> Option<usize> {
        self.0.iter().enumerate().find(|(i, &x)| *i != x).map(|(i, _)| i)
    }

    /// Extends a permutation of `{0..k-1}` to `{0..n-1}` by fixing the rest.
    pub fn extend_to(&self, n: usize) -> Perm {
        let mut img = self.0.clone();
        img.extend(self.0.len()..n);
        Perm(img)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Serialize for Perm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// One level of a stabilizer chain: the orbit of `base` under the level
/// group, with a transversal element mapping `base` to every orbit point.
#[derive(Clone, Debug)]
struct Level {
    base: usize,
    gens: Vec<Perm>,
    orbit: Vec<usize>,
    transversal: Vec<Option<Perm>>,
}

impl Level {
    fn new(base: usize, degree: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        Level { base, gens: Vec::new(), orbit: vec![base], transversal }
    }

    /// Recomputes the orbit breadth-first, in generator order.
    fn rebuild_orbit(&mut self, degree: usize) {
        let mut transversal: Vec<Option<Perm>> = vec![None; degree];
        transversal[self.base] = Some(Perm::identity(degree));
        let mut orbit = vec![self.base];
        let mut i = 0;
        while i < orbit.len() {
            let b = orbit[i];
            for g in &self.gens {
                let c = g.apply(b);
                if transversal[c].is_none() {
                    let u = transversal[b].as_ref().unwrap().then(g);
                    transversal[c] = Some(u);
                    orbit.push(c);
                }
            }
            i += 1;
        }
        self.orbit = orbit;
        self.transversal = transversal;
    }
}

/// A base and strong generating set built by the deterministic
/// Schreier–Sims algorithm. The base starts with a prescribed prefix; further
/// base points are the smallest points moved by the residues that need them.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabChain {
    pub fn new(degree: usize, gens: &[Perm], base_prefix: &[usize]) -> Self {
        let mut chain = StabChain { degree, levels: base_prefix.iter().map(|&b| Level::new(b, degree)).collect() };
        for g in gens {
            if !chain.contains(g) {
                chain.extend(0, g.clone());
            }
        }
        chain
    }

    fn extend(&mut self, i: usize, g: Perm) {
        if i == self.levels.len() {
            let b = g.first_moved().expect("identity residue");
            self.levels.push(Level::new(b, self.degree));
        }
        self.levels[i].gens.push(g);
        self.levels[i].rebuild_orbit(self.degree);
        // Sift all Schreier generators of level i into the levels below.
        let mut pairs = Vec::new();
        {
            let lvl = &self.levels[i];
            for &b in &lvl.orbit {
                for xi in 0..lvl.gens.len() {
                    pairs.push((b, xi));
                }
            }
        }
        for (b, xi) in pairs {
            let s = {
                let lvl = &self.levels[i];
                let x = &lvl.gens[xi];
                let ub = lvl.transversal[b].as_ref().unwrap();
                let c = x.apply(b);
                let uc = lvl.transversal[c].as_ref().unwrap();
                ub.then(x).then(&uc.inverse())
            };
            let (_, h) = self.sift(s, i + 1);
            if !h.is_identity() {
                self.extend(i + 1, h);
            }
        }
    }

    /// Strips `g` through the levels starting at `from`; returns the level at
    /// which stripping stopped and the residue.
    fn sift(&self, mut g: Perm, from: usize) -> (usize, Perm) {
        for (l, lvl) in self.levels.iter().enumerate().skip(from) {
            let b = g.apply(lvl.base);
            match &lvl.transversal[b] {
                Some(u) => g = g.then(&u.inverse()),
                None => return (l, g),
            }
        }
        (self.levels.len(), g)
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree && self.sift(g.clone(), 0).1.is_identity()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// Generators of the pointwise stabilizer of the first `depth` base
    /// points.
    pub fn stabilizer_gens(&self, depth: usize) -> Vec<Perm> {
        let mut out: Vec<Perm> = Vec::new();
        for l in self.levels.iter().skip(depth) {
            out.extend(l.gens.iter().cloned());
        }
        out
    }

    pub fn orbit_at(&self, level: usize) -> &[usize] {
        &self.levels[level].orbit
    }

    /// Transversal element of `level` mapping its base point to `point`.
    pub fn transversal(&self, level: usize, point: usize) -> Option<&Perm> {
        self.levels[level].transversal[point].as_ref()
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }
}

/// A permutation group given by generators; the stabilizer chain (base in
/// ascending point order) is built on first use.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    chain: OnceLock<StabChain>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup").field("degree", &self.degree).field("gens", &self.gens).finish()
    }
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        PermGroup { degree, gens: Vec::new(), chain: OnceLock::new() }
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            gens.push(Perm::from_cycles(degree, &[&[0, 1]]).unwrap());
        }
        if degree >= 3 {
            let cyc: Vec<usize> = (0..degree).collect();
            gens.push(Perm::from_cycles(degree, &[&cyc]).unwrap());
        }
        PermGroup::from_generators(degree, gens).unwrap()
    }

    /// Identity generators are dropped; duplicates are kept out.
    pub fn from_generators(degree: usize, gens: Vec<Perm>) -> Result<Self> {
        let mut kept: Vec<Perm> = Vec::new();
        for g in gens {
            if g.degree() != degree {
                return Err(Error::Precondition(format!(
                    "generator of degree {} in a group of degree {degree}",
                    g.degree()
                )));
            }
            if !g.is_identity() && !kept.contains(&g) {
                kept.push(g);
            }
        }
        Ok(PermGroup { degree, gens: kept, chain: OnceLock::new() })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn chain(&self) -> &StabChain {
        self.chain.get_or_init(|| StabChain::new(self.degree, &self.gens, &[]))
    }

    pub fn order(&self) -> BigUint {
        self.chain().order()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain().contains(g)
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        seen[x] = true;
        let mut orbit = vec![x];
        let mut i = 0;
        while i < orbit.len() {
            let b = orbit[i];
            for g in &self.gens {
                let c = g.apply(b);
                if !seen[c] {
                    seen[c] = true;
                    orbit.push(c);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        orbit
    }

    /// Stabilizer of a point, via a chain whose base starts at that point.
    pub fn stabilizer(&self, x: usize) -> PermGroup {
        let chain = StabChain::new(self.degree, &self.gens, &[x]);
        PermGroup::from_generators(self.degree, chain.stabilizer_gens(1)).unwrap()
    }

    /// Adds generators not already in the group.
    pub fn join(&self, extra: &[Perm]) -> PermGroup {
        let mut chain = self.chain().clone();
        let mut gens = self.gens.clone();
        for g in extra {
            if !chain.contains(g) {
                chain.extend(0, g.clone());
                gens.push(g.clone());
            }
        }
        let grp = PermGroup { degree: self.degree, gens, chain: OnceLock::new() };
        let _ = grp.chain.set(chain);
        grp
    }

    /// All elements; for tests and small groups only.
    pub fn elements(&self, cap: usize) -> Result<Vec<Perm>> {
        let chain = self.chain();
        let mut out = vec![Perm::identity(self.degree)];
        // g = t_r ... t_1 with t_i from level i's transversal
        for l in (0..chain.depth()).rev() {
            let mut next = Vec::new();
            for g in &out {
                for &p in chain.orbit_at(l) {
                    next.push(g.then(chain.transversal(l, p).unwrap()));
                    if next.len() > cap {
                        return Err(Error::SearchCap { free: next.len(), cap });
                    }
                }
            }
            out = next;
        }
        out.sort();
        Ok(out)
    }
}

/// A set of bijections `V -> V'` of the form `sigma·Gamma`, or empty.
#[derive(Clone, Debug)]
pub enum Coset {
    Empty,
    NonEmpty { sigma: Perm, group: PermGroup },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CosetJson {
    pub empty: bool,
    pub witness: Vec<usize>,
    pub generators: Vec<Vec<usize>>,
    pub order: String,
}

impl Coset {
    pub fn single(sigma: Perm) -> Self {
        let n = sigma.degree();
        Coset::NonEmpty { sigma, group: PermGroup::trivial(n) }
    }

    pub fn new(sigma: Perm, group: PermGroup) -> Result<Self> {
        if sigma.degree() != group.degree() {
            return Err(Error::Precondition("coset witness and group have different degrees".into()));
        }
        Ok(Coset::NonEmpty { sigma, group })
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Coset::Empty)
    }

    pub fn witness(&self) -> Option<&Perm> {
        match self {
            Coset::Empty => None,
            Coset::NonEmpty { sigma, .. } => Some(sigma),
        }
    }

    pub fn group(&self) -> Option<&PermGroup> {
        match self {
            Coset::Empty => None,
            Coset::NonEmpty { group, .. } => Some(group),
        }
    }

    pub fn size(&self) -> BigUint {
        match self {
            Coset::Empty => BigUint::default(),
            Coset::NonEmpty { group, .. } => group.order(),
        }
    }

    pub fn contains(&self, psi: &Perm) -> bool {
        match self {
            Coset::Empty => false,
            Coset::NonEmpty { sigma, group } => {
                psi.degree() == sigma.degree() && group.contains(&sigma.inverse().then(psi))
            }
        }
    }

    /// `self ⊆ other`.
    pub fn is_subcoset_of(&self, other: &Coset) -> bool {
        match (self, other) {
            (Coset::Empty, _) => true,
            (_, Coset::Empty) => false,
            (Coset::NonEmpty { sigma, group }, Coset::NonEmpty { group: g2, .. }) => {
                other.contains(sigma) && group.generators().iter().all(|g| g2.contains(g))
            }
        }
    }

    /// Equality as sets of maps.
    pub fn same_as(&self, other: &Coset) -> bool {
        match (self, other) {
            (Coset::Empty, Coset::Empty) => true,
            (Coset::NonEmpty { .. }, Coset::NonEmpty { .. }) => {
                self.size() == other.size() && self.is_subcoset_of(other)
            }
            _ => false,
        }
    }

    /// Least upper bound: the smallest coset containing both.
    pub fn lub(&self, other: &Coset) -> Result<Coset> {
        match (self, other) {
            (Coset::Empty, x) | (x, Coset::Empty) => Ok(x.clone()),
            (Coset::NonEmpty { sigma: s1, group: g1 }, Coset::NonEmpty { sigma: s2, group: g2 }) => {
                if s1.degree() != s2.degree() {
                    return Err(Error::Precondition("lub of cosets with different signatures".into()));
                }
                let delta = s1.inverse().then(s2);
                let mut extra = vec![delta];
                extra.extend(g2.generators().iter().cloned());
                Ok(Coset::NonEmpty { sigma: s1.clone(), group: g1.join(&extra) })
            }
        }
    }

    /// `{psi in self : psi(w) = phi(w) for all (w, phi(w)) in pairs}`.
    pub fn restrict(&self, pairs: &[(usize, usize)]) -> Coset {
        let (sigma, group) = match self {
            Coset::Empty => return Coset::Empty,
            Coset::NonEmpty { sigma, group } => (sigma, group),
        };
        if pairs.is_empty() {
            return self.clone();
        }
        let n = sigma.degree();
        let targets: Vec<usize> = pairs.iter().map(|&(_, a)| a).collect();
        let chain = StabChain::new(n, group.generators(), &targets);
        let mut sigma = sigma.clone();
        for (j, &(w, a)) in pairs.iter().enumerate() {
            let b = sigma.apply(w);
            // need g in the current group with g(b) = a; the level-j
            // transversal maps a to b, so its inverse does the job
            match chain.transversal(j, b) {
                Some(u) => sigma = sigma.then(&u.inverse()),
                None => return Coset::Empty,
            }
            debug_assert_eq!(sigma.apply(w), a);
        }
        let group = PermGroup::from_generators(n, chain.stabilizer_gens(pairs.len())).unwrap();
        Coset::NonEmpty { sigma, group }
    }

    /// Elements, for tests and small cosets.
    pub fn elements(&self, cap: usize) -> Result<Vec<Perm>> {
        match self {
            Coset::Empty => Ok(Vec::new()),
            Coset::NonEmpty { sigma, group } => {
                let mut v: Vec<Perm> = group.elements(cap)?.iter().map(|g| sigma.then(g)).collect();
                v.sort();
                Ok(v)
            }
        }
    }

    pub fn to_json(&self) -> CosetJson {
        match self {
            Coset::Empty => CosetJson { empty: true, witness: vec![], generators: vec![], order: "0".into() },
            Coset::NonEmpty { sigma, group } => CosetJson {
                empty: false,
                witness: sigma.images().to_vec(),
                generators: group.generators().iter().map(|g| g.images().to_vec()).collect(),
                order: group.order().to_string(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn p(cycles: &[&[usize]], n: usize) -> Perm {
        Perm::from_cycles(n, cycles).unwrap()
    }

    /// Closure by breadth-first multiplication: the independent oracle.
    fn closure(n: usize, gens: &[Perm]) -> BTreeSet<Perm> {
        let mut set = BTreeSet::new();
        set.insert(Perm::identity(n));
        let mut frontier = vec![Perm::identity(n)];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = x.then(g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    fn all_perms(n: usize) -> Vec<Perm> {
        use itertools::Itertools;
        (0..n).permutations(n).map(|v| Perm::from_images(v).unwrap()).collect()
    }

    #[test]
    fn group_order_examples() {
        let g = PermGroup::from_generators(2, vec![p(&[&[0, 1]], 2)]).unwrap();
        assert_eq!(g.order(), BigUint::from(2u32));
        assert_eq!(PermGroup::trivial(5).order(), BigUint::from(1u32));
        let s3 = PermGroup::from_generators(3, vec![p(&[&[0, 1]], 3), p(&[&[0, 1, 2]], 3)]).unwrap();
        assert_eq!(s3.order(), BigUint::from(closure(3, s3.generators()).len()));
        assert_eq!(s3.order(), BigUint::from(6u32));
        assert_eq!(PermGroup::symmetric(8).order(), BigUint::from(40320u32));
    }

    #[test]
    fn orbit_stabilizer_examples() {
        let t = PermGroup::trivial(4);
        assert_eq!(t.orbit(2), vec![2]);
        assert_eq!(t.stabilizer(2).order(), BigUint::from(1u32));
        let s3 = PermGroup::symmetric(3);
        assert_eq!(s3.orbit(1), vec![0, 1, 2]);
        assert_eq!(s3.stabilizer(1).order(), BigUint::from(2u32));
    }

    #[test]
    fn lub_examples() {
        let id = Coset::single(Perm::identity(2));
        let swap = Coset::single(p(&[&[0, 1]], 2));
        assert!(id.lub(&id).unwrap().same_as(&id));
        let l = id.lub(&swap).unwrap();
        assert_eq!(l.size(), BigUint::from(2u32));
        assert!(l.contains(&Perm::identity(2)) && l.contains(&p(&[&[0, 1]], 2)));
        assert!(Coset::Empty.lub(&swap).unwrap().same_as(&swap));
        // two singletons sigma1, sigma2 with no group: delta must still be added
        let a = Coset::single(p(&[&[0, 1, 2]], 3));
        let b = Coset::single(p(&[&[0, 2, 1]], 3));
        let l = a.lub(&b).unwrap();
        assert!(l.contains(a.witness().unwrap()) && l.contains(b.witness().unwrap()));
        assert_eq!(l.size(), BigUint::from(3u32));
    }

    #[test]
    fn restrict_examples() {
        let s3 = Coset::new(Perm::identity(3), PermGroup::symmetric(3)).unwrap();
        assert!(s3.restrict(&[]).same_as(&s3));
        let r = s3.restrict(&[(0, 0)]);
        assert_eq!(r.size(), BigUint::from(2u32));
        let r = s3.restrict(&[(0, 2), (1, 0)]);
        assert_eq!(r.size(), BigUint::from(1u32));
        assert_eq!(r.witness().unwrap().images(), &[2, 0, 1]);
        let c = Coset::single(Perm::identity(3));
        assert!(c.restrict(&[(0, 1)]).is_empty());
    }

    /// All subgroups of S_n (n <= 4), as element sets, by closing every pair
    /// of generators (every subgroup of S_4 is 2-generated).
    fn all_subgroups(n: usize) -> Vec<BTreeSet<Perm>> {
        let perms = all_perms(n);
        let mut out: BTreeSet<BTreeSet<Perm>> = BTreeSet::new();
        for a in &perms {
            for b in &perms {
                out.insert(closure(n, &[a.clone(), b.clone()]));
            }
        }
        out.into_iter().collect()
    }

    #[test]
    fn lub_is_minimal_against_all_cosets_of_s4() {
        let n = 4;
        let subgroups = all_subgroups(n);
        assert_eq!(subgroups.len(), 30);
        let perms = all_perms(n);
        // every coset sigma·H as a set of maps
        let mut cosets: BTreeSet<BTreeSet<Perm>> = BTreeSet::new();
        for h in &subgroups {
            for s in &perms {
                cosets.insert(h.iter().map(|g| s.then(g)).collect());
            }
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sub: Vec<_> = subgroups.iter().collect();
        for _ in 0..150 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let h = sub[rng.gen_range(0..sub.len())];
                let s = perms[rng.gen_range(0..perms.len())].clone();
                let gens: Vec<Perm> = h.iter().cloned().collect();
                Coset::new(s, PermGroup::from_generators(n, gens).unwrap()).unwrap()
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let l = a.lub(&b).unwrap();
            let le: BTreeSet<Perm> = l.elements(1000).unwrap().into_iter().collect();
            let ae: BTreeSet<Perm> = a.elements(1000).unwrap().into_iter().collect();
            let be: BTreeSet<Perm> = b.elements(1000).unwrap().into_iter().collect();
            assert!(ae.is_subset(&le) && be.is_subset(&le));
            let best = cosets
                .iter()
                .filter(|c| ae.is_subset(c) && be.is_subset(c))
                .map(|c| c.len())
                .min()
                .unwrap();
            assert_eq!(le.len(), best);
        }
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Perm> {
        Just((0..n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|v| Perm::from_images(v).unwrap())
    }

    fn arb_group_coset() -> impl Strategy<Value = (usize, Perm, Vec<Perm>)> {
        (2usize..=7).prop_flat_map(|n| (Just(n), arb_perm(n), proptest::collection::vec(arb_perm(n), 0..3)))
    }

    proptest! {
        #[test]
        fn chain_matches_closure((n, _s, gens) in arb_group_coset()) {
            let g = PermGroup::from_generators(n, gens.clone()).unwrap();
            let cl = closure(n, &gens);
            prop_assert_eq!(g.order(), BigUint::from(cl.len()));
            for x in all_perms(n).iter().take(720) {
                prop_assert_eq!(g.contains(x), cl.contains(x));
            }
            let el: BTreeSet<Perm> = g.elements(10_000).unwrap().into_iter().collect();
            prop_assert_eq!(el, cl);
        }

        #[test]
        fn orbit_stabilizer_identity((n, _s, gens) in arb_group_coset(), x in 0usize..7) {
            let x = x % n;
            let g = PermGroup::from_generators(n, gens).unwrap();
            let st = g.stabilizer(x);
            prop_assert_eq!(BigUint::from(g.orbit(x).len()) * st.order(), g.order());
            for h in st.generators() {
                prop_assert_eq!(h.apply(x), x);
            }
        }

        #[test]
        fn restrict_matches_filter((n, s, gens) in arb_group_coset(), raw in proptest::collection::vec((0usize..7, 0usize..7), 0..4)) {
            let c = Coset::new(s, PermGroup::from_generators(n, gens).unwrap()).unwrap();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for (w, a) in raw {
                let (w, a) = (w % n, a % n);
                if pairs.iter().all(|&(w2, a2)| w2 != w && a2 != a) {
                    pairs.push((w, a));
                }
            }
            let r = c.restrict(&pairs);
            let expect: Vec<Perm> = c.elements(10_000).unwrap().into_iter()
                .filter(|psi| pairs.iter().all(|&(w, a)| psi.apply(w) == a)).collect();
            prop_assert_eq!(r.elements(10_000).unwrap(), expect);
            prop_assert!(r.is_subcoset_of(&c));
        }

        #[test]
        fn lub_laws((n, s, gens) in arb_group_coset(), t in arb_perm(7), u in arb_perm(7)) {
            let t = if n == 7 { t } else { Perm::identity(n) };
            let u = if n == 7 { u } else { Perm::identity(n) };
            let a = Coset::new(s, PermGroup::from_generators(n, gens).unwrap()).unwrap();
            let b = Coset::single(t);
            let c = Coset::single(u);
            prop_assert!(a.lub(&a).unwrap().same_as(&a));
            prop_assert!(a.lub(&b).unwrap().same_as(&b.lub(&a).unwrap()));
            let left = a.lub(&b).unwrap().lub(&c).unwrap();
            let right = a.lub(&b.lub(&c).unwrap()).unwrap();
            prop_assert!(left.same_as(&right));
        }

        #[test]
        fn coset_membership_laws((n, s, gens) in arb_group_coset()) {
            let c = Coset::new(s.clone(), PermGroup::from_generators(n, gens).unwrap()).unwrap();
            for e in c.elements(10_000).unwrap() {
                // sigma^-1 sigma' in Gamma and sigma' Gamma = sigma Gamma
                prop_assert!(c.group().unwrap().contains(&s.inverse().then(&e)));
                let other = Coset::new(e, c.group().unwrap().clone()).unwrap();
                prop_assert!(other.same_as(&c));
            }
        }
    }
}
