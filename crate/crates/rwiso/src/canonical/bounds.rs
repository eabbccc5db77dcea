//! Closed-form constants used as monitors by the decomposition.
//!
//! Several constants are doubly exponential or worse, so the huge ones are
//! reported as base-2 logarithms. Constants that depend on a Ramsey-type
//! threshold without an explicit value are reported as unavailable; the
//! construction never needs them, because it tests the relevant dichotomy
//! directly.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::tangleset::theta_big;

/// The constants of the decomposition for a fixed width bound `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundTable {
    pub k: usize,
}

/// Bounds above this many decimal digits are printed as `2^x` instead.
const DIGIT_LIMIT: usize = 40;

fn show(v: &BigUint) -> String {
    let s = v.to_string();
    if s.len() <= DIGIT_LIMIT {
        s
    } else {
        format!("~2^{}", v.bits() - 1)
    }
}

impl BoundTable {
    pub fn new(k: usize) -> Self {
        BoundTable { k }
    }

    /// Small-vs-big threshold: a set `X` is handled by the small-order case
    /// iff its order is below `(3k+2)k`.
    pub fn small_threshold(&self) -> usize {
        (3 * self.k + 2) * self.k
    }

    /// Bound on the size of a triple cover of a tangle of order `i`.
    pub fn theta(&self, i: usize) -> Option<BigUint> {
        theta_big(i)
    }

    /// The exponent `3^(k2 - l)` with `p(l) = 2^(-3^(k2 - l))`.
    pub fn p_exponent(k2: usize, l: usize) -> BigUint {
        assert!(l <= k2, "p(l) is only defined for l <= k2");
        BigUint::from(3u32).pow((k2 - l) as u32)
    }

    /// `p(l) * whole <= part`, evaluated exactly.
    pub fn at_least_p_fraction(k2: usize, l: usize, part: usize, whole: usize) -> bool {
        let e = Self::p_exponent(k2, l);
        match e.to_u32() {
            Some(e) if e < 64 => (part as u128) << e >= whole as u128,
            // 2^e exceeds any ground-set size, so only part > 0 is needed
            _ => part > 0 || whole == 0,
        }
    }

    /// A separation `Z` of `X` of order `l` is good when
    /// `p(l)|X| <= |Z| < |X|`.
    pub fn is_good(k2: usize, l: usize, z_len: usize, x_len: usize) -> bool {
        z_len < x_len && Self::at_least_p_fraction(k2, l, z_len, x_len)
    }

    /// `part <= (1 - 1/f1)|X|` with `f1 = 1/(p(0) - p(0)^3)`, exactly:
    /// with `E = 3^k2` this is `(whole - part) 2^(3E) >= whole (2^(2E) - 1)`.
    pub fn shrinks_by_f1(k2: usize, part: usize, whole: usize) -> bool {
        if part >= whole {
            return false;
        }
        let e = Self::p_exponent(k2, 0);
        match e.to_u32() {
            Some(e) if 3 * e < 120 => {
                let lhs = ((whole - part) as u128) << (3 * e);
                let rhs = (whole as u128) * ((1u128 << (2 * e)) - 1);
                lhs >= rhs
            }
            // f1 > 2^E > 64 >= whole: any proper subset qualifies
            _ => true,
        }
    }

    /// `log2 f1 ≈ 3^k2` (the exact value exceeds it by less than 2^(1-2E)).
    pub fn f1_log2(k2: usize) -> BigUint {
        Self::p_exponent(k2, 0)
    }

    /// `g(k) = (k+1) 2^k`: fewer compatible rows than this make a row lonely.
    pub fn g(&self) -> BigUint {
        BigUint::from(self.k + 1) << self.k
    }

    /// `h(0) = 1`, `h(i+1) = 2^k h(i) + 4`.
    pub fn h(&self, i: usize) -> BigUint {
        let mut v = BigUint::one();
        for _ in 0..i {
            v = (v << self.k) + 4u32;
        }
        v
    }

    /// Bound on the size of an extension set: `2^k + 2^(2^k + k) g(k) h(k)`.
    pub fn e(&self) -> BigUint {
        let k = self.k;
        let big = (BigUint::one() << ((1usize << k.min(20)) + k)) * self.g() * self.h(k);
        (BigUint::one() << k) + big
    }

    /// An explicit upper bound on `log2` of the index of the tuple
    /// equivalence of order `l`, for sets of order `k1`: a class is fixed
    /// by the part sizes (at most `2^(k1-1)` each), the assignment of the
    /// at most `s = l 2^(k1-1)` tuple vertices to the `l` distinct columns,
    /// and the adjacency among tuple vertices.
    pub fn e1_log2(k1: usize, l: usize) -> f64 {
        let part = 2f64.powi(k1.saturating_sub(1) as i32);
        let s = l as f64 * part;
        let l_f = (l.max(1)) as f64;
        l as f64 * part.log2() + s * l_f.log2() + s * s
    }

    /// `e2(k1) = max over 1 <= l <= 2^k1 of e1(k1, l)`; `e1` is monotone in `l`.
    pub fn e2_log2(k1: usize) -> f64 {
        Self::e1_log2(k1, 1usize << k1.min(30))
    }

    /// `log2 c1(k, k1)`: `c1 = 1` below the small threshold, and
    /// `c1(k, k1) = 4 e2(k1) c1(k, k1 - 1)` above it.
    pub fn c1_log2(&self, k1: usize) -> f64 {
        let t = self.small_threshold();
        let mut acc = 0.0;
        for j in t..=k1 {
            acc += 2.0 + Self::e2_log2(j);
        }
        acc
    }

    /// The explicit terms of `a3`; the remaining term needs `a1`, which is
    /// not available in closed form.
    pub fn a3_explicit_terms(&self) -> (usize, Option<BigUint>) {
        let k = self.k;
        let small = 2 * self.small_threshold() - 2;
        let cover = self.theta((3 * k).saturating_sub(2)).map(|t| (t + 1u32) * k);
        (small, cover)
    }

    pub fn report(&self) -> BoundsReport {
        let k = self.k;
        let (a3_small, a3_cover) = self.a3_explicit_terms();
        BoundsReport {
            k,
            small_threshold: self.small_threshold(),
            theta_3k_minus_2: self.theta((3 * k).saturating_sub(2)).map(|v| show(&v)),
            g: show(&self.g()),
            h_k: show(&self.h(k)),
            e: show(&self.e()),
            f1_log2_at_threshold: show(&Self::f1_log2(k + self.small_threshold())),
            e2_log2_at_threshold: Self::e2_log2(self.small_threshold()),
            a3_explicit_terms: (a3_small, a3_cover.map(|v| show(&v))),
            unavailable: vec!["a1", "b1", "a2", "a3", "g1", "a(k)"],
        }
    }
}

/// A serializable summary of the constants for one `k`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub k: usize,
    pub small_threshold: usize,
    pub theta_3k_minus_2: Option<String>,
    pub g: String,
    pub h_k: String,
    pub e: String,
    pub f1_log2_at_threshold: String,
    pub e2_log2_at_threshold: f64,
    pub a3_explicit_terms: (usize, Option<String>),
    /// Constants that depend on a Ramsey threshold with no explicit value.
    pub unavailable: Vec<&'static str>,
}
