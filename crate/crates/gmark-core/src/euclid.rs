//! Classical and k-generalized Euclid trees over exact rationals, plus the
//! Fibonacci utilities backing the boundedness estimates.

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::seq::ReducedSeq;
use crate::types::{other_dirs, rat_from_u64, RatTriple};

/// Parameters of a k-generalized Euclid tree: the additive shift and the
/// initial triple. `k = 0` is the classical tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EuclidParams {
    pub k: BigRational,
    pub init: RatTriple,
}

impl EuclidParams {
    /// Panics when k is negative; the shift is nonnegative by contract.
    pub fn new(k: BigRational, init: RatTriple) -> Self {
        assert!(!k.is_negative(), "euclid shift k must be >= 0");
        EuclidParams { k, init }
    }

    pub fn classical(init: RatTriple) -> Self {
        Self::new(BigRational::zero(), init)
    }

    /// True when no component equals (sum of the other two) + k.
    ///
    /// The defining inequality of a k-initial triple; it is only required at
    /// the tree root, so constructors do not enforce it. Interior triples of
    /// a chain necessarily violate it.
    pub fn is_k_initial(&self) -> bool {
        (1..=3usize).all(|i| {
            let (j, l) = other_dirs(i);
            *self.init.get(i) != self.init.get(j) + self.init.get(l) + &self.k
        })
    }
}

/// Replaces component i by k + (sum of the other two). Not an involution.
pub fn euclid_mutate(t: &RatTriple, i: usize, k: &BigRational) -> RatTriple {
    let (j, l) = other_dirs(i);
    t.with_component(i, t.get(j) + t.get(l) + k)
}

/// The |w|+1 exact triples of the chain from `p.init` along `w`.
pub fn euclid_chain(w: &ReducedSeq, p: &EuclidParams) -> Vec<RatTriple> {
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(p.init.clone());
    for &letter in w.entries() {
        out.push(euclid_mutate(out.last().unwrap(), letter as usize, &p.k));
    }
    out
}

/// The pair of triples at the same address in two trees: the canonical
/// isomorphism sends the vertex of one tree to the vertex of the other
/// with the identical mutation address.
pub fn tree_iso(w: &ReducedSeq, pe: &EuclidParams, pk: &EuclidParams) -> (RatTriple, RatTriple) {
    (
        euclid_chain(w, pe).pop().unwrap(),
        euclid_chain(w, pk).pop().unwrap(),
    )
}

/// F_n with F_0 = 0, F_1 = 1.
pub fn fibonacci(n: u64) -> BigUint {
    let (mut a, mut b) = (BigUint::zero(), BigUint::one());
    for _ in 0..n {
        let next = &a + &b;
        a = b;
        b = next;
    }
    a
}

/// Rational lower approximation of the golden ratio (F_16/F_15 < φ), used so
/// the geometric tail bound below stays a rigorous upper bound.
fn phi_lower() -> BigRational {
    BigRational::new(BigInt::from(987), BigInt::from(610))
}

/// Exact partial sum Σ_{n=1..n_terms} 1/F_n together with a rigorous rational
/// bound on the tail Σ_{n>n_terms} 1/F_n.
///
/// The tail bound uses 1/F_n ≤ φ̌^(2−n) with φ̌ = 987/610 < φ (valid since
/// F_n ≥ φ^(n−2) ≥ φ̌^(n−2)), summed geometrically:
/// tail ≤ φ̌^(1−N)·φ̌/(φ̌−1).
pub fn fib_reciprocal_sum(n_terms: usize) -> (BigRational, BigRational) {
    assert!(n_terms >= 1);
    let mut sum = BigRational::zero();
    for n in 1..=n_terms as u64 {
        let f = BigInt::from(fibonacci(n));
        sum += BigRational::new(BigInt::one(), f);
    }
    let phi = phi_lower();
    let tail = phi.pow(1 - n_terms as i32) * &phi / (&phi - BigRational::one());
    (sum, tail)
}

/// base + 2k·(Σ 1/F_n as certified above): an upper bound for every
/// comparison-triple component along sequences using all three directions.
pub fn comparison_upper_bound(base: &BigRational, k: &BigRational) -> BigRational {
    assert!(!k.is_negative());
    let (sum, tail) = fib_reciprocal_sum(64);
    base + rat_from_u64(2) * k * (sum + tail)
}
