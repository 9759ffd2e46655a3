//! Exact engine for the generalized Markov equation: solution checking, the
//! three mutations, chain evaluation, singular classification, and bounded
//! breadth-first enumeration of the solution tree.

use num::bigint::BigUint;
use num::{Integer, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::seq::ReducedSeq;
use crate::types::{other_dirs, BigTriple, LambdaParams};

/// Default per-component cap in decimal digits for [`chain`]; admits depth
/// ≈ 25 on worst-case sequences while bounding memory. Deeper analysis
/// belongs to the log-domain engine in [`crate::dynamics`].
pub const DEFAULT_DIGIT_BUDGET: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkovError {
    #[error("mutation at {dir} of a non-solution does not divide evenly")]
    NonIntegerResult { dir: usize },
    #[error("component would exceed {budget} decimal digits; last safe depth {last_safe_depth}")]
    DigitBudgetExceeded { last_safe_depth: usize, budget: usize },
    #[error("{triple} does not satisfy the equation for lambda ({lambda})")]
    NotASolution { triple: String, lambda: LambdaParams },
}

/// True iff x1²+x2²+x3²+λ3·x1x2+λ1·x2x3+λ2·x3x1 = (3+λ1+λ2+λ3)·x1x2x3.
pub fn is_solution(t: &BigTriple, lambda: &LambdaParams) -> bool {
    let [x1, x2, x3] = t.components();
    let lhs = x1 * x1
        + x2 * x2
        + x3 * x3
        + x1 * x2 * lambda.l3
        + x2 * x3 * lambda.l1
        + x3 * x1 * lambda.l2;
    let rhs = x1 * x2 * x3 * BigUint::from(lambda.k_lambda());
    lhs == rhs
}

/// Numerator of the mutation at direction i: x_j² + λ_i·x_j·x_k + x_k²
/// over the two untouched components.
fn mutation_numerator(t: &BigTriple, i: usize, lambda: &LambdaParams) -> BigUint {
    let (j, k) = other_dirs(i);
    let (xj, xk) = (t.get(j), t.get(k));
    xj * xj + xj * xk * lambda.get(i) + xk * xk
}

/// Replaces component i by (x_j² + λ_i·x_j·x_k + x_k²)/x_i.
///
/// On solutions the division is exact (Laurent phenomenon); on arbitrary
/// triples it may not be, which surfaces as `NonIntegerResult`.
pub fn mutate(t: &BigTriple, i: usize, lambda: &LambdaParams) -> Result<BigTriple, MarkovError> {
    let num = mutation_numerator(t, i, lambda);
    let (q, r) = num.div_rem(t.get(i));
    if !r.is_zero() {
        return Err(MarkovError::NonIntegerResult { dir: i });
    }
    Ok(t.with_component(i, q))
}

/// A mutation chain: `triples[0]` is the start, `triples[d]` the result of
/// applying the first d letters of `seq`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovChain {
    pub lambda: LambdaParams,
    pub seq: ReducedSeq,
    pub triples: Vec<BigTriple>,
}

impl MarkovChain {
    pub fn last(&self) -> &BigTriple {
        self.triples.last().unwrap()
    }
}

/// Evaluates the full chain from `start` along `w`, aborting cleanly when any
/// component would exceed `digit_budget` decimal digits.
pub fn chain(
    w: &ReducedSeq,
    lambda: &LambdaParams,
    start: BigTriple,
    digit_budget: usize,
) -> Result<MarkovChain, MarkovError> {
    if !is_solution(&start, lambda) {
        return Err(MarkovError::NotASolution {
            triple: start.to_string(),
            lambda: *lambda,
        });
    }
    let mut triples = Vec::with_capacity(w.len() + 1);
    triples.push(start);
    for (step, &letter) in w.entries().iter().enumerate() {
        let cur = triples.last().unwrap();
        let next = mutate(cur, letter as usize, lambda)?;
        if decimal_digits_exceed(next.get(letter as usize), digit_budget) {
            return Err(MarkovError::DigitBudgetExceeded {
                last_safe_depth: step,
                budget: digit_budget,
            });
        }
        triples.push(next);
    }
    Ok(MarkovChain { lambda: *lambda, seq: w.clone(), triples })
}

/// Cheap digit-count test: resolves via bit length except in a narrow
/// uncertainty band, where it falls back to exact decimal length.
fn decimal_digits_exceed(x: &BigUint, budget: usize) -> bool {
    let approx = x.bits() as f64 * std::f64::consts::LOG10_2;
    if approx > budget as f64 + 1.0 {
        return true;
    }
    if approx < budget as f64 - 1.0 {
        return false;
    }
    x.to_string().len() > budget
}

/// True iff t is one of (1,1,1), (λ1+2,1,1), (1,λ2+2,1), (1,1,λ3+2).
///
/// These are exactly the solutions with a repeated entry, so they are the
/// triples without a strict maximum.
pub fn is_singular(t: &BigTriple, lambda: &LambdaParams) -> Result<bool, MarkovError> {
    if !is_solution(t, lambda) {
        return Err(MarkovError::NotASolution {
            triple: t.to_string(),
            lambda: *lambda,
        });
    }
    let one = BigUint::from(1u8);
    let [x1, x2, x3] = t.components();
    let singular = (x1 == &one && x2 == &one && x3 == &one)
        || (x2 == &one && x3 == &one && *x1 == BigUint::from(lambda.l1 as u64 + 2))
        || (x1 == &one && x3 == &one && *x2 == BigUint::from(lambda.l2 as u64 + 2))
        || (x1 == &one && x2 == &one && *x3 == BigUint::from(lambda.l3 as u64 + 2));
    Ok(singular)
}

/// 1-based index of the strict maximum, or None when the maximum repeats.
pub fn argmax_index(t: &BigTriple) -> Option<usize> {
    let m = t.max_component();
    let mut idx = None;
    for i in 1..=3 {
        if t.get(i) == m {
            if idx.is_some() {
                return None;
            }
            idx = Some(i);
        }
    }
    idx
}

/// All solutions reachable from (1,1,1) whose maximum component is ≤ `bound`,
/// each with its canonical (shortest) mutation address.
///
/// BFS never reverses the last mutation, and prunes any child whose mutated
/// component exceeds the bound; this is complete because new components only
/// grow along non-reversing chains. Output is sorted by (max component,
/// lexicographic triple) and is deterministic regardless of thread count.
pub fn enumerate_tree(lambda: &LambdaParams, bound: u64) -> Vec<(ReducedSeq, BigTriple)> {
    assert!(bound >= 1, "bound must be >= 1");
    let bound = BigUint::from(bound);
    let root = (ReducedSeq::empty(), BigTriple::ones());
    let mut out: Vec<(ReducedSeq, BigTriple)> = Vec::new();
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let children: Vec<(ReducedSeq, BigTriple)> = frontier
            .par_iter()
            .flat_map_iter(|(addr, t)| {
                let lambda = *lambda;
                let bound = bound.clone();
                (1..=3usize).filter_map(move |i| {
                    let child_addr = addr.child(i as u8)?;
                    let child = mutate(t, i, &lambda).expect("solutions stay integral");
                    if child.get(i) > &bound {
                        return None;
                    }
                    Some((child_addr, child))
                })
            })
            .collect();
        out.append(&mut frontier);
        frontier = children;
    }
    out.sort_by(|a, b| {
        (a.1.max_component(), a.1.components()).cmp(&(b.1.max_component(), b.1.components()))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(a: u32, b: u32, c: u32) -> LambdaParams {
        LambdaParams::new(a, b, c)
    }

    fn seq(s: &str) -> ReducedSeq {
        s.parse().unwrap()
    }

    #[test]
    fn solution_predicate() {
        assert!(is_solution(&BigTriple::from_u64(194, 13, 5), &lam(0, 0, 0)));
        assert!(!is_solution(&BigTriple::from_u64(2, 2, 2), &lam(0, 0, 0)));
        assert!(is_solution(&BigTriple::from_u64(29186, 169, 25), &lam(0, 2, 2)));
    }

    #[test]
    fn single_mutations() {
        let l = lam(0, 2, 2);
        assert_eq!(
            mutate(&BigTriple::ones(), 2, &l).unwrap(),
            BigTriple::from_u64(1, 4, 1)
        );
        assert_eq!(
            mutate(&BigTriple::from_u64(2, 5, 1), 3, &lam(0, 0, 0)).unwrap(),
            BigTriple::from_u64(2, 5, 29)
        );
        assert_eq!(
            mutate(&BigTriple::from_u64(29186, 169, 25), 2, &l).unwrap(),
            BigTriple::from_u64(29186, 5049009, 25)
        );
    }

    #[test]
    fn mutation_is_involutive() {
        let t = BigTriple::from_u64(433, 5, 29);
        let l = lam(0, 0, 0);
        for i in 1..=3 {
            let back = mutate(&mutate(&t, i, &l).unwrap(), i, &l).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn non_integer_result_detected() {
        // (1,1,3) is not a solution for λ=0; mutating at 3 divides 2 by 3
        let err = mutate(&BigTriple::from_u64(1, 1, 3), 3, &lam(0, 0, 0)).unwrap_err();
        assert_eq!(err, MarkovError::NonIntegerResult { dir: 3 });
    }

    #[test]
    fn chains() {
        let c = chain(&seq("2,3,2,1"), &lam(0, 2, 2), BigTriple::ones(), 1000).unwrap();
        assert_eq!(c.last(), &BigTriple::from_u64(29186, 169, 25));

        let c = chain(&seq("1,2,1,2,1,2"), &lam(0, 0, 0), BigTriple::ones(), 1000).unwrap();
        assert_eq!(c.last(), &BigTriple::from_u64(89, 233, 1));

        let c = chain(
            &seq("1,2,1,2,3,1,3,2,1,3"),
            &lam(0, 2, 2),
            BigTriple::ones(),
            1000,
        )
        .unwrap();
        assert_eq!(c.triples.len(), 11);
        assert_eq!(
            c.triples[7],
            BigTriple::from_u64(76951097, 196, 105422946721)
        );
    }

    #[test]
    fn chain_rejects_non_solution_start() {
        let err = chain(&seq("1"), &lam(0, 0, 0), BigTriple::from_u64(2, 2, 2), 100).unwrap_err();
        assert!(matches!(err, MarkovError::NotASolution { .. }));
    }

    #[test]
    fn digit_budget_aborts_with_depth() {
        let err = chain(
            &seq("1,2,1,2,1,2,1,2,1,2"),
            &lam(3, 3, 3),
            BigTriple::ones(),
            3,
        )
        .unwrap_err();
        match err {
            MarkovError::DigitBudgetExceeded { last_safe_depth, budget: 3 } => {
                assert!(last_safe_depth < 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_classification() {
        let l = lam(0, 2, 2);
        assert!(is_singular(&BigTriple::ones(), &l).unwrap());
        assert!(is_singular(&BigTriple::from_u64(1, 4, 1), &l).unwrap());
        assert!(!is_singular(&BigTriple::from_u64(2, 9, 1), &l).unwrap());
        assert!(is_singular(&BigTriple::from_u64(2, 1, 1), &l).unwrap());
        assert!(is_singular(&BigTriple::from_u64(2, 2, 2), &l).is_err());
    }

    #[test]
    fn argmax() {
        assert_eq!(argmax_index(&BigTriple::from_u64(2, 5, 29)), Some(3));
        assert_eq!(argmax_index(&BigTriple::ones()), None);
        assert_eq!(argmax_index(&BigTriple::from_u64(433, 5, 29)), Some(1));
        assert_eq!(argmax_index(&BigTriple::from_u64(2, 1, 2)), None);
    }

    #[test]
    fn tree_enumeration_small() {
        let got = enumerate_tree(&lam(0, 2, 2), 25);
        let triples: Vec<BigTriple> = got.iter().map(|(_, t)| t.clone()).collect();
        for expect in [
            (1, 1, 1),
            (2, 1, 1),
            (1, 4, 1),
            (1, 1, 4),
            (2, 9, 1),
            (2, 1, 9),
            (17, 4, 1),
            (1, 4, 25),
            (17, 1, 4),
            (1, 25, 4),
        ] {
            let t = BigTriple::from_u64(expect.0, expect.1, expect.2);
            assert!(triples.contains(&t), "missing {t}");
        }
        assert_eq!(triples.len(), 10);

        let focused = enumerate_tree(&lam(0, 0, 0), 5);
        let maxima: std::collections::BTreeSet<u64> = focused
            .iter()
            .map(|(_, t)| {
                use num::ToPrimitive;
                t.max_component().to_u64().unwrap()
            })
            .collect();
        assert_eq!(maxima.into_iter().collect::<Vec<_>>(), vec![1, 2, 5]);

        let trivial = enumerate_tree(&lam(1, 2, 3), 1);
        assert_eq!(trivial.len(), 1);
        assert_eq!(trivial[0].1, BigTriple::ones());
    }

    #[test]
    fn tree_addresses_replay() {
        for (addr, t) in enumerate_tree(&lam(0, 2, 2), 122) {
            let c = chain(&addr, &lam(0, 2, 2), BigTriple::ones(), 100).unwrap();
            assert_eq!(c.last(), &t);
        }
    }
}
