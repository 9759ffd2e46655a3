//! Property suites for the Euclid trees, Fibonacci identities, and the
//! tropical mutation layer.

mod common;

use std::collections::BTreeSet;

use gmark_core::euclid::{euclid_chain, euclid_mutate, fibonacci, EuclidParams};
use gmark_core::trop::{
    is_trop_solution, seed_from_markov, trop_limit_check, trop_mutate, verify_correspondence,
    TropTriple,
};
use gmark_core::types::{rat_from_u64, RatTriple};
use gmark_core::{BigTriple, ReducedSeq};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{BigUint, One, Zero};
use rand::Rng;

/// Binet oracle at 256 fractional bits: round(φ^n/√5) computed purely with
/// big integers, entirely independent of the doubling recurrence.
#[test]
fn binet_closed_form_matches_up_to_70() {
    const P: u32 = 256;
    let one = BigUint::one();
    // floor(√5 · 2^P) via integer sqrt of 5·2^(2P)
    let sqrt5 = (BigUint::from(5u8) << (2 * P)).sqrt();
    let phi = (&sqrt5 + (&one << P)) >> 1u32;
    for n in 1..=70u64 {
        let num = phi.pow(n as u32);
        // divide by √5·2^((n-1)·P) and round half up
        let den = &sqrt5 << ((n as u32 - 1) * P);
        let rounded = (BigUint::from(2u8) * num + &den) / (BigUint::from(2u8) * &den);
        assert_eq!(rounded, fibonacci(n), "Binet mismatch at n={n}");
    }
}

#[test]
fn addition_formula_exact() {
    for n in 1..=50u64 {
        for k in 1..=50u64 {
            let lhs = fibonacci(n + k);
            let rhs = fibonacci(k) * fibonacci(n + 1) + fibonacci(k - 1) * fibonacci(n);
            assert_eq!(lhs, rhs, "addition formula fails at n={n}, k={k}");
        }
    }
}

#[test]
fn catalan_identity_exact() {
    for n in 0..=50u64 {
        for r in 0..=n {
            let fsq = BigInt::from(fibonacci(n)).pow(2);
            let prod = BigInt::from(fibonacci(n - r)) * BigInt::from(fibonacci(n + r));
            let sign = if (n - r) % 2 == 0 { 1 } else { -1 };
            let rhs = BigInt::from(sign) * BigInt::from(fibonacci(r)).pow(2);
            assert_eq!(fsq - prod, rhs, "Catalan identity fails at n={n}, r={r}");
        }
    }
}

#[test]
fn summation_identity_exact() {
    let mut acc = BigUint::zero();
    for n in 0..=60u64 {
        acc += fibonacci(n);
        assert_eq!(acc, fibonacci(n + 2) - BigUint::one(), "summation fails at n={n}");
    }
}

/// Distinct addresses from a generic start land on distinct triples: the
/// exchange graph is a tree, not merely a quotient graph.
#[test]
fn classical_tree_addresses_are_injective() {
    let init = RatTriple::new(
        BigRational::new(BigInt::from(5), BigInt::from(3)),
        BigRational::new(BigInt::from(9), BigInt::from(7)),
        BigRational::new(BigInt::from(13), BigInt::from(11)),
    );
    let p = EuclidParams::classical(init);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut count = 0usize;
    let mut frontier = vec![(ReducedSeq::empty(), p.init.clone())];
    for _ in 0..=10usize {
        let mut next = Vec::new();
        for (addr, t) in &frontier {
            count += 1;
            assert!(
                seen.insert(format!("{t}")),
                "two addresses reach {t} (one is {addr})"
            );
            for dir in 1..=3u8 {
                if let Some(child) = addr.child(dir) {
                    next.push((child, euclid_mutate(t, dir as usize, &BigRational::zero())));
                }
            }
        }
        frontier = next;
    }
    assert_eq!(count, 1 + 3 * ((1 << 10) - 1));
}

/// Along every 3-cyclic word the component mutated at step i strictly
/// exceeds F_i. Exhaustive over the six 3-cyclic words per length ≤ 18.
#[test]
fn three_cyclic_growth_dominates_fibonacci() {
    let p = EuclidParams::classical(RatTriple::ones());
    for a in 1..=3u8 {
        for b in 1..=3u8 {
            if a == b {
                continue;
            }
            // the 3-cyclic word is forced after its first two letters
            let mut entries = vec![a, b];
            while entries.len() < 18 {
                let n = entries.len();
                let next = 6 - entries[n - 1] - entries[n - 2];
                entries.push(next);
            }
            let w = ReducedSeq::new(entries).unwrap();
            let chain = euclid_chain(&w, &p);
            for (i, &letter) in w.entries().iter().enumerate() {
                let val = chain[i + 1].get(letter as usize);
                let fib = BigRational::from(BigInt::from(fibonacci(i as u64 + 1)));
                assert!(
                    val > &fib,
                    "step {} of {w}: component {} not above F_{}",
                    i + 1,
                    val,
                    i + 1
                );
            }
        }
    }
}

#[test]
fn classical_mutations_strictly_grow_from_ones() {
    let mut rng = common::rng(0xec11);
    let p = EuclidParams::classical(RatTriple::ones());
    for _ in 0..200 {
        let len = rng.gen_range(1..=30);
        let w = common::random_reduced(&mut rng, len);
        let chain = euclid_chain(&w, &p);
        for (i, &letter) in w.entries().iter().enumerate() {
            assert!(chain[i + 1].get(letter as usize) > chain[i].get(letter as usize));
        }
    }
}

#[test]
fn tropical_mutation_is_involutive_exhaustively() {
    for x1 in -50..=50i64 {
        for x2 in -50..=50i64 {
            for x3 in -50..=50i64 {
                let t = TropTriple::new(x1, x2, x3);
                for i in 1..=3usize {
                    assert_eq!(trop_mutate(&trop_mutate(&t, i), i), t);
                }
            }
        }
    }
}

/// On tropical solutions, any non-maximal direction mutates by the Euclid
/// addition rule, and non-strict-argmax directions preserve the solution
/// variety. Exhaustive over |xi| ≤ 30.
#[test]
fn tropical_solutions_follow_euclid_rule() {
    let mut solutions = 0usize;
    for x1 in -30..=30i64 {
        for x2 in -30..=30i64 {
            for x3 in -30..=30i64 {
                let t = TropTriple::new(x1, x2, x3);
                if !is_trop_solution(&t) {
                    continue;
                }
                solutions += 1;
                let max = *t.0.iter().max().unwrap();
                for i in 1..=3usize {
                    let m = trop_mutate(&t, i);
                    if t.get(i) < max {
                        let (j, k) = match i {
                            1 => (2, 3),
                            2 => (1, 3),
                            _ => (1, 2),
                        };
                        assert_eq!(m.get(i), t.get(j) + t.get(k), "Euclid rule at {t:?} dir {i}");
                    }
                    if t.strict_argmax() != Some(i) {
                        assert!(is_trop_solution(&m), "variety lost at {t:?} dir {i}");
                    }
                }
            }
        }
    }
    assert!(solutions > 100, "grid unexpectedly sparse: {solutions}");
}

#[test]
fn forward_correspondence_holds_on_random_samples() {
    let mut rng = common::rng(0xc0ffee);
    for case in 0..300 {
        let lambda = common::random_lambda(&mut rng, 3);
        let len = rng.gen_range(0..=12);
        let w = common::random_forward_word(&mut rng, len);
        let start = BigTriple::from_u64(u64::from(lambda.l1) + 2, 1, 1);
        let report = verify_correspondence(&w, &lambda, &start)
            .unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert!(
            report.success(),
            "case {case}: divergence at {:?}/{:?} for λ={lambda}, w={w}",
            report.component_divergence,
            report.argmax_divergence
        );
    }
}

#[test]
fn tropical_seeds_respect_argmax_position() {
    let mut rng = common::rng(0x7209);
    for _ in 0..200 {
        let lambda = common::random_lambda(&mut rng, 3);
        let len = rng.gen_range(1..=10);
        let w = common::random_forward_word(&mut rng, len);
        let start = BigTriple::from_u64(u64::from(lambda.l1) + 2, 1, 1);
        let chain = gmark_core::markov::chain(
            &w,
            &lambda,
            start,
            gmark_core::markov::DEFAULT_DIGIT_BUDGET,
        )
        .unwrap();
        let last = chain.last();
        if gmark_core::markov::is_singular(last, &lambda).unwrap() {
            continue;
        }
        let seed = seed_from_markov(last).unwrap();
        assert!(is_trop_solution(&seed));
        assert_eq!(seed.strict_argmax(), gmark_core::markov::argmax_index(last));
    }
}

#[test]
fn limit_error_halves_with_doubled_sharpness() {
    let mut rng = common::rng(0x1117);
    let mut checked = 0usize;
    while checked < 50 {
        let t = TropTriple::new(
            rng.gen_range(-5..=5),
            rng.gen_range(-5..=5),
            rng.gen_range(-5..=5),
        );
        let lambda = common::random_lambda(&mut rng, 3);
        let (num1, exact) = trop_limit_check(&t, &lambda, 1e4);
        let (num2, _) = trop_limit_check(&t, &lambda, 2e4);
        let err1 = (num1 - exact as f64).abs();
        let err2 = (num2 - exact as f64).abs();
        assert!(err1 < 1e-2, "error too large at C=1e4 for {t:?}, λ={lambda}");
        assert!(
            err2 <= err1 / 2.0 + 1e-12,
            "halving violated for {t:?}, λ={lambda}: {err2} vs {err1}"
        );
        checked += 1;
    }
}

#[test]
fn upper_bound_matches_reference_value() {
    // frozen reference for the (9, 7) configuration used by the comparison
    // dynamics suite; recomputation must stay within rounding of 56.04
    let b = gmark_core::euclid::comparison_upper_bound(&rat_from_u64(9), &rat_from_u64(7));
    let v = num::ToPrimitive::to_f64(&b).unwrap();
    assert!((v - 56.038).abs() < 0.05, "got {v}");
}
