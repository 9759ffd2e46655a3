//! Randomized coverage for seed mutation, matrix compatibility, and the
//! uniqueness scan and search layers built on top of the solution tree.

mod common;

use std::collections::BTreeSet;

use gmark_core::conjecture::{candidate_search, q_table, uniqueness_scan};
use gmark_core::gca::{
    alternating_orbit, b2_seed, check_compatibility, is_skew_symmetrizable, mutate_matrix,
    mutate_seed, ExchangeMatrix, ExchangePoly, GenSeed,
};
use gmark_core::markov;
use gmark_core::types::LambdaParams;
use num::{BigRational, BigUint, ToPrimitive};
use rand::Rng;

/// Skew matrix times a positive diagonal, so `diag(d) B` is skew-symmetric by
/// construction; returns the matrix together with its symmetrizer `d`.
fn random_symmetrizable(rng: &mut common::RngImpl, n: usize) -> (ExchangeMatrix, Vec<u64>) {
    let d: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3u64)).collect();
    let mut rows = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = rng.gen_range(-3..=3i64);
            rows[i][j] = s * d[j] as i64;
            rows[j][i] = -s * d[i] as i64;
        }
    }
    (ExchangeMatrix::from_rows(&rows), d)
}

fn random_seed(rng: &mut common::RngImpl, n: usize) -> GenSeed {
    let (b, _) = random_symmetrizable(rng, n);
    let r: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3u64)).collect();
    let z: Vec<ExchangePoly> = r
        .iter()
        .map(|&ri| {
            let mut coeffs = vec![1u64];
            for _ in 1..ri {
                coeffs.push(rng.gen_range(0..=3));
            }
            coeffs.push(1);
            ExchangePoly::new(coeffs)
        })
        .collect();
    let x: Vec<BigRational> = (0..n)
        .map(|_| common::random_pos_rational(rng, 9, 9))
        .collect();
    GenSeed::new(b, z, r, x)
}

#[test]
fn seed_mutation_is_involutive_on_random_seeds() {
    let mut rng = common::rng(0x6ca1);
    for case in 0..200 {
        let n = rng.gen_range(2..=4usize);
        let seed = random_seed(&mut rng, n);
        for k in 1..=n {
            let twice = mutate_seed(&mutate_seed(&seed, k).unwrap(), k).unwrap();
            assert_eq!(twice, seed, "case {case}: direction {k} failed to undo itself");
        }
    }
}

#[test]
fn symmetrizer_survives_weighted_mutation_chains() {
    let mut rng = common::rng(0x5be3);
    // Mutation roughly squares entry magnitudes, so long chains are cut off
    // before i64 arithmetic could overflow.
    let entry_cap = 100_000_000i64;
    let mut steps_verified = 0usize;
    for case in 0..300 {
        let n = rng.gen_range(2..=5usize);
        let (mut b, d) = random_symmetrizable(&mut rng, n);
        let r: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3u64)).collect();
        let len = rng.gen_range(1..=6usize);
        for step in 0..len {
            if b.rows().iter().flatten().any(|&v| v.abs() > entry_cap) {
                break;
            }
            let k = rng.gen_range(1..=n);
            b = mutate_matrix(&b, &r, k).unwrap();
            assert!(
                is_skew_symmetrizable(&b).is_some(),
                "case {case} step {step}: mutated matrix lost sign-skew symmetry"
            );
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(
                        d[i] as i64 * b.get(i, j),
                        -(d[j] as i64) * b.get(j, i),
                        "case {case} step {step}: original symmetrizer stopped working"
                    );
                }
            }
            steps_verified += 1;
        }
    }
    assert!(steps_verified >= 300, "overflow guard swallowed the sample");
}

#[test]
fn weighted_mutation_commutes_with_column_scaling() {
    let mut rng = common::rng(0xc0b7);
    for case in 0..200 {
        let n = rng.gen_range(2..=5usize);
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-4..=4i64)).collect())
            .collect();
        let b = ExchangeMatrix::from_rows(&rows);
        let r: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3u64)).collect();
        for k in 1..=n {
            assert!(
                check_compatibility(&b, &r, k).unwrap(),
                "case {case}: compatibility failed in direction {k}"
            );
        }
    }
}

#[test]
fn rank2_orbit_closes_after_six_steps_from_random_clusters() {
    let mut rng = common::rng(0x0b2);
    let base = b2_seed();
    for case in 0..20 {
        let x = vec![
            common::random_pos_rational(&mut rng, 12, 12),
            common::random_pos_rational(&mut rng, 12, 12),
        ];
        let seed = GenSeed::new(base.b.clone(), base.z.clone(), base.r.clone(), x);
        let mut cur = seed.clone();
        for step in 0..6 {
            cur = mutate_seed(&cur, 1 + step % 2).unwrap();
            if step < 5 {
                assert_ne!(cur, seed, "case {case}: orbit closed early at step {}", step + 1);
            }
        }
        assert_eq!(cur, seed, "case {case}: orbit failed to close after six steps");
        let orbit = alternating_orbit(&seed, 100);
        assert_eq!(orbit.len(), 6, "case {case}: wrong orbit length");
        for i in 0..6 {
            for j in (i + 1)..6 {
                assert_ne!(orbit[i], orbit[j], "case {case}: clusters {i} and {j} coincide");
            }
        }
    }
}

#[test]
fn scan_agrees_with_brute_force_on_lambda_grid() {
    for l1 in 0..=2u32 {
        for l2 in 0..=2u32 {
            for l3 in 0..=2u32 {
                let lambda = LambdaParams::new(l1, l2, l3);
                let k = u128::from(lambda.k_lambda());
                let mut ordered = 0usize;
                let mut sorted_set: BTreeSet<[u128; 3]> = BTreeSet::new();
                for x1 in 1..=40u128 {
                    for x2 in 1..=40u128 {
                        for x3 in 1..=40u128 {
                            let lhs = x1 * x1
                                + x2 * x2
                                + x3 * x3
                                + u128::from(l3) * x1 * x2
                                + u128::from(l1) * x2 * x3
                                + u128::from(l2) * x3 * x1;
                            if lhs == k * x1 * x2 * x3 {
                                ordered += 1;
                                let mut s = [x1, x2, x3];
                                s.sort_unstable();
                                sorted_set.insert(s);
                            }
                        }
                    }
                }
                let report = uniqueness_scan(&lambda, 40);
                assert_eq!(
                    report.solutions, ordered,
                    "lambda ({l1},{l2},{l3}): tree missed or invented ordered solutions"
                );
                let grouped: usize = report.groups.values().map(|v| v.len()).sum();
                assert_eq!(
                    grouped,
                    sorted_set.len(),
                    "lambda ({l1},{l2},{l3}): grouped tails disagree with distinct sorted triples"
                );
                assert!(
                    report.violations.is_empty(),
                    "lambda ({l1},{l2},{l3}): unexpected violation reported"
                );
            }
        }
    }
}

#[test]
fn search_never_matches_values_outside_the_tree() {
    let tree = markov::enumerate_tree(&LambdaParams::ZERO, 1000);
    let comps: BTreeSet<u64> = tree
        .iter()
        .flat_map(|(_, t)| t.components().iter().map(|c| c.to_u64().unwrap()))
        .collect();
    for a in [4u64, 6, 100] {
        assert!(!comps.contains(&a), "{a} unexpectedly appears in the tree");
        let hits = candidate_search(&BigUint::from(a), &LambdaParams::ZERO, 6, 0.05);
        for h in &hits {
            assert!(!h.matched, "{a}: candidate {} replayed to an exact match", h.seq);
        }
    }
}

#[test]
fn short_ratio_table_collapses_to_one_class() {
    let table = q_table(2, &LambdaParams::ZERO, 1e-8, 400).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.class_count, 1, "relabeling symmetry should merge all rows");
    for row in &table.rows {
        assert_eq!(row.class, 0);
    }
    let golden = 0.962_423_650_1;
    let row = table
        .rows
        .iter()
        .find(|r| r.seq.to_string() == "1,2")
        .expect("alternating prefix row");
    assert!(
        (row.q - golden).abs() < 1e-6,
        "alternating growth rate off: {}",
        row.q
    );
}
