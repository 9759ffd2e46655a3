//! Shared generators for the seeded property suites.
#![allow(dead_code)]

use gmark_core::types::rat_from_u64;
use gmark_core::{LambdaParams, ReducedSeq};
use num::bigint::BigInt;
use num::rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RngImpl = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn std_rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_lambda<R: Rng>(rng: &mut R, max: u32) -> LambdaParams {
    LambdaParams::new(
        rng.gen_range(0..=max),
        rng.gen_range(0..=max),
        rng.gen_range(0..=max),
    )
}

/// Uniform reduced word of exactly `len` letters.
pub fn random_reduced<R: Rng>(rng: &mut R, len: usize) -> ReducedSeq {
    let mut entries: Vec<u8> = Vec::with_capacity(len);
    for _ in 0..len {
        let mut letter = rng.gen_range(1..=3u8);
        while entries.last() == Some(&letter) {
            letter = rng.gen_range(1..=3u8);
        }
        entries.push(letter);
    }
    ReducedSeq::new(entries).unwrap()
}

/// Reduced word whose first letter avoids direction 1, so that chains from
/// the singular solution (λ1+2, 1, 1) only move forward.
pub fn random_forward_word<R: Rng>(rng: &mut R, len: usize) -> ReducedSeq {
    if len == 0 {
        return ReducedSeq::empty();
    }
    let mut entries: Vec<u8> = vec![rng.gen_range(2..=3u8)];
    for _ in 1..len {
        let mut letter = rng.gen_range(1..=3u8);
        while entries.last() == Some(&letter) {
            letter = rng.gen_range(1..=3u8);
        }
        entries.push(letter);
    }
    ReducedSeq::new(entries).unwrap()
}

/// Concatenation of `blocks` random permutations of (1,2,3) with reduced
/// seams; every window of 12 letters then contains all three directions.
pub fn window12_word<R: Rng>(rng: &mut R, blocks: usize) -> ReducedSeq {
    let perms: [[u8; 3]; 6] = [
        [1, 2, 3],
        [1, 3, 2],
        [2, 1, 3],
        [2, 3, 1],
        [3, 1, 2],
        [3, 2, 1],
    ];
    let mut entries: Vec<u8> = Vec::with_capacity(blocks * 3);
    for _ in 0..blocks {
        loop {
            let p = perms[rng.gen_range(0..6)];
            if entries.last() != Some(&p[0]) {
                entries.extend_from_slice(&p);
                break;
            }
        }
    }
    ReducedSeq::new(entries).unwrap()
}

/// Positive rational with numerator in 1..=max_num, denominator 1..=max_den.
pub fn random_pos_rational<R: Rng>(rng: &mut R, max_num: u64, max_den: u64) -> BigRational {
    BigRational::new(
        BigInt::from(rng.gen_range(1..=max_num)),
        BigInt::from(rng.gen_range(1..=max_den)),
    )
}

/// Nonnegative rational, zero with probability ~1/8.
pub fn random_nonneg_rational<R: Rng>(rng: &mut R, max_num: u64, max_den: u64) -> BigRational {
    if rng.gen_range(0..8u8) == 0 {
        BigRational::from(BigInt::from(0))
    } else {
        random_pos_rational(rng, max_num, max_den)
    }
}

pub fn rat(v: u64) -> BigRational {
    rat_from_u64(v)
}
