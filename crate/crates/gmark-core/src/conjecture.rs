//! Uniqueness-conjecture tooling: the violation scan over an enumerated
//! solution tree, the q-table over all length-n reduced sequences, and the
//! approximate counterexample search that inverts the limit quotient.

use std::collections::BTreeMap;

use num::BigUint;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{estimate_q_log, measure_q_log, LogQEstimate};
use crate::markov;
use crate::seq::{enumerate_reduced, ReducedSeq};
use crate::types::{ln_big, BigTriple, LambdaParams};

/// Largest supported q-table length; 3·2^(n-1) rows grow past usefulness.
pub const Q_TABLE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConjectureError {
    #[error("q-table length {n} exceeds the cap {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// Two solutions in the same descending-ordering class sharing a maximum
/// component but differing in the remaining pair, with the tree addresses
/// that produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationPair {
    pub a: BigUint,
    pub pair1: (BigUint, BigUint),
    pub pair2: (BigUint, BigUint),
    pub addr1: ReducedSeq,
    pub addr2: ReducedSeq,
}

/// Result of scanning all solutions with components up to a bound for
/// uniqueness violations.
#[derive(Debug, Clone)]
pub struct ScanReport {
    pub lambda: LambdaParams,
    pub bound: u64,
    pub solutions: usize,
    /// Max component -> distinct descending (b, c) tails seen under it.
    pub groups: BTreeMap<BigUint, Vec<(BigUint, BigUint)>>,
    pub violations: Vec<ViolationPair>,
}

fn sorted_desc(t: &BigTriple) -> (BigUint, BigUint, BigUint) {
    let mut v = t.components().clone();
    v.sort();
    let [c, b, a] = v;
    (a, b, c)
}

type Groups = BTreeMap<BigUint, Vec<(BigUint, BigUint)>>;

/// The six descending orderings a triple can satisfy, as index permutations
/// (max position, middle position, min position). The equation is not
/// symmetric under component permutations for unequal deformation
/// parameters, so each ordering carries a separate uniqueness statement and
/// only solutions within the same ordering may conflict.
const DESC_ORDERINGS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Groups the distinct sorted tails under each maximum (the summary map),
/// and separately flags violations: two vertices satisfying a common
/// descending ordering, equal at its max position but differing in the
/// remaining pair. A tied triple belongs to every ordering it satisfies.
fn collect_groups(vertices: &[(ReducedSeq, BigTriple)]) -> (Groups, Vec<ViolationPair>) {
    let mut groups: Groups = BTreeMap::new();
    for (_, triple) in vertices {
        let (a, b, c) = sorted_desc(triple);
        let tails = groups.entry(a).or_default();
        if !tails.contains(&(b.clone(), c.clone())) {
            tails.push((b, c));
        }
    }
    for tails in groups.values_mut() {
        tails.sort();
    }

    type Tail = (BigUint, BigUint);
    let mut classes: BTreeMap<(usize, BigUint), Vec<(Tail, ReducedSeq)>> = BTreeMap::new();
    for (addr, triple) in vertices {
        let comps = triple.components();
        for (idx, ord) in DESC_ORDERINGS.iter().enumerate() {
            if comps[ord[0]] >= comps[ord[1]] && comps[ord[1]] >= comps[ord[2]] {
                let tail = (comps[ord[1]].clone(), comps[ord[2]].clone());
                let entries = classes.entry((idx, comps[ord[0]].clone())).or_default();
                if !entries.iter().any(|(t, _)| *t == tail) {
                    entries.push((tail, addr.clone()));
                }
            }
        }
    }
    let mut violations: Vec<ViolationPair> = Vec::new();
    for ((_, a), mut entries) in classes {
        entries.sort();
        for i in 0..entries.len() {
            for j in (i + 1)..entries.len() {
                let v = ViolationPair {
                    a: a.clone(),
                    pair1: entries[i].0.clone(),
                    pair2: entries[j].0.clone(),
                    addr1: entries[i].1.clone(),
                    addr2: entries[j].1.clone(),
                };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
        }
    }
    (groups, violations)
}

/// Enumerates every solution with components ≤ `bound` and flags uniqueness
/// violations within each descending-ordering class. Coincidences across
/// different orderings (say a max in position one versus position three)
/// are not conflicts: permuting components permutes the deformation
/// parameters, so each ordering states its own uniqueness claim.
pub fn uniqueness_scan(lambda: &LambdaParams, bound: u64) -> ScanReport {
    assert!(bound >= 1, "bound must be positive");
    let vertices = markov::enumerate_tree(lambda, bound);
    let solutions = vertices.len();
    let (groups, violations) = collect_groups(&vertices);
    ScanReport { lambda: *lambda, bound, solutions, groups, violations }
}

/// One q-table row: the length-n prefix, its q estimate under cyclic
/// extension, the stopping diagnostics, and the equivalence class of rows
/// whose q agree within the table's eps.
#[derive(Debug, Clone)]
pub struct QRow {
    pub seq: ReducedSeq,
    pub q: f64,
    pub spread: f64,
    pub depth: usize,
    pub class: usize,
}

/// The q estimates for every length-n reduced sequence, in lexicographic
/// order, with single-linkage equivalence classes over q at tolerance eps.
#[derive(Debug, Clone)]
pub struct QTable {
    pub n: usize,
    pub eps: f64,
    pub rows: Vec<QRow>,
    pub class_count: usize,
}

fn quotient_spread(est: &LogQEstimate) -> f64 {
    let max = est.per_component.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = est.per_component.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Builds the q-table: each length-n reduced prefix is extended cyclically
/// and estimated with `estimate_q_log` (a row that hits `max_depth` keeps
/// its partial estimate). Rows whose q values chain within `eps` of each
/// other share an equivalence class.
pub fn q_table(
    n: usize,
    lambda: &LambdaParams,
    eps: f64,
    max_depth: usize,
) -> Result<QTable, ConjectureError> {
    assert!(n >= 1, "q-table length must be positive");
    if n > Q_TABLE_CAP {
        return Err(ConjectureError::CapExceeded { n, cap: Q_TABLE_CAP });
    }
    let prefixes = enumerate_reduced(n).expect("length within enumeration cap");
    let mut rows: Vec<QRow> = prefixes
        .par_iter()
        .map(|prefix| {
            let est = match estimate_q_log(prefix.cycle_reduced(), lambda, eps, max_depth) {
                Ok(est) => est,
                Err(nc) => nc.partial,
            };
            QRow {
                seq: prefix.clone(),
                q: est.q,
                spread: quotient_spread(&est),
                depth: est.depth,
                class: 0,
            }
        })
        .collect();
    // Single-linkage classes over q: sort by q, break whenever the jump to
    // the next row exceeds eps, then number classes in ascending-q order.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&i, &j| rows[i].q.total_cmp(&rows[j].q).then(rows[i].seq.cmp(&rows[j].seq)));
    let mut class = 0usize;
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 {
            let prev = order[pos - 1];
            if rows[idx].q - rows[prev].q > eps {
                class += 1;
            }
        }
        rows[idx].class = class;
    }
    Ok(QTable { n, eps, rows, class_count: class + 1 })
}

/// A candidate from the approximate search: the Euclid-tree address whose
/// triple contained a component near the target, the exact Markov triple
/// replayed at that address, whether the searched value appears in it, and
/// the log-domain target that produced the hit.
#[derive(Debug, Clone)]
pub struct CandidateHit {
    pub seq: ReducedSeq,
    pub triple: BigTriple,
    pub matched: bool,
    pub target: f64,
}

/// Approximate counterexample search: measures q for every length-n prefix
/// at depth n exactly (Cesaro value on two-letter prefixes), inverts each
/// into a target log(a)/q, walks the classical Euclid tree collecting
/// triples with a component within `tol` (relative) of any target, then
/// replays each hit through the exact Markov engine and reports whether
/// some component equals `a`. Empty result means no candidates at this
/// resolution.
pub fn candidate_search(
    a: &BigUint,
    lambda: &LambdaParams,
    n: usize,
    tol: f64,
) -> Vec<CandidateHit> {
    assert!(*a >= BigUint::from(2u32), "searched value must be at least 2");
    assert!(tol > 0.0, "tolerance must be positive");
    let log_a = ln_big(a);
    let prefixes = enumerate_reduced(n.min(Q_TABLE_CAP)).expect("length within enumeration cap");
    let mut targets: Vec<f64> = prefixes
        .iter()
        .map(|prefix| log_a / measure_q_log(prefix, lambda).q)
        .filter(|t| t.is_finite() && *t > 0.0)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup_by(|b, a| (*b - *a).abs() < 1e-9);
    if targets.is_empty() {
        return Vec::new();
    }
    let cap = (1.0 + tol) * targets.last().unwrap();

    // Level-synchronous walk of the no-reversal Euclid tree; components only
    // grow along forward chains, so pruning children above the cap loses no
    // triple whose components all fit under it.
    let mut hits: Vec<(ReducedSeq, f64)> = Vec::new();
    let mut frontier: Vec<(ReducedSeq, [u64; 3])> = vec![(ReducedSeq::empty(), [1, 1, 1])];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (addr, t) in &frontier {
            if let Some(target) = targets
                .iter()
                .find(|tg| t.iter().any(|&v| (v as f64 - **tg).abs() <= tol * **tg))
            {
                hits.push((addr.clone(), *target));
            }
            for dir in 1u8..=3 {
                if let Some(child_addr) = addr.child(dir) {
                    let i = dir as usize - 1;
                    let (j, k) = match i {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let grown = t[j] + t[k];
                    if (grown as f64) <= cap {
                        let mut child = *t;
                        child[i] = grown;
                        next.push((child_addr, child));
                    }
                }
            }
        }
        frontier = next;
    }

    hits.par_iter()
        .map(|(addr, target)| {
            let chain = markov::chain(addr, lambda, BigTriple::ones(), markov::DEFAULT_DIGIT_BUDGET)
                .expect("replay stays within the digit budget under the search cap");
            let triple = chain.last().clone();
            let matched = triple.components().iter().any(|c| c == a);
            CandidateHit { seq: addr.clone(), triple, matched, target: *target }
        })
        .collect()
}
