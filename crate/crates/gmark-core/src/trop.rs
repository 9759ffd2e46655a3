//! Tropical side of the Markov dynamics: the max-plus solution predicate,
//! tropical mutations, seeding integer triples consistent with a Markov
//! chain's argmax pattern, and the numeric log-domain limit of the Markov
//! Laurent polynomial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markov::{self, MarkovError};
use crate::seq::ReducedSeq;
use crate::types::{other_dirs, BigTriple, LambdaParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TropError {
    #[error("no strict argmax in {triple}; cannot seed a tropical triple")]
    NoStrictArgmax { triple: String },
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Integer-valued tropical triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TropTriple(pub [i64; 3]);

impl TropTriple {
    pub fn new(x1: i64, x2: i64, x3: i64) -> Self {
        TropTriple([x1, x2, x3])
    }

    /// Component at 1-based direction `i`.
    pub fn get(&self, i: usize) -> i64 {
        assert!((1..=3).contains(&i), "direction must be 1, 2, or 3");
        self.0[i - 1]
    }

    pub fn with_component(&self, i: usize, v: i64) -> TropTriple {
        assert!((1..=3).contains(&i), "direction must be 1, 2, or 3");
        let mut out = *self;
        out.0[i - 1] = v;
        out
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// Position (1-based) of the unique maximum, or `None` on a tie for max.
    pub fn strict_argmax(&self) -> Option<usize> {
        let max = *self.0.iter().max().unwrap();
        let mut hits = self.0.iter().enumerate().filter(|(_, &v)| v == max);
        let first = hits.next().unwrap().0;
        if hits.next().is_some() {
            None
        } else {
            Some(first + 1)
        }
    }
}

impl std::fmt::Display for TropTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// True iff `max(2x1, 2x2, 2x3) = x1 + x2 + x3`, the tropical form of the
/// Markov equation.
pub fn is_trop_solution(t: &TropTriple) -> bool {
    let max2 = self::doubled_max(t);
    max2 == t.sum()
}

fn doubled_max(t: &TropTriple) -> i64 {
    t.0.iter().map(|&v| 2 * v).max().unwrap()
}

/// Tropical mutation at direction `i`: the component is replaced by the max
/// of the doubled other components minus itself. Involutive.
pub fn trop_mutate(t: &TropTriple, i: usize) -> TropTriple {
    let (j, k) = other_dirs(i);
    let new = (2 * t.get(j)).max(2 * t.get(k)) - t.get(i);
    t.with_component(i, new)
}

/// Seeds a tropical triple matching the argmax pattern of a Markov triple,
/// using the canonical values `a = 2, b = 1`. The all-ones triple seeds to
/// the origin.
pub fn seed_from_markov(m: &BigTriple) -> Result<TropTriple, TropError> {
    seed_from_markov_with(m, 2, 1)
}

/// Like [`seed_from_markov`] but with explicit values `a > b > 0`: the
/// maximum position receives `a + b`, the middle `a`, the minimum `b`. When
/// the two non-max components are tied, both receive `a` and the maximum
/// receives `2a`. Panics unless `a > b > 0`.
pub fn seed_from_markov_with(m: &BigTriple, a: i64, b: i64) -> Result<TropTriple, TropError> {
    assert!(b > 0 && a > b, "seed values must satisfy a > b > 0");
    if *m == BigTriple::ones() {
        return Ok(TropTriple([0, 0, 0]));
    }
    let comps = m.components();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| comps[j].cmp(&comps[i]));
    if comps[order[0]] == comps[order[1]] {
        return Err(TropError::NoStrictArgmax { triple: m.to_string() });
    }
    let tied_rest = comps[order[1]] == comps[order[2]];
    let mut out = [0i64; 3];
    out[order[0]] = if tied_rest { 2 * a } else { a + b };
    out[order[1]] = a;
    out[order[2]] = if tied_rest { a } else { b };
    Ok(TropTriple(out))
}

/// Outcome of running the Markov, tropical, and integer Euclid chains side
/// by side from a common seed.
#[derive(Debug, Clone)]
pub struct CorrespondenceReport {
    pub markov: markov::MarkovChain,
    pub tropical: Vec<TropTriple>,
    pub euclid: Vec<TropTriple>,
    /// First step where the tropical and Euclid chains differ.
    pub component_divergence: Option<usize>,
    /// First non-singular step where the Markov argmax position and the
    /// tropical strict argmax disagree (or either fails to be strict).
    pub argmax_divergence: Option<usize>,
}

impl CorrespondenceReport {
    pub fn success(&self) -> bool {
        self.component_divergence.is_none() && self.argmax_divergence.is_none()
    }
}

/// Runs the Markov chain, the tropical chain from [`seed_from_markov`], and
/// the additive Euclid chain from the same integer seed, and records where
/// they diverge. Divergence is data, not an error; errors only surface from
/// the underlying Markov chain or from seeding.
pub fn verify_correspondence(
    w: &ReducedSeq,
    lambda: &LambdaParams,
    start: &BigTriple,
) -> Result<CorrespondenceReport, TropError> {
    let markov_chain = markov::chain(w, lambda, start.clone(), markov::DEFAULT_DIGIT_BUDGET)?;
    let seed = seed_from_markov(start)?;
    let mut tropical = vec![seed];
    let mut euclid = vec![seed];
    for &dir in w.entries() {
        let i = dir as usize;
        tropical.push(trop_mutate(tropical.last().unwrap(), i));
        let e = euclid.last().unwrap();
        let (j, k) = other_dirs(i);
        euclid.push(e.with_component(i, e.get(j) + e.get(k)));
    }
    let component_divergence = tropical.iter().zip(&euclid).position(|(t, e)| t != e);
    let mut argmax_divergence = None;
    for (step, (mt, tt)) in markov_chain.triples.iter().zip(&tropical).enumerate() {
        if markov::is_singular(mt, lambda)? {
            continue;
        }
        let ma = markov::argmax_index(mt);
        if ma.is_none() || ma != tt.strict_argmax() {
            argmax_divergence = Some(step);
            break;
        }
    }
    Ok(CorrespondenceReport {
        markov: markov_chain,
        tropical,
        euclid,
        component_divergence,
        argmax_divergence,
    })
}

/// Evaluates `log F(e^{C x1}, e^{C x2}, e^{C x3}) / C` stably in the log
/// domain together with its tropical limit `max(2x_i) - (x1 + x2 + x3)`.
/// The numeric value approaches the exact one from above at rate O(1/C).
pub fn trop_limit_check(t: &TropTriple, lambda: &LambdaParams, c: f64) -> (f64, i64) {
    assert!(c > 0.0, "C must be positive");
    let [x1, x2, x3] = t.0;
    let s = t.sum();
    let exact = doubled_max(t) - s;
    let terms: [(f64, i64); 6] = [
        (1.0, 2 * x1),
        (1.0, 2 * x2),
        (1.0, 2 * x3),
        (lambda.l3 as f64, x1 + x2),
        (lambda.l1 as f64, x2 + x3),
        (lambda.l2 as f64, x3 + x1),
    ];
    let m = terms
        .iter()
        .filter(|(wt, _)| *wt > 0.0)
        .map(|&(_, a)| a)
        .max()
        .unwrap();
    let acc: f64 = terms
        .iter()
        .filter(|(wt, _)| *wt > 0.0)
        .map(|&(wt, a)| wt * (c * (a - m) as f64).exp())
        .sum();
    let numeric = (m - s) as f64 + acc.ln() / c;
    (numeric, exact)
}
