//! Asymptotic dynamics: comparison triples under delta-mutations, the
//! internal-division criterion, ratio number sequences, the log-domain
//! mutation engine, and estimation of the limit quotient q.

use num::{BigInt, BigRational, Signed, Zero};
use thiserror::Error;

use crate::euclid::EuclidParams;
use crate::markov::{self, MarkovError};
use crate::seq::{classify_tail, ReducedSeq, TailClass, TailInfo, TAIL_WINDOW};
use crate::types::{other_dirs, BigTriple, LambdaParams, LogTriple, RatTriple};

/// Stopping tolerance used by the CLI defaults.
pub const DEFAULT_EPS: f64 = 1e-9;
/// Default depth cap for the log-domain estimators.
pub const DEFAULT_MAX_DEPTH_LOG: usize = 10_000;
/// Default depth cap for the exact-rational estimators.
pub const DEFAULT_MAX_DEPTH_EXACT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("direction {dir} is the strict argmax; the ratio sequence only extends forward")]
    ArgmaxMutation { dir: usize },
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// Returned when an estimator hits its depth cap before its stopping
/// criterion; carries the estimate built from the data so far.
#[derive(Debug, Clone, Error)]
#[error("estimate did not converge within {depth} steps")]
pub struct NoConvergence<T: std::fmt::Debug> {
    pub partial: T,
    pub depth: usize,
}

/// Componentwise quotient of a k-generalized Euclid triple by its classical
/// counterpart. All components are positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonTriple {
    pub l: BigRational,
    pub m: BigRational,
    pub n: BigRational,
}

impl ComparisonTriple {
    pub fn new(l: BigRational, m: BigRational, n: BigRational) -> Self {
        assert!(
            l.is_positive() && m.is_positive() && n.is_positive(),
            "comparison components must be positive"
        );
        ComparisonTriple { l, m, n }
    }

    /// Component at 1-based direction `i` (1 -> l, 2 -> m, 3 -> n).
    pub fn get(&self, i: usize) -> &BigRational {
        match i {
            1 => &self.l,
            2 => &self.m,
            3 => &self.n,
            _ => panic!("direction must be 1, 2, or 3"),
        }
    }

    pub fn with_component(&self, i: usize, v: BigRational) -> Self {
        let mut out = self.clone();
        match i {
            1 => out.l = v,
            2 => out.m = v,
            3 => out.n = v,
            _ => panic!("direction must be 1, 2, or 3"),
        }
        assert!(out.get(i).is_positive(), "comparison components must be positive");
        out
    }

    pub fn min_component(&self) -> &BigRational {
        [&self.l, &self.m, &self.n].into_iter().min().unwrap()
    }

    pub fn max_component(&self) -> &BigRational {
        [&self.l, &self.m, &self.n].into_iter().max().unwrap()
    }
}

impl std::fmt::Display for ComparisonTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.l, self.m, self.n)
    }
}

/// Maximum pairwise absolute difference, i.e. max minus min.
pub fn spread(c: &ComparisonTriple) -> BigRational {
    c.max_component() - c.min_component()
}

/// A point of a comparison trajectory: the comparison triple, the classical
/// Euclid triple underneath it, and the additive shift k of the generalized
/// tree being compared.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonState {
    pub comp: ComparisonTriple,
    pub euclid: RatTriple,
    pub kval: BigRational,
}

impl ComparisonState {
    pub fn spread(&self) -> BigRational {
        spread(&self.comp)
    }
}

/// Delta-mutation at direction `i`: the comparison component becomes the
/// Euclid-weighted average of the other two plus k over the weight sum, and
/// the Euclid triple advances classically.
pub fn delta_mutate(s: &ComparisonState, i: usize) -> ComparisonState {
    let (j, k) = other_dirs(i);
    let (ej, ek) = (s.euclid.get(j), s.euclid.get(k));
    let denom = ej + ek;
    let new_comp = (ej * s.comp.get(j) + ek * s.comp.get(k) + &s.kval) / &denom;
    ComparisonState {
        comp: s.comp.with_component(i, new_comp),
        euclid: s.euclid.with_component(i, denom),
        kval: s.kval.clone(),
    }
}

/// Whether the delta-mutation at `i` would land inside the closed interval
/// of the two unmutated components, together with the threshold the shift k
/// is compared against: (Euclid weight at the smaller component) times the
/// gap. Equal components degenerate to threshold 0, internal iff k = 0.
pub fn internal_division_pred(s: &ComparisonState, i: usize) -> (bool, BigRational) {
    let (j, k) = other_dirs(i);
    let (cj, ck) = (s.comp.get(j), s.comp.get(k));
    if cj == ck {
        return (s.kval.is_zero(), BigRational::zero());
    }
    let small = if cj < ck { j } else { k };
    let gap = (ck - cj).abs();
    let threshold = s.euclid.get(small) * gap;
    (s.kval <= threshold, threshold)
}

/// Runs the comparison trajectory along `w` for the generalized tree `pk`
/// against the classical tree `pe`, returning all |w|+1 states. Panics if
/// `pe` is not classical (k = 0).
pub fn run_comparison(w: &ReducedSeq, pk: &EuclidParams, pe: &EuclidParams) -> Vec<ComparisonState> {
    assert!(pe.k.is_zero(), "comparison denominators follow the classical tree");
    let comp = ComparisonTriple::new(
        pk.init.get(1) / pe.init.get(1),
        pk.init.get(2) / pe.init.get(2),
        pk.init.get(3) / pe.init.get(3),
    );
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(ComparisonState { comp, euclid: pe.init.clone(), kval: pk.k.clone() });
    for &letter in w.entries() {
        out.push(delta_mutate(out.last().unwrap(), letter as usize));
    }
    out
}

/// Exact-mode q estimate: the anchor value, the closed-form limit when the
/// tail alternates between two directions, and the stopping diagnostics.
#[derive(Debug, Clone)]
pub struct ExactQEstimate {
    pub q: BigRational,
    pub closed_form_q: Option<BigRational>,
    pub spread_at_stop: BigRational,
    pub depth: usize,
    pub tail: Option<TailInfo>,
    pub final_state: ComparisonState,
}

fn classify_letters(letters: &[u8]) -> Option<TailInfo> {
    if letters.len() < 2 {
        return None;
    }
    let w = ReducedSeq::new(letters.to_vec()).expect("letters are reduced by construction");
    let window = TAIL_WINDOW.min(letters.len());
    Some(classify_tail(&w, window).expect("window fits"))
}

fn exact_estimate(st: &ComparisonState, letters: &[u8]) -> ExactQEstimate {
    let tail = classify_letters(letters);
    let (q, closed) = match tail.as_ref().map(|t| &t.class) {
        Some(TailClass::TwoAlternating(s)) => {
            let s = *s as usize;
            let (j, k) = other_dirs(s);
            let q = st.comp.get(j).min(st.comp.get(k)).clone();
            let closed = st.comp.get(s) + &st.kval / st.euclid.get(s);
            (q, Some(closed))
        }
        _ => (st.comp.min_component().clone(), None),
    };
    ExactQEstimate {
        q,
        closed_form_q: closed,
        spread_at_stop: st.spread(),
        depth: letters.len(),
        tail,
        final_state: st.clone(),
    }
}

/// Runs the exact comparison dynamics along the letters yielded by `w` until
/// convergence or `max_depth`. All-three tails stop when the spread drops
/// below `eps`; two-alternating tails stop when the minimum active component
/// is within `eps` of the closed-form limit. A generator that runs out first
/// ends the run as a plain measurement. `q` is the final minimum component
/// (minimum over the two active components for two-alternating tails).
pub fn estimate_q_euclid<I>(
    w: I,
    pk: &EuclidParams,
    pe: &EuclidParams,
    eps: &BigRational,
    max_depth: usize,
) -> Result<ExactQEstimate, NoConvergence<ExactQEstimate>>
where
    I: IntoIterator<Item = u8>,
{
    assert!(eps.is_positive(), "eps must be positive");
    let mut it = w.into_iter();
    let mut letters: Vec<u8> = Vec::new();
    let mut st = run_comparison(&ReducedSeq::empty(), pk, pe).pop().unwrap();
    loop {
        let est = exact_estimate(&st, &letters);
        let converged = match est.tail.as_ref().map(|t| &t.class) {
            Some(TailClass::TwoAlternating(_)) => {
                let closed = est.closed_form_q.as_ref().unwrap();
                (&est.q - closed).abs() < *eps || est.spread_at_stop < *eps
            }
            _ => est.spread_at_stop < *eps,
        };
        if converged {
            return Ok(est);
        }
        if letters.len() >= max_depth {
            let depth = letters.len();
            return Err(NoConvergence { partial: est, depth });
        }
        match it.next() {
            None => return Ok(est),
            Some(letter) => {
                assert!((1..=3).contains(&letter), "letters must be 1, 2, or 3");
                assert!(letters.last() != Some(&letter), "sequence must stay reduced");
                st = delta_mutate(&st, letter as usize);
                letters.push(letter);
            }
        }
    }
}

/// Exact ratio of the mutated component of `mu_i(t)` to the product of the
/// other two components. Errors when `i` is the strict argmax: mutating the
/// maximum walks backward and its ratio is not part of the sequence.
pub fn ratio_step(t: &BigTriple, i: usize, lambda: &LambdaParams) -> Result<BigRational, DynamicsError> {
    if markov::argmax_index(t) == Some(i) {
        return Err(DynamicsError::ArgmaxMutation { dir: i });
    }
    let (j, k) = other_dirs(i);
    let (xj, xk) = (t.get(j), t.get(k));
    let cross = xj * xk;
    let numer = xj * xj + &cross * lambda.get(i) + xk * xk;
    let denom = t.get(i) * cross;
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMode {
    Exact,
    Log,
}

/// The ratio number sequence k_1, k_2, ... along a chain from (1,1,1),
/// in exact rationals or as floats from the log-domain engine.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioSeries {
    Exact(Vec<BigRational>),
    Log(Vec<f64>),
}

impl RatioSeries {
    pub fn mode(&self) -> RatioMode {
        match self {
            RatioSeries::Exact(_) => RatioMode::Exact,
            RatioSeries::Log(_) => RatioMode::Log,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            RatioSeries::Exact(v) => v.len(),
            RatioSeries::Log(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value_f64(&self, idx: usize) -> f64 {
        match self {
            RatioSeries::Exact(v) => crate::types::ln_rational(&v[idx]).exp(),
            RatioSeries::Log(v) => v[idx],
        }
    }

    pub fn exact_values(&self) -> Option<&[BigRational]> {
        match self {
            RatioSeries::Exact(v) => Some(v),
            RatioSeries::Log(_) => None,
        }
    }
}

/// Log-domain engine state for chains from (1,1,1): log components, the
/// classical Euclid triple alongside, and the running ratio value.
struct LogEngine {
    v: [f64; 3],
    x: [f64; 3],
    k_cur: f64,
    k_prev: f64,
    prev_dir: Option<usize>,
    lambda: LambdaParams,
}

impl LogEngine {
    fn new(lambda: &LambdaParams) -> Self {
        LogEngine {
            v: [0.0; 3],
            x: [1.0; 3],
            k_cur: f64::NAN,
            k_prev: f64::NAN,
            prev_dir: None,
            lambda: *lambda,
        }
    }

    fn depth_quotients(&self) -> [f64; 3] {
        [self.v[0] / self.x[0], self.v[1] / self.x[1], self.v[2] / self.x[2]]
    }

    /// Advances one mutation. The ratio recurrence adds two positive terms
    /// to the previous ratio, so no cancellation occurs even when the ratio
    /// increments fall below float precision.
    fn step(&mut self, i: usize) -> Result<(), ()> {
        let i0 = i - 1;
        let li = self.lambda.get(i) as f64;
        let k_next = match self.prev_dir {
            None => li + 2.0,
            Some(p) => {
                assert_ne!(p, i, "sequence must stay reduced");
                let t = 6 - i - p;
                let (p0, t0) = (p - 1, t - 1);
                self.k_cur
                    + li * (-self.v[i0]).exp()
                    + (self.v[t0] - self.v[i0] - self.v[p0]).exp()
            }
        };
        let (j, k) = other_dirs(i);
        self.v[i0] = match self.prev_dir {
            None => k_next.ln(),
            Some(p) => {
                let t = 6 - i - p;
                k_next.ln() + self.v[p - 1] + self.v[t - 1]
            }
        };
        self.x[i0] = self.x[j - 1] + self.x[k - 1];
        self.k_prev = self.k_cur;
        self.k_cur = k_next;
        self.prev_dir = Some(i);
        if !self.x[i0].is_finite() || self.x[i0] > 1e300 || !self.v[i0].is_finite() {
            return Err(());
        }
        Ok(())
    }
}

/// Computes the ratio number sequence along `w` from (1,1,1). Exact mode
/// replays the big-integer chain and can exceed the digit budget (use log
/// mode for deep chains); log mode runs the ratio recurrence in floats.
pub fn ratio_series(
    w: &ReducedSeq,
    lambda: &LambdaParams,
    mode: RatioMode,
    digit_budget: usize,
) -> Result<RatioSeries, DynamicsError> {
    match mode {
        RatioMode::Exact => {
            let chain = markov::chain(w, lambda, BigTriple::ones(), digit_budget)?;
            let mut values = Vec::with_capacity(w.len());
            for (step, &dir) in w.entries().iter().enumerate() {
                let t = &chain.triples[step + 1];
                let i = dir as usize;
                let (j, k) = other_dirs(i);
                values.push(BigRational::new(
                    BigInt::from(t.get(i).clone()),
                    BigInt::from(t.get(j) * t.get(k)),
                ));
            }
            Ok(RatioSeries::Exact(values))
        }
        RatioMode::Log => {
            let mut engine = LogEngine::new(lambda);
            let mut values = Vec::with_capacity(w.len());
            for &dir in w.entries() {
                // Log components eventually outgrow float range on chains with
                // all three directions; by then the ratio increments are far
                // below float resolution, so the truncated series already
                // holds the limit to full precision.
                if engine.step(dir as usize).is_err() {
                    break;
                }
                values.push(engine.k_cur);
            }
            Ok(RatioSeries::Log(values))
        }
    }
}

/// Log-domain Markov mutation: component i becomes
/// `log(e^{2b} + lambda_i e^{b+c} + e^{2c}) - a`, evaluated by centering on
/// the larger of the two other components. Involutive up to rounding.
pub fn log_mutate(t: &LogTriple, i: usize, lambda: &LambdaParams) -> LogTriple {
    let (j, k) = other_dirs(i);
    let (b, c) = (t.get(j), t.get(k));
    let big = b.max(c);
    let d = big - b.min(c);
    let li = lambda.get(i) as f64;
    let new = 2.0 * big + (li * (-d).exp() + (-2.0 * d).exp()).ln_1p() - t.get(i);
    t.with_component(i, new)
}

/// Log-mode q estimate: the limit quotient, the per-component quotients of
/// log-Markov values by classical Euclid values, the Cesaro value for
/// two-alternating tails, and stopping diagnostics.
#[derive(Debug, Clone)]
pub struct LogQEstimate {
    pub q: f64,
    pub per_component: [f64; 3],
    pub cesaro: Option<f64>,
    pub k_final: Option<f64>,
    pub depth: usize,
    pub tail: Option<TailInfo>,
}

fn log_estimate(engine: &LogEngine, letters: &[u8]) -> LogQEstimate {
    let tail = classify_letters(letters);
    let quotients = engine.depth_quotients();
    let k_final = if letters.is_empty() { None } else { Some(engine.k_cur) };
    let (q, cesaro) = match tail.as_ref().map(|t| &t.class) {
        Some(TailClass::TwoAlternating(s)) => {
            let s0 = *s as usize - 1;
            let value = engine.k_cur.ln() + engine.v[s0] / engine.x[s0];
            (value, Some(value))
        }
        _ => (quotients.iter().cloned().fold(f64::INFINITY, f64::min), None),
    };
    LogQEstimate {
        q: if letters.is_empty() { 0.0 } else { q },
        per_component: quotients,
        cesaro,
        k_final,
        depth: letters.len(),
        tail,
    }
}

/// Runs the log-domain engine for exactly the letters of `w`, with no
/// stopping rule, and reports the estimate at the end. Truncates early only
/// if the log components outgrow float range.
pub fn measure_q_log(w: &ReducedSeq, lambda: &LambdaParams) -> LogQEstimate {
    let mut engine = LogEngine::new(lambda);
    let mut letters = Vec::with_capacity(w.len());
    for &dir in w.entries() {
        let overflow = engine.step(dir as usize).is_err();
        letters.push(dir);
        if overflow {
            break;
        }
    }
    log_estimate(&engine, &letters)
}

/// Runs the log-domain Markov chain and the classical Euclid chain from
/// (1,1,1) in lockstep along the letters of `w`. All-three tails stop when
/// the maximum pairwise gap of the per-component quotients drops below
/// `eps` and report q as the minimum quotient; two-alternating tails stop
/// when the ratio value stabilizes (log-increment below `eps`) and report
/// the Cesaro value `log(k) + v_s/x_s` over the frozen direction s. A
/// generator that runs out first ends the run as a plain measurement.
pub fn estimate_q_log<I>(
    w: I,
    lambda: &LambdaParams,
    eps: f64,
    max_depth: usize,
) -> Result<LogQEstimate, NoConvergence<LogQEstimate>>
where
    I: IntoIterator<Item = u8>,
{
    assert!(eps > 0.0, "eps must be positive");
    let mut it = w.into_iter();
    let mut letters: Vec<u8> = Vec::new();
    let mut engine = LogEngine::new(lambda);
    loop {
        if !letters.is_empty() {
            let est = log_estimate(&engine, &letters);
            let converged = match est.tail.as_ref().map(|t| &t.class) {
                Some(TailClass::TwoAlternating(_)) => {
                    engine.k_prev.is_finite()
                        && (engine.k_cur.ln() - engine.k_prev.ln()).abs() < eps
                }
                _ => {
                    let qs = est.per_component;
                    let max = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let min = qs.iter().cloned().fold(f64::INFINITY, f64::min);
                    max - min < eps
                }
            };
            if converged {
                return Ok(est);
            }
            if letters.len() >= max_depth {
                let depth = letters.len();
                return Err(NoConvergence { partial: est, depth });
            }
        }
        match it.next() {
            None => return Ok(log_estimate(&engine, &letters)),
            Some(letter) => {
                assert!((1..=3).contains(&letter), "letters must be 1, 2, or 3");
                assert!(letters.last() != Some(&letter), "sequence must stay reduced");
                if engine.step(letter as usize).is_err() {
                    letters.push(letter);
                    let depth = letters.len();
                    let est = log_estimate(&engine, &letters);
                    return Err(NoConvergence { partial: est, depth });
                }
                letters.push(letter);
            }
        }
    }
}
