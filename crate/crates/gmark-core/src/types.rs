//! Shared domain types: λ-parameters, integer/rational/log triples, and
//! small numeric helpers used across the crate.

use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Coefficients (λ1, λ2, λ3) of the generalized Markov equation
/// x1² + x2² + x3² + λ3·x1x2 + λ1·x2x3 + λ2·x3x1 = (3+λ1+λ2+λ3)·x1x2x3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LambdaParams {
    pub l1: u32,
    pub l2: u32,
    pub l3: u32,
}

impl LambdaParams {
    pub const ZERO: LambdaParams = LambdaParams { l1: 0, l2: 0, l3: 0 };

    pub fn new(l1: u32, l2: u32, l3: u32) -> Self {
        LambdaParams { l1, l2, l3 }
    }

    /// The equation constant k_λ = 3 + λ1 + λ2 + λ3.
    pub fn k_lambda(&self) -> u64 {
        3 + self.l1 as u64 + self.l2 as u64 + self.l3 as u64
    }

    /// λ_i for a 1-based direction i ∈ {1,2,3}.
    pub fn get(&self, i: usize) -> u32 {
        match i {
            1 => self.l1,
            2 => self.l2,
            3 => self.l3,
            _ => panic!("direction {i} out of range 1..=3"),
        }
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.l1, self.l2, self.l3]
    }
}

impl fmt::Display for LambdaParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.l1, self.l2, self.l3)
    }
}

impl FromStr for LambdaParams {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated values, got {s:?}"));
        }
        let mut v = [0u32; 3];
        for (slot, part) in v.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|e| format!("bad lambda component {part:?}: {e}"))?;
        }
        Ok(LambdaParams::new(v[0], v[1], v[2]))
    }
}

/// The two 1-based directions other than `i`.
pub fn other_dirs(i: usize) -> (usize, usize) {
    match i {
        1 => (2, 3),
        2 => (1, 3),
        3 => (1, 2),
        _ => panic!("direction {i} out of range 1..=3"),
    }
}

/// Ordered triple of arbitrary-precision positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigTriple([BigUint; 3]);

impl BigTriple {
    /// Panics if any component is zero; triples are positive by contract.
    pub fn new(x1: BigUint, x2: BigUint, x3: BigUint) -> Self {
        let t = [x1, x2, x3];
        assert!(t.iter().all(|x| !x.is_zero()), "triple components must be >= 1");
        BigTriple(t)
    }

    pub fn from_u64(x1: u64, x2: u64, x3: u64) -> Self {
        Self::new(BigUint::from(x1), BigUint::from(x2), BigUint::from(x3))
    }

    pub fn ones() -> Self {
        Self::from_u64(1, 1, 1)
    }

    /// Component at 1-based position i.
    pub fn get(&self, i: usize) -> &BigUint {
        &self.0[i - 1]
    }

    pub fn components(&self) -> &[BigUint; 3] {
        &self.0
    }

    /// Copy with component i (1-based) replaced by `v` (must be nonzero).
    pub fn with_component(&self, i: usize, v: BigUint) -> Self {
        assert!(!v.is_zero(), "triple components must be >= 1");
        let mut t = self.0.clone();
        t[i - 1] = v;
        BigTriple(t)
    }

    pub fn max_component(&self) -> &BigUint {
        self.0.iter().max().unwrap()
    }

    pub fn min_component(&self) -> &BigUint {
        self.0.iter().min().unwrap()
    }

    /// Decimal strings of the components, suitable for JSON emission.
    pub fn decimal_strings(&self) -> [String; 3] {
        [self.0[0].to_string(), self.0[1].to_string(), self.0[2].to_string()]
    }
}

impl fmt::Display for BigTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Ordered triple of exact positive rationals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatTriple([BigRational; 3]);

impl RatTriple {
    /// Panics unless all components are > 0.
    pub fn new(x1: BigRational, x2: BigRational, x3: BigRational) -> Self {
        let t = [x1, x2, x3];
        assert!(t.iter().all(|x| x.is_positive()), "triple components must be > 0");
        RatTriple(t)
    }

    pub fn from_u64(x1: u64, x2: u64, x3: u64) -> Self {
        Self::new(rat_from_u64(x1), rat_from_u64(x2), rat_from_u64(x3))
    }

    pub fn ones() -> Self {
        Self::from_u64(1, 1, 1)
    }

    pub fn from_big(t: &BigTriple) -> Self {
        let [a, b, c] = t.components();
        Self::new(
            BigRational::from(BigInt::from(a.clone())),
            BigRational::from(BigInt::from(b.clone())),
            BigRational::from(BigInt::from(c.clone())),
        )
    }

    /// Component at 1-based position i.
    pub fn get(&self, i: usize) -> &BigRational {
        &self.0[i - 1]
    }

    pub fn components(&self) -> &[BigRational; 3] {
        &self.0
    }

    pub fn with_component(&self, i: usize, v: BigRational) -> Self {
        assert!(v.is_positive(), "triple components must be > 0");
        let mut t = self.0.clone();
        t[i - 1] = v;
        RatTriple(t)
    }

    pub fn max_component(&self) -> &BigRational {
        self.0.iter().max().unwrap()
    }

    pub fn min_component(&self) -> &BigRational {
        self.0.iter().min().unwrap()
    }
}

impl fmt::Display for RatTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Triple of natural logarithms of a positive triple's components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTriple(pub [f64; 3]);

impl LogTriple {
    pub fn zeros() -> Self {
        LogTriple([0.0; 3])
    }

    /// Component at 1-based position i.
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn with_component(&self, i: usize, v: f64) -> Self {
        let mut t = self.0;
        t[i - 1] = v;
        LogTriple(t)
    }
}

pub fn rat_from_u64(v: u64) -> BigRational {
    BigRational::from(BigInt::from(v))
}

pub fn rat_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float required")
}

/// Natural log of an arbitrary-precision positive integer.
///
/// Splits x as m·2^e with m from the top 64 bits, so the result stays
/// accurate (relative error ~1 ulp) far beyond the f64 overflow range.
pub fn ln_big(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 53 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    let top: BigUint = x >> shift;
    let m = top.to_u64().unwrap() as f64;
    m.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational, stable for huge numerators/denominators.
pub fn ln_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "ln of non-positive rational");
    ln_big(x.numer().magnitude()) - ln_big(x.denom().magnitude())
}

/// Rounds a positive rational to `digits` decimal places, half away from zero,
/// and renders it in plain decimal notation.
pub fn decimal_fixed(x: &BigRational, digits: u32) -> String {
    let neg = x.is_negative();
    let abs = x.abs();
    let scale = BigInt::from(10u32).pow(digits);
    // round(|x|·10^digits) with ties away from zero
    let scaled = abs * BigRational::from(scale.clone());
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let rounded: BigInt = (num * 2 + den.clone()) / (den * 2);
    let whole = &rounded / &scale;
    let frac = &rounded % &scale;
    let sign = if neg && (!whole.is_zero() || !frac.is_zero()) { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0>width$}", width = digits as usize)
    }
}

/// Renders a rational at `sig` significant digits (round half away from zero),
/// in plain decimal notation.
pub fn decimal_sig(x: &BigRational, sig: u32) -> String {
    assert!(sig > 0);
    if x.is_zero() {
        return "0".to_string();
    }
    // decimal exponent: number of digits before the point, minus one
    let mag = x.abs();
    let num_digits = mag.numer().to_string().len() as i64;
    let den_digits = mag.denom().to_string().len() as i64;
    let mut exp = num_digits - den_digits; // |x| ∈ [10^(exp-1), 10^(exp+1))
    let pow = |e: i64| -> BigRational {
        let p = BigRational::from(BigInt::from(10u32).pow(e.unsigned_abs() as u32));
        if e >= 0 { p } else { p.recip() }
    };
    if mag >= pow(exp + 1) {
        exp += 1;
    } else if mag < pow(exp) {
        exp -= 1;
    }
    debug_assert!(mag >= pow(exp) && mag < pow(exp + 1));
    // we keep digits at decimal positions exp..exp-sig+1; round at position exp-sig+1
    let places = sig as i64 - 1 - exp;
    if places <= 0 {
        // integer-valued rounding with trailing zeros restored
        let scaled = &mag * pow(places);
        let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
        let rounded: BigInt = (num * 2 + den.clone()) / (den * 2);
        let mut s = rounded.to_string();
        s.push_str(&"0".repeat((-places) as usize));
        if x.is_negative() {
            s.insert(0, '-');
        }
        s
    } else {
        let mut s = decimal_fixed(x, places as u32);
        // trim trailing zeros but keep at least one digit after the point
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::bigint::BigUint;

    #[test]
    fn lambda_accessors() {
        let l = LambdaParams::new(0, 2, 2);
        assert_eq!(l.k_lambda(), 7);
        assert_eq!(l.get(1), 0);
        assert_eq!(l.get(3), 2);
        assert_eq!(l.to_string(), "0,2,2");
        assert_eq!("0,2,2".parse::<LambdaParams>().unwrap(), l);
        assert!("0,2".parse::<LambdaParams>().is_err());
        assert!("0,2,x".parse::<LambdaParams>().is_err());
    }

    #[test]
    fn triple_basics() {
        let t = BigTriple::from_u64(17, 4, 1);
        assert_eq!(t.get(1), &BigUint::from(17u32));
        assert_eq!(t.max_component(), &BigUint::from(17u32));
        assert_eq!(t.to_string(), "(17,4,1)");
        let u = t.with_component(2, BigUint::from(9u32));
        assert_eq!(u, BigTriple::from_u64(17, 9, 1));
    }

    #[test]
    #[should_panic(expected = "must be >= 1")]
    fn triple_rejects_zero() {
        BigTriple::from_u64(0, 1, 1);
    }

    #[test]
    fn ln_big_matches_f64_and_scales() {
        let x = BigUint::from(123456789u64);
        assert!((ln_big(&x) - (123456789f64).ln()).abs() < 1e-12);
        // 2^4000: ln = 4000 ln 2, far beyond f64 range
        let y = BigUint::from(1u8) << 4000;
        let expect = 4000.0 * std::f64::consts::LN_2;
        assert!((ln_big(&y) - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn fixed_decimal_rounding() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(decimal_fixed(&r(1, 3), 4), "0.3333");
        assert_eq!(decimal_fixed(&r(1, 2), 0), "1"); // half rounds away from zero
        assert_eq!(decimal_fixed(&r(25, 1000), 2), "0.03"); // 0.025 → 0.03
        assert_eq!(decimal_fixed(&r(1487, 100), 2), "14.87");
        assert_eq!(decimal_fixed(&r(-1, 8), 2), "-0.13");
    }

    #[test]
    fn sig_digit_rendering() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(decimal_sig(&r(1, 3), 3), "0.333");
        assert_eq!(decimal_sig(&r(123456, 1), 3), "123000");
        assert_eq!(decimal_sig(&r(7, 1), 5), "7");
        assert_eq!(decimal_sig(&r(56038, 1000), 4), "56.04");
        assert_eq!(decimal_sig(&r(999, 1000), 2), "1");
        assert_eq!(decimal_sig(&r(-1, 3), 2), "-0.33");
    }
}
