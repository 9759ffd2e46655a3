//! Generalized cluster seeds: exchange matrices with degree vectors and
//! exchange polynomials, their mutations, and the compatibility of matrix
//! mutation with the classical rule on the weighted matrix.

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::rat_from_u64;

/// Largest supported exchange-matrix rank.
pub const MAX_RANK: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GcaError {
    #[error("mutation direction {dir} out of range 1..={rank}")]
    BadDirection { dir: usize, rank: usize },
}

/// Square integer exchange matrix, row-major, indices 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl ExchangeMatrix {
    /// Builds a matrix from rows. Panics if rows are ragged, the rank is 0,
    /// or the rank exceeds [`MAX_RANK`].
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        assert!(n >= 1, "empty exchange matrix");
        assert!(n <= MAX_RANK, "rank {n} exceeds supported maximum {MAX_RANK}");
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "exchange matrix must be square");
            entries.extend_from_slice(row);
        }
        ExchangeMatrix { n, entries }
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_RANK);
        ExchangeMatrix { n, entries: vec![0; n * n] }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        assert!(i < self.n && j < self.n, "index out of range");
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        assert!(i < self.n && j < self.n, "index out of range");
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Right-multiplies by a positive diagonal matrix, scaling column j by d[j].
    pub fn scale_columns(&self, d: &[u64]) -> ExchangeMatrix {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i * self.n + j] = self.entries[i * self.n + j] * d[j] as i64;
            }
        }
        out
    }
}

impl std::fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Exchange polynomial `z_0 + z_1 u + ... + z_r u^r` with `z_0 = z_r = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangePoly {
    coeffs: Vec<u64>,
}

impl ExchangePoly {
    /// Panics unless the coefficient list is nonempty and both end
    /// coefficients equal 1.
    pub fn new(coeffs: Vec<u64>) -> Self {
        assert!(!coeffs.is_empty(), "exchange polynomial needs coefficients");
        assert_eq!(*coeffs.first().unwrap(), 1, "constant coefficient must be 1");
        assert_eq!(*coeffs.last().unwrap(), 1, "leading coefficient must be 1");
        ExchangePoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Coefficient reversal `u^r Z(1/u)`; an involution fixing palindromes.
    pub fn reversed(&self) -> ExchangePoly {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        ExchangePoly { coeffs }
    }

    pub fn is_palindromic(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }

    pub fn eval(&self, u: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + rat_from_u64(c);
        }
        acc
    }
}

impl std::fmt::Display for ExchangePoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "u".to_string(),
                (1, c) => format!("{c}u"),
                (i, 1) => format!("u^{i}"),
                (i, c) => format!("{c}u^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Seed data: exchange matrix, exchange polynomials, degree vector, and a
/// positive rational cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSeed {
    pub b: ExchangeMatrix,
    pub z: Vec<ExchangePoly>,
    pub r: Vec<u64>,
    pub x: Vec<BigRational>,
}

impl GenSeed {
    /// Panics if lengths disagree with the matrix rank, a degree entry is not
    /// positive, a polynomial degree mismatches its degree entry, or a cluster
    /// variable is not positive.
    pub fn new(b: ExchangeMatrix, z: Vec<ExchangePoly>, r: Vec<u64>, x: Vec<BigRational>) -> Self {
        let n = b.rank();
        assert_eq!(z.len(), n, "need one exchange polynomial per direction");
        assert_eq!(r.len(), n, "need one degree per direction");
        assert_eq!(x.len(), n, "need one cluster variable per direction");
        for i in 0..n {
            assert!(r[i] >= 1, "degrees must be positive");
            assert_eq!(z[i].degree() as u64, r[i], "polynomial degree must match degree vector");
            assert!(x[i].is_positive(), "cluster variables must be positive");
        }
        GenSeed { b, z, r, x }
    }

    pub fn rank(&self) -> usize {
        self.b.rank()
    }
}

fn check_dir(dir: usize, rank: usize) -> Result<usize, GcaError> {
    if dir == 0 || dir > rank {
        return Err(GcaError::BadDirection { dir, rank });
    }
    Ok(dir - 1)
}

fn pos(v: i64) -> i64 {
    v.max(0)
}

/// Matrix mutation in direction `k` (1-based) weighted by the degree vector:
/// entries in row or column k flip sign, and elsewhere
/// `b_ij += r_k ([b_ik]_+ b_kj + b_ik [-b_kj]_+)`.
pub fn mutate_matrix(b: &ExchangeMatrix, r: &[u64], k: usize) -> Result<ExchangeMatrix, GcaError> {
    let n = b.rank();
    assert_eq!(r.len(), n, "degree vector length must match rank");
    let k0 = check_dir(k, n)?;
    let rk = r[k0] as i64;
    let mut out = ExchangeMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == k0 || j == k0 {
                -b.get(i, j)
            } else {
                b.get(i, j) + rk * (pos(b.get(i, k0)) * b.get(k0, j) + b.get(i, k0) * pos(-b.get(k0, j)))
            };
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Polynomial mutation: the polynomial in the mutated direction is reversed,
/// the others are unchanged.
pub fn mutate_poly(z: &[ExchangePoly], k: usize) -> Result<Vec<ExchangePoly>, GcaError> {
    let k0 = check_dir(k, z.len())?;
    let mut out = z.to_vec();
    out[k0] = out[k0].reversed();
    Ok(out)
}

fn rat_pow(x: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let mag = i32::try_from(e).expect("exponent out of i32 range");
    x.pow(mag)
}

/// Full seed mutation in direction `k` (1-based): the cluster variable becomes
/// `x_k^{-1} (prod_i x_i^{[-b_ik]_+})^{r_k} Z_k(prod_i x_i^{b_ik})`, the
/// matrix mutates by [`mutate_matrix`], and `Z_k` reverses.
pub fn mutate_seed(s: &GenSeed, k: usize) -> Result<GenSeed, GcaError> {
    let n = s.rank();
    let k0 = check_dir(k, n)?;
    let mut mono = BigRational::one();
    let mut arg = BigRational::one();
    for i in 0..n {
        let b_ik = s.b.get(i, k0);
        if b_ik < 0 {
            mono *= rat_pow(&s.x[i], -b_ik);
        }
        arg *= rat_pow(&s.x[i], b_ik);
    }
    let rk = i32::try_from(s.r[k0]).expect("degree out of i32 range");
    let new_xk = mono.pow(rk) * s.z[k0].eval(&arg) / &s.x[k0];
    let mut x = s.x.clone();
    x[k0] = new_xk;
    Ok(GenSeed {
        b: mutate_matrix(&s.b, &s.r, k)?,
        z: mutate_poly(&s.z, k)?,
        r: s.r.clone(),
        x,
    })
}

/// Checks that weighted mutation of `B` followed by column scaling with the
/// degree vector agrees with classical (degree-one) mutation of `B R`.
pub fn check_compatibility(b: &ExchangeMatrix, r: &[u64], k: usize) -> Result<bool, GcaError> {
    let n = b.rank();
    assert_eq!(r.len(), n, "degree vector length must match rank");
    check_dir(k, n)?;
    let lhs = mutate_matrix(b, r, k)?.scale_columns(r);
    let ones = vec![1u64; n];
    let rhs = mutate_matrix(&b.scale_columns(r), &ones, k)?;
    Ok(lhs == rhs)
}

/// Returns the least positive integer diagonal `D` with `D B` skew-symmetric,
/// scaled so its entries are coprime, or `None` when no such `D` exists.
pub fn is_skew_symmetrizable(b: &ExchangeMatrix) -> Option<Vec<num::BigUint>> {
    use num::Integer;
    let n = b.rank();
    for i in 0..n {
        if b.get(i, i) != 0 {
            return None;
        }
        for j in (i + 1)..n {
            let (u, v) = (b.get(i, j), b.get(j, i));
            if (u == 0) != (v == 0) {
                return None;
            }
            if u != 0 && u.signum() == v.signum() {
                return None;
            }
        }
    }
    // Propagate the ratios d_j / d_i = b_ij / (-b_ji) across each connected
    // component, then verify every edge against the assignment. Scaling to the
    // least coprime integers per component yields the entry-wise least
    // positive integer symmetrizer.
    let mut d: Vec<Option<BigRational>> = vec![None; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(BigRational::one());
        let mut component = vec![start];
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let di = d[i].clone().unwrap();
            for j in 0..n {
                if b.get(i, j) != 0 && d[j].is_none() {
                    let ratio = BigRational::new(BigInt::from(b.get(i, j)), BigInt::from(-b.get(j, i)));
                    d[j] = Some(&di * ratio);
                    component.push(j);
                    queue.push_back(j);
                }
            }
        }
        components.push(component);
    }
    let d: Vec<BigRational> = d.into_iter().map(|v| v.unwrap()).collect();
    for i in 0..n {
        for j in 0..n {
            let lhs = &d[i] * BigRational::from(BigInt::from(b.get(i, j)));
            let rhs = &d[j] * BigRational::from(BigInt::from(b.get(j, i)));
            if lhs != -rhs {
                return None;
            }
        }
    }
    let mut out = vec![BigInt::one(); n];
    for component in &components {
        let mut denom_lcm = BigInt::one();
        for &i in component {
            denom_lcm = denom_lcm.lcm(d[i].denom());
        }
        let scaled: Vec<BigInt> = component
            .iter()
            .map(|&i| (&d[i] * BigRational::from(denom_lcm.clone())).to_integer())
            .collect();
        let mut g = BigInt::zero();
        for v in &scaled {
            g = g.gcd(v);
        }
        for (&i, v) in component.iter().zip(scaled) {
            out[i] = v / &g;
        }
    }
    Some(out.into_iter().map(|v| v.to_biguint().unwrap()).collect())
}

/// Rank-2 example seed: `B = [[0,-1],[1,0]]`, `Z_1 = 1 + u + u^2`,
/// `Z_2 = 1 + u`, cluster `(1,1)`.
pub fn b2_seed() -> GenSeed {
    GenSeed::new(
        ExchangeMatrix::from_rows(&[vec![0, -1], vec![1, 0]]),
        vec![ExchangePoly::new(vec![1, 1, 1]), ExchangePoly::new(vec![1, 1])],
        vec![2, 1],
        vec![BigRational::one(), BigRational::one()],
    )
}

/// Seed whose alternating mutations reproduce generalized Markov mutations:
/// cyclic rank-3 matrix, `Z_i = 1 + lambda_i u + u^2`, all degrees 2,
/// cluster `(1,1,1)`.
pub fn markov_seed(lambda: &crate::types::LambdaParams) -> GenSeed {
    let polys = lambda
        .as_array()
        .iter()
        .map(|&l| ExchangePoly::new(vec![1, l as u64, 1]))
        .collect();
    GenSeed::new(
        ExchangeMatrix::from_rows(&[vec![0, 1, -1], vec![-1, 0, 1], vec![1, -1, 0]]),
        polys,
        vec![2, 2, 2],
        vec![BigRational::one(); 3],
    )
}

/// Mutates alternately in directions 1, 2, 1, 2, ... from the given rank-2
/// seed until the seed repeats, returning the distinct clusters visited.
/// Gives up after `max_steps` mutations.
pub fn alternating_orbit(seed: &GenSeed, max_steps: usize) -> Vec<Vec<BigRational>> {
    assert_eq!(seed.rank(), 2, "alternating orbit is a rank-2 construction");
    let mut clusters = vec![seed.x.clone()];
    let mut current = seed.clone();
    for step in 0..max_steps {
        let dir = 1 + step % 2;
        current = mutate_seed(&current, dir).expect("direction in range");
        if current == *seed {
            return clusters;
        }
        clusters.push(current.x.clone());
    }
    clusters
}
