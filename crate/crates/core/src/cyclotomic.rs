//! Exact arithmetic over the cyclotomic field Q(zeta_N).
//!
//! Scalars are residues in Q[x]/Phi_N(x) with arbitrary-precision rational
//! coefficients, so Reynolds averaging (division by #G) and Gaussian
//! elimination stay exact. A single modulus N is fixed per scenario; mixing
//! moduli in one operation is a hard error, never an implicit embedding.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Euler totient, by trial-division factorisation.
pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Dense integer polynomial, lowest degree first, no trailing zeros.
fn poly_trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

/// Exact division of integer polynomials; panics if not exact (internal use).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    let dlead = den.last().expect("nonzero divisor");
    assert!(dlead.is_one() || (-dlead).is_one(), "divisor must have unit leading coefficient");
    let dd = den.len() - 1;
    if rem.len() < den.len() {
        assert!(poly_trim(rem.clone()).is_empty());
        return vec![];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / dlead;
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                let t = &rem[i + j] - &c * dc;
                rem[i + j] = t;
            }
        }
        quot[i] = c;
    }
    assert!(poly_trim(rem).is_empty(), "polynomial division was not exact");
    poly_trim(quot)
}

/// The N-th cyclotomic polynomial, computed by dividing x^N - 1 by all
/// lower-order cyclotomic polynomials. Cached per N.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    // x^n - 1
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut poly = num;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            poly = poly_div_exact(&poly, &phi_d);
        }
    }
    let arc = Arc::new(poly);
    cache.lock().unwrap().insert(n, arc.clone());
    arc
}

/// An element of Q(zeta_N), stored as the canonical residue of degree
/// < phi(N) modulo Phi_N.
#[derive(Clone, PartialEq, Eq)]
pub struct CycScalar {
    modulus: u64,
    /// Coefficients of 1, zeta, zeta^2, ..., zeta^(phi(N)-1).
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc({})", self)
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            if i == 0 {
                write!(f, "{}", a)?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", a)?;
                }
                if i == 1 {
                    write!(f, "z")?;
                } else {
                    write!(f, "z^{}", i)?;
                }
            }
        }
        Ok(())
    }
}

impl CycScalar {
    fn degree(n: u64) -> usize {
        euler_phi(n) as usize
    }

    pub fn zero(n: u64) -> Self {
        CycScalar { modulus: n, coeffs: vec![BigRational::zero(); Self::degree(n)] }
    }

    pub fn one(n: u64) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_int(n: u64, v: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(n: u64, v: BigRational) -> Self {
        let mut s = Self::zero(n);
        if !s.coeffs.is_empty() {
            s.coeffs[0] = v;
        } else {
            // N = 1: phi(1) = 1, still one coefficient.
            s.coeffs = vec![v];
        }
        s
    }

    /// zeta_N^k.
    pub fn zeta_pow(n: u64, k: i64) -> Self {
        let k = k.rem_euclid(n as i64) as u64;
        let mut raw = vec![BigRational::zero(); k as usize + 1];
        raw[k as usize] = BigRational::one();
        Self::reduce(n, raw)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one(self.modulus)
    }

    /// As a rational number, if the scalar lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Reduce a raw coefficient vector (any length) modulo Phi_N.
    fn reduce(n: u64, mut raw: Vec<BigRational>) -> Self {
        let phi = cyclotomic_polynomial(n);
        let deg = phi.len() - 1;
        // Plain long division by the monic Phi_N.
        while raw.len() > deg {
            let top = raw.len() - 1;
            let c = raw[top].clone();
            if !c.is_zero() {
                for (j, pc) in phi.iter().enumerate() {
                    let idx = top - deg + j;
                    let t = &raw[idx] - &c * BigRational::from_integer(pc.clone());
                    raw[idx] = t;
                }
            }
            raw.pop();
        }
        raw.resize(deg, BigRational::zero());
        CycScalar { modulus: n, coeffs: raw }
    }

    fn check_modulus(&self, other: &Self) {
        assert_eq!(
            self.modulus, other.modulus,
            "cyclotomic modulus mismatch: {} vs {}",
            self.modulus, other.modulus
        );
    }

    /// Multiplicative inverse; error on zero.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero(self.modulus));
        }
        // Extended Euclid in Q[x] against Phi_N (irreducible over Q).
        let phi: Vec<BigRational> = cyclotomic_polynomial(self.modulus)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut r0 = phi;
        let mut r1 = self.coeffs.clone();
        while r1.last().map_or(false, |c| c.is_zero()) {
            r1.pop();
        }
        let mut s0: Vec<BigRational> = vec![];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = rat_poly_divrem(&r0, &r1);
            let s_new = rat_poly_sub(&s0, &rat_poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s_new;
        }
        // r0 = gcd (a nonzero constant), s0 * self = r0 (mod Phi_N).
        assert_eq!(r0.len(), 1, "Phi_N must be coprime to a nonzero residue");
        let inv_c = BigRational::one() / r0[0].clone();
        let scaled: Vec<BigRational> = s0.iter().map(|c| c * &inv_c).collect();
        Ok(Self::reduce(self.modulus, scaled))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let mut acc = Self::one(self.modulus);
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        Ok(acc)
    }

    /// If `self` is an N-th root of unity, return k with self = zeta_N^k.
    /// Decided by comparing against all N powers.
    pub fn discrete_log(&self) -> Option<u64> {
        let n = self.modulus;
        let zeta = Self::zeta_pow(n, 1);
        let mut pow = Self::one(n);
        for k in 0..n {
            if *self == pow {
                return Some(k);
            }
            pow = &pow * &zeta;
        }
        None
    }
}

fn rat_poly_trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn rat_poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let t = &out[i + j] + x * y;
            out[i + j] = t;
        }
    }
    rat_poly_trim(out)
}

fn rat_poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = a.to_vec();
    out.resize(out.len().max(b.len()), BigRational::zero());
    for (j, y) in b.iter().enumerate() {
        let t = &out[j] - y;
        out[j] = t;
    }
    rat_poly_trim(out)
}

fn rat_poly_divrem(num: &[BigRational], den: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = den.last().unwrap();
    if rem.len() < den.len() {
        return (vec![], rat_poly_trim(rem));
    }
    let mut quot = vec![BigRational::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + dd] / lead;
        if !c.is_zero() {
            for (j, dc) in den.iter().enumerate() {
                let t = &rem[i + j] - &c * dc;
                rem[i + j] = t;
            }
        }
        quot[i] = c;
    }
    rem.truncate(dd);
    (rat_poly_trim(quot), rat_poly_trim(rem))
}

impl<'a> Add for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, rhs: &'a CycScalar) -> CycScalar {
        self.check_modulus(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        CycScalar { modulus: self.modulus, coeffs }
    }
}

impl<'a> Sub for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, rhs: &'a CycScalar) -> CycScalar {
        self.check_modulus(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        CycScalar { modulus: self.modulus, coeffs }
    }
}

impl<'a> Mul for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, rhs: &'a CycScalar) -> CycScalar {
        self.check_modulus(rhs);
        let raw = rat_poly_mul(&self.coeffs, &rhs.coeffs);
        CycScalar::reduce(self.modulus, raw)
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar { modulus: self.modulus, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// A dense matrix over Q(zeta_N). All entries share one modulus.
#[derive(Clone, PartialEq, Eq)]
pub struct CycMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    entries: Vec<CycScalar>,
}

impl fmt::Debug for CycMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CycMatrix {}x{} mod {}", self.rows, self.cols, self.modulus)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for CycMatrix {
    type Output = CycScalar;
    fn index(&self, (i, j): (usize, usize)) -> &CycScalar {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CycMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CycScalar {
        &mut self.entries[i * self.cols + j]
    }
}

/// Description of the solution set of a linear system, kept separate from
/// the empty-nullspace case: an inconsistent system is not the same thing as
/// a unique solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Inconsistent,
    Solved {
        /// One particular solution.
        particular: Vec<CycScalar>,
        /// Basis of the homogeneous solution space.
        nullspace: Vec<Vec<CycScalar>>,
    },
}

impl CycMatrix {
    pub fn zeros(n: u64, rows: usize, cols: usize) -> Self {
        CycMatrix { rows, cols, modulus: n, entries: vec![CycScalar::zero(n); rows * cols] }
    }

    pub fn identity(n: u64, size: usize) -> Self {
        let mut m = Self::zeros(n, size, size);
        for i in 0..size {
            m[(i, i)] = CycScalar::one(n);
        }
        m
    }

    pub fn from_rows(n: u64, data: Vec<Vec<CycScalar>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows * cols);
        for r in data {
            assert_eq!(r.len(), cols, "ragged rows");
            for e in r {
                assert_eq!(e.modulus(), n, "modulus mismatch in matrix entry");
                entries.push(e);
            }
        }
        CycMatrix { rows, cols, modulus: n, entries }
    }

    /// Integer-entry helper, handy in tests and scenario builders.
    pub fn from_int_rows(n: u64, data: &[&[i64]]) -> Self {
        let rows: Vec<Vec<CycScalar>> = data
            .iter()
            .map(|r| r.iter().map(|&v| CycScalar::from_int(n, v)).collect())
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.modulus, self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.modulus, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch in add");
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        CycMatrix { rows: self.rows, cols: self.cols, modulus: self.modulus, entries }
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        assert_eq!(self.modulus, s.modulus(), "modulus mismatch");
        let entries = self.entries.iter().map(|a| a * s).collect();
        CycMatrix { rows: self.rows, cols: self.cols, modulus: self.modulus, entries }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        let mut out = Self::zeros(self.modulus, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let t = &out[(i, j)] + &(a * b);
                    out[(i, j)] = t;
                }
            }
        }
        out
    }

    /// Kronecker product; row-major convention: the (i1,i2) row of the result
    /// is row i1*B.rows + i2, left factor index moving slowest.
    pub fn kron(&self, rhs: &Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch in kron");
        let mut out = Self::zeros(self.modulus, self.rows * rhs.rows, self.cols * rhs.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = &self[(i1, j1)];
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..rhs.rows {
                    for j2 in 0..rhs.cols {
                        let b = &rhs[(i2, j2)];
                        if b.is_zero() {
                            continue;
                        }
                        out[(i1 * rhs.rows + i2, j1 * rhs.cols + j2)] = a * b;
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch in direct_sum");
        let mut out = Self::zeros(self.modulus, self.rows + rhs.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..rhs.rows {
            for j in 0..rhs.cols {
                out[(self.rows + i, self.cols + j)] = rhs[(i, j)].clone();
            }
        }
        out
    }

    /// Row echelon form with deterministic pivoting (first nonzero by
    /// row-major scan). Returns (echelon matrix, pivot columns).
    fn echelonize(&self) -> (CycMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let pivot_row = (row..m.rows).find(|&r| !m[(r, col)].is_zero());
            let Some(pr) = pivot_row else { continue };
            // Swap into place.
            if pr != row {
                for j in 0..m.cols {
                    let a = m[(row, j)].clone();
                    let b = m[(pr, j)].clone();
                    m[(row, j)] = b;
                    m[(pr, j)] = a;
                }
            }
            let inv = m[(row, col)].inverse().expect("pivot nonzero");
            for j in col..m.cols {
                m[(row, j)] = &m[(row, j)] * &inv;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let f = m[(r, col)].clone();
                    for j in col..m.cols {
                        let t = &m[(r, j)] - &(&f * &m[(row, j)]);
                        m[(r, j)] = t;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.echelonize().1.len()
    }

    /// Basis of the right nullspace.
    pub fn nullspace(&self) -> Vec<Vec<CycScalar>> {
        let (ech, pivots) = self.echelonize();
        let mut basis = Vec::new();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![CycScalar::zero(self.modulus); self.cols];
            v[free] = CycScalar::one(self.modulus);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -&ech[(r, free)];
            }
            basis.push(v);
        }
        basis
    }

    /// Solve self * x = rhs exactly. `rhs` has one entry per row.
    pub fn solve(&self, rhs: &[CycScalar]) -> SolveOutcome {
        assert_eq!(rhs.len(), self.rows, "rhs length mismatch");
        // Augment and echelonize.
        let mut aug = Self::zeros(self.modulus, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = rhs[i].clone();
        }
        let (ech, pivots) = aug.echelonize();
        if pivots.contains(&self.cols) {
            return SolveOutcome::Inconsistent;
        }
        let mut particular = vec![CycScalar::zero(self.modulus); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            particular[pc] = ech[(r, self.cols)].clone();
        }
        SolveOutcome::Solved { particular, nullspace: self.nullspace() }
    }

    /// Matrix inverse for square invertible matrices.
    pub fn inverse(&self) -> Result<CycMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimMismatch(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut aug = Self::zeros(self.modulus, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = CycScalar::one(self.modulus);
        }
        let (ech, pivots) = aug.echelonize();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Error::NotInvertible("matrix is singular".into()));
        }
        let mut out = Self::zeros(self.modulus, n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = ech[(i, n + j)].clone();
            }
        }
        Ok(out)
    }

    /// If the matrix is a scalar multiple of the identity, return the scalar.
    pub fn as_scalar_multiple_of_identity(&self) -> Option<CycScalar> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let s = self[(0, 0)].clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i == j {
                    if self[(i, j)] != s {
                        return None;
                    }
                } else if !self[(i, j)].is_zero() {
                    return None;
                }
            }
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeta(n: u64, k: i64) -> CycScalar {
        CycScalar::zeta_pow(n, k)
    }

    #[test]
    fn zeta4_squares_to_minus_one() {
        let i = zeta(4, 1);
        assert_eq!(&i * &i, CycScalar::from_int(4, -1));
    }

    #[test]
    fn zeta2_plus_one_is_zero() {
        let s = &zeta(2, 1) + &CycScalar::one(2);
        assert!(s.is_zero());
    }

    #[test]
    fn inverse_of_zeta3_is_square() {
        let z = zeta(3, 1);
        assert_eq!(z.inverse().unwrap(), zeta(3, 2));
    }

    #[test]
    fn discrete_log_basics() {
        assert_eq!(zeta(6, 2).discrete_log(), Some(2));
        assert_eq!(CycScalar::one(6).discrete_log(), Some(0));
        assert_eq!(CycScalar::from_int(6, 2).discrete_log(), None);
    }

    #[test]
    fn division_by_zero_reported() {
        assert_eq!(CycScalar::zero(4).inverse(), Err(Error::DivisionByZero(4)));
    }

    #[test]
    fn cyclotomic_polys_match_known_values() {
        // Phi_1 = x - 1, Phi_2 = x + 1, Phi_4 = x^2 + 1, Phi_6 = x^2 - x + 1
        let p = |v: &[i64]| -> Vec<BigInt> { v.iter().map(|&x| BigInt::from(x)).collect() };
        assert_eq!(*cyclotomic_polynomial(1), p(&[-1, 1]));
        assert_eq!(*cyclotomic_polynomial(2), p(&[1, 1]));
        assert_eq!(*cyclotomic_polynomial(4), p(&[1, 0, 1]));
        assert_eq!(*cyclotomic_polynomial(6), p(&[1, -1, 1]));
        assert_eq!(*cyclotomic_polynomial(12), p(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn rank_of_singular_two_by_two() {
        // [[1, z], [-z, 1]] over Q(zeta_4): det = 1 + z^2 = 0, so rank 1.
        let n = 4;
        let m = CycMatrix::from_rows(
            n,
            vec![
                vec![CycScalar::one(n), zeta(n, 1)],
                vec![-&zeta(n, 1), CycScalar::one(n)],
            ],
        );
        assert_eq!(m.rank(), 1);
        assert_eq!(m.nullspace().len(), 1);
    }

    #[test]
    fn zero_matrix_nullspace_dimension() {
        let m = CycMatrix::zeros(4, 2, 2);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.nullspace().len(), 2);
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let n = 4;
        let m = CycMatrix::identity(n, 3);
        let rhs = vec![zeta(n, 1), CycScalar::from_int(n, 5), CycScalar::zero(n)];
        match m.solve(&rhs) {
            SolveOutcome::Solved { particular, nullspace } => {
                assert_eq!(particular, rhs);
                assert!(nullspace.is_empty());
            }
            SolveOutcome::Inconsistent => panic!("identity system must be consistent"),
        }
    }

    #[test]
    fn inconsistent_distinct_from_empty_nullspace() {
        let n = 2;
        // 2x1 system: x = 1, x = 0 -> inconsistent.
        let m = CycMatrix::from_int_rows(n, &[&[1], &[1]]);
        let rhs = vec![CycScalar::one(n), CycScalar::zero(n)];
        assert_eq!(m.solve(&rhs), SolveOutcome::Inconsistent);
    }

    #[test]
    fn kron_of_identities() {
        let id2 = CycMatrix::identity(4, 2);
        assert!(id2.kron(&id2).is_identity());
        assert_eq!(id2.kron(&id2).rows(), 4);
    }

    #[test]
    fn kron_with_one_by_one_scales() {
        let n = 4;
        let a = CycMatrix::from_rows(n, vec![vec![zeta(n, 1)]]);
        let m = CycMatrix::from_int_rows(n, &[&[1, 2], &[3, 4]]);
        assert_eq!(a.kron(&m), m.scale(&zeta(n, 1)));
    }

    #[test]
    fn direct_sum_dims_add() {
        let a = CycMatrix::zeros(4, 2, 3);
        let b = CycMatrix::zeros(4, 1, 1);
        let s = a.direct_sum(&b);
        assert_eq!((s.rows(), s.cols()), (3, 4));
    }

    fn small_scalar(n: u64) -> impl Strategy<Value = CycScalar> {
        (0..(n as i64), -3i64..4, 1i64..4).prop_map(move |(k, p, q)| {
            let r = BigRational::new(BigInt::from(p), BigInt::from(q));
            &CycScalar::zeta_pow(n, k) * &CycScalar::from_rational(n, r)
        })
    }

    proptest! {
        #[test]
        fn field_axioms_hold(a in small_scalar(12), b in small_scalar(12), c in small_scalar(12)) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.inverse().unwrap(), CycScalar::one(12));
            }
        }

        #[test]
        fn discrete_log_is_additive(a in 0u64..12, b in 0u64..12) {
            let z = &CycScalar::zeta_pow(12, a as i64) * &CycScalar::zeta_pow(12, b as i64);
            prop_assert_eq!(z.discrete_log(), Some((a + b) % 12));
        }

        #[test]
        fn kron_interchange(
            a in prop::collection::vec(-2i64..3, 4),
            b in prop::collection::vec(-2i64..3, 4),
            c in prop::collection::vec(-2i64..3, 4),
            d in prop::collection::vec(-2i64..3, 4),
        ) {
            let m = |v: &[i64]| CycMatrix::from_int_rows(4, &[&v[0..2], &v[2..4]]);
            let (ma, mb, mc, md) = (m(&a), m(&b), m(&c), m(&d));
            // kron(A,B) * kron(C,D) = kron(AC, BD)
            prop_assert_eq!(ma.kron(&mb).mul(&mc.kron(&md)), ma.mul(&mc).kron(&mb.mul(&md)));
        }

        #[test]
        fn solve_reproduces_rhs(
            entries in prop::collection::vec(-2i64..3, 9),
            rhs in prop::collection::vec(-2i64..3, 3),
        ) {
            let m = CycMatrix::from_int_rows(4, &[&entries[0..3], &entries[3..6], &entries[6..9]]);
            let r: Vec<CycScalar> = rhs.iter().map(|&v| CycScalar::from_int(4, v)).collect();
            if let SolveOutcome::Solved { particular, .. } = m.solve(&r) {
                // Substitute back.
                for i in 0..3 {
                    let mut acc = CycScalar::zero(4);
                    for j in 0..3 {
                        acc = &acc + &(&m[(i, j)] * &particular[j]);
                    }
                    prop_assert_eq!(acc, r[i].clone());
                }
            }
        }
    }
}
