//! Exact rational linear algebra: rank, kernels, Moore–Penrose pseudo-inverse,
//! the learning-rule solve `JΣ = ΣP`, admissibility, and companion rows.
//!
//! Everything in this module is exact. Ranks use fraction-free Bareiss
//! elimination over integers; kernels and solves use rational RREF. Float
//! views are derived once, at the boundary to the dynamics module.

use crate::patterns::{build_consecutive_sigma, cyclic_shift, CycleMatrix, GeneratorVector};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Dense matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "dimensions must be ≥ 1");
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Self::zero(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                *m.at_mut(i, j) = rat(v);
            }
        }
        m
    }

    pub fn from_sigma(sigma: &CycleMatrix) -> Self {
        let rows: Vec<Vec<i64>> = sigma
            .rows()
            .iter()
            .map(|r| r.iter().map(|&e| e as i64).collect())
            .collect();
        Self::from_i64_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.at(k, j);
                    *out.at_mut(i, j) += add;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    /// Multiply by a column vector.
    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.at(i, j) * &v[j])
                    .fold(Rat::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Float view, taken once at the boundary to the dynamics module.
    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| rat_to_f64(self.at(i, j))).collect())
            .collect()
    }

    /// Exact JSON rendering: each entry as the string `num/den`.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| format_rat(self.at(i, j)))
                    .collect()
            })
            .collect()
    }

    pub fn from_string_rows(rows: &[Vec<String>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidDimension("empty matrix".into()));
        }
        let c = rows[0].len();
        let mut m = Self::zero(rows.len(), c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidDimension("ragged rows".into()));
            }
            for (j, s) in row.iter().enumerate() {
                *m.at_mut(i, j) = parse_rat(s)?;
            }
        }
        Ok(m)
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // fine for the small rationals this pipeline produces
    let num = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let den = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    num / den
}

pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::InvalidArgument(format!("bad rational literal '{s}'")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::InvalidArgument("zero denominator".into()));
            }
            Ok(Rat::new(parse_int(n)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// The `p×p` cyclic permutation matrix with `(vP)[i] = v[(i+1) mod p]` for
/// row vectors `v`, i.e. `P[(c+1) mod p][c] = 1`.
pub fn permutation_matrix(p: usize) -> RationalMatrix {
    let mut m = RationalMatrix::zero(p, p);
    for c in 0..p {
        *m.at_mut((c + 1) % p, c) = Rat::one();
    }
    m
}

/// Exact rank via fraction-free Bareiss elimination on the
/// denominator-cleared integer matrix.
pub fn rank(m: &RationalMatrix) -> usize {
    // clear denominators row by row (row scaling preserves rank)
    let mut a: Vec<Vec<BigInt>> = (0..m.rows())
        .map(|i| {
            let lcm = (0..m.cols()).fold(BigInt::one(), |acc, j| {
                num_integer::lcm(acc, m.at(i, j).denom().clone())
            });
            (0..m.cols())
                .map(|j| m.at(i, j).numer() * (&lcm / m.at(i, j).denom()))
                .collect()
        })
        .collect();

    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pivot_row) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pivot_row);
        let pivot = a[r][c].clone();
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = (&pivot * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = pivot;
        r += 1;
    }
    r
}

/// Reduced row echelon form; returns (rref, pivot column indices).
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a.at(i, c).is_zero()) else {
            continue;
        };
        for j in 0..cols {
            let tmp = a.at(pr, j).clone();
            *a.at_mut(pr, j) = a.at(r, j).clone();
            *a.at_mut(r, j) = tmp;
        }
        let inv = a.at(r, c).clone();
        for j in 0..cols {
            let v = a.at(r, j) / &inv;
            *a.at_mut(r, j) = v;
        }
        for i in 0..rows {
            if i == r || a.at(i, c).is_zero() {
                continue;
            }
            let f = a.at(i, c).clone();
            for j in 0..cols {
                let v = a.at(i, j) - &f * a.at(r, j);
                *a.at_mut(i, j) = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of the right null space (possibly empty).
pub fn kernel_basis(m: &RationalMatrix) -> Vec<Vec<Rat>> {
    let (r, pivots) = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.at(row, f).clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square nonsingular matrix.
pub fn inverse(m: &RationalMatrix) -> Result<RationalMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::InvalidDimension("inverse of non-square matrix".into()));
    }
    let mut aug = RationalMatrix::zero(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *aug.at_mut(i, j) = m.at(i, j).clone();
        }
        *aug.at_mut(i, n + i) = Rat::one();
    }
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::InvalidArgument("matrix is singular".into()));
    }
    let mut out = RationalMatrix::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            *out.at_mut(i, j) = r.at(i, n + j).clone();
        }
    }
    Ok(out)
}

/// Exact Moore–Penrose pseudo-inverse via rank factorization
/// `M = C F`, `M⁺ = Fᵀ (F Fᵀ)⁻¹ (Cᵀ C)⁻¹ Cᵀ`.
pub fn pseudo_inverse(m: &RationalMatrix) -> RationalMatrix {
    let (r, pivots) = rref(m);
    let rk = pivots.len();
    if rk == 0 {
        return RationalMatrix::zero(m.cols(), m.rows());
    }
    let mut c = RationalMatrix::zero(m.rows(), rk);
    for (k, &pc) in pivots.iter().enumerate() {
        for i in 0..m.rows() {
            *c.at_mut(i, k) = m.at(i, pc).clone();
        }
    }
    let mut f = RationalMatrix::zero(rk, m.cols());
    for i in 0..rk {
        for j in 0..m.cols() {
            *f.at_mut(i, j) = r.at(i, j).clone();
        }
    }
    let ft = f.transpose();
    let ct = c.transpose();
    let fft_inv = inverse(&f.mul(&ft)).expect("F Fᵀ is invertible for full-row-rank F");
    let ctc_inv = inverse(&ct.mul(&c)).expect("Cᵀ C is invertible for full-column-rank C");
    ft.mul(&fft_inv).mul(&ctc_inv).mul(&ct)
}

/// The `p×p` matrix whose rows are all `p` cyclic shifts of η; its rank is `dim W_η`.
pub fn all_shifts_matrix(eta: &GeneratorVector) -> RationalMatrix {
    let p = eta.period();
    let rows: Vec<Vec<i64>> = (0..p)
        .map(|k| {
            cyclic_shift(eta, k as i64)
                .entries()
                .iter()
                .map(|&e| e as i64)
                .collect()
        })
        .collect();
    RationalMatrix::from_i64_rows(&rows)
}

/// `dim W_η` — dimension of the shift span of η.
pub fn dim_w_eta(eta: &GeneratorVector) -> usize {
    rank(&all_shifts_matrix(eta))
}

/// Admissibility of the consecutive cycle (η, n): `dim W_η = rank Σ`.
pub fn is_admissible(eta: &GeneratorVector, n: usize) -> Result<bool> {
    let sigma = build_consecutive_sigma(eta, n)?;
    Ok(dim_w_eta(eta) == rank(&RationalMatrix::from_sigma(&sigma)))
}

/// Structural form of a learned coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingForm {
    General,
    Companion,
}

/// The learned coupling matrix `J` (the `J₁` of the decomposition
/// `J = c₀I + c₁J₁`), with an optional companion row when `J` has the
/// superdiagonal-ones form.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    pub j: RationalMatrix,
    pub form: CouplingForm,
    pub companion_row: Option<Vec<Rat>>,
    /// set when the companion representation had free variables (rank(Σ) < n)
    pub companion_non_unique: bool,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.j.rows()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.j.to_f64_rows()
    }
}

/// Assemble a companion-form matrix: superdiagonal ones, last row `a`.
pub fn companion_matrix(a: &[Rat]) -> RationalMatrix {
    let n = a.len();
    let mut m = RationalMatrix::zero(n, n);
    for i in 0..n.saturating_sub(1) {
        *m.at_mut(i, i + 1) = Rat::one();
    }
    for (j, v) in a.iter().enumerate() {
        *m.at_mut(n - 1, j) = v.clone();
    }
    m
}

/// Companion row `(a₀,…,a_{n−1})` with `ηPⁿ = Σ aⱼ ηPʲ`, solved exactly.
///
/// When Σ has full rank the representation is unique. When it is non-unique
/// the representative follows the structural class the generator belongs to
/// (`ηPⁿ = η` → `(1,0,…,0)`; `ηPⁿ = −η` → `(−1,0,…,0)`; zero-sum η with
/// `n = p−1` → all `−1`), matching the coupling matrices the classification
/// theory is stated for; otherwise the minimal-index solution (free
/// variables zero) is returned. Non-uniqueness is flagged via the second
/// tuple member.
pub fn companion_row(eta: &GeneratorVector, n: usize) -> Result<(Vec<Rat>, bool)> {
    let p = eta.period();
    if n < 1 || n > p {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ n ≤ p, got n = {n}, p = {p}"
        )));
    }
    // columns: (ηP⁰)ᵀ … (ηP^{n−1})ᵀ, rhs (ηPⁿ)ᵀ; solve by RREF of [A | b]
    let mut aug = RationalMatrix::zero(p, n + 1);
    for j in 0..n {
        let s = cyclic_shift(eta, j as i64);
        for i in 0..p {
            *aug.at_mut(i, j) = rat(s.entries()[i] as i64);
        }
    }
    let target = cyclic_shift(eta, n as i64);
    for i in 0..p {
        *aug.at_mut(i, n) = rat(target.entries()[i] as i64);
    }
    let (r, pivots) = rref(&aug);
    if pivots.contains(&n) {
        return Err(Error::NotAdmissible(format!(
            "ηPⁿ is not in the span of the first {n} shifts of η"
        )));
    }
    if pivots.len() == n {
        let mut a = vec![Rat::zero(); n];
        for (row, &pc) in pivots.iter().enumerate() {
            a[pc] = r.at(row, n).clone();
        }
        return Ok((a, false));
    }

    // non-unique: prefer the structural class representative
    let shifted_n = cyclic_shift(eta, n as i64);
    if shifted_n == *eta {
        let mut a = vec![Rat::zero(); n];
        a[0] = Rat::one();
        return Ok((a, true));
    }
    if shifted_n == eta.negated() {
        let mut a = vec![Rat::zero(); n];
        a[0] = -Rat::one();
        return Ok((a, true));
    }
    let zero_sum = eta.entries().iter().map(|&e| e as i64).sum::<i64>() == 0;
    if zero_sum && n == p - 1 {
        return Ok((vec![-Rat::one(); n], true));
    }

    let mut a = vec![Rat::zero(); n];
    for (row, &pc) in pivots.iter().enumerate() {
        a[pc] = r.at(row, n).clone();
    }
    Ok((a, true))
}

/// Solve the learning equation `JΣ = ΣP`.
///
/// For consecutive cycles (generator present) the companion-form solution is
/// returned; it reproduces the coupling matrices the analysis works with even
/// when Σ is rank-deficient. For a general Σ the
/// pseudo-inverse solution `J = ΣPΣ⁺` is used. Either way the returned `J`
/// satisfies `JΣ = ΣP` with exactly zero residual, or a not-admissible error
/// is raised.
pub fn solve_learning(sigma: &CycleMatrix) -> Result<CouplingMatrix> {
    let s = RationalMatrix::from_sigma(sigma);
    let p_mat = permutation_matrix(sigma.p());
    let sp = s.mul(&p_mat);

    let coupling = if let Some(eta) = sigma.generator() {
        let (a, non_unique) = companion_row(eta, sigma.n())?;
        let j = companion_matrix(&a);
        CouplingMatrix {
            j,
            form: CouplingForm::Companion,
            companion_row: Some(a),
            companion_non_unique: non_unique,
        }
    } else {
        let j = sp.mul(&pseudo_inverse(&s));
        CouplingMatrix {
            j,
            form: CouplingForm::General,
            companion_row: None,
            companion_non_unique: false,
        }
    };

    if !coupling.j.mul(&s).sub(&sp).is_zero() {
        return Err(Error::NotAdmissible(
            "JΣ = ΣP has no solution (nonzero residual in consistency check)".into(),
        ));
    }
    Ok(coupling)
}
