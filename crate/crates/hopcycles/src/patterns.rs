//! Binary pattern algebra: generator vectors, cyclic shifts, consecutive
//! cycle matrices and switch-structure analysis.
//!
//! The shift convention is fixed once here: `P` maps `(x_1,…,x_p)` to
//! `(x_2,…,x_p,x_1)`, so `cyclic_shift(η, 1)` equals the row vector `ηP`.
//! Every other module relies on this single convention.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A ±1 state vector of `n` neurons (a column of `Σ`, or a vertex of the cube).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryPattern {
    entries: Vec<i8>,
}

impl BinaryPattern {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("pattern must be non-empty".into()));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidArgument("pattern entries must be ±1".into()));
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&e| -e).collect(),
        }
    }

    /// Render as a compact sign string, e.g. `+++---`.
    pub fn to_sign_string(&self) -> String {
        self.entries
            .iter()
            .map(|&e| if e > 0 { '+' } else { '-' })
            .collect()
    }
}

/// The information string η of length `p` generating a consecutive cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorVector {
    entries: Vec<i8>,
}

impl GeneratorVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidDimension(
                "generator must have length ≥ 2".into(),
            ));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidArgument("generator entries must be ±1".into()));
        }
        Ok(Self { entries })
    }

    /// Parse a compact string over `{+,-}`, e.g. `"+++---"`.
    pub fn parse(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1i8),
                '-' => Ok(-1i8),
                other => Err(Error::InvalidArgument(format!(
                    "unexpected character '{other}' in sign string"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn period(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&e| -e).collect(),
        }
    }

    pub fn to_sign_string(&self) -> String {
        self.entries
            .iter()
            .map(|&e| if e > 0 { '+' } else { '-' })
            .collect()
    }
}

/// The `n×p` sign matrix Σ whose rows are patterns; for consecutive cycles
/// row `j` equals `η P^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleMatrix {
    rows: Vec<Vec<i8>>,
    generator: Option<GeneratorVector>,
    n: usize,
    p: usize,
}

impl CycleMatrix {
    /// Build Σ from explicit rows (simple or general form, generator unknown).
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidDimension("Σ must be non-empty".into()));
        }
        let p = rows[0].len();
        let n = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidDimension("ragged rows in Σ".into()));
        }
        if rows.iter().flatten().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidArgument("Σ entries must be ±1".into()));
        }
        if p < n {
            return Err(Error::InvalidDimension(format!(
                "Σ requires p ≥ n, got n = {n}, p = {p}"
            )));
        }
        Ok(Self {
            rows,
            generator: None,
            n,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    pub fn generator(&self) -> Option<&GeneratorVector> {
        self.generator.as_ref()
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.rows[i][j]
    }

    /// Column `j` of Σ: the `j`-th equilibrium pattern ξ_j of the cycle.
    pub fn column(&self, j: usize) -> BinaryPattern {
        BinaryPattern::new(self.rows.iter().map(|r| r[j]).collect())
            .expect("columns of a valid Σ are valid patterns")
    }

    pub fn columns(&self) -> Vec<BinaryPattern> {
        (0..self.p).map(|j| self.column(j)).collect()
    }

    pub fn negated(&self) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&e| -e).collect())
                .collect(),
            generator: self.generator.as_ref().map(|g| g.negated()),
            n: self.n,
            p: self.p,
        }
    }
}

/// `cyclic_shift(η, 1) = ηP`: entries rotate so `output[i] = η[(i+k) mod p]`.
pub fn cyclic_shift(eta: &GeneratorVector, k: i64) -> GeneratorVector {
    let p = eta.period() as i64;
    let k = k.rem_euclid(p) as usize;
    let e = eta.entries();
    let rotated: Vec<i8> = (0..e.len()).map(|i| e[(i + k) % e.len()]).collect();
    GeneratorVector::new(rotated).expect("rotation preserves validity")
}

/// Build the consecutive cycle matrix with rows `η, ηP, …, ηP^{n−1}`.
pub fn build_consecutive_sigma(eta: &GeneratorVector, n: usize) -> Result<CycleMatrix> {
    let p = eta.period();
    if n < 1 || n > p {
        return Err(Error::InvalidDimension(format!(
            "need 1 ≤ n ≤ p, got n = {n}, p = {p}"
        )));
    }
    let rows: Vec<Vec<i8>> = (0..n)
        .map(|j| cyclic_shift(eta, j as i64).entries().to_vec())
        .collect();
    Ok(CycleMatrix {
        rows,
        generator: Some(eta.clone()),
        n,
        p,
    })
}

/// Number of non-cyclic sign switches in consecutive coordinate pairs.
pub fn count_switches(pattern: &BinaryPattern) -> usize {
    pattern
        .entries()
        .windows(2)
        .filter(|w| w[0] * w[1] == -1)
        .count()
}

fn seq_has_adjacent_switches(seq: &[i8]) -> bool {
    seq.windows(3)
        .any(|w| w[0] * w[1] == -1 && w[1] * w[2] == -1)
}

/// True iff some column of Σ contains two consecutive sign switches.
pub fn has_adjacent_switches(sigma: &CycleMatrix) -> bool {
    (0..sigma.p()).any(|j| seq_has_adjacent_switches(sigma.column(j).entries()))
}

/// Row variant of the adjacent-switch scan, reported for diagnostics.
pub fn has_adjacent_switches_rows(sigma: &CycleMatrix) -> bool {
    sigma
        .rows()
        .iter()
        .any(|r| seq_has_adjacent_switches(r))
}

/// Canonical representative of `η` under rotation and global sign flip:
/// the lexicographically smallest entry vector among all `2p` images.
pub fn canonical_form(eta: &GeneratorVector) -> Vec<i8> {
    let p = eta.period();
    let mut best: Option<Vec<i8>> = None;
    for flip in [1i8, -1] {
        for r in 0..p {
            let cand: Vec<i8> = (0..p).map(|i| flip * eta.entries()[(i + r) % p]).collect();
            if best.as_ref().map(|b| cand < *b).unwrap_or(true) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

/// All generators of period `p`, one per equivalence class under rotation
/// and global sign flip, in lexicographic order of their canonical forms.
pub fn canonical_generators(p: usize) -> Vec<GeneratorVector> {
    let mut out = Vec::new();
    for bits in 0..(1u64 << p) {
        let entries: Vec<i8> = (0..p)
            .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        let eta = GeneratorVector::new(entries).unwrap();
        if canonical_form(&eta) == eta.entries() {
            out.push(eta);
        }
    }
    out
}

/// True iff `p` is even and `η = (v, −v)`.
pub fn is_antisymmetric(eta: &GeneratorVector) -> bool {
    let p = eta.period();
    if p % 2 != 0 {
        return false;
    }
    let half = p / 2;
    let e = eta.entries();
    (0..half).all(|i| e[i + half] == -e[i])
}
