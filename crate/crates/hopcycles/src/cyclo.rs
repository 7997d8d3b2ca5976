//! Polynomial algebra over ℚ for the cyclic shift `P`: factorization of
//! `x^m − 1` into cyclotomic polynomials, kernels of polynomials in `P`,
//! minimal annihilators, and the residue-class / block membership tests.

use crate::patterns::GeneratorVector;
use crate::ratlinalg::{kernel_basis, permutation_matrix, rat, Rat, RationalMatrix};
use crate::{Error, Result};
use num_traits::{One, Zero};

/// Dense univariate polynomial over ℚ, coefficients lowest degree first.
/// The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<Rat>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::new(vec![Rat::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// `x^n − 1`
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![Rat::zero(); n + 1];
        c[0] = -Rat::one();
        c[n] = Rat::one();
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let l = l.clone();
                Self::new(self.coeffs.iter().map(|c| c / &l).collect())
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![Rat::zero(); n];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in other.coeffs.iter().enumerate() {
            c[i] += v;
        }
        Self::new(c)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Euclidean division; errors on a zero divisor.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let Some(dd) = divisor.degree() else {
            return Err(Error::InvalidArgument(
                "division by the zero polynomial".into(),
            ));
        };
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.clone();
        let mut quo = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = rem.leading().unwrap() / &lead;
            let shift = rd - dd;
            quo[shift] = factor.clone();
            let mut sub = vec![Rat::zero(); shift + divisor.coeffs.len()];
            for (i, c) in divisor.coeffs.iter().enumerate() {
                sub[shift + i] = c * &factor;
            }
            rem = rem.sub(&Self::new(sub));
        }
        Ok((Self::new(quo), rem))
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let (mut a, mut b) = (self.clone(), other.clone());
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidArgument("gcd(0, 0) is undefined".into()));
        }
        while !b.is_zero() {
            let (_, r) = a.divmod(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Human-readable rendering, e.g. `x^3 + 1`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = {
                let abs = if c < &Rat::zero() { -c.clone() } else { c.clone() };
                crate::ratlinalg::format_rat(&abs)
            };
            let body = match k {
                0 => mag,
                1 if mag == "1" => "x".to_string(),
                1 => format!("{mag}x"),
                _ if mag == "1" => format!("x^{k}"),
                _ => format!("{mag}x^{k}"),
            };
            if terms.is_empty() {
                if c < &Rat::zero() {
                    terms.push(format!("-{body}"));
                } else {
                    terms.push(body);
                }
            } else if c < &Rat::zero() {
                terms.push(format!("- {body}"));
            } else {
                terms.push(format!("+ {body}"));
            }
        }
        terms.join(" ")
    }
}

fn divisors(n: usize) -> Vec<usize> {
    let mut d: Vec<usize> = (1..=n).filter(|k| n % k == 0).collect();
    d.sort_unstable();
    d
}

/// The `d`-th cyclotomic polynomial `Φ_d`, by recursive exact division:
/// `Φ_d = (x^d − 1) / ∏_{d'|d, d'<d} Φ_{d'}`.
pub fn cyclotomic(d: usize) -> RationalPoly {
    assert!(d >= 1);
    let mut cache: Vec<Option<RationalPoly>> = vec![None; d + 1];
    cyclotomic_cached(d, &mut cache)
}

fn cyclotomic_cached(d: usize, cache: &mut Vec<Option<RationalPoly>>) -> RationalPoly {
    if let Some(p) = &cache[d] {
        return p.clone();
    }
    let mut denom = RationalPoly::one();
    for dd in divisors(d) {
        if dd < d {
            denom = denom.mul(&cyclotomic_cached(dd, cache));
        }
    }
    let (quo, rem) = RationalPoly::x_pow_minus_one(d).divmod(&denom).unwrap();
    debug_assert!(rem.is_zero(), "Φ_d division must be exact");
    cache[d] = Some(quo.clone());
    quo
}

/// Irreducible factorization of `x^m − 1` over ℚ.
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    pub modulus: usize,
    /// irreducible monic factors with multiplicities (all 1: x^m − 1 is squarefree over ℚ)
    pub factors: Vec<(RationalPoly, usize)>,
}

/// Factor `x^m − 1` into the cyclotomic polynomials `Φ_d` over divisors `d | m`.
pub fn cyclotomic_factorization(m: usize) -> Result<FactorizationResult> {
    if m < 1 {
        return Err(Error::InvalidArgument("modulus must be ≥ 1".into()));
    }
    let mut cache: Vec<Option<RationalPoly>> = vec![None; m + 1];
    let factors: Vec<(RationalPoly, usize)> = divisors(m)
        .into_iter()
        .map(|d| (cyclotomic_cached(d, &mut cache), 1))
        .collect();
    // product check: the factors must multiply back exactly
    let product = factors
        .iter()
        .fold(RationalPoly::one(), |acc, (f, _)| acc.mul(f));
    assert_eq!(
        product,
        RationalPoly::x_pow_minus_one(m),
        "cyclotomic factors must multiply back to x^m − 1"
    );
    Ok(FactorizationResult {
        modulus: m,
        factors,
    })
}

/// The `p×p` matrix `f(P)` for the cyclic permutation `P`.
pub fn eval_poly_at_p(f: &RationalPoly, p: usize) -> RationalMatrix {
    let perm = permutation_matrix(p);
    let mut acc = RationalMatrix::zero(p, p);
    let mut power = RationalMatrix::identity(p);
    for (k, c) in f.coeffs().iter().enumerate() {
        if k > 0 {
            power = power.mul(&perm);
        }
        if !c.is_zero() {
            acc = acc.add(&power.scale(c));
        }
    }
    acc
}

/// Basis of `ker f(P)`; dimension equals `deg gcd(f, x^p − 1)`.
pub fn kernel_of_poly(f: &RationalPoly, p: usize) -> Vec<Vec<Rat>> {
    kernel_basis(&eval_poly_at_p(f, p))
}

/// Apply `f` to η under the row action `η ↦ ηP` (left rotation).
fn apply_poly_row(f: &RationalPoly, eta: &[i8]) -> Vec<Rat> {
    let p = eta.len();
    let mut out = vec![Rat::zero(); p];
    for (k, c) in f.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for i in 0..p {
            out[i] += c * rat(eta[(i + k) % p] as i64);
        }
    }
    out
}

/// The monic generator `f_η` of the annihilator ideal `{f : η f(P) = 0}`.
///
/// Since `x^p − 1` is squarefree, `f_η` is the product of the irreducible
/// factors `Φ_d` on whose kernel η has a nonzero component, tested via
/// `((x^p − 1)/Φ_d)(P) η ≠ 0`.
pub fn minimal_annihilator(eta: &GeneratorVector) -> RationalPoly {
    let p = eta.period();
    let full = RationalPoly::x_pow_minus_one(p);
    let mut f = RationalPoly::one();
    for (phi, _) in cyclotomic_factorization(p).unwrap().factors {
        let (complement, rem) = full.divmod(&phi).unwrap();
        debug_assert!(rem.is_zero());
        let image = apply_poly_row(&complement, eta.entries());
        if image.iter().any(|c| !c.is_zero()) {
            f = f.mul(&phi);
        }
    }
    debug_assert!(
        apply_poly_row(&f, eta.entries()).iter().all(|c| c.is_zero()),
        "minimal annihilator must annihilate η"
    );
    f
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..=n / 2).all(|k| n % k != 0)
}

/// Residue-class sum condition of `prop-cond1`: the `p_j` class sums of η's
/// entries (indices mod `p_j`) are all equal.
pub fn check_cond1(eta: &GeneratorVector, p_j: usize) -> Result<bool> {
    let p = eta.period();
    if !is_prime(p_j) {
        return Err(Error::InvalidArgument(format!("{p_j} is not prime")));
    }
    if p % p_j != 0 {
        return Err(Error::InvalidArgument(format!(
            "{p_j} does not divide p = {p}"
        )));
    }
    let sums = residue_class_sums(eta, p_j);
    Ok(sums.windows(2).all(|w| w[0] == w[1]))
}

/// The `k` residue-class sums `Σ_i η[i·k + r]`, `r = 0..k`.
pub fn residue_class_sums(eta: &GeneratorVector, k: usize) -> Vec<i64> {
    let mut sums = vec![0i64; k];
    for (i, &e) in eta.entries().iter().enumerate() {
        sums[i % k] += e as i64;
    }
    sums
}

/// Block membership of `lem-elem`: η consists of `p/k` repetitions of its
/// first `k` entries, i.e. `η ∈ ker(P^k − I)`.
pub fn check_block_membership(eta: &GeneratorVector, k: usize) -> Result<bool> {
    let p = eta.period();
    if k == 0 || p % k != 0 {
        return Err(Error::InvalidArgument(format!(
            "{k} does not divide p = {p}"
        )));
    }
    let e = eta.entries();
    Ok((0..p).all(|i| e[i] == e[i % k]))
}
