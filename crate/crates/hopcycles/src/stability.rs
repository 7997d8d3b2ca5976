//! Closed-form vertex eigenvalues and the existence/stability predicates for
//! edge and non-edge heteroclinic cycles.
//!
//! At a vertex equilibrium ξ of the tanh-form system with companion coupling
//! the linearization is diagonal, with eigenvalues
//! `σ_k = 2(f_q(1) − λ)` when `x_k x_{k+1} = 1` (k < n),
//! `σ_k = 2(f_q(1) − λ(c₀ − c₁))` when `x_k x_{k+1} = −1` (k < n), and
//! `σ_n = 2(f_q(1) − λ(c₀ + c₁ x_n Σ_j a_j x_j))`.

use crate::cyclo::{minimal_annihilator, RationalPoly};
use crate::dynamics::ModelParams;
use crate::patterns::{
    build_consecutive_sigma, count_switches, has_adjacent_switches, has_adjacent_switches_rows,
    BinaryPattern, CycleMatrix, GeneratorVector,
};
use crate::ratlinalg::{
    companion_row, dim_w_eta, format_rat, rank, rat, rat_to_f64, Rat,
    RationalMatrix,
};
use crate::{Error, Result};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Eigenvalue data at one vertex equilibrium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexAnalysis {
    pub vertex: BinaryPattern,
    pub eigenvalues: Vec<f64>,
    pub unstable_indices: Vec<usize>,
    /// sign vector of ξ' = Jξ (zero entries kept as 0)
    pub image_signs: Vec<i8>,
    pub switch_count: usize,
}

/// How one heteroclinic connection ξ_i → ξ_{i+1} is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    /// Hamming distance 1: connection along an edge of the cube
    Edge,
    /// distance ≥ 2 with all flipped index pairs non-adjacent: saddle-sink
    /// connection inside a face, with an invariant diagonal
    Diagonal,
    /// some flipped pair is adjacent (l = k ± 1): no saddle-sink connection
    Blocked,
    /// consecutive columns are identical (degenerate)
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleType {
    Edge,
    NonEdge,
    None,
}

/// Stability data for an edge cycle: the general product criterion and the
/// corollary's printed inequality, reported side by side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityVerdict {
    /// `|Π σ⁻|` over the contracting eigenvalues paired with each connection
    pub contracting_product_abs: f64,
    /// `Π σ⁺` over the expanding eigenvalues
    pub expanding_product: f64,
    /// the product criterion `|Πσ⁻| > Πσ⁺`
    pub product_criterion: bool,
    /// the printed corollary inequality `λ < c₀/f_q(1)`, evaluated verbatim
    pub corollary_inequality: bool,
    /// verdict (decided by the product criterion)
    pub asymptotically_stable: bool,
}

/// Full classification output for a consecutive cycle (η, n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionReport {
    pub eta: String,
    pub n: usize,
    pub p: usize,
    pub admissible: bool,
    pub dim_w_eta: usize,
    pub rank_sigma: usize,
    pub companion_row: Option<Vec<String>>,
    pub companion_non_unique: bool,
    pub minimal_annihilator: Option<String>,
    pub cond_signes: bool,
    pub adjacent_switches: bool,
    pub adjacent_switches_rows: bool,
    pub cycle_type: CycleType,
    pub vertices: Vec<VertexAnalysis>,
    pub connections: Vec<ConnectionKind>,
    /// the two strict edge-cycle existence inequalities (lower, upper)
    pub edge_conditions: (bool, bool),
    pub stability: Option<StabilityVerdict>,
    pub f_q_at_one: f64,
    pub params: ModelParams,
}

/// Analytic vertex eigenvalues (σ₁,…,σ_n) for a companion-form coupling.
pub fn vertex_eigenvalues(
    xi: &BinaryPattern,
    a: &[Rat],
    params: &ModelParams,
) -> Result<Vec<f64>> {
    let n = xi.len();
    if a.len() != n {
        return Err(Error::InvalidDimension(
            "companion row length must match vertex dimension".into(),
        ));
    }
    let f1 = params.f_q_at_one()?;
    let (lambda, c0, c1) = (params.lambda, params.c0, params.c1);
    let x = xi.entries();
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n - 1 {
        if x[k] * x[k + 1] == 1 {
            sigma.push(2.0 * (f1 - lambda));
        } else {
            sigma.push(2.0 * (f1 - lambda * (c0 - c1)));
        }
    }
    let a_dot_x: f64 = a
        .iter()
        .zip(x)
        .map(|(aj, &xj)| rat_to_f64(aj) * xj as f64)
        .sum();
    sigma.push(2.0 * (f1 - lambda * (c0 + c1 * x[n - 1] as f64 * a_dot_x)));
    Ok(sigma)
}

/// The gain window `λ(c₀ − c₁) < f_q(1) < λ` (both strict).
pub fn cond_signes(params: &ModelParams) -> Result<bool> {
    let f1 = params.f_q_at_one()?;
    Ok(params.lambda * (params.c0 - params.c1) < f1 && f1 < params.lambda)
}

/// The two strict inequalities for existence of an edge cycle:
/// `λ(c₀ + c₁·Σaⱼ) < f_q(1)` and `f_q(1) < λ(c₀ + c₁·(−a₁−⋯−a_{n−1}+a_n))`
/// (reading the companion row (a₀,…,a_{n−1}) as (a₁,…,a_n)).
pub fn edge_cycle_conditions(a: &[Rat], params: &ModelParams) -> Result<(bool, bool)> {
    let f1 = params.f_q_at_one()?;
    let n = a.len();
    let sum_all: f64 = a.iter().map(rat_to_f64).sum();
    let alt_sum: f64 = -a[..n.saturating_sub(1)].iter().map(rat_to_f64).sum::<f64>()
        + rat_to_f64(&a[n - 1]);
    let lower = params.lambda * (params.c0 + params.c1 * sum_all) < f1;
    let upper = f1 < params.lambda * (params.c0 + params.c1 * alt_sum);
    Ok((lower, upper))
}

/// The `2n` equilibria of the edge cycle, in connection order:
/// `(1,…,1) → (1,…,1,−1) → ⋯ → (−1,…,−1) → ⋯ → (−1,1,…,1) → (1,…,1)`.
pub fn edge_cycle_sequence(n: usize) -> Vec<BinaryPattern> {
    let mut seq = Vec::with_capacity(2 * n);
    let mut v = vec![1i8; n];
    seq.push(BinaryPattern::new(v.clone()).unwrap());
    for k in (0..n).rev() {
        v[k] = -1;
        seq.push(BinaryPattern::new(v.clone()).unwrap());
    }
    for k in (1..n).rev() {
        v[k] = 1;
        seq.push(BinaryPattern::new(v.clone()).unwrap());
    }
    seq
}

/// Stability of an existing edge cycle: the product criterion over the `2n`
/// equilibria (contracting = σ of the incoming edge direction at the target,
/// expanding = the unique positive σ), plus the corollary's printed
/// inequality `λ < c₀/f_q(1)` for side-by-side reporting.
pub fn edge_cycle_stability(a: &[Rat], params: &ModelParams) -> Result<StabilityVerdict> {
    let f1 = params.f_q_at_one()?;
    let n = a.len();
    let seq = edge_cycle_sequence(n);
    let m = seq.len();
    let mut contracting = 1.0f64;
    let mut expanding = 1.0f64;
    for i in 0..m {
        let target = &seq[(i + 1) % m];
        let flipped: Vec<usize> = (0..n)
            .filter(|&k| seq[i].entries()[k] != target.entries()[k])
            .collect();
        if flipped.len() != 1 {
            return Err(Error::Precondition(
                "edge cycle sequence must flip exactly one coordinate per step".into(),
            ));
        }
        let sig = vertex_eigenvalues(target, a, params)?;
        let incoming = sig[flipped[0]];
        if incoming >= 0.0 {
            return Err(Error::Precondition(
                "incoming edge direction must be contracting at the target".into(),
            ));
        }
        let positive: Vec<f64> = sig.iter().copied().filter(|&s| s > 0.0).collect();
        if positive.len() != 1 {
            return Err(Error::Precondition(format!(
                "edge-cycle equilibrium must have exactly one expanding direction, found {}",
                positive.len()
            )));
        }
        contracting *= incoming.abs();
        expanding *= positive[0];
    }
    let product_criterion = contracting > expanding;
    Ok(StabilityVerdict {
        contracting_product_abs: contracting,
        expanding_product: expanding,
        product_criterion,
        corollary_inequality: params.lambda < params.c0 / f1,
        asymptotically_stable: product_criterion,
    })
}

/// Indices `k` (1-based) with `σ_k > 0`; count is `m` or `m+1` for a vertex
/// with `m` sign switches (the latter when σ_n > 0).
pub fn unstable_directions(
    xi: &BinaryPattern,
    a: &[Rat],
    params: &ModelParams,
) -> Result<Vec<usize>> {
    let sigma = vertex_eigenvalues(xi, a, params)?;
    let idx: Vec<usize> = sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.0)
        .map(|(k, _)| k + 1)
        .collect();
    let m = count_switches(xi);
    debug_assert!(
        !cond_signes(params)? || idx.len() == m || idx.len() == m + 1,
        "vertex must have m or m+1 unstable directions"
    );
    Ok(idx)
}

/// Classify the connection from column ξ_i to column ξ_{i+1}.
fn classify_connection(from: &BinaryPattern, to: &BinaryPattern) -> ConnectionKind {
    let flips: Vec<usize> = from
        .entries()
        .iter()
        .zip(to.entries())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(k, _)| k)
        .collect();
    match flips.len() {
        0 => ConnectionKind::Identical,
        1 => ConnectionKind::Edge,
        _ => {
            let adjacent_pair = flips.windows(2).any(|w| w[1] == w[0] + 1);
            if adjacent_pair {
                ConnectionKind::Blocked
            } else {
                ConnectionKind::Diagonal
            }
        }
    }
}

fn sign_vector(j_xi: &[Rat]) -> Vec<i8> {
    j_xi.iter()
        .map(|v| {
            if v.is_zero() {
                0
            } else if v > &Rat::zero() {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// The full classification pipeline for a consecutive cycle (η, n).
pub fn predict_cycle(
    eta: &GeneratorVector,
    n: usize,
    params: &ModelParams,
) -> Result<PredictionReport> {
    let sigma = build_consecutive_sigma(eta, n)?;
    let p = eta.period();
    let dim_w = dim_w_eta(eta);
    let rank_sigma = rank(&RationalMatrix::from_sigma(&sigma));
    let admissible = dim_w == rank_sigma;
    let cond = cond_signes(params)?;
    let adj = has_adjacent_switches(&sigma);
    let adj_rows = has_adjacent_switches_rows(&sigma);
    let f1 = params.f_q_at_one()?;
    let annihilator: RationalPoly = minimal_annihilator(eta);

    if !admissible {
        return Ok(PredictionReport {
            eta: eta.to_sign_string(),
            n,
            p,
            admissible,
            dim_w_eta: dim_w,
            rank_sigma,
            companion_row: None,
            companion_non_unique: false,
            minimal_annihilator: Some(annihilator.render()),
            cond_signes: cond,
            adjacent_switches: adj,
            adjacent_switches_rows: adj_rows,
            cycle_type: CycleType::None,
            vertices: vec![],
            connections: vec![],
            edge_conditions: (false, false),
            stability: None,
            f_q_at_one: f1,
            params: *params,
        });
    }

    let (a, non_unique) = companion_row(eta, n)?;
    let j = crate::ratlinalg::companion_matrix(&a);

    let mut vertices = Vec::with_capacity(p);
    for xi in sigma.columns() {
        let eig = vertex_eigenvalues(&xi, &a, params)?;
        let unstable: Vec<usize> = eig
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(k, _)| k + 1)
            .collect();
        let x_rat: Vec<Rat> = xi.entries().iter().map(|&e| rat(e as i64)).collect();
        let image = j.mul_vec(&x_rat);
        vertices.push(VertexAnalysis {
            switch_count: count_switches(&xi),
            image_signs: sign_vector(&image),
            eigenvalues: eig,
            unstable_indices: unstable,
            vertex: xi,
        });
    }
    let cols = sigma.columns();
    let connections: Vec<ConnectionKind> = (0..p)
        .map(|i| classify_connection(&cols[i], &cols[(i + 1) % p]))
        .collect();

    let is_edge_row =
        a[0] == -Rat::one() && a[1..].iter().all(|v| v.is_zero());
    let edge_conditions = edge_cycle_conditions(&a, params)?;

    // connection typing decides realizability: identical columns are a
    // degenerate repeated vertex; a blocked step (adjacent flipped pair)
    // admits no saddle-sink connection. The column-interior adjacent-switch
    // scan is equivalent to the blocked-step test for n ≥ 3 but vacuous for
    // n = 2, so the connection test is authoritative.
    let all_edge = connections.iter().all(|c| *c == ConnectionKind::Edge);
    let any_unrealizable = connections
        .iter()
        .any(|c| matches!(c, ConnectionKind::Blocked | ConnectionKind::Identical));

    let cycle_type = if all_edge && is_edge_row && cond && edge_conditions.0 && edge_conditions.1 {
        CycleType::Edge
    } else if cond && !adj && !any_unrealizable {
        CycleType::NonEdge
    } else {
        CycleType::None
    };

    let stability = if cycle_type == CycleType::Edge {
        Some(edge_cycle_stability(&a, params)?)
    } else {
        None
    };

    Ok(PredictionReport {
        eta: eta.to_sign_string(),
        n,
        p,
        admissible,
        dim_w_eta: dim_w,
        rank_sigma,
        companion_row: Some(a.iter().map(format_rat).collect()),
        companion_non_unique: non_unique,
        minimal_annihilator: Some(annihilator.render()),
        cond_signes: cond,
        adjacent_switches: adj,
        adjacent_switches_rows: adj_rows,
        cycle_type,
        vertices,
        connections,
        edge_conditions,
        stability,
        f_q_at_one: f1,
        params: *params,
    })
}

/// The pattern cycle Σ the prediction refers to (for trace comparison).
pub fn predicted_sigma(eta: &GeneratorVector, n: usize) -> Result<CycleMatrix> {
    build_consecutive_sigma(eta, n)
}
