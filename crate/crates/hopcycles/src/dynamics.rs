//! Firing-rate ODE right-hand sides, regularizations of the inverse firing
//! function, fixed-point root solves and fixed-step RK4 integration.
//!
//! Two formulations are supported: the tanh form on `[−1,1]ⁿ`
//! (`ẋ = (I − diag x·x)(λ(c₀x + c₁Jx) − f_q(x))`) and the logistic form on
//! `[0,1]ⁿ` (`ẋᵢ = xᵢ(1−xᵢ)(−λ f(xᵢ) − (Jx)ᵢ + I)`). Vertices of the cube
//! are equilibria for both, and faces of the cube are flow-invariant.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Regularization of the inverse firing function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizationSpec {
    /// Degree-`q` truncation of `arctanh` (odd `q`), for the tanh form.
    ArctanhTaylor { q: u32 },
    /// Degree-`q` Taylor polynomial of the logit about `x = 0.5`.
    LogitTaylor { q: u32 },
    /// `f_ε(x) = ln((x+ε)/(1+ε−x))`.
    LogitEpsilon { epsilon: f64 },
}

impl RegularizationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RegularizationSpec::ArctanhTaylor { q } => {
                if q % 2 == 0 || q == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "arctanh truncation degree must be odd, got {q}"
                    )));
                }
            }
            RegularizationSpec::LogitTaylor { q } => {
                if q == 0 {
                    return Err(Error::InvalidArgument("q must be ≥ 1".into()));
                }
            }
            RegularizationSpec::LogitEpsilon { epsilon } => {
                if epsilon <= 0.0 {
                    return Err(Error::InvalidArgument("ε must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Gain λ, decomposition weights `c₀ + c₁ = 1`, constant input `I` (logistic
/// form only) and the active regularization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(default)]
    pub input_i: f64,
    pub regularization: RegularizationSpec,
}

impl ModelParams {
    /// Tanh-form parameters under hypothesis (H): `0 ≤ c₀ < 1`, `c₁ = 1 − c₀`.
    pub fn tanh(lambda: f64, c0: f64, q: u32) -> Result<Self> {
        let p = Self {
            lambda,
            c0,
            c1: 1.0 - c0,
            input_i: 0.0,
            regularization: RegularizationSpec::ArctanhTaylor { q },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn logistic(lambda: f64, input_i: f64, reg: RegularizationSpec) -> Result<Self> {
        let p = Self {
            lambda,
            c0: 0.0,
            c1: 1.0,
            input_i,
            regularization: reg,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidArgument("λ must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.c0) {
            return Err(Error::InvalidArgument(
                "hypothesis (H) requires 0 ≤ c₀ < 1".into(),
            ));
        }
        if (self.c0 + self.c1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "hypothesis (H) requires c₀ + c₁ = 1".into(),
            ));
        }
        self.regularization.validate()
    }

    /// `f_q(1)` for the active tanh-form regularization.
    pub fn f_q_at_one(&self) -> Result<f64> {
        match self.regularization {
            RegularizationSpec::ArctanhTaylor { q } => f_arctanh_taylor(1.0, q),
            _ => Err(Error::Precondition(
                "f_q(1) is defined for the arctanh-Taylor regularization".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// state space `[−1, 1]ⁿ`, tanh inverse firing function
    TanhCube,
    /// state space `[0, 1]ⁿ`, logistic inverse firing function
    LogisticCube,
}

/// A concrete simulable system: formulation, float view of `J`, parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub formulation: Formulation,
    pub j: Vec<Vec<f64>>,
    pub params: ModelParams,
    pub n: usize,
}

impl SystemSpec {
    pub fn new(formulation: Formulation, j: Vec<Vec<f64>>, params: ModelParams) -> Result<Self> {
        let n = j.len();
        if n == 0 || j.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimension("J must be square".into()));
        }
        params.validate()?;
        Ok(Self {
            formulation,
            j,
            params,
            n,
        })
    }

    fn j_dot(&self, x: &[f64], i: usize) -> f64 {
        self.j[i].iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn cube(&self) -> (f64, f64) {
        match self.formulation {
            Formulation::TanhCube => (-1.0, 1.0),
            Formulation::LogisticCube => (0.0, 1.0),
        }
    }
}

/// Degree-`q` truncation of `arctanh`: `x + x³/3 + ⋯ + x^q/q` (odd `q`).
pub fn f_arctanh_taylor(x: f64, q: u32) -> Result<f64> {
    if q % 2 == 0 || q == 0 {
        return Err(Error::InvalidArgument(format!(
            "truncation degree must be odd, got {q}"
        )));
    }
    let mut sum = 0.0;
    let mut pow = x;
    let x2 = x * x;
    let mut k = 1u32;
    while k <= q {
        sum += pow / k as f64;
        pow *= x2;
        k += 2;
    }
    Ok(sum)
}

/// `f_ε(x) = ln((x+ε)/(1+ε−x))`, defined on `(−ε, 1+ε)`.
pub fn f_logit_epsilon(x: f64, epsilon: f64) -> Result<f64> {
    if !(x > -epsilon && x < 1.0 + epsilon) {
        return Err(Error::Domain(format!(
            "x = {x} outside (−ε, 1+ε) with ε = {epsilon}"
        )));
    }
    Ok(((x + epsilon) / (1.0 + epsilon - x)).ln())
}

/// Degree-`q` Taylor polynomial of `ln(x/(1−x))` about `x = 0.5`, computed
/// through the identity `ln(x/(1−x)) = 2·arctanh(2x − 1)`.
pub fn f_logit_taylor(x: f64, q: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be ≥ 1".into()));
    }
    // the logit expansion about 0.5 has only odd terms, so an even-degree
    // truncation coincides with the next-lower odd truncation
    let q_odd = if q % 2 == 0 { q - 1 } else { q };
    Ok(2.0 * f_arctanh_taylor(2.0 * x - 1.0, q_odd)?)
}

/// The regularized inverse firing function for the logistic form.
pub fn f_logistic_reg(x: f64, reg: &RegularizationSpec) -> Result<f64> {
    match *reg {
        RegularizationSpec::LogitEpsilon { epsilon } => f_logit_epsilon(x, epsilon),
        RegularizationSpec::LogitTaylor { q } => f_logit_taylor(x, q),
        RegularizationSpec::ArctanhTaylor { .. } => Err(Error::Precondition(
            "logistic form requires a logit regularization".into(),
        )),
    }
}

/// RHS of the tanh form: `(1 − x_j²)(λc₀x_j + λc₁(Jx)_j − f_q(x_j))`.
pub fn rhs_tanh(x: &[f64], spec: &SystemSpec) -> Result<Vec<f64>> {
    if x.len() != spec.n {
        return Err(Error::InvalidDimension("state dimension mismatch".into()));
    }
    let RegularizationSpec::ArctanhTaylor { q } = spec.params.regularization else {
        return Err(Error::Precondition(
            "tanh form requires the arctanh-Taylor regularization".into(),
        ));
    };
    let (lambda, c0, c1) = (spec.params.lambda, spec.params.c0, spec.params.c1);
    (0..spec.n)
        .map(|i| {
            let jx = spec.j_dot(x, i);
            Ok((1.0 - x[i] * x[i]) * (lambda * (c0 * x[i] + c1 * jx) - f_arctanh_taylor(x[i], q)?))
        })
        .collect()
}

/// RHS of the logistic form: `x_i(1−x_i)(−λ f_reg(x_i) − (Jx)_i + I)`.
pub fn rhs_logistic(x: &[f64], spec: &SystemSpec) -> Result<Vec<f64>> {
    if x.len() != spec.n {
        return Err(Error::InvalidDimension("state dimension mismatch".into()));
    }
    let (lambda, input_i) = (spec.params.lambda, spec.params.input_i);
    (0..spec.n)
        .map(|i| {
            let gate = x[i] * (1.0 - x[i]);
            if gate == 0.0 {
                // faces are exactly invariant; skip f evaluation at the boundary
                return Ok(0.0);
            }
            let f = f_logistic_reg(x[i], &spec.params.regularization)?;
            Ok(gate * (-lambda * f - spec.j_dot(x, i) + input_i))
        })
        .collect()
}

pub fn rhs(x: &[f64], spec: &SystemSpec) -> Result<Vec<f64>> {
    match spec.formulation {
        Formulation::TanhCube => rhs_tanh(x, spec),
        Formulation::LogisticCube => rhs_logistic(x, spec),
    }
}

/// Positive solution `β_λ ∈ (0,1)` of `λc₀β = arctanh(β)`, when `λc₀ > 1`.
pub fn solve_beta_lambda(lambda: f64, c0: f64) -> Option<f64> {
    let a = lambda * c0;
    if a <= 1.0 {
        return None;
    }
    // g(β) = arctanh(β) − aβ: negative just above 0, +∞ at 1⁻
    let g = |b: f64| b.atanh() - a * b;
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-15);
    if g(lo) >= 0.0 || g(hi) <= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Root `ρ ∈ (0,1)` of `−λ f_reg(ρ) − ρ + I = 0`, by bisection.
pub fn solve_rho(lambda: f64, input_i: f64, reg: &RegularizationSpec) -> Option<f64> {
    let g = |r: f64| f_logistic_reg(r, reg).map(|f| -lambda * f - r + input_i);
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (glo, ghi) = (g(lo).ok()?, g(hi).ok()?);
    if glo == 0.0 {
        return Some(lo);
    }
    if glo * ghi > 0.0 {
        return None;
    }
    let sign = glo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).ok()?.signum() == sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Integrated time series with integration metadata.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub spec: SystemSpec,
    pub dt: f64,
    pub stride: usize,
    pub x0: Vec<f64>,
    /// number of post-step clips onto the closed cube
    pub clip_events: usize,
}

/// Classical fixed-step RK4 with post-step clipping to the closed state cube.
/// Deterministic given `(x0, dt, t_end)`. Samples are stored every `stride`
/// steps (the initial state is always stored).
pub fn integrate(
    spec: &SystemSpec,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    integrate_with_floor(spec, x0, t_end, dt, stride, None)
}

/// `integrate` with an optional face-distance floor.
///
/// Strongly contracting parameter regimes squeeze coordinates so close to
/// the cube faces that double precision saturates (increments round to zero
/// and the coordinate freezes), killing a heteroclinic cycle that the exact
/// flow would keep following. The floor keeps every coordinate at distance
/// ≥ `δ` from the faces — a deterministic stand-in for the perturbation
/// noise any numerical trajectory carries. Coordinates starting exactly on a
/// face are exempt, so face invariance and vertex equilibria are preserved.
pub fn integrate_with_floor(
    spec: &SystemSpec,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
    face_floor: Option<f64>,
) -> Result<Trajectory> {
    if dt <= 0.0 || t_end <= 0.0 {
        return Err(Error::InvalidArgument("dt and t_end must be positive".into()));
    }
    if x0.len() != spec.n {
        return Err(Error::InvalidDimension("x0 dimension mismatch".into()));
    }
    if let Some(d) = face_floor {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "face floor must lie in (0, 0.5), got {d}"
            )));
        }
    }
    let stride = stride.max(1);
    let (lo, hi) = spec.cube();
    // coordinates placed exactly on a face stay exempt from the floor
    let on_face: Vec<bool> = x0.iter().map(|&v| v == lo || v == hi).collect();
    let steps = (t_end / dt).round() as usize;
    let mut x = x0.to_vec();
    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut states = Vec::with_capacity(steps / stride + 2);
    times.push(0.0);
    states.push(x.clone());
    let mut clip_events = 0usize;

    let mut k1 = vec![0.0; spec.n];
    for step in 1..=steps {
        k1.copy_from_slice(&rhs(&x, spec)?);
        let xk: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k2 = rhs(&xk, spec)?;
        let xk: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k3 = rhs(&xk, spec)?;
        let xk: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
        let k4 = rhs(&xk, spec)?;
        let mut clipped = false;
        for i in 0..spec.n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if x[i] < lo {
                x[i] = lo;
                clipped = true;
            } else if x[i] > hi {
                x[i] = hi;
                clipped = true;
            }
            if let Some(d) = face_floor {
                if !on_face[i] {
                    x[i] = x[i].clamp(lo + d, hi - d);
                }
            }
            if !x[i].is_finite() {
                return Err(Error::IntegrationFailure {
                    t: (step - 1) as f64 * dt,
                });
            }
        }
        if clipped {
            clip_events += 1;
        }
        if step % stride == 0 || step == steps {
            times.push(step as f64 * dt);
            states.push(x.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        spec: spec.clone(),
        dt,
        stride,
        x0: x0.to_vec(),
        clip_events,
    })
}

/// Realize "initial conditions close to a vertex": vertex + δ inward.
pub fn near_vertex_x0(vertex: &[i8], spec: &SystemSpec, delta: f64) -> Vec<f64> {
    let (lo, hi) = spec.cube();
    vertex
        .iter()
        .map(|&s| if s > 0 { hi - delta } else { lo + delta })
        .collect()
}
