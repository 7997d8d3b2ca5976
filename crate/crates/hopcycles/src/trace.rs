//! Trajectory post-processing: sign-sequence extraction, comparison against a
//! predicted pattern cycle, and asymptotic-regime classification
//! (heteroclinic-like / periodic / equilibrium), including ε-sweeps.

use crate::dynamics::{rhs, Formulation, SystemSpec, Trajectory};
use crate::patterns::{BinaryPattern, CycleMatrix};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default commitment threshold: a sample is attributed to a vertex pattern
/// only when every coordinate is at least this far into its half-cube.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Default dwell-growth margin γ for regime classification.
pub const DEFAULT_GAMMA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Asymptotics {
    /// dwell times grow geometrically: numerical signature of approach to a
    /// heteroclinic cycle (a verdict, not a proof — in floating point a true
    /// cycle is indistinguishable from a very long-period orbit)
    HeteroclinicLike,
    Periodic,
    Equilibrium,
    Undetermined,
}

/// Diagnostics accompanying a regime verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDiagnostics {
    /// geometric mean of consecutive dwell ratios over the analysis window
    pub dwell_growth_ratio: Option<f64>,
    /// time between the last two visits to the same pattern
    pub period_estimate: Option<f64>,
    /// Euclidean distance from the final state to the nearest cube vertex
    pub final_vertex_distance: f64,
    /// max |ẋ| over the final 5% of stored samples
    pub tail_speed: f64,
}

/// The symbolic reading of a trajectory: which vertex patterns it visited,
/// for how long, and what regime the tail suggests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceResult {
    pub visited: Vec<BinaryPattern>,
    pub dwell_times: Vec<f64>,
    pub matched_cycle: Option<MatchedCycle>,
    pub asymptotics: Asymptotics,
    pub diagnostics: TraceDiagnostics,
    pub threshold: f64,
}

/// A successful cyclic match against a pattern cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedCycle {
    /// column index of Σ aligned with the first visit of the matched suffix
    pub offset: usize,
    /// number of trailing visits that follow the cycle (≥ p)
    pub matched_visits: usize,
    pub periods: usize,
}

fn committed_pattern(x: &[f64], formulation: Formulation, threshold: f64) -> Option<BinaryPattern> {
    let signs: Option<Vec<i8>> = match formulation {
        Formulation::TanhCube => x
            .iter()
            .map(|&v| {
                if v.abs() >= threshold {
                    Some(if v > 0.0 { 1 } else { -1 })
                } else {
                    None
                }
            })
            .collect(),
        Formulation::LogisticCube => x
            .iter()
            .map(|&v| {
                if (v - 0.5).abs() >= threshold / 2.0 {
                    Some(if v > 0.5 { 1 } else { -1 })
                } else {
                    None
                }
            })
            .collect(),
    };
    signs.map(|s| BinaryPattern::new(s).expect("non-empty sign vector"))
}

/// Extract the visit sequence from a trajectory: a sample is committed to a
/// vertex pattern when every coordinate clears the threshold; consecutive
/// commitments to the same pattern merge into one visit with accumulated
/// dwell time.
pub fn sign_sequence(traj: &Trajectory, threshold: f64) -> Result<(Vec<BinaryPattern>, Vec<f64>)> {
    if !(0.0 < threshold && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "commitment threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let mut visited: Vec<BinaryPattern> = Vec::new();
    let mut dwell: Vec<f64> = Vec::new();
    let mut prev_committed_t: Option<f64> = None;
    for (i, x) in traj.states.iter().enumerate() {
        let t = traj.times[i];
        match committed_pattern(x, traj.spec.formulation, threshold) {
            Some(pat) => {
                if visited.last() == Some(&pat) {
                    if let Some(tp) = prev_committed_t {
                        *dwell.last_mut().unwrap() += t - tp;
                    }
                } else {
                    visited.push(pat);
                    dwell.push(0.0);
                }
                prev_committed_t = Some(t);
            }
            None => prev_committed_t = None,
        }
    }
    Ok((visited, dwell))
}

/// Cyclic-order match of the visit sequence against the columns of Σ.
///
/// Returns `Some(MatchedCycle)` when the trailing visits follow Σ's column
/// order (under some rotation) for at least one full period; `None` when the
/// sequence deviates or is too short (undetermined, not an error).
pub fn matches_cycle(visited: &[BinaryPattern], sigma: &CycleMatrix) -> Option<MatchedCycle> {
    let cols = sigma.columns();
    let p = cols.len();
    if visited.len() < p || p == 0 {
        return None;
    }
    let last = visited.last().unwrap();
    // columns of a consecutive cycle are distinct, but stay general
    for (r, col) in cols.iter().enumerate() {
        if col != last {
            continue;
        }
        let mut matched = 1usize;
        while matched < visited.len() {
            let expect = &cols[(r + p - (matched % p)) % p];
            if &visited[visited.len() - 1 - matched] == expect {
                matched += 1;
            } else {
                break;
            }
        }
        if matched >= p {
            let offset = (r + p - ((matched - 1) % p)) % p;
            return Some(MatchedCycle {
                offset,
                matched_visits: matched,
                periods: matched / p,
            });
        }
    }
    None
}

/// Max |ẋ| over the final 5% of stored samples.
fn tail_speed(traj: &Trajectory) -> Result<f64> {
    let m = traj.states.len();
    let start = m - (m / 20).max(1);
    let mut sup = 0.0f64;
    for x in &traj.states[start..] {
        let dx = rhs(x, &traj.spec)?;
        for v in dx {
            sup = sup.max(v.abs());
        }
    }
    Ok(sup)
}

fn final_vertex_distance(traj: &Trajectory) -> f64 {
    let x = traj.states.last().expect("non-empty trajectory");
    let d2: f64 = match traj.spec.formulation {
        Formulation::TanhCube => x.iter().map(|&v| (1.0 - v.abs()).powi(2)).sum(),
        Formulation::LogisticCube => x
            .iter()
            .map(|&v| {
                let d = v.min(1.0 - v);
                d * d
            })
            .sum(),
    };
    d2.sqrt()
}

/// Consecutive dwell ratios over the last complete visits. The final visit is
/// dropped when the trajectory is still committed at `t_end` (its dwell is
/// truncated by the end of the run).
fn analysis_dwells(traj: &Trajectory, visited: &[BinaryPattern], dwell: &[f64], threshold: f64) -> Vec<f64> {
    let mut d = dwell.to_vec();
    if let Some(x) = traj.states.last() {
        let still_committed = committed_pattern(x, traj.spec.formulation, threshold).as_ref()
            == visited.last();
        if still_committed && d.len() > 1 {
            d.pop();
        }
    }
    d
}

/// Classify the tail regime of a trajectory from its visit statistics.
///
/// Order of tests: a stationary tail (max |ẋ| < 1e−8 over the final 5%) is an
/// equilibrium; dwell times growing by ≥ 1+γ across the last 4 complete
/// visits is heteroclinic-like; ratios within [1−γ, 1+γ] is periodic;
/// anything else is undetermined.
pub fn classify_asymptotics(
    traj: &Trajectory,
    visited: &[BinaryPattern],
    dwell: &[f64],
    threshold: f64,
    gamma: f64,
) -> Result<(Asymptotics, TraceDiagnostics)> {
    let speed = tail_speed(traj)?;
    let fvd = final_vertex_distance(traj);
    let d = analysis_dwells(traj, visited, dwell, threshold);

    // Dwell ratios between successive visits to the *same* pattern: nodes of
    // an asymmetric cycle have systematically different dwells, so comparing
    // neighbouring visits of distinct patterns would mask the growth trend.
    let mut all_ratios: Vec<f64> = Vec::new();
    for (i, pat) in visited.iter().enumerate().take(d.len()) {
        if let Some(j) = visited[..i].iter().rposition(|q| q == pat) {
            if d[j] > 0.0 {
                all_ratios.push(d[i] / d[j]);
            }
        }
    }
    let ratios: Vec<f64> = if all_ratios.len() >= 4 {
        all_ratios[all_ratios.len() - 4..].to_vec()
    } else {
        Vec::new()
    };
    let growth = if ratios.is_empty() {
        None
    } else {
        Some(ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64))
    };

    // time between the last two visits to the same pattern
    let period = last_period(traj, visited, threshold);

    let diag = TraceDiagnostics {
        dwell_growth_ratio: growth,
        period_estimate: period,
        final_vertex_distance: fvd,
        tail_speed: speed,
    };

    // A stationary tail alone does not prove an equilibrium: a run ending
    // mid-dwell parked near a saddle of the cycle looks just as quiet. Only
    // accept it when the current visit is not one more dwell of comparable
    // length to its predecessor at the same pattern.
    let mut settled = speed < 1e-8;
    if settled && d.len() < dwell.len() {
        let cur = *dwell.last().unwrap();
        let pat = visited.last().unwrap();
        if let Some(j) = visited[..visited.len() - 1].iter().rposition(|q| q == pat) {
            if cur < 5.0 * dwell[j] {
                settled = false;
            }
        }
    }

    let verdict = if settled {
        Asymptotics::Equilibrium
    } else if !ratios.is_empty() && ratios.iter().all(|&r| r >= 1.0 + gamma) {
        Asymptotics::HeteroclinicLike
    } else if !ratios.is_empty()
        && ratios.iter().all(|&r| (1.0 - gamma..=1.0 + gamma).contains(&r))
        && period.is_some()
    {
        Asymptotics::Periodic
    } else {
        Asymptotics::Undetermined
    };
    Ok((verdict, diag))
}

/// Time between the starts of the last two visits to the final pattern.
fn last_period(traj: &Trajectory, visited: &[BinaryPattern], threshold: f64) -> Option<f64> {
    let target = visited.last()?;
    let mut starts: Vec<f64> = Vec::new();
    let mut inside = false;
    for (i, x) in traj.states.iter().enumerate() {
        let here = committed_pattern(x, traj.spec.formulation, threshold).as_ref() == Some(target);
        if here && !inside {
            starts.push(traj.times[i]);
        }
        inside = here;
    }
    if starts.len() >= 2 {
        Some(starts[starts.len() - 1] - starts[starts.len() - 2])
    } else {
        None
    }
}

/// Full symbolic analysis of a trajectory, optionally matched against Σ.
pub fn analyze(
    traj: &Trajectory,
    sigma: Option<&CycleMatrix>,
    threshold: f64,
    gamma: f64,
) -> Result<TraceResult> {
    let (visited, dwell_times) = sign_sequence(traj, threshold)?;
    let matched_cycle = sigma.and_then(|s| matches_cycle(&visited, s));
    let (asymptotics, diagnostics) =
        classify_asymptotics(traj, &visited, &dwell_times, threshold, gamma)?;
    Ok(TraceResult {
        visited,
        dwell_times,
        matched_cycle,
        asymptotics,
        diagnostics,
        threshold,
    })
}

/// Classify with horizon escalation: integrate to each horizon in turn and
/// return the first committing verdict (anything but `Undetermined`), or the
/// final result if none commits.
///
/// Heteroclinic dwell growth is only numerically resolvable before the
/// trajectory saturates at the integrator's face floor (after which dwells
/// plateau and look periodic), while equilibrium convergence may need a much
/// longer run — so the shortest horizon that commits wins.
pub fn classify_escalating(
    spec: &SystemSpec,
    x0: &[f64],
    horizons: &[f64],
    dt: f64,
    stride: usize,
    face_floor: Option<f64>,
    threshold: f64,
    gamma: f64,
) -> Result<(TraceResult, f64)> {
    if horizons.is_empty() {
        return Err(Error::InvalidArgument("horizon list must be non-empty".into()));
    }
    let mut last = None;
    for &t_end in horizons {
        let traj = crate::dynamics::integrate_with_floor(spec, x0, t_end, dt, stride, face_floor)?;
        let result = analyze(&traj, None, threshold, gamma)?;
        if result.asymptotics != Asymptotics::Undetermined {
            return Ok((result, t_end));
        }
        last = Some((result, t_end));
    }
    Ok(last.unwrap())
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    /// the swept parameter value (ε or λ)
    pub value: f64,
    pub regime: Asymptotics,
    pub dwell_growth_ratio: Option<f64>,
    pub period_estimate: Option<f64>,
    pub error: Option<String>,
}

/// Run `integrate` + `classify_asymptotics` for each prepared system; cells
/// are independent and run in parallel. Integration failures are recorded
/// per cell and do not abort the sweep.
pub fn sweep(
    cells: &[(f64, SystemSpec)],
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
    threshold: f64,
    gamma: f64,
) -> Result<Vec<SweepRow>> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("sweep grid must be non-empty".into()));
    }
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|(value, spec)| {
            let run = crate::dynamics::integrate(spec, x0, t_end, dt, stride)
                .and_then(|traj| analyze(&traj, None, threshold, gamma));
            match run {
                Ok(tr) => SweepRow {
                    value: *value,
                    regime: tr.asymptotics,
                    dwell_growth_ratio: tr.diagnostics.dwell_growth_ratio,
                    period_estimate: tr.diagnostics.period_estimate,
                    error: None,
                },
                Err(e) => SweepRow {
                    value: *value,
                    regime: Asymptotics::Undetermined,
                    dwell_growth_ratio: None,
                    period_estimate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

/// Intervals (between consecutive grid values) where the regime changes;
/// brackets each regime boundary to the grid resolution.
pub fn regime_boundaries(rows: &[SweepRow]) -> Vec<(f64, f64)> {
    rows.windows(2)
        .filter(|w| w[0].regime != w[1].regime)
        .map(|w| (w[0].value, w[1].value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, ModelParams};
    use crate::patterns::{build_consecutive_sigma, GeneratorVector};

    fn tanh_spec(j: Vec<Vec<f64>>, lambda: f64, c0: f64, q: u32) -> SystemSpec {
        SystemSpec::new(Formulation::TanhCube, j, ModelParams::tanh(lambda, c0, q).unwrap())
            .unwrap()
    }

    #[test]
    fn constant_vertex_trajectory_is_one_visit() {
        let j = vec![vec![0.0, 0.0, 0.0]; 3];
        let spec = tanh_spec(j, 8.0, 0.6, 9);
        let traj = integrate(&spec, &[1.0, 1.0, 1.0], 1.0, 0.01, 1).unwrap();
        let (visited, dwell) = sign_sequence(&traj, 0.5).unwrap();
        assert_eq!(visited.len(), 1);
        assert_eq!(visited[0].entries(), &[1, 1, 1]);
        assert!((dwell[0] - 1.0).abs() < 0.02);
        let (verdict, _) = classify_asymptotics(&traj, &visited, &dwell, 0.5, 0.1).unwrap();
        assert_eq!(verdict, Asymptotics::Equilibrium);
    }

    #[test]
    fn threshold_range_enforced() {
        let j = vec![vec![0.0]];
        let spec = tanh_spec(j, 8.0, 0.6, 9);
        let traj = integrate(&spec, &[0.9], 0.1, 0.01, 1).unwrap();
        assert!(sign_sequence(&traj, 0.0).is_err());
        assert!(sign_sequence(&traj, 1.0).is_err());
    }

    #[test]
    fn exact_double_period_matches_offset_zero() {
        let eta = GeneratorVector::parse("+++---").unwrap();
        let sigma = build_consecutive_sigma(&eta, 3).unwrap();
        let cols = sigma.columns();
        let mut visited = cols.clone();
        visited.extend(cols.clone());
        let m = matches_cycle(&visited, &sigma).unwrap();
        assert_eq!(m.offset, 0);
        assert_eq!(m.periods, 2);
        assert_eq!(m.matched_visits, 12);
    }

    #[test]
    fn rotated_suffix_matches_with_offset() {
        let eta = GeneratorVector::parse("+++---").unwrap();
        let sigma = build_consecutive_sigma(&eta, 3).unwrap();
        let cols = sigma.columns();
        // transient garbage followed by one period starting at column 2
        let mut visited = vec![cols[4].clone(), cols[3].clone()];
        for i in 0..6 {
            visited.push(cols[(2 + i) % 6].clone());
        }
        let m = matches_cycle(&visited, &sigma).unwrap();
        assert_eq!(m.offset, 2);
        assert!(m.matched_visits >= 6);
    }

    #[test]
    fn short_or_deviant_sequences_do_not_match() {
        let eta = GeneratorVector::parse("+++---").unwrap();
        let sigma = build_consecutive_sigma(&eta, 3).unwrap();
        let cols = sigma.columns();
        assert!(matches_cycle(&cols[..5], &sigma).is_none());
        // reversed order
        let rev: Vec<_> = cols.iter().rev().cloned().collect();
        assert!(matches_cycle(&rev, &sigma).is_none());
    }

    #[test]
    fn match_is_s_symmetric() {
        let eta = GeneratorVector::parse("++--").unwrap();
        let sigma = build_consecutive_sigma(&eta, 3).unwrap();
        let cols = sigma.columns();
        let mut visited = cols.clone();
        visited.extend(cols.clone());
        let neg: Vec<_> = visited.iter().map(|v| v.negated()).collect();
        let m1 = matches_cycle(&visited, &sigma);
        let m2 = matches_cycle(&neg, &sigma.negated());
        assert_eq!(m1.is_some(), m2.is_some());
        assert_eq!(m1.unwrap().offset, m2.unwrap().offset);
    }

    #[test]
    fn lambda8_trajectory_follows_six_column_cycle() {
        let eta = GeneratorVector::parse("+++---").unwrap();
        let sigma = build_consecutive_sigma(&eta, 3).unwrap();
        let a: Vec<Vec<f64>> = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![-1.0, 0.0, 0.0],
        ];
        let spec = tanh_spec(a, 8.0, 0.6, 9);
        let x0 = crate::dynamics::near_vertex_x0(&[1, 1, 1], &spec, 0.01);
        // λ=8 contracts hard enough to saturate f64 near the faces; the
        // face floor keeps the cycle numerically alive (see dynamics)
        let traj =
            crate::dynamics::integrate_with_floor(&spec, &x0, 500.0, 0.001, 10, Some(1e-4))
                .unwrap();
        let result = analyze(&traj, Some(&sigma), 0.5, 0.1).unwrap();
        let m = result.matched_cycle.expect("trajectory must follow the 6-column cycle");
        assert!(m.periods >= 2, "need ≥ 2 full periods, got {}", m.periods);
        // slowdown: dwell times non-decreasing after transients (up to
        // integration jitter; the floor caps the growth at a plateau)
        let d = &result.dwell_times;
        assert!(d.len() >= 6);
        let tail = &d[1..d.len() - 1];
        assert!(
            tail.windows(2).all(|w| w[1] >= w[0] * 0.999),
            "dwells {:?}",
            tail
        );
    }

    #[test]
    fn sweep_reports_errors_per_cell_and_boundaries() {
        let j = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let cells: Vec<(f64, SystemSpec)> = vec![
            (1.0, tanh_spec(j.clone(), 8.0, 0.6, 9)),
            (2.0, tanh_spec(j.clone(), 8.0, 0.6, 9)),
        ];
        let rows = sweep(&cells, &[1.0, 1.0], 1.0, 0.01, 1, 0.5, 0.1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_none()));
        assert_eq!(rows[0].regime, Asymptotics::Equilibrium);
        assert!(regime_boundaries(&rows).is_empty());
        assert!(sweep(&[], &[1.0], 1.0, 0.01, 1, 0.5, 0.1).is_err());
    }
}
