//! Support radii, waiting times and the finite/infinite speed classifier.

use serde::Serialize;

use super::AnalysisError;
use crate::solver::{Grid, SnapshotSeries};

/// `max |x_i|` (or `r_i`) over cells with `u_i > eps`; 0 if there are none.
pub fn support_radius(grid: &Grid, values: &[f64], eps: f64) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(_, &u)| u > eps)
        .map(|(i, _)| grid.radius_of(i))
        .fold(0.0, f64::max)
}

/// `u(x0)` by linear interpolation between the two nearest nodes.
fn value_at(grid: &Grid, values: &[f64], x0: f64) -> Result<f64, AnalysisError> {
    let lo = grid.coords[0];
    let hi = *grid.coords.last().unwrap();
    if !(x0 >= lo && x0 <= hi) {
        return Err(AnalysisError::Domain(format!("x0 = {x0} outside the grid [{lo}, {hi}]")));
    }
    let pos = (x0 - lo) / grid.dx;
    let i = (pos.floor() as usize).min(grid.points - 2);
    let w = pos - i as f64;
    Ok(values[i] * (1.0 - w) + values[i + 1] * w)
}

/// First time `u(x0, ·)` exceeds `eps`, linearly interpolated between
/// snapshots; `None` if it never does within the series.
pub fn waiting_time(series: &SnapshotSeries, x0: f64, eps: f64) -> Result<Option<f64>, AnalysisError> {
    if !(eps > 0.0) {
        return Err(AnalysisError::Precondition(format!("eps must be > 0 (got {eps})")));
    }
    let grid = &series.grid;
    let u0 = value_at(grid, &series.snapshots[0].values, x0)?;
    if u0 > eps {
        return Err(AnalysisError::Precondition(format!(
            "u(x0, 0) = {u0:e} already exceeds eps = {eps:e}"
        )));
    }
    let mut prev = (series.snapshots[0].t, u0);
    for snap in &series.snapshots[1..] {
        let u = value_at(grid, &snap.values, x0)?;
        if u > eps {
            let (t0, v0) = prev;
            let frac = (eps - v0) / (u - v0);
            return Ok(Some(t0 + frac * (snap.t - t0)));
        }
        prev = (snap.t, u);
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    FiniteSpeed,
    InfiniteSpeed,
    Inconclusive,
}

/// Decision thresholds of [`classify_propagation`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassifyRule {
    /// Largest relative spread of the last two waiting times for convergence.
    pub spread: f64,
    /// Converged limit must be at least this many time steps.
    pub min_steps: f64,
    /// Shrink factor across the ladder that signals infinite speed.
    pub collapse: f64,
}

impl Default for ClassifyRule {
    fn default() -> Self {
        Self {
            spread: 0.25,
            min_steps: 10.0,
            collapse: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub kind: Propagation,
    pub eps: Vec<f64>,
    /// Waiting time per threshold; `None` if not reached by the end.
    pub waiting_times: Vec<Option<f64>>,
    /// Relative spread of the last two waiting times, if both exist.
    pub last_spread: Option<f64>,
    /// `t*(ε_first)/t*(ε_last)`, with `t_end` standing in for a first
    /// threshold that was never reached.
    pub collapse_ratio: Option<f64>,
    pub dt_floor: f64,
    pub reason: String,
}

/// Reads `t*(x0, ε)` down a strictly decreasing threshold ladder and decides
/// finite speed (converged positive limit), infinite speed (collapse toward
/// the step floor) or neither.
pub fn classify_propagation(
    series: &SnapshotSeries,
    x0: f64,
    ladder: &[f64],
    rule: ClassifyRule,
) -> Result<Classification, AnalysisError> {
    if ladder.len() < 3 || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(AnalysisError::Precondition(
            "eps ladder must be strictly decreasing with at least 3 entries".into(),
        ));
    }
    let times: Vec<Option<f64>> = ladder
        .iter()
        .map(|&e| waiting_time(series, x0, e))
        .collect::<Result<_, _>>()?;
    let t_end = series.snapshots.last().map_or(0.0, |s| s.t);
    let dt_floor = series.dt_floor();
    let n = times.len();
    let last_spread = match (times[n - 2], times[n - 1]) {
        (Some(a), Some(b)) if a.max(b) > 0.0 => Some((a - b).abs() / a.max(b)),
        _ => None,
    };
    let collapse_ratio = times[n - 1].map(|last| times[0].unwrap_or(t_end) / last);
    let (kind, reason) = if times.iter().all(Option::is_none) {
        (Propagation::Inconclusive, format!("no threshold reached at x0 = {x0} by t = {t_end}"))
    } else if collapse_ratio.map_or(false, |r| r >= rule.collapse) {
        (
            Propagation::InfiniteSpeed,
            format!("waiting time shrinks by ×{:.3} down the ladder", collapse_ratio.unwrap()),
        )
    } else if times.iter().all(Option::is_some)
        && last_spread.map_or(false, |s| s < rule.spread)
        && times[n - 1].unwrap() >= rule.min_steps * dt_floor
    {
        (
            Propagation::FiniteSpeed,
            format!(
                "waiting time converges (spread {:.3}) to {:.6e} ≥ {}·dt",
                last_spread.unwrap(),
                times[n - 1].unwrap(),
                rule.min_steps
            ),
        )
    } else {
        (Propagation::Inconclusive, "neither convergence nor collapse".into())
    };
    Ok(Classification {
        kind,
        eps: ladder.to_vec(),
        waiting_times: times,
        last_spread,
        collapse_ratio,
        dt_floor,
        reason,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontReport {
    pub thresholds: Vec<f64>,
    pub times: Vec<f64>,
    /// `radii[k][e]`: support radius at snapshot `k` for threshold `e`.
    pub radii: Vec<Vec<f64>>,
    pub x0: f64,
    pub classification: Classification,
}

pub fn front_report(series: &SnapshotSeries, x0: f64, ladder: &[f64], rule: ClassifyRule) -> Result<FrontReport, AnalysisError> {
    let radii = series
        .snapshots
        .iter()
        .map(|s| ladder.iter().map(|&e| support_radius(&series.grid, &s.values, e)).collect())
        .collect();
    Ok(FrontReport {
        thresholds: ladder.to_vec(),
        times: series.times(),
        radii,
        x0,
        classification: classify_propagation(series, x0, ladder, rule)?,
    })
}
