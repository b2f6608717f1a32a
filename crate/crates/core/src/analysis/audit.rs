//! Discrete audits of the pointwise Caccioppoli inequality, the parabolic
//! Sobolev inequality and the weak form on computed fields.

use serde::Serialize;

use super::iteration::{tent_energies, IterationParams};
use super::{integrate_field, AnalysisError, Tent};
use crate::solver::{Geometry, Grid, SnapshotSeries};
use crate::structure::StructureSet;

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs` for integral inequalities; `None` for pointwise ones.
    pub ratio: Option<f64>,
    /// Smallest slack (pointwise audits, relative to the local scale).
    pub min_slack: Option<f64>,
    pub tol_disc: f64,
    /// Coordinates where the slack fell below `−tol_disc`.
    pub violations: Vec<f64>,
    pub t: Option<f64>,
}

/// `∇u·∇(θ²F(u)) ≥ ½|∇(θG(u))|² − C G²(u)|∇θ|²` at interior nodes with
/// central differences. Each node's slack is divided by the sum of the
/// magnitudes of its terms; the audit passes if every scaled slack is at
/// least `−10·dx`.
pub fn check_caccioppoli(
    grid: &Grid,
    values: &[f64],
    set: &StructureSet,
    theta: &Tent,
    c_cacc: f64,
) -> Result<InequalityReport, AnalysisError> {
    let m = grid.points;
    let dx = grid.dx;
    let th: Vec<f64> = grid.coords.iter().map(|&x| theta.value(x)).collect();
    let f: Vec<f64> = values.iter().map(|&u| set.f(u)).collect::<Result<_, _>>()?;
    let g: Vec<f64> = values.iter().map(|&u| set.g(u)).collect::<Result<_, _>>()?;
    let tol_disc = 10.0 * dx;
    let mut min_slack = f64::INFINITY;
    let mut violations = Vec::new();
    let (mut lhs_sum, mut rhs_sum) = (0.0, 0.0);
    for i in 1..m - 1 {
        let d = |v: &dyn Fn(usize) -> f64| (v(i + 1) - v(i - 1)) / (2.0 * dx);
        let du = d(&|k| values[k]);
        let d_tf = d(&|k| th[k] * th[k] * f[k]);
        let d_tg = d(&|k| th[k] * g[k]);
        let d_th = d(&|k| th[k]);
        let lhs = du * d_tf;
        let half_grad = 0.5 * d_tg * d_tg;
        let cut = c_cacc * g[i] * g[i] * d_th * d_th;
        let rhs = half_grad - cut;
        let scale = lhs.abs() + half_grad + cut;
        lhs_sum += lhs;
        rhs_sum += rhs;
        if scale == 0.0 {
            continue;
        }
        let slack = (lhs - rhs) / scale;
        min_slack = min_slack.min(slack);
        if slack < -tol_disc {
            violations.push(grid.coords[i]);
        }
    }
    Ok(InequalityReport {
        name: "caccioppoli".into(),
        passed: violations.is_empty(),
        lhs: lhs_sum,
        rhs: rhs_sum,
        ratio: None,
        min_slack: Some(if min_slack.is_finite() { min_slack } else { 0.0 }),
        tol_disc,
        violations,
        t: None,
    })
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

fn snapshot_index(series: &SnapshotSeries, t: f64) -> Result<usize, AnalysisError> {
    series
        .snapshots
        .iter()
        .position(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1e-300))
        .ok_or_else(|| AnalysisError::Precondition(format!("t = {t} is not a snapshot time")))
}

/// `∫₀ᵗ∫_K G²(u) ≤ S^{k(1+j)} t^{1−(1+j)k} [sup_τ ∫θ²H(u) + ∫₀ᵗ∫|∇(θG(u))|²]^{1+jk}`
/// with `K` the ball of radius `k_radius ≤ θ`'s plateau; time integrals by
/// the trapezoid rule over the snapshots up to `t`.
pub fn check_parabolic_sobolev(
    series: &SnapshotSeries,
    set: &StructureSet,
    params: &IterationParams,
    theta: &Tent,
    k_radius: f64,
    t: f64,
) -> Result<InequalityReport, AnalysisError> {
    match series.grid.geometry {
        Geometry::Radial { dim, .. } if dim == params.n_dim && dim >= 3 => {}
        _ => {
            return Err(AnalysisError::Precondition(format!(
                "parabolic Sobolev audit needs a radial series with N = {} ≥ 3",
                params.n_dim
            )))
        }
    }
    if !(k_radius >= 0.0 && k_radius <= theta.inner) {
        return Err(AnalysisError::Precondition(format!(
            "K (radius {k_radius}) must lie inside {{θ = 1}} (radius {})",
            theta.inner
        )));
    }
    let upto = snapshot_index(series, t)?;
    let snaps = &series.snapshots[..=upto];
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let mut g2 = Vec::with_capacity(snaps.len());
    let mut h = Vec::with_capacity(snaps.len());
    let mut grad = Vec::with_capacity(snaps.len());
    for snap in snaps {
        g2.push(integrate_field(&series.grid, &snap.values, &[], k_radius, |_, u, _| {
            Ok(set.g(u)?.powi(2))
        })?);
        let (hv, gv) = tent_energies(series, &snap.values, set, theta)?;
        h.push(hv);
        grad.push(gv);
    }
    let lhs = trapezoid(&times, &g2);
    let (j, k) = (params.j, params.k);
    let bracket = h.iter().cloned().fold(0.0, f64::max) + trapezoid(&times, &grad);
    let rhs = params.sobolev.powf(k * (1.0 + j)) * t.powf(1.0 - (1.0 + j) * k) * bracket.powf(1.0 + j * k);
    let ratio = if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    let tol_disc = 10.0 * series.grid.dx;
    Ok(InequalityReport {
        name: "parabolic_sobolev".into(),
        passed: ratio <= 1.0 + tol_disc,
        lhs,
        rhs,
        ratio: Some(ratio),
        min_slack: None,
        tol_disc,
        violations: Vec::new(),
        t: Some(t),
    })
}

/// Trapezoidal time cutoff `ζ`: 0 before `t1`, ramps to 1 on `[t1, t2]`,
/// stays 1 until `t3`, ramps to 0 on `[t3, t4]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TimeWindow {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl TimeWindow {
    fn zeta(&self, t: f64) -> f64 {
        if t <= self.t1 || t >= self.t4 {
            0.0
        } else if t < self.t2 {
            (t - self.t1) / (self.t2 - self.t1)
        } else if t <= self.t3 {
            1.0
        } else {
            (self.t4 - t) / (self.t4 - self.t3)
        }
    }
}

/// Both sides of `∫∫ ∇u·∇(F(u)φ) = ∫∫ φ_t H(u)` for `φ = θ²(x)ζ(t)`. The
/// window corners must be snapshot times so that the piecewise-constant
/// `ζ′` is integrated exactly against the trapezoid rule. `ratio` holds the
/// relative residual `|lhs − rhs|/max(|lhs|, |rhs|)`.
pub fn weak_form_residual(
    series: &SnapshotSeries,
    set: &StructureSet,
    theta: &Tent,
    window: TimeWindow,
) -> Result<InequalityReport, AnalysisError> {
    let w = window;
    if !(w.t1 < w.t2 && w.t2 <= w.t3 && w.t3 < w.t4) {
        return Err(AnalysisError::Precondition("time window must satisfy t1 < t2 ≤ t3 < t4".into()));
    }
    let idx: Vec<usize> = [w.t1, w.t2, w.t3, w.t4]
        .iter()
        .map(|&t| snapshot_index(series, t))
        .collect::<Result<_, _>>()?;
    let kinks = [theta.inner, theta.outer];
    let grid = &series.grid;
    let mut lhs_t = Vec::new();
    let mut h_t = Vec::new();
    let mut times = Vec::new();
    for snap in &series.snapshots[idx[0]..=idx[3]] {
        let lhs = integrate_field(grid, &snap.values, &kinks, theta.outer, |rho, u, du| {
            let th = theta.value(rho);
            Ok(set.f_prime(u)? * th * th * du * du + 2.0 * th * theta.slope(rho) * set.f(u)? * du)
        })?;
        let h = integrate_field(grid, &snap.values, &kinks, theta.outer, |rho, u, _| {
            Ok(theta.value(rho).powi(2) * set.h_cap(u)?)
        })?;
        lhs_t.push(lhs * w.zeta(snap.t));
        h_t.push(h);
        times.push(snap.t);
    }
    let lhs = trapezoid(&times, &lhs_t);
    let off = idx[0];
    let ramp = |a: usize, b: usize| trapezoid(&times[a - off..=b - off], &h_t[a - off..=b - off]);
    let rhs = ramp(idx[0], idx[1]) / (w.t2 - w.t1) - ramp(idx[2], idx[3]) / (w.t4 - w.t3);
    let scale = lhs.abs().max(rhs.abs());
    let residual = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
    let tol_disc = 10.0 * grid.dx;
    Ok(InequalityReport {
        name: "weak_form".into(),
        passed: residual <= tol_disc,
        lhs,
        rhs,
        ratio: Some(residual),
        min_slack: None,
        tol_disc,
        violations: Vec::new(),
        t: Some(w.t4),
    })
}
