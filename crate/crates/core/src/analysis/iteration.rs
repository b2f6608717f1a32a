//! The Ladyzhenskaya–Ural'tseva recursion bound and the shrinking-ball
//! energy iteration.

use serde::Serialize;

use super::{integrate_field, AnalysisError, Tent, ZERO_FLOOR};
use crate::solver::{Geometry, SnapshotSeries};
use crate::structure::StructureSet;

/// `ln` of `c^{((1+δ)ⁿ−1)/δ} · b^{((1+δ)ⁿ−1)/δ² − n/δ} · y0^{(1+δ)ⁿ}`.
pub fn lady_log_bound(c: f64, b: f64, delta: f64, ln_y0: f64, n: u32) -> f64 {
    if n == 0 {
        return ln_y0;
    }
    let grow = (n as f64 * delta.ln_1p()).exp_m1(); // (1+δ)ⁿ − 1
    grow / delta * c.ln() + (grow / (delta * delta) - n as f64 / delta) * b.ln() + (grow + 1.0) * ln_y0
}

/// Bound on `y_n` for `y_{k+1} ≤ c bᵏ y_k^{1+δ}`, evaluated in log space;
/// `+∞` when even that overflows the double range.
pub fn lady_bound(c: f64, b: f64, delta: f64, y0: f64, n: u32) -> f64 {
    if n == 0 {
        return y0;
    }
    if y0 == 0.0 {
        return 0.0;
    }
    let ln = lady_log_bound(c, b, delta, y0.ln(), n);
    if ln.is_nan() || ln > f64::MAX.ln() {
        f64::INFINITY
    } else {
        ln.exp()
    }
}

/// `θ_L = c^{−1/δ} b^{−1/δ²}`.
pub fn lady_threshold(c: f64, b: f64, delta: f64) -> f64 {
    (-c.ln() / delta - b.ln() / (delta * delta)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationParams {
    #[serde(rename = "N")]
    pub n_dim: u32,
    pub j: f64,
    pub k: f64,
    pub lambda_cap: f64,
    pub lambda_small: f64,
    pub beta_time: f64,
    pub b: f64,
    pub eps_target: f64,
    /// Radius of the ball `B`.
    pub ball_radius: f64,
    /// `K` with `‖∇θ_n‖∞² ≤ K b^{2(n+1)}`.
    #[serde(rename = "K")]
    pub k_cut: f64,
    #[serde(rename = "S")]
    pub sobolev: f64,
    #[serde(rename = "C")]
    pub c_cacc: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// Fills the exponents `j, k, λ, β` and constants `b, K, D`.
pub fn make_iteration_params(
    n_dim: u32,
    lambda_cap: f64,
    eps_target: f64,
    c_cacc: f64,
    sobolev: f64,
    ball_radius: f64,
) -> Result<IterationParams, AnalysisError> {
    if n_dim < 3 {
        return Err(AnalysisError::Precondition(format!("N must be ≥ 3 (got {n_dim})")));
    }
    if !(lambda_cap > 0.0) {
        return Err(AnalysisError::Precondition(format!("Λ must be > 0 (got {lambda_cap})")));
    }
    if !(eps_target > 0.0 && eps_target < 1.0) {
        return Err(AnalysisError::Precondition(format!("ε must lie in (0, 1) (got {eps_target})")));
    }
    if !(c_cacc >= 1.0) {
        return Err(AnalysisError::Precondition(format!("C must be ≥ 1 (got {c_cacc})")));
    }
    if !(sobolev > 0.0 && ball_radius > 0.0) {
        return Err(AnalysisError::Precondition("S and the ball radius must be > 0".into()));
    }
    let j = 2.0 / (n_dim as f64 - 2.0);
    let k = lambda_cap / (lambda_cap + j + j * lambda_cap);
    let gap = 1.0 - (1.0 + j) * k;
    if !(gap > 0.0) {
        return Err(AnalysisError::InconsistentExponents(format!("1 − (1+j)k = {gap} ≤ 0")));
    }
    let lambda_small = 2.0 / (lambda_cap + 1.0);
    let identity = (2.0 - 2.0 * (1.0 + j) * k) / (1.0 - k);
    if (identity - lambda_small).abs() > 1e-12 {
        return Err(AnalysisError::InconsistentExponents(format!(
            "λ = {lambda_small} but (2 − 2(1+j)k)/(1 − k) = {identity}"
        )));
    }
    Ok(IterationParams {
        n_dim,
        j,
        k,
        lambda_cap,
        lambda_small,
        beta_time: gap / (k * j),
        b: 1.0 + 1.0 / (1.0 - eps_target),
        eps_target,
        ball_radius,
        k_cut: ball_radius.powi(-2),
        sobolev,
        c_cacc,
        d: c_cacc * sobolev.powf(k * (1.0 + j)),
    })
}

impl IterationParams {
    /// `ε_n = (b − 2 + b^{−n})/(b − 1)`.
    pub fn eps_n(&self, n: u32) -> f64 {
        (self.b - 2.0 + self.b.powi(-(n as i32))) / (self.b - 1.0)
    }

    /// Cutoff `θ_n`: 1 on `ε_{n+1}B`, 0 outside `ε_n B`.
    pub fn tent(&self, n: u32) -> Tent {
        Tent {
            inner: self.eps_n(n + 1) * self.ball_radius,
            outer: self.eps_n(n) * self.ball_radius,
        }
    }

    /// `DKb⁴`.
    pub fn recursion_constant(&self) -> f64 {
        self.d * self.k_cut * self.b.powi(4)
    }

    /// `(DKb⁴)^{−1/(kj)} b^{−2/(kj)²}`.
    pub fn threshold(&self) -> f64 {
        lady_threshold(self.recursion_constant(), self.b * self.b, self.k * self.j)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    pub params: IterationParams,
    pub eps_n: Vec<f64>,
    pub s: f64,
    /// `Y_n[s]` for `n = 0..=n_max`.
    pub y: Vec<f64>,
    /// `Y_{n+1}/(DKb⁴ b^{2n} Y_n^{1+kj})`; `None` where `Y_n = 0`.
    pub ratios: Vec<Option<f64>>,
    pub threshold: f64,
    pub threshold_met: bool,
    /// `Y_{n+1} ≤ Y_n` for all `n`, strictly wherever `Y_n > 0`.
    pub y_decreasing: bool,
    /// `(τ, ∫_{εB} H(u(τ)))` for every snapshot.
    pub inner_h: Vec<(f64, f64)>,
    /// `sup_{τ ≤ s} ∫_{εB} H(u(τ))`.
    pub sup_inner_h: f64,
    pub vanishes: bool,
    pub zero_floor: f64,
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `(∫θ²H(u), ∫|∇(θG(u))|²)` for one field, restricted to `supp θ`.
pub(crate) fn tent_energies(
    series: &SnapshotSeries,
    values: &[f64],
    set: &StructureSet,
    tent: &Tent,
) -> Result<(f64, f64), AnalysisError> {
    let kinks = tent.kinks();
    let grid = &series.grid;
    let h_part = integrate_field(grid, values, &kinks, tent.outer, |rho, u, _| {
        let th = tent.value(rho);
        Ok(th * th * set.h_cap(u)?)
    })?;
    let g_part = integrate_field(grid, values, &kinks, tent.outer, |rho, u, du| {
        let th = tent.value(rho);
        let d = tent.slope(rho) * set.g(u)? + th * set.g_prime(u)? * du;
        Ok(d * d)
    })?;
    Ok((h_part, g_part))
}

/// Runs the shrinking-ball iteration on a radial series whose initial data
/// vanish on `B`. With `s = None` the largest snapshot time meeting the
/// threshold is used (the first positive one if none does).
pub fn energy_iteration(
    series: &SnapshotSeries,
    set: &StructureSet,
    params: &IterationParams,
    s: Option<f64>,
    n_max: u32,
) -> Result<EnergyTrace, AnalysisError> {
    let grid = &series.grid;
    match grid.geometry {
        Geometry::Radial { dim, .. } if dim == params.n_dim => {}
        _ => {
            return Err(AnalysisError::Precondition(format!(
                "energy iteration needs a radial series with N = {}",
                params.n_dim
            )))
        }
    }
    let radius_b = params.ball_radius;
    if let Some(i) = (0..grid.points)
        .find(|&i| grid.coords[i] <= radius_b * (1.0 + 1e-12) && series.snapshots[0].values[i] > ZERO_FLOOR)
    {
        return Err(AnalysisError::Precondition(format!(
            "initial data do not vanish on B: u(r = {}) = {:e}",
            grid.coords[i], series.snapshots[0].values[i]
        )));
    }
    if series.snapshots.len() < 2 {
        return Err(AnalysisError::Precondition("need at least two snapshots".into()));
    }
    let times = series.times();
    let levels = n_max as usize + 1;
    let mut a = vec![vec![0.0; times.len()]; levels];
    let mut e = vec![vec![0.0; times.len()]; levels];
    for n in 0..levels {
        let tent = params.tent(n as u32);
        for (k, snap) in series.snapshots.iter().enumerate() {
            let (h, g) = tent_energies(series, &snap.values, set, &tent)?;
            a[n][k] = h;
            e[n][k] = g;
        }
    }
    let y_at = |n: usize, upto: usize| -> f64 {
        let s = times[upto];
        let sup = a[n][..=upto].iter().cloned().fold(0.0, f64::max);
        s.powf(params.beta_time) * (sup + trapezoid(&times[..=upto], &e[n][..=upto]))
    };
    let threshold = params.threshold();
    let upto = match s {
        Some(s) => times
            .iter()
            .position(|&t| (t - s).abs() <= 1e-9 * s.max(1e-300))
            .ok_or_else(|| AnalysisError::Precondition(format!("s = {s} is not a snapshot time")))?,
        None => (1..times.len()).rev().find(|&k| y_at(0, k) <= threshold).unwrap_or(1),
    };
    let y: Vec<f64> = (0..levels).map(|n| y_at(n, upto)).collect();
    let kc = params.recursion_constant();
    let delta = params.k * params.j;
    let ratios = (0..levels - 1)
        .map(|n| {
            (y[n] > 0.0).then(|| y[n + 1] / (kc * (params.b * params.b).powi(n as i32) * y[n].powf(1.0 + delta)))
        })
        .collect();
    let y_decreasing = y
        .windows(2)
        .all(|w| if w[0] > 0.0 { w[1] < w[0] } else { w[1] <= w[0] });

    let eps_ball = Tent {
        inner: params.eps_target * radius_b,
        outer: params.eps_target * radius_b * (1.0 + 1e-15),
    };
    let inner_h = series
        .snapshots
        .iter()
        .map(|snap| {
            let v = integrate_field(grid, &snap.values, &[], eps_ball.inner, |_, u, _| Ok(set.h_cap(u)?))?;
            Ok((snap.t, v))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let sup_inner_h = inner_h[..=upto].iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(EnergyTrace {
        params: *params,
        eps_n: (0..=levels as u32).map(|n| params.eps_n(n)).collect(),
        s: times[upto],
        threshold_met: y[0] <= threshold,
        y,
        ratios,
        threshold,
        y_decreasing,
        inner_h,
        sup_inner_h,
        vanishes: sup_inner_h <= ZERO_FLOOR,
        zero_floor: ZERO_FLOOR,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lady_examples() {
        assert_eq!(lady_bound(2.0, 3.0, 0.5, 0.7, 0), 0.7);
        let th = lady_threshold(1.0, 4.0, 0.5);
        assert!((th - 0.00390625).abs() < 1e-17);
        let y1 = lady_bound(1.0, 4.0, 0.5, th, 1);
        assert!((y1 - 1.0 / 4096.0).abs() < 1e-18);
        assert!((lady_threshold(1.0, 1.0 + 1e-12, 0.5) - 1.0).abs() < 1e-9);
        assert_eq!(lady_bound(1e300, 10.0, 1.0, 1e300, 20), f64::INFINITY);
    }

    #[test]
    fn lady_matches_direct_recursion() {
        let (c, b, d): (f64, f64, f64) = (1.3, 2.5, 0.07);
        let y0 = 0.5 * lady_threshold(c, b, d);
        let mut y: f64 = y0;
        for k in 0..30 {
            y = c * b.powi(k) * y.powf(1.0 + d);
        }
        let bound = lady_bound(c, b, d, y0, 30);
        assert!(((bound - y) / y).abs() < 1e-9, "{bound} vs {y}");
    }

    #[test]
    fn params_examples() {
        let p = make_iteration_params(3, 1.0, 2.0 / 3.0, 1.0, 0.2, 1.0).unwrap();
        assert_eq!((p.j, p.k, p.lambda_small), (2.0, 0.2, 1.0));
        assert!((p.beta_time - 1.0).abs() < 1e-15);
        assert!((p.b - 4.0).abs() < 1e-14);
        assert_eq!(p.eps_n(0), 1.0);
        assert!((p.eps_n(1) - 0.75).abs() < 1e-15);
        assert!((p.eps_n(2) - 0.6875).abs() < 1e-15);
        let p4 = make_iteration_params(4, 1.0, 0.5, 1.0, 0.2, 1.0).unwrap();
        assert_eq!(p4.j, 1.0);
        assert!((p4.k - 1.0 / 3.0).abs() < 1e-15);
        assert!(make_iteration_params(2, 1.0, 0.5, 1.0, 0.2, 1.0).is_err());
        assert!(make_iteration_params(3, 1.0, 1.5, 1.0, 0.2, 1.0).is_err());
    }

    #[test]
    fn eps_sequence_steps() {
        let p = make_iteration_params(3, 1.0, 2.0 / 3.0, 1.0, 0.2, 1.0).unwrap();
        for n in 0..20 {
            let step = p.eps_n(n) - p.eps_n(n + 1);
            assert!((step - p.b.powi(-(n as i32 + 1))).abs() < 1e-15);
            assert!(p.eps_n(n + 1) < p.eps_n(n));
        }
        let tent = p.tent(2);
        assert!((tent.gradient_sq_max() - p.k_cut * p.b.powi(6)).abs() < 1e-9 * tent.gradient_sq_max());
    }

    #[test]
    fn threshold_is_lady_threshold_of_the_recursion() {
        let p = make_iteration_params(3, 1.0, 2.0 / 3.0, 1.0, 0.2, 1.0).unwrap();
        let kj = p.k * p.j;
        let direct = p.recursion_constant().powf(-1.0 / kj) * p.b.powf(-2.0 / (kj * kj));
        assert!((p.threshold() / direct - 1.0).abs() < 1e-12);
    }
}
