//! Explicit time stepping of `u_t = a(u) Δu` on an interval or a radially
//! symmetric ball.
//!
//! The update `u_i + dt·a(u_i)·Σ c_k (u_k − u_i)` is a convex combination of
//! `u_i` and its neighbours whenever `dt·a(u_i)·Σ c_k ≤ 1`, which
//! [`stable_dt`] guarantees. Cells with `a(u_i) = 0` do not move.

use std::path::PathBuf;

use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laws::DiffusionLaw;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("initial profile: {0}")]
    Initial(String),
    #[error("stability violation at cell {cell}, t = {t}: value {value}")]
    Stability { cell: usize, t: f64, value: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t} before t_end")]
    BudgetExceeded {
        max_steps: usize,
        t: f64,
        partial: Box<SnapshotSeries>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// `[−L, L]`.
    Interval { half_width: f64 },
    /// Radially symmetric ball of radius `R` in dimension `N`.
    Radial { radius: f64, dim: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub geometry: Geometry,
    pub points: usize,
    pub dx: f64,
    /// `x_i` on the interval, `r_i` for radial grids (starting at 0).
    pub coords: Vec<f64>,
}

impl Grid {
    pub fn interval(half_width: f64, points: usize) -> Result<Self, SolverError> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(SolverError::Grid(format!("L must be > 0 (got {half_width})")));
        }
        if points < 16 {
            return Err(SolverError::Grid(format!("need at least 16 points (got {points})")));
        }
        let dx = 2.0 * half_width / (points - 1) as f64;
        let coords = (0..points).map(|i| -half_width + dx * i as f64).collect();
        Ok(Self {
            geometry: Geometry::Interval { half_width },
            points,
            dx,
            coords,
        })
    }

    pub fn radial(radius: f64, dim: u32, points: usize) -> Result<Self, SolverError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SolverError::Grid(format!("R must be > 0 (got {radius})")));
        }
        if dim < 1 {
            return Err(SolverError::Grid("N must be ≥ 1".into()));
        }
        if points < 16 {
            return Err(SolverError::Grid(format!("need at least 16 points (got {points})")));
        }
        let dx = radius / (points - 1) as f64;
        let coords = (0..points).map(|i| dx * i as f64).collect();
        Ok(Self {
            geometry: Geometry::Radial { radius, dim },
            points,
            dx,
            coords,
        })
    }

    /// `1` on the interval, `N` on radial grids.
    pub fn d_eff(&self) -> f64 {
        match self.geometry {
            Geometry::Interval { .. } => 1.0,
            Geometry::Radial { dim, .. } => dim as f64,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.geometry, Geometry::Radial { .. })
    }

    /// Spatial dimension: 1 for the interval.
    pub fn dim(&self) -> u32 {
        match self.geometry {
            Geometry::Interval { .. } => 1,
            Geometry::Radial { dim, .. } => dim,
        }
    }

    /// `|x_i|` or `r_i`.
    pub fn radius_of(&self, i: usize) -> f64 {
        self.coords[i].abs()
    }

    /// Index of the node nearest to `x`, if `x` lies on the grid.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let lo = self.coords[0];
        let hi = *self.coords.last().unwrap();
        if !(x >= lo - 1e-12 && x <= hi + 1e-12) {
            return None;
        }
        Some((((x - lo) / self.dx).round() as usize).min(self.points - 1))
    }

    /// Stencil weights `(c_left, c_right)` with
    /// `Lap_i = c_left (u_{i−1} − u_i) + c_right (u_{i+1} − u_i)` for a
    /// Neumann closure. Radial rows use the finite-volume form, which keeps
    /// both weights non-negative in every dimension; at `r = 0` it reduces to
    /// `2N (u_1 − u_0)/dr²`.
    pub fn stencil(&self) -> Vec<(f64, f64)> {
        let m = self.points;
        let h2 = self.dx * self.dx;
        match self.geometry {
            Geometry::Interval { .. } => (0..m)
                .map(|i| {
                    if i == 0 {
                        (0.0, 2.0 / h2)
                    } else if i == m - 1 {
                        (2.0 / h2, 0.0)
                    } else {
                        (1.0 / h2, 1.0 / h2)
                    }
                })
                .collect(),
            Geometry::Radial { dim, radius } => {
                let n = dim as i32;
                let nf = dim as f64;
                let dr = self.dx;
                (0..m)
                    .map(|i| {
                        let r = self.coords[i];
                        let r_minus = (r - 0.5 * dr).max(0.0);
                        let r_plus = if i == m - 1 { radius } else { r + 0.5 * dr };
                        let vol = r_plus.powi(n) - r_minus.powi(n);
                        let left = if i == 0 { 0.0 } else { nf * r_minus.powi(n - 1) / (dr * vol) };
                        let right = if i == m - 1 { 0.0 } else { nf * r_plus.powi(n - 1) / (dr * vol) };
                        (left, right)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "neumann" => Ok(Self::Neumann),
            "dirichlet" => Ok(Self::Dirichlet),
            other => Err(format!("unknown boundary '{other}' (expected neumann or dirichlet)")),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Neumann => "neumann",
            Self::Dirichlet => "dirichlet",
        })
    }
}

/// Initial data, in the text form `bump[:w]`, `gaussian:t0`, `ring:r0,w`,
/// `const:v`, `random:seed` or `file:path`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    /// `max(0, 1 − (|x|/w)²)`.
    Bump { width: f64 },
    /// Heat kernel `(2π t0)^(−N/2) exp(−|x|²/(2 t0))`.
    Gaussian { t0: f64 },
    /// `max(0, 1 − ((|x| − r0)/w)²)`.
    Ring { r0: f64, width: f64 },
    Constant { value: f64 },
    /// Seeded smooth random profile, see [`random_profile`].
    Random { seed: u64 },
    /// One value per grid point, separated by commas or whitespace.
    File { path: PathBuf },
    Values { values: Vec<f64> },
}

fn parse_positive(key: &str, text: &str) -> Result<f64, String> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| format!("{key}: '{text}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{key} must be > 0 (got {v})"))
    }
}

impl std::str::FromStr for InitialProfile {
    type Err = String;
    fn from_str(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (text, None),
        };
        match (kind, arg) {
            ("bump", None) => Ok(Self::Bump { width: 1.0 }),
            ("bump", Some(a)) => Ok(Self::Bump {
                width: parse_positive("bump width", a)?,
            }),
            ("gaussian", Some(a)) => Ok(Self::Gaussian {
                t0: parse_positive("gaussian t0", a)?,
            }),
            ("ring", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 2 {
                    return Err(format!("ring expects 'ring:r0,w' (got '{text}')"));
                }
                Ok(Self::Ring {
                    r0: parse_positive("ring r0", parts[0])?,
                    width: parse_positive("ring w", parts[1])?,
                })
            }
            ("const", Some(a)) => {
                let v: f64 = a.parse().map_err(|_| format!("const: '{a}' is not a number"))?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(format!("const value must be ≥ 0 (got {v})"));
                }
                Ok(Self::Constant { value: v })
            }
            ("random", Some(a)) => Ok(Self::Random {
                seed: a.parse().map_err(|_| format!("random: '{a}' is not a seed"))?,
            }),
            ("file", Some(a)) if !a.is_empty() => Ok(Self::File { path: PathBuf::from(a) }),
            _ => Err(format!(
                "unknown initial profile '{text}' (expected bump[:w], gaussian:t0, ring:r0,w, const:v, random:seed, file:path)"
            )),
        }
    }
}

impl std::fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Bump { width } if *width == 1.0 => write!(f, "bump"),
            Self::Bump { width } => write!(f, "bump:{width}"),
            Self::Gaussian { t0 } => write!(f, "gaussian:{t0}"),
            Self::Ring { r0, width } => write!(f, "ring:{r0},{width}"),
            Self::Constant { value } => write!(f, "const:{value}"),
            Self::Random { seed } => write!(f, "random:{seed}"),
            Self::File { path } => write!(f, "file:{}", path.display()),
            Self::Values { values } => write!(f, "values[{}]", values.len()),
        }
    }
}

impl InitialProfile {
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>, SolverError> {
        let dim = grid.dim() as f64;
        let values: Vec<f64> = match self {
            Self::Bump { width } => grid
                .coords
                .iter()
                .map(|x| (1.0 - (x / width).powi(2)).max(0.0))
                .collect(),
            Self::Gaussian { t0 } => grid
                .coords
                .iter()
                .map(|x| (2.0 * std::f64::consts::PI * t0).powf(-0.5 * dim) * (-x * x / (2.0 * t0)).exp())
                .collect(),
            Self::Ring { r0, width } => grid
                .coords
                .iter()
                .map(|x| (1.0 - ((x.abs() - r0) / width).powi(2)).max(0.0))
                .collect(),
            Self::Constant { value } => vec![*value; grid.points],
            Self::Random { seed } => random_profile(grid, *seed),
            Self::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| SolverError::Initial(format!("{}: {e}", path.display())))?;
                text.split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| SolverError::Initial(format!("{}: '{t}' is not a number", path.display())))
                    })
                    .collect::<Result<_, _>>()?
            }
            Self::Values { values } => values.clone(),
        };
        if values.len() != grid.points {
            return Err(SolverError::Initial(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.points
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(SolverError::Initial(format!("value {v} at point {i} is not finite and ≥ 0")));
        }
        Ok(values)
    }
}

/// `max(0, c0 + Σ_{m=1}^{4} a_m cos(mπ ξ) + h·bump)` with `ξ ∈ [0, 1]` the
/// normalised coordinate and coefficients drawn from a ChaCha8 stream.
pub fn random_profile(grid: &Grid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0: f64 = rng.gen_range(-0.1..0.3);
    let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect();
    let height: f64 = rng.gen_range(0.0..0.8);
    let center: f64 = rng.gen_range(0.2..0.8);
    let width: f64 = rng.gen_range(0.05..0.3);
    let lo = grid.coords[0];
    let span = grid.coords[grid.points - 1] - lo;
    grid.coords
        .iter()
        .map(|&x| {
            let xi = (x - lo) / span;
            let modes: f64 = amps
                .iter()
                .enumerate()
                .map(|(m, a)| a * ((m as f64 + 1.0) * std::f64::consts::PI * xi).cos())
                .sum();
            let bump = (1.0 - ((xi - center) / width).powi(2)).max(0.0);
            (c0 + modes + height * bump).max(0.0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub law: DiffusionLaw,
    pub grid: Grid,
    pub cfl: f64,
    pub t_end: f64,
    /// Time between recorded snapshots.
    pub snapshot_every: f64,
    pub boundary: Boundary,
    pub initial: InitialProfile,
    pub max_steps: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(SolverError::Config(format!("cfl must lie in (0, 0.9] (got {})", self.cfl)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::Config(format!("t_end must be > 0 (got {})", self.t_end)));
        }
        if !(self.snapshot_every > 0.0 && self.snapshot_every.is_finite()) {
            return Err(SolverError::Config(format!(
                "snapshot_every must be > 0 (got {})",
                self.snapshot_every
            )));
        }
        if self.max_steps == 0 {
            return Err(SolverError::Config("max_steps must be > 0".into()));
        }
        Ok(())
    }
}

fn a_values(values: &[f64], law: &DiffusionLaw) -> Vec<f64> {
    values.par_iter().with_min_len(512).map(|&u| law.a(u)).collect()
}

/// `θ dx² / (2 d_eff max_i a(u_i))`; `fallback` (the snapshot stride) when
/// every cell sits at `a = 0`.
pub fn stable_dt(values: &[f64], law: &DiffusionLaw, grid: &Grid, cfl: f64, fallback: f64) -> f64 {
    let max_a = a_values(values, law).into_iter().fold(0.0, f64::max);
    stable_dt_from_max(max_a, grid, cfl, fallback)
}

fn stable_dt_from_max(max_a: f64, grid: &Grid, cfl: f64, fallback: f64) -> f64 {
    if max_a <= 0.0 {
        fallback
    } else {
        cfl * grid.dx * grid.dx / (2.0 * grid.d_eff() * max_a)
    }
}

fn apply_step(
    values: &[f64],
    a: &[f64],
    stencil: &[(f64, f64)],
    dt: f64,
    t: f64,
) -> Result<Vec<f64>, SolverError> {
    let m = values.len();
    let out: Vec<f64> = (0..m)
        .into_par_iter()
        .with_min_len(512)
        .map(|i| {
            let u = values[i];
            let (cl, cr) = stencil[i];
            let left = if i > 0 { values[i - 1] } else { u };
            let right = if i + 1 < m { values[i + 1] } else { u };
            let lap = cl * (left - u) + cr * (right - u);
            let raw = u + dt * a[i] * lap;
            // The exact update is a convex combination; clamp away round-off.
            let lo = u.min(if cl > 0.0 { left } else { u }).min(if cr > 0.0 { right } else { u });
            let hi = u.max(if cl > 0.0 { left } else { u }).max(if cr > 0.0 { right } else { u });
            raw.clamp(lo, hi)
        })
        .collect();
    if let Some((cell, value)) = out.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(SolverError::Stability {
            cell,
            t,
            value: *value,
        });
    }
    Ok(out)
}

/// One explicit step. `dt` must not exceed [`stable_dt`].
pub fn step_explicit(field: &Field, law: &DiffusionLaw, grid: &Grid, boundary: Boundary, dt: f64) -> Result<Field, SolverError> {
    let a = a_values(&field.values, law);
    let mut values = apply_step(&field.values, &a, &grid.stencil(), dt, field.t)?;
    enforce_boundary(&mut values, grid, boundary);
    Ok(Field { t: field.t + dt, values })
}

fn enforce_boundary(values: &mut [f64], grid: &Grid, boundary: Boundary) {
    if boundary == Boundary::Dirichlet {
        let m = values.len();
        values[m - 1] = 0.0;
        if !grid.is_radial() {
            values[0] = 0.0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotSeries {
    pub grid: Grid,
    pub law_spec: String,
    pub boundary: Boundary,
    pub snapshots: Vec<Field>,
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Per-step minimum and maximum, starting with the initial data.
    pub min_trace: Vec<f64>,
    pub max_trace: Vec<f64>,
    /// First time a boundary cell exceeded `1e−12` when it started below.
    pub boundary_activation: Option<f64>,
}

impl SnapshotSeries {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Largest step actually taken; a practical resolution floor for times
    /// read off the series.
    pub fn dt_floor(&self) -> f64 {
        self.dt_max
    }

    pub fn initial(&self) -> &Field {
        &self.snapshots[0]
    }
}

const BOUNDARY_LEVEL: f64 = 1e-12;

fn boundary_cells(grid: &Grid) -> Vec<usize> {
    if grid.is_radial() {
        vec![grid.points - 1]
    } else {
        vec![0, grid.points - 1]
    }
}

/// Integrates to `t_end`, recording snapshots every `snapshot_every` and
/// the per-step extrema.
pub fn run(config: &SimConfig) -> Result<SnapshotSeries, SolverError> {
    config.validate()?;
    let grid = &config.grid;
    let mut values = config.initial.sample(grid)?;
    enforce_boundary(&mut values, grid, config.boundary);
    let stencil = grid.stencil();
    let edges = boundary_cells(grid);
    let armed: Vec<bool> = edges.iter().map(|&i| values[i] <= BOUNDARY_LEVEL).collect();

    let extrema = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let (lo, hi) = extrema(&values);
    let mut series = SnapshotSeries {
        grid: grid.clone(),
        law_spec: config.law.spec().to_string(),
        boundary: config.boundary,
        snapshots: vec![Field { t: 0.0, values: values.clone() }],
        steps: 0,
        dt_min: f64::INFINITY,
        dt_max: 0.0,
        min_trace: vec![lo],
        max_trace: vec![hi],
        boundary_activation: None,
    };
    let stride = config.snapshot_every;
    let mut t = 0.0;
    let mut next_index = 1usize;
    let eps_t = 1e-12 * stride.min(config.t_end);
    while t < config.t_end - eps_t {
        if series.steps >= config.max_steps {
            return Err(SolverError::BudgetExceeded {
                max_steps: config.max_steps,
                t,
                partial: Box::new(series),
            });
        }
        let target = (next_index as f64 * stride).min(config.t_end);
        let a = a_values(&values, &config.law);
        let max_a = a.iter().cloned().fold(0.0, f64::max);
        let dt = stable_dt_from_max(max_a, grid, config.cfl, stride).min(target - t);
        values = apply_step(&values, &a, &stencil, dt, t)?;
        enforce_boundary(&mut values, grid, config.boundary);
        series.steps += 1;
        series.dt_min = series.dt_min.min(dt);
        series.dt_max = series.dt_max.max(dt);
        t = if target - (t + dt) <= eps_t { target } else { t + dt };
        let (lo, hi) = extrema(&values);
        series.min_trace.push(lo);
        series.max_trace.push(hi);
        if series.boundary_activation.is_none()
            && edges.iter().zip(&armed).any(|(&i, &arm)| arm && values[i] > BOUNDARY_LEVEL)
        {
            series.boundary_activation = Some(t);
        }
        if t == target {
            series.snapshots.push(Field { t, values: values.clone() });
            next_index += 1;
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{make_constant, make_exp_inv, make_power};

    fn config(law: DiffusionLaw, grid: Grid, initial: InitialProfile, t_end: f64, stride: f64) -> SimConfig {
        SimConfig {
            law,
            grid,
            cfl: 0.5,
            t_end,
            snapshot_every: stride,
            boundary: Boundary::Neumann,
            initial,
            max_steps: 10_000_000,
        }
    }

    #[test]
    fn stable_dt_formula_and_scaling() {
        let law = make_constant(0.5).unwrap();
        let grid = Grid::interval(1.5, 31).unwrap();
        assert!((grid.dx - 0.1).abs() < 1e-15);
        let dt = stable_dt(&vec![0.3; 31], &law, &grid, 0.5, 1.0);
        assert!((dt - 0.005).abs() < 1e-15);
        let fine = Grid::interval(1.5, 61).unwrap();
        let dt2 = stable_dt(&vec![0.3; 61], &law, &fine, 0.5, 1.0);
        assert!((dt / dt2 - 4.0).abs() < 1e-12);
        let power = make_power(2.0).unwrap();
        assert_eq!(stable_dt(&vec![0.0; 31], &power, &grid, 0.5, 0.25), 0.25);
    }

    #[test]
    fn radial_stencil_is_nonnegative_and_bounded() {
        for dim in [1, 2, 3, 4, 10] {
            let grid = Grid::radial(2.0, dim, 41).unwrap();
            let st = grid.stencil();
            let h2 = grid.dx * grid.dx;
            assert!((st[0].1 - 2.0 * dim as f64 / h2).abs() < 1e-9 / h2);
            for (l, r) in st {
                assert!(l >= 0.0 && r >= 0.0);
                assert!((l + r) * h2 <= 2.0 * dim as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn radial_laplacian_of_quadratic() {
        // Δ r² = 2N exactly for the finite-volume form away from the boundary.
        for dim in [2u32, 3, 5] {
            let grid = Grid::radial(1.0, dim, 33).unwrap();
            let u: Vec<f64> = grid.coords.iter().map(|r| r * r).collect();
            for (i, (l, r)) in grid.stencil().into_iter().enumerate().take(31) {
                let lap = l * (if i > 0 { u[i - 1] } else { u[i] } - u[i]) + r * (u[i + 1] - u[i]);
                assert!((lap - 2.0 * dim as f64).abs() < 1e-8, "N={dim} i={i} lap={lap}");
            }
        }
    }

    #[test]
    fn constant_field_unchanged() {
        for law in [make_power(2.0).unwrap(), make_exp_inv(1.0).unwrap(), make_constant(0.5).unwrap()] {
            let grid = Grid::interval(1.0, 21).unwrap();
            let f = Field { t: 0.0, values: vec![0.3; 21] };
            let dt = stable_dt(&f.values, &law, &grid, 0.5, 1.0);
            let g = step_explicit(&f, &law, &grid, Boundary::Neumann, dt).unwrap();
            assert_eq!(g.values, f.values);
        }
    }

    #[test]
    fn void_cells_stay_frozen() {
        let law = make_power(2.0).unwrap();
        let grid = Grid::interval(3.0, 121).unwrap();
        let series = run(&config(law, grid.clone(), InitialProfile::Bump { width: 1.0 }, 0.5, 0.1)).unwrap();
        for snap in &series.snapshots {
            for (x, u) in grid.coords.iter().zip(&snap.values) {
                if x.abs() >= 1.0 - 1e-12 {
                    assert_eq!(*u, 0.0, "x = {x}, t = {}", snap.t);
                }
            }
        }
        assert!(series.boundary_activation.is_none());
    }

    #[test]
    fn zero_data_stays_zero() {
        let law = make_power(1.0).unwrap();
        let grid = Grid::radial(1.0, 3, 32).unwrap();
        let series = run(&config(law, grid, InitialProfile::Constant { value: 0.0 }, 1.0, 0.25)).unwrap();
        assert_eq!(series.snapshots.len(), 5);
        assert!(series.snapshots.iter().all(|s| s.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn snapshots_land_on_stride() {
        let law = make_constant(0.5).unwrap();
        let grid = Grid::interval(2.0, 41).unwrap();
        let series = run(&config(law, grid, InitialProfile::Bump { width: 1.0 }, 0.1, 0.03)).unwrap();
        let t = series.times();
        assert_eq!(t.len(), 5);
        for (k, tk) in t.iter().take(4).enumerate() {
            assert!((tk - 0.03 * k as f64).abs() < 1e-12);
        }
        assert!((t[4] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn heat_kernel_center_value() {
        let law = make_constant(0.5).unwrap();
        let grid = Grid::interval(6.0, 401).unwrap();
        let series = run(&config(law, grid, InitialProfile::Gaussian { t0: 0.1 }, 0.1, 0.1)).unwrap();
        let last = series.snapshots.last().unwrap();
        let exact = (2.0 * std::f64::consts::PI * 0.2).powf(-0.5);
        assert!((last.values[200] - exact).abs() < 5.0 * 0.03 * 0.03, "{}", last.values[200]);
        assert!((exact - 0.89206).abs() < 1e-5);
    }

    #[test]
    fn budget_exceeded_returns_partial() {
        let law = make_constant(0.5).unwrap();
        let grid = Grid::interval(1.0, 41).unwrap();
        let mut cfg = config(law, grid, InitialProfile::Bump { width: 0.5 }, 1.0, 0.01);
        cfg.max_steps = 10;
        match run(&cfg) {
            Err(SolverError::BudgetExceeded { partial, max_steps, .. }) => {
                assert_eq!(max_steps, 10);
                assert_eq!(partial.steps, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_text_round_trip() {
        for text in ["bump", "bump:0.5", "gaussian:0.1", "ring:2,1", "const:0.3", "random:17", "file:data/u0.csv"] {
            let p: InitialProfile = text.parse().unwrap();
            assert_eq!(p.to_string(), text);
        }
        assert!("ring:2".parse::<InitialProfile>().is_err());
        assert!("gaussian:-1".parse::<InitialProfile>().is_err());
        assert!("wave".parse::<InitialProfile>().is_err());
    }

    #[test]
    fn config_validation() {
        let law = make_constant(0.5).unwrap();
        let grid = Grid::interval(1.0, 21).unwrap();
        let mut cfg = config(law, grid, InitialProfile::Bump { width: 1.0 }, 1.0, 0.1);
        cfg.cfl = 0.95;
        assert!(matches!(cfg.validate(), Err(SolverError::Config(_))));
        assert!(Grid::interval(1.0, 15).is_err());
    }
}
