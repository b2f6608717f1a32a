//! Structure functions `I, H, h, F, G` of a diffusion law and the
//! admissibility validators built on them.
//!
//! `I(s) = ∫_s^{s_max} dv/(v a(v))` is carried in log form together with the
//! product `J(s) = a(s) I(s)`, which stays O(1) even when `a` underflows.
//! With `x = ln(v/s)`,
//!
//! ```text
//! J(s) = ∫_0^{ln(s_max/s)} exp(−[ln a(s e^x) − ln a(s)]) dx
//! ```
//!
//! and on a grid the same identity gives the backward recursion
//! `J_i = L_i + exp(−r_i) J_{i+1}` over independent cell integrals `L_i`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interp::Pchip;
use crate::laws::{DiffusionLaw, LawInfo};
use crate::quad::{self, QuadError, Tolerance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature failure at s = {s:e}: {source}")]
    Quadrature { s: f64, source: QuadError },
    #[error("inadmissible law: {0}")]
    Inadmissible(String),
    #[error("F is not increasing near s = {s:e}; Λ out of range or law violates the hypotheses")]
    NonMonotone { s: f64 },
    #[error("grid: {0}")]
    Grid(String),
}

/// `I(s)` in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogI {
    pub s: f64,
    pub ln_a: f64,
    /// `ln I(s)`; `−∞` at `s = s_max`.
    pub ln_i: f64,
    /// `a(s)·I(s)`.
    pub a_i: f64,
}

impl LogI {
    pub fn i(&self) -> f64 {
        self.ln_i.exp()
    }
}

const CELL_TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-11,
    max_intervals: 20_000,
};

/// `∫_0^{ln(hi/lo)} exp(−[ln a(lo e^x) − ln a(lo)]) dx`, graded toward `lo`
/// according to the initial decay rate `lo·a′(lo)/a(lo)`.
fn cell_integral(law: &DiffusionLaw, lo: f64, hi: f64) -> Result<f64, StructureError> {
    let width = (hi / lo).ln();
    if width <= 0.0 {
        return Ok(0.0);
    }
    let rate = lo * law.dln_a(lo);
    let levels = if rate * width > 1.0 {
        ((rate * width).log2().ceil() as u32 + 3).min(64)
    } else {
        0
    };
    quad::integrate_graded(
        |x: f64| (-law.ln_a_shift(lo, x)).exp(),
        0.0,
        width,
        levels,
        CELL_TOL,
    )
    .map(|r| r.value)
    .map_err(|source| StructureError::Quadrature { s: lo, source })
}

fn check_point(law: &DiffusionLaw, s: f64) -> Result<(), StructureError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(StructureError::Domain(format!("I(s) needs 0 < s < s_max (got s = {s})")));
    }
    if s > law.s_max() {
        return Err(StructureError::Domain(format!(
            "s = {s} exceeds s_max = {}",
            law.s_max()
        )));
    }
    Ok(())
}

/// `J(s)` for `s_max = ∞` without a closed form: integrate decade by decade
/// and stop once the tail estimate `g(X)/g′-rate` falls below `1e-12·J`.
fn infinite_range_ai(law: &DiffusionLaw, s: f64) -> Result<f64, StructureError> {
    let decade = std::f64::consts::LN_10;
    let mut total = 0.0;
    for k in 0..300 {
        let lo = s * (decade * k as f64).exp();
        let hi = lo * 10.0;
        total += (-law.ln_a_ratio(s, lo)).exp() * cell_integral(law, lo, hi)?;
        let rate = hi * law.dln_a(hi);
        let g = (-law.ln_a_ratio(s, hi)).exp();
        if rate > 0.0 {
            let tail = g / rate;
            if tail <= 1e-12 * total {
                return Ok(total + tail);
            }
        }
    }
    Err(StructureError::Quadrature {
        s,
        source: QuadError::Tail("tail of I(s) not bounded within 300 decades; condition at infinity fails".into()),
    })
}

/// `I(s)` in log form for a single point (lazy, no tabulation).
pub fn compute_log_i(law: &DiffusionLaw, s: f64) -> Result<LogI, StructureError> {
    check_point(law, s)?;
    let ln_a = law.ln_a(s);
    if s == law.s_max() {
        return Ok(LogI {
            s,
            ln_a,
            ln_i: f64::NEG_INFINITY,
            a_i: 0.0,
        });
    }
    if let Some(ln_i) = law.analytic_ln_i(s) {
        return Ok(LogI {
            s,
            ln_a,
            ln_i,
            a_i: (ln_a + ln_i).exp(),
        });
    }
    let a_i = if law.s_max().is_finite() {
        cell_integral(law, s, law.s_max())?
    } else {
        infinite_range_ai(law, s)?
    };
    Ok(LogI {
        s,
        ln_a,
        ln_i: a_i.ln() - ln_a,
        a_i,
    })
}

/// `I(s) = ∫_s^{s_max} dv/(v a(v))`. May overflow to `+∞` for laws whose
/// `I` exceeds the double range; use [`compute_log_i`] there.
pub fn compute_i(law: &DiffusionLaw, s: f64) -> Result<f64, StructureError> {
    if let Some(i) = (s > 0.0 && s < law.s_max()).then(|| law.analytic_i(s)).flatten() {
        return Ok(i);
    }
    compute_log_i(law, s).map(|v| v.i())
}

/// Tabulates `I` on an increasing grid via independent cell integrals and
/// the backward `J` recursion.
pub fn tabulate_log_i(law: &DiffusionLaw, grid: &[f64]) -> Result<Vec<LogI>, StructureError> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(StructureError::Grid("grid must be strictly increasing".into()));
        }
    }
    for &s in grid {
        check_point(law, s)?;
    }
    if law.has_analytic_i() {
        return grid.iter().map(|&s| compute_log_i(law, s)).collect();
    }
    let n = grid.len();
    let top = compute_log_i(law, grid[n - 1])?;
    let cells: Vec<(f64, f64)> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (grid[i], grid[i + 1]);
            Ok((cell_integral(law, lo, hi)?, law.ln_a_ratio(lo, hi)))
        })
        .collect::<Result<_, StructureError>>()?;
    let ln_a: Vec<f64> = grid.par_iter().map(|&s| law.ln_a(s)).collect();
    let mut a_i = vec![0.0; n];
    a_i[n - 1] = top.a_i;
    for i in (0..n - 1).rev() {
        let (cell, ratio) = cells[i];
        a_i[i] = cell + (-ratio).exp() * a_i[i + 1];
    }
    Ok((0..n)
        .map(|i| LogI {
            s: grid[i],
            ln_a: ln_a[i],
            ln_i: if a_i[i] > 0.0 { a_i[i].ln() - ln_a[i] } else { f64::NEG_INFINITY },
            a_i: a_i[i],
        })
        .collect())
}

/// Logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..=n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n {
                hi
            } else {
                (llo + (lhi - llo) * k as f64 / n as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub s_lo: f64,
    /// Upper end; `None` picks 1 for `s_max = ∞` and `0.9·s_max` otherwise.
    pub s_hi: Option<f64>,
    pub points_per_decade: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            s_lo: 1e-8,
            s_hi: None,
            points_per_decade: 40,
        }
    }
}

impl GridSpec {
    pub fn resolve_hi(&self, law: &DiffusionLaw) -> f64 {
        match self.s_hi {
            Some(h) => h,
            None if law.s_max().is_finite() => 0.9 * law.s_max(),
            None => 1.0,
        }
    }
}

/// Smallest `ln F`/`ln H` kept in a tabulation; below it values are subnormal.
const LN_UNDERFLOW: f64 = -650.0;

/// All structure functions at one concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructurePoint {
    pub s: f64,
    pub a: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "H")]
    pub h_cap: f64,
    pub h: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub f_prime: f64,
    pub g_prime: f64,
    /// `(s F)^(λ/2) / H`, identically 1.
    pub sf_pow_check: f64,
}

/// `I, H, h, F, G` for a law and a fixed `Λ`, tabulated on a log grid.
#[derive(Debug, Clone)]
pub struct StructureSet {
    law: DiffusionLaw,
    lambda_cap: f64,
    lambda_small: f64,
    grid: Vec<f64>,
    table: Vec<LogI>,
    ln_i_interp: Option<Pchip>,
    ln_f_interp: Pchip,
    g_nodes: Vec<f64>,
    tail_exponent: f64,
}

impl StructureSet {
    /// Tabulates `I`, derives `H, h, F` pointwise and integrates `√F′`
    /// cumulatively for `G`, with `F′` taken from a monotone interpolant of
    /// `ln F` against `ln s`.
    ///
    /// Grid points where `F` or `H` would be subnormal are dropped from the
    /// bottom of the grid; the effective lower end is [`Self::s_lo`].
    pub fn build(law: &DiffusionLaw, lambda_cap: f64, spec: GridSpec) -> Result<Self, StructureError> {
        if !(lambda_cap > 0.0 && lambda_cap.is_finite()) {
            return Err(StructureError::Inadmissible(format!("Λ must be positive (got {lambda_cap})")));
        }
        let s_hi = spec.resolve_hi(law);
        if !(spec.s_lo > 0.0 && s_hi > spec.s_lo) {
            return Err(StructureError::Grid(format!("need 0 < s_lo < s_hi (got {} and {s_hi})", spec.s_lo)));
        }
        if s_hi >= law.s_max() {
            return Err(StructureError::Grid(format!("s_hi = {s_hi} must be below s_max = {}", law.s_max())));
        }
        let lo = spec.s_lo.max(law.probe_floor());
        let grid = log_grid(lo, s_hi, spec.points_per_decade.max(4));
        let full = tabulate_log_i(law, &grid)?;

        let ln_lambda = lambda_cap.ln();
        let ln_h = |t: &LogI| -(ln_lambda + t.ln_i) / lambda_cap;
        let ln_f = |t: &LogI| (lambda_cap + 1.0) * ln_h(t) - t.s.ln();
        let first = full
            .iter()
            .position(|t| {
                let (h, f) = (ln_h(t), ln_f(t));
                h.is_finite() && f.is_finite() && h > LN_UNDERFLOW && f > LN_UNDERFLOW
            })
            .ok_or_else(|| StructureError::Grid("every grid point underflows".into()))?;
        let table: Vec<LogI> = full[first..].to_vec();
        if table.len() < 8 {
            return Err(StructureError::Grid(format!(
                "only {} grid points above the underflow level",
                table.len()
            )));
        }
        let grid: Vec<f64> = table.iter().map(|t| t.s).collect();
        let ln_s: Vec<f64> = grid.iter().map(|s| s.ln()).collect();
        let ln_fs: Vec<f64> = table.iter().map(ln_f).collect();
        for k in 1..ln_fs.len() {
            if !(ln_fs[k] > ln_fs[k - 1]) {
                return Err(StructureError::NonMonotone { s: grid[k] });
            }
        }
        let ln_f_interp = Pchip::new(ln_s.clone(), ln_fs.clone());
        let ln_i_interp = if law.has_analytic_i() {
            None
        } else {
            Some(Pchip::new(ln_s.clone(), table.iter().map(|t| t.ln_i).collect()))
        };

        let p0 = ln_f_interp.slopes()[0];
        if !(p0 > 0.0) {
            return Err(StructureError::NonMonotone { s: grid[0] });
        }
        let mut g_nodes = Vec::with_capacity(grid.len());
        // Below s_lo, F is continued as a power with the end slope, giving
        // G(s_lo) = 2√(p F s)/(p + 1).
        g_nodes.push(2.0 * (p0 * ln_fs[0].exp() * grid[0]).sqrt() / (p0 + 1.0));
        for k in 0..grid.len() - 1 {
            let cell = quad::gauss_legendre8(|y| root_f_prime_integrand(&ln_f_interp, y), ln_s[k], ln_s[k + 1]);
            g_nodes.push(g_nodes[k] + cell);
        }

        Ok(Self {
            law: law.clone(),
            lambda_cap,
            lambda_small: 2.0 / (lambda_cap + 1.0),
            grid,
            table,
            ln_i_interp,
            ln_f_interp,
            g_nodes,
            tail_exponent: 0.5 * (p0 + 1.0),
        })
    }

    pub fn law(&self) -> &DiffusionLaw {
        &self.law
    }

    /// `Λ`.
    pub fn lambda_cap(&self) -> f64 {
        self.lambda_cap
    }

    /// `λ = 2/(Λ+1)`.
    pub fn lambda_small(&self) -> f64 {
        self.lambda_small
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn s_lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn s_hi(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn table(&self) -> &[LogI] {
        &self.table
    }

    fn check(&self, s: f64) -> Result<(), StructureError> {
        if !(s > 0.0) || s > self.s_hi() * (1.0 + 1e-12) || !s.is_finite() {
            return Err(StructureError::Domain(format!(
                "s = {s} outside (0, {}] of this structure set",
                self.s_hi()
            )));
        }
        Ok(())
    }

    pub fn ln_i(&self, s: f64) -> Result<f64, StructureError> {
        self.check(s)?;
        Ok(match &self.ln_i_interp {
            None => self.law.analytic_ln_i(s).unwrap(),
            Some(p) => p.eval(s.ln()),
        })
    }

    fn ln_h_cap_of(&self, ln_i: f64) -> f64 {
        -(self.lambda_cap.ln() + ln_i) / self.lambda_cap
    }

    fn ln_f_at(&self, s: f64) -> Result<f64, StructureError> {
        let ln_h = self.ln_h_cap_of(self.ln_i(s)?);
        Ok((self.lambda_cap + 1.0) * ln_h - s.ln())
    }

    pub fn i(&self, s: f64) -> Result<f64, StructureError> {
        Ok(self.ln_i(s)?.exp())
    }

    /// `H(s) = (Λ I(s))^(−1/Λ)`; `H(0) = 0`.
    pub fn h_cap(&self, s: f64) -> Result<f64, StructureError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_h_cap_of(self.ln_i(s)?).exp())
    }

    /// `h(s) = H(s)^(Λ+1)/(s a(s))`.
    pub fn h(&self, s: f64) -> Result<f64, StructureError> {
        if s == 0.0 {
            return Err(StructureError::Domain("h is not defined at s = 0".into()));
        }
        Ok((self.ln_f_at(s)? - self.law.ln_a(s)).exp())
    }

    /// `F(s) = H(s)^(Λ+1)/s`; `F(0) = 0`.
    pub fn f(&self, s: f64) -> Result<f64, StructureError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        Ok(self.ln_f_at(s)?.exp())
    }

    /// `F′(s)` from the monotone interpolant of `ln F`.
    pub fn f_prime(&self, s: f64) -> Result<f64, StructureError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        self.check(s)?;
        let (ln_f, slope) = self.ln_f_interp.eval_with_slope(s.ln());
        Ok((ln_f - s.ln()).exp() * slope.max(0.0))
    }

    /// `G′(s) = √F′(s)`.
    pub fn g_prime(&self, s: f64) -> Result<f64, StructureError> {
        Ok(self.f_prime(s)?.sqrt())
    }

    /// `G(s) = ∫_0^s √F′(σ) dσ`; `G(0) = 0`.
    pub fn g(&self, s: f64) -> Result<f64, StructureError> {
        if s == 0.0 {
            return Ok(0.0);
        }
        self.check(s)?;
        let s0 = self.grid[0];
        if s <= s0 {
            return Ok(self.g_nodes[0] * (s / s0).powf(self.tail_exponent));
        }
        let k = match self.grid.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(k) => return Ok(self.g_nodes[k]),
            Err(k) => (k - 1).min(self.grid.len() - 2),
        };
        let partial = quad::gauss_legendre8(
            |y| root_f_prime_integrand(&self.ln_f_interp, y),
            self.grid[k].ln(),
            s.ln(),
        );
        Ok(self.g_nodes[k] + partial)
    }

    /// Every structure function at `s > 0`.
    pub fn eval(&self, s: f64) -> Result<StructurePoint, StructureError> {
        let ln_i = self.ln_i(s)?;
        let ln_h = self.ln_h_cap_of(ln_i);
        let ln_f = (self.lambda_cap + 1.0) * ln_h - s.ln();
        let f = ln_f.exp();
        let h_cap = ln_h.exp();
        let f_prime = self.f_prime(s)?;
        Ok(StructurePoint {
            s,
            a: self.law.a(s),
            i: ln_i.exp(),
            h_cap,
            h: (ln_f - self.law.ln_a(s)).exp(),
            f,
            g: self.g(s)?,
            f_prime,
            g_prime: f_prime.sqrt(),
            sf_pow_check: (self.lambda_small / 2.0 * (s.ln() + ln_f) - ln_h).exp(),
        })
    }

    /// One [`StructurePoint`] per grid node.
    pub fn rows(&self) -> Result<Vec<StructurePoint>, StructureError> {
        self.grid.iter().map(|&s| self.eval(s)).collect()
    }

    /// `sup F/(G G′)` over the grid: the constant `c` of the `F ≤ c G′G` bound.
    pub fn a1_constant(&self) -> Result<f64, StructureError> {
        let mut worst: f64 = 0.0;
        for &s in &self.grid {
            let p = self.eval(s)?;
            let denom = p.g * p.g_prime;
            if denom > 0.0 {
                worst = worst.max(p.f / denom);
            } else if p.f > 0.0 {
                return Ok(f64::INFINITY);
            }
        }
        Ok(worst)
    }
}

/// Integrand of `G` in `y = ln σ`: `√(F′(σ)) σ = √(F p σ)` with `p = d ln F/d ln σ`.
fn root_f_prime_integrand(ln_f: &Pchip, y: f64) -> f64 {
    let (lf, slope) = ln_f.eval_with_slope(y);
    (0.5 * (lf + y)).exp() * slope.max(0.0).sqrt()
}

/// Caccioppoli constant `max{1, 1 + 2c² − 2c}`.
pub fn caccioppoli_constant(c: f64) -> f64 {
    1f64.max(1.0 + 2.0 * c * c - 2.0 * c)
}

/// Trend of a probed quantity as `s → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    ToZero,
    Bounded,
    Divergent,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbePoint {
    pub s: f64,
    #[serde(rename = "aI")]
    pub a_i: f64,
    #[serde(rename = "s_aprime_I")]
    pub s_ap_i: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub law: LawInfo,
    pub applicable: bool,
    pub notes: Vec<String>,
    pub probe_lo: f64,
    pub probe_hi: f64,
    #[serde(rename = "sup_aI")]
    pub sup_ai: f64,
    #[serde(rename = "sup_aI_at")]
    pub sup_ai_at: f64,
    #[serde(rename = "aI_trend")]
    pub ai_trend: Trend,
    pub cond_a_holds: bool,
    pub cond_infty_holds: bool,
    pub mu: u32,
    pub c_adecr: f64,
    #[serde(rename = "B")]
    pub b_bound: f64,
    #[serde(rename = "B_at")]
    pub b_at: f64,
    pub lambda_cap: Option<f64>,
    pub lambda_range_ok: bool,
    #[serde(rename = "c_A1")]
    pub c_a1: Option<f64>,
    #[serde(rename = "C_cacc")]
    pub c_cacc: Option<f64>,
    /// `a·I` and `s·a′·I` at `s = 10^−k`.
    pub decade_probes: Vec<ProbePoint>,
    pub probe_grid: Vec<ProbePoint>,
}

impl ValidationReport {
    pub fn decade_probe(&self, s: f64) -> Option<&ProbePoint> {
        self.decade_probes.iter().find(|p| ((p.s - s) / s).abs() < 1e-9)
    }
}

struct Probe {
    points: Vec<ProbePoint>,
    sup_ai: f64,
    sup_ai_at: f64,
    trend: Trend,
    cond_infty: bool,
    decades: Vec<ProbePoint>,
    ln_q_inputs: Vec<(f64, f64)>,
}

fn probe_range(law: &DiffusionLaw) -> (f64, f64) {
    let lo = law.probe_floor().max(1e-8);
    let hi = if law.s_max().is_finite() { 0.999 * law.s_max() } else { 1e4 };
    (lo, hi)
}

/// Classifies decade values ordered from large `s` to small `s`.
fn decade_trend(values: &[f64], sup: f64) -> Trend {
    let n = values.len();
    if n < 4 {
        return Trend::Bounded;
    }
    let tail = &values[n - 4..];
    let rising = tail.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9));
    if rising {
        let inc: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        // Geometrically shrinking increments mean a finite limit.
        if inc[2] >= 0.5 * inc[1] && inc[1] >= 0.5 * inc[0] {
            return Trend::Divergent;
        }
    }
    let falling = tail.windows(2).all(|w| w[1] < w[0]);
    if falling && tail[3] < 0.05 * sup {
        return Trend::ToZero;
    }
    Trend::Bounded
}

fn probe(law: &DiffusionLaw) -> Result<Probe, StructureError> {
    let (lo, hi) = probe_range(law);
    // Decade points join the probe grid so that every value comes out of
    // one tabulation instead of separate integrals down from s_max.
    let k_top = hi.log10().floor() as i32;
    let k_bottom = lo.log10().ceil() as i32;
    let decade_s: Vec<f64> = (k_bottom..=k_top)
        .rev()
        .map(|k| 10f64.powi(k))
        .filter(|&s| s < law.s_max() && s >= lo && s <= hi)
        .collect();
    let mut grid = log_grid(lo, hi, 20);
    grid.extend(&decade_s);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * a.abs());
    let table = tabulate_log_i(law, &grid)?;
    let points: Vec<ProbePoint> = table
        .iter()
        .map(|t| ProbePoint {
            s: t.s,
            a_i: t.a_i,
            s_ap_i: t.s * law.dln_a(t.s) * t.a_i,
        })
        .collect();
    let (mut sup_ai, mut sup_ai_at) = (f64::NEG_INFINITY, lo);
    for p in &points {
        if p.a_i > sup_ai {
            sup_ai = p.a_i;
            sup_ai_at = p.s;
        }
    }
    // Decade values from s = 1 (or below s_max) down to the floor.
    let decades: Vec<ProbePoint> = decade_s
        .iter()
        .filter_map(|&s| points.iter().find(|p| (p.s - s).abs() <= 1e-12 * s).copied())
        .collect();
    let downward: Vec<f64> = decades.iter().filter(|p| p.s <= 1.0).map(|p| p.a_i).collect();
    let trend = decade_trend(&downward, sup_ai);
    let cond_infty = if law.s_max().is_finite() {
        true
    } else {
        let upward: Vec<f64> = decades.iter().rev().filter(|p| p.s >= 1.0).map(|p| p.a_i).collect();
        points.last().map_or(false, |p| p.a_i.is_finite()) && decade_trend(&upward, sup_ai) != Trend::Divergent
    };
    let ln_q_inputs = table.iter().map(|t| (t.ln_a, t.ln_i)).collect();
    Ok(Probe {
        points,
        sup_ai,
        sup_ai_at,
        trend,
        cond_infty,
        decades,
        ln_q_inputs,
    })
}

fn admissible_sup(law: &DiffusionLaw, pr: &Probe) -> Result<f64, StructureError> {
    if !law.is_degenerate() {
        return Err(StructureError::Inadmissible(
            "non-degenerate: finite-speed theory inapplicable (a(0) ≠ 0)".into(),
        ));
    }
    if pr.trend == Trend::Divergent || !pr.sup_ai.is_finite() {
        return Err(StructureError::Inadmissible(format!(
            "a(s)I(s) grows without bound as s → 0 (running sup {:e} at s = {:e})",
            pr.sup_ai, pr.sup_ai_at
        )));
    }
    Ok(pr.sup_ai)
}

/// Relative band within which `1/(2 sup aI)` counts as a tie with 1.
const LAMBDA_TIE: f64 = 1e-9;

fn lambda_rule(sup_ai: f64) -> f64 {
    if sup_ai <= 0.0 {
        return 1.0;
    }
    let raw = 1.0 / (2.0 * sup_ai);
    if raw >= 1.0 - LAMBDA_TIE {
        1.0
    } else {
        raw
    }
}

/// `Λ = min(1, 1/(2 sup aI))`, strictly inside `0 < Λ < 1/(sup aI)_+`.
pub fn choose_lambda(law: &DiffusionLaw) -> Result<f64, StructureError> {
    let pr = probe(law)?;
    Ok(lambda_rule(admissible_sup(law, &pr)?))
}

/// Runs every admissibility check; failures are reported as flags.
///
/// With `lambda_cap = None` the rule of [`choose_lambda`] is applied.
pub fn validate(law: &DiffusionLaw, lambda_cap: Option<f64>) -> Result<ValidationReport, StructureError> {
    let pr = probe(law)?;
    let mut notes = Vec::new();
    let admissible = admissible_sup(law, &pr);
    if let Err(e) = &admissible {
        notes.push(match e {
            StructureError::Inadmissible(msg) => msg.clone(),
            other => other.to_string(),
        });
    }
    let cond_a_holds = admissible.is_ok();

    let (mut b_bound, mut b_at) = (f64::NEG_INFINITY, pr.points[0].s);
    for p in &pr.points {
        if p.s_ap_i > b_bound {
            b_bound = p.s_ap_i;
            b_at = p.s;
        }
    }
    // B is usually an integer in closed form; shed round-off before the ceiling.
    let mu = (b_bound - 1e-9 * b_bound.abs().max(1.0)).ceil().max(1.0) as u32;

    // inf over u < v of Q(u)/Q(v), Q = a I^μ, in log form.
    let mut running_min = f64::INFINITY;
    let mut ln_c: f64 = 0.0;
    for &(ln_a, ln_i) in &pr.ln_q_inputs {
        if !ln_i.is_finite() {
            continue;
        }
        let ln_q = ln_a + mu as f64 * ln_i;
        if running_min.is_finite() {
            ln_c = ln_c.min(running_min - ln_q);
        }
        running_min = running_min.min(ln_q);
    }
    let c_adecr = ln_c.exp().min(1.0);

    let lambda_cap = match (lambda_cap, &admissible) {
        (Some(l), _) => Some(l),
        (None, Ok(sup)) => Some(lambda_rule(*sup)),
        (None, Err(_)) => None,
    };
    let lambda_range_ok = match (lambda_cap, &admissible) {
        (Some(l), Ok(sup)) => l > 0.0 && (*sup <= 0.0 || l * sup < 1.0),
        _ => false,
    };
    let (mut c_a1, mut c_cacc) = (None, None);
    if let (Some(l), true) = (lambda_cap, lambda_range_ok) {
        match StructureSet::build(law, l, GridSpec::default()).and_then(|set| set.a1_constant()) {
            Ok(c) => {
                c_a1 = Some(c);
                c_cacc = Some(caccioppoli_constant(c));
            }
            Err(e) => notes.push(format!("structure set: {e}")),
        }
    }
    let (probe_lo, probe_hi) = probe_range(law);
    Ok(ValidationReport {
        law: law.info(),
        applicable: law.is_degenerate(),
        notes,
        probe_lo,
        probe_hi,
        sup_ai: pr.sup_ai,
        sup_ai_at: pr.sup_ai_at,
        ai_trend: pr.trend,
        cond_a_holds,
        cond_infty_holds: pr.cond_infty,
        mu,
        c_adecr,
        b_bound,
        b_at,
        lambda_cap,
        lambda_range_ok,
        c_a1,
        c_cacc,
        decade_probes: pr.decades,
        probe_grid: pr.points,
    })
}
