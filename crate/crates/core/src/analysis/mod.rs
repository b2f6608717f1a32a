//! Propagation diagnostics and audits of the energy inequalities on
//! computed fields.

pub mod audit;
pub mod front;
pub mod iteration;
pub mod sobolev;

use serde::Serialize;
use thiserror::Error;

use crate::quad::QuadError;
use crate::solver::{Geometry, Grid};
use crate::structure::StructureError;

pub use audit::{check_caccioppoli, check_parabolic_sobolev, weak_form_residual, InequalityReport, TimeWindow};
pub use front::{classify_propagation, front_report, support_radius, waiting_time, ClassifyRule, Classification, FrontReport, Propagation};
pub use iteration::{
    energy_iteration, lady_bound, lady_threshold, make_iteration_params, EnergyTrace, IterationParams,
};
pub use sobolev::{estimate_sobolev_constant, SobolevEstimate};

/// Discrete "zero": values at or below this level count as vanishing.
pub const ZERO_FLOOR: f64 = 1e-30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("precondition rejected: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inconsistent exponents: {0}")]
    InconsistentExponents(String),
    #[error("estimation failure: {0}")]
    Estimation(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Cutoff `θ(ρ) = 1` for `ρ ≤ inner`, linear down to 0 at `ρ = outer`,
/// with `ρ = |x|` or `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tent {
    pub inner: f64,
    pub outer: f64,
}

impl Tent {
    pub fn new(inner: f64, outer: f64) -> Result<Self, AnalysisError> {
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return Err(AnalysisError::Precondition(format!(
                "tent needs 0 ≤ inner < outer (got {inner}, {outer})"
            )));
        }
        Ok(Self { inner, outer })
    }

    pub fn value(&self, rho: f64) -> f64 {
        let rho = rho.abs();
        if rho <= self.inner {
            1.0
        } else if rho >= self.outer {
            0.0
        } else {
            (self.outer - rho) / (self.outer - self.inner)
        }
    }

    /// `dθ/dρ` away from the kinks.
    pub fn slope(&self, rho: f64) -> f64 {
        let rho_abs = rho.abs();
        if rho_abs > self.inner && rho_abs < self.outer {
            -rho.signum() / (self.outer - self.inner)
        } else {
            0.0
        }
    }

    /// `‖∇θ‖∞²`.
    pub fn gradient_sq_max(&self) -> f64 {
        (self.outer - self.inner).powi(-2)
    }

    fn kinks(&self) -> [f64; 2] {
        [self.inner, self.outer]
    }
}

/// Surface area of the unit sphere in `R^N` (`2` for `N = 1`).
pub fn unit_sphere_area(dim: u32) -> f64 {
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        n => 2.0 * std::f64::consts::PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

const GL3_X: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// `∫ f(ρ, u, ∂u) dx` over the grid's domain, with `u` piecewise linear
/// between nodes and each cell split at `kinks` (values of `|x|` or `r`).
/// The volume element is `ω_N r^(N−1) dr` on radial grids. Only cells with
/// `ρ < rho_max` contribute (partially if they straddle it).
pub fn integrate_field<F>(grid: &Grid, values: &[f64], kinks: &[f64], rho_max: f64, f: F) -> Result<f64, AnalysisError>
where
    F: Fn(f64, f64, f64) -> Result<f64, AnalysisError>,
{
    let (radial, dim) = match grid.geometry {
        Geometry::Interval { .. } => (false, 1),
        Geometry::Radial { dim, .. } => (true, dim),
    };
    let omega = if radial { unit_sphere_area(dim) } else { 1.0 };
    let mut total = 0.0;
    for i in 0..grid.points - 1 {
        let (xa, xb) = (grid.coords[i], grid.coords[i + 1]);
        let (ua, ub) = (values[i], values[i + 1]);
        let du = (ub - ua) / (xb - xa);
        let mut cuts = vec![xa, xb];
        for &k in kinks.iter().chain(std::iter::once(&rho_max)) {
            for c in [k, -k] {
                if c > xa && c < xb {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            if mid.abs() >= rho_max {
                continue;
            }
            let half = 0.5 * (b - a);
            for (x, wt) in GL3_X.iter().zip(GL3_W) {
                let p = mid + half * x;
                let u = ua + du * (p - xa);
                let weight = if radial { omega * p.powi(dim as i32 - 1) } else { 1.0 };
                total += wt * half * weight * f(p, u.max(0.0), du)?;
            }
        }
    }
    Ok(total)
}

/// `∫ |∇u|² dx`.
pub fn dirichlet_energy(grid: &Grid, values: &[f64]) -> f64 {
    integrate_field(grid, values, &[], f64::INFINITY, |_, _, du| Ok(du * du)).unwrap_or(f64::NAN)
}
