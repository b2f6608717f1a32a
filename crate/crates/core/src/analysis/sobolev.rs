//! Sobolev constant `S` in `‖ψ‖²_{2+2j} ≤ S ‖∇ψ‖²₂` from the radial bubble
//! family `ψ_μ(r) = (1 + (r/μ)²)^{−(N−2)/2}`.

use serde::Serialize;

use super::{unit_sphere_area, AnalysisError};
use crate::quad::{self, Tolerance};

#[derive(Debug, Clone, Serialize)]
pub struct SobolevEstimate {
    #[serde(rename = "N")]
    pub n_dim: u32,
    /// Returned constant: the scan maximum times the safety factor.
    #[serde(rename = "S")]
    pub s: f64,
    pub raw_max: f64,
    pub safety: f64,
    /// `(μ, quotient)` pairs of the scan.
    pub scan: Vec<(f64, f64)>,
    /// `(max − min)/max` of the scanned quotients.
    pub flatness: f64,
}

const TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-11,
    max_intervals: 20_000,
};

/// `‖ψ‖²_p / ‖ψ′‖²₂` for a radial profile on `[0, ∞)` in `R^N`,
/// `p = 2N/(N−2)`.
pub fn radial_sobolev_quotient<P, D>(n_dim: u32, psi: P, dpsi: D) -> Result<f64, AnalysisError>
where
    P: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if n_dim < 3 {
        return Err(AnalysisError::Precondition(format!("N must be ≥ 3 (got {n_dim})")));
    }
    let n = n_dim as i32;
    let p = 2.0 * n_dim as f64 / (n_dim as f64 - 2.0);
    let omega = unit_sphere_area(n_dim);
    let lp = quad::integrate_to_infinity(|r| psi(r).abs().powf(p) * r.powi(n - 1), 0.0, TOL)?.value * omega;
    let grad = quad::integrate_to_infinity(|r| dpsi(r).powi(2) * r.powi(n - 1), 0.0, TOL)?.value * omega;
    if !(grad > 0.0) {
        return Err(AnalysisError::Estimation("gradient norm vanishes".into()));
    }
    Ok(lp.powf(2.0 / p) / grad)
}

fn bubble_quotient(n_dim: u32, mu: f64) -> Result<f64, AnalysisError> {
    let e = (n_dim as f64 - 2.0) / 2.0;
    radial_sobolev_quotient(
        n_dim,
        |r| (1.0 + (r / mu).powi(2)).powf(-e),
        |r| -2.0 * e * r / (mu * mu) * (1.0 + (r / mu).powi(2)).powf(-e - 1.0),
    )
}

/// Maximises the quotient over `μ ∈ [0.25, 4]` and returns the maximum
/// times 1.05.
pub fn estimate_sobolev_constant(n_dim: u32) -> Result<SobolevEstimate, AnalysisError> {
    if n_dim < 3 {
        return Err(AnalysisError::Precondition(format!("N must be ≥ 3 (got {n_dim})")));
    }
    let scan: Vec<(f64, f64)> = (0..=16)
        .map(|i| {
            let mu = 0.25 * 16f64.powf(i as f64 / 16.0);
            bubble_quotient(n_dim, mu).map(|q| (mu, q))
        })
        .collect::<Result<_, _>>()
        .map_err(|e| AnalysisError::Estimation(format!("bubble scan: {e}")))?;
    let max = scan.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = scan.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let flatness = (max - min) / max;
    if !max.is_finite() || flatness > 1e-3 {
        return Err(AnalysisError::Estimation(format!(
            "bubble quotients not converged (max {max:e}, spread {flatness:e})"
        )));
    }
    let safety = 1.05;
    Ok(SobolevEstimate {
        n_dim,
        s: max * safety,
        raw_max: max,
        safety,
        scan,
        flatness,
    })
}
