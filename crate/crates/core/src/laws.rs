//! Concentration-dependent diffusion coefficients `a(s)`.
//!
//! Every law can report `ln a(s)` and the log-ratio `ln a(v) − ln a(s)`
//! directly, so laws such as `exp(−1/s)` stay usable far below the point
//! where `a` itself underflows.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::quad::{self, Tolerance};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("law spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZetaKind {
    Bounded { k1: f64, k2: f64 },
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    Analytic,
    Numeric,
}

#[derive(Clone)]
enum LawKind {
    Power { beta: f64 },
    ExpInv { beta: f64 },
    Zeta { zeta: ScalarFn, kind: ZetaKind },
    Constant { a0: f64 },
    Custom { a: ScalarFn },
}

#[derive(Clone)]
pub struct DiffusionLaw {
    name: String,
    spec: String,
    kind: LawKind,
    s_max: f64,
    degenerate: bool,
    probe_floor: f64,
}

impl fmt::Debug for DiffusionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionLaw")
            .field("name", &self.name)
            .field("spec", &self.spec)
            .field("s_max", &self.s_max)
            .field("degenerate", &self.degenerate)
            .finish()
    }
}

/// Summary of a law for reports and the `laws` listing.
#[derive(Debug, Clone, Serialize)]
pub struct LawInfo {
    pub name: String,
    pub spec: String,
    pub s_max: f64,
    pub degenerate: bool,
    pub derivative: DerivativeKind,
    pub analytic_i: bool,
    pub probe_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaKind>,
}

fn positive(name: &str, v: f64) -> Result<f64, LawError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(LawError::InvalidParameter(format!("{name} must be > 0 (got {v})")))
    }
}

/// `a(s) = s^beta` on `(0, ∞)` with closed-form `I(s) = s^(−beta)/beta`.
pub fn make_power(beta: f64) -> Result<DiffusionLaw, LawError> {
    let beta = positive("beta", beta)?;
    Ok(DiffusionLaw {
        name: "power".into(),
        spec: format!("power:beta={beta}"),
        kind: LawKind::Power { beta },
        s_max: f64::INFINITY,
        degenerate: true,
        probe_floor: 0.0,
    })
}

/// `a(s) = exp(−s^(−beta))` on `(0, 1]`.
pub fn make_exp_inv(beta: f64) -> Result<DiffusionLaw, LawError> {
    let beta = positive("beta", beta)?;
    Ok(DiffusionLaw {
        name: "expinv".into(),
        spec: format!("expinv:beta={beta}"),
        kind: LawKind::ExpInv { beta },
        s_max: 1.0,
        degenerate: true,
        probe_floor: 0.0,
    })
}

/// Constant coefficient; non-degenerate, so the finite-speed theory does not apply.
pub fn make_constant(a0: f64) -> Result<DiffusionLaw, LawError> {
    let a0 = positive("a0", a0)?;
    Ok(DiffusionLaw {
        name: "const".into(),
        spec: format!("const:a0={a0}"),
        kind: LawKind::Constant { a0 },
        s_max: 1.0,
        degenerate: false,
        probe_floor: 0.0,
    })
}

/// `a(s) = exp(−∫_s^1 ζ(τ)/τ dτ)` on `(0, 1]`.
///
/// `zeta` is probed on a logarithmic grid over `[1e-8, 1]`; a non-finite or
/// non-positive value, or one outside `(k1, k2)` for a bounded kind, rejects
/// the law.
pub fn make_zeta<Z>(zeta: Z, kind: ZetaKind) -> Result<DiffusionLaw, LawError>
where
    Z: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if let ZetaKind::Bounded { k1, k2 } = kind {
        if !(k1 > 0.0 && k2 > k1 && k2.is_finite()) {
            return Err(LawError::InvalidParameter(format!(
                "bounded zeta needs 0 < k1 < k2 < inf (got k1={k1}, k2={k2})"
            )));
        }
    }
    for i in 0..=400 {
        let s = 10f64.powf(-8.0 * i as f64 / 400.0);
        let z = zeta(s);
        if !z.is_finite() || z <= 0.0 {
            return Err(LawError::InvalidLaw(format!("zeta({s:e}) = {z} is not positive and finite")));
        }
        if let ZetaKind::Bounded { k1, k2 } = kind {
            if !(z > k1 && z < k2) {
                return Err(LawError::InvalidLaw(format!("zeta({s:e}) = {z} outside ({k1}, {k2})")));
            }
        }
    }
    Ok(DiffusionLaw {
        name: "zeta".into(),
        spec: "zeta:custom".into(),
        kind: LawKind::Zeta {
            zeta: Arc::new(zeta),
            kind,
        },
        s_max: 1.0,
        degenerate: true,
        probe_floor: 0.0,
    })
}

/// A user-supplied coefficient with numerically differentiated `a′`.
pub fn make_custom<A>(name: &str, a: A, s_max: f64, degenerate: bool) -> Result<DiffusionLaw, LawError>
where
    A: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if !(s_max > 0.0) {
        return Err(LawError::InvalidParameter(format!("s_max must be > 0 (got {s_max})")));
    }
    let hi = if s_max.is_finite() { s_max } else { 1.0 };
    for i in 0..=200 {
        let s = hi * 10f64.powf(-8.0 * i as f64 / 200.0);
        let v = a(s);
        if !v.is_finite() || v <= 0.0 {
            return Err(LawError::InvalidLaw(format!("a({s:e}) = {v} is not positive and finite")));
        }
    }
    Ok(DiffusionLaw {
        name: name.to_string(),
        spec: format!("custom:{name}"),
        kind: LawKind::Custom { a: Arc::new(a) },
        s_max,
        degenerate,
        probe_floor: 0.0,
    })
}

/// Built-in ζ presets: `log` (ζ = 1 + ln(1/s), unbounded), `sin`
/// (ζ = 2 + sin(1/s), bounded in (1, 3)) and `const` (ζ ≡ beta).
pub fn make_zeta_preset(preset: &str, beta: Option<f64>) -> Result<DiffusionLaw, LawError> {
    let mut law = match preset {
        "log" => make_zeta(|s: f64| 1.0 - s.ln(), ZetaKind::Unbounded)?,
        "sin" => {
            // sin(1/s) oscillates ~1/(2πs) times per unit of ln s; below 1e-4
            // resolving it costs more than any probe is worth.
            let mut law = make_zeta(
                |s: f64| 2.0 + (1.0 / s).sin(),
                ZetaKind::Bounded { k1: 1.0, k2: 3.0 },
            )?;
            law.probe_floor = 1e-4;
            law
        }
        "const" => {
            let beta = positive("beta", beta.ok_or_else(|| LawError::Spec("zeta preset=const needs beta".into()))?)?;
            make_zeta(move |_s| beta, ZetaKind::Bounded { k1: 0.5 * beta, k2: 2.0 * beta })?
        }
        other => return Err(LawError::Spec(format!("unknown zeta preset '{other}' (expected log, sin, const)"))),
    };
    law.spec = match (preset, beta) {
        ("const", Some(b)) => format!("zeta:preset=const,beta={b}"),
        _ => format!("zeta:preset={preset}"),
    };
    Ok(law)
}

/// Parses `family:key=value,...`. Families: `power:beta=`, `expinv:beta=`,
/// `const:a0=`, `zeta:preset=log|sin|const[,beta=]`. Unknown keys are rejected.
pub fn parse_law_spec(text: &str) -> Result<DiffusionLaw, LawError> {
    let text = text.trim();
    let (family, rest) = text
        .split_once(':')
        .ok_or_else(|| LawError::Spec(format!("'{text}': expected family:key=value")))?;
    let mut params: Vec<(&str, &str)> = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| LawError::Spec(format!("'{item}': expected key=value")))?;
        let k = k.trim();
        if params.iter().any(|(seen, _)| *seen == k) {
            return Err(LawError::Spec(format!("duplicate key '{k}'")));
        }
        params.push((k, v.trim()));
    }
    let allowed: &[&str] = match family.trim() {
        "power" | "expinv" => &["beta"],
        "const" => &["a0"],
        "zeta" => &["preset", "beta"],
        other => return Err(LawError::Spec(format!("unknown law family '{other}'"))),
    };
    for (k, _) in &params {
        if !allowed.contains(k) {
            return Err(LawError::Spec(format!("unknown key '{k}' for family '{}'", family.trim())));
        }
    }
    let get = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
    let number = |key: &str| -> Result<Option<f64>, LawError> {
        get(key)
            .map(|v| v.parse::<f64>().map_err(|_| LawError::Spec(format!("{key}: '{v}' is not a number"))))
            .transpose()
    };
    let require = |key: &str| -> Result<f64, LawError> {
        number(key)?.ok_or_else(|| LawError::Spec(format!("missing key '{key}'")))
    };
    match family.trim() {
        "power" => make_power(require("beta")?),
        "expinv" => make_exp_inv(require("beta")?),
        "const" => make_constant(require("a0")?),
        _ => {
            let preset = get("preset").ok_or_else(|| LawError::Spec("missing key 'preset'".into()))?;
            let beta = number("beta")?;
            if beta.is_some() && preset != "const" {
                return Err(LawError::Spec(format!("key 'beta' not accepted by preset '{preset}'")));
            }
            make_zeta_preset(preset, beta)
        }
    }
}

impl DiffusionLaw {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Canonical spec string (parsable by [`parse_law_spec`] for built-ins).
    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Smallest concentration at which probes can evaluate the law reliably.
    pub fn probe_floor(&self) -> f64 {
        self.probe_floor
    }

    pub fn derivative_kind(&self) -> DerivativeKind {
        match self.kind {
            LawKind::Custom { .. } => DerivativeKind::Numeric,
            _ => DerivativeKind::Analytic,
        }
    }

    pub fn has_analytic_i(&self) -> bool {
        matches!(self.kind, LawKind::Power { .. })
    }

    pub fn info(&self) -> LawInfo {
        LawInfo {
            name: self.name.clone(),
            spec: self.spec.clone(),
            s_max: self.s_max,
            degenerate: self.degenerate,
            derivative: self.derivative_kind(),
            analytic_i: self.has_analytic_i(),
            probe_floor: self.probe_floor,
            zeta: self.zeta_kind(),
        }
    }

    /// Bounded or unbounded ζ for ζ-form laws.
    pub fn zeta_kind(&self) -> Option<ZetaKind> {
        match &self.kind {
            LawKind::Zeta { kind, .. } => Some(*kind),
            _ => None,
        }
    }

    /// `∫_lo^hi ζ(τ)/τ dτ`, integrated in `ln τ`.
    fn zeta_log_integral(zeta: &ScalarFn, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            return 0.0;
        }
        let (a, b, sign) = if lo < hi { (lo.ln(), hi.ln(), 1.0) } else { (hi.ln(), lo.ln(), -1.0) };
        let tol = Tolerance {
            abs: 1e-14,
            rel: 1e-13,
            max_intervals: 200_000,
        };
        match quad::integrate(|y: f64| zeta(y.exp()), a, b, tol) {
            Ok(r) => sign * r.value,
            Err(_) => f64::NAN,
        }
    }

    /// Diffusion coefficient; `a(0) = 0` for degenerate laws.
    pub fn a(&self, s: f64) -> f64 {
        match &self.kind {
            LawKind::Power { beta } => {
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(*beta)
                }
            }
            LawKind::Constant { a0 } => *a0,
            LawKind::Custom { a } => {
                if s <= 0.0 && self.degenerate {
                    0.0
                } else {
                    a(s)
                }
            }
            _ => {
                if s <= 0.0 {
                    0.0
                } else {
                    self.ln_a(s).exp()
                }
            }
        }
    }

    pub fn ln_a(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if self.degenerate { f64::NEG_INFINITY } else { self.a(0.0).ln() };
        }
        match &self.kind {
            LawKind::Power { beta } => beta * s.ln(),
            LawKind::ExpInv { beta } => -s.powf(-beta),
            LawKind::Zeta { zeta, .. } => -Self::zeta_log_integral(zeta, s, 1.0),
            LawKind::Constant { a0 } => a0.ln(),
            LawKind::Custom { a } => a(s).ln(),
        }
    }

    /// `ln a(hi) − ln a(lo)`, computed without forming either logarithm where
    /// that would cancel.
    pub fn ln_a_ratio(&self, lo: f64, hi: f64) -> f64 {
        match &self.kind {
            LawKind::Power { beta } => beta * (hi / lo).ln(),
            LawKind::ExpInv { beta } => {
                // s^-β (1 − (s/v)^β)
                -lo.powf(-beta) * (beta * (lo / hi).ln()).exp_m1()
            }
            LawKind::Zeta { zeta, .. } => Self::zeta_log_integral(zeta, lo, hi),
            LawKind::Constant { .. } => 0.0,
            LawKind::Custom { .. } => self.ln_a(hi) - self.ln_a(lo),
        }
    }

    /// `ln a(s e^x) − ln a(s)` with the log increment `x` given exactly.
    pub fn ln_a_shift(&self, s: f64, x: f64) -> f64 {
        match &self.kind {
            LawKind::Power { beta } => beta * x,
            LawKind::ExpInv { beta } => -s.powf(-beta) * (-beta * x).exp_m1(),
            LawKind::Zeta { zeta, .. } => {
                if x == 0.0 {
                    return 0.0;
                }
                let y0 = s.ln();
                let tol = Tolerance {
                    abs: 1e-14,
                    rel: 1e-13,
                    max_intervals: 200_000,
                };
                let (a, b, sign) = if x > 0.0 { (y0, y0 + x, 1.0) } else { (y0 + x, y0, -1.0) };
                match quad::integrate(|y: f64| zeta(y.exp()), a, b, tol) {
                    Ok(r) => sign * r.value,
                    Err(_) => f64::NAN,
                }
            }
            LawKind::Constant { .. } => 0.0,
            LawKind::Custom { .. } => self.ln_a(s * x.exp()) - self.ln_a(s),
        }
    }

    /// Logarithmic derivative `a′(s)/a(s)`.
    pub fn dln_a(&self, s: f64) -> f64 {
        match &self.kind {
            LawKind::Power { beta } => beta / s,
            LawKind::ExpInv { beta } => beta * s.powf(-beta - 1.0),
            LawKind::Zeta { zeta, .. } => zeta(s) / s,
            LawKind::Constant { .. } => 0.0,
            LawKind::Custom { a } => richardson_derivative(|x| a(x), s) / a(s),
        }
    }

    /// `a′(s)`; analytic for built-ins, Richardson-extrapolated central
    /// differences (relative step 1e-6) for custom laws.
    pub fn a_prime(&self, s: f64) -> f64 {
        match &self.kind {
            LawKind::Power { beta } => beta * s.powf(beta - 1.0),
            LawKind::Constant { .. } => 0.0,
            LawKind::Custom { a } => richardson_derivative(|x| a(x), s),
            _ => self.a(s) * self.dln_a(s),
        }
    }

    /// Closed-form `I(s)` when the law has one.
    pub fn analytic_i(&self, s: f64) -> Option<f64> {
        match self.kind {
            LawKind::Power { beta } => Some(s.powf(-beta) / beta),
            _ => None,
        }
    }

    /// Closed-form `ln I(s)` when the law has one.
    pub fn analytic_ln_i(&self, s: f64) -> Option<f64> {
        match self.kind {
            LawKind::Power { beta } => Some(-beta * s.ln() - beta.ln()),
            _ => None,
        }
    }
}

/// Central difference with step `1e-6·s`, Richardson-extrapolated once.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, s: f64) -> f64 {
    let h = 1e-6 * s.abs().max(f64::MIN_POSITIVE);
    let d = |h: f64| (f(s + h) - f(s - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// The built-in laws exercised by validators and acceptance runs.
pub fn builtin_laws() -> Vec<DiffusionLaw> {
    vec![
        make_power(0.5).unwrap(),
        make_power(1.0).unwrap(),
        make_power(2.0).unwrap(),
        make_exp_inv(1.0).unwrap(),
        make_exp_inv(2.0).unwrap(),
        make_zeta_preset("log", None).unwrap(),
        make_zeta_preset("sin", None).unwrap(),
        make_zeta_preset("const", Some(2.0)).unwrap(),
        make_constant(0.5).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn power_examples() {
        let p1 = make_power(1.0).unwrap();
        assert_eq!(p1.a(0.5), 0.5);
        let p2 = make_power(2.0).unwrap();
        assert!((p2.analytic_i(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((p2.a_prime(0.5) - 1.0).abs() < 1e-15);
        let fd = (p2.a(0.5 + 1e-6) - p2.a(0.5 - 1e-6)) / 2e-6;
        assert!((fd - 1.0).abs() < 1e-8);
        assert_eq!(p2.s_max(), f64::INFINITY);
        assert!(p2.is_degenerate());
    }

    #[test]
    fn exp_inv_examples() {
        let e1 = make_exp_inv(1.0).unwrap();
        assert!((e1.a(1.0) - (-1f64).exp()).abs() < 1e-15);
        assert!(rel(e1.a(0.1), (-10f64).exp()) < 1e-14);
        assert!((e1.a(0.1) - 4.54e-5).abs() < 1e-7);
        let e2 = make_exp_inv(2.0).unwrap();
        let fd = richardson_derivative(|s| e2.a(s), 0.5);
        assert!(rel(e2.a_prime(0.5), fd) < 1e-6);
        assert_eq!(e2.s_max(), 1.0);
        assert!(e2.analytic_i(0.5).is_none());
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(make_power(0.0), Err(LawError::InvalidParameter(_))));
        assert!(matches!(make_power(-1.0), Err(LawError::InvalidParameter(_))));
        assert!(matches!(make_exp_inv(-0.5), Err(LawError::InvalidParameter(_))));
        assert!(matches!(make_constant(0.0), Err(LawError::InvalidParameter(_))));
        assert!(matches!(make_zeta(|_| -1.0, ZetaKind::Unbounded), Err(LawError::InvalidLaw(_))));
        assert!(matches!(make_zeta(|s: f64| 1.0 / (s - 0.5), ZetaKind::Unbounded), Err(LawError::InvalidLaw(_))));
        assert!(matches!(
            make_zeta(|_| 5.0, ZetaKind::Bounded { k1: 1.0, k2: 3.0 }),
            Err(LawError::InvalidLaw(_))
        ));
    }

    #[test]
    fn constant_law() {
        let c = make_constant(0.5).unwrap();
        assert_eq!(c.a(0.9), 0.5);
        assert!(!c.is_degenerate());
        assert_eq!(c.a(0.0), 0.5);
    }

    #[test]
    fn zeta_constant_matches_power() {
        let z = make_zeta_preset("const", Some(2.0)).unwrap();
        assert!(rel(z.a(0.5), 0.25) < 1e-12);
        let p = make_power(2.0).unwrap();
        for k in 0..=40 {
            let s = 10f64.powf(-6.0 * k as f64 / 40.0);
            assert!(rel(z.a(s), p.a(s)) < 1e-8, "s={s}");
        }
    }

    #[test]
    fn zeta_log_decays_faster_than_powers() {
        let z = make_zeta_preset("log", None).unwrap();
        // ∫_s^1 (1 + ln(1/τ))/τ dτ = L + L²/2 with L = ln(1/s)
        for s in [1e-3, 1e-4] {
            let l = -(s as f64).ln();
            assert!((z.ln_a(s) + l + 0.5 * l * l).abs() < 1e-10);
        }
        let r3 = z.a(1e-3) / 1e-3f64.powi(5);
        let r4 = z.a(1e-4) / 1e-4f64.powi(5);
        assert!(r4 < 1e-2 * r3, "r3={r3} r4={r4}");
        assert!(r4 < 1e-2);
    }

    #[test]
    fn zeta_sin_positive_and_increasing() {
        let z = make_zeta_preset("sin", None).unwrap();
        let mut prev = 0.0;
        for k in 0..=60 {
            let s = 10f64.powf(-4.0 + 4.0 * k as f64 / 60.0);
            let a = z.a(s);
            assert!(a > 0.0 && a > prev, "s={s}");
            prev = a;
        }
        // oracle: ∫_s^1 (2 + sin(1/τ))/τ dτ = 2 ln(1/s) + ∫_1^{1/s} sin(y)/y dy
        let s = 1e-2;
        let si = crate::quad::integrate(|y: f64| y.sin() / y, 1.0, 1.0 / s, Tolerance::rel(1e-13)).unwrap().value;
        assert!((z.ln_a(s) + 2.0 * (1.0 / s).ln() + si).abs() < 1e-9);
    }

    #[test]
    fn derivatives_match_central_differences() {
        for law in builtin_laws() {
            let top = if law.s_max().is_finite() { law.s_max() } else { 1.0 };
            let floor = law.probe_floor().max(1e-4);
            for k in 0..=24 {
                let s = floor * (top / floor).powf(k as f64 / 24.0);
                let a = law.a(s);
                if a < 1e-250 {
                    continue;
                }
                let h = 1e-6 * s;
                let fd = (law.a(s + h) - law.a(s - h)) / (2.0 * h);
                let ap = law.a_prime(s);
                if ap == 0.0 {
                    assert!(fd.abs() < 1e-12);
                } else {
                    assert!(rel(ap, fd) < 1e-5, "{} s={s} a'={ap} fd={fd}", law.spec());
                }
            }
        }
    }

    #[test]
    fn degenerate_laws_vanish_and_increase() {
        for law in builtin_laws().into_iter().filter(|l| l.is_degenerate()) {
            let mut last = f64::INFINITY;
            for k in 1..=12 {
                let s = 10f64.powi(-k);
                if s < law.probe_floor() {
                    break;
                }
                let ln_a = law.ln_a(s);
                assert!(ln_a < last, "{}", law.spec());
                last = ln_a;
            }
            let top = law.s_max().min(1.0);
            let floor = law.probe_floor().max(1e-3);
            let mut prev = 0.0;
            for i in 0..1000 {
                let s = floor + (top - floor) * i as f64 / 999.0;
                let a = law.a(s);
                assert!(a >= prev, "{} not monotone at {s}", law.spec());
                prev = a;
            }
        }
    }

    #[test]
    fn spec_grammar() {
        assert_eq!(parse_law_spec("power:beta=2").unwrap().spec(), "power:beta=2");
        assert_eq!(parse_law_spec("expinv:beta=1").unwrap().spec(), "expinv:beta=1");
        assert_eq!(parse_law_spec("zeta:preset=log").unwrap().spec(), "zeta:preset=log");
        assert_eq!(parse_law_spec("const:a0=0.5").unwrap().spec(), "const:a0=0.5");
        assert_eq!(
            parse_law_spec("zeta:preset=const,beta=1.5").unwrap().spec(),
            "zeta:preset=const,beta=1.5"
        );
        assert!(parse_law_spec("power:gamma=2").is_err());
        assert!(parse_law_spec("power:beta=2,beta=3").is_err());
        assert!(parse_law_spec("heat:a0=1").is_err());
        assert!(parse_law_spec("power").is_err());
        assert!(matches!(parse_law_spec("power:beta=-1"), Err(LawError::InvalidParameter(_))));
        assert!(parse_law_spec("zeta:preset=log,beta=2").is_err());
    }
}
