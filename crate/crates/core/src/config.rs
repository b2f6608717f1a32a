//! INI-style run configuration: parsing with line-numbered errors,
//! command-line overrides, canonical emission and the config hash.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::laws::{parse_law_spec, DiffusionLaw};
use crate::solver::{Boundary, Grid, InitialProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    /// 1-based line in the file; `None` for overrides and missing keys.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in one pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("; "))
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaChoice {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Interval,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub law: String,
    pub lambda: LambdaChoice,
    pub geometry: GeometryKind,
    pub half_width: f64,
    pub radius: f64,
    pub dim: u32,
    pub points: usize,
    pub boundary: Boundary,
    pub initial: InitialProfile,
    pub t_end: f64,
    pub cfl: f64,
    pub snapshot_every: f64,
    pub max_steps: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub x0: f64,
    pub eps: Vec<f64>,
    pub control: String,
    pub ball: f64,
    pub eps_target: f64,
    pub n_max: u32,
    /// Iteration time; `None` lets the iteration pick one.
    pub s: Option<f64>,
    pub tent_inner: f64,
    pub tent_outer: f64,
    pub k_radius: f64,
    /// Audit times; empty means every snapshot.
    pub audit_times: Vec<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            x0: 1.5,
            eps: vec![1e-3, 1e-6, 1e-9],
            control: "const:a0=0.5".into(),
            ball: 1.0,
            eps_target: 2.0 / 3.0,
            n_max: 6,
            s: None,
            tent_inner: 0.3,
            tent_outer: 0.6,
            k_radius: 0.3,
            audit_times: Vec::new(),
        }
    }
}

impl RunConfig {
    /// Defaults for everything but the law.
    pub fn with_law(law: &str) -> Self {
        Self {
            law: law.into(),
            lambda: LambdaChoice::Auto,
            geometry: GeometryKind::Interval,
            half_width: 4.0,
            radius: 4.0,
            dim: 3,
            points: 401,
            boundary: Boundary::Neumann,
            initial: InitialProfile::Bump { width: 1.0 },
            t_end: 1.0,
            cfl: 0.5,
            snapshot_every: 0.01,
            max_steps: 50_000_000,
            output_dir: PathBuf::from("out"),
            seed: 0,
            analysis: AnalysisConfig::default(),
        }
    }

    pub fn law(&self) -> DiffusionLaw {
        parse_law_spec(&self.law).expect("validated at parse time")
    }

    pub fn control_law(&self) -> DiffusionLaw {
        parse_law_spec(&self.analysis.control).expect("validated at parse time")
    }

    pub fn grid(&self) -> Grid {
        match self.geometry {
            GeometryKind::Interval => Grid::interval(self.half_width, self.points),
            GeometryKind::Radial => Grid::radial(self.radius, self.dim, self.points),
        }
        .expect("validated at parse time")
    }

    /// Canonical text: every key, fixed order, floats in shortest
    /// round-trip form.
    pub fn emit(&self) -> String {
        let a = &self.analysis;
        let floats = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let lambda = match self.lambda {
            LambdaChoice::Auto => "auto".to_string(),
            LambdaChoice::Value(v) => format!("{v:?}"),
        };
        let geometry = match self.geometry {
            GeometryKind::Interval => "interval",
            GeometryKind::Radial => "radial",
        };
        let s = a.s.map_or("auto".to_string(), |v| format!("{v:?}"));
        let audit = if a.audit_times.is_empty() {
            "all".to_string()
        } else {
            floats(&a.audit_times)
        };
        format!(
            "[law]\nspec = {}\nlambda = {lambda}\n\n\
             [grid]\ngeometry = {geometry}\nL = {:?}\nR = {:?}\nN = {}\npoints = {}\nboundary = {}\ninitial = {}\n\n\
             [time]\nt_end = {:?}\ncfl = {:?}\nsnapshot_every = {:?}\nmax_steps = {}\n\n\
             [output]\ndir = {}\nseed = {}\n\n\
             [analysis]\nx0 = {:?}\neps = {}\ncontrol = {}\nball = {:?}\neps_target = {:?}\nn_max = {}\ns = {s}\n\
             tent_inner = {:?}\ntent_outer = {:?}\nk_radius = {:?}\naudit_times = {audit}\n",
            self.law().spec(),
            self.half_width,
            self.radius,
            self.dim,
            self.points,
            self.boundary,
            self.initial,
            self.t_end,
            self.cfl,
            self.snapshot_every,
            self.max_steps,
            self.output_dir.display(),
            self.seed,
            a.x0,
            floats(&a.eps),
            self.control_law().spec(),
            a.ball,
            a.eps_target,
            a.n_max,
            a.tent_inner,
            a.tent_outer,
            a.k_radius,
        )
    }

    /// SHA-256 of the canonical text, hex.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.emit().as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

const KEYS: &[(&str, &[&str])] = &[
    ("law", &["spec", "law", "lambda"]),
    ("grid", &["geometry", "L", "R", "N", "points", "boundary", "initial"]),
    ("time", &["t_end", "cfl", "snapshot_every", "max_steps"]),
    ("output", &["dir", "seed"]),
    (
        "analysis",
        &[
            "x0", "eps", "control", "ball", "eps_target", "n_max", "s", "tent_inner", "tent_outer", "k_radius",
            "audit_times",
        ],
    ),
];

/// `(section, key) → (value, line)`; line `None` for overrides.
type Entries = BTreeMap<(String, String), (String, Option<usize>)>;

fn unquote(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

fn known(section: &str, key: &str) -> bool {
    KEYS.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

fn read_entries(text: &str, errors: &mut Vec<ConfigError>) -> Entries {
    let mut entries = Entries::new();
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') || body.starts_with(';') {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            if KEYS.iter().any(|(s, _)| *s == name) {
                section = Some(name.to_string());
            } else {
                errors.push(ConfigError {
                    line: Some(line),
                    message: format!("unknown section [{name}]"),
                });
                section = None;
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("expected key = value, got '{body}'"),
            });
            continue;
        };
        let key = key.trim();
        let Some(sec) = section.as_deref() else {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("key '{key}' outside a known section"),
            });
            continue;
        };
        if !known(sec, key) {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("unknown key '{key}' in [{sec}]"),
            });
            continue;
        }
        // `law` is an alias of `spec`.
        let canon = if sec == "law" && key == "law" { "spec" } else { key };
        let slot = (sec.to_string(), canon.to_string());
        if let Some((_, Some(first))) = entries.get(&slot) {
            errors.push(ConfigError {
                line: Some(line),
                message: format!("duplicate key '{sec}.{canon}' at lines {first} and {line}"),
            });
            continue;
        }
        entries.insert(slot, (unquote(value).to_string(), Some(line)));
    }
    entries
}

/// Applies `section.key=value` overrides on top of the file entries.
fn apply_overrides(entries: &mut Entries, overrides: &[String], errors: &mut Vec<ConfigError>) {
    for o in overrides {
        let parsed = o
            .split_once('=')
            .and_then(|(path, v)| path.trim().split_once('.').map(|(s, k)| (s.trim(), k.trim(), v)));
        let Some((sec, key, value)) = parsed else {
            errors.push(ConfigError {
                line: None,
                message: format!("override '{o}': expected section.key=value"),
            });
            continue;
        };
        if !known(sec, key) {
            errors.push(ConfigError {
                line: None,
                message: format!("override '{o}': unknown key '{sec}.{key}'"),
            });
            continue;
        }
        let canon = if sec == "law" && key == "law" { "spec" } else { key };
        entries.insert((sec.into(), canon.into()), (unquote(value).to_string(), None));
    }
}

struct Reader<'a> {
    entries: &'a Entries,
    errors: Vec<ConfigError>,
}

impl Reader<'_> {
    fn fail(&mut self, line: Option<usize>, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    /// Parses `section.key` with `f`, or returns `default` if absent.
    fn get<T>(&mut self, sec: &str, key: &str, default: T, f: impl Fn(&str) -> Result<T, String>) -> T {
        match self.entries.get(&(sec.to_string(), key.to_string())) {
            None => default,
            Some((v, line)) => match f(v) {
                Ok(x) => x,
                Err(msg) => {
                    self.fail(*line, format!("{sec}.{key}: {msg}"));
                    default
                }
            },
        }
    }

    fn line_of(&self, sec: &str, key: &str) -> Option<usize> {
        self.entries.get(&(sec.to_string(), key.to_string())).and_then(|e| e.1)
    }
}

fn number(v: &str) -> Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("'{v}' is not a finite number"))
}

fn positive(v: &str) -> Result<f64, String> {
    let x = number(v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be > 0 (got {v})"))
    }
}

fn integer<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("'{v}' is not a non-negative integer"))
}

fn float_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|p| positive(p.trim())).collect()
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with(text, &[])
}

/// Parses `text`, applies `section.key=value` overrides, and validates.
/// All problems are reported together.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries = read_entries(text, &mut errors);
    apply_overrides(&mut entries, overrides, &mut errors);
    let mut r = Reader {
        entries: &entries,
        errors,
    };

    let law = match entries.get(&("law".into(), "spec".into())) {
        None => {
            r.fail(None, "missing required key law.spec".into());
            None
        }
        Some((v, line)) => match parse_law_spec(v) {
            Ok(l) => Some(l.spec().to_string()),
            Err(e) => {
                r.fail(*line, format!("law.spec: {e}"));
                None
            }
        },
    };
    let mut cfg = RunConfig::with_law(law.as_deref().unwrap_or("const:a0=1"));
    cfg.lambda = r.get("law", "lambda", LambdaChoice::Auto, |v| {
        if v == "auto" {
            Ok(LambdaChoice::Auto)
        } else {
            positive(v).map(LambdaChoice::Value)
        }
    });
    cfg.geometry = r.get("grid", "geometry", GeometryKind::Interval, |v| match v {
        "interval" => Ok(GeometryKind::Interval),
        "radial" => Ok(GeometryKind::Radial),
        _ => Err(format!("'{v}' is not interval or radial")),
    });
    cfg.half_width = r.get("grid", "L", cfg.half_width, positive);
    cfg.radius = r.get("grid", "R", cfg.radius, positive);
    cfg.dim = r.get("grid", "N", cfg.dim, |v| {
        integer::<u32>(v).and_then(|n| if n >= 1 { Ok(n) } else { Err("must be ≥ 1".into()) })
    });
    cfg.points = r.get("grid", "points", cfg.points, |v| {
        integer::<usize>(v).and_then(|n| if n >= 16 { Ok(n) } else { Err(format!("must be ≥ 16 (got {n})")) })
    });
    cfg.boundary = r.get("grid", "boundary", cfg.boundary, |v| v.parse());
    cfg.seed = r.get("output", "seed", cfg.seed, integer::<u64>);
    let seed = cfg.seed;
    cfg.initial = r.get("grid", "initial", cfg.initial.clone(), |v| {
        if v == "random" {
            Ok(InitialProfile::Random { seed })
        } else {
            v.parse()
        }
    });
    cfg.t_end = r.get("time", "t_end", cfg.t_end, positive);
    cfg.cfl = r.get("time", "cfl", cfg.cfl, |v| {
        positive(v).and_then(|x| if x <= 0.9 { Ok(x) } else { Err(format!("must be ≤ 0.9 (got {v})")) })
    });
    cfg.snapshot_every = r.get("time", "snapshot_every", cfg.snapshot_every, positive);
    cfg.max_steps = r.get("time", "max_steps", cfg.max_steps, |v| {
        integer::<usize>(v).and_then(|n| if n > 0 { Ok(n) } else { Err("must be > 0".into()) })
    });
    cfg.output_dir = r.get("output", "dir", cfg.output_dir.clone(), |v| {
        if v.is_empty() {
            Err("must not be empty".into())
        } else {
            Ok(PathBuf::from(v))
        }
    });

    let d = AnalysisConfig::default();
    let a = AnalysisConfig {
        x0: r.get("analysis", "x0", d.x0, number),
        eps: r.get("analysis", "eps", d.eps.clone(), float_list),
        control: r.get("analysis", "control", d.control.clone(), |v| {
            parse_law_spec(v).map(|l| l.spec().to_string()).map_err(|e| e.to_string())
        }),
        ball: r.get("analysis", "ball", d.ball, positive),
        eps_target: r.get("analysis", "eps_target", d.eps_target, |v| {
            number(v).and_then(|x| if x > 0.0 && x < 1.0 { Ok(x) } else { Err(format!("must lie in (0, 1) (got {v})")) })
        }),
        n_max: r.get("analysis", "n_max", d.n_max, integer::<u32>),
        s: r.get("analysis", "s", d.s, |v| if v == "auto" { Ok(None) } else { positive(v).map(Some) }),
        tent_inner: r.get("analysis", "tent_inner", d.tent_inner, |v| {
            number(v).and_then(|x| if x >= 0.0 { Ok(x) } else { Err(format!("must be ≥ 0 (got {v})")) })
        }),
        tent_outer: r.get("analysis", "tent_outer", d.tent_outer, positive),
        k_radius: r.get("analysis", "k_radius", d.k_radius, |v| {
            number(v).and_then(|x| if x >= 0.0 { Ok(x) } else { Err(format!("must be ≥ 0 (got {v})")) })
        }),
        audit_times: r.get("analysis", "audit_times", d.audit_times.clone(), |v| {
            if v == "all" {
                Ok(Vec::new())
            } else {
                float_list(v)
            }
        }),
    };
    if a.tent_outer <= a.tent_inner {
        let line = r.line_of("analysis", "tent_outer");
        r.fail(line, "analysis.tent_outer must exceed analysis.tent_inner".into());
    }
    if a.k_radius > a.tent_inner {
        let line = r.line_of("analysis", "k_radius");
        r.fail(line, "analysis.k_radius must not exceed analysis.tent_inner".into());
    }
    if a.eps.len() >= 2 && a.eps.windows(2).any(|w| w[1] >= w[0]) {
        let line = r.line_of("analysis", "eps");
        r.fail(line, "analysis.eps must be strictly decreasing".into());
    }
    cfg.analysis = a;
    if cfg.snapshot_every > cfg.t_end {
        let line = r.line_of("time", "snapshot_every");
        r.fail(line, "time.snapshot_every must not exceed time.t_end".into());
    }

    if r.errors.is_empty() {
        Ok(cfg)
    } else {
        r.errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(r.errors))
    }
}
