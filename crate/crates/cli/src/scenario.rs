//! Scenario resolution: JSON config files, flag overrides, validation and
//! the builtin initial-data specs.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use pjflow_core::grid::{Domain, GridFunction};
use pjflow_core::piecewise::PiecewiseLinearFn;
use pjflow_core::{Error, Exponent, Result};

pub const COMMANDS: &[&str] = &[
    "flow",
    "blowup",
    "distance",
    "bvp",
    "periodic",
    "crosscheck",
    "limit-sweep",
    "pl",
];

/// Raw config-file contents; every field optional so flags can fill gaps.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub r: Option<serde_json::Value>,
    pub lambda: Option<f64>,
    pub init: Option<String>,
    pub window: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub rs: Option<String>,
    pub phi0: Option<PathBuf>,
    pub phi1: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub residuals: Option<bool>,
    pub scheme: Option<String>,
}

/// Command-line values; `None` means "not given, fall back to config/default".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub r: Option<String>,
    pub lambda: Option<f64>,
    pub init: Option<String>,
    pub window: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub rs: Option<String>,
    pub phi0: Option<PathBuf>,
    pub phi1: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub residuals: bool,
    pub scheme: Option<String>,
}

/// A fully resolved run description.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub command: String,
    pub r: Exponent,
    pub init: InitSpec,
    pub window: (f64, f64),
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    pub t: f64,
    pub rs: Vec<f64>,
    pub phi0: Option<PathBuf>,
    pub phi1: Option<PathBuf>,
    pub out: PathBuf,
    pub residuals: bool,
    pub scheme: pjflow_core::crosscheck::SpatialScheme,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    Hat { b0: f64, b1: f64, b2: f64, amplitude: f64 },
    Sine { k: f64, amplitude: f64 },
    File(PathBuf),
}

impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, a),
            None => (s, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number '{t}' in init spec '{s}'")))
                })
                .collect::<Result<_>>()?
        };
        let get = |i: usize, default: f64| nums.get(i).copied().unwrap_or(default);
        match name {
            "gaussian" => Ok(InitSpec::Gaussian {
                center: get(0, 0.0),
                width: get(1, 1.0),
                amplitude: get(2, 1.0),
            }),
            "hat" => Ok(InitSpec::Hat {
                b0: get(0, 0.0),
                b1: get(1, 1.0),
                b2: get(2, 2.0),
                amplitude: get(3, 1.0),
            }),
            "sine" => Ok(InitSpec::Sine {
                k: get(0, 1.0),
                amplitude: get(1, 1.0 / std::f64::consts::TAU),
            }),
            "file" => {
                if args.is_empty() {
                    return Err(Error::Config("file init spec needs a path".into()));
                }
                Ok(InitSpec::File(PathBuf::from(args)))
            }
            other => Err(Error::Config(format!("unknown init spec '{other}'"))),
        }
    }
}

impl InitSpec {
    /// Sample onto a line window.
    pub fn build_line(&self, window: (f64, f64), n: usize) -> Result<GridFunction> {
        let domain = Domain::line(window.0, window.1);
        match self {
            InitSpec::Gaussian { center, width, amplitude } => {
                let (c, w, a) = (*center, *width, *amplitude);
                GridFunction::from_fn(domain, n, move |x| a * (-((x - c) / w).powi(2)).exp())
            }
            InitSpec::Hat { b0, b1, b2, amplitude } => {
                PiecewiseLinearFn::hat(*b0, *b1, *b2, *amplitude)?.to_grid(domain, n)
            }
            InitSpec::Sine { .. } => Err(Error::Config(
                "sine initial data is periodic; use the periodic command".into(),
            )),
            InitSpec::File(path) => {
                let g = pjflow_core::io::read_grid(path)?;
                if g.domain().is_circle() {
                    return Err(Error::Config(format!(
                        "{} holds circle data; this command needs a line window",
                        path.display()
                    )));
                }
                Ok(g)
            }
        }
    }

    /// Sample onto the circle.
    pub fn build_circle(&self, n: usize) -> Result<GridFunction> {
        match self {
            InitSpec::Sine { k, amplitude } => {
                let (k, a) = (*k, *amplitude);
                GridFunction::from_fn(Domain::Circle, n, move |x| {
                    a * (std::f64::consts::TAU * k * x).sin()
                })
            }
            InitSpec::File(path) => {
                let g = pjflow_core::io::read_grid(path)?;
                if !g.domain().is_circle() {
                    return Err(Error::Config(format!(
                        "{} holds line data; the periodic command needs circle data",
                        path.display()
                    )));
                }
                Ok(g)
            }
            other => Err(Error::Config(format!(
                "init spec {other:?} does not define periodic data"
            ))),
        }
    }

    /// Exact piecewise-linear form, for the pl command.
    pub fn build_pl(&self) -> Result<PiecewiseLinearFn> {
        match self {
            InitSpec::Hat { b0, b1, b2, amplitude } => {
                PiecewiseLinearFn::hat(*b0, *b1, *b2, *amplitude)
            }
            InitSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(serde_json::from_str(&text)?)
            }
            other => Err(Error::Config(format!(
                "init spec {other:?} is not piecewise linear; use hat:... or file:..."
            ))),
        }
    }
}

/// Parse an exponent list like "2,4,8,...,256"; "..." continues the
/// geometric progression of the two preceding entries up to the next bound.
pub fn parse_exponent_list(text: &str) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    let mut fill_pending = false;
    for tok in text.split(',') {
        let tok = tok.trim();
        if tok == "..." || tok == "…" {
            if out.len() < 2 {
                return Err(Error::Config(
                    "'...' needs two preceding entries to infer the progression".into(),
                ));
            }
            fill_pending = true;
            continue;
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::Config(format!("bad exponent '{tok}'")))?;
        if fill_pending {
            let ratio = out[out.len() - 1] / out[out.len() - 2];
            if !(ratio.is_finite() && ratio > 1.0) {
                return Err(Error::Config(
                    "'...' needs an increasing geometric progression".into(),
                ));
            }
            let mut next = out[out.len() - 1] * ratio;
            while next < v * (1.0 - 1e-12) {
                out.push(next);
                next *= ratio;
            }
            fill_pending = false;
        }
        out.push(v);
    }
    if fill_pending {
        return Err(Error::Config("'...' cannot end the list".into()));
    }
    if out.is_empty() {
        return Err(Error::Config("empty exponent list".into()));
    }
    Ok(out)
}

/// Violations found while validating a merged configuration.
pub fn validate(command: &str, file: &ConfigFile, over: &Overrides) -> Vec<String> {
    let mut problems = Vec::new();
    if !COMMANDS.contains(&command) {
        problems.push(format!("unknown command '{command}'"));
    }

    let r_given = over.r.is_some() || file.r.is_some();
    let lambda_given = over.lambda.is_some() || file.lambda.is_some();
    if r_given && lambda_given {
        problems.push("exactly one of r and lambda may be given, got both".into());
    }
    if let Some(err) = resolve_exponent(file, over).err() {
        problems.push(err.to_string());
    }

    if let Some(init) = over.init.as_deref().or(file.init.as_deref()) {
        if let Err(e) = init.parse::<InitSpec>() {
            problems.push(e.to_string());
        }
    }
    let window = over
        .window
        .as_deref()
        .map(|w| [w[0], w[1]])
        .or(file.window);
    if let Some([a, b]) = window {
        if !(a.is_finite() && b.is_finite() && a < b) {
            problems.push(format!("window [{a}, {b}] is not an increasing pair"));
        }
    }
    if let Some(n) = over.n.or(file.n) {
        if n < 4 {
            problems.push(format!("n = {n} is below the 4-sample minimum"));
        }
    }
    for (name, v) in [
        ("t_end", over.t_end.or(file.t_end)),
        ("dt", over.dt.or(file.dt)),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                problems.push(format!("{name} = {v} must be positive"));
            }
        }
    }
    if let Some(rs) = over.rs.as_deref().or(file.rs.as_deref()) {
        if let Err(e) = parse_exponent_list(rs) {
            problems.push(e.to_string());
        }
    }
    if let Some(scheme) = over.scheme.as_deref().or(file.scheme.as_deref()) {
        if !matches!(scheme, "central" | "upwind") {
            problems.push(format!("unknown scheme '{scheme}' (central | upwind)"));
        }
    }
    problems
}

fn resolve_exponent(file: &ConfigFile, over: &Overrides) -> Result<Exponent> {
    if let Some(text) = &over.r {
        return text.parse();
    }
    if let Some(lambda) = over.lambda {
        return Exponent::from_lambda(lambda);
    }
    if let Some(value) = &file.r {
        return match value {
            serde_json::Value::Number(n) => Exponent::finite(
                n.as_f64()
                    .ok_or_else(|| Error::Config("r is not representable".into()))?,
            ),
            serde_json::Value::String(s) => s.parse(),
            other => Err(Error::Config(format!("bad r value {other}"))),
        };
    }
    if let Some(lambda) = file.lambda {
        return Exponent::from_lambda(lambda);
    }
    Err(Error::Config("one of r or lambda must be given".into()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad config JSON: {e}")))
}

/// Merge config file and flags (flags win), apply defaults, validate.
pub fn resolve(command: &str, over: &Overrides) -> Result<Scenario> {
    let file = match &over.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(file_cmd) = &file.command {
        if file_cmd != command {
            return Err(Error::Config(format!(
                "config file says command '{file_cmd}' but '{command}' was invoked"
            )));
        }
    }
    let problems = validate(command, &file, over);
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }

    let r = resolve_exponent(&file, over)?;
    let init: InitSpec = over
        .init
        .as_deref()
        .or(file.init.as_deref())
        .unwrap_or("gaussian")
        .parse()?;
    let window = over
        .window
        .as_deref()
        .map(|w| (w[0], w[1]))
        .or(file.window.map(|[a, b]| (a, b)))
        .unwrap_or((-8.0, 8.0));
    let n = over.n.or(file.n).unwrap_or(2049);
    let t_end = over.t_end.or(file.t_end).unwrap_or(1.0);
    let dt = over.dt.or(file.dt).unwrap_or(0.01);
    let t = over.t.or(file.t).unwrap_or(t_end);
    let rs = match over.rs.as_deref().or(file.rs.as_deref()) {
        Some(text) => parse_exponent_list(text)?,
        None => vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
    };
    let scheme = match over.scheme.as_deref().or(file.scheme.as_deref()) {
        Some("upwind") => pjflow_core::crosscheck::SpatialScheme::Upwind,
        _ => pjflow_core::crosscheck::SpatialScheme::Central,
    };
    Ok(Scenario {
        command: command.to_string(),
        r,
        init,
        window,
        n,
        t_end,
        dt,
        t,
        rs,
        phi0: over.phi0.clone().or(file.phi0),
        phi1: over.phi1.clone().or(file.phi1),
        out: over
            .out
            .clone()
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("pjflow_out")),
        residuals: over.residuals || file.residuals.unwrap_or(false),
        scheme,
    })
}
