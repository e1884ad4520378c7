//! File exchange formats.
//!
//! Grid functions travel as CSV (`x,value` rows under a
//! `# domain=<line a b|circle> n=<n>` header) or as a JSON mirror with
//! fields `domain`, `n`, `values`. Trajectories export one CSV row per
//! (time, grid point) with columns `t,x,phi,phi_x,u,u_x` plus a JSON
//! manifest carrying r, λ, times, the blow-up time and per-time diagnostics.
//! Floats print with 17 significant digits so outputs are reproducible and
//! re-parse to identical bits.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{derivative, Domain, GridFunction};
use crate::nonperiodic::{Diagnostics, Trajectory};
use crate::periodic::PeriodicTrajectory;

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize, Deserialize)]
struct GridFunctionJson {
    domain: Domain,
    n: usize,
    values: Vec<f64>,
}

pub fn grid_to_json(f: &GridFunction) -> String {
    serde_json::to_string_pretty(&GridFunctionJson {
        domain: f.domain(),
        n: f.n(),
        values: f.values().to_vec(),
    })
    .expect("grid function serializes")
}

pub fn grid_from_json(text: &str) -> Result<GridFunction> {
    let raw: GridFunctionJson = serde_json::from_str(text)?;
    if raw.values.len() != raw.n {
        return Err(Error::InvalidInput(format!(
            "n = {} but {} values",
            raw.n,
            raw.values.len()
        )));
    }
    GridFunction::new(raw.domain, raw.values)
}

pub fn grid_to_csv(f: &GridFunction) -> String {
    let mut out = String::new();
    match f.domain() {
        Domain::Line { a, b } => {
            let _ = writeln!(out, "# domain=line {} {} n={}", fmt_f64(a), fmt_f64(b), f.n());
        }
        Domain::Circle => {
            let _ = writeln!(out, "# domain=circle n={}", f.n());
        }
    }
    for (x, v) in f.points().zip(f.values()) {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(*v));
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
    let header = header.trim();
    if !header.starts_with('#') {
        return Err(Error::InvalidInput(
            "missing '# domain=...' header line".into(),
        ));
    }
    let tokens: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    let mut domain: Option<&str> = None;
    let mut n: Option<usize> = None;
    let mut bounds: Vec<f64> = Vec::new();
    for tok in tokens {
        if let Some(rest) = tok.strip_prefix("domain=") {
            domain = Some(rest);
        } else if let Some(rest) = tok.strip_prefix("n=") {
            n = Some(
                rest.parse()
                    .map_err(|_| Error::InvalidInput(format!("bad sample count '{rest}'")))?,
            );
        } else if let Ok(v) = tok.parse::<f64>() {
            bounds.push(v);
        }
    }
    let n = n.ok_or_else(|| Error::InvalidInput("header lacks n=<count>".into()))?;
    let domain = match domain {
        Some("line") => {
            if bounds.len() != 2 {
                return Err(Error::InvalidInput(
                    "line header needs two window bounds".into(),
                ));
            }
            Domain::line(bounds[0], bounds[1])
        }
        Some("circle") => Domain::Circle,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown domain kind {other:?}"
            )))
        }
    };
    let mut values = Vec::with_capacity(n);
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("bad row '{line}'")))?;
        values.push(
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad value '{value}'")))?,
        );
    }
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "header says n={n} but {} rows found",
            values.len()
        )));
    }
    GridFunction::new(domain, values)
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        grid_from_json(&text)
    } else {
        grid_from_csv(&text)
    }
}

pub fn write_grid(path: &Path, f: &GridFunction) -> Result<()> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        grid_to_json(f)
    } else {
        grid_to_csv(f)
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct DiagnosticsJson {
    t: f64,
    finsler_speed: Option<f64>,
    min_phi_x: f64,
}

/// The JSON manifest written next to every trajectory CSV.
#[derive(Serialize)]
pub struct Manifest {
    pub r: Exponent,
    pub lambda: f64,
    pub times: Vec<f64>,
    /// None when the flow exists for all time.
    pub blowup_time: Option<f64>,
    diagnostics: Vec<DiagnosticsJson>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(r: Exponent, times: Vec<f64>, blowup_time: f64, diags: &[Diagnostics]) -> Self {
        Manifest {
            r,
            lambda: r.lambda(),
            blowup_time: blowup_time.is_finite().then_some(blowup_time),
            diagnostics: times
                .iter()
                .zip(diags)
                .map(|(&t, d)| DiagnosticsJson {
                    t,
                    finsler_speed: d.finsler_speed,
                    min_phi_x: d.min_phi_x,
                })
                .collect(),
            times,
            extra: serde_json::Map::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: serde_json::Value) {
        self.extra.insert(key.to_string(), value);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn csv_header() -> &'static str {
    "t,x,phi,phi_x,u,u_x\n"
}

fn push_row(out: &mut String, t: f64, x: f64, phi: f64, phi_x: f64, u: Option<f64>, ux: Option<f64>) {
    let _ = write!(out, "{},{},{},{}", fmt_f64(t), fmt_f64(x), fmt_f64(phi), fmt_f64(phi_x));
    match u {
        Some(v) => {
            let _ = write!(out, ",{}", fmt_f64(v));
        }
        None => out.push(','),
    }
    match ux {
        Some(v) => {
            let _ = writeln!(out, ",{}", fmt_f64(v));
        }
        None => out.push('\n'),
    }
}

/// One CSV row per (time, node): `t,x,phi,phi_x,u,u_x`. φ_x is the pointwise
/// second-order derivative of the stored map; velocity columns are empty for
/// trajectories that carry no Eulerian fields.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::from(csv_header());
    for (j, &t) in traj.times().iter().enumerate() {
        let phi = traj.diffeos[j].phi();
        let phi_x = derivative(phi);
        let u = traj.velocities.as_ref().map(|v| &v[j]);
        let ux = traj.velocity_slopes.as_ref().map(|v| &v[j]);
        for i in 0..phi.n() {
            push_row(
                &mut out,
                t,
                phi.x(i),
                phi.values()[i],
                phi_x.values()[i],
                u.map(|f| f.values()[i]),
                ux.map(|f| f.values()[i]),
            );
        }
    }
    out
}

pub fn write_trajectory(dir: &Path, traj: &Trajectory, manifest: Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trajectory.csv"), trajectory_to_csv(traj))?;
    manifest.write(&dir.join("manifest.json"))?;
    Ok(())
}

/// Same row format for periodic trajectories (`domain=circle` data).
pub fn periodic_trajectory_to_csv(traj: &PeriodicTrajectory) -> String {
    let mut out = String::from(csv_header());
    for (j, &t) in traj.times.iter().enumerate() {
        let phi = traj.diffeos[j].phi();
        let phi_x = traj.diffeos[j].slopes();
        let u = &traj.velocities[j];
        let ux = derivative(u);
        for i in 0..phi.n() {
            push_row(
                &mut out,
                t,
                phi.x(i),
                phi.values()[i],
                phi_x.values()[i],
                Some(u.values()[i]),
                Some(ux.values()[i]),
            );
        }
    }
    out
}
