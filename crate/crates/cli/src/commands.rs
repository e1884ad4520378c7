//! Command implementations. Every command writes its artifacts under the
//! scenario's output directory and reports through the exit status:
//! 0 success, 2 config error, 3 blow-up reached, 4 numerical failure.

use std::path::Path;

use serde_json::json;

use pjflow_core::crosscheck::{integrate_nonlocal, IntegratorConfig};
use pjflow_core::io::{self, fmt_f64, Manifest};
use pjflow_core::nonperiodic::{
    blowup_time, bvp_geodesic, exact_flow, geodesic_distance, lagrangian_residual, pj_residual,
    Diffeo, FlowParams, Trajectory,
};
use pjflow_core::periodic::sphere_geodesic;
use pjflow_core::pl_flow::{flow_diffeo, flow_velocity, PlState};
use pjflow_core::{Error, Exponent, Result};

use crate::scenario::Scenario;

/// A run that produced files and may carry a warning exit status
/// (blow-up reached) instead of plain success.
pub struct Outcome {
    pub blowup_reached: bool,
}

impl Outcome {
    fn ok() -> Self {
        Outcome {
            blowup_reached: false,
        }
    }
}

pub fn dispatch(scenario: &Scenario) -> Result<Outcome> {
    match scenario.command.as_str() {
        "flow" => flow(scenario),
        "blowup" => blowup(scenario),
        "distance" => distance(scenario),
        "bvp" => bvp(scenario),
        "periodic" => periodic(scenario),
        "crosscheck" => crosscheck(scenario),
        "limit-sweep" => limit_sweep(scenario),
        "pl" => pl(scenario),
        other => Err(Error::Config(format!("unknown command '{other}'"))),
    }
}

fn trajectory_manifest(traj: &Trajectory, scenario: &Scenario) -> Manifest {
    let mut manifest = Manifest::new(
        traj.params.r,
        traj.times().to_vec(),
        traj.blowup_time,
        &traj.diagnostics,
    );
    if scenario.residuals && traj.len() >= 3 {
        if let Ok(res) = lagrangian_residual(traj, traj.params.r.lambda()) {
            manifest.insert("lagrangian_residual", json!(res));
        }
        if let Some(velocities) = &traj.velocities {
            // Third x-derivatives of resampled fields amplify interpolation
            // noise; the value is reported as a rough diagnostic only.
            if let Ok(res) = pj_residual(traj.times(), velocities, traj.params.r.lambda()) {
                manifest.insert("pj_residual", json!(res));
            }
        }
    }
    manifest
}

fn flow(scenario: &Scenario) -> Result<Outcome> {
    let u0 = scenario.init.build_line(scenario.window, scenario.n)?;
    let t_star = blowup_time(&u0, scenario.r)?;
    let mut params = FlowParams::uniform(scenario.r, scenario.t_end, scenario.dt)?;
    let mut truncated = false;
    if *params.times.last().unwrap() >= t_star {
        let kept: Vec<f64> = params
            .times
            .iter()
            .copied()
            .filter(|&t| t < t_star * (1.0 - 1e-9))
            .collect();
        params = FlowParams::new(scenario.r, kept)?;
        truncated = true;
    }
    let traj = exact_flow(&u0, &params)?;
    let mut manifest = trajectory_manifest(&traj, scenario);
    manifest.insert("truncated_at_blowup", json!(truncated));
    io::write_trajectory(&scenario.out, &traj, manifest)?;
    println!(
        "flow: wrote {} time samples to {} (T* = {})",
        traj.len(),
        scenario.out.display(),
        fmt_f64(t_star)
    );
    Ok(Outcome {
        blowup_reached: truncated,
    })
}

fn blowup(scenario: &Scenario) -> Result<Outcome> {
    let u0 = scenario.init.build_line(scenario.window, scenario.n)?;
    let t_star = blowup_time(&u0, scenario.r)?;
    std::fs::create_dir_all(&scenario.out)?;
    let body = json!({
        "command": "blowup",
        "r": scenario.r,
        "lambda": scenario.r.lambda(),
        "blowup_time": t_star.is_finite().then_some(t_star),
    });
    std::fs::write(
        scenario.out.join("manifest.json"),
        serde_json::to_string_pretty(&body)?,
    )?;
    if t_star.is_finite() {
        println!("blowup_time = {}", fmt_f64(t_star));
    } else {
        println!("blowup_time = inf (flow exists for all time)");
    }
    Ok(Outcome::ok())
}

fn load_diffeo(path: &Path) -> Result<Diffeo> {
    Diffeo::new(io::read_grid(path)?)
}

fn boundary_maps(scenario: &Scenario) -> Result<(Diffeo, Diffeo)> {
    let phi1 = scenario
        .phi1
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs --phi1 <grid file>".into()))?;
    let phi1 = load_diffeo(phi1)?;
    let phi0 = match &scenario.phi0 {
        Some(path) => load_diffeo(path)?,
        None => {
            let (a, b) = phi1.window();
            Diffeo::identity(a, b, phi1.n())?
        }
    };
    Ok((phi0, phi1))
}

fn require_norm_exponent(r: Exponent) -> Result<f64> {
    match r {
        Exponent::Finite(v) if v >= 1.0 => Ok(v),
        other => Err(Error::Config(format!(
            "this command needs finite r >= 1, got {other}"
        ))),
    }
}

fn distance(scenario: &Scenario) -> Result<Outcome> {
    let r = require_norm_exponent(scenario.r)?;
    let (phi0, phi1) = boundary_maps(scenario)?;
    let d = geodesic_distance(&phi0, &phi1, r)?;
    std::fs::create_dir_all(&scenario.out)?;
    let body = json!({
        "command": "distance",
        "r": scenario.r,
        "lambda": scenario.r.lambda(),
        "distance": d,
    });
    std::fs::write(
        scenario.out.join("manifest.json"),
        serde_json::to_string_pretty(&body)?,
    )?;
    println!("distance = {}", fmt_f64(d));
    Ok(Outcome::ok())
}

fn bvp(scenario: &Scenario) -> Result<Outcome> {
    let r = require_norm_exponent(scenario.r)?;
    let (phi0, phi1) = boundary_maps(scenario)?;
    let steps = (1.0 / scenario.dt).round().max(1.0) as usize;
    let s: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let sol = bvp_geodesic(&phi0, &phi1, r, &s)?;
    let mut manifest = trajectory_manifest(&sol.trajectory, scenario);
    manifest.insert("distance", json!(geodesic_distance(&phi0, &phi1, r)?));
    manifest.insert("minimizer_unique", json!(sol.unique));
    io::write_trajectory(&scenario.out, &sol.trajectory, manifest)?;
    println!(
        "bvp: wrote {} parameter samples to {}",
        sol.trajectory.len(),
        scenario.out.display()
    );
    Ok(Outcome::ok())
}

fn periodic(scenario: &Scenario) -> Result<Outcome> {
    let r = match scenario.r {
        Exponent::Finite(v) if v > 1.0 => v,
        other => {
            return Err(Error::Config(format!(
                "the periodic solver needs finite r > 1, got {other}"
            )))
        }
    };
    let u0 = scenario.init.build_circle(scenario.n)?;
    let samples = ((scenario.t_end / scenario.dt).round() as usize).clamp(1, 64);
    let times: Vec<f64> = (0..=samples)
        .map(|k| scenario.t_end * k as f64 / samples as f64)
        .collect();
    match sphere_geodesic(&u0, r, &times, scenario.dt) {
        Ok(traj) => {
            std::fs::create_dir_all(&scenario.out)?;
            std::fs::write(
                scenario.out.join("trajectory.csv"),
                io::periodic_trajectory_to_csv(&traj),
            )?;
            let mut manifest = Manifest::new(
                scenario.r,
                traj.times.clone(),
                f64::INFINITY,
                &traj.diagnostics,
            );
            manifest.insert("constraint_drift", json!(traj.constraint_drift));
            manifest.insert("slope_norm", json!(traj.slope_norm));
            manifest.write(&scenario.out.join("manifest.json"))?;
            println!(
                "periodic: wrote {} time samples to {} (constraint drift {:.3e})",
                traj.times.len(),
                scenario.out.display(),
                traj.constraint_drift
            );
            Ok(Outcome::ok())
        }
        Err(Error::BoundaryHit { t, min_f }) => {
            std::fs::create_dir_all(&scenario.out)?;
            let body = json!({
                "command": "periodic",
                "r": scenario.r,
                "lambda": scenario.r.lambda(),
                "boundary_hit_time": t,
                "min_f": min_f,
            });
            std::fs::write(
                scenario.out.join("manifest.json"),
                serde_json::to_string_pretty(&body)?,
            )?;
            println!("periodic: image boundary hit at t ≈ {} (periodic blow-up proxy)", fmt_f64(t));
            Ok(Outcome {
                blowup_reached: true,
            })
        }
        Err(e) => Err(e),
    }
}

fn crosscheck(scenario: &Scenario) -> Result<Outcome> {
    let u0 = scenario.init.build_line(scenario.window, scenario.n)?;
    let cfg = IntegratorConfig::new(scenario.dt)?
        .with_scheme(scenario.scheme)
        .with_stride(((scenario.t_end / scenario.dt) as usize / 64).max(1));
    let run = integrate_nonlocal(&u0, scenario.r, scenario.t_end, &cfg)?;

    // Compare the final field against the closed-form flow.
    let t_final = *run.times.last().unwrap();
    let mut max_error = f64::NAN;
    if t_final > 0.0 {
        let params = FlowParams::new(scenario.r, vec![0.0, t_final])?;
        if let Ok(traj) = exact_flow(&u0, &params) {
            let exact = &traj.velocities.as_ref().unwrap()[1];
            max_error = run
                .fields
                .last()
                .unwrap()
                .values()
                .iter()
                .zip(exact.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
        }
    }

    std::fs::create_dir_all(&scenario.out)?;
    let mut csv = String::from("t,x,phi,phi_x,u,u_x\n");
    for (t, field) in run.times.iter().zip(&run.fields) {
        let ux = pjflow_core::grid::derivative(field);
        for i in 0..field.n() {
            csv.push_str(&format!(
                "{},{},,,{},{}\n",
                fmt_f64(*t),
                fmt_f64(field.x(i)),
                fmt_f64(field.values()[i]),
                fmt_f64(ux.values()[i]),
            ));
        }
    }
    std::fs::write(scenario.out.join("fields.csv"), csv)?;
    let drift = {
        let s0 = run.slope_norms[0];
        run.slope_norms
            .iter()
            .map(|s| (s - s0).abs() / s0.abs().max(1e-300))
            .fold(0.0_f64, f64::max)
    };
    let body = json!({
        "command": "crosscheck",
        "r": scenario.r,
        "lambda": scenario.r.lambda(),
        "times": run.times,
        "max_error_vs_exact": max_error.is_finite().then_some(max_error),
        "slope_norm_drift": drift,
        "stopped_early": run.stopped.is_some(),
    });
    std::fs::write(
        scenario.out.join("manifest.json"),
        serde_json::to_string_pretty(&body)?,
    )?;
    println!(
        "crosscheck: {} steps recorded, max error vs exact flow {}",
        run.times.len(),
        if max_error.is_finite() {
            fmt_f64(max_error)
        } else {
            "n/a".into()
        }
    );
    Ok(Outcome {
        blowup_reached: run.stopped.is_some(),
    })
}

fn limit_sweep(scenario: &Scenario) -> Result<Outcome> {
    let u0 = scenario.init.build_line(scenario.window, scenario.n)?;
    let t = scenario.t;
    let params_inf = FlowParams::new(Exponent::Infinite, vec![0.0, t])?;
    let phi_inf = exact_flow(&u0, &params_inf)?.diffeos[1].phi().clone();

    let threads = std::env::var("PJFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
        })
        .min(scenario.rs.len().max(1));

    let mut errors: Vec<Result<f64>> = Vec::with_capacity(scenario.rs.len());
    let chunk = scenario.rs.len().div_ceil(threads);
    let sweep_one = |r: f64| -> Result<f64> {
        let params = FlowParams::new(Exponent::finite(r)?, vec![0.0, t])?;
        let traj = exact_flow(&u0, &params)?;
        Ok(traj.diffeos[1]
            .phi()
            .values()
            .iter()
            .zip(phi_inf.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max))
    };
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenario
            .rs
            .chunks(chunk)
            .map(|rs| scope.spawn(move || rs.iter().map(|&r| sweep_one(r)).collect::<Vec<_>>()))
            .collect();
        for handle in handles {
            errors.extend(handle.join().expect("sweep worker panicked"));
        }
    });

    let mut rows = Vec::with_capacity(scenario.rs.len());
    for (r, err) in scenario.rs.iter().zip(errors) {
        rows.push((*r, err?));
    }
    // least-squares slope of ln err against ln r
    let pts: Vec<(f64, f64)> = rows.iter().map(|(r, e)| (r.ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    std::fs::create_dir_all(&scenario.out)?;
    let mut csv = String::from("r,max_abs_error\n");
    for (r, e) in &rows {
        csv.push_str(&format!("{},{}\n", fmt_f64(*r), fmt_f64(*e)));
    }
    std::fs::write(scenario.out.join("sweep.csv"), csv)?;
    let body = json!({
        "command": "limit-sweep",
        "t": t,
        "rs": rows.iter().map(|(r, _)| *r).collect::<Vec<_>>(),
        "errors": rows.iter().map(|(_, e)| *e).collect::<Vec<_>>(),
        "fitted_slope": slope,
    });
    std::fs::write(
        scenario.out.join("manifest.json"),
        serde_json::to_string_pretty(&body)?,
    )?;
    println!("limit-sweep: fitted log-log slope {slope:.4} over {} exponents", rows.len());
    Ok(Outcome::ok())
}

fn pl(scenario: &Scenario) -> Result<Outcome> {
    let velocity = scenario.init.build_pl()?;
    let state = PlState::new(velocity, scenario.r)?;
    let t = scenario.t_end;
    std::fs::create_dir_all(&scenario.out)?;
    match (flow_diffeo(&state, t), flow_velocity(&state, t)) {
        (Ok(diffeo), Ok(velocity)) => {
            let wrap = |p: &pjflow_core::piecewise::PiecewiseLinearFn| {
                json!({
                    "breakpoints": p.breakpoints(),
                    "node_values": p.node_values(),
                    "left_tail_slope": p.left_tail_slope(),
                    "right_tail_slope": p.right_tail_slope(),
                    "r": scenario.r,
                    "t": t,
                })
            };
            std::fs::write(
                scenario.out.join("pl_diffeo.json"),
                serde_json::to_string_pretty(&wrap(&diffeo))?,
            )?;
            std::fs::write(
                scenario.out.join("pl_velocity.json"),
                serde_json::to_string_pretty(&wrap(&velocity))?,
            )?;
            println!(
                "pl: wrote exact diffeomorphism and velocity at t = {} to {}",
                fmt_f64(t),
                scenario.out.display()
            );
            Ok(Outcome::ok())
        }
        (Err(Error::BlowUp { t_star, .. }), _) | (_, Err(Error::BlowUp { t_star, .. })) => {
            let body = json!({
                "command": "pl",
                "r": scenario.r,
                "blowup_time": t_star,
            });
            std::fs::write(
                scenario.out.join("manifest.json"),
                serde_json::to_string_pretty(&body)?,
            )?;
            println!("pl: t = {t} reaches blow-up (T* = {})", fmt_f64(t_star));
            Ok(Outcome {
                blowup_reached: true,
            })
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}
