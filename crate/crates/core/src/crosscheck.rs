//! Independent Eulerian integrator for the nonlocal transport form,
//!
//! ```text
//!   u_t = -u u_x + (1 - 1/r) ∫_a^x u_x²(t, z) dz      (finite r; 1 at r = ∞)
//! ```
//!
//! a method-of-lines RK4 scheme used as a discretization-independent oracle
//! against the closed-form flows. The nonlocal term reuses the same
//! cumulative-trapezoid operator as the rest of the library, so comparisons
//! probe the time dynamics rather than quadrature conventions.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{cumulative_integral, derivative, lp_norm, Domain, GridFunction, DECAY_TOL};
use crate::nonperiodic::blowup_time;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialScheme {
    Central,
    Upwind,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: SpatialScheme,
    /// CFL number for the advective bound dt ≤ cfl·h / max|u0|.
    pub cfl: f64,
    /// Keep every `record_stride`-th step (the final step is always kept).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        Ok(IntegratorConfig {
            dt,
            scheme: SpatialScheme::Central,
            cfl: 0.4,
            record_stride: 1,
        })
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    pub fn with_scheme(mut self, scheme: SpatialScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// Early-stop reason attached to a truncated run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    /// max|u_x| exceeded the gradient-blow-up guard.
    GradientBlowup { t: f64, max_slope: f64 },
}

/// Output of [`integrate_nonlocal`]: recorded times and fields, the slope
/// norm ‖u_x(t)‖_{L^r} at each recorded time (a conservation diagnostic for
/// r ≥ 1), and the early-stop flag if the run was truncated.
#[derive(Clone, Debug)]
pub struct IntegratorRun {
    pub times: Vec<f64>,
    pub fields: Vec<GridFunction>,
    pub slope_norms: Vec<f64>,
    pub stopped: Option<StopReason>,
}

const GRADIENT_GUARD: f64 = 1e4;

fn spatial_derivative(u: &GridFunction, scheme: SpatialScheme) -> GridFunction {
    match scheme {
        SpatialScheme::Central => derivative(u),
        SpatialScheme::Upwind => {
            let n = u.n();
            let h = u.spacing();
            let v = u.values();
            let mut d = vec![0.0; n];
            for i in 0..n {
                d[i] = if v[i] >= 0.0 {
                    if i == 0 {
                        (v[1] - v[0]) / h
                    } else {
                        (v[i] - v[i - 1]) / h
                    }
                } else if i + 1 == n {
                    (v[n - 1] - v[n - 2]) / h
                } else {
                    (v[i + 1] - v[i]) / h
                };
            }
            GridFunction::new(u.domain(), d).expect("same grid")
        }
    }
}

fn rhs(u: &GridFunction, coef: f64, scheme: SpatialScheme) -> GridFunction {
    let ux = spatial_derivative(u, scheme);
    let nonlocal = cumulative_integral(&ux.map(|s| s * s)).expect("line domain");
    u.zip_with(&ux, |uv, sv| -uv * sv)
        .expect("same grid")
        .zip_with(&nonlocal, |adv, nl| adv + coef * nl)
        .expect("same grid")
}

/// Integrate the nonlocal form up to `t_end` (which must keep a 0.9 safety
/// margin to the blow-up time of the initial data).
pub fn integrate_nonlocal(
    u0: &GridFunction,
    r: Exponent,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<IntegratorRun> {
    let Domain::Line { .. } = u0.domain() else {
        return Err(Error::UnsupportedDomain(
            "the nonlocal integrator works on line windows".into(),
        ));
    };
    if u0.values()[0].abs() > DECAY_TOL {
        return Err(Error::InvalidInput(format!(
            "u0(a) = {:.3e} violates the left decay tolerance",
            u0.values()[0]
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    let t_star = blowup_time(u0, r)?;
    if t_end > 0.9 * t_star {
        return Err(Error::Config(format!(
            "t_end = {t_end} exceeds the 0.9 safety margin of T* = {t_star}"
        )));
    }
    let h = u0.spacing();
    let max_u = u0.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_u > 0.0 && cfg.dt > cfg.cfl * h / max_u {
        return Err(Error::Config(format!(
            "CFL violation: dt = {} > {:.3e} = cfl·h/max|u0|",
            cfg.dt,
            cfg.cfl * h / max_u
        )));
    }

    let coef = match r {
        Exponent::Finite(rv) => 1.0 - 1.0 / rv,
        Exponent::Infinite => 1.0,
    };
    let norm_r = match r {
        Exponent::Finite(rv) if rv >= 1.0 => Some(rv),
        Exponent::Infinite => Some(f64::INFINITY),
        _ => None,
    };

    let steps = (t_end / cfg.dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let mut u = u0.clone();
    let mut run = IntegratorRun {
        times: Vec::new(),
        fields: Vec::new(),
        slope_norms: Vec::new(),
        stopped: None,
    };
    record(&mut run, 0.0, &u, norm_r)?;

    for k in 0..steps {
        let k1 = rhs(&u, coef, cfg.scheme);
        let u2 = u.zip_with(&k1, |a, b| a + 0.5 * dt * b)?;
        let k2 = rhs(&u2, coef, cfg.scheme);
        let u3 = u.zip_with(&k2, |a, b| a + 0.5 * dt * b)?;
        let k3 = rhs(&u3, coef, cfg.scheme);
        let u4 = u.zip_with(&k3, |a, b| a + dt * b)?;
        let k4 = rhs(&u4, coef, cfg.scheme);
        let mut next = u.clone();
        next = next.zip_with(&k1, |a, b| a + dt / 6.0 * b)?;
        next = next.zip_with(&k2, |a, b| a + dt / 3.0 * b)?;
        next = next.zip_with(&k3, |a, b| a + dt / 3.0 * b)?;
        next = next.zip_with(&k4, |a, b| a + dt / 6.0 * b)?;

        let t = (k + 1) as f64 * dt;
        let max_slope = spatial_derivative(&next, cfg.scheme)
            .values()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if max_slope > GRADIENT_GUARD || !max_slope.is_finite() {
            run.stopped = Some(StopReason::GradientBlowup { t, max_slope });
            break;
        }
        u = next;
        if (k + 1) % cfg.record_stride == 0 || k + 1 == steps {
            record(&mut run, t, &u, norm_r)?;
        }
    }
    Ok(run)
}

fn record(run: &mut IntegratorRun, t: f64, u: &GridFunction, norm_r: Option<f64>) -> Result<()> {
    run.times.push(t);
    run.fields.push(u.clone());
    run.slope_norms.push(match norm_r {
        Some(rv) => lp_norm(&derivative(u), rv)?,
        None => f64::NAN,
    });
    Ok(())
}

/// Solution of the r = 1 (Burgers) case by characteristics:
/// `u(t, x + t·u0(x)) = u0(x)`, resampled onto the original grid. Valid only
/// before characteristics cross.
pub fn burgers_characteristics(u0: &GridFunction, t: f64) -> Result<GridFunction> {
    let Domain::Line { .. } = u0.domain() else {
        return Err(Error::UnsupportedDomain(
            "characteristics are set up for line windows".into(),
        ));
    };
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
    }
    let cells = crate::grid::cell_slopes(u0)?;
    let min_slope = cells.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if 1.0 + t * min_slope <= 0.0 {
        return Err(Error::Shock { t });
    }
    let feet: Vec<f64> = u0
        .points()
        .zip(u0.values())
        .map(|(x, &u)| x + t * u)
        .collect();
    let vals = crate::grid::interp_graph(&feet, u0.values(), u0.points());
    GridFunction::new(u0.domain(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use crate::nonperiodic::{exact_flow, FlowParams};

    fn gaussian(n: usize) -> GridFunction {
        GridFunction::from_fn(Domain::line(-6.0, 6.0), n, |x| (-x * x).exp()).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let u0 = GridFunction::zeros(Domain::line(-4.0, 4.0), 128).unwrap();
        let cfg = IntegratorConfig::new(1e-2).unwrap();
        let run = integrate_nonlocal(&u0, Exponent::finite(2.0).unwrap(), 1.0, &cfg).unwrap();
        assert!(run.stopped.is_none());
        for f in &run.fields {
            assert!(f.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let u0 = gaussian(256);
        let cfg = IntegratorConfig::new(0.5).unwrap();
        assert!(matches!(
            integrate_nonlocal(&u0, Exponent::finite(2.0).unwrap(), 1.0, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn safety_margin_enforced() {
        let u0 = gaussian(256);
        let cfg = IntegratorConfig::new(1e-3).unwrap();
        // T* ≈ 2.33 for r = 2
        assert!(matches!(
            integrate_nonlocal(&u0, Exponent::finite(2.0).unwrap(), 2.3, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn matches_exact_flow_velocity_r2() {
        let n = 1024;
        let u0 = gaussian(n);
        let r = Exponent::finite(2.0).unwrap();
        let t_star = crate::nonperiodic::blowup_time(&u0, r).unwrap();
        let t_end = 0.5 * t_star;
        let cfg = IntegratorConfig::new(2e-3).unwrap().with_stride(100);
        let run = integrate_nonlocal(&u0, r, t_end, &cfg).unwrap();
        assert!(run.stopped.is_none());

        let params = FlowParams::new(r, vec![0.0, t_end]).unwrap();
        let traj = exact_flow(&u0, &params).unwrap();
        let u_exact = &traj.velocities.as_ref().unwrap()[1];
        let u_num = run.fields.last().unwrap();
        let max_err = u_num
            .values()
            .iter()
            .zip(u_exact.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err < 2e-3, "max err {max_err}");
    }

    #[test]
    fn matches_exponential_flow_at_infinite_r() {
        // r = ∞ variant: u_t = -u u_x + ∫ u_x², compared against the
        // exponential closed form.
        let n = 1024;
        let u0 = gaussian(n);
        let t_end = 1.0;
        let cfg = IntegratorConfig::new(2e-3).unwrap().with_stride(200);
        let run = integrate_nonlocal(&u0, Exponent::Infinite, t_end, &cfg).unwrap();
        assert!(run.stopped.is_none());
        let params = FlowParams::new(Exponent::Infinite, vec![0.0, t_end]).unwrap();
        let traj = exact_flow(&u0, &params).unwrap();
        let max_err = run
            .fields
            .last()
            .unwrap()
            .values()
            .iter()
            .zip(traj.velocities.as_ref().unwrap()[1].values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err < 2e-3, "max err {max_err}");
    }

    #[test]
    fn slope_norm_drift_is_small() {
        let n = 1024;
        let u0 = gaussian(n);
        let r = Exponent::finite(2.0).unwrap();
        let t_star = crate::nonperiodic::blowup_time(&u0, r).unwrap();
        let cfg = IntegratorConfig::new(2e-3).unwrap().with_stride(50);
        let run = integrate_nonlocal(&u0, r, 0.5 * t_star, &cfg).unwrap();
        let s0 = run.slope_norms[0];
        for s in &run.slope_norms {
            assert!((s - s0).abs() <= 1e-3 * s0, "drift {}", (s - s0) / s0);
        }
    }

    #[test]
    fn burgers_characteristics_match_r1_flow() {
        let n = 1024;
        let u0 = gaussian(n);
        let r = Exponent::finite(1.0).unwrap();
        let t = 0.4;
        let chars = burgers_characteristics(&u0, t).unwrap();
        let params = FlowParams::new(r, vec![0.0, t]).unwrap();
        let traj = exact_flow(&u0, &params).unwrap();
        let u_flow = &traj.velocities.as_ref().unwrap()[1];
        let max_err = chars
            .values()
            .iter()
            .zip(u_flow.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err < 1e-4, "max err {max_err}");
    }

    #[test]
    fn burgers_shock_detected() {
        let u0 = gaussian(512);
        // min u0' ≈ -0.858, crossing at t ≈ 1.166
        assert!(matches!(
            burgers_characteristics(&u0, 2.0),
            Err(Error::Shock { .. })
        ));
    }

    #[test]
    fn upwind_scheme_runs() {
        let u0 = gaussian(512);
        let cfg = IntegratorConfig::new(4e-3)
            .unwrap()
            .with_scheme(SpatialScheme::Upwind)
            .with_stride(50);
        let run = integrate_nonlocal(&u0, Exponent::finite(2.0).unwrap(), 0.5, &cfg).unwrap();
        assert!(run.stopped.is_none());
        assert!(run.fields.len() > 1);
    }
}
