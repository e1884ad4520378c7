//! Residual verifiers for the governing equations.
//!
//! Lagrangian form, any λ:         d/dt(φ_tx/φ_x) + λ (φ_tx/φ_x)² = 0
//! Eulerian λ-PJ form:             u_txx + (1+2λ) u_x u_xx + u u_xxx = 0
//! Eulerian λ = 0 (r = ∞) form:    u_xt + u_xx u = 0
//!
//! Time derivatives use second-order three-point differences (one-sided at
//! the first and last sample), so residuals of exact flows converge at
//! O(Δt²). Third space derivatives amplify sample noise by 1/h³; feed these
//! verifiers smoothly sampled fields.

use crate::error::{Error, Result};
use crate::grid::{derivative, GridFunction};

use super::types::Trajectory;

/// Second-order time derivative of a sequence of fields on a (possibly
/// nonuniform) strictly increasing time grid.
pub(crate) fn time_derivative_samples(
    times: &[f64],
    fields: &[GridFunction],
) -> Result<Vec<GridFunction>> {
    if times.len() != fields.len() {
        return Err(Error::InvalidInput(format!(
            "{} times but {} fields",
            times.len(),
            fields.len()
        )));
    }
    if times.len() < 3 {
        return Err(Error::InsufficientData(
            "time differencing needs at least three samples".into(),
        ));
    }
    let m = times.len();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let (i0, i1, i2) = if j == 0 {
            (0, 1, 2)
        } else if j == m - 1 {
            (m - 3, m - 2, m - 1)
        } else {
            (j - 1, j, j + 1)
        };
        let (t0, t1, t2) = (times[i0], times[i1], times[i2]);
        let t = times[j];
        // Derivative of the quadratic through the three samples, at t.
        let c0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
        let c1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
        let c2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
        let d = fields[i0]
            .zip_with(&fields[i1], |a, b| c0 * a + c1 * b)?
            .zip_with(&fields[i2], |ab, c| ab + c2 * c)?;
        out.push(d);
    }
    Ok(out)
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Max-norm residual of the Lagrangian equation over interior times and all
/// cells, using the trajectory's stored stretch factors.
///
/// With q = φ_tx/φ_x the equation expands by the chain rule to
/// `φ_ttx/φ_x + (λ - 1) q² = 0`, which needs only the three adjacent time
/// slices per interior time: a central first and second difference of φ_x.
pub fn lagrangian_residual(traj: &Trajectory, lambda: f64) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::InsufficientData(
            "Lagrangian residual needs at least three time samples".into(),
        ));
    }
    let times = traj.times();
    let mut worst = 0.0_f64;
    for j in 1..times.len() - 1 {
        let (dm, dp) = (times[j] - times[j - 1], times[j + 1] - times[j]);
        let (pm, pc, pp) = (&traj.phi_x[j - 1], &traj.phi_x[j], &traj.phi_x[j + 1]);
        // first derivative of the interpolating quadratic at t_j
        let c0 = -dp / (dm * (dm + dp));
        let c1 = (dp - dm) / (dm * dp);
        let c2 = dm / (dp * (dm + dp));
        // second derivative of the interpolating quadratic
        let s0 = 2.0 / (dm * (dm + dp));
        let s1 = -2.0 / (dm * dp);
        let s2 = 2.0 / (dp * (dm + dp));
        let n = pc.n();
        let mut local = 0.0_f64;
        for i in 0..n {
            let (a, b, c) = (pm.values()[i], pc.values()[i], pp.values()[i]);
            let q = (c0 * a + c1 * b + c2 * c) / b;
            let ttx = s0 * a + s1 * b + s2 * c;
            local = local.max((ttx / b + (lambda - 1.0) * q * q).abs());
        }
        worst = worst.max(local);
    }
    Ok(worst)
}

fn interior_max(f: &GridFunction, trim: usize) -> f64 {
    let v = f.values();
    if f.domain().is_circle() || v.len() <= 2 * trim {
        max_abs(v)
    } else {
        max_abs(&v[trim..v.len() - trim])
    }
}

/// Max-norm residual of the λ-PJ equation `u_txx + (1+2λ) u_x u_xx + u u_xxx`
/// over interior times and grid points. Third space derivatives are repeated
/// central differences; a few samples at each window edge are excluded where
/// the one-sided stencils stack up.
pub fn pj_residual(times: &[f64], fields: &[GridFunction], lambda: f64) -> Result<f64> {
    if fields.len() < 3 {
        return Err(Error::InsufficientData(
            "PJ residual needs at least three time samples".into(),
        ));
    }
    let u_x: Vec<GridFunction> = fields.iter().map(derivative).collect();
    let u_xx: Vec<GridFunction> = u_x.iter().map(derivative).collect();
    let u_xxx: Vec<GridFunction> = u_xx.iter().map(derivative).collect();
    let u_txx = time_derivative_samples(times, &u_xx)?;
    let mut worst = 0.0_f64;
    for j in 1..times.len() - 1 {
        let transport = fields[j]
            .zip_with(&u_xxx[j], |u, uxxx| u * uxxx)?
            .zip_with(&u_x[j].zip_with(&u_xx[j], |a, b| a * b)?, |t, s| {
                t + (1.0 + 2.0 * lambda) * s
            })?;
        let res = u_txx[j].zip_with(&transport, |a, b| a + b)?;
        worst = worst.max(interior_max(&res, 4));
    }
    Ok(worst)
}

/// Max-norm residual of the r = ∞ Eulerian equation `u_xt + u_xx u = 0`.
pub fn infinity_euler_residual(times: &[f64], fields: &[GridFunction]) -> Result<f64> {
    if fields.len() < 3 {
        return Err(Error::InsufficientData(
            "residual needs at least three time samples".into(),
        ));
    }
    let u_x: Vec<GridFunction> = fields.iter().map(derivative).collect();
    let u_xx: Vec<GridFunction> = u_x.iter().map(derivative).collect();
    let u_xt = time_derivative_samples(times, &u_x)?;
    let mut worst = 0.0_f64;
    for j in 1..times.len() - 1 {
        let res = u_xt[j].zip_with(&fields[j].zip_with(&u_xx[j], |u, uxx| u * uxx)?, |a, b| {
            a + b
        })?;
        worst = worst.max(interior_max(&res, 3));
    }
    Ok(worst)
}
