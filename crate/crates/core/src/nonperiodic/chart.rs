//! The flat chart and everything it buys: the Finsler norm, explicit geodesic
//! distance, and boundary-value geodesics as pulled-back straight segments.
//!
//! ```text
//!   Φ(φ)    = r (φ_x^{1/r} - 1)                    (image: f > -r)
//!   Φ⁻¹(f)  = x + ∫_a^x ( (f/r + 1)^r - 1 )
//! ```
//!
//! Chart data lives on the midpoint grid (one value per cell of the node
//! grid), so Φ and Φ⁻¹ invert each other at machine precision and the image
//! of a flow is literally the straight line t·u0'.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{
    derivative, integral, lp_norm, midpoint_domain, Domain, GridFunction, DECAY_TOL,
};

use super::types::{Diagnostics, Diffeo, FlowParams, Trajectory};

fn require_positive_r(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!(
            "the flat chart needs finite r > 0, got {r}"
        )));
    }
    Ok(())
}

fn require_norm_range(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "L^r geometry needs r >= 1, got {r} (the chart map itself allows any r > 0)"
        )));
    }
    Ok(())
}

/// Chart coordinates of a diffeomorphism: `f = r(φ_x^{1/r} - 1)` per cell.
/// The isometry statement holds for r ≥ 1; smaller positive r still gives a
/// valid chart for the solution formulas.
pub fn to_flat(phi: &Diffeo, r: f64) -> Result<GridFunction> {
    require_positive_r(r)?;
    Ok(phi.slopes().map(|s| r * (s.powf(1.0 / r) - 1.0)))
}

/// Pull chart data back to a diffeomorphism. `f` must stay above `-r`
/// (the image characterization) and vanish at the left edge.
pub fn from_flat(f: &GridFunction, r: f64) -> Result<Diffeo> {
    require_positive_r(r)?;
    let Domain::Line { a: fa, .. } = f.domain() else {
        return Err(Error::UnsupportedDomain(
            "chart data lives on a line window".into(),
        ));
    };
    if let Some(index) = f.values().iter().position(|&v| v <= -r) {
        return Err(Error::OutOfImage { index });
    }
    if f.values()[0].abs() > DECAY_TOL {
        return Err(Error::InvalidInput(format!(
            "chart data must vanish at the left edge: f(a) = {:.3e}",
            f.values()[0]
        )));
    }
    let h = f.spacing();
    let a = fa - 0.5 * h;
    let mut phi_vals = Vec::with_capacity(f.n() + 1);
    let mut disp = 0.0;
    phi_vals.push(a);
    for (k, &v) in f.values().iter().enumerate() {
        disp += h * ((v / r + 1.0).powf(r) - 1.0);
        phi_vals.push(a + (k + 1) as f64 * h + disp);
    }
    let b = a + f.n() as f64 * h;
    Diffeo::new(GridFunction::new(Domain::line(a, b), phi_vals)?)
}

/// Geodesic distance `‖Φ(φ0) - Φ(φ1)‖_{L^r}`; zero exactly when the two maps
/// agree on the grid.
pub fn geodesic_distance(phi0: &Diffeo, phi1: &Diffeo, r: f64) -> Result<f64> {
    require_norm_range(r)?;
    if phi0.phi().domain() != phi1.phi().domain() || phi0.n() != phi1.n() {
        return Err(Error::DomainMismatch(
            "distance needs both maps on the same grid".into(),
        ));
    }
    let f0 = to_flat(phi0, r)?;
    let f1 = to_flat(phi1, r)?;
    lp_norm(&f0.zip_with(&f1, |a, b| a - b)?, r)
}

/// Right-invariant Finsler norm of a tangent vector h at φ:
/// `F_φ(h) = (∫ φ_x^{1-r} |h_x|^r dx)^{1/r}`, the composition-free form.
pub fn finsler_norm(phi: &Diffeo, h: &GridFunction, r: f64) -> Result<f64> {
    require_norm_range(r)?;
    if h.domain() != phi.phi().domain() || h.n() != phi.n() {
        return Err(Error::DomainMismatch(
            "tangent vector must be sampled on the diffeomorphism's grid".into(),
        ));
    }
    let phi_x = derivative(phi.phi());
    if let Some(index) = phi_x.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::MonotonicityViolation { index });
    }
    let h_x = derivative(h);
    let integrand = phi_x.zip_with(&h_x, |px, hx| px.powf(1.0 - r) * hx.abs().powf(r))?;
    Ok(integral(&integrand).max(0.0).powf(1.0 / r))
}

/// Action of a trajectory: `E_r = ∫ ∫ |φ_tx/φ_x|^r φ_x dx dt` over the
/// trajectory's own time interval, with second-order time differences.
pub fn path_energy(traj: &Trajectory, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidInput(format!("energy needs finite r >= 1, got {r}")));
    }
    if traj.len() < 2 {
        return Err(Error::InsufficientData(
            "energy needs at least two time samples".into(),
        ));
    }
    let times = traj.times();
    let phi_tx = super::time_derivative_samples(times, &traj.phi_x)?;
    let mut action_density = Vec::with_capacity(traj.len());
    for (px, ptx) in traj.phi_x.iter().zip(&phi_tx) {
        let integrand = ptx.zip_with(px, |tx, x| (tx / x).abs().powf(r) * x)?;
        action_density.push(integral(&integrand));
    }
    let mut e = 0.0;
    for j in 0..times.len() - 1 {
        e += 0.5 * (times[j + 1] - times[j]) * (action_density[j] + action_density[j + 1]);
    }
    Ok(e)
}

/// Minimizing geodesic between two boundary maps: the straight chart segment
/// `(1-s)Φ(φ0) + sΦ(φ1)` pulled back through Φ⁻¹. Convexity of the image
/// keeps every intermediate map a diffeomorphism. Unique for r > 1; at r = 1
/// the segment is still returned but minimizers need not be unique.
#[derive(Clone, Debug)]
pub struct BvpSolution {
    pub trajectory: Trajectory,
    pub unique: bool,
}

pub fn bvp_geodesic(
    phi0: &Diffeo,
    phi1: &Diffeo,
    r: f64,
    s_values: &[f64],
) -> Result<BvpSolution> {
    require_norm_range(r)?;
    if phi0.phi().domain() != phi1.phi().domain() || phi0.n() != phi1.n() {
        return Err(Error::DomainMismatch(
            "boundary maps must share a grid".into(),
        ));
    }
    if s_values.last() != Some(&1.0) {
        return Err(Error::InvalidInput(
            "parameter grid must end at s = 1".into(),
        ));
    }
    let params = FlowParams::new(Exponent::finite(r)?, s_values.to_vec())?;

    let f0 = to_flat(phi0, r)?;
    let f1 = to_flat(phi1, r)?;
    let speed = lp_norm(&f0.zip_with(&f1, |a, b| b - a)?, r)?;
    let cell_domain = midpoint_domain(phi0.phi().domain(), phi0.n())?;

    let mut diffeos = Vec::with_capacity(s_values.len());
    let mut phi_x = Vec::with_capacity(s_values.len());
    let mut diagnostics = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let fs = f0.zip_with(&f1, |a, b| (1.0 - s) * a + s * b)?;
        let d = from_flat(&fs, r)?;
        phi_x.push(GridFunction::new(cell_domain, d.slopes().values().to_vec())?);
        diagnostics.push(Diagnostics {
            finsler_speed: Some(speed),
            min_phi_x: d.min_slope(),
        });
        diffeos.push(d);
    }

    Ok(BvpSolution {
        trajectory: Trajectory {
            params,
            diffeos,
            phi_x,
            velocities: None,
            velocity_slopes: None,
            diagnostics,
            initial_velocity: None,
            blowup_time: f64::INFINITY,
        },
        unique: r > 1.0,
    })
}
