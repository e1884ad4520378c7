//! Exact geodesic flow, blow-up prediction and the metric-completion limit.
//!
//! The flow with initial velocity u0 is
//!
//! ```text
//!   φ(t, x) = x + ∫_a^x ( (1 + t·u0'(y)/r)^r - 1 ) dy        (finite r ≠ 0)
//!   φ(t, x) = x + ∫_a^x ( exp(t·u0'(y)) - 1 ) dy             (r = ∞)
//! ```
//!
//! evaluated with the per-cell slopes of u0, so the integrand is constant per
//! cell and the cumulative sum is the exact integral of the interpolant. For
//! r = 1 the sum telescopes to `x + t(u0(x) - u0(a))` at machine precision,
//! and piecewise-linear initial data evolves with no quadrature error at all.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{
    cell_slopes, derivative, interp_graph, midpoint_domain, Domain, GridFunction, DECAY_TOL,
};

use super::types::{Diagnostics, Diffeo, FlowParams, Trajectory};

/// Stretch factor of one cell at time t: `(1 + t·c/r)^r`, `exp(t·c)` at r = ∞.
pub(crate) fn stretch(c: f64, t: f64, r: Exponent) -> f64 {
    match r {
        Exponent::Finite(r) => (1.0 + t * c / r).powf(r),
        Exponent::Infinite => (t * c).exp(),
    }
}

/// d/dt of the stretch factor: `c·(1 + t·c/r)^(r-1)`, `c·exp(t·c)` at r = ∞.
fn stretch_rate(c: f64, t: f64, r: Exponent) -> f64 {
    match r {
        Exponent::Finite(r) => c * (1.0 + t * c / r).powf(r - 1.0),
        Exponent::Infinite => c * (t * c).exp(),
    }
}

fn base_positive(c: f64, t: f64, r: f64) -> bool {
    1.0 + t * c / r > 0.0
}

fn require_left_decay(u0: &GridFunction) -> Result<()> {
    if u0.values()[0].abs() > DECAY_TOL {
        return Err(Error::InvalidInput(format!(
            "u0(a) = {:.3e} violates the left decay tolerance {DECAY_TOL:.0e}",
            u0.values()[0]
        )));
    }
    Ok(())
}

fn blowup_from_slopes(slopes: &[f64], r: Exponent) -> f64 {
    match r {
        Exponent::Infinite => f64::INFINITY,
        Exponent::Finite(r) if r > 0.0 => {
            let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
            if min >= 0.0 {
                f64::INFINITY
            } else {
                -r / min
            }
        }
        Exponent::Finite(r) => {
            let max = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max <= 0.0 {
                f64::INFINITY
            } else {
                -r / max
            }
        }
    }
}

/// First time the flow with initial velocity u0 leaves the diffeomorphism
/// group: `-r / inf u0'` for r > 0 (∞ when u0 is nondecreasing),
/// `|r| / sup u0'` for r < 0 (∞ when u0 is nonincreasing), always ∞ at r = ∞.
/// The infimum is taken over the grid cells, which can only miss the deepest
/// slope between samples, so the reported value converges to the true T*
/// from above under refinement.
pub fn blowup_time(u0: &GridFunction, r: Exponent) -> Result<f64> {
    if u0.domain().is_circle() {
        return Err(Error::UnsupportedDomain(
            "blow-up formula applies to line-window data".into(),
        ));
    }
    let d = cell_slopes(u0)?;
    Ok(blowup_from_slopes(d.values(), r))
}

/// Run the exact flow at the requested times.
pub fn exact_flow(u0: &GridFunction, params: &FlowParams) -> Result<Trajectory> {
    let Domain::Line { a, .. } = u0.domain() else {
        return Err(Error::UnsupportedDomain(
            "exact_flow expects a line window (see the periodic module for the circle)".into(),
        ));
    };
    require_left_decay(u0)?;
    let n = u0.n();
    let h = u0.spacing();
    let cells = cell_slopes(u0)?;
    let node_slopes = derivative(u0);
    let t_star = blowup_from_slopes(cells.values(), params.r);
    for &t in &params.times {
        if t >= t_star {
            return Err(Error::BlowUp { t, t_star });
        }
        if let Exponent::Finite(r) = params.r {
            if let Some(_bad) = cells.values().iter().find(|&&c| !base_positive(c, t, r)) {
                return Err(Error::BlowUp { t, t_star });
            }
        }
    }

    let m = params.times.len();
    let mut diffeos = Vec::with_capacity(m);
    let mut phi_x = Vec::with_capacity(m);
    let mut velocities = Vec::with_capacity(m);
    let mut velocity_slopes = Vec::with_capacity(m);
    let mut diagnostics = Vec::with_capacity(m);
    let cell_domain = midpoint_domain(u0.domain(), n)?;

    for &t in &params.times {
        let sigma: Vec<f64> = cells.values().iter().map(|&c| stretch(c, t, params.r)).collect();
        let rate: Vec<f64> = cells
            .values()
            .iter()
            .map(|&c| stretch_rate(c, t, params.r))
            .collect();

        // φ nodes: x_k plus the accumulated cell displacements.
        let mut phi_vals = Vec::with_capacity(n);
        let mut disp = 0.0;
        phi_vals.push(a);
        for (k, &s) in sigma.iter().enumerate() {
            disp += h * (s - 1.0);
            phi_vals.push(a + (k + 1) as f64 * h + disp);
        }
        // Lagrangian velocity φ_t at the nodes.
        let mut w_vals = Vec::with_capacity(n);
        let mut w = 0.0;
        w_vals.push(0.0);
        for &rt in &rate {
            w += h * rt;
            w_vals.push(w);
        }

        let phi = GridFunction::new(u0.domain(), phi_vals)?;
        let diffeo = Diffeo::new(phi)?;

        // Eulerian fields back on the original window; samples beyond the
        // image of the window clamp to the rightmost Lagrangian value.
        let u_vals = interp_graph(
            diffeo.phi().values(),
            &w_vals,
            (0..n).map(|k| u0.x(k)),
        );
        let q_nodes: Vec<f64> = node_slopes
            .values()
            .iter()
            .map(|&s| match params.r {
                Exponent::Finite(r) => s / (1.0 + t * s / r),
                Exponent::Infinite => s,
            })
            .collect();
        let ux_vals = interp_graph(diffeo.phi().values(), &q_nodes, (0..n).map(|k| u0.x(k)));

        let finsler_speed = lagrangian_slope_norm(cells.values(), &sigma, t, params.r, h);
        let min_phi_x = sigma.iter().cloned().fold(f64::INFINITY, f64::min);

        phi_x.push(GridFunction::new(cell_domain, sigma)?);
        velocities.push(GridFunction::new(u0.domain(), u_vals)?);
        velocity_slopes.push(GridFunction::new(u0.domain(), ux_vals)?);
        diagnostics.push(Diagnostics {
            finsler_speed,
            min_phi_x,
        });
        diffeos.push(diffeo);
    }

    Ok(Trajectory {
        params: params.clone(),
        diffeos,
        phi_x,
        velocities: Some(velocities),
        velocity_slopes: Some(velocity_slopes),
        diagnostics,
        initial_velocity: Some(u0.clone()),
        blowup_time: t_star,
    })
}

/// `‖u_x(t)‖_{L^r}` evaluated by the Lagrangian change of variables
/// `∫ |u_x ∘ φ|^r φ_x dx`, the constant Finsler speed of the flow.
fn lagrangian_slope_norm(cells: &[f64], sigma: &[f64], t: f64, r: Exponent, h: f64) -> Option<f64> {
    match r {
        Exponent::Infinite => Some(cells.iter().fold(0.0_f64, |m, c| m.max(c.abs()))),
        Exponent::Finite(r) if r >= 1.0 => {
            let mut sum = 0.0;
            for (&c, &s) in cells.iter().zip(sigma) {
                let ux = c / (1.0 + t * c / r);
                sum += h * ux.abs().powf(r) * s;
            }
            Some(sum.powf(1.0 / r))
        }
        // For r < 1 the integral is not a norm (and diverges where u_x -> 0
        // when r < 0), so no speed is reported.
        Exponent::Finite(_) => None,
    }
}

/// Eulerian velocity u(t_k, ·) on the original window grid. Available for
/// trajectories produced by [`exact_flow`].
pub fn eulerian_velocity(traj: &Trajectory, time_index: usize) -> Result<GridFunction> {
    let fields = traj.velocities.as_ref().ok_or_else(|| {
        Error::InsufficientData("trajectory carries no Eulerian velocities".into())
    })?;
    fields
        .get(time_index)
        .cloned()
        .ok_or_else(|| Error::InsufficientData(format!("no time sample {time_index}")))
}

/// The t → T* limit map. It lies in the metric completion (nondecreasing,
/// left-anchored) but not in the group: min φ_x = 0.
#[derive(Clone, Debug)]
pub struct BlowupLimit {
    pub phi: GridFunction,
    pub phi_x: GridFunction,
    pub min_phi_x: f64,
    pub t_star: f64,
}

/// Evaluate the flow at its blow-up time (finite r > 0 only; for r < 0 the
/// stretch diverges instead of vanishing and no limit map exists).
pub fn continue_to_blowup(u0: &GridFunction, r: f64) -> Result<BlowupLimit> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!(
            "the completion limit needs finite r > 0, got {r}"
        )));
    }
    require_left_decay(u0)?;
    let cells = cell_slopes(u0)?;
    let t_star = blowup_from_slopes(cells.values(), Exponent::Finite(r));
    if !t_star.is_finite() {
        return Err(Error::NoBlowUp);
    }
    let Domain::Line { a, .. } = u0.domain() else {
        unreachable!()
    };
    let h = u0.spacing();
    // base ≥ 0 mathematically; clamp the rounding of t*·c/r at the minimizer.
    let sigma: Vec<f64> = cells
        .values()
        .iter()
        .map(|&c| (1.0 + t_star * c / r).max(0.0).powf(r))
        .collect();
    let mut phi_vals = Vec::with_capacity(u0.n());
    let mut disp = 0.0;
    phi_vals.push(a);
    for (k, &s) in sigma.iter().enumerate() {
        disp += h * (s - 1.0);
        phi_vals.push(a + (k + 1) as f64 * h + disp);
    }
    let min_phi_x = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BlowupLimit {
        phi: GridFunction::new(u0.domain(), phi_vals)?,
        phi_x: GridFunction::new(midpoint_domain(u0.domain(), u0.n())?, sigma)?,
        min_phi_x,
        t_star,
    })
}

/// Membership in the discrete metric completion: nondecreasing and anchored
/// to the identity at the left edge.
pub fn in_monotone_completion(phi: &GridFunction) -> bool {
    let Domain::Line { a, .. } = phi.domain() else {
        return false;
    };
    if (phi.values()[0] - a).abs() > DECAY_TOL {
        return false;
    }
    let scale = phi
        .values()
        .iter()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    phi.values()
        .windows(2)
        .all(|w| w[1] >= w[0] - 1e-12 * scale)
}
