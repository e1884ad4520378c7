//! The periodic theory: circle diffeomorphisms fixing 0, the chart onto the
//! L^r-sphere of radius r, and a constrained variational geodesic solver.
//!
//! ```text
//!   Φ(φ)   = r · φ_x^{1/r}          image: { f > 0, ‖f‖_{L^r} = r }
//!   Φ⁻¹(f) = r^{-r} ∫_0^x |f|^r
//! ```
//!
//! The circle is identified with [0, 1]; diffeomorphisms are stored as lifts
//! with φ(0) = 0, φ(1) = 1. Chart data carries one value per grid cell, so
//! `∫ φ_x = 1` telescopes exactly and the sphere constraint holds to rounding
//! accuracy by construction.
//!
//! No explicit geodesic equation is available on the sphere for general r;
//! the solver discretizes the kinetic action `Σ Δt ‖(f_{k+1}-f_k)/Δt‖_r^r`
//! with a per-step Lagrange multiplier for the constraint and a radial
//! projection that absorbs the residual drift.

use crate::error::{Error, Result};
use crate::grid::{integral, interp_graph, lp_norm, Domain, GridFunction};
use crate::nonperiodic::Diagnostics;

/// Default tolerance on the sphere constraint, scaled by the radius r.
pub const SPHERE_TOL_FACTOR: f64 = 1e-8;

/// min-f threshold that stops the geodesic solver: the discrete proxy for
/// leaving the open image set (periodic blow-up).
pub const BOUNDARY_TOL: f64 = 1e-4;

/// An orientation-preserving circle diffeomorphism fixing 0, stored as the
/// lift on [0, 1] with φ(0) = 0 and φ(1) = 1.
#[derive(Clone, Debug)]
pub struct PeriodicDiffeo {
    phi: GridFunction,
    slopes: GridFunction,
    min_slope: f64,
}

impl PeriodicDiffeo {
    pub fn new(phi: GridFunction) -> Result<Self> {
        if !phi.domain().is_circle() {
            return Err(Error::UnsupportedDomain(
                "periodic diffeomorphisms live on the circle".into(),
            ));
        }
        if phi.values()[0].abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "lift must satisfy φ(0) = 0, got {:.3e}",
                phi.values()[0]
            )));
        }
        // anchor exactly
        let shift = phi.values()[0];
        let phi = if shift == 0.0 { phi } else { phi.map(|v| v - shift) };
        let n = phi.n();
        let h = phi.spacing();
        let v = phi.values();
        let mut slopes = Vec::with_capacity(n);
        for i in 0..n {
            let next = if i + 1 == n { 1.0 } else { v[i + 1] };
            slopes.push((next - v[i]) / h);
        }
        for (index, w) in v.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::MonotonicityViolation { index });
            }
        }
        if v[n - 1] >= 1.0 {
            return Err(Error::MonotonicityViolation { index: n - 1 });
        }
        let slopes = GridFunction::new(Domain::Circle, slopes)?;
        let min_slope = slopes.values().iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(PeriodicDiffeo {
            phi,
            slopes,
            min_slope,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        PeriodicDiffeo::new(GridFunction::from_fn(Domain::Circle, n, |x| x)?)
    }

    /// The lift values on [0, 1).
    pub fn phi(&self) -> &GridFunction {
        &self.phi
    }

    pub fn n(&self) -> usize {
        self.phi.n()
    }

    /// Per-cell slopes of the lift (all positive, mean exactly 1).
    pub fn slopes(&self) -> &GridFunction {
        &self.slopes
    }

    pub fn min_slope(&self) -> f64 {
        self.min_slope
    }
}

/// A point of the chart image: f > 0 on the circle with ‖f‖_{L^r} = r.
#[derive(Clone, Debug)]
pub struct SphereFn {
    f: GridFunction,
    r: f64,
}

impl SphereFn {
    pub fn new(f: GridFunction, r: f64) -> Result<Self> {
        SphereFn::with_tolerance(f, r, SPHERE_TOL_FACTOR * r)
    }

    pub fn with_tolerance(f: GridFunction, r: f64, tol: f64) -> Result<Self> {
        if !f.domain().is_circle() {
            return Err(Error::UnsupportedDomain("sphere data lives on the circle".into()));
        }
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "the sphere chart needs finite r >= 1, got {r}"
            )));
        }
        if let Some(index) = f.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::MonotonicityViolation { index });
        }
        let deviation = (lp_norm(&f, r)? - r).abs();
        if deviation > tol {
            return Err(Error::OffSphere { deviation, tol });
        }
        Ok(SphereFn { f, r })
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }
}

/// Chart map onto the sphere: `f = r · φ_x^{1/r}` per cell.
pub fn to_sphere(phi: &PeriodicDiffeo, r: f64) -> Result<SphereFn> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "the sphere chart needs finite r >= 1, got {r}"
        )));
    }
    let f = phi.slopes().map(|s| r * s.powf(1.0 / r));
    SphereFn::new(f, r)
}

/// Inverse chart: `φ(x) = r^{-r} ∫_0^x |f|^r`, renormalized by its total so
/// that φ(1) = 1 exactly (the total absorbs quadrature rounding).
pub fn from_sphere(sf: &SphereFn) -> Result<PeriodicDiffeo> {
    let r = sf.r;
    let n = sf.f.n();
    let h = sf.f.spacing();
    let weights: Vec<f64> = sf.f.values().iter().map(|&v| v.abs().powf(r)).collect();
    let total: f64 = weights.iter().sum::<f64>() * h;
    let mut phi = Vec::with_capacity(n);
    let mut acc = 0.0;
    phi.push(0.0);
    for &w in weights.iter().take(n - 1) {
        acc += h * w;
        phi.push(acc / total);
    }
    PeriodicDiffeo::new(GridFunction::new(Domain::Circle, phi)?)
}

fn inner(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    Ok(integral(&a.zip_with(b, |x, y| x * y)?))
}

/// Right-invariant Finsler norm on the circle,
/// `F_φ(h) = (∫ φ_x^{1-r} |h_x|^r)^{1/r}`, evaluated per cell of the lift.
/// The tangent vector h is a periodic function with h(0) = 0.
pub fn finsler_norm(phi: &PeriodicDiffeo, h: &GridFunction, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "the Finsler norm needs finite r >= 1, got {r}"
        )));
    }
    if !h.domain().is_circle() || h.n() != phi.n() {
        return Err(Error::DomainMismatch(
            "tangent vector must live on the diffeomorphism's circle grid".into(),
        ));
    }
    let hx = crate::grid::cell_slopes(h)?;
    let integrand = phi
        .slopes()
        .zip_with(&hx, |px, sx| px.powf(1.0 - r) * sx.abs().powf(r))?;
    Ok(integral(&integrand).max(0.0).powf(1.0 / r))
}

/// Remove from g its component along the constraint gradient `f^{r-1}`, so
/// the derivative of `‖f‖_r^r` in the returned direction vanishes.
pub fn tangent_project(sf: &SphereFn, g: &GridFunction) -> Result<GridFunction> {
    let grad = sf.f.map(|v| v.powf(sf.r - 1.0));
    let coeff = inner(&grad, g)? / inner(&grad, &grad)?;
    g.zip_with(&grad, |gv, gr| gv - coeff * gr)
}

/// A periodic geodesic: sphere path, diffeomorphisms, Eulerian velocities
/// and per-time diagnostics. `slope_norm` records ‖u_x‖_{L^r} along the way;
/// whether it is conserved for general r is left as a reported diagnostic.
#[derive(Clone, Debug)]
pub struct PeriodicTrajectory {
    pub r: f64,
    pub times: Vec<f64>,
    pub sphere_path: Vec<GridFunction>,
    pub diffeos: Vec<PeriodicDiffeo>,
    pub velocities: Vec<GridFunction>,
    pub diagnostics: Vec<Diagnostics>,
    pub constraint_drift: f64,
    pub slope_norm: Vec<f64>,
}

/// Pointwise duality map `J(v) = |v|^{r-2} v` and its inverse; both are
/// powers of |v| with positive exponents, so v = 0 is regular.
fn duality(v: f64, r: f64) -> f64 {
    v.signum() * v.abs().powf(r - 1.0)
}

fn duality_inv(w: f64, r: f64) -> f64 {
    w.signum() * w.abs().powf(1.0 / (r - 1.0))
}

fn normalize(f: &mut [f64], r: f64, h: f64) -> f64 {
    let total: f64 = f.iter().map(|&v| v.abs().powf(r)).sum::<f64>() * h;
    let norm = total.powf(1.0 / r);
    let scale = r / norm;
    for v in f.iter_mut() {
        *v *= scale;
    }
    norm
}

/// ‖f‖_r^r on the cell grid.
fn norm_power(f: &[f64], r: f64, h: f64) -> f64 {
    f.iter().map(|&v| v.abs().powf(r)).sum::<f64>() * h
}

/// One discrete Euler-Lagrange step: find μ so that
/// `f_next = f + J⁻¹(J(f - f_prev) - μ J(f))` lands back on the sphere,
/// then project radially. Safeguarded Newton on the scalar constraint; the
/// wanted root is the small one near μ = 0 (large μ overshoots to the far
/// side of the sphere), well inside the initial bracket ±‖w‖_∞.
fn el_step(f_prev: &[f64], f: &[f64], r: f64, h: f64) -> Result<Vec<f64>> {
    let n = f.len();
    let w: Vec<f64> = (0..n).map(|i| duality(f[i] - f_prev[i], r)).collect();
    let grad: Vec<f64> = f.iter().map(|&v| duality(v, r)).collect();
    let target = r.powf(r);

    let candidate = |mu: f64| -> Vec<f64> {
        (0..n)
            .map(|i| f[i] + duality_inv(w[i] - mu * grad[i], r))
            .collect()
    };
    // residual of the constraint and its μ-derivative
    let eval = |mu: f64| -> (f64, f64) {
        let mut g = -target;
        let mut dg = 0.0;
        for i in 0..n {
            let s = w[i] - mu * grad[i];
            let c = f[i] + duality_inv(s, r);
            g += h * c.abs().powf(r);
            if s != 0.0 {
                let dinv = s.abs().powf((2.0 - r) / (r - 1.0)) / (r - 1.0);
                dg += h * r * c.abs().powf(r - 1.0) * c.signum() * (-grad[i] * dinv);
            }
        }
        (g, dg)
    };

    // A vanishing multiplier already solves the constraint for stationary
    // steps (w = 0); skip the bracketing in that case.
    let g0 = eval(0.0).0;
    if g0.abs() <= 1e-13 * target {
        let mut next = candidate(0.0);
        normalize(&mut next, r, h);
        return Ok(next);
    }

    let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let (mut lo, mut hi) = (-scale, scale);
    let mut g_lo = eval(lo).0;
    let mut g_hi = eval(hi).0;
    let mut expansions = 0;
    while g_lo.signum() == g_hi.signum() {
        lo *= 4.0;
        hi *= 4.0;
        g_lo = eval(lo).0;
        g_hi = eval(hi).0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::InvalidInput(
                "sphere-step multiplier could not be bracketed".into(),
            ));
        }
    }
    let mut mu = 0.0_f64.clamp(lo, hi);
    for _ in 0..60 {
        let (g, dg) = eval(mu);
        if g.abs() <= 1e-13 * target {
            break;
        }
        if g.signum() == g_lo.signum() {
            lo = mu;
            g_lo = g;
        } else {
            hi = mu;
        }
        let newton = mu - g / dg;
        mu = if dg.is_finite() && dg != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let mut next = candidate(mu);
    normalize(&mut next, r, h);
    Ok(next)
}

/// Integrate the sphere geodesic with initial velocity u0 (a circle function
/// with u0(0) = 0) and record the requested times. `dt` is the internal step;
/// requested times snap to the nearest step, and the trajectory reports the
/// snapped values.
pub fn sphere_geodesic(
    u0: &GridFunction,
    r: f64,
    times: &[f64],
    dt: f64,
) -> Result<PeriodicTrajectory> {
    if !u0.domain().is_circle() {
        return Err(Error::UnsupportedDomain("periodic flow needs circle data".into()));
    }
    if !(r.is_finite() && r > 1.0) {
        return Err(Error::InvalidInput(format!(
            "the variational solver needs finite r > 1, got {r}"
        )));
    }
    if u0.values()[0].abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "u0(0) = {:.3e}; the section of the rotation quotient requires u0(0) = 0",
            u0.values()[0]
        )));
    }
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::InvalidInput("times must start at 0".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let t_end = *times.last().unwrap();
    if t_end <= 0.0 {
        return Err(Error::InvalidInput("need a positive final time".into()));
    }
    let n = u0.n();
    let h = u0.spacing();
    let steps = ((t_end / dt).round() as usize).max(2);
    let dt = t_end / steps as f64;

    // Initial sphere data: f0 = Φ(id) ≡ r, g0 = u0' per cell (tangent by
    // periodicity: Σ g0 telescopes to zero).
    let f0 = vec![r; n];
    let g0: Vec<f64> = (0..n)
        .map(|i| (u0.values()[(i + 1) % n] - u0.values()[i]) / h)
        .collect();

    let record_steps: Vec<usize> = times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(steps))
        .collect();
    let wanted = |k: usize| {
        record_steps
            .iter()
            .any(|&rk| k + 2 >= rk && k <= rk + 2)
    };

    let mut path: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut f_prev = f0.clone();
    let mut f_curr: Vec<f64> = (0..n).map(|i| f0[i] + dt * g0[i]).collect();
    normalize(&mut f_curr, r, h);

    if wanted(0) {
        path.push((0, f0.clone()));
    }
    if wanted(1) {
        path.push((1, f_curr.clone()));
    }

    let check_boundary = |k: usize, f: &[f64]| -> Result<()> {
        let min_f = f.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_f < BOUNDARY_TOL {
            return Err(Error::BoundaryHit {
                t: k as f64 * dt,
                min_f,
            });
        }
        Ok(())
    };
    check_boundary(1, &f_curr)?;

    let mut drift = 0.0_f64;
    for k in 1..steps {
        let f_next = el_step(&f_prev, &f_curr, r, h)?;
        check_boundary(k + 1, &f_next)?;
        drift = drift.max((norm_power(&f_next, r, h).powf(1.0 / r) - r).abs());
        f_prev = f_curr;
        f_curr = f_next;
        if wanted(k + 1) {
            path.push((k + 1, f_curr.clone()));
        }
    }

    let fetch = |k: usize| -> &Vec<f64> {
        path.iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, f)| f)
            .expect("neighbourhood of every recorded step is stored")
    };

    let mut sphere_path = Vec::with_capacity(times.len());
    let mut diffeos = Vec::with_capacity(times.len());
    let mut velocities = Vec::with_capacity(times.len());
    let mut diagnostics = Vec::with_capacity(times.len());
    let mut slope_norm = Vec::with_capacity(times.len());

    for &k in &record_steps {
        let f_k = fetch(k);
        let fg = GridFunction::new(Domain::Circle, f_k.clone())?;
        let sf = SphereFn::with_tolerance(fg.clone(), r, 1e-6 * r)?;
        let diffeo = from_sphere(&sf)?;

        // φ_t by second-order differences of neighbouring steps, then
        // u = φ_t ∘ φ⁻¹ read off the Lagrangian graph.
        let stencil: [(usize, f64); 3] = if k == 0 {
            [(0, -1.5), (1, 2.0), (2, -0.5)]
        } else if k == steps {
            [(k, 1.5), (k - 1, -2.0), (k - 2, 0.5)]
        } else {
            [(k - 1, -0.5), (k, 0.0), (k + 1, 0.5)]
        };
        let mut phi_t = vec![0.0; n];
        let mut f_t = vec![0.0; n];
        for (kk, c) in stencil {
            if c == 0.0 {
                continue;
            }
            let lift = diffeo_lift(fetch(kk), r, h)?;
            for i in 0..n {
                phi_t[i] += c * lift[i] / dt;
                f_t[i] += c * fetch(kk)[i] / dt;
            }
        }
        let phi_lift = diffeo_lift(f_k, r, h)?;
        let u_vals = cyclic_graph_interp(&phi_lift, &phi_t, n);
        let u = GridFunction::new(Domain::Circle, u_vals)?;

        let speed = if k == 0 {
            lp_norm(&GridFunction::new(Domain::Circle, g0.clone())?, r)?
        } else {
            lp_norm(&GridFunction::new(Domain::Circle, f_t.clone())?, r)?
        };
        let ux = crate::grid::cell_slopes(&u)?;
        slope_norm.push(lp_norm(&ux, r)?);
        diagnostics.push(Diagnostics {
            finsler_speed: Some(speed),
            min_phi_x: diffeo.min_slope(),
        });
        sphere_path.push(fg);
        velocities.push(u);
        diffeos.push(diffeo);
    }

    Ok(PeriodicTrajectory {
        r,
        times: record_steps.iter().map(|&k| k as f64 * dt).collect(),
        sphere_path,
        diffeos,
        velocities,
        diagnostics,
        constraint_drift: drift,
        slope_norm,
    })
}

/// Lift values of Φ⁻¹(f) without constructing the full type.
fn diffeo_lift(f: &[f64], r: f64, h: f64) -> Result<Vec<f64>> {
    let weights: Vec<f64> = f.iter().map(|&v| v.abs().powf(r)).collect();
    let total: f64 = weights.iter().sum::<f64>() * h;
    if total <= 0.0 {
        return Err(Error::InvalidInput("degenerate sphere function".into()));
    }
    let mut phi = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    phi.push(0.0);
    for &w in weights.iter().take(f.len() - 1) {
        acc += h * w;
        phi.push(acc / total);
    }
    Ok(phi)
}

/// Interpolate a cyclic monotone graph (φ_i, y_i) at the n uniform circle
/// nodes, extending one period on each side.
fn cyclic_graph_interp(phi: &[f64], y: &[f64], n: usize) -> Vec<f64> {
    let m = phi.len();
    let mut xs = Vec::with_capacity(m + 2);
    let mut ys = Vec::with_capacity(m + 2);
    xs.push(phi[m - 1] - 1.0);
    ys.push(y[m - 1]);
    xs.extend_from_slice(phi);
    ys.extend_from_slice(y);
    xs.push(phi[0] + 1.0);
    ys.push(y[0]);
    interp_graph(&xs, &ys, (0..n).map(|i| i as f64 / n as f64))
}

/// Great circle on the radius-2 L²-sphere: the exact geodesic for r = 2,
/// used as an oracle for the variational solver.
///
/// `f(t) = cos(‖g0‖ t / 2) f0 + 2 sin(‖g0‖ t / 2) g0 / ‖g0‖`.
/// `g0` must be L²-orthogonal to f0. The result stays on the sphere for all
/// t but leaves the positive cone at finite time; it is returned as a plain
/// grid function so boundary crossings remain representable.
pub fn great_circle_r2(f0: &SphereFn, g0: &GridFunction, t: f64) -> Result<GridFunction> {
    if f0.r != 2.0 {
        return Err(Error::InvalidInput(format!(
            "great-circle oracle is exact only at r = 2, got r = {}",
            f0.r
        )));
    }
    let speed = lp_norm(g0, 2.0)?;
    if speed < 1e-14 {
        return Ok(f0.f.clone());
    }
    let ip = inner(&f0.f, g0)?;
    let bound = 1e-8 * lp_norm(&f0.f, 2.0)? * speed + 1e-12;
    if ip.abs() > bound {
        return Err(Error::NotTangent { inner: ip });
    }
    let theta = speed * t / 2.0;
    let (c, s) = (theta.cos(), theta.sin());
    f0.f.zip_with(g0, |fv, gv| c * fv + 2.0 * s * gv / speed)
}
