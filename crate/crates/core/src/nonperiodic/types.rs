//! Domain types for the non-periodic flow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::grid::{cell_slopes, check_strictly_increasing, Domain, GridFunction, DECAY_TOL};

/// An orientation-preserving map of a line window, decaying to the identity
/// at the left edge. Strict monotonicity and the anchor `φ(a) = a` are
/// validated on construction; per-cell slopes of the piecewise-linear
/// interpolant are cached (all positive).
#[derive(Clone, Debug)]
pub struct Diffeo {
    phi: GridFunction,
    slopes: GridFunction,
    min_slope: f64,
}

impl Diffeo {
    pub fn new(phi: GridFunction) -> Result<Self> {
        let Domain::Line { a, .. } = phi.domain() else {
            return Err(Error::UnsupportedDomain(
                "a line-window diffeomorphism cannot live on the circle".into(),
            ));
        };
        check_strictly_increasing(phi.values())?;
        if (phi.values()[0] - a).abs() > DECAY_TOL {
            return Err(Error::InvalidInput(format!(
                "φ(a) - a = {:.3e} exceeds the decay tolerance {DECAY_TOL:.0e}",
                phi.values()[0] - a
            )));
        }
        let slopes = cell_slopes(&phi)?;
        let min_slope = slopes.values().iter().cloned().fold(f64::INFINITY, f64::min);
        if min_slope <= 0.0 {
            // Unreachable after the strict-increase check, but cheap.
            return Err(Error::MonotonicityViolation { index: 0 });
        }
        Ok(Diffeo {
            phi,
            slopes,
            min_slope,
        })
    }

    pub fn identity(a: f64, b: f64, n: usize) -> Result<Self> {
        Diffeo::new(GridFunction::from_fn(Domain::line(a, b), n, |x| x)?)
    }

    pub fn phi(&self) -> &GridFunction {
        &self.phi
    }

    pub fn window(&self) -> (f64, f64) {
        match self.phi.domain() {
            Domain::Line { a, b } => (a, b),
            Domain::Circle => unreachable!(),
        }
    }

    pub fn n(&self) -> usize {
        self.phi.n()
    }

    /// Per-cell slopes on the midpoint grid (the derivative of the
    /// piecewise-linear interpolant).
    pub fn slopes(&self) -> &GridFunction {
        &self.slopes
    }

    pub fn min_slope(&self) -> f64 {
        self.min_slope
    }

    /// Displacement from the identity, `φ(x) - x`, on the nodes.
    pub fn displacement(&self) -> GridFunction {
        let mut values = Vec::with_capacity(self.phi.n());
        for (i, &v) in self.phi.values().iter().enumerate() {
            values.push(v - self.phi.x(i));
        }
        GridFunction::new(self.phi.domain(), values).expect("same grid")
    }
}

/// Exponent and output time grid for a flow computation. Times start at 0
/// and increase; blow-up is checked per call against the initial data.
#[derive(Clone, Debug)]
pub struct FlowParams {
    pub r: Exponent,
    pub times: Vec<f64>,
}

impl FlowParams {
    pub fn new(r: Exponent, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("need at least one output time".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidInput(format!(
                "times must start at 0, got {}",
                times[0]
            )));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "times must increase strictly (violated at index {i})"
                )));
            }
        }
        Ok(FlowParams { r, times })
    }

    /// Uniform time grid 0, dt, 2·dt, ..., covering `[0, t_end]`.
    pub fn uniform(r: Exponent, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0 && dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need t_end > 0 and dt > 0, got t_end = {t_end}, dt = {dt}"
            )));
        }
        let steps = (t_end / dt).round().max(1.0) as usize;
        let dt = t_end / steps as f64;
        FlowParams::new(r, (0..=steps).map(|k| k as f64 * dt).collect())
    }

    pub fn lambda(&self) -> f64 {
        self.r.lambda()
    }
}

/// Per-time diagnostics. `finsler_speed` is `‖u_x(t)‖_{L^r}` evaluated in
/// Lagrangian variables; it is `None` for r < 1 where the norm is not defined.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Diagnostics {
    pub finsler_speed: Option<f64>,
    pub min_phi_x: f64,
}

/// A time-indexed flow: diffeomorphisms, optional Eulerian fields and
/// diagnostics. `phi_x` holds the per-cell stretch factors — closed-form for
/// exact flows, so residual checks see no spatial differencing error.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub params: FlowParams,
    pub diffeos: Vec<Diffeo>,
    pub phi_x: Vec<GridFunction>,
    pub velocities: Option<Vec<GridFunction>>,
    pub velocity_slopes: Option<Vec<GridFunction>>,
    pub diagnostics: Vec<Diagnostics>,
    pub initial_velocity: Option<GridFunction>,
    pub blowup_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.params.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.params.times
    }
}
