//! Sampled functions on uniform 1-D grids and their calculus.
//!
//! A [`GridFunction`] lives either on a truncated line window `[a, b]`
//! (n samples, spacing `h = (b-a)/(n-1)`, endpoints included) or on the unit
//! circle identified with `[0, 1)` (n samples at `i/n`).
//!
//! Values between samples are always read through monotone piecewise-linear
//! interpolation; it cannot overshoot, so interpolating a strictly increasing
//! map never destroys `φ_x > 0`. Derivatives of that interpolant are constant
//! per cell — [`cell_slopes`] — and integrating them back telescopes exactly.
//! The pointwise second-order stencil lives in [`derivative`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for the one-sided decay conditions at the left window
/// edge. Functions meant as Lie-algebra elements must vanish there to this
/// accuracy so that truncating the line to a window is exact up to tail mass.
pub const DECAY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Line { a: f64, b: f64 },
    Circle,
}

impl Domain {
    pub fn line(a: f64, b: f64) -> Self {
        Domain::Line { a, b }
    }

    pub fn length(&self) -> f64 {
        match self {
            Domain::Line { a, b } => b - a,
            Domain::Circle => 1.0,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "need at least 4 samples, got {}",
                values.len()
            )));
        }
        if let Domain::Line { a, b } = domain {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidInput(format!(
                    "invalid line window [{a}, {b}]"
                )));
            }
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction { domain, values })
    }

    pub fn from_fn(domain: Domain, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let probe = GridFunction::new(domain, vec![0.0; n.max(4)])?;
        if n < 4 {
            return Err(Error::InvalidInput(format!("need at least 4 samples, got {n}")));
        }
        let values: Vec<f64> = (0..n).map(|i| f(probe.x(i))).collect();
        GridFunction::new(domain, values)
    }

    pub fn zeros(domain: Domain, n: usize) -> Result<Self> {
        GridFunction::new(domain, vec![0.0; n])
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid spacing: `(b-a)/(n-1)` on the line, `1/n` on the circle.
    pub fn spacing(&self) -> f64 {
        match self.domain {
            Domain::Line { a, b } => (b - a) / (self.n() - 1) as f64,
            Domain::Circle => 1.0 / self.n() as f64,
        }
    }

    /// Coordinate of sample i.
    pub fn x(&self, i: usize) -> f64 {
        match self.domain {
            Domain::Line { a, .. } => a + i as f64 * self.spacing(),
            Domain::Circle => i as f64 / self.n() as f64,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(move |i| self.x(i))
    }

    /// New function on the same grid with mapped values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise binary combination; grids must agree.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.domain != other.domain || self.n() != other.n() {
            return Err(Error::DomainMismatch(
                "operands sampled on different grids".into(),
            ));
        }
        Ok(GridFunction {
            domain: self.domain,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| f(u, v))
                .collect(),
        })
    }

    /// Piecewise-linear evaluation. Line inputs slightly outside the window
    /// (within a relative pad) clamp to the edge; further out is an error.
    /// Circle inputs wrap.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let n = self.n();
        match self.domain {
            Domain::Line { a, b } => {
                let pad = 1e-9 * (b - a);
                if x < a - pad || x > b + pad {
                    return Err(Error::DomainMismatch(format!(
                        "x = {x} outside window [{a}, {b}]"
                    )));
                }
                let xc = x.clamp(a, b);
                let h = self.spacing();
                let pos = (xc - a) / h;
                let i = (pos.floor() as usize).min(n - 2);
                let frac = (pos - i as f64).clamp(0.0, 1.0);
                Ok(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
            }
            Domain::Circle => {
                let xw = x.rem_euclid(1.0);
                let pos = xw * n as f64;
                let i = (pos.floor() as usize).min(n - 1);
                let frac = pos - i as f64;
                let next = self.values[(i + 1) % n];
                Ok(self.values[i] * (1.0 - frac) + next * frac)
            }
        }
    }
}

/// The midpoint grid carrying per-cell slopes of a line function with n
/// samples: n-1 points at `a + h/2, ..., b - h/2`, spacing h.
pub fn midpoint_domain(line: Domain, n: usize) -> Result<Domain> {
    match line {
        Domain::Line { a, b } => {
            let h = (b - a) / (n - 1) as f64;
            Ok(Domain::Line {
                a: a + 0.5 * h,
                b: b - 0.5 * h,
            })
        }
        Domain::Circle => Err(Error::UnsupportedDomain(
            "midpoint grid is only defined for line windows".into(),
        )),
    }
}

/// Slopes of the piecewise-linear interpolant, one per cell.
///
/// On the line the result lives on the midpoint grid (n-1 samples). On the
/// circle it wraps (`(f[i+1 mod n] - f[i]) / h`, n samples); the values are
/// understood at cell midpoints.
pub fn cell_slopes(f: &GridFunction) -> Result<GridFunction> {
    let h = f.spacing();
    let v = f.values();
    match f.domain() {
        Domain::Line { .. } => {
            let slopes: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]) / h).collect();
            GridFunction::new(midpoint_domain(f.domain(), f.n())?, slopes)
        }
        Domain::Circle => {
            let n = f.n();
            let slopes: Vec<f64> = (0..n).map(|i| (v[(i + 1) % n] - v[i]) / h).collect();
            GridFunction::new(Domain::Circle, slopes)
        }
    }
}

/// Second-order pointwise derivative: central differences in the interior,
/// one-sided three-point stencils at line endpoints, cyclic on the circle.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let n = f.n();
    let h = f.spacing();
    let v = f.values();
    let mut d = vec![0.0; n];
    match f.domain() {
        Domain::Line { .. } => {
            d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            for i in 1..n - 1 {
                d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            }
            d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        }
        Domain::Circle => {
            for i in 0..n {
                let prev = v[(i + n - 1) % n];
                let next = v[(i + 1) % n];
                d[i] = (next - prev) / (2.0 * h);
            }
        }
    }
    GridFunction {
        domain: f.domain(),
        values: d,
    }
}

/// Trapezoid integral over the whole domain (cyclic rectangle rule on the
/// circle, where it coincides with the trapezoid rule).
pub fn integral(f: &GridFunction) -> f64 {
    let h = f.spacing();
    let v = f.values();
    match f.domain() {
        Domain::Line { .. } => {
            let interior: f64 = v[1..v.len() - 1].iter().sum();
            h * (0.5 * (v[0] + v[v.len() - 1]) + interior)
        }
        Domain::Circle => h * v.iter().sum::<f64>(),
    }
}

/// L^r norm `(∫ |f|^r)^(1/r)` for r ≥ 1, or the max norm for r = ∞.
pub fn lp_norm(f: &GridFunction, r: f64) -> Result<f64> {
    if let Some(index) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidInput(format!("lp_norm needs r >= 1, got {r}")));
    }
    if r.is_infinite() {
        return Ok(f.values().iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let powed = f.map(|v| v.abs().powf(r));
    Ok(integral(&powed).max(0.0).powf(1.0 / r))
}

/// Cumulative trapezoid integral `F(x) = ∫_a^x f`, `F(a) = 0`. Line only:
/// the lower limit -∞ of the continuum formulas is mapped to the left window
/// edge, which is exact up to tail mass when f decays there.
pub fn cumulative_integral(f: &GridFunction) -> Result<GridFunction> {
    if f.domain().is_circle() {
        return Err(Error::UnsupportedDomain(
            "cumulative integral needs a basepoint; the circle has none".into(),
        ));
    }
    let h = f.spacing();
    let v = f.values();
    let mut acc = Vec::with_capacity(v.len());
    let mut s = 0.0;
    acc.push(0.0);
    for w in v.windows(2) {
        s += 0.5 * h * (w[0] + w[1]);
        acc.push(s);
    }
    GridFunction::new(f.domain(), acc)
}

/// Inverse of a strictly increasing sampled map. The result ψ is sampled
/// uniformly on the image interval `[φ(a), φ(b)]` with the same n; each
/// sample solves the piecewise-linear interpolant of φ exactly, so nodes of
/// φ invert exactly and everything between is interpolation-accurate.
pub fn invert_monotone(phi: &GridFunction) -> Result<GridFunction> {
    if phi.domain().is_circle() {
        return Err(Error::UnsupportedDomain(
            "invert_monotone expects a line window (lift circle maps first)".into(),
        ));
    }
    let v = phi.values();
    check_strictly_increasing(v)?;
    let n = phi.n();
    let (ya, yb) = (v[0], v[n - 1]);
    let dy = (yb - ya) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for j in 0..n {
        let y = if j == n - 1 { yb } else { ya + j as f64 * dy };
        while seg + 2 < n && v[seg + 1] < y {
            seg += 1;
        }
        let (y0, y1) = (v[seg], v[seg + 1]);
        let frac = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        out.push(phi.x(seg) + frac * phi.spacing());
    }
    GridFunction::new(Domain::line(ya, yb), out)
}

/// Right translation f ∘ φ: samples `f(φ(x_i))` through the piecewise-linear
/// interpolant of f. The range of φ must stay inside the domain of f
/// (tolerance-padded) on the line; circle values wrap.
pub fn compose(f: &GridFunction, phi: &GridFunction) -> Result<GridFunction> {
    if f.domain().is_circle() != phi.domain().is_circle() {
        return Err(Error::DomainMismatch(
            "cannot compose across line and circle grids".into(),
        ));
    }
    let values: Result<Vec<f64>> = phi.values().iter().map(|&y| f.eval(y)).collect();
    GridFunction::new(phi.domain(), values?)
}

/// Interpolate a monotone graph `(xs[i], ys[i])` at increasing targets,
/// clamping beyond the graph ends. Used to read Eulerian fields off
/// Lagrangian data without building an explicit inverse.
pub fn interp_graph(xs: &[f64], ys: &[f64], targets: impl Iterator<Item = f64>) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut seg = 0usize;
    targets
        .map(|t| {
            if t <= xs[0] {
                return ys[0];
            }
            if t >= xs[n - 1] {
                return ys[n - 1];
            }
            while seg + 2 < n && xs[seg + 1] < t {
                seg += 1;
            }
            let w = (t - xs[seg]) / (xs[seg + 1] - xs[seg]);
            ys[seg] * (1.0 - w) + ys[seg + 1] * w
        })
        .collect()
}

pub(crate) fn check_strictly_increasing(v: &[f64]) -> Result<()> {
    for i in 0..v.len() - 1 {
        if v[i + 1] <= v[i] {
            return Err(Error::MonotonicityViolation { index: i });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Trapezoid,
    Simpson,
}

/// Composite quadrature rule. Trapezoid is the default everywhere (it matches
/// the piecewise-linear interpolation order); Simpson is available for
/// smooth integrands and needs an odd sample count on the line.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub tolerance: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            kind: QuadratureKind::Trapezoid,
            tolerance: 1e-10,
        }
    }
}

impl QuadratureRule {
    pub fn new(kind: QuadratureKind, tolerance: f64) -> Result<Self> {
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(QuadratureRule { kind, tolerance })
    }

    pub fn integrate(&self, f: &GridFunction) -> Result<f64> {
        match self.kind {
            QuadratureKind::Trapezoid => Ok(integral(f)),
            QuadratureKind::Simpson => {
                let n = f.n();
                let h = f.spacing();
                let v = f.values();
                match f.domain() {
                    Domain::Line { .. } => {
                        if n.is_multiple_of(2) {
                            return Err(Error::InvalidInput(format!(
                                "Simpson on the line needs an odd sample count, got {n}"
                            )));
                        }
                        let mut s = v[0] + v[n - 1];
                        for (i, &vi) in v.iter().enumerate().take(n - 1).skip(1) {
                            s += if i % 2 == 1 { 4.0 * vi } else { 2.0 * vi };
                        }
                        Ok(s * h / 3.0)
                    }
                    Domain::Circle => {
                        if !n.is_multiple_of(2) {
                            return Err(Error::InvalidInput(format!(
                                "Simpson on the circle needs an even sample count, got {n}"
                            )));
                        }
                        let mut s = 0.0;
                        for (i, &vi) in v.iter().enumerate() {
                            s += if i % 2 == 1 { 4.0 * vi } else { 2.0 * vi };
                        }
                        Ok(s * h / 3.0)
                    }
                }
            }
        }
    }
}
