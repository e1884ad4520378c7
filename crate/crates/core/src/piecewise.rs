//! Exact piecewise-linear functions on the line.
//!
//! Breakpoint/value pairs with affine tails. These are the low-regularity
//! velocities and diffeomorphisms whose flow stays piecewise linear, so the
//! pl-flow module can evolve them in closed form with no grid error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<f64>,
    node_values: Vec<f64>,
    left_tail_slope: f64,
    right_tail_slope: f64,
}

impl PiecewiseLinearFn {
    /// Build and canonicalize. Breakpoints must be strictly increasing;
    /// interior breakpoints whose two adjacent segments have exactly equal
    /// slopes are merged away so that structural equality is well defined.
    pub fn new(
        breakpoints: Vec<f64>,
        node_values: Vec<f64>,
        left_tail_slope: f64,
        right_tail_slope: f64,
    ) -> Result<Self> {
        if breakpoints.len() != node_values.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints but {} node values",
                breakpoints.len(),
                node_values.len()
            )));
        }
        if breakpoints.is_empty() {
            return Err(Error::InvalidInput("need at least one breakpoint".into()));
        }
        for (index, v) in breakpoints.iter().chain(node_values.iter()).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: index % breakpoints.len(),
                });
            }
        }
        if !(left_tail_slope.is_finite() && right_tail_slope.is_finite()) {
            return Err(Error::InvalidInput("tail slopes must be finite".into()));
        }
        for i in 0..breakpoints.len() - 1 {
            if breakpoints[i + 1] <= breakpoints[i] {
                return Err(Error::MonotonicityViolation { index: i });
            }
        }
        let mut pl = PiecewiseLinearFn {
            breakpoints,
            node_values,
            left_tail_slope,
            right_tail_slope,
        };
        pl.merge_collinear();
        Ok(pl)
    }

    /// Hat profile: 0 at b0, rises to `amplitude` at b1, back to 0 at b2,
    /// zero tails.
    pub fn hat(b0: f64, b1: f64, b2: f64, amplitude: f64) -> Result<Self> {
        PiecewiseLinearFn::new(vec![b0, b1, b2], vec![0.0, amplitude, 0.0], 0.0, 0.0)
    }

    fn merge_collinear(&mut self) {
        if self.breakpoints.len() < 3 {
            return;
        }
        let mut keep = vec![true; self.breakpoints.len()];
        for (i, k) in keep
            .iter_mut()
            .enumerate()
            .take(self.breakpoints.len() - 1)
            .skip(1)
        {
            let sl = (self.node_values[i] - self.node_values[i - 1])
                / (self.breakpoints[i] - self.breakpoints[i - 1]);
            let sr = (self.node_values[i + 1] - self.node_values[i])
                / (self.breakpoints[i + 1] - self.breakpoints[i]);
            if sl == sr {
                *k = false;
            }
        }
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut bp = Vec::with_capacity(self.breakpoints.len());
        let mut nv = Vec::with_capacity(self.node_values.len());
        for (i, &k) in keep.iter().enumerate() {
            if k {
                bp.push(self.breakpoints[i]);
                nv.push(self.node_values[i]);
            }
        }
        self.breakpoints = bp;
        self.node_values = nv;
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn node_values(&self) -> &[f64] {
        &self.node_values
    }

    pub fn left_tail_slope(&self) -> f64 {
        self.left_tail_slope
    }

    pub fn right_tail_slope(&self) -> f64 {
        self.right_tail_slope
    }

    /// Interior segment slopes, one per breakpoint gap.
    pub fn segment_slopes(&self) -> Vec<f64> {
        self.breakpoints
            .windows(2)
            .zip(self.node_values.windows(2))
            .map(|(b, v)| (v[1] - v[0]) / (b[1] - b[0]))
            .collect()
    }

    /// All slopes in left-to-right order: left tail, segments, right tail.
    pub fn all_slopes(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.breakpoints.len() + 1);
        s.push(self.left_tail_slope);
        s.extend(self.segment_slopes());
        s.push(self.right_tail_slope);
        s
    }

    /// Exact affine evaluation, affine extension in the tails.
    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        let nv = &self.node_values;
        if x <= bp[0] {
            return nv[0] + self.left_tail_slope * (x - bp[0]);
        }
        let m = bp.len();
        if x >= bp[m - 1] {
            return nv[m - 1] + self.right_tail_slope * (x - bp[m - 1]);
        }
        // partition_point: first index with bp[i] > x; x lies in [bp[i-1], bp[i]).
        let i = bp.partition_point(|&b| b <= x);
        let frac = (x - bp[i - 1]) / (bp[i] - bp[i - 1]);
        nv[i - 1] + frac * (nv[i] - nv[i - 1])
    }

    /// Sample onto a uniform line grid. The window must cover a neighborhood
    /// of every breakpoint; sampling is exact at the sample points.
    pub fn to_grid(&self, domain: Domain, n: usize) -> Result<GridFunction> {
        let Domain::Line { a, b } = domain else {
            return Err(Error::UnsupportedDomain(
                "piecewise-linear sampling targets a line window".into(),
            ));
        };
        let (first, last) = (self.breakpoints[0], *self.breakpoints.last().unwrap());
        if a > first || b < last {
            return Err(Error::DomainMismatch(format!(
                "window [{a}, {b}] does not cover breakpoints [{first}, {last}]"
            )));
        }
        GridFunction::from_fn(domain, n, |x| self.eval(x))
    }
}
