//! Geometric solution machinery for the generalized Proudman-Johnson /
//! r-Hunter-Saxton family of equations.
//!
//! The equations are the geodesic flow of the right-invariant homogeneous
//! W^{1,r} Finsler metric on a diffeomorphism group. A chart map turns the
//! non-periodic problem into straight lines in a flat L^r geometry and the
//! periodic problem into geodesics on an L^r-sphere of radius r, which is
//! what every module here exploits:
//!
//! * [`grid`] — sampled functions, norms, derivatives, monotone inversion;
//! * [`piecewise`] — exact piecewise-linear functions;
//! * [`nonperiodic`] — the chart, exact flows, blow-up, distances, BVP
//!   geodesics and residual verifiers on the truncated line;
//! * [`pl_flow`] — closed-form evolution of piecewise-linear velocities;
//! * [`periodic`] — the sphere chart and a constrained variational geodesic
//!   solver for the circle;
//! * [`crosscheck`] — an independent Eulerian integrator of the nonlocal
//!   transport form, for discretization-independent validation;
//! * [`oracle`] — near machine-precision closed-form fields from analytic
//!   initial data;
//! * [`io`] — CSV/JSON exchange formats.

pub mod crosscheck;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod io;
pub mod nonperiodic;
pub mod oracle;
pub mod periodic;
pub mod piecewise;
pub mod pl_flow;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use grid::{Domain, GridFunction};
