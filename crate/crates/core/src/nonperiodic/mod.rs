//! The non-periodic theory on the truncated line.
//!
//! Diffeomorphisms decay to the identity at the left window edge only (the
//! right edge is free; two-sided decay is not compatible with the flow).
//! The flat chart f = r(φ_x^{1/r} - 1) sends the invariant Finsler geometry
//! to a plain L^r geometry in which geodesics are straight lines, so the flow,
//! distances and boundary-value geodesics are all read off in closed form.

mod chart;
mod flow;
mod residual;
mod types;

pub use chart::{
    bvp_geodesic, finsler_norm, from_flat, geodesic_distance, path_energy, to_flat, BvpSolution,
};
pub use flow::{
    blowup_time, continue_to_blowup, eulerian_velocity, exact_flow, in_monotone_completion,
    BlowupLimit,
};
pub use residual::{infinity_euler_residual, lagrangian_residual, pj_residual};
pub use types::{Diagnostics, Diffeo, FlowParams, Trajectory};

pub(crate) use residual::time_derivative_samples;
