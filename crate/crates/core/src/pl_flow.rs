//! Closed-form evolution of piecewise-linear initial velocities.
//!
//! Piecewise-linear data is preserved by the flow: the Lagrangian breakpoints
//! never move, each segment stretches by `(1 + t·c/r)^r`, and everything is
//! carried in exact per-segment arithmetic. These flows double as
//! machine-precision oracles for the grid pipeline.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::piecewise::PiecewiseLinearFn;

/// A piecewise-linear initial velocity paired with the flow exponent.
/// The velocity must belong to the integrable-Lipschitz algebra: zero left
/// tail with value 0 at the first breakpoint, and zero right tail so the
/// slope is integrable.
#[derive(Clone, Debug)]
pub struct PlState {
    velocity: PiecewiseLinearFn,
    r: Exponent,
}

impl PlState {
    pub fn new(velocity: PiecewiseLinearFn, r: Exponent) -> Result<Self> {
        if velocity.left_tail_slope() != 0.0 {
            return Err(Error::InvalidInput(
                "velocity must have zero left tail slope".into(),
            ));
        }
        if velocity.node_values()[0] != 0.0 {
            return Err(Error::InvalidInput(
                "velocity must vanish at its first breakpoint".into(),
            ));
        }
        if velocity.right_tail_slope() != 0.0 {
            return Err(Error::InvalidInput(
                "velocity slope must be integrable: zero right tail slope".into(),
            ));
        }
        Ok(PlState { velocity, r })
    }

    pub fn velocity(&self) -> &PiecewiseLinearFn {
        &self.velocity
    }

    pub fn r(&self) -> Exponent {
        self.r
    }

    /// Segment slopes c_0..c_m of the velocity.
    pub fn slopes(&self) -> Vec<f64> {
        self.velocity.segment_slopes()
    }

    /// Blow-up time from the segment slopes (the tails are flat and never
    /// blow up): `-r / min c_i` for r > 0, `|r| / max c_i` for r < 0, ∞ when
    /// the relevant extremum has the harmless sign or r = ∞.
    pub fn blowup_time(&self) -> f64 {
        let slopes = self.slopes();
        match self.r {
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

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!("time must be >= 0, got {t}")));
        }
        let t_star = self.blowup_time();
        if t >= t_star {
            return Err(Error::BlowUp { t, t_star });
        }
        Ok(())
    }
}

/// Per-segment stretch factor.
fn stretch(c: f64, t: f64, r: Exponent) -> f64 {
    match r {
        Exponent::Finite(r) => (1.0 + t * c / r).powf(r),
        Exponent::Infinite => (t * c).exp(),
    }
}

/// The flow diffeomorphism at time t: same breakpoints, slope
/// `(1 + t·c_i/r)^r` per segment, identity left of the support.
pub fn flow_diffeo(state: &PlState, t: f64) -> Result<PiecewiseLinearFn> {
    state.check_time(t)?;
    let bp = state.velocity.breakpoints();
    let mut values = Vec::with_capacity(bp.len());
    values.push(bp[0]);
    let mut phi = bp[0];
    for (seg, &c) in state.slopes().iter().enumerate() {
        phi += stretch(c, t, state.r) * (bp[seg + 1] - bp[seg]);
        values.push(phi);
    }
    PiecewiseLinearFn::new(bp.to_vec(), values, 1.0, 1.0)
}

/// The Eulerian velocity at time t: breakpoints move to φ(t, b_i), segment
/// slopes become `c_i / (1 + t·c_i/r)` (unchanged at r = ∞).
pub fn flow_velocity(state: &PlState, t: f64) -> Result<PiecewiseLinearFn> {
    state.check_time(t)?;
    let bp = state.velocity.breakpoints();
    // Moved breakpoints, telescoped directly (flow_diffeo may canonicalize
    // collinear nodes away, e.g. at t = 0).
    let mut moved = Vec::with_capacity(bp.len());
    moved.push(bp[0]);
    let mut phi = bp[0];
    for (seg, &c) in state.slopes().iter().enumerate() {
        phi += stretch(c, t, state.r) * (bp[seg + 1] - bp[seg]);
        moved.push(phi);
    }
    let mut values = Vec::with_capacity(bp.len());
    values.push(0.0);
    let mut u = 0.0;
    for (seg, &c) in state.slopes().iter().enumerate() {
        let slope = match state.r {
            Exponent::Finite(r) => c / (1.0 + t * c / r),
            Exponent::Infinite => c,
        };
        u += slope * (moved[seg + 1] - moved[seg]);
        values.push(u);
    }
    PiecewiseLinearFn::new(moved, values, 0.0, 0.0)
}

/// `Σ_i |u_x|^r · (Eulerian segment length)`: the conserved quantity of the
/// flow, exactly `Σ |c_i|^r Δb_i` in closed form.
pub fn slope_norm_power(state: &PlState, t: f64) -> Result<f64> {
    state.check_time(t)?;
    let Exponent::Finite(r) = state.r else {
        // sup |c_i| is the conserved quantity at r = ∞.
        return Ok(state.slopes().iter().fold(0.0_f64, |m, c| m.max(c.abs())));
    };
    let bp = state.velocity.breakpoints();
    let mut sum = 0.0;
    for (seg, &c) in state.slopes().iter().enumerate() {
        let len = (bp[seg + 1] - bp[seg]) * stretch(c, t, state.r);
        let slope = c / (1.0 + t * c / r);
        sum += slope.abs().powf(r) * len;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat_state(r: Exponent) -> PlState {
        PlState::new(PiecewiseLinearFn::hat(0.0, 1.0, 2.0, 1.0).unwrap(), r).unwrap()
    }

    #[test]
    fn zero_velocity_flows_to_identity() {
        let zero = PiecewiseLinearFn::new(vec![0.0, 1.0], vec![0.0, 0.0], 0.0, 0.0).unwrap();
        let state = PlState::new(zero, Exponent::finite(2.0).unwrap()).unwrap();
        let phi = flow_diffeo(&state, 3.0).unwrap();
        for (b, v) in phi.breakpoints().iter().zip(phi.node_values()) {
            assert!((b - v).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_flow_matches_hand_telescoping() {
        // slopes ±1, r = 2, t = 1: stretches (1 ± 0.5)² = 2.25 and 0.25,
        // φ(2) = 0 + 2.25 + 0.25 = 2.5.
        let state = hat_state(Exponent::finite(2.0).unwrap());
        let phi = flow_diffeo(&state, 1.0).unwrap();
        assert_eq!(phi.breakpoints(), &[0.0, 1.0, 2.0]);
        let v = phi.node_values();
        assert!((v[0] - 0.0).abs() < 1e-15);
        assert!((v[1] - 2.25).abs() < 1e-12);
        assert!((v[2] - 2.5).abs() < 1e-12);
        assert_eq!(phi.left_tail_slope(), 1.0);
    }

    #[test]
    fn hat_blows_up_at_r() {
        let state = hat_state(Exponent::finite(2.0).unwrap());
        assert_eq!(state.blowup_time(), 2.0);
        match flow_diffeo(&state, 2.0) {
            Err(Error::BlowUp { t_star, .. }) => assert_eq!(t_star, 2.0),
            other => panic!("expected BlowUp, got {other:?}"),
        }
    }

    #[test]
    fn velocity_at_zero_is_initial() {
        let state = hat_state(Exponent::finite(2.0).unwrap());
        let u = flow_velocity(&state, 0.0).unwrap();
        assert_eq!(u.breakpoints(), state.velocity().breakpoints());
        for (a, b) in u.node_values().iter().zip(state.velocity().node_values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hat_velocity_slopes_evolve() {
        // r = 2, t = 1: slopes 1/(1.5) = 2/3 and -1/(0.5) = -2.
        let state = hat_state(Exponent::finite(2.0).unwrap());
        let u = flow_velocity(&state, 1.0).unwrap();
        let slopes = u.segment_slopes();
        assert!((slopes[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((slopes[1] + 2.0).abs() < 1e-12);
        // Breakpoints moved with the flow.
        assert!((u.breakpoints()[1] - 2.25).abs() < 1e-12);
    }

    #[test]
    fn infinite_r_preserves_slopes() {
        let state = hat_state(Exponent::Infinite);
        for t in [0.5, 1.0, 4.0] {
            let u = flow_velocity(&state, t).unwrap();
            let slopes = u.segment_slopes();
            assert!((slopes[0] - 1.0).abs() < 1e-12, "t = {t}");
            assert!((slopes[1] + 1.0).abs() < 1e-12, "t = {t}");
            // but the breakpoints do move
            assert!(u.breakpoints()[1] > 1.0);
        }
    }

    #[test]
    fn slope_norm_power_is_time_invariant() {
        let state = PlState::new(
            PiecewiseLinearFn::new(
                vec![-1.0, 0.0, 0.5, 2.0],
                vec![0.0, 0.7, -0.2, 0.0],
                0.0,
                0.0,
            )
            .unwrap(),
            Exponent::finite(2.5).unwrap(),
        )
        .unwrap();
        let ref_val = slope_norm_power(&state, 0.0).unwrap();
        let t_star = state.blowup_time();
        for k in 1..8 {
            let t = 0.9 * t_star * k as f64 / 8.0;
            let v = slope_norm_power(&state, t).unwrap();
            assert!((v - ref_val).abs() <= 1e-12 * ref_val, "t = {t}");
        }
    }

    #[test]
    fn algebra_membership_enforced() {
        let bad_tail =
            PiecewiseLinearFn::new(vec![0.0, 1.0], vec![0.0, 1.0], 0.0, 0.5).unwrap();
        assert!(PlState::new(bad_tail, Exponent::finite(2.0).unwrap()).is_err());
        let bad_anchor =
            PiecewiseLinearFn::new(vec![0.0, 1.0], vec![0.3, 1.0], 0.0, 0.0).unwrap();
        assert!(PlState::new(bad_anchor, Exponent::finite(2.0).unwrap()).is_err());
    }
}
