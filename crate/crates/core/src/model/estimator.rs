//! Grid-search inverse of the behavior field.
//!
//! The observer watches the other agent for a window of ticks, then asks which
//! internal state on a regular `(c, a)` lattice would have produced the most
//! similar change of the relational state. Prediction holds the observer
//! fixed, exactly as [`motion_delta_of_other`] attributes the observed change.

use serde::{Deserialize, Serialize};

use super::dynamics::UpdateSign;
use super::field::{field_drive, BehaviorParams, DRIVE_EPSILON};
use super::geometry::{relational_state, wrap_angle, Pose, RelationalState};
use super::state::{EstimatedState, InternalState};
use super::TICK_SECONDS;
use crate::error::ConfigError;

/// Cognitive parameters: consideration gain and estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CognitiveParams {
    /// Per-tick consideration gain; negative values ignore the other.
    pub psi: f64,
    /// Lattice points per axis; odd so that 0 is on the grid.
    pub grid_n: usize,
    /// Ticks of observed motion pooled per estimate.
    pub window: usize,
    /// Stillness threshold, m/s.
    pub eps_v: f64,
    #[serde(default)]
    pub sign: UpdateSign,
}

impl Default for CognitiveParams {
    fn default() -> Self {
        CognitiveParams {
            psi: 0.0,
            grid_n: 21,
            window: 4,
            eps_v: 0.05,
            sign: UpdateSign::GapClosing,
        }
    }
}

impl CognitiveParams {
    pub fn with_psi(psi: f64) -> Self {
        CognitiveParams {
            psi,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.psi.is_finite() {
            return Err(ConfigError::invalid("psi", "must be finite"));
        }
        if self.grid_n < 3 || self.grid_n % 2 == 0 {
            return Err(ConfigError::invalid("grid_n", "must be odd and >= 3"));
        }
        if self.window == 0 {
            return Err(ConfigError::invalid("window", "must be >= 1"));
        }
        if !(self.eps_v.is_finite() && self.eps_v > 0.0) {
            return Err(ConfigError::invalid("eps_v", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Window duration in seconds.
    pub fn window_seconds(&self) -> f64 {
        self.window as f64 * TICK_SECONDS
    }

    /// The candidate lattice, row-major in `c` then `a`.
    pub fn grid(&self) -> impl Iterator<Item = InternalState> + '_ {
        let n = self.grid_n;
        let half = (n - 1) as f64 / 2.0;
        let coord = move |i: usize| (i as f64 - half) / half;
        (0..n).flat_map(move |i| (0..n).map(move |j| InternalState::new(coord(i), coord(j))))
    }
}

/// Change of the relational state attributed to one agent's motion.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MotionDelta {
    pub d_r: f64,
    pub d_theta12: f64,
    pub d_theta21: f64,
}

impl std::ops::Sub for MotionDelta {
    type Output = MotionDelta;
    fn sub(self, rhs: MotionDelta) -> MotionDelta {
        MotionDelta {
            d_r: self.d_r - rhs.d_r,
            d_theta12: self.d_theta12 - rhs.d_theta12,
            d_theta21: self.d_theta21 - rhs.d_theta21,
        }
    }
}

/// Relational-state change caused by the other's motion, with the observer held fixed.
pub fn motion_delta_of_other(me: &Pose, other_before: &Pose, other_after: &Pose) -> MotionDelta {
    let before = relational_state(me, other_before);
    let after = relational_state(me, other_after);
    MotionDelta {
        d_r: after.r - before.r,
        d_theta12: after.theta12 - before.theta12,
        d_theta21: after.theta21 - before.theta21,
    }
}

/// Normalized behavior difference in `[0, 1]`.
///
/// Radial error is scaled by the distance a full-speed agent covers in the
/// window; angular errors by the equivalent angular speed `v_max / r_int`.
pub fn behavior_distance(diff: &MotionDelta, phi: &BehaviorParams, window_seconds: f64) -> f64 {
    let radial_scale = phi.v_max * window_seconds;
    let angular_scale = phi.v_max / phi.r_int * window_seconds;
    let r = diff.d_r / radial_scale;
    let t12 = diff.d_theta12 / angular_scale;
    let t21 = diff.d_theta21 / angular_scale;
    ((r * r + t12 * t12 + t21 * t21).sqrt() / 3f64.sqrt()).min(1.0)
}

/// What the observer saw of the other across one estimation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowObservation {
    pub observer: Pose,
    pub other_start: Pose,
    pub other_end: Pose,
}

impl WindowObservation {
    pub fn delta(&self) -> MotionDelta {
        motion_delta_of_other(&self.observer, &self.other_start, &self.other_end)
    }

    /// Mean translational speed of the other over the window.
    pub fn speed(&self, cog: &CognitiveParams) -> f64 {
        self.other_start.position.distance(self.other_end.position) / cog.window_seconds()
    }
}

/// Geometry the prediction needs, fixed for the whole window.
#[derive(Debug, Clone, Copy)]
struct PredictionFrame {
    r0: f64,
    /// Observer's angle to the other; constant under the other's radial motion.
    observer_theta: f64,
    /// The other's signed bearing to the observer, relative to its heading.
    other_rel0: f64,
}

impl PredictionFrame {
    fn new(observer: &Pose, other: &Pose) -> Self {
        let x = relational_state(observer, other);
        PredictionFrame {
            r0: x.r,
            observer_theta: x.theta12,
            other_rel0: if x.r > 0.0 {
                other.relative_bearing(observer.position)
            } else {
                0.0
            },
        }
    }
}

/// Radial part of the predicted motion for one candidate.
fn predicted_d_r(frame: &PredictionFrame, s: InternalState, phi: &BehaviorParams, ticks: usize) -> f64 {
    let mut r = frame.r0;
    for _ in 0..ticks {
        let x = RelationalState {
            r,
            theta12: 0.0,
            theta21: frame.observer_theta,
        };
        let k = field_drive(&x, s, phi);
        if k.abs() > DRIVE_EPSILON {
            r = (r - phi.v_max * k * TICK_SECONDS).max(0.0);
        }
    }
    r - frame.r0
}

/// Angular part of the predicted motion; depends on Acceptance only.
fn predicted_d_theta(frame: &PredictionFrame, a: f64, phi: &BehaviorParams, ticks: usize) -> f64 {
    if frame.r0 == 0.0 {
        return 0.0;
    }
    let mut rel = frame.other_rel0;
    for _ in 0..ticks {
        rel = wrap_angle(rel - a * phi.omega_max * rel.sin() * TICK_SECONDS);
    }
    rel.abs() - frame.other_rel0.abs()
}

/// Motion the other would show over `ticks` if it followed the behavior field
/// with internal state `s` while the observer stood still.
///
/// Translation is radial, so the observer's angle to the other stays fixed
/// and the other's bearing changes only through its own turning.
pub fn predict_other_motion(
    observer: &Pose,
    other_start: &Pose,
    s: InternalState,
    phi: &BehaviorParams,
    ticks: usize,
) -> MotionDelta {
    let frame = PredictionFrame::new(observer, other_start);
    MotionDelta {
        d_r: predicted_d_r(&frame, s, phi, ticks),
        d_theta12: 0.0,
        d_theta21: predicted_d_theta(&frame, s.a, phi, ticks),
    }
}

const TIE_TOLERANCE: f64 = 1e-12;

/// Estimates the other's internal state from one observation window.
///
/// Returns `prev` marked uninformative when the other moved slower than
/// `eps_v`.
pub fn estimate_internal(
    obs: &WindowObservation,
    phi_hat: &BehaviorParams,
    cog: &CognitiveParams,
    prev: &EstimatedState,
) -> EstimatedState {
    if obs.speed(cog) < cog.eps_v {
        return prev.held();
    }
    let observed = obs.delta();
    let frame = PredictionFrame::new(&obs.observer, &obs.other_start);
    let window_seconds = cog.window_seconds();

    // Turning only depends on Acceptance; compute it once per lattice column.
    let n = cog.grid_n;
    let theta_by_a: Vec<f64> = cog
        .grid()
        .take(n)
        .map(|s| predicted_d_theta(&frame, s.a, phi_hat, cog.window))
        .collect();

    let mut best: Option<(f64, InternalState)> = None;
    for (idx, cand) in cog.grid().enumerate() {
        let predicted = MotionDelta {
            d_r: predicted_d_r(&frame, cand, phi_hat, cog.window),
            d_theta12: 0.0,
            d_theta21: theta_by_a[idx % n],
        };
        let score = 1.0 - behavior_distance(&(predicted - observed), phi_hat, window_seconds);
        best = match best {
            None => Some((score, cand)),
            Some((best_score, best_cand)) => {
                if score > best_score + TIE_TOLERANCE {
                    Some((score, cand))
                } else if score >= best_score - TIE_TOLERANCE
                    && prefer(cand, best_cand, prev.s_hat)
                {
                    Some((score.max(best_score), cand))
                } else {
                    Some((best_score, best_cand))
                }
            }
        };
    }
    let (score, s_hat) = best.expect("grid is never empty");
    EstimatedState {
        s_hat,
        score: score.clamp(0.0, 1.0),
        informative: true,
    }
}

/// Tie-break: closer to the previous estimate, then smaller norm.
fn prefer(cand: InternalState, incumbent: InternalState, prev: InternalState) -> bool {
    let dc = cand.distance(prev);
    let di = incumbent.distance(prev);
    if (dc - di).abs() > TIE_TOLERANCE {
        return dc < di;
    }
    cand.norm() < incumbent.norm() - TIE_TOLERANCE
}
