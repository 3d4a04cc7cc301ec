use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::geometry::{relational_state, wrap_angle, Pose, RelationalState};
use super::state::InternalState;
use crate::error::ConfigError;

/// Drive magnitudes below this are treated as "no translation".
pub const DRIVE_EPSILON: f64 = 1e-6;

/// Speed, turning and distance constants of the behavior field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorParams {
    /// Maximum walking speed, m/s.
    pub v_max: f64,
    /// Maximum turn rate, rad/s.
    pub omega_max: f64,
    /// Distance at which approach stops, m.
    pub r_int: f64,
    /// Distance at which repulsion starts, m.
    pub r_rep: f64,
    /// Ramp length over which drives saturate, m.
    pub s_r: f64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        BehaviorParams {
            v_max: 1.4,
            omega_max: PI,
            r_int: 1.2,
            r_rep: 4.0,
            s_r: 1.0,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("v_max", self.v_max),
            ("omega_max", self.omega_max),
            ("r_int", self.r_int),
            ("r_rep", self.r_rep),
            ("s_r", self.s_r),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::invalid(name, "must be finite and > 0"));
            }
        }
        if self.r_int >= self.r_rep {
            return Err(ConfigError::invalid("r_int", "must be smaller than r_rep"));
        }
        Ok(())
    }
}

/// Executable form of an agent's action for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionCommand {
    /// m/s, in `[0, v_max]`.
    pub speed: f64,
    /// rad/s, in `[-ω_max, ω_max]`.
    pub turn_rate: f64,
    /// World-frame direction of translation.
    pub move_bearing: f64,
}

impl MotionCommand {
    pub fn idle(heading: f64) -> Self {
        MotionCommand {
            speed: 0.0,
            turn_rate: 0.0,
            move_bearing: heading,
        }
    }
}

fn ramp(u: f64) -> f64 {
    u.clamp(0.0, 1.0)
}

/// Signed toward-other drive in `[-1, 1]`: positive approaches, negative retreats.
///
/// Positive Control pulls the agent in until `r_int`. Negative Control pushes
/// it out to `r_rep`, and negative Acceptance adds a retreat from an other
/// that is facing this agent.
pub fn field_drive(x: &RelationalState, s: InternalState, phi: &BehaviorParams) -> f64 {
    let approach = ramp((x.r - phi.r_int) / phi.s_r);
    let repulsion = ramp((phi.r_rep - x.r) / phi.s_r);
    let attended = x.theta21.cos().max(0.0);
    let k = s.c.max(0.0) * approach
        - (-s.c).max(0.0) * repulsion
        - (-s.a).max(0.0) * attended * repulsion;
    k.clamp(-1.0, 1.0)
}

/// Turn rate that displays Acceptance through body orientation.
///
/// Positive Acceptance turns the agent to face the other, negative turns it
/// away; the rate is `a · ω_max · sin(relative bearing)`, so it never
/// exceeds `ω_max` and vanishes for neutral Acceptance.
pub fn facing_turn_rate(relative_bearing: f64, a: f64, phi: &BehaviorParams) -> f64 {
    a * phi.omega_max * relative_bearing.sin()
}

/// Motion command of agent `me` toward or away from `other` given its
/// internal state.
pub fn behavior_field(
    me: &Pose,
    other: &Pose,
    s: InternalState,
    phi: &BehaviorParams,
) -> MotionCommand {
    let x = relational_state(me, other);
    let k = field_drive(&x, s, phi);
    let to_other = me.bearing_to(other.position);
    let (speed, move_bearing) = if k > DRIVE_EPSILON {
        (phi.v_max * k, to_other)
    } else if k < -DRIVE_EPSILON {
        (phi.v_max * -k, wrap_angle(to_other + PI))
    } else {
        (0.0, me.heading)
    };
    let turn_rate = if x.r > 0.0 {
        facing_turn_rate(me.relative_bearing(other.position), s.a, phi)
    } else {
        0.0
    };
    MotionCommand {
        speed,
        turn_rate,
        move_bearing,
    }
}
