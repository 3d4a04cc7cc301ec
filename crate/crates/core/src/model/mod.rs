//! The interaction model: relational geometry, behavior generation,
//! internal-state estimation and consideration dynamics.
//!
//! Everything here is a pure function of its inputs.

pub mod dynamics;
pub mod estimator;
pub mod field;
pub mod geometry;
pub mod kinematics;
pub mod state;

/// Simulation and logging period, seconds.
pub const TICK_SECONDS: f64 = 0.05;

pub use dynamics::{update_internal, UpdateSign};
pub use estimator::{
    behavior_distance, estimate_internal, motion_delta_of_other, predict_other_motion,
    CognitiveParams, MotionDelta, WindowObservation,
};
pub use field::{behavior_field, field_drive, BehaviorParams, MotionCommand};
pub use geometry::{relational_state, wrap_angle, Pose, Rect, RelationalState, Vec2};
pub use kinematics::step_kinematics;
pub use state::{EstimatedState, InternalState};
