//! Two-agent spatial interaction with consideration for the other.
//!
//! * [`model`]: behavior field, grid-search estimator and consideration dynamics.
//! * [`sim`]: field layout, task protocol, agent policies and trajectory logs.
//! * [`analysis`]: avoidance metric, ANOVA, permutation comparisons and the
//!   hierarchical trend regression.
//! * [`session`]: real-time session host for a human-steered participant.

pub mod analysis;
pub mod error;
pub mod model;
pub mod session;
pub mod sim;

pub use error::{AnalysisError, ConfigError, LogError};
pub use model::{
    behavior_field, estimate_internal, motion_delta_of_other, relational_state, step_kinematics,
    update_internal, BehaviorParams, CognitiveParams, EstimatedState, InternalState, MotionCommand,
    MotionDelta, Pose, RelationalState, Vec2,
};
pub use sim::{
    run_experiment, run_trial, Condition, FieldLayout, ParticipantPreset, TaskSchedule, Target,
    TrajectoryLog, TrialConfig,
};
